//! Everything derived from a lattice configuration before any pulse is
//! applied: `H₀`, its modes, the ladder operators, `ψ_S` and `Ĥ₀`.

use crate::error::Result;
use crate::fock::{assemble_field_operator, build_ladder_operators, FieldOperator, FreeHamiltonian, LadderSet};
use crate::lattice::{build_free_hamiltonian, mode_basis, LatticeConfig, ModeBasis, SingleParticleOperator};

#[derive(Debug, Clone)]
pub struct LatticeSystem {
    pub config: LatticeConfig,
    pub h0: SingleParticleOperator,
    pub basis: ModeBasis,
    pub ladder: LadderSet,
    pub field: FieldOperator,
    pub free: FreeHamiltonian,
}

impl LatticeSystem {
    pub fn build(config: &LatticeConfig, max_sites: usize) -> Result<Self> {
        let h0 = build_free_hamiltonian(config)?;
        let basis = mode_basis(&h0, config)?;
        let ladder = build_ladder_operators(&basis, max_sites)?;
        let field = assemble_field_operator(&ladder, &basis)?;
        let free = FreeHamiltonian::new(h0.clone(), &basis);
        Ok(LatticeSystem {
            config: *config,
            h0,
            basis,
            ladder,
            field,
            free,
        })
    }
}
