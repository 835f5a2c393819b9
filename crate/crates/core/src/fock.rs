//! Second-quantized layer on the `4^N`-dimensional fermionic Fock space.
//!
//! Occupation basis: bit `j` of a basis index is the occupation of physical
//! mode `j`, with electrons `b_1..b_N` on bits `0..N` and positrons
//! `d_1..d_N` on bits `N..2N`. A ladder operator on mode `j` carries the sign
//! `(-1)^(occupied modes below j)`. The vacuum is basis index 0.
//!
//! The field is linear in the "sea" operators `a_p`: `a_p = b_{p+1}` for
//! `p < N` and `a_p = d†_{p-N+1}` for `p ≥ N`, matching the mode order of
//! [`ModeBasis`]. A [`FieldOperator`] stores the coefficient matrix
//! `ψ_k = Σ_p C_kp a_p` over components `k = 2·site + spin`.

use crate::error::{LabError, Result};
use crate::lattice::{LatticeConfig, ModeBasis, Potential, Scheme, SingleParticleOperator};
use crate::linalg::{CMat, CVec, C64, ONE, ZERO};
use crate::sparse::SparseMatrix;

pub const DEFAULT_MAX_SITES: usize = 8;

pub type FockOperator = SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n_sites: usize,
}

impl FockSpace {
    pub fn new(n_sites: usize, max_sites: usize) -> Result<Self> {
        if n_sites > max_sites || 2 * n_sites >= usize::BITS as usize {
            return Err(LabError::FockTooLarge {
                n_sites,
                dim: 1usize.checked_shl(2 * n_sites as u32).unwrap_or(usize::MAX),
                max_sites,
            });
        }
        Ok(FockSpace { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        2 * self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.n_sites)
    }

    /// Action of a single ladder operator on a basis state.
    #[inline]
    pub fn ladder(&self, state: usize, mode: usize, create: bool) -> Option<(f64, usize)> {
        let bit = 1usize << mode;
        let occupied = state & bit != 0;
        if occupied == create {
            return None;
        }
        let sign = if (state & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        Some((sign, state ^ bit))
    }

    /// Action of `a_p` (or `a_p†` when `dagger`).
    #[inline]
    fn sea(&self, state: usize, p: usize, dagger: bool) -> Option<(f64, usize)> {
        let creates_physical = (p >= self.n_sites) != dagger;
        self.ladder(state, p, creates_physical)
    }

    /// Charge number `#electrons - #positrons` of a basis state.
    pub fn charge_number(&self, state: usize) -> i64 {
        let mask = (1usize << self.n_sites) - 1;
        (state & mask).count_ones() as i64 - ((state >> self.n_sites) & mask).count_ones() as i64
    }

    pub fn ladder_operator(&self, mode: usize, create: bool) -> FockOperator {
        let triplets = (0..self.dim())
            .filter_map(|s| self.ladder(s, mode, create).map(|(sg, t)| (t, s, C64::new(sg, 0.0))))
            .collect();
        SparseMatrix::from_triplets(self.dim(), triplets)
    }

    /// `Σ_pq M_pq a_p† a_q + constant`.
    pub fn quadratic_operator(&self, m: &CMat, constant: f64) -> Result<FockOperator> {
        let modes = self.n_modes();
        if m.shape() != (modes, modes) {
            return Err(LabError::Shape(format!(
                "quadratic form must be {modes}×{modes}, got {:?}",
                m.shape()
            )));
        }
        let mut triplets = Vec::new();
        for s in 0..self.dim() {
            if constant != 0.0 {
                triplets.push((s, s, C64::new(constant, 0.0)));
            }
            for q in 0..modes {
                let Some((sg1, s1)) = self.sea(s, q, false) else { continue };
                for p in 0..modes {
                    let coeff = m[(p, q)];
                    if coeff == ZERO {
                        continue;
                    }
                    if let Some((sg2, s2)) = self.sea(s1, p, true) {
                        triplets.push((s2, s, coeff * (sg1 * sg2)));
                    }
                }
            }
        }
        Ok(SparseMatrix::from_triplets(self.dim(), triplets))
    }

    pub fn vacuum(&self) -> StateVector {
        let mut v = CVec::zeros(self.dim());
        v[0] = ONE;
        StateVector(v)
    }
}

/// Normalized amplitude vector on the Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVec);

impl StateVector {
    pub fn new(amplitudes: CVec) -> Result<Self> {
        let norm = crate::linalg::vec_norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(LabError::InvalidState(format!("state has norm {norm}, expected 1")));
        }
        Ok(StateVector(amplitudes))
    }

    pub fn normalized(amplitudes: CVec) -> Result<Self> {
        let norm = crate::linalg::vec_norm(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LabError::InvalidState("cannot normalize a zero state".into()));
        }
        Ok(StateVector(amplitudes / C64::new(norm, 0.0)))
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.0
    }

    pub fn into_inner(self) -> CVec {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::vec_norm(&self.0)
    }

    /// `Re ⟨Ω|A|Ω⟩`.
    pub fn expectation(&self, op: &FockOperator) -> f64 {
        op.expectation(&self.0).re
    }

    pub fn overlap(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    pub fn distance(&self, other: &StateVector) -> f64 {
        crate::linalg::vec_norm(&(&self.0 - &other.0))
    }
}

/// Electron and positron annihilators with their adjoints.
#[derive(Debug, Clone)]
pub struct LadderSet {
    pub space: FockSpace,
    electron: Vec<FockOperator>,
    electron_dag: Vec<FockOperator>,
    positron: Vec<FockOperator>,
    positron_dag: Vec<FockOperator>,
}

impl LadderSet {
    fn slot(&self, n: usize) -> usize {
        assert!(n >= 1 && n <= self.space.n_sites(), "mode index {n} out of range");
        n - 1
    }

    pub fn b(&self, n: usize) -> &FockOperator {
        &self.electron[self.slot(n)]
    }

    pub fn b_dag(&self, n: usize) -> &FockOperator {
        &self.electron_dag[self.slot(n)]
    }

    pub fn d(&self, n: usize) -> &FockOperator {
        &self.positron[self.slot(n)]
    }

    pub fn d_dag(&self, n: usize) -> &FockOperator {
        &self.positron_dag[self.slot(n)]
    }

    /// `a_p` in sea ordering.
    pub fn sea(&self, p: usize) -> &FockOperator {
        let n = self.space.n_sites();
        if p < n {
            &self.electron[p]
        } else {
            &self.positron_dag[p - n]
        }
    }

    /// Every ladder operator with a label, annihilators first.
    pub fn all(&self) -> Vec<(String, &FockOperator)> {
        let n = self.space.n_sites();
        let mut out = Vec::with_capacity(4 * n);
        for k in 0..n {
            out.push((format!("b{}", k + 1), &self.electron[k]));
            out.push((format!("d{}", k + 1), &self.positron[k]));
        }
        for k in 0..n {
            out.push((format!("b{}†", k + 1), &self.electron_dag[k]));
            out.push((format!("d{}†", k + 1), &self.positron_dag[k]));
        }
        out
    }
}

pub fn build_ladder_operators(basis: &ModeBasis, max_sites: usize) -> Result<LadderSet> {
    let n = basis.n_sites;
    if basis.modes.len() != 2 * n || basis.positive().len() != n {
        return Err(LabError::Shape(format!(
            "mode basis has {} modes for {n} sites",
            basis.modes.len()
        )));
    }
    let space = FockSpace::new(n, max_sites)?;
    let electron: Vec<_> = (0..n).map(|k| space.ladder_operator(k, false)).collect();
    let positron: Vec<_> = (0..n).map(|k| space.ladder_operator(n + k, false)).collect();
    Ok(LadderSet {
        space,
        electron_dag: electron.iter().map(SparseMatrix::adjoint).collect(),
        positron_dag: positron.iter().map(SparseMatrix::adjoint).collect(),
        electron,
        positron,
    })
}

/// Field operator `ψ_k = Σ_p C_kp a_p`, `k = 2·site + spin`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOperator {
    pub space: FockSpace,
    pub spacing: f64,
    coeffs: CMat,
}

impl FieldOperator {
    pub fn from_coefficients(space: FockSpace, spacing: f64, coeffs: CMat) -> Result<Self> {
        let dim = space.n_modes();
        if coeffs.shape() != (dim, dim) {
            return Err(LabError::Shape(format!(
                "field coefficients must be {dim}×{dim}, got {:?}",
                coeffs.shape()
            )));
        }
        Ok(FieldOperator { space, spacing, coeffs })
    }

    pub fn coefficients(&self) -> &CMat {
        &self.coeffs
    }

    pub fn n_components(&self) -> usize {
        self.coeffs.nrows()
    }

    /// `ψ_s(x_site)` as a Fock-space operator.
    pub fn component(&self, ladder: &LadderSet, site: usize, spin: usize) -> FockOperator {
        let k = 2 * site + spin;
        let terms: Vec<(C64, &FockOperator)> =
            (0..self.space.n_modes()).map(|p| (self.coeffs[(k, p)], ladder.sea(p))).collect();
        SparseMatrix::linear_combination(self.space.dim(), &terms)
    }

    pub fn component_dag(&self, ladder: &LadderSet, site: usize, spin: usize) -> FockOperator {
        self.component(ladder, site, spin).adjoint()
    }

    /// Field after a single-particle map: `ψ'_k = Σ_l W_kl ψ_l`.
    pub fn transformed(&self, w: &CMat) -> Result<FieldOperator> {
        if w.shape() != self.coeffs.shape() {
            return Err(LabError::Shape(format!(
                "single-particle map {:?} does not fit field {:?}",
                w.shape(),
                self.coeffs.shape()
            )));
        }
        Ok(FieldOperator {
            space: self.space,
            spacing: self.spacing,
            coeffs: w * &self.coeffs,
        })
    }

    /// Largest operator-norm difference over components. For a combination
    /// `Σ c_p a_p` of canonical modes the operator norm is `‖c‖₂`.
    pub fn distance(&self, other: &FieldOperator) -> f64 {
        let diff = &self.coeffs - &other.coeffs;
        (0..diff.nrows())
            .map(|k| diff.row(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Single-particle map `W` with `self = W · reference`, recovered from
    /// the coefficient matrices.
    pub fn map_relative_to(&self, reference: &FieldOperator) -> CMat {
        let scale = C64::new(reference.spacing, 0.0);
        &self.coeffs * reference.coeffs.adjoint() * scale
    }
}

pub fn assemble_field_operator(ladder: &LadderSet, basis: &ModeBasis) -> Result<FieldOperator> {
    let n = ladder.space.n_sites();
    if basis.n_sites != n || basis.modes.len() != 2 * n {
        return Err(LabError::Shape(format!(
            "ladder set covers {n} sites but basis has {} modes",
            basis.modes.len()
        )));
    }
    let mut coeffs = CMat::zeros(2 * n, 2 * n);
    for (p, mode) in basis.modes.iter().enumerate() {
        coeffs.set_column(p, &mode.wave);
    }
    FieldOperator::from_coefficients(ladder.space, basis.spacing, coeffs)
}

/// `½ Σ_sites a [ψ†, K ψ]` for a single-particle kernel `K`.
///
/// With `ψ_k = Σ_p C_kp a_p` this is `a (Σ_pq M_pq a_p† a_q - ½ tr M)`,
/// `M = C† K C`.
pub fn symmetrized_bilinear(field: &FieldOperator, kernel: &SingleParticleOperator) -> Result<FockOperator> {
    if kernel.dim() != field.n_components() {
        return Err(LabError::Shape(format!(
            "kernel dimension {} does not match field with {} components",
            kernel.dim(),
            field.n_components()
        )));
    }
    let m = field.coeffs.adjoint() * &kernel.matrix * &field.coeffs * C64::new(field.spacing, 0.0);
    let trace = m.trace();
    field.space.quadratic_operator(&m, -0.5 * trace.re)
}

/// The free Hamiltonian functional `Ĥ₀(ψ) = ½∫[ψ†, H₀ψ] - ξ_r` with `ξ_r`
/// fixed once from the free basis as `-E_vac`.
#[derive(Debug, Clone)]
pub struct FreeHamiltonian {
    pub h0: SingleParticleOperator,
    pub xi_r: f64,
}

impl FreeHamiltonian {
    pub fn new(h0: SingleParticleOperator, basis: &ModeBasis) -> Self {
        FreeHamiltonian {
            h0,
            xi_r: -basis.vacuum_energy(),
        }
    }

    pub fn vacuum_energy(&self) -> f64 {
        -self.xi_r
    }

    /// `Ĥ₀` evaluated on an arbitrary (e.g. evolved) field.
    pub fn operator(&self, field: &FieldOperator) -> Result<FockOperator> {
        self.with_kernel(field, &self.h0)
    }

    /// `½∫[ψ†, Kψ] - ξ_r`.
    pub fn with_kernel(&self, field: &FieldOperator, kernel: &SingleParticleOperator) -> Result<FockOperator> {
        let bilinear = symmetrized_bilinear(field, kernel)?;
        let shift = SparseMatrix::identity(field.space.dim()).scale(C64::new(-self.xi_r, 0.0));
        Ok(bilinear.add(&shift))
    }

    /// `⟨Ω|Ĥ₀(ψ)|Ω⟩`.
    pub fn expectation(&self, field: &FieldOperator, state: &StateVector) -> Result<f64> {
        Ok(state.expectation(&self.operator(field)?))
    }
}

pub fn free_hamiltonian_operator(
    field: &FieldOperator,
    h0: &SingleParticleOperator,
    basis: &ModeBasis,
) -> Result<FockOperator> {
    FreeHamiltonian::new(h0.clone(), basis).operator(field)
}

fn site_kernel(n_sites: usize, site: usize, block: [[f64; 2]; 2], scale: f64) -> Result<SingleParticleOperator> {
    if site >= n_sites {
        return Err(LabError::Shape(format!("site {site} out of range for {n_sites} sites")));
    }
    let mut m = CMat::zeros(2 * n_sites, 2 * n_sites);
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * site + r, 2 * site + c)] = C64::new(scale * block[r][c], 0.0);
        }
    }
    SingleParticleOperator::new(m)
}

/// Local current density `Ĵ(x) = (q/2)[ψ†(x), αψ(x)]`.
pub fn current_operator(field: &FieldOperator, site: usize, charge: f64) -> Result<FockOperator> {
    let kernel = site_kernel(field.space.n_sites(), site, [[0.0, 1.0], [1.0, 0.0]], charge / field.spacing)?;
    symmetrized_bilinear(field, &kernel)
}

/// Local charge density `ρ̂(x) = (q/2)[ψ†(x), ψ(x)]`.
pub fn charge_operator(field: &FieldOperator, site: usize, charge: f64) -> Result<FockOperator> {
    let kernel = site_kernel(field.space.n_sites(), site, [[1.0, 0.0], [0.0, 1.0]], charge / field.spacing)?;
    symmetrized_bilinear(field, &kernel)
}

/// `Q̂ = a Σ_x ρ̂(x)`.
pub fn total_charge_operator(field: &FieldOperator, charge: f64) -> Result<FockOperator> {
    let kernel = SingleParticleOperator::identity(field.n_components());
    Ok(symmetrized_bilinear(field, &kernel)?.scale(C64::new(charge, 0.0)))
}

/// `Ĥ(ψ) = Ĥ₀(ψ) - ∫Ĵ·A + ∫ρ̂A₀`.
///
/// The spectral scheme sums the local current and charge operators. The
/// hopping scheme couples `A` through link phases, which has no local-current
/// form, so it goes through the coupled single-particle kernel.
pub fn interaction_hamiltonian(
    field: &FieldOperator,
    potential: &Potential,
    free: &FreeHamiltonian,
    config: &LatticeConfig,
) -> Result<FockOperator> {
    let n = config.n_sites;
    if potential.scalar.len() != n || potential.vector.len() != n {
        return Err(LabError::Shape("potential does not match lattice".into()));
    }
    match config.scheme {
        Scheme::Spectral => {
            let a = config.spacing();
            let h0 = free.operator(field)?;
            let mut ops = Vec::new();
            for j in 0..n {
                if potential.scalar[j] != 0.0 {
                    ops.push((C64::new(a * potential.scalar[j], 0.0), charge_operator(field, j, config.charge)?));
                }
                if potential.vector[j] != 0.0 {
                    ops.push((C64::new(-a * potential.vector[j], 0.0), current_operator(field, j, config.charge)?));
                }
            }
            if ops.is_empty() {
                return Ok(h0);
            }
            let mut terms: Vec<(C64, &FockOperator)> = vec![(ONE, &h0)];
            terms.extend(ops.iter().map(|(c, op)| (*c, op)));
            Ok(SparseMatrix::linear_combination(field.space.dim(), &terms))
        }
        Scheme::GaugedHopping => {
            let kernel = crate::lattice::coupled_hamiltonian(config, &free.h0, potential)?;
            free.with_kernel(field, &kernel)
        }
    }
}

/// `|Ω⟩ ∝ Σ_{n>0} c_n b_n†|0⟩`; `weights[n-1]` is `c_n`.
pub fn prepare_wave_packet(ladder: &LadderSet, weights: &[C64]) -> Result<StateVector> {
    let n = ladder.space.n_sites();
    if weights.len() != n {
        return Err(LabError::InvalidState(format!(
            "expected {n} positive-mode weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().all(|w| *w == ZERO) {
        return Err(LabError::InvalidState("all wave-packet weights are zero".into()));
    }
    let vacuum = ladder.space.vacuum();
    let mut v = CVec::zeros(ladder.space.dim());
    for (k, &c) in weights.iter().enumerate() {
        if c != ZERO {
            v += ladder.b_dag(k + 1).matvec(vacuum.amplitudes()) * c;
        }
    }
    StateVector::normalized(v)
}
