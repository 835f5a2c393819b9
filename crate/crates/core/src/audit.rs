//! Numerical audit of picture equivalence.
//!
//! The Heisenberg field is rebuilt by literal Fock-space conjugation
//! `Û†(t) ψ_S Û(t)` on small lattices, and compared with the Schrödinger
//! expectation, the single-particle ODE field and the closed form. The lattice
//! defect of the gauge identity and the closed-form mismatch are reported next
//! to the picture gaps they produce.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fock::{FieldOperator, LadderSet, StateVector};
use crate::gauge::GaugeProfile;
use crate::heisenberg::{
    closed_form_propagator, gauge_defect_integral, gauge_identity_residual, ode_propagators, OdeOptions,
};
use crate::lattice::SingleParticleOperator;
use crate::linalg::{max_abs, spectral_norm, CMat, CVec, C64, ZERO};
use crate::observables::{h0_expectation_heisenberg, h0_expectation_schrodinger, DecompositionReport};
use crate::schrodinger::{dense_propagators, evolve_state, HamiltonianSchedule, SchrodingerOptions};
use crate::system::LatticeSystem;

/// Dense Fock-space conjugation is only attempted up to this many sites.
pub const DENSE_AUDIT_MAX_SITES: usize = 4;
/// Simpson intervals for the gauge-defect time integral.
pub const DEFECT_INTERVALS: usize = 64;

/// `Û† ψ_k Û` for every field component, as dense Fock matrices.
#[derive(Debug, Clone)]
pub struct ConjugatedField {
    pub spacing: f64,
    pub components: Vec<CMat>,
}

fn dense_components(field: &FieldOperator, ladder: &LadderSet) -> Vec<CMat> {
    let n = field.space.n_sites();
    (0..2 * n)
        .map(|k| field.component(ladder, k / 2, k % 2).to_dense())
        .collect()
}

pub fn conjugated_field(
    u: &CMat,
    field: &FieldOperator,
    ladder: &LadderSet,
    max_sites: usize,
) -> Result<ConjugatedField> {
    let space = field.space;
    if space.n_sites() > max_sites {
        return Err(LabError::FockTooLarge {
            n_sites: space.n_sites(),
            dim: space.dim(),
            max_sites,
        });
    }
    if u.shape() != (space.dim(), space.dim()) {
        return Err(LabError::Shape(format!("propagator {:?} on Fock space of dim {}", u.shape(), space.dim())));
    }
    let ud = u.adjoint();
    let components = dense_components(field, ladder)
        .into_iter()
        .map(|psi| &ud * psi * u)
        .collect();
    Ok(ConjugatedField {
        spacing: field.spacing,
        components,
    })
}

fn frobenius_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

impl ConjugatedField {
    /// `W` with `Û†ψ_kÛ ≈ Σ_l W_kl ψ_l`, read off from `{Û†ψ_kÛ, ψ_l†} = W_kl / a`,
    /// and the largest entry of what the linear form leaves over.
    pub fn single_particle_map(&self, field: &FieldOperator, ladder: &LadderSet) -> (CMat, f64) {
        let reference = dense_components(field, ladder);
        let n = self.components.len();
        let dim = field.space.dim() as f64;
        // tr({A, B†}) = 2 tr(A B†) = 2 ⟨B, A⟩_F.
        let w = CMat::from_fn(n, n, |k, l| {
            frobenius_inner(&reference[l], &self.components[k]) * C64::new(2.0 * self.spacing / dim, 0.0)
        });
        let residual = self
            .components
            .iter()
            .enumerate()
            .map(|(k, psi)| {
                let mut rebuilt = CMat::from_element(psi.nrows(), psi.ncols(), ZERO);
                for (l, r) in reference.iter().enumerate() {
                    rebuilt += r * w[(k, l)];
                }
                max_abs(&(psi - rebuilt))
            })
            .fold(0.0, f64::max);
        (w, residual)
    }

    /// Largest entry of `Û†ψ_kÛ − Σ_l W_kl ψ_l` for a given map `W`.
    pub fn distance_to_map(&self, w: &CMat, field: &FieldOperator, ladder: &LadderSet) -> f64 {
        let reference = dense_components(field, ladder);
        self.components
            .iter()
            .enumerate()
            .map(|(k, psi)| {
                let mut rebuilt = CMat::from_element(psi.nrows(), psi.ncols(), ZERO);
                for (l, r) in reference.iter().enumerate() {
                    rebuilt += r * w[(k, l)];
                }
                max_abs(&(psi - rebuilt))
            })
            .fold(0.0, f64::max)
    }

    /// Dense `½ a Σ_kl K_kl [ψ_k†, ψ_l] − ξ_r` on the conjugated components.
    pub fn bilinear(&self, kernel: &SingleParticleOperator, xi_r: f64) -> CMat {
        let dim = self.components[0].nrows();
        let n = self.components.len();
        let mut out = CMat::identity(dim, dim) * C64::new(-xi_r, 0.0);
        let half_a = C64::new(0.5 * self.spacing, 0.0);
        for k in 0..n {
            let mut k_psi = CMat::from_element(dim, dim, ZERO);
            let mut k_dag = CMat::from_element(dim, dim, ZERO);
            for l in 0..n {
                let c = kernel.matrix[(k, l)];
                if c != ZERO {
                    k_psi += &self.components[l] * c;
                }
                let c = kernel.matrix[(l, k)];
                if c != ZERO {
                    k_dag += self.components[l].adjoint() * c;
                }
            }
            out += (self.components[k].adjoint() * k_psi - &self.components[k] * k_dag) * half_a;
        }
        out
    }

    /// `⟨Ω| ½ a Σ K_kl [ψ_k†, ψ_l] |Ω⟩ − ξ_r` from the vectors `ψ_k|Ω⟩` and
    /// `ψ_k†|Ω⟩`.
    pub fn bilinear_expectation(&self, kernel: &SingleParticleOperator, xi_r: f64, state: &StateVector) -> f64 {
        let v = state.amplitudes();
        let down: Vec<CVec> = self.components.iter().map(|c| c * v).collect();
        let up: Vec<CVec> = self.components.iter().map(|c| c.adjoint() * v).collect();
        let mut acc = ZERO;
        for (k, dk) in down.iter().enumerate() {
            for (l, dl) in down.iter().enumerate() {
                let c = kernel.matrix[(k, l)];
                if c != ZERO {
                    // ⟨ψ_k†ψ_l⟩ − ⟨ψ_l ψ_k†⟩
                    acc += c * (dk.dotc(dl) - up[l].dotc(&up[k]));
                }
            }
        }
        0.5 * self.spacing * acc.re - xi_r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub f: f64,
    /// Largest entry of `Û†ψ_SÛ − W_ode ψ_S` at `t_f`.
    pub conjugation_residual: Option<f64>,
    /// Largest entry of `Û†Ĥ₀(ψ_S)Û − Ĥ₀(Û†ψ_SÛ)` at `t_f`.
    pub covariance_residual: Option<f64>,
    /// `⟨Ω(t_f)|Ĥ₀(ψ_S)|Ω(t_f)⟩ − ⟨Ω(0)|Ĥ₀(Û†ψ_SÛ)|Ω(0)⟩`, both from the
    /// same stepping.
    pub picture_gap_appendix: Option<f64>,
    /// Largest `|gap| / (1 + |E_S|)` of the conjugated-field path over `t₁, t_f`.
    pub appendix_relative_max: Option<f64>,
    /// Field distance between the map read off the conjugated field and the
    /// ODE map at `t_f`.
    pub conjugated_vs_ode: Option<f64>,
    pub picture_gap_formula: f64,
    pub picture_gap_direct: f64,
    /// Field distance between closed form and ODE at `t_f`.
    pub closed_form_vs_ode: f64,
    /// Operator-norm distance of the two single-particle maps at `t₁`.
    pub closed_form_vs_ode_t1: f64,
    /// Gauge-identity defect at `χ(t₁)`.
    pub gauge_identity_residual: f64,
    /// `∫₀^{t₁} ‖R(χ(t))‖ dt`.
    pub defect_integral: f64,
    /// `⟨Ω(0)|Ĥ₀(ψ_ode(t_f))|Ω(0)⟩`.
    pub ode_total: f64,
    /// `2N‖H₀‖(defect_integral + ode tolerance · t_f) + |E_S − ode_total|`.
    pub gap_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub ode: OdeOptions,
    pub schrodinger: SchrodingerOptions,
    /// Step used for the dense propagator; match the Schrödinger run.
    pub dt: f64,
    pub max_dense_sites: usize,
}

/// Every audit quantity for one pulse amplitude.
pub fn run_audit(
    system: &LatticeSystem,
    state0: &StateVector,
    profile: &GaugeProfile,
    tf: f64,
    decomposition: &DecompositionReport,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let config = &system.config;
    let t1 = profile.t1;
    let times = if tf > t1 { vec![t1, tf] } else { vec![t1] };
    let ode = ode_propagators(config, &system.h0, profile, &times, &opts.ode)?;
    let w_ode_t1 = &ode[0];
    let w_ode_tf = &ode[ode.len() - 1];
    let w_cf_t1 = closed_form_propagator(&system.basis, profile, t1)?;
    let w_cf_tf = closed_form_propagator(&system.basis, profile, tf)?;
    let field_ode = system.field.transformed(w_ode_tf)?;
    let field_cf = system.field.transformed(&w_cf_tf)?;
    let ode_total = h0_expectation_heisenberg(system, state0, &field_ode)?;
    let gauge_identity_residual = gauge_identity_residual(config, &system.h0, &profile.final_chi())?;
    let defect_integral = gauge_defect_integral(config, &system.h0, profile, DEFECT_INTERVALS)?;
    let schr = decomposition.schrodinger_total;
    let h0_norm = spectral_norm(&system.h0.matrix);
    let gap_bound = 2.0 * config.n_sites as f64 * h0_norm * (defect_integral + opts.ode.tolerance * tf)
        + (schr - ode_total).abs();

    let mut report = AuditReport {
        f: profile.amplitude,
        conjugation_residual: None,
        covariance_residual: None,
        picture_gap_appendix: None,
        appendix_relative_max: None,
        conjugated_vs_ode: None,
        picture_gap_formula: schr - decomposition.formula_total,
        picture_gap_direct: schr - decomposition.direct_total,
        closed_form_vs_ode: field_cf.distance(&field_ode),
        closed_form_vs_ode_t1: spectral_norm(&(w_cf_t1 - w_ode_t1)),
        gauge_identity_residual,
        defect_integral,
        ode_total,
        gap_bound,
    };
    if config.n_sites > opts.max_dense_sites.min(DENSE_AUDIT_MAX_SITES) {
        return Ok(report);
    }

    let schedule = HamiltonianSchedule::new(config, &system.free, &system.field, profile)?;
    let props = dense_propagators(&schedule, &times, opts.dt, &opts.schrodinger, DENSE_AUDIT_MAX_SITES)?;
    let states = evolve_state(state0, &schedule, &times, opts.dt, &opts.schrodinger)?;
    let mut relative_max = 0.0f64;
    for (i, (u, state)) in props.iter().zip(&states).enumerate() {
        let conj = conjugated_field(u, &system.field, &system.ladder, DENSE_AUDIT_MAX_SITES)?;
        let e_s = h0_expectation_schrodinger(system, state)?;
        let e_app = conj.bilinear_expectation(&system.h0, system.free.xi_r, state0);
        relative_max = relative_max.max((e_s - e_app).abs() / (1.0 + e_s.abs()));
        if i + 1 == times.len() {
            let (w_conj, _) = conj.single_particle_map(&system.field, &system.ladder);
            let conj_field = system.field.transformed(&w_conj)?;
            let free_op = system.free.operator(&system.field)?.to_dense();
            let lhs = u.adjoint() * free_op * u;
            let rhs = conj.bilinear(&system.h0, system.free.xi_r);
            report.conjugation_residual = Some(conj.distance_to_map(w_ode_tf, &system.field, &system.ladder));
            report.covariance_residual = Some(max_abs(&(lhs - rhs)));
            report.picture_gap_appendix = Some(e_s - e_app);
            report.conjugated_vs_ode = Some(conj_field.distance(&field_ode));
        }
    }
    report.appendix_relative_max = Some(relative_max);
    Ok(report)
}
