//! Heisenberg-picture field evolution.
//!
//! For a Hamiltonian bilinear in the field, `i dψ/dt = [ψ, Ĥ(t)]` reduces to
//! `ψ(t) = W(t) ψ_S` with `i dW/dt = H(t) W`, `W(0) = 1`, where `H(t)` is the
//! single-particle kernel. Every evolved field here is a coefficient update
//! `C(t) = W(t) C_S` of the Schrödinger field.

use crate::error::{LabError, Result};
use crate::fock::FieldOperator;
use crate::gauge::GaugeProfile;
use crate::lattice::{
    coupled_hamiltonian, pure_gauge_vector_potential, LatticeConfig, ModeBasis, Potential, SingleParticleOperator,
};
use crate::linalg::{max_abs, spectral_norm, CMat, C64, I};

/// `exp(-i H₀ t)` assembled from the mode basis.
#[derive(Debug, Clone)]
pub struct FreePropagator {
    vectors: CMat,
    energies: Vec<f64>,
}

impl FreePropagator {
    pub fn new(basis: &ModeBasis) -> Self {
        FreePropagator {
            vectors: basis.unitary(),
            energies: basis.signed_energies(),
        }
    }

    pub fn at(&self, t: f64) -> CMat {
        let mut scaled = self.vectors.clone();
        for (k, &e) in self.energies.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for r in 0..scaled.nrows() {
                scaled[(r, k)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// `D(χ) = diag(e^{-iqχ}) ⊗ 1₂`.
pub fn gauge_phase(config: &LatticeConfig, chi: &[f64]) -> Result<CMat> {
    if chi.len() != config.n_sites {
        return Err(LabError::Shape(format!(
            "gauge function has {} samples for {} sites",
            chi.len(),
            config.n_sites
        )));
    }
    let phases: Vec<C64> = chi.iter().map(|&c| C64::from_polar(1.0, -config.charge * c)).collect();
    Ok(SingleParticleOperator::site_diagonal(&phases).matrix)
}

pub fn free_evolve_field(field: &FieldOperator, basis: &ModeBasis, t: f64) -> Result<FieldOperator> {
    field.transformed(&FreePropagator::new(basis).at(t))
}

/// Single-particle map of the pure-gauge closed form: `D(χ(t)) e^{-iH₀t}`
/// during the pulse and `e^{-iH₀(t-t₁)} D(χ(t₁)) e^{-iH₀t₁}` after it.
pub fn closed_form_propagator(basis: &ModeBasis, profile: &GaugeProfile, t: f64) -> Result<CMat> {
    if !(t >= 0.0) {
        return Err(LabError::TimeGrid(format!("closed form needs t >= 0, got {t}")));
    }
    let free = FreePropagator::new(basis);
    if t <= profile.t1 {
        Ok(gauge_phase(&profile.lattice, &profile.chi_at(t))? * free.at(t))
    } else {
        let d = gauge_phase(&profile.lattice, &profile.final_chi())?;
        Ok(free.at(t - profile.t1) * d * free.at(profile.t1))
    }
}

/// `ψ(t_f)` for `t_f ≥ t₁` from the closed form.
pub fn closed_form_evolved_field(
    field: &FieldOperator,
    basis: &ModeBasis,
    profile: &GaugeProfile,
    tf: f64,
) -> Result<FieldOperator> {
    if tf < profile.t1 {
        return Err(LabError::TimeGrid(format!(
            "closed form is evaluated after the pulse: tf = {tf} < t1 = {}",
            profile.t1
        )));
    }
    field.transformed(&closed_form_propagator(basis, profile, tf)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Local error allowed per unit time.
    pub tolerance: f64,
    pub max_steps: usize,
    pub initial_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tolerance: 1e-10,
            max_steps: 2_000_000,
            initial_step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

fn rk4_step<F>(kernel: &F, w: &CMat, t: f64, h: f64) -> Result<CMat>
where
    F: Fn(f64) -> Result<CMat>,
{
    let minus_i = -I;
    let hc = C64::new(h, 0.0);
    let half = C64::new(0.5 * h, 0.0);
    let k1 = kernel(t)? * w * minus_i;
    let mid = kernel(t + 0.5 * h)?;
    let k2 = &mid * (w + &k1 * half) * minus_i;
    let k3 = &mid * (w + &k2 * half) * minus_i;
    let k4 = kernel(t + h)? * (w + &k3 * hc) * minus_i;
    Ok(w + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0))
}

/// Integrates `i dW/dt = K(t) W` from `t0` to `t_end` with RK4, step
/// doubling and Richardson extrapolation. Steps are accepted when the
/// doubling estimate is below `tolerance · h`.
pub fn integrate_propagator<F>(kernel: F, w0: CMat, t0: f64, t_end: f64, opts: &OdeOptions) -> Result<(CMat, OdeStats)>
where
    F: Fn(f64) -> Result<CMat>,
{
    if !(t_end >= t0) {
        return Err(LabError::TimeGrid(format!("cannot integrate backwards from {t0} to {t_end}")));
    }
    let mut stats = OdeStats::default();
    let mut w = w0;
    let mut t = t0;
    let mut h = opts.initial_step.min(t_end - t0);
    let mut worst = 0.0f64;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(LabError::NonConvergence {
                achieved: worst,
                wanted: opts.tolerance,
            });
        }
        let last = h >= t_end - t;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(LabError::StepUnderflow { t, h });
        }
        let full = rk4_step(&kernel, &w, t, h)?;
        let mid = rk4_step(&kernel, &w, t, 0.5 * h)?;
        let halves = rk4_step(&kernel, &mid, t + 0.5 * h, 0.5 * h)?;
        let err = max_abs(&(&halves - &full)) / 15.0;
        if !err.is_finite() {
            return Err(LabError::NonConvergence {
                achieved: err,
                wanted: opts.tolerance,
            });
        }
        let allowed = opts.tolerance * h;
        if err <= allowed {
            w = &halves + (&halves - &full) * C64::new(1.0 / 15.0, 0.0);
            t = if last { t_end } else { t + h };
            stats.accepted += 1;
            worst = worst.max(err / h);
        } else {
            stats.rejected += 1;
        }
        let factor = if err == 0.0 { 4.0 } else { 0.9 * (allowed / err).powf(0.25) };
        h *= factor.clamp(0.2, 4.0);
    }
    Ok((w, stats))
}

/// Checks that `grid` is finite, non-negative and strictly increasing.
pub fn validate_time_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(LabError::TimeGrid("empty time grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(LabError::TimeGrid("times must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::TimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// `W(t)` on `grid` by direct integration of the coupled kernel. The pulse
/// end `t₁` is always a step boundary.
pub fn ode_propagators(
    config: &LatticeConfig,
    h0: &SingleParticleOperator,
    profile: &GaugeProfile,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<CMat>> {
    validate_time_grid(grid)?;
    let t1 = profile.t1;
    let during = |t: f64| -> Result<CMat> {
        Ok(coupled_hamiltonian(config, h0, &profile.potential_at(t.min(t1))?)?.matrix)
    };
    let after = |_: f64| -> Result<CMat> { Ok(h0.matrix.clone()) };
    let dim = config.dim();
    let mut w = CMat::identity(dim, dim);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for &target in grid {
        if t < t1 && target > t1 {
            w = integrate_propagator(during, w, t, t1, opts)?.0;
            t = t1;
        }
        if target > t {
            w = if t < t1 {
                integrate_propagator(during, w, t, target, opts)?.0
            } else {
                integrate_propagator(after, w, t, target, opts)?.0
            };
            t = target;
        }
        out.push(w.clone());
    }
    Ok(out)
}

pub fn ode_evolve_field(
    field: &FieldOperator,
    config: &LatticeConfig,
    h0: &SingleParticleOperator,
    profile: &GaugeProfile,
    grid: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<FieldOperator>> {
    ode_propagators(config, h0, profile, grid, opts)?
        .iter()
        .map(|w| field.transformed(w))
        .collect()
}

/// `‖H₀ D(χ) − D(χ)(H₀ − qα∇χ)‖₂`, with `∇χ` and the coupling taken as the
/// lattice scheme defines them.
pub fn gauge_identity_residual(config: &LatticeConfig, h0: &SingleParticleOperator, chi: &[f64]) -> Result<f64> {
    let d = gauge_phase(config, chi)?;
    let gradient: Vec<f64> = pure_gauge_vector_potential(config, chi)?.into_iter().map(|v| -v).collect();
    let potential = Potential {
        scalar: vec![0.0; config.n_sites],
        vector: gradient,
    };
    let dressed = coupled_hamiltonian(config, h0, &potential)?;
    Ok(spectral_norm(&(&h0.matrix * &d - &d * &dressed.matrix)))
}

/// `∫₀^{t₁} ‖R(χ(t))‖ dt` by composite Simpson. Bounds the operator-norm
/// distance between the closed-form and integrated propagators at `t₁`.
pub fn gauge_defect_integral(
    config: &LatticeConfig,
    h0: &SingleParticleOperator,
    profile: &GaugeProfile,
    intervals: usize,
) -> Result<f64> {
    let n = intervals.max(2) + intervals % 2;
    let dt = profile.t1 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let weight = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += weight * gauge_identity_residual(config, h0, &profile.chi_at(i as f64 * dt))?;
    }
    Ok(acc * dt / 3.0)
}
