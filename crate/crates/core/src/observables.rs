//! Expectation values in both pictures, the free current, and the
//! decomposition of the post-pulse Heisenberg energy into a free part and a
//! gauge part linear in the pulse amplitude.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fock::{current_operator, FieldOperator, StateVector};
use crate::gauge::{chi_from_current_divergence, build_gauge_profile, GaugeProfile, Ramp};
use crate::heisenberg::{closed_form_evolved_field, free_evolve_field};
use crate::schrodinger::{evolve_state_auto, HamiltonianSchedule, SchrodingerOptions};
use crate::system::LatticeSystem;

/// Free-term drift allowed between `t₁` and `t_f`.
pub const FREE_TERM_DRIFT_TOL: f64 = 1e-9;
/// Allowed disagreement between the two gauge-term forms.
pub const BY_PARTS_TOL: f64 = 1e-10;

/// `⟨Ω(0)|Ĥ₀(ψ(t))|Ω(0)⟩` for a field from any Heisenberg path.
pub fn h0_expectation_heisenberg(system: &LatticeSystem, state0: &StateVector, evolved: &FieldOperator) -> Result<f64> {
    system.free.expectation(evolved, state0)
}

/// `⟨Ω(t)|Ĥ₀(ψ_S)|Ω(t)⟩`.
pub fn h0_expectation_schrodinger(system: &LatticeSystem, state: &StateVector) -> Result<f64> {
    system.free.expectation(&system.field, state)
}

/// `⟨Ω(0)|Ĵ(ψ₀(x, t))|Ω(0)⟩` per site, with `ψ₀` the free-evolved field.
pub fn current_expectation(system: &LatticeSystem, state0: &StateVector, t: f64) -> Result<Vec<f64>> {
    let field = free_evolve_field(&system.field, &system.basis, t)?;
    (0..system.config.n_sites)
        .map(|j| Ok(state0.expectation(&current_operator(&field, j, system.config.charge)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub f: f64,
    /// `⟨Ĥ₀(ψ₀(t₁))⟩`.
    pub free_term: f64,
    /// `-∫⟨Ĵ⟩·∇χ(t₁)`.
    pub gauge_term: f64,
    /// `+∫χ(t₁) ∇·⟨Ĵ⟩`.
    pub gauge_term_by_parts: f64,
    /// `free_term + gauge_term`.
    pub formula_total: f64,
    /// `⟨Ĥ₀⟩` on the closed-form field at `t_f`.
    pub direct_total: f64,
    pub schrodinger_total: f64,
}

/// Assembles the decomposition for a pulse whose Schrödinger-picture energy
/// at `t_f` is already known.
pub fn decompose(
    system: &LatticeSystem,
    state0: &StateVector,
    profile: &GaugeProfile,
    tf: f64,
    schrodinger_total: f64,
) -> Result<DecompositionReport> {
    let t1 = profile.t1;
    if tf < t1 {
        return Err(LabError::TimeGrid(format!("tf = {tf} precedes t1 = {t1}")));
    }
    let config = &system.config;
    let free_term = h0_expectation_heisenberg(system, state0, &free_evolve_field(&system.field, &system.basis, t1)?)?;
    let free_at_tf = h0_expectation_heisenberg(system, state0, &free_evolve_field(&system.field, &system.basis, tf)?)?;
    if (free_term - free_at_tf).abs() > FREE_TERM_DRIFT_TOL {
        return Err(LabError::Invariant(format!(
            "free term drifts from {free_term} at t1 to {free_at_tf} at tf"
        )));
    }
    let current = current_expectation(system, state0, t1)?;
    let chi = profile.final_chi();
    let gauge_term = -config.integrate_product(&current, &config.gradient(&chi)?);
    let gauge_term_by_parts = config.integrate_product(&chi, &config.gradient(&current)?);
    if (gauge_term - gauge_term_by_parts).abs() > BY_PARTS_TOL * (1.0 + gauge_term.abs()) {
        return Err(LabError::Invariant(format!(
            "gauge term {gauge_term} and its integrated-by-parts form {gauge_term_by_parts} disagree"
        )));
    }
    let closed = closed_form_evolved_field(&system.field, &system.basis, profile, tf)?;
    Ok(DecompositionReport {
        f: profile.amplitude,
        free_term,
        gauge_term,
        gauge_term_by_parts,
        formula_total: free_term + gauge_term,
        direct_total: h0_expectation_heisenberg(system, state0, &closed)?,
        schrodinger_total,
    })
}

/// Full decomposition including a self-converged Schrödinger run to `t_f`.
pub fn heisenberg_decomposition(
    system: &LatticeSystem,
    state0: &StateVector,
    profile: &GaugeProfile,
    tf: f64,
    opts: &SchrodingerOptions,
) -> Result<DecompositionReport> {
    let schedule = HamiltonianSchedule::new(&system.config, &system.free, &system.field, profile)?;
    let run = evolve_state_auto(state0, &schedule, &[tf], opts)?;
    let total = h0_expectation_schrodinger(system, &run.states[0])?;
    decompose(system, state0, profile, tf, total)
}

/// Spatial profile `g = -∇·J(t₁)`, so that `χ(t₁) = f g`.
pub fn divergence_profile(system: &LatticeSystem, state0: &StateVector, t1: f64) -> Result<Vec<f64>> {
    chi_from_current_divergence(&system.config, &current_expectation(system, state0, t1)?, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub free_term: f64,
    /// `-∫g ∇·J`; equals `∫(∇·J)²` for the divergence profile.
    pub divergence_integral: f64,
    /// Amplitude at which `formula_total` crosses zero.
    pub f_star: f64,
}

/// `f* = free_term / (-∫g ∇·J)`, refusing profiles that do not couple to
/// `∇·J`.
pub fn scan_threshold(system: &LatticeSystem, state0: &StateVector, t1: f64, spatial: &[f64]) -> Result<Threshold> {
    let config = &system.config;
    let current = current_expectation(system, state0, t1)?;
    let divergence = config.gradient(&current)?;
    let square = config.integrate_product(&divergence, &divergence);
    if square <= 1e-20 * config.integrate_product(&current, &current).max(1.0) {
        return Err(LabError::Degenerate(format!("∫(∇·J)² = {square:.3e}: the current is divergence free")));
    }
    let coupling = -config.integrate_product(spatial, &divergence);
    if coupling.abs() <= 1e-10 * (config.integrate_product(spatial, spatial) * square).sqrt() {
        return Err(LabError::Degenerate(format!(
            "∫ g ∇·J = {coupling:.3e}: the pulse does not couple to the current divergence"
        )));
    }
    let free_term = h0_expectation_heisenberg(system, state0, &free_evolve_field(&system.field, &system.basis, t1)?)?;
    Ok(Threshold {
        free_term,
        divergence_integral: coupling,
        f_star: free_term / coupling,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub threshold: Threshold,
    pub rows: Vec<DecompositionReport>,
}

/// One decomposition per amplitude in `f_grid`, rows in grid order.
#[allow(clippy::too_many_arguments)]
pub fn negativity_scan(
    system: &LatticeSystem,
    state0: &StateVector,
    spatial: &[f64],
    t1: f64,
    ramp: Ramp,
    tf: f64,
    f_grid: &[f64],
    opts: &SchrodingerOptions,
) -> Result<ScanTable> {
    if f_grid.iter().any(|f| !f.is_finite()) {
        return Err(LabError::Config("f grid must be finite".into()));
    }
    let threshold = scan_threshold(system, state0, t1, spatial)?;
    let base = build_gauge_profile(&system.config, spatial.to_vec(), t1, ramp, 0.0)?;
    let rows = f_grid
        .par_iter()
        .map(|&f| heisenberg_decomposition(system, state0, &base.with_amplitude(f), tf, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { threshold, rows })
}

/// Least-squares line through `(x, y)`: `(slope, intercept, max residual)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).abs())
        .fold(0.0, f64::max);
    Some((slope, intercept, residual))
}
