//! Schrödinger-picture evolution `|Ω(t)⟩ = Û(t)|Ω(0)⟩` of Fock-space states.
//!
//! During the pulse `Ĥ(t)` is the symmetrized bilinear of the coupled kernel
//! minus the fixed `ξ_r`; after `t₁` it is `Ĥ₀(ψ_S)`, which is diagonal in the
//! occupation basis and is applied as exact phases. Time ordering inside the
//! pulse uses uniform steps with `t₁` always on a step boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fock::{symmetrized_bilinear, FieldOperator, FockOperator, FreeHamiltonian, StateVector};
use crate::gauge::GaugeProfile;
use crate::heisenberg::validate_time_grid;
use crate::krylov::{expm_action, KrylovOptions};
use crate::lattice::{coupled_hamiltonian, LatticeConfig, SingleParticleOperator};
use crate::linalg::{expm_hermitian, CMat, CVec, C64, ZERO};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeOrdering {
    /// Fourth-order commutator-free Magnus product with two Gauss samples.
    #[default]
    Magnus4,
    /// Single midpoint sample per step, second order.
    Midpoint,
}

impl fmt::Display for TimeOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeOrdering::Magnus4 => f.write_str("magnus4"),
            TimeOrdering::Midpoint => f.write_str("midpoint"),
        }
    }
}

impl FromStr for TimeOrdering {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "magnus4" => Ok(TimeOrdering::Magnus4),
            "midpoint" => Ok(TimeOrdering::Midpoint),
            other => Err(LabError::Config(format!("unknown time ordering `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchrodingerOptions {
    pub ordering: TimeOrdering,
    pub krylov: KrylovOptions,
    /// Largest state change accepted between successive step halvings.
    pub auto_tolerance: f64,
    /// Steps across `[0, t₁]` in the first automatic trial.
    pub initial_steps: usize,
    pub max_doublings: usize,
}

impl Default for SchrodingerOptions {
    fn default() -> Self {
        SchrodingerOptions {
            ordering: TimeOrdering::default(),
            krylov: KrylovOptions::default(),
            auto_tolerance: 1e-8,
            initial_steps: 8,
            max_doublings: 14,
        }
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3 / 6
const MAGNUS_A1: f64 = (3.0 - 2.0 * 1.732_050_807_568_877_2) / 12.0;
const MAGNUS_A2: f64 = (3.0 + 2.0 * 1.732_050_807_568_877_2) / 12.0;

/// One exponential factor of a step: `exp(-i dt op)`.
#[derive(Debug, Clone)]
struct Factor {
    op: FockOperator,
}

/// `Ĥ(t)` for a fixed Schrödinger field, pulse and `ξ_r`.
#[derive(Debug, Clone)]
pub struct HamiltonianSchedule<'a> {
    pub config: &'a LatticeConfig,
    pub free: &'a FreeHamiltonian,
    pub field: &'a FieldOperator,
    pub profile: &'a GaugeProfile,
    free_operator: FockOperator,
}

impl<'a> HamiltonianSchedule<'a> {
    pub fn new(
        config: &'a LatticeConfig,
        free: &'a FreeHamiltonian,
        field: &'a FieldOperator,
        profile: &'a GaugeProfile,
    ) -> Result<Self> {
        let free_operator = free.operator(field)?;
        Ok(HamiltonianSchedule {
            config,
            free,
            field,
            profile,
            free_operator,
        })
    }

    pub fn t1(&self) -> f64 {
        self.profile.t1
    }

    pub fn kernel_at(&self, t: f64) -> Result<SingleParticleOperator> {
        let kernel = coupled_hamiltonian(self.config, &self.free.h0, &self.profile.potential_at(t)?)?;
        let dev = kernel.hermitian_deviation();
        if dev > 1e-12 {
            return Err(LabError::NotHermitian(dev));
        }
        Ok(kernel)
    }

    /// `Ĥ(t)` as a Fock operator.
    pub fn at(&self, t: f64) -> Result<FockOperator> {
        if !self.profile.is_active(t) {
            return Ok(self.free_operator.clone());
        }
        self.free.with_kernel(self.field, &self.kernel_at(t)?)
    }

    pub fn free_operator(&self) -> &FockOperator {
        &self.free_operator
    }

    /// `Σ w_k Ĥ(t_k)` with the `ξ_r` shift weighted by `Σ w_k`, built at the
    /// kernel level.
    fn combination(&self, samples: &[(f64, f64)]) -> Result<FockOperator> {
        let dim = self.config.dim();
        let mut kernel = CMat::zeros(dim, dim);
        let mut weight = 0.0;
        for &(w, t) in samples {
            kernel += self.kernel_at(t)?.matrix * C64::new(w, 0.0);
            weight += w;
        }
        let bilinear = symmetrized_bilinear(self.field, &SingleParticleOperator::new(kernel)?)?;
        let shift = SparseMatrix::identity(self.field.space.dim()).scale(C64::new(-weight * self.free.xi_r, 0.0));
        Ok(bilinear.add(&shift))
    }

    /// Exponential factors for a step `[t, t + dt]` inside the pulse, in the
    /// order they act on the state.
    fn step_factors(&self, t: f64, dt: f64, ordering: TimeOrdering) -> Result<Vec<Factor>> {
        let t1 = self.t1();
        let clamp = |s: f64| s.min(t1);
        match ordering {
            TimeOrdering::Midpoint => Ok(vec![Factor {
                op: self.combination(&[(1.0, clamp(t + 0.5 * dt))])?,
            }]),
            TimeOrdering::Magnus4 => {
                let s1 = clamp(t + (0.5 - GAUSS_OFFSET) * dt);
                let s2 = clamp(t + (0.5 + GAUSS_OFFSET) * dt);
                Ok(vec![
                    Factor {
                        op: self.combination(&[(MAGNUS_A2, s1), (MAGNUS_A1, s2)])?,
                    },
                    Factor {
                        op: self.combination(&[(MAGNUS_A1, s1), (MAGNUS_A2, s2)])?,
                    },
                ])
            }
        }
    }
}

fn check_norm(before: f64, after: &CVec) -> Result<()> {
    let n = after.norm();
    let drift = (n - before).abs();
    if !(drift <= 1e-12 * before.max(1.0) * 10.0) {
        return Err(LabError::NonConvergence {
            achieved: drift,
            wanted: 1e-12,
        });
    }
    Ok(())
}

fn apply_exp(op: &FockOperator, dt: f64, v: &CVec, opts: &KrylovOptions) -> Result<CVec> {
    let out = expm_action(op, v, dt, opts)?;
    check_norm(v.norm(), &out)?;
    Ok(out)
}

/// `e^{-iĤ dt}|state⟩` for a Hermitian `Ĥ`.
pub fn propagator_step(
    hamiltonian: &FockOperator,
    dt: f64,
    state: &StateVector,
    opts: &KrylovOptions,
) -> Result<StateVector> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(LabError::TimeGrid(format!("step must be non-negative, got {dt}")));
    }
    let dev = hamiltonian.hermitian_deviation();
    if dev > 1e-10 {
        return Err(LabError::NotHermitian(dev));
    }
    StateVector::new(apply_exp(hamiltonian, dt, state.amplitudes(), opts)?)
}

/// Pulse segments and free segments between consecutive output times.
#[derive(Debug, Clone, Copy)]
enum Segment {
    Pulse { start: f64, end: f64, steps: usize },
    Free { span: f64 },
}

fn plan(grid: &[f64], t1: f64, dt: f64) -> Result<Vec<(Segment, bool)>> {
    validate_time_grid(grid)?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(LabError::TimeGrid(format!("step must be positive, got {dt}")));
    }
    let mut bounds: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
    if grid[grid.len() - 1] > t1 && !grid.contains(&t1) {
        bounds.push((t1, false));
    }
    bounds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut t = 0.0;
    for (target, emit) in bounds {
        let seg = if t < t1 {
            let span = target - t;
            let steps = if span > 0.0 { ((span / dt) - 1e-9).ceil().max(1.0) as usize } else { 0 };
            Segment::Pulse {
                start: t,
                end: target,
                steps,
            }
        } else {
            Segment::Free { span: target - t }
        };
        out.push((seg, emit));
        t = target;
    }
    Ok(out)
}

/// `|Ω(t)⟩` at every grid time with nominal step `dt` inside the pulse.
pub fn evolve_state(
    state0: &StateVector,
    schedule: &HamiltonianSchedule,
    grid: &[f64],
    dt: f64,
    opts: &SchrodingerOptions,
) -> Result<Vec<StateVector>> {
    if state0.dim() != schedule.field.space.dim() {
        return Err(LabError::Shape(format!(
            "state has dimension {}, Fock space {}",
            state0.dim(),
            schedule.field.space.dim()
        )));
    }
    let free = schedule.free_operator();
    let free_diag: Option<Vec<f64>> = free.is_diagonal().then(|| free.diagonal_entries().iter().map(|z| z.re).collect());
    let mut v = state0.amplitudes().clone();
    let mut out = Vec::with_capacity(grid.len());
    for (seg, emit) in plan(grid, schedule.t1(), dt)? {
        match seg {
            Segment::Pulse { start, end, steps } => {
                let h = if steps > 0 { (end - start) / steps as f64 } else { 0.0 };
                for k in 0..steps {
                    let t = start + k as f64 * h;
                    for factor in schedule.step_factors(t, h, opts.ordering)? {
                        v = apply_exp(&factor.op, h, &v, &opts.krylov)?;
                    }
                }
            }
            Segment::Free { span } => {
                if span > 0.0 {
                    v = match &free_diag {
                        Some(e) => CVec::from_iterator(v.len(), v.iter().zip(e).map(|(a, &e)| a * C64::from_polar(1.0, -e * span))),
                        None => apply_exp(free, span, &v, &opts.krylov)?,
                    };
                }
            }
        }
        if emit {
            out.push(StateVector::new(v.clone())?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SchrodingerRun {
    pub states: Vec<StateVector>,
    /// Step used inside the pulse.
    pub dt: f64,
    /// Largest state change against the run with twice the step.
    pub self_convergence: f64,
}

/// Halves the step from `t₁ / initial_steps` until successive trajectories
/// agree to `auto_tolerance` at every grid time, both in the state and in
/// `⟨Ĥ₀(ψ_S)⟩`.
pub fn evolve_state_auto(
    state0: &StateVector,
    schedule: &HamiltonianSchedule,
    grid: &[f64],
    opts: &SchrodingerOptions,
) -> Result<SchrodingerRun> {
    let energies = |states: &[StateVector]| -> Vec<f64> {
        states.iter().map(|s| s.expectation(schedule.free_operator())).collect()
    };
    let mut steps = opts.initial_steps.max(1);
    let mut previous = evolve_state(state0, schedule, grid, schedule.t1() / steps as f64, opts)?;
    let mut previous_energy = energies(&previous);
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        steps *= 2;
        let dt = schedule.t1() / steps as f64;
        let current = evolve_state(state0, schedule, grid, dt, opts)?;
        let energy = energies(&current);
        let state_change = previous.iter().zip(&current).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
        let energy_change = previous_energy.iter().zip(&energy).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        change = state_change.max(energy_change);
        if change < opts.auto_tolerance {
            return Ok(SchrodingerRun {
                states: current,
                dt,
                self_convergence: change,
            });
        }
        previous = current;
        previous_energy = energy;
    }
    Err(LabError::NonConvergence {
        achieved: change,
        wanted: opts.auto_tolerance,
    })
}

/// Basis indices grouped by total charge. Every Hamiltonian built here
/// conserves charge, so propagators are block diagonal over these sets.
pub fn charge_sectors(field: &FieldOperator) -> Vec<Vec<usize>> {
    let space = field.space;
    let n = space.n_sites() as i64;
    let mut sectors = vec![Vec::new(); (2 * n + 1) as usize];
    for s in 0..space.dim() {
        sectors[(space.charge_number(s) + n) as usize].push(s);
    }
    sectors.retain(|s| !s.is_empty());
    sectors
}

fn sector_block(op: &FockOperator, sector: &[usize], local: &[usize]) -> Result<CMat> {
    let m = sector.len();
    let mut block = CMat::zeros(m, m);
    for (r, &i) in sector.iter().enumerate() {
        for (j, v) in op.row(i) {
            let c = local[j];
            if c == usize::MAX || sector[c] != j {
                return Err(LabError::Shape("operator couples different charge sectors".into()));
            }
            block[(r, c)] = v;
        }
    }
    Ok(block)
}

/// Dense `Û(t)` on the full Fock space at every grid time, built sector by
/// sector with the same stepping as [`evolve_state`].
pub fn dense_propagators(
    schedule: &HamiltonianSchedule,
    grid: &[f64],
    dt: f64,
    opts: &SchrodingerOptions,
    max_sites: usize,
) -> Result<Vec<CMat>> {
    let space = schedule.field.space;
    if space.n_sites() > max_sites {
        return Err(LabError::FockTooLarge {
            n_sites: space.n_sites(),
            dim: space.dim(),
            max_sites,
        });
    }
    let dim = space.dim();
    let sectors = charge_sectors(schedule.field);
    let mut local = vec![usize::MAX; dim];
    for sector in &sectors {
        for (k, &i) in sector.iter().enumerate() {
            local[i] = k;
        }
    }
    let mut blocks: Vec<CMat> = sectors.iter().map(|s| CMat::identity(s.len(), s.len())).collect();
    let multiply = |blocks: &mut Vec<CMat>, op: &FockOperator, h: f64| -> Result<()> {
        for (block, sector) in blocks.iter_mut().zip(&sectors) {
            let e = expm_hermitian(&sector_block(op, sector, &local)?, h);
            *block = e * &*block;
        }
        Ok(())
    };
    let assemble = |blocks: &[CMat]| -> CMat {
        let mut u = CMat::from_element(dim, dim, ZERO);
        for (block, sector) in blocks.iter().zip(&sectors) {
            for (r, &i) in sector.iter().enumerate() {
                for (c, &j) in sector.iter().enumerate() {
                    u[(i, j)] = block[(r, c)];
                }
            }
        }
        u
    };
    let mut out = Vec::with_capacity(grid.len());
    for (seg, emit) in plan(grid, schedule.t1(), dt)? {
        match seg {
            Segment::Pulse { start, end, steps } => {
                let h = if steps > 0 { (end - start) / steps as f64 } else { 0.0 };
                for k in 0..steps {
                    for factor in schedule.step_factors(start + k as f64 * h, h, opts.ordering)? {
                        multiply(&mut blocks, &factor.op, h)?;
                    }
                }
            }
            Segment::Free { span } => {
                if span > 0.0 {
                    multiply(&mut blocks, schedule.free_operator(), span)?;
                }
            }
        }
        if emit {
            out.push(assemble(&blocks));
        }
    }
    Ok(out)
}
