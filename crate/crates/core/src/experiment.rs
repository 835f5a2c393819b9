//! Experiment configuration, the per-amplitude pipeline and the run record.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{run_audit, AuditOptions, AuditReport, DENSE_AUDIT_MAX_SITES};
use crate::error::{LabError, Result};
use crate::fock::{prepare_wave_packet, StateVector, DEFAULT_MAX_SITES};
use crate::gauge::{GaugeProfile, Ramp, DEFAULT_BAND_FRACTION};
use crate::heisenberg::{closed_form_propagator, ode_propagators, OdeOptions};
use crate::lattice::{LatticeConfig, Scheme};
use crate::linalg::C64;
use crate::observables::{decompose, divergence_profile, h0_expectation_heisenberg, h0_expectation_schrodinger, scan_threshold, DecompositionReport, Threshold};
use crate::schrodinger::{evolve_state, evolve_state_auto, HamiltonianSchedule, SchrodingerOptions, TimeOrdering};
use crate::system::LatticeSystem;

pub const RECORD_SCHEMA: &str = "dirac-lab/record/v1";
/// Environment variable that sizes the worker pool.
pub const THREADS_ENV: &str = "DIRAC_LAB_THREADS";

/// Violations below these bounds are not reported.
const NEGATIVITY_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-10;
const APPENDIX_TOL: f64 = 1e-8;
const ZERO_PULSE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeWeight {
    /// Positive-energy mode index, `1..=N`.
    pub n: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub modes: Vec<ModeWeight>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    /// `g = -∇·⟨Ĵ(t₁)⟩`.
    Divergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpatialSpec {
    Named(ProfileName),
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeUnits {
    #[default]
    Absolute,
    /// Multiples of the threshold `f*`.
    Fstar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub profile: SpatialSpec,
    pub t1: f64,
    #[serde(default)]
    pub ramp: Ramp,
    #[serde(default)]
    pub f_grid: Vec<f64>,
    #[serde(default)]
    pub f_units: AmplitudeUnits,
    #[serde(default = "default_band_fraction")]
    pub band_fraction: f64,
}

fn default_band_fraction() -> f64 {
    DEFAULT_BAND_FRACTION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Fixed(f64),
    Keyword(StepKeyword),
}

impl Default for StepSpec {
    fn default() -> Self {
        StepSpec::Keyword(StepKeyword::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    pub state: StateSpec,
    pub pulse: PulseSpec,
    pub tf: f64,
    #[serde(default)]
    pub dt: StepSpec,
    #[serde(default)]
    pub ordering: TimeOrdering,
    /// Evenly spaced samples on `[0, t_f]` for the time series; `t₁` is
    /// always added.
    #[serde(default = "default_series_points")]
    pub series_points: usize,
    #[serde(default)]
    pub outputs: OutputSpec,
    /// Echoed into the record; the pipeline itself is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_sites")]
    pub max_sites: usize,
}

fn default_series_points() -> usize {
    21
}

fn default_max_sites() -> usize {
    DEFAULT_MAX_SITES
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Checks everything that does not need the lattice spectrum.
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        let (t1, tf) = (self.pulse.t1, self.tf);
        if !(t1 > 0.0) || !t1.is_finite() {
            return Err(LabError::Config(format!("t1 must be positive, got {t1}")));
        }
        if !(tf >= t1) || !tf.is_finite() {
            return Err(LabError::Config(format!("tf = {tf} must not precede t1 = {t1}")));
        }
        if let StepSpec::Fixed(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() || dt > t1 {
                return Err(LabError::Config(format!("dt must lie in (0, t1], got {dt}")));
            }
        }
        if self.state.modes.is_empty() {
            return Err(LabError::Config("state.modes is empty".into()));
        }
        for m in &self.state.modes {
            if m.n == 0 || m.n > self.lattice.n_sites {
                return Err(LabError::Config(format!(
                    "mode index {} outside 1..={}",
                    m.n, self.lattice.n_sites
                )));
            }
            if !m.re.is_finite() || !m.im.is_finite() {
                return Err(LabError::Config(format!("mode {} has a non-finite weight", m.n)));
            }
        }
        if let Some(f) = self.pulse.f_grid.iter().find(|f| !f.is_finite()) {
            return Err(LabError::Config(format!("non-finite amplitude {f} in f_grid")));
        }
        if let SpatialSpec::Samples(g) = &self.pulse.profile {
            if g.len() != self.lattice.n_sites {
                return Err(LabError::Config(format!(
                    "spatial profile has {} samples for {} sites",
                    g.len(),
                    self.lattice.n_sites
                )));
            }
        }
        if !(self.pulse.band_fraction > 0.0 && self.pulse.band_fraction <= 1.0) {
            return Err(LabError::Config(format!(
                "band_fraction must lie in (0, 1], got {}",
                self.pulse.band_fraction
            )));
        }
        if self.series_points < 2 {
            return Err(LabError::Config("series_points must be at least 2".into()));
        }
        Ok(())
    }

    /// `c_n` for `n = 1..=N`; repeated indices add up.
    pub fn mode_weights(&self) -> Vec<C64> {
        let mut w = vec![C64::new(0.0, 0.0); self.lattice.n_sites];
        for m in &self.state.modes {
            w[m.n - 1] += C64::new(m.re, m.im);
        }
        w
    }

    /// Sorted sample times on `[0, t_f]` including `t₁`.
    pub fn series_grid(&self) -> Vec<f64> {
        let last = self.series_points - 1;
        let mut grid: Vec<f64> = (0..=last).map(|i| self.tf * i as f64 / last as f64).collect();
        grid.push(self.pulse.t1);
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * self.tf);
        grid
    }
}

/// Which parts of the pipeline run for every amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pipeline {
    pub series: bool,
    pub audit: bool,
}

impl Pipeline {
    pub const FULL: Pipeline = Pipeline { series: true, audit: true };
    pub const SCAN: Pipeline = Pipeline { series: false, audit: false };
    pub const AUDIT: Pipeline = Pipeline { series: false, audit: true };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub scheme: Scheme,
    /// How the pulse enters the kernel.
    pub coupling: String,
    pub time_ordering: TimeOrdering,
    pub ramp: Ramp,
    /// Whether `χ` and `∂χ/∂t` are continuous at `t₁`.
    pub ramp_smooth_at_t1: bool,
    pub band_fraction: f64,
    pub xi_r: f64,
    pub ode_tolerance: f64,
    pub krylov_tolerance: f64,
    pub auto_tolerance: f64,
    pub version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub t: f64,
    pub h0_closed_form: f64,
    pub h0_ode: f64,
    pub h0_schrodinger: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub f: f64,
    /// Step inside the pulse.
    pub dt: f64,
    /// State and energy change against the run with twice the step.
    pub self_convergence: f64,
    /// Largest `|‖Ω(t)‖ − 1|` on the sampled times.
    pub unitarity_drift: f64,
    pub decomposition: DecompositionReport,
    pub audit: Option<AuditReport>,
    pub series: Option<Vec<SeriesSample>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: String,
    pub config: ExperimentConfig,
    pub metadata: RunMetadata,
    pub threshold: Threshold,
    pub points: Vec<PointRecord>,
    /// Invariants that failed their tolerance.
    pub violations: Vec<String>,
}

impl ExperimentRecord {
    pub fn to_json_line(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| LabError::Parse(e.to_string()))
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        let record: ExperimentRecord = serde_json::from_str(line).map_err(|e| LabError::Parse(e.to_string()))?;
        if record.schema != RECORD_SCHEMA {
            return Err(LabError::Parse(format!(
                "schema `{}`, expected `{RECORD_SCHEMA}`",
                record.schema
            )));
        }
        Ok(record)
    }

    /// Every record in a line-delimited file.
    pub fn read_all(path: &Path) -> Result<Vec<Self>> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.display().to_string(),
            source,
        })?;
        text.lines().filter(|l| !l.trim().is_empty()).map(Self::from_json_line).collect()
    }
}

/// Worker pool sized by `DIRAC_LAB_THREADS`, or rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| LabError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| LabError::Config(e.to_string()))
}

struct Prepared {
    system: LatticeSystem,
    state0: StateVector,
    spatial: Vec<f64>,
    threshold: Threshold,
    amplitudes: Vec<f64>,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared> {
    config.validate().map_err(|e| e.at_stage("config"))?;
    let system = LatticeSystem::build(&config.lattice, config.max_sites).map_err(|e| e.at_stage("fock"))?;
    let state0 = prepare_wave_packet(&system.ladder, &config.mode_weights()).map_err(|e| e.at_stage("state"))?;
    let t1 = config.pulse.t1;
    let spatial = match &config.pulse.profile {
        SpatialSpec::Named(ProfileName::Divergence) => divergence_profile(&system, &state0, t1),
        SpatialSpec::Samples(g) => Ok(g.clone()),
    }
    .map_err(|e| e.at_stage("pulse"))?;
    // Rejects out-of-band and non-smooth profiles before any evolution.
    GaugeProfile::with_band_limit(&config.lattice, spatial.clone(), t1, config.pulse.ramp, 1.0, Some(config.pulse.band_fraction))
        .map_err(|e| e.at_stage("pulse"))?;
    let threshold = scan_threshold(&system, &state0, t1, &spatial).map_err(|e| e.at_stage("observables"))?;
    let amplitudes = match config.pulse.f_units {
        AmplitudeUnits::Absolute => config.pulse.f_grid.clone(),
        AmplitudeUnits::Fstar => config.pulse.f_grid.iter().map(|x| x * threshold.f_star).collect(),
    };
    Ok(Prepared {
        system,
        state0,
        spatial,
        threshold,
        amplitudes,
    })
}

fn schrodinger_options(config: &ExperimentConfig) -> SchrodingerOptions {
    SchrodingerOptions {
        ordering: config.ordering,
        ..SchrodingerOptions::default()
    }
}

fn run_point(
    config: &ExperimentConfig,
    prepared: &Prepared,
    index: usize,
    f: f64,
    pipeline: Pipeline,
) -> Result<PointRecord> {
    let system = &prepared.system;
    let state0 = &prepared.state0;
    let t1 = config.pulse.t1;
    let tf = config.tf;
    let profile = GaugeProfile::with_band_limit(
        &config.lattice,
        prepared.spatial.clone(),
        t1,
        config.pulse.ramp,
        f,
        Some(config.pulse.band_fraction),
    )
    .map_err(|e| e.at_stage("pulse"))?;
    let sopts = schrodinger_options(config);
    let grid = if pipeline.series { config.series_grid() } else { vec![t1, tf] };
    let schedule = HamiltonianSchedule::new(&config.lattice, &system.free, &system.field, &profile)
        .map_err(|e| e.at_stage("schrodinger"))?;
    let (states, dt, self_convergence) = match config.dt {
        StepSpec::Keyword(StepKeyword::Auto) => {
            let run = evolve_state_auto(state0, &schedule, &grid, &sopts).map_err(|e| e.at_stage("schrodinger"))?;
            (run.states, run.dt, run.self_convergence)
        }
        StepSpec::Fixed(dt) => {
            let states = evolve_state(state0, &schedule, &grid, dt, &sopts).map_err(|e| e.at_stage("schrodinger"))?;
            let coarse = evolve_state(state0, &schedule, &grid, 2.0 * dt, &sopts).map_err(|e| e.at_stage("schrodinger"))?;
            let change = states.iter().zip(&coarse).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
            (states, dt, change)
        }
    };
    let unitarity_drift = states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    let energies: Vec<f64> = states
        .iter()
        .map(|s| h0_expectation_schrodinger(system, s))
        .collect::<Result<_>>()
        .map_err(|e| e.at_stage("schrodinger"))?;
    let schrodinger_total = *energies.last().expect("grid ends at tf");

    let decomposition = decompose(system, state0, &profile, tf, schrodinger_total).map_err(|e| e.at_stage("observables"))?;

    let series = if pipeline.series {
        let ode = ode_propagators(&config.lattice, &system.h0, &profile, &grid, &OdeOptions::default())
            .map_err(|e| e.at_stage("heisenberg"))?;
        let mut samples = Vec::with_capacity(grid.len());
        for ((&t, w_ode), &h0_schrodinger) in grid.iter().zip(&ode).zip(&energies) {
            let w_cf = closed_form_propagator(&system.basis, &profile, t).map_err(|e| e.at_stage("heisenberg"))?;
            let cf = system.field.transformed(&w_cf)?;
            let od = system.field.transformed(w_ode)?;
            samples.push(SeriesSample {
                t,
                h0_closed_form: h0_expectation_heisenberg(system, state0, &cf)?,
                h0_ode: h0_expectation_heisenberg(system, state0, &od)?,
                h0_schrodinger,
            });
        }
        Some(samples)
    } else {
        None
    };

    let audit = if pipeline.audit {
        let opts = AuditOptions {
            ode: OdeOptions::default(),
            schrodinger: sopts,
            dt,
            max_dense_sites: DENSE_AUDIT_MAX_SITES.min(config.max_sites),
        };
        Some(run_audit(system, state0, &profile, tf, &decomposition, &opts).map_err(|e| e.at_stage("audit"))?)
    } else {
        None
    };

    Ok(PointRecord {
        index,
        f,
        dt,
        self_convergence,
        unitarity_drift,
        decomposition,
        audit,
        series,
    })
}

fn violations(points: &[PointRecord]) -> Vec<String> {
    let mut out = Vec::new();
    for p in points {
        let d = &p.decomposition;
        if d.schrodinger_total < -NEGATIVITY_TOL {
            out.push(format!("f = {}: Schrödinger energy {} is negative", p.f, d.schrodinger_total));
        }
        if p.unitarity_drift > UNITARITY_TOL {
            out.push(format!("f = {}: state norm drifts by {:.3e}", p.f, p.unitarity_drift));
        }
        if p.f == 0.0 {
            let spread = [d.formula_total, d.direct_total, d.schrodinger_total];
            let (lo, hi) = spread.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            if hi - lo > ZERO_PULSE_TOL {
                out.push(format!("f = 0: pictures disagree by {:.3e} without a pulse", hi - lo));
            }
        }
        if let Some(rel) = p.audit.as_ref().and_then(|a| a.appendix_relative_max) {
            if rel > APPENDIX_TOL {
                out.push(format!("f = {}: conjugated-field energy departs from the Schrödinger one by {rel:.3e}", p.f));
            }
        }
    }
    out
}

fn metadata(config: &ExperimentConfig, system: &LatticeSystem) -> RunMetadata {
    let sopts = schrodinger_options(config);
    let ramp = config.pulse.ramp;
    RunMetadata {
        scheme: config.lattice.scheme,
        coupling: match config.lattice.scheme {
            Scheme::Spectral => "minimal coupling p -> p - qA on the spectral kernel".into(),
            Scheme::GaugedHopping => "link phases exp(-iqaA) on the hopping kernel".into(),
        },
        time_ordering: config.ordering,
        ramp,
        ramp_smooth_at_t1: ramp.slope(1.0).abs() < 1e-12,
        band_fraction: config.pulse.band_fraction,
        xi_r: system.free.xi_r,
        ode_tolerance: OdeOptions::default().tolerance,
        krylov_tolerance: sopts.krylov.tolerance,
        auto_tolerance: sopts.auto_tolerance,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Runs the pipeline for every amplitude of the grid. Any failure aborts the
/// run with the name of the stage; no partial record is returned.
pub fn run_experiment(config: &ExperimentConfig, pipeline: Pipeline) -> Result<ExperimentRecord> {
    let prepared = prepare(config)?;
    let pool = worker_pool()?;
    let points: Vec<PointRecord> = pool.install(|| {
        prepared
            .amplitudes
            .par_iter()
            .enumerate()
            .map(|(i, &f)| run_point(config, &prepared, i, f, pipeline))
            .collect::<Result<_>>()
    })?;
    Ok(ExperimentRecord {
        schema: RECORD_SCHEMA.to_string(),
        config: config.clone(),
        metadata: metadata(config, &prepared.system),
        threshold: prepared.threshold,
        violations: violations(&points),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
tf = 2.0
series_points = 5

[lattice]
n_sites = 4
box_length = 4.0
mass = 1.0
charge = 1.0

[state]
modes = [{ n = 1, re = 1.0 }, { n = 2, re = 1.0 }]

[pulse]
profile = "divergence"
t1 = 1.0
f_grid = [0.0, 1.0, 2.0]
f_units = "fstar"
"#;

    #[test]
    fn config_defaults_and_round_trip() {
        let c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        assert_eq!(c.dt, StepSpec::Keyword(StepKeyword::Auto));
        assert_eq!(c.ordering, TimeOrdering::Magnus4);
        assert_eq!(c.pulse.ramp, Ramp::Polynomial);
        assert_eq!(c.max_sites, DEFAULT_MAX_SITES);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, c);
        let fixed = ExperimentConfig::from_toml_str(&CANONICAL.replace("tf = 2.0", "tf = 2.0\ndt = 0.01")).unwrap();
        assert_eq!(fixed.dt, StepSpec::Fixed(0.01));
    }

    #[test]
    fn tf_before_t1_is_rejected_up_front() {
        let mut c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        c.tf = 0.5;
        // A lattice too large to build shows that validation runs first.
        c.lattice.n_sites = 40;
        let err = run_experiment(&c, Pipeline::SCAN).unwrap_err();
        assert!(matches!(err, LabError::Stage { stage: "config", .. }), "{err}");
    }

    #[test]
    fn bad_inputs_name_their_stage() {
        let mut c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        c.state.modes[0].n = 9;
        assert!(matches!(run_experiment(&c, Pipeline::SCAN), Err(LabError::Stage { stage: "config", .. })));

        let mut c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        c.pulse.profile = SpatialSpec::Samples(vec![1.0, -1.0, 1.0, -1.0]);
        assert!(matches!(run_experiment(&c, Pipeline::SCAN), Err(LabError::Stage { stage: "pulse", .. })));

        let mut c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        c.pulse.ramp = Ramp::Linear;
        assert!(matches!(run_experiment(&c, Pipeline::SCAN), Err(LabError::Stage { stage: "pulse", .. })));
    }

    #[test]
    fn series_grid_contains_t1_once() {
        let mut c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        c.series_points = 4;
        let g = c.series_grid();
        assert_eq!(g.len(), 5);
        assert!(g.contains(&1.0));
        c.series_points = 5;
        assert_eq!(c.series_grid(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn violations_flag_broken_invariants() {
        let decomposition = DecompositionReport {
            f: 0.0,
            free_term: 1.0,
            gauge_term: 0.0,
            gauge_term_by_parts: 0.0,
            formula_total: 1.0,
            direct_total: 1.0,
            schrodinger_total: 1.0,
        };
        let clean = PointRecord {
            index: 0,
            f: 0.0,
            dt: 0.1,
            self_convergence: 0.0,
            unitarity_drift: 0.0,
            decomposition,
            audit: None,
            series: None,
        };
        assert!(violations(std::slice::from_ref(&clean)).is_empty());
        let mut bad = clean.clone();
        bad.decomposition.schrodinger_total = -1e-6;
        bad.unitarity_drift = 1e-8;
        assert_eq!(violations(&[bad]).len(), 3);
    }

    #[test]
    fn scan_pipeline_crosses_zero_at_f_star() {
        let c = ExperimentConfig::from_toml_str(CANONICAL).unwrap();
        let record = run_experiment(&c, Pipeline::SCAN).unwrap();
        assert_eq!(record.points.len(), 3);
        let f_star = record.threshold.f_star;
        assert!((record.points[1].f - f_star).abs() < 1e-12 * f_star);
        assert!(record.points[1].decomposition.formula_total.abs() < 1e-8);
        assert!(record.points[2].decomposition.formula_total < 0.0);
        for p in &record.points {
            assert!(p.decomposition.schrodinger_total >= -1e-10);
            assert!(p.audit.is_none() && p.series.is_none());
        }
        let line = record.to_json_line().unwrap();
        assert_eq!(ExperimentRecord::from_json_line(&line).unwrap(), record);
    }
}
