use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use dirac_lab::experiment::{
    run_experiment, AmplitudeUnits, ExperimentConfig, ExperimentRecord, Pipeline, StepKeyword, StepSpec,
};
use dirac_lab::gauge::Ramp;
use dirac_lab::lattice::Scheme;
use dirac_lab::report::{emit_report, ReportFormat};
use dirac_lab::schrodinger::TimeOrdering;

#[derive(Parser)]
#[command(name = "dirac-lab", version, about = "Lattice Dirac field under a pure-gauge pulse in both pictures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: scan, time series and audit; writes every output file.
    Run(RunArgs),
    /// Energy decomposition over the amplitude grid only.
    Scan(RunArgs),
    /// Scan plus the picture-equivalence audit.
    Audit(RunArgs),
    /// Re-emit tables from an existing record file.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    n_sites: Option<usize>,
    #[arg(long)]
    box_length: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    charge: Option<f64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    tf: Option<f64>,
    /// Pulse step, or `auto`.
    #[arg(long)]
    dt: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    f_grid: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_units)]
    f_units: Option<AmplitudeUnits>,
    #[arg(long, value_parser = parse_ramp)]
    ramp: Option<Ramp>,
    #[arg(long)]
    ordering: Option<TimeOrdering>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_sites: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    format: ReportFormat,
}

#[derive(Args)]
struct ReportArgs {
    /// Line-delimited record file; the last record is used.
    #[arg(long)]
    record: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "table")]
    format: ReportFormat,
}

fn parse_units(s: &str) -> Result<AmplitudeUnits, String> {
    match s {
        "absolute" => Ok(AmplitudeUnits::Absolute),
        "fstar" => Ok(AmplitudeUnits::Fstar),
        other => Err(format!("unknown amplitude units `{other}`")),
    }
}

fn parse_ramp(s: &str) -> Result<Ramp, String> {
    match s {
        "polynomial" => Ok(Ramp::Polynomial),
        "cosine" => Ok(Ramp::Cosine),
        "linear" => Ok(Ramp::Linear),
        other => Err(format!("unknown ramp `{other}`")),
    }
}

impl RunArgs {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(&self.config)?;
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value.clone() {
                    $field = v;
                }
            };
        }
        set!(c.lattice.n_sites, self.n_sites);
        set!(c.lattice.box_length, self.box_length);
        set!(c.lattice.mass, self.mass);
        set!(c.lattice.charge, self.charge);
        set!(c.lattice.scheme, self.scheme);
        set!(c.pulse.t1, self.t1);
        set!(c.tf, self.tf);
        set!(c.pulse.f_grid, self.f_grid);
        set!(c.pulse.f_units, self.f_units);
        set!(c.pulse.ramp, self.ramp);
        set!(c.ordering, self.ordering);
        set!(c.seed, self.seed);
        set!(c.max_sites, self.max_sites);
        set!(c.outputs.dir, self.out);
        if let Some(dt) = &self.dt {
            c.dt = if dt == "auto" {
                StepSpec::Keyword(StepKeyword::Auto)
            } else {
                StepSpec::Fixed(dt.parse().with_context(|| format!("--dt `{dt}`"))?)
            };
        }
        Ok(c)
    }
}

fn execute(args: &RunArgs, pipeline: Pipeline) -> anyhow::Result<bool> {
    let config = args.config()?;
    let record = run_experiment(&config, pipeline)?;
    let files = emit_report(&record, &config.outputs.dir, args.format)?;
    println!("f* = {:.12e}", record.threshold.f_star);
    for p in &record.points {
        let d = &p.decomposition;
        println!(
            "f = {:>14.6e}  formula = {:>14.6e}  direct = {:>14.6e}  schrodinger = {:>14.6e}",
            d.f, d.formula_total, d.direct_total, d.schrodinger_total
        );
    }
    for f in &files {
        println!("wrote {}", f.display());
    }
    for v in &record.violations {
        eprintln!("invariant violated: {v}");
    }
    Ok(record.violations.is_empty())
}

fn report(args: &ReportArgs) -> anyhow::Result<bool> {
    let records = ExperimentRecord::read_all(&args.record)?;
    let Some(record) = records.last() else {
        bail!("{} holds no records", args.record.display());
    };
    for f in emit_report(record, &args.out, args.format)? {
        println!("wrote {}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(a) => execute(a, Pipeline::FULL),
        Command::Scan(a) => execute(a, Pipeline::SCAN),
        Command::Audit(a) => execute(a, Pipeline::AUDIT),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
