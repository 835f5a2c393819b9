use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid lattice configuration: {0}")]
    InvalidLattice(String),

    #[error("unexpected single-particle spectrum: {0}")]
    Spectrum(String),

    #[error("Fock space for {n_sites} sites has dimension 4^{n_sites} = {dim}, above the cap of {max_sites} sites")]
    FockTooLarge {
        n_sites: usize,
        dim: usize,
        max_sites: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("potential must be real valued: {0}")]
    ComplexPotential(String),

    #[error("invalid gauge profile: {0}")]
    InvalidProfile(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("integrator step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("integration did not converge: achieved residual {achieved:.3e}, wanted {wanted:.3e}")]
    NonConvergence { achieved: f64, wanted: f64 },

    #[error("invalid time grid: {0}")]
    TimeGrid(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("scan degenerate: {0}")]
    Degenerate(String),

    #[error("invalid experiment configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {cause}")]
    Stage { stage: &'static str, cause: Box<LabError> },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("record parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub(crate) fn at_stage(self, stage: &'static str) -> LabError {
        match self {
            LabError::Stage { .. } => self,
            other => LabError::Stage {
                stage,
                cause: Box::new(other),
            },
        }
    }
}
