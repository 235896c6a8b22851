use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the solver and fitting layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported truncation: {0} levels per site (expected 2 or 3)")]
    UnsupportedTruncation(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("site index {site} out of range for {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("vector length {0} is not a perfect square")]
    NonSquareLength(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("degenerate labeling ambiguity: {0}")]
    DegenerateLabeling(String),
    #[error("non-unique steady state: spectral gap {gap:.3e} below {required:.3e}")]
    NonUniqueSteadyState { gap: f64, required: f64 },
    #[error("kernel not found: residual {residual:.3e} exceeds {allowed:.3e}")]
    KernelNotFound { residual: f64, allowed: f64 },
    #[error("integration unstable: trace drift {drift:.3e}; reduce dt")]
    IntegrationUnstable { drift: f64 },
    #[error("heat channels missing: {0}")]
    ChannelsMissing(String),
    #[error("state is not steady: ||L rho|| = {residual:.3e} exceeds {allowed:.3e}")]
    NotSteady { residual: f64, allowed: f64 },
    #[error("coefficient of performance undefined: {0}")]
    CopUndefined(String),
    #[error("requested span {span:.3e} rad/s exceeds grid coverage {coverage:.3e} rad/s")]
    SpanExceedsGrid { span: f64, coverage: f64 },
    #[error("unresolved triplet: increase drive")]
    UnresolvedTriplet,
    #[error("fit did not converge after {0} iterations")]
    FitNonConvergence(usize),
    #[error("fit parameter at bound: {0}")]
    ParameterAtBound(String),
    #[error("invalid input data: {0}")]
    InvalidData(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Coarse provenance tag used by front-ends when reporting failures.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            UnsupportedTruncation(_) | DimensionMismatch(_) | SiteOutOfRange { .. }
            | NonSquareLength(_) => "operator-core",
            InvalidParams(_) | DegenerateLabeling(_) => "device-model",
            NonUniqueSteadyState { .. } | KernelNotFound { .. } | IntegrationUnstable { .. } => {
                "lindblad-engine"
            }
            ChannelsMissing(_) | NotSteady { .. } | CopUndefined(_) => "thermo",
            SpanExceedsGrid { .. } | UnresolvedTriplet => "spectra",
            FitNonConvergence(_) | ParameterAtBound(_) | InvalidData(_) | Csv(_) => {
                "reflectometry"
            }
        }
    }
}
