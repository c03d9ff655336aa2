use thiserror::Error;

pub type Result<T> = std::result::Result<T, CmvError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CmvError {
    #[error("coefficient at index {index} has modulus {modulus} (must be < 1)")]
    CoefficientOutOfDisc { index: i64, modulus: f64 },

    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),

    #[error("window [{a}, {b}] is too short (need b - a >= {min})")]
    WindowTooShort { a: i64, b: i64, min: i64 },

    #[error("site {site} lies outside window [{a}, {b}]")]
    OutsideWindow { site: i64, a: i64, b: i64 },

    #[error("spectral parameter z = {z} lies on the unit circle")]
    OnUnitCircle { z: String },

    #[error("near-spectrum: banded solve ill-conditioned ({detail})")]
    NearSpectrum { detail: String },

    #[error("not converged: {detail}")]
    NotConverged { detail: String },

    #[error("negative density {value} at theta = {theta} (tolerance {tol})")]
    NegativeDensity { value: f64, theta: f64, tol: f64 },

    #[error("moebius-pole: denominator modulus {modulus:e} below threshold")]
    MoebiusPole { modulus: f64 },

    #[error("m-denominator-degenerate: modulus {modulus:e} below threshold")]
    MDenominatorDegenerate { modulus: f64 },

    #[error("wronskian-degenerate: modulus {modulus:e} below threshold")]
    WronskianDegenerate { modulus: f64 },

    #[error("transfer matrix undefined at site {site}: {detail}")]
    TransferUndefined { site: i64, detail: String },

    #[error("propagation overflow at site {site}")]
    PropagationOverflow { site: i64 },

    #[error("edge-contact at step {step}: edge mass {mass:e}")]
    EdgeContact { step: i64, mass: f64 },

    #[error("initial state not left-concentrated: right mass {mass:e}")]
    NotLeftConcentrated { mass: f64 },

    #[error("oracle dimension {dim} exceeds limit {max}")]
    OracleTooLarge { dim: usize, max: usize },

    #[error("singular matrix in dense oracle")]
    Singular,

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl CmvError {
    /// Short machine-readable tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            CmvError::CoefficientOutOfDisc { .. } => "coefficient-out-of-disc",
            CmvError::InvalidParameter(_) => "invalid-parameter",
            CmvError::WindowTooShort { .. } => "window-too-short",
            CmvError::OutsideWindow { .. } => "outside-window",
            CmvError::OnUnitCircle { .. } => "on-unit-circle",
            CmvError::NearSpectrum { .. } => "near-spectrum",
            CmvError::NotConverged { .. } => "not-converged",
            CmvError::NegativeDensity { .. } => "negative-density",
            CmvError::MoebiusPole { .. } => "moebius-pole",
            CmvError::MDenominatorDegenerate { .. } => "m-denominator-degenerate",
            CmvError::WronskianDegenerate { .. } => "wronskian-degenerate",
            CmvError::TransferUndefined { .. } => "transfer-undefined",
            CmvError::PropagationOverflow { .. } => "propagation-overflow",
            CmvError::EdgeContact { .. } => "edge-contact",
            CmvError::NotLeftConcentrated { .. } => "not-left-concentrated",
            CmvError::OracleTooLarge { .. } => "oracle-too-large",
            CmvError::Singular => "singular",
            CmvError::Config(_) => "config",
            CmvError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for CmvError {
    fn from(e: std::io::Error) -> Self {
        CmvError::Io(e.to_string())
    }
}
