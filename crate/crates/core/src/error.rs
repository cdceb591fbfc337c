use crate::metric::ViolationReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unknown label `{0}`")]
    Label(String),

    #[error("not a metric: {0}")]
    NotAMetric(Box<ViolationReport>),

    #[error("cross-ratio undefined: {0}")]
    UndefinedCrossRatio(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("degenerate metrization: d({a}, {b}) collapses to {value:e}")]
    DegenerateMetrization { a: String, b: String, value: f64 },

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("not connected: {0}")]
    Connectivity(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("comparability bound violated: {0}")]
    BoundViolation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
