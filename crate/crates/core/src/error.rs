use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("zero bandwidth")]
    ZeroBandwidth,
    #[error("log of nonpositive rate")]
    NonPositiveRate,
    #[error("degenerate FEF")]
    DegenerateFef,
    #[error("outage: demand cannot be met even by a single user")]
    Outage,
    #[error("infeasible CSC: spectral radius {0} >= 1")]
    InfeasibleCsc(f64),
    #[error("cluster infeasible: no KKT case satisfies the necessary conditions")]
    ClusterInfeasible,
    #[error("budget infeasible: lower bounds sum to {required} RBs, {available} available")]
    BudgetInfeasible { required: f64, available: f64 },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
