use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("paths are not on the same time grid")]
    GridMismatch,
    #[error("kernel window [{lo}, {hi}] at t = {t} leaves the observation interval [0, {horizon}]")]
    WindowOutOfRange { t: f64, lo: f64, hi: f64, horizon: f64 },
    #[error("kernel window holds {found} grid points, at least {required} required")]
    Resolution { found: usize, required: usize },
    #[error("kernel family {family} cannot reach order {order}")]
    InfeasibleOrder { family: &'static str, order: usize },
    #[error("singular moment system for order {0}")]
    SingularSystem(usize),
    #[error("kernel failed certification: {0}")]
    Certification(String),
    #[error("quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },
    #[error("could not isolate kernel roots: {0}")]
    RootIsolation(String),
    #[error("multiplier supplies derivatives up to order {available}, order {required} needed")]
    InsufficientSmoothness { required: usize, available: usize },
    #[error("initial value must be positive, got {0}")]
    NonPositiveInitial(f64),
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
