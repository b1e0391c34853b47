use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-positive edge weight {weight} on edge {a}-{b}")]
    NonPositiveWeight { a: String, b: String, weight: f64 },

    #[error("non-positive vertex measure {theta} at vertex {label}")]
    NonPositiveMeasure { label: String, theta: f64 },

    #[error("duplicate edge {a}-{b}")]
    DuplicateEdge { a: String, b: String },

    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("self-loop at vertex {0}")]
    SelfLoop(String),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("field has {got} values but graph has {expected} vertices")]
    FieldLength { expected: usize, got: usize },

    #[error("field is not strictly positive at vertex {label} (value {value})")]
    NonPositiveField { label: String, value: f64 },

    #[error("vertices {a} and {b} are disconnected")]
    Disconnected { a: String, b: String },

    #[error("sequence is not a shortest path: {0}")]
    NotShortestPath(String),

    #[error("delta vanishes at vertex {0}")]
    ZeroDelta(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blow-up at t = {t}: max |u| = {norm:e} exceeds ceiling")]
    BlowUp { t: f64, norm: f64 },

    #[error("positivity lost at t = {t}: u({label}) = {value:e}")]
    PositivityLoss { t: f64, label: String, value: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("source bound violated: |psi({label}, {t})| = {value} > C0 = {c0}")]
    SourceBound { label: String, t: f64, value: f64, c0: f64 },

    #[error("measure is not the degree at vertex {label} (theta = {theta}, deg = {deg})")]
    MeasureNotDegree { label: String, theta: f64, deg: f64 },

    #[error("graph too large for dense kernel: {n} vertices (cap {cap})")]
    TooLarge { n: usize, cap: usize },

    #[error("generator could not produce a connected graph after {0} attempts")]
    ConnectivityRetries(usize),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }
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

pub type Result<T> = std::result::Result<T, Error>;
