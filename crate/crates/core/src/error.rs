use thiserror::Error;

pub type Result<T> = std::result::Result<T, SomError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SomError {
    #[error("grid dimensions must be positive, got {l}x{m}x{n}")]
    InvalidGrid { l: usize, m: usize, n: usize },
    #[error("coordinate ({0}, {1}, {2}) is outside the grid")]
    CoordOutOfBounds(usize, usize, usize),
    #[error("node index {index} is outside a grid of {nodes} nodes")]
    IndexOutOfBounds { index: usize, nodes: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("alpha must be a finite value >= 0, got {0}")]
    InvalidAlpha(f64),
    #[error("dimension {dim} is constant; cannot normalize")]
    DegenerateDimension { dim: usize },
    #[error("invalid timestamp: {0}")]
    InvalidTimestamp(String),
    #[error("unknown category {label:?}{}", line_suffix(*.line))]
    UnknownCategory { label: String, line: Option<usize> },
    #[error("record is missing a category label{}", line_suffix(*.line))]
    MissingCategory { line: Option<usize> },
    #[error("invalid record{}: {reason}", line_suffix(*.line))]
    InvalidRecord { line: Option<usize>, reason: String },
    #[error("empty data")]
    EmptyData,
    #[error("need at least 2 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("codebook corrupted: node {node} has a non-finite component after epoch {epoch}")]
    NonFinite { node: usize, epoch: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("r-squared undefined: {0}")]
    UndefinedRegression(&'static str),
    #[error("invalid projection axes: {0}")]
    InvalidAxes(String),
    #[error("invalid bounds on axis {axis}: max must exceed min")]
    InvalidBounds { axis: usize },
    #[error("operation needs a grid with at least 2 nodes")]
    SingleNodeGrid,
    #[error("eigen decomposition failed")]
    Decomposition,
}

fn line_suffix(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}
