use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument must be positive, got {argument}")]
    NonPositiveArgument { argument: f64 },
    #[error("order {order} outside supported range |n| <= {max}")]
    OrderOutOfRange { order: i32, max: u32 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("interface {interface}: edge {edge} has zero length")]
    ZeroLengthEdge { interface: u32, edge: usize },
    #[error("interface {interface}: {reason}")]
    InvalidInterface { interface: u32, reason: String },
    #[error("domain {domain}: {reason}")]
    InvalidDomain { domain: u32, reason: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("point ({x}, {y}) lies on a boundary (distance {distance:e})")]
    OnBoundary { x: f64, y: f64, distance: f64 },
    #[error("scene configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),
    #[error("target {target} lies on source element {element} away from its midpoint")]
    TargetOnElement { target: usize, element: usize },
    #[error("element {element} has non-positive length")]
    DegenerateElement { element: usize },
    #[error("source range {start}..{end} exceeds mesh with {len} elements")]
    RangeOutOfBounds { start: usize, end: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("missing operator block {0}")]
    MissingBlock(String),
    #[error("block {label} assembled at k={found}, formulation needs k={expected}")]
    WavenumberMismatch { label: String, expected: f64, found: f64 },
    #[error("formulation {kind} needs {expected}; {detail}")]
    Topology { kind: String, expected: String, detail: String },
    #[error("epsilon = -1 in domain {domain} puts the accumulation point at the origin")]
    Metamaterial { domain: u32 },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {dim} exceeds cap {cap}; reduce the element count")]
    TooLarge { dim: usize, cap: usize },
    #[error("QR iteration did not converge after {sweeps} sweeps; {found} eigenvalues deflated")]
    NoConvergence { sweeps: usize, found: usize, partial: Vec<num_complex::Complex64> },
    #[error("ConventionalBM has an unbounded spectrum; no accumulation prediction")]
    UnboundedSpectrum,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("mode {mode}: interface matching system is singular")]
    SingularMode { mode: i32 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("point sets differ ({0} vs {1} points)")]
    PointMismatch(usize, usize),
    #[error("reference field has zero real part everywhere")]
    ZeroReference,
    #[error("density vectors do not match mesh ({expected} elements, got {found})")]
    DensityLength { expected: usize, found: usize },
}

/// Crate-wide error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
