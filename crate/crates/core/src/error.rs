use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Every variant maps to a stable machine-readable code via [`HodgeError::code`],
/// which the command-line driver embeds in its error reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HodgeError {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("duplicate top simplex {0:?}")]
    DuplicateSimplex(Vec<usize>),

    #[error("face {face:?} has {cofaces} cofaces; a closed complex needs exactly 2")]
    NotClosed { face: Vec<usize>, cofaces: usize },

    #[error("face {face:?} receives the same induced orientation from both cofaces")]
    NonOrientable { face: Vec<usize> },

    #[error("degree {degree} outside the valid range {min}..={max}")]
    Degree { degree: usize, min: usize, max: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate {degree}-simplex {simplex:?} (volume {volume:e})")]
    Geometry {
        degree: usize,
        simplex: Vec<usize>,
        volume: f64,
    },

    #[error("lumped metric unavailable: simplex {simplex:?} {reason}")]
    Scheme { simplex: Vec<usize>, reason: String },

    #[error("numerical failure in {what}: residual {residual:e}")]
    Numerical { what: String, residual: f64 },

    #[error(
        "ambiguous numerical rank in degree {degree}: eigenvalue {eigenvalue:e} lies within a factor 10 of the cutoff {cutoff:e}; choose a finer rank cutoff"
    )]
    RankAmbiguity {
        degree: usize,
        eigenvalue: f64,
        cutoff: f64,
    },

    #[error("harmonic space of degree {degree} has dimension {found}, but the Betti number is {betti}")]
    HarmonicDimension {
        degree: usize,
        found: usize,
        betti: usize,
    },

    #[error("cochain is not exact ({reason}): closed residual {closed_residual:e}, harmonic residual {harmonic_residual:e}")]
    NotExact {
        reason: String,
        closed_residual: f64,
        harmonic_residual: f64,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("hypothesis s > k + n/2 violated: s = {s}, k = {k}, n = {n}")]
    Hypothesis { k: usize, s: usize, n: usize },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("capability missing: {0}")]
    Capability(String),

    #[error("unknown {kind} '{name}'")]
    UnknownRegistry { kind: String, name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integer overflow during exact elimination")]
    Overflow,

    #[error("cannot read mesh: {0}")]
    MeshUnreadable(String),

    #[error("malformed cochain: {0}")]
    CochainMalformed(String),
}

impl HodgeError {
    /// Stable error code string.
    pub fn code(&self) -> &'static str {
        match self {
            HodgeError::InvalidComplex(_) => "invalid_complex",
            HodgeError::DuplicateSimplex(_) => "duplicate_simplex",
            HodgeError::NotClosed { .. } => "not_closed",
            HodgeError::NonOrientable { .. } => "non_orientable",
            HodgeError::Degree { .. } => "degree",
            HodgeError::Shape(_) => "shape",
            HodgeError::Geometry { .. } => "geometry",
            HodgeError::Scheme { .. } => "scheme",
            HodgeError::Numerical { .. } => "numerical",
            HodgeError::RankAmbiguity { .. } => "rank_ambiguity",
            HodgeError::HarmonicDimension { .. } => "harmonic_dimension",
            HodgeError::NotExact { .. } => "not_exact",
            HodgeError::Parameter(_) => "parameter",
            HodgeError::Hypothesis { .. } => "hypothesis",
            HodgeError::Grid(_) => "grid",
            HodgeError::Capability(_) => "capability",
            HodgeError::UnknownRegistry { .. } => "unknown_registry",
            HodgeError::Domain(_) => "domain",
            HodgeError::Overflow => "overflow",
            HodgeError::MeshUnreadable(_) => "mesh_unreadable",
            HodgeError::CochainMalformed(_) => "cochain_malformed",
        }
    }
}

pub type Result<T, E = HodgeError> = std::result::Result<T, E>;
