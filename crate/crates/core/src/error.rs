use thiserror::Error;

/// Errors raised by the numerical and lattice routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric at ({row}, {col})")]
    NotSkew { row: usize, col: usize },
    #[error("skew form is degenerate (zero determinant)")]
    DegenerateForm,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not symmetric: |Ω[{row}][{col}] - Ω[{col}][{row}]| = {deviation:e}")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },
    #[error("imaginary part is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    ImagNotPositiveDefinite { min_eigenvalue: f64 },
    #[error("required lattice radius {required} exceeds the cap {cap}")]
    RadiusCapExceeded { required: u64, cap: u32 },
    #[error("total derivative order {order} exceeds the cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },
    #[error("invalid truncation policy: {0}")]
    InvalidPolicy(String),
    #[error("matrix is not an element of Sp(2g, Z)")]
    NotSymplectic,
    #[error("C·Ω + D is numerically singular")]
    SingularDenominator,
    #[error("all {skipped} samples were rejected near the theta divisor")]
    NearZeroDenominator { skipped: usize },
    #[error("samples are degenerate: {0}")]
    DegenerateSamples(String),
    #[error("malformed secant system: {0}")]
    MalformedSystem(String),
    #[error("vector is not a half-period of the lattice")]
    NotHalfPeriod,
    #[error("invalid block data: {0}")]
    InvalidBlockData(String),
    #[error("variable mismatch: {0}")]
    VariableMismatch(String),
    #[error("tau specification does not match the hierarchy: {0}")]
    SpecMismatch(String),
    #[error("abelian variety is reducible (Sasaki rank {rank} < {maximal})")]
    ReducibleVariety { rank: usize, maximal: usize },
    #[error("solver did not converge (best residual {residual:e})")]
    NotConverged { residual: f64 },
    #[error("rank deficiency: {0}")]
    RankDeficient(String),
    #[error("evaluation point lies near the theta divisor (|θ| = {modulus:e})")]
    NearDivisor { modulus: f64 },
    #[error("duality matrix of theta constants is numerically singular")]
    SingularDuality,
    #[error("branch points collide (distance {distance:e})")]
    BranchCollision { distance: f64 },
    #[error("quadrature did not converge (change {change:e} on order doubling)")]
    QuadratureNotConverged { change: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
