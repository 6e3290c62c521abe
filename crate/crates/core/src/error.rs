use std::fmt;

/// Errors raised by the numerical pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("DN operator is numerically singular on mean-zero functions (smallest singular value {0:e})")]
    SingularDn(f64),
    #[error("function is not mean-zero (|c_0| = {0:e})")]
    NotMeanZero(f64),
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("operator kind {found} where {expected} was required")]
    WrongKind { expected: &'static str, found: String },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("linear solve failed: {0}")]
    Solver(String),
    #[error("boundary resolution insufficient: {vertices} boundary vertices for truncation {n} (need {required})")]
    Resolution { vertices: usize, n: usize, required: usize },
    #[error("harmonic form basis is degenerate (condition number {0:e})")]
    DegenerateBasis(f64),
    #[error("{count} discrete eigenvalue candidates in band: {values:?}")]
    MultipleCandidates { count: usize, values: Vec<f64> },
    #[error("trace is not in the two-dimensional range (relative residual {0:e})")]
    LargeResidual(f64),
    #[error("normalization 2mu(mu^2-1)Im(c_a conj c_b) = 1 violated (defect {0:e})")]
    NormalizationViolated(f64),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("matrix is not in the Siegel upper half-space: {0}")]
    NotSiegel(String),
    #[error("theta series converges too slowly (radius would exceed {0})")]
    SlowConvergence(usize),
    #[error("theta constant {which} nearly vanishes (|e| = {modulus:e})")]
    NearDegenerate { which: Characteristic, modulus: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Half-integer theta characteristic stored as the flags `(2a1, 2a2, 2b1, 2b2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic(pub [u8; 4]);

impl Characteristic {
    pub const fn new(a1: u8, a2: u8, b1: u8, b2: u8) -> Self {
        Self([a1 & 1, a2 & 1, b1 & 1, b2 & 1])
    }

    /// Odd iff `4 a.b` is odd.
    pub fn is_odd(&self) -> bool {
        let [a1, a2, b1, b2] = self.0;
        (a1 * b1 + a2 * b2) % 2 == 1
    }

    pub fn a(&self) -> [f64; 2] {
        [0.5 * self.0[0] as f64, 0.5 * self.0[1] as f64]
    }

    pub fn b(&self) -> [f64; 2] {
        [0.5 * self.0[2] as f64, 0.5 * self.0[3] as f64]
    }

    /// The ten even characteristics in lexicographic flag order.
    pub fn even() -> Vec<Characteristic> {
        (0u8..16)
            .map(|m| Characteristic::new(m >> 3, (m >> 2) & 1, (m >> 1) & 1, m & 1))
            .filter(|c| !c.is_odd())
            .collect()
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "{a}{b}{c}{d}")
    }
}
