use thiserror::Error;

/// Crate-wide error type. Every variant names the violated precondition so
/// that CLI diagnostics can surface it verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bias entry at index {index} is {value}; entries must lie strictly inside (0,1)")]
    BiasOutOfRange { index: usize, value: f64 },

    #[error("bias vector must have at least one segment")]
    EmptyBias,

    #[error("dimension mismatch: bias has {bias_len} segments but code rows have {code_len}")]
    LengthMismatch { bias_len: usize, code_len: usize },

    #[error("code matrix must have at least one user row")]
    EmptyCode,

    #[error("coalition member {user} is outside the user range 1..={n}")]
    CoalitionIndexOutOfRange { user: usize, n: usize },

    #[error("coalition sizes must satisfy 1 <= c <= c0 (got c = {c}, c0 = {c0})")]
    CoalitionSizeInvalid { c: usize, c0: usize },

    #[error("coalition members must be distinct (user {user} repeats)")]
    CoalitionDuplicate { user: usize },

    #[error("invalid bias distribution: {0}")]
    InvalidDistribution(&'static str),

    #[error("uniform variate {0} is outside [0,1]")]
    UniformOutOfRange(f64),

    #[error("{name} = {value} violates the required range {range}")]
    EpsilonOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("a two-sided threshold variant requires eps2 > 0")]
    TwoSidedNeedsEps2,

    #[error("thresholds degenerate: eps1 + eps2 must be < 1 (got {sum})")]
    ThresholdsDegenerate { sum: f64 },

    #[error("coalition size c must be >= 1")]
    EmptyCoalition,

    #[error("channel theta must have length c + 1 (got {got} for c = {c})")]
    ThetaLengthMismatch { got: usize, c: usize },

    #[error("theta[{z}] = {value} is outside [0,1]")]
    ThetaOutOfRange { z: usize, value: f64 },

    #[error("marking violated: theta must satisfy theta[0] = 0 and theta[c] = 1")]
    MarkingViolated,

    #[error("pirate output requires a non-empty active coalition")]
    EmptyActiveCoalition,

    #[error("colluder bit count {got} does not match the channel size c = {c}")]
    CoalitionBitsMismatch { got: usize, c: usize },

    #[error("bias p = {0} must lie strictly inside (0,1)")]
    BiasBoundary(f64),

    #[error("symbol {0} is not a bit")]
    NotABit(u8),

    #[error("decoder size c0 must be >= 1")]
    DecoderSizeZero,

    #[error("likelihoods vanish under both hypotheses at (x={x}, y={y}); channel and bias are incompatible")]
    ZeroLikelihood { x: u8, y: u8 },

    #[error("sequential boundary slope must be strictly negative (got {0})")]
    SlopeNotNegative(f64),

    #[error("boundary order violated: lower must stay below upper over the active range")]
    BoundaryOrder,

    #[error("truncation length must be >= 1")]
    TruncationLengthZero,

    #[error("scheme invariant violated: {0}")]
    SchemeInvariant(&'static str),

    #[error("engine already finished; no further segments may be stepped")]
    EngineFinished,

    #[error("segment index out of order: expected {expected}, got {got}")]
    SegmentOutOfOrder { expected: u64, got: u64 },

    #[error("score slice has {got} entries but the engine tracks {expected} users")]
    ScoreCountMismatch { expected: usize, got: usize },

    #[error("overshoot samples from upper-boundary crossings must be >= 0 (got {0})")]
    NegativeOvershoot(f64),

    #[error("kl divergence requires b strictly inside (0,1) unless a equals the boundary value (a = {a}, b = {b})")]
    KlBoundary { a: f64, b: f64 },

    #[error("probability {name} = {value} is outside [0,1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("drift signs must satisfy mu0 < 0 < mu1 (got mu0 = {mu0}, mu1 = {mu1})")]
    DriftSigns { mu0: f64, mu1: f64 },

    #[error("termination prediction requires eps1' in (0,1) and eps2' in [0,1)")]
    PredictionEpsilons,

    #[error("user count n must be >= 2 for logarithmic length formulas")]
    UserCountTooSmall,

    #[error("drift integrals require c >= 2")]
    DriftIntegralSize,

    #[error("quadrature failed to reach the requested tolerance {tol} (error estimate {err})")]
    QuadratureTolerance { tol: f64, err: f64 },

    #[error("quadrature consistency check failed: {0}")]
    QuadratureInconsistent(String),

    #[error("channel carries no information about a single colluder symbol")]
    DegenerateChannel,

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("export format error at line {line}: {reason}")]
    MalformedExport { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
