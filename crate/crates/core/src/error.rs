use crate::shellgeom::LatticeVector;

/// Errors shared by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A predicted or actual object size exceeded a configured cap.  The
    /// instance is not wrong, it just needs a streaming or orbit-level
    /// treatment instead of full materialization.
    #[error("{what} would need {needed} entries, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// Vectors of different dimensions were mixed in one operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operation needed more input vectors than it received.
    #[error("too few vectors: need at least {need}, got {got}")]
    TooFewVectors { need: usize, got: usize },

    /// A shell or code parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A degree-2n permutation does not stabilize the coordinate pairing
    /// {1,2},{3,4},... and therefore is no signed permutation.
    #[error("permutation does not preserve the coordinate pairing (point {point} maps across pairs)")]
    BlockSystemViolation { point: usize },

    /// A requested built-in group family does not exist for the given
    /// parameters.
    #[error("no built-in group family: {0}")]
    UnsupportedFamily(String),

    /// The brute-force clique oracle refuses graphs above its hard limit.
    #[error("graph too large for brute force: {vertices} vertices, limit {limit}")]
    TooLarge { vertices: usize, limit: usize },

    /// A code failed re-verification; the report says why.
    #[error("verification failed: {0}")]
    VerificationFailed(String),

    /// Matrix rows are not pairwise orthogonal.
    #[error("matrix rows {row_a} and {row_b} are not orthogonal (inner product {ip})")]
    NotOrthogonal {
        row_a: usize,
        row_b: usize,
        ip: i64,
    },

    /// Matrix rows do not all share one squared norm.
    #[error("matrix row {row} has squared norm {got}, expected {expected}")]
    UnequalRowNorms {
        row: usize,
        got: i64,
        expected: i64,
    },

    /// No shipped construction yields an orthogonal integer matrix with the
    /// requested scale and dimension.
    #[error("no known orthogonal integer matrix with squared row norm {c} in dimension {n}")]
    NoKnownConstruction { c: u64, n: usize },

    /// A pair of input points subtends an angle whose cosine is irrational,
    /// so no exact integral embedding of this kind exists.
    #[error("irrational cosine between input points {a} and {b}")]
    IrrationalAngle { a: usize, b: usize },

    /// The input point set is degenerate (empty, or contains a zero vector).
    #[error("degenerate input span: {0}")]
    DegenerateSpan(String),

    /// A pair of points in a union exceeds the allowed cosine; the witness
    /// pair is reported so the caller can prune.
    #[error("cosine bound exceeded by points {a:?} (norm^2 {ka}) and {b:?} (norm^2 {kb})")]
    CosineExceeded {
        a: LatticeVector,
        ka: u32,
        b: LatticeVector,
        kb: u32,
    },

    /// Two points of a union normalize to the same direction.
    #[error("duplicate point after normalization: {a:?} (norm^2 {ka}) and {b:?} (norm^2 {kb})")]
    DuplicatePoint {
        a: LatticeVector,
        ka: u32,
        b: LatticeVector,
        kb: u32,
    },

    /// A file did not parse as the expected format.
    #[error("malformed {format} file at line {line}: {msg}")]
    MalformedFile {
        format: &'static str,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
