use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("graph is not outerplanar: {0}")]
    NotOuterplanar(String),
    #[error("graph is not biconnected")]
    NotBiconnected,
    #[error("graph is not planar")]
    NotPlanar,
    #[error("chord of length {chord} exceeds what the path allows ({limit})")]
    ChordTooLong { chord: String, limit: String },
    #[error("glued paths have different lengths ({0} vs {1})")]
    LengthMismatch(String, String),
    #[error("scale must be positive")]
    NonPositiveScale,
    #[error("retraction target is empty or misses a component: {0}")]
    EmptyTarget(String),
    #[error("face is invalid: {0}")]
    FaceInvalid(String),
    #[error("slack hypothesis violated on ear ({u},{v}): {detail}")]
    SlackViolation { u: usize, v: usize, detail: String },
    #[error("tree map is not star-shaped at tree node {0}")]
    NotStarShaped(usize),
    #[error("adaptedness fails on edge ({u},{v}): tree distance {dist} > {bound}")]
    HypothesisViolated {
        u: usize,
        v: usize,
        dist: String,
        bound: String,
    },
    #[error("no cut separates any demand")]
    NoSeparatedDemand,
    #[error("negative entry in length vector")]
    NegativeEntry,
    #[error("set too large for exact evaluation ({0} elements)")]
    TooLargeForExact(usize),
    #[error("instance too large for brute force ({0})")]
    TooLarge(usize),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("search budget exhausted after {0} candidates")]
    BudgetExhausted(usize),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
