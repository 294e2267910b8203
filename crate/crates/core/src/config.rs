//! Constants shared by the pipeline and the command line.

use crate::rational::{q, qr, Q};

pub use crate::partition::CHOP_ROUNDS;
pub use crate::polyflow::{MAX_BRUTE_EDGES, MAX_BRUTE_VERTICES, MAX_EXACT_SET};
pub use crate::thinround::{EXACT_NU_LIMIT, THIN_DELTA};
pub use crate::treeembed::{K_EMB, SLACK};

/// Relative tolerance for floating-point comparisons against exact values.
pub const TOL: f64 = 1e-9;
/// Default number of Monte Carlo samples per experiment.
pub const DEFAULT_SAMPLES: usize = 32;
/// Vertex flow-cut gap sought by the witness search.
pub fn gap_target() -> Q {
    qr(7, 5)
}
/// Largest rounded-cut to flow ratio seen on the regression corpus, with headroom; a run above it
/// counts as a regression.
pub fn c_pipeline() -> Q {
    q(2)
}
