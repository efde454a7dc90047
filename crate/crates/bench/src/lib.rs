//! Shared fixtures for the benchmarks.

use hctree::activity::{ActivitySpec, ModelParams};
use hctree::bg::{BgParams, DEFAULT_MAX_DEPTH};

/// Two-spin activity with ‖λ‖ = 4.2 — inside the contractive window for k = 2.
pub fn two_spin_activity() -> ActivitySpec {
    ActivitySpec::finite([(1, 2.1), (-1, 2.1)]).unwrap()
}

pub fn four_spin_activity() -> ActivitySpec {
    ActivitySpec::finite([(1, 1.05), (-1, 1.05), (2, 1.05), (-2, 1.05)]).unwrap()
}

pub fn contractive_params(tol: f64) -> BgParams {
    BgParams::new(
        ModelParams::new(2, two_spin_activity()),
        tol,
        DEFAULT_MAX_DEPTH,
    )
    .unwrap()
}
