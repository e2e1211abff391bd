//! Shared inputs for the criterion benchmarks.

use neoseg_core::harness::{self, SyntheticSpec};
use neoseg_core::ProblemInstance;

/// The pinned synthetic fixture reduced to a 6-cluster instance.
pub fn fixture_instance() -> ProblemInstance {
    let image = harness::make_synthetic_image(&SyntheticSpec::FIXTURE).expect("fixture image");
    harness::prepare(image, 6, 32).expect("fixture instance").instance
}
