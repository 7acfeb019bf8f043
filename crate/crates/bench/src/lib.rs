//! Shared inputs for the benchmarks.

use rfaug::synth::{generate, PathSpec};
use rfaug::{CsiTensor, SampleRecord, SceneSpec};

/// A walking-like recording: static path plus a Doppler path active in the
/// middle half.
pub fn recording(
    duration_s: f64,
    rate: f64,
    f_count: usize,
    l_count: usize,
    seed: u64,
) -> CsiTensor {
    let scene = SceneSpec::new(duration_s, rate, f_count, l_count)
        .with_path(PathSpec::new(1.0, 0.0))
        .with_path(PathSpec::new(0.5, 40.0).active(duration_s * 0.25, duration_s * 0.75))
        .with_noise(0.05);
    generate(&scene, seed).expect("valid scene").0
}

pub fn sample(id: &str, seed: u64) -> SampleRecord {
    SampleRecord::new(id, recording(2.0, 1000.0, 30, 3, seed), "walk")
}
