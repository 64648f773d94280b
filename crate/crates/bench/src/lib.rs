//! Fixed inputs shared by the benchmarks.

use irisgauge_core::{gen_eye, BinaryMask, EyeSpec, LabelMask};

/// A 320x320 eye with pupil radius 12 and iris radius 40, optionally occluded
/// from the top.
pub fn eye(occlusion: f64) -> LabelMask {
    let mut spec = EyeSpec::centered(12.0, 40.0);
    spec.occlusion_fraction = occlusion;
    spec.boundary_jitter = 0.5;
    gen_eye(&spec).expect("fixture eye").0
}

/// Points on a circle of radius `r` centred at (160, 160).
pub fn circle_points(n: usize, r: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            (160.0 + r * a.cos(), 160.0 + r * a.sin())
        })
        .collect()
}

/// Deterministic speckle mask with roughly half the pixels set.
pub fn speckle(w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| (x * 7919 + y * 104_729) % 13 < 6)
}
