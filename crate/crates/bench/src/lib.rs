//! Fixtures shared by the benchmarks in `benches/`.

use std::f64::consts::PI;

use spherekern::{CoefficientTensor, SpherePoint};

/// Deterministic, roughly uniform points from a low-discrepancy sequence.
pub fn points(n: usize) -> Vec<SpherePoint> {
    spherekern::quadrature::fibonacci_points(n)
}

/// Pseudo-random points in a fixed order, for inputs without structure.
pub fn scattered(n: usize, seed: u64) -> Vec<SpherePoint> {
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| SpherePoint::new((1.0 - 2.0 * next()).acos(), 2.0 * PI * next()).unwrap())
        .collect()
}

/// Isotropic `(1+j)^{-4}` up to `j_max`.
pub fn power_law(j_max: usize) -> CoefficientTensor {
    CoefficientTensor::isotropic((0..=j_max).map(|j| (1.0 + j as f64).powi(-4)).collect()).unwrap()
}

/// Block-diagonal tensor with dense positive blocks.
pub fn dense_blocks(j_max: usize) -> CoefficientTensor {
    let blocks = (0..=j_max)
        .map(|j| {
            let n = 2 * j + 1;
            spherekern::DMatrix::from_fn(n, n, |r, c| {
                let d = r.abs_diff(c) as f64;
                spherekern::Complex64::new((1.0 + j as f64).powi(-3) / (1.0 + d * d), 0.0)
            })
        })
        .collect();
    CoefficientTensor::block_diagonal(blocks).unwrap()
}
