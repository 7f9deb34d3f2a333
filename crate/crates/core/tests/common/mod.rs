#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spherekern::linalg::CMatrix;
use spherekern::{Complex64, SpherePoint};

pub fn z(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Uniform on the sphere.
pub fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
    let t: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    SpherePoint::new(t.acos(), phi).unwrap()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<SpherePoint> {
    (0..n).map(|_| random_point(rng)).collect()
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    z(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// `M M^H` with `M` of width `rank`: PSD of rank at most `rank`.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMatrix {
    let m = random_matrix(rng, n, rank);
    let p = &m * m.adjoint();
    (&p + p.adjoint()) * z(0.5, 0.0)
}

/// PSD block shifted down so that at least one eigenvalue is clearly negative.
pub fn random_indefinite(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let p = random_psd(rng, n, n);
    let shift = p.trace().re / n as f64;
    &p - CMatrix::identity(n, n) * z(shift * 1.01 + 0.1, 0.0)
}
