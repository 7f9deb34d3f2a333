//! Legendre polynomials, associated Legendre functions and complex spherical
//! harmonics.
//!
//! Conventions:
//!
//! * `P_{j,k}` carries the Condon–Shortley phase, so `P_{1,1}(cos θ) = -sin θ`.
//! * `Y_j^k(θ, φ) = (2π)^{-1/2} sqrt((2j+1)/2 · (j-k)!/(j+k)!) P_{j,k}(cos θ) e^{ikφ}`,
//!   which is orthonormal on S² with the surface measure.
//! * Harmonics are flattened with `ℓ = j² + j + 1 + k`, so `ℓ = 1` is `(0, 0)`.
//!
//! Internally every recurrence runs on the fully normalized functions
//! `P̄_{j,k} = sqrt((2j+1)/2 · (j-k)!/(j+k)!) P_{j,k}`, which stay O(1) and never
//! touch a factorial.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Largest degree for which the unnormalized `P_{j,k}` is exposed.
pub const MAX_UNNORMALIZED_DEGREE: usize = 150;

/// A point on the unit sphere, kept both as (colatitude, longitude) and as a
/// unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
    xyz: [f64; 3],
}

impl SpherePoint {
    /// Builds a point from colatitude `theta ∈ [0, π]` and longitude `phi`
    /// (any finite value, reduced to `[0, 2π)`). At the poles the longitude is
    /// set to zero.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(domain("point coordinates must be finite"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(domain(format!("colatitude {theta} outside [0, π]")));
        }
        let phi = if theta == 0.0 || theta == PI {
            0.0
        } else {
            reduce_longitude(phi)
        };
        let xyz = if theta == PI {
            [0.0, 0.0, -1.0]
        } else {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            [st * cp, st * sp, ct]
        };
        Ok(Self { theta, phi, xyz })
    }

    /// Builds a point from any nonzero 3-vector, normalizing it.
    pub fn from_xyz(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(domain(
                "cannot place a zero or non-finite vector on the sphere",
            ));
        }
        let xyz = [v[0] / norm, v[1] / norm, v[2] / norm];
        let rho = xyz[0].hypot(xyz[1]);
        let theta = rho.atan2(xyz[2]);
        let phi = if rho == 0.0 {
            0.0
        } else {
            reduce_longitude(xyz[1].atan2(xyz[0]))
        };
        Ok(Self { theta, phi, xyz })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn xyz(&self) -> [f64; 3] {
        self.xyz
    }

    /// The antipodal point `-p`. The Cartesian components are negated exactly.
    pub fn antipode(&self) -> Self {
        let theta = PI - self.theta;
        let phi = if theta == 0.0 || theta == PI {
            0.0
        } else {
            reduce_longitude(self.phi + PI)
        };
        Self {
            theta,
            phi,
            xyz: [-self.xyz[0], -self.xyz[1], -self.xyz[2]],
        }
    }

    /// Euclidean inner product of the two unit vectors, clamped to `[-1, 1]`.
    pub fn dot(&self, other: &Self) -> f64 {
        let d =
            self.xyz[0] * other.xyz[0] + self.xyz[1] * other.xyz[1] + self.xyz[2] * other.xyz[2];
        d.clamp(-1.0, 1.0)
    }

    /// Great-circle distance, computed from the chord for accuracy at small
    /// separations.
    pub fn geodesic_distance(&self, other: &Self) -> f64 {
        let dx = self.xyz[0] - other.xyz[0];
        let dy = self.xyz[1] - other.xyz[1];
        let dz = self.xyz[2] - other.xyz[2];
        let chord = (dx * dx + dy * dy + dz * dz).sqrt();
        2.0 * (0.5 * chord).min(1.0).asin()
    }

    /// `(cos θ, sin θ, e^{iφ})` taken from the Cartesian components.
    fn trig(&self) -> (f64, f64, Complex64) {
        let [x, y, z] = self.xyz;
        let s = x.hypot(y);
        let e = if s == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(x / s, y / s)
        };
        (z, s, e)
    }
}

fn reduce_longitude(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Degree/order pair `(j, k)` with `|k| ≤ j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicIndex {
    j: usize,
    k: isize,
}

impl HarmonicIndex {
    pub fn new(j: usize, k: isize) -> Result<Self> {
        if k.unsigned_abs() > j {
            return Err(domain(format!("order {k} exceeds degree {j}")));
        }
        Ok(Self { j, k })
    }

    /// Inverse of [`HarmonicIndex::flat`]. `flat` must be at least 1.
    pub fn from_flat(flat: usize) -> Result<Self> {
        if flat == 0 {
            return Err(domain("flat harmonic indices start at 1"));
        }
        let mut j = (flat - 1).isqrt();
        // guard against isqrt edge effects
        while (j + 1) * (j + 1) < flat {
            j += 1;
        }
        let k = flat as isize - (j * j + j + 1) as isize;
        Self::new(j, k)
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> isize {
        self.k
    }

    /// `ℓ = j² + j + 1 + k`.
    pub fn flat(&self) -> usize {
        (self.j * self.j + self.j + 1).wrapping_add_signed(self.k)
    }

    /// Zero-based slot of this harmonic in a vector produced by
    /// [`harmonics_upto`].
    pub fn slot(&self) -> usize {
        self.flat() - 1
    }

    /// Laplace–Beltrami eigenvalue `j(j+1)`.
    pub fn eigenvalue(&self) -> f64 {
        degree_eigenvalue(self.j)
    }
}

/// `j(j+1)`.
pub fn degree_eigenvalue(j: usize) -> f64 {
    (j * (j + 1)) as f64
}

/// Number of harmonics with degree at most `j_max`, i.e. `(j_max+1)²`.
pub fn harmonic_count(j_max: usize) -> usize {
    (j_max + 1) * (j_max + 1)
}

fn check_unit_interval(t: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(domain(format!("argument {t} outside [-1, 1]")));
    }
    Ok(())
}

#[inline]
fn recurrence_coeff(j: usize, k: usize) -> f64 {
    let (jf, kf) = (j as f64, k as f64);
    ((4.0 * jf * jf - 1.0) / (jf * jf - kf * kf)).sqrt()
}

/// Fully normalized `P̄_{k,k}(cos θ)` from `sin θ`.
fn normalized_sectoral(k: usize, s: f64) -> f64 {
    let mut p = std::f64::consts::FRAC_1_SQRT_2;
    for i in 1..=k {
        let fi = i as f64;
        p *= -((2.0 * fi + 1.0) / (2.0 * fi)).sqrt() * s;
    }
    p
}

/// Fully normalized `P̄_{j,k}(t)` by upward recurrence in `j` at fixed `k`.
fn normalized_assoc_legendre(j: usize, k: usize, t: f64) -> f64 {
    let s = ((1.0 - t) * (1.0 + t)).max(0.0).sqrt();
    let mut prev = normalized_sectoral(k, s);
    if j == k {
        return prev;
    }
    let mut cur = (2.0 * k as f64 + 3.0).sqrt() * t * prev;
    for n in k + 2..=j {
        let a = recurrence_coeff(n, k);
        let a_prev = recurrence_coeff(n - 1, k);
        let next = a * (t * cur - prev / a_prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln((j+k)!/(j-k)!)` as an exact-term sum.
fn ln_factorial_ratio(j: usize, k: usize) -> f64 {
    (j - k + 1..=j + k).map(|i| (i as f64).ln()).sum()
}

/// Associated Legendre function `P_{j,k}(t)` with Condon–Shortley phase.
///
/// Only exposed for `j ≤ 150`; above that the unnormalized values leave the
/// range of `f64`.
pub fn assoc_legendre(j: usize, k: usize, t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    if k > j {
        return Err(domain(format!("order {k} exceeds degree {j}")));
    }
    if j > MAX_UNNORMALIZED_DEGREE {
        return Err(domain(format!(
            "unnormalized P_(j,k) is only available for j ≤ {MAX_UNNORMALIZED_DEGREE}"
        )));
    }
    let pbar = normalized_assoc_legendre(j, k, t);
    // P = P̄ / sqrt((2j+1)/2 · (j-k)!/(j+k)!)
    let ln_scale = 0.5 * (ln_factorial_ratio(j, k) - ((2 * j + 1) as f64 / 2.0).ln());
    Ok(pbar * ln_scale.exp())
}

/// Complex spherical harmonic `Y_j^k(p)`.
pub fn spherical_harmonic(idx: HarmonicIndex, p: &SpherePoint) -> Complex64 {
    let (t, _, e) = p.trig();
    let m = idx.k.unsigned_abs();
    let pbar = normalized_assoc_legendre(idx.j, m, t);
    let y = e.powu(m as u32) * (pbar / (2.0 * PI).sqrt());
    if idx.k >= 0 {
        y
    } else if m.is_multiple_of(2) {
        y.conj()
    } else {
        -y.conj()
    }
}

/// All harmonics of degree `≤ j_max` at `p`, in flat order (`slot = ℓ - 1`).
pub fn harmonics_upto(j_max: usize, p: &SpherePoint) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); harmonic_count(j_max)];
    fill_harmonics(j_max, p, &mut out);
    out
}

/// Writes the harmonics of degree `≤ j_max` into `out[..(j_max+1)²]`.
pub fn fill_harmonics(j_max: usize, p: &SpherePoint, out: &mut [Complex64]) {
    let (t, s, e) = p.trig();
    let norm = 1.0 / (2.0 * PI).sqrt();
    let mut sectoral = std::f64::consts::FRAC_1_SQRT_2;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..=j_max {
        if k > 0 {
            let fk = k as f64;
            sectoral *= -((2.0 * fk + 1.0) / (2.0 * fk)).sqrt() * s;
            phase *= e;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut store = |j: usize, pbar: f64| {
            let y = phase * (pbar * norm);
            let base = j * j + j;
            out[base + k] = y;
            if k > 0 {
                out[base - k] = y.conj() * sign;
            }
        };
        let mut prev = sectoral;
        store(k, prev);
        if k == j_max {
            continue;
        }
        let mut cur = (2.0 * k as f64 + 3.0).sqrt() * t * prev;
        store(k + 1, cur);
        for n in k + 2..=j_max {
            let next = recurrence_coeff(n, k) * (t * cur - prev / recurrence_coeff(n - 1, k));
            prev = cur;
            cur = next;
            store(n, cur);
        }
    }
}

/// Legendre polynomial `P_j(t)`.
pub fn legendre(j: usize, t: f64) -> Result<f64> {
    check_unit_interval(t)?;
    Ok(legendre_unchecked(j, t))
}

pub(crate) fn legendre_unchecked(j: usize, t: f64) -> f64 {
    let mut prev = 1.0;
    if j == 0 {
        return prev;
    }
    let mut cur = t;
    for n in 1..j {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * t * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Leading large-degree term `sqrt(2/(π j sin θ)) cos((j+½)θ − π/4)`.
pub fn legendre_asymptotic(j: usize, theta: f64) -> Result<f64> {
    if j == 0 {
        return Err(domain("asymptotic form needs j ≥ 1"));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(domain(format!(
            "colatitude {theta} must lie strictly inside (0, π)"
        )));
    }
    let jf = j as f64;
    Ok((2.0 / (PI * jf * theta.sin())).sqrt() * ((jf + 0.5) * theta - PI / 4.0).cos())
}

/// `|P_j(p·q) − 4π/(2j+1) Σ_k Y_j^k(q) conj(Y_j^k(p))|`.
pub fn addition_theorem_gap(j: usize, p: &SpherePoint, q: &SpherePoint) -> f64 {
    let lhs = legendre_unchecked(j, p.dot(q));
    let jj = j as isize;
    let sum: Complex64 = (-jj..=jj)
        .map(|k| {
            let idx = HarmonicIndex { j, k };
            spherical_harmonic(idx, q) * spherical_harmonic(idx, p).conj()
        })
        .sum();
    let rhs = sum * (4.0 * PI / (2 * j + 1) as f64);
    (Complex64::new(lhs, 0.0) - rhs).norm()
}
