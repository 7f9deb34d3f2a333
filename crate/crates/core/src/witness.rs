//! Finite point sets on which a kernel's quadratic form fails to be positive.
//!
//! A witness is a set of distinct points `ξ` with complex weights `c_ξ` such
//! that `Q = Σ_{ξ,ζ} c_ξ conj(c_ζ) K(ξ,ζ)` is zero (degeneracy: the kernel is
//! not strictly positive definite) or negative (the kernel is not positive
//! definite at all).
//!
//! All quadratic forms are evaluated from the explicit coefficients; call
//! [`CoefficientTensor::expand_tail`] first to include more of a tail.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::harmonics::{fill_harmonics, harmonic_count, HarmonicIndex, SpherePoint};
use crate::kernels::{eval_kernel, BandLimitedFunction, CoefficientTensor, Variant};
use crate::linalg::{smallest_right_singular, CMatrix};
use crate::quadrature::sphere_rule;

/// Points closer than this (geodesically) count as duplicates.
pub const DISTINCT_TOL: f64 = 1e-9;

/// Above this many points, quadratic forms are computed in coefficient space.
const POINTWISE_LIMIT: usize = 4096;

const HEMISPHERE_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeParity {
    Even,
    Odd,
}

impl DegreeParity {
    pub fn of(j: usize) -> Self {
        if j.is_multiple_of(2) {
            DegreeParity::Even
        } else {
            DegreeParity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// `{ξ, −ξ}` with weights `(1, −1)`: annihilates every even degree.
    AntipodalOddCoeffs,
    /// `{ξ, −ξ}` with weights `(1, 1)`: annihilates every odd degree.
    AntipodalEvenCoeffs,
    /// Antipodally symmetric point set whose weights annihilate all
    /// harmonics of one parity up to a finite degree.
    HemisphereNullspace,
    /// Quadrature discretization of a function whose coefficients give a
    /// negative quadratic form.
    QuadratureDiscretization,
}

impl WitnessKind {
    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::AntipodalOddCoeffs => "antipodal_odd_coeffs",
            WitnessKind::AntipodalEvenCoeffs => "antipodal_even_coeffs",
            WitnessKind::HemisphereNullspace => "hemisphere_nullspace",
            WitnessKind::QuadratureDiscretization => "quadrature_discretization",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub points: Vec<SpherePoint>,
    /// Weights normalized to `max |c_ξ| = 1`.
    pub coeffs: Vec<Complex64>,
    pub quad_form: f64,
    /// `‖c‖₁² · max |K(ξ,ζ)|`, the natural size of the quadratic form.
    pub scale: f64,
    pub kind: WitnessKind,
}

impl Witness {
    /// Recomputes the quadratic form from scratch and checks the stored value.
    pub fn validate(&self, t: &CoefficientTensor) -> Result<()> {
        let q = quadratic_form(t, &self.points, &self.coeffs)?;
        let tol = 1e-10 * q.scale.max(self.scale).max(f64::MIN_POSITIVE);
        if (q.value - self.quad_form).abs() > tol {
            return Err(Error::Residual {
                residual: (q.value - self.quad_form).abs(),
                bound: tol,
            });
        }
        Ok(())
    }
}

/// Value of a quadratic form together with its size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForm {
    pub value: f64,
    /// Imaginary part, zero up to roundoff for a Hermitian kernel.
    pub imag: f64,
    pub scale: f64,
}

/// Returns the first pair of points closer than [`DISTINCT_TOL`].
pub fn find_duplicate(points: &[SpherePoint]) -> Option<(usize, usize)> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].geodesic_distance(&points[j]) <= DISTINCT_TOL {
                return Some((i, j));
            }
        }
    }
    None
}

/// `Σ_{ξ,ζ} c_ξ conj(c_ζ) K(ξ,ζ)` evaluated pointwise.
pub fn quadratic_form(
    t: &CoefficientTensor,
    points: &[SpherePoint],
    coeffs: &[Complex64],
) -> Result<QuadForm> {
    if points.len() != coeffs.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            values: coeffs.len(),
        });
    }
    if let Some((i, j)) = find_duplicate(points) {
        return Err(Error::DuplicatePoints(i, j));
    }
    Ok(pointwise_form(t, points, coeffs))
}

fn pointwise_form(t: &CoefficientTensor, points: &[SpherePoint], coeffs: &[Complex64]) -> QuadForm {
    let n = points.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut kmax = 0.0f64;
    if matches!(t.variant(), Variant::Isotropic { .. }) {
        for i in 0..n {
            for j in 0..n {
                let k = eval_kernel(t, &points[i], &points[j]);
                kmax = kmax.max(k.norm());
                total += coeffs[i] * coeffs[j].conj() * k;
            }
        }
    } else {
        let feats: Vec<Vec<Complex64>> = points.iter().map(|p| t.features(p)).collect();
        let contracted: Vec<Vec<Complex64>> = feats.iter().map(|f| t.contract(f)).collect();
        for i in 0..n {
            for j in 0..n {
                let k: Complex64 = contracted[i]
                    .iter()
                    .zip(&feats[j])
                    .map(|(a, b)| a * b.conj())
                    .sum();
                kmax = kmax.max(k.norm());
                total += coeffs[i] * coeffs[j].conj() * k;
            }
        }
    }
    let l1: f64 = coeffs.iter().map(|c| c.norm()).sum();
    QuadForm {
        value: total.re,
        imag: total.im,
        scale: l1 * l1 * kmax,
    }
}

/// The same form through `y = Σ_ξ c_ξ F(ξ)`: `Σ α_{ℓ,ℓ'} y_ℓ conj(y_ℓ')`.
/// Linear in the number of points.
pub fn quadratic_form_coefficients(
    t: &CoefficientTensor,
    points: &[SpherePoint],
    coeffs: &[Complex64],
) -> Result<f64> {
    if points.len() != coeffs.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            values: coeffs.len(),
        });
    }
    let y = feature_sum(t, points, coeffs);
    Ok(t.bilinear(&y, &y).re)
}

fn feature_sum(
    t: &CoefficientTensor,
    points: &[SpherePoint],
    coeffs: &[Complex64],
) -> Vec<Complex64> {
    let len = t.feature_len();
    let mut y = vec![Complex64::new(0.0, 0.0); len];
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (p, c) in points.iter().zip(coeffs) {
        fill_harmonics(t.j_max(), p, &mut buf);
        for (acc, f) in y.iter_mut().zip(&buf) {
            *acc += c * f;
        }
    }
    y
}

fn normalize(coeffs: &mut [Complex64]) -> f64 {
    let m = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if m > 0.0 {
        for c in coeffs.iter_mut() {
            *c /= m;
        }
    }
    m
}

fn entries_have_parity(t: &CoefficientTensor, parity: DegreeParity) -> bool {
    t.entries()
        .iter()
        .all(|e| DegreeParity::of(e.row.j()) == parity && DegreeParity::of(e.col.j()) == parity)
}

/// Two-point witness for kernels supported on a single parity.
///
/// `support` is the parity of every nonzero degree (explicit and tail). For
/// even support the weights `(1, −1)` on `{ξ, −ξ}` annihilate every
/// harmonic; for odd support `(1, 1)` does.
pub fn antipodal_witness(t: &CoefficientTensor, support: DegreeParity) -> Result<Witness> {
    let other = match support {
        DegreeParity::Even => DegreeParity::Odd,
        DegreeParity::Odd => DegreeParity::Even,
    };
    if !entries_have_parity(t, support) {
        return Err(Error::Precondition(format!(
            "antipodal witness needs every coefficient at {support:?} degrees"
        )));
    }
    if t.tail()
        .is_some_and(|tl| tl.covers_infinitely(other == DegreeParity::Odd))
    {
        return Err(Error::Precondition(format!(
            "tail populates {other:?} degrees"
        )));
    }
    let p = SpherePoint::new(1.0, 0.5)?;
    let points = vec![p, p.antipode()];
    let (coeffs, kind) = match support {
        DegreeParity::Even => (
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            WitnessKind::AntipodalOddCoeffs,
        ),
        DegreeParity::Odd => (
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            WitnessKind::AntipodalEvenCoeffs,
        ),
    };
    finish(t, points, coeffs, kind, 1e-10)
}

fn finish(
    t: &CoefficientTensor,
    points: Vec<SpherePoint>,
    coeffs: Vec<Complex64>,
    kind: WitnessKind,
    rel_tol: f64,
) -> Result<Witness> {
    let q = quadratic_form(t, &points, &coeffs)?;
    if q.value.abs() > rel_tol * q.scale {
        return Err(Error::NoConvergence(format!(
            "{} construction left quadratic form {} (scale {})",
            kind.name(),
            q.value,
            q.scale
        )));
    }
    Ok(Witness {
        points,
        coeffs,
        quad_form: q.value,
        scale: q.scale,
        kind,
    })
}

/// Number of hemisphere points used for a given `ĵ` and parity: one more
/// than the number of annihilated harmonics, and never fewer than
/// `⌈ĵ²/2 + 3ĵ/2⌉ + 2`.
pub fn hemisphere_point_count(j_hat: usize, parity: DegreeParity) -> usize {
    let rows = annihilated_rows(j_hat, parity).len();
    let jh = j_hat as f64;
    let floor = (jh * jh / 2.0 + 1.5 * jh).ceil() as usize + 2;
    floor.max(rows + 1)
}

fn annihilated_rows(j_hat: usize, parity: DegreeParity) -> Vec<HarmonicIndex> {
    (0..=j_hat)
        .filter(|&j| DegreeParity::of(j) == parity)
        .flat_map(|j| {
            let jj = j as isize;
            (-jj..=jj).map(move |k| HarmonicIndex::new(j, k).unwrap())
        })
        .collect()
}

fn lower_hemisphere_point(rng: &mut impl Rng) -> SpherePoint {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r < 1e-12 {
            continue;
        }
        let z = -(v[2] / r).abs();
        if z.abs() <= 1e-3 {
            continue;
        }
        if let Ok(p) = SpherePoint::from_xyz([v[0] / r, v[1] / r, z]) {
            return p;
        }
    }
}

/// Witness for kernels whose `parity` degrees stop at `j_hat`.
///
/// Points are drawn in the open lower hemisphere and given weights in the
/// null space of `[Y_j^k(ξ)]` over all `j ≤ j_hat` of the given parity. The
/// points are then mirrored to the upper hemisphere with weights chosen so
/// that every harmonic of the opposite parity cancels as well: `c_{−ξ} = c_ξ`
/// for even `parity`, `c_{−ξ} = −c_ξ` for odd.
pub fn hemisphere_nullspace_witness(
    t: &CoefficientTensor,
    j_hat: usize,
    parity: DegreeParity,
    rng: &mut impl Rng,
) -> Result<Witness> {
    if let Some(e) = t.entries().iter().find(|e| {
        (DegreeParity::of(e.row.j()) == parity && e.row.j() > j_hat)
            || (DegreeParity::of(e.col.j()) == parity && e.col.j() > j_hat)
    }) {
        return Err(Error::Precondition(format!(
            "coefficient at degrees ({}, {}) exceeds j_hat = {j_hat} for {parity:?} degrees",
            e.row.j(),
            e.col.j()
        )));
    }
    if t.tail()
        .is_some_and(|tl| tl.covers_infinitely(parity == DegreeParity::Odd))
    {
        return Err(Error::Precondition(format!(
            "tail populates infinitely many {parity:?} degrees"
        )));
    }
    let rows = annihilated_rows(j_hat, parity);
    let n = hemisphere_point_count(j_hat, parity);
    let mirror_sign = match parity {
        DegreeParity::Even => 1.0,
        DegreeParity::Odd => -1.0,
    };

    let mut last_err = None;
    for _ in 0..HEMISPHERE_ATTEMPTS {
        let half: Vec<SpherePoint> = (0..n).map(|_| lower_hemisphere_point(rng)).collect();
        if find_duplicate(&half).is_some() {
            continue;
        }
        let tables: Vec<Vec<Complex64>> = half
            .iter()
            .map(|p| {
                let mut buf = vec![Complex64::new(0.0, 0.0); harmonic_count(j_hat)];
                fill_harmonics(j_hat, p, &mut buf);
                buf
            })
            .collect();
        let m = CMatrix::from_fn(rows.len(), n, |r, i| tables[i][rows[r].slot()]);
        let (v, _) = smallest_right_singular(&m);
        let mut c: Vec<Complex64> = v.iter().copied().collect();
        normalize(&mut c);
        let residual = (&m * CMatrix::from_column_slice(n, 1, &c)).norm();
        let m_norm = m.norm().max(1.0);
        if residual > 1e-9 * m_norm {
            last_err = Some(Error::Residual {
                residual,
                bound: 1e-9 * m_norm,
            });
            continue;
        }
        let mut points = half.clone();
        points.extend(half.iter().map(SpherePoint::antipode));
        let mut coeffs = c.clone();
        coeffs.extend(c.iter().map(|z| z * mirror_sign));
        match finish(t, points, coeffs, WitnessKind::HemisphereNullspace, 1e-8) {
            Ok(w) => return Ok(w),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        Error::NoConvergence("hemisphere sampling kept producing duplicate points".into())
    }))
}

/// `Σ α_{ℓ,ℓ'} ŷ_ℓ conj(ŷ_ℓ')` with `ŷ_ℓ = ∫ f F_ℓ`: the quadratic form of
/// the continuous weight `f`.
pub fn continuous_form(t: &CoefficientTensor, f: &BandLimitedFunction) -> f64 {
    let mut y = f.paired_coefficients();
    y.resize(t.feature_len(), Complex64::new(0.0, 0.0));
    t.bilinear(&y, &y).re
}

/// Result of discretizing a negative direction.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub witness: Witness,
    /// Quadrature resolution that produced the witness.
    pub resolution: usize,
    /// Quadratic form of the raw weights `w_ξ f(ξ)` before normalization;
    /// approximates [`continuous_form`].
    pub raw_quad_form: f64,
    pub continuous_form: f64,
}

/// Raw weights `c_ξ = w_ξ f(ξ)` on the product rule of resolution `m`, and
/// their quadratic form.
pub fn discretize(
    t: &CoefficientTensor,
    f: &BandLimitedFunction,
    m: usize,
) -> Result<(Vec<SpherePoint>, Vec<Complex64>, f64)> {
    let rule = sphere_rule(m)?;
    let points = rule.points().to_vec();
    let coeffs: Vec<Complex64> = points
        .iter()
        .zip(rule.weights())
        .map(|(p, w)| f.evaluate(p) * *w)
        .collect();
    let value = if points.len() > POINTWISE_LIMIT {
        quadratic_form_coefficients(t, &points, &coeffs)?
    } else {
        pointwise_form(t, &points, &coeffs).value
    };
    Ok((points, coeffs, value))
}

/// Finite witness of a negative quadratic form.
///
/// Requires `continuous_form(t, f)` to be negative beyond roundoff. Quadrature resolutions `m, 2m, …`
/// up to 256 are tried until the discretized form is negative.
pub fn discretize_negative_direction(
    t: &CoefficientTensor,
    f: &BandLimitedFunction,
    m: usize,
) -> Result<Discretization> {
    let cont = continuous_form(t, f);
    let y_norm_sq: f64 = f
        .paired_coefficients()
        .iter()
        .take(t.feature_len())
        .map(|y| y.norm_sqr())
        .sum();
    let floor = 1e-12 * t.max_abs_coefficient() * t.feature_len() as f64 * y_norm_sq;
    if cont.is_nan() || cont >= -floor {
        return Err(Error::Precondition(format!(
            "the direction is not negative: continuous quadratic form is {cont}"
        )));
    }
    let mut res = m.max(1);
    while res <= 256 {
        let (points, mut coeffs, raw) = discretize(t, f, res)?;
        if raw < 0.0 {
            let factor = normalize(&mut coeffs);
            let quad_form = raw / (factor * factor);
            let kmax =
                t.max_abs_coefficient() * t.feature_len() as f64 / (4.0 * std::f64::consts::PI);
            let l1: f64 = coeffs.iter().map(|c| c.norm()).sum();
            let scale = if points.len() > POINTWISE_LIMIT {
                l1 * l1 * kmax
            } else {
                pointwise_form(t, &points, &coeffs).scale
            };
            return Ok(Discretization {
                witness: Witness {
                    points,
                    coeffs,
                    quad_form,
                    scale,
                    kind: WitnessKind::QuadratureDiscretization,
                },
                resolution: res,
                raw_quad_form: raw,
                continuous_form: cont,
            });
        }
        res *= 2;
    }
    Err(Error::NoConvergence(format!(
        "no resolution up to 256 reproduced the negative form {cont}"
    )))
}

/// Witness for a certified negative block: the eigenvector `v` of `D_j`
/// with negative eigenvalue, turned into a band-limited weight and
/// discretized.
pub fn block_negative_witness(
    t: &CoefficientTensor,
    j: usize,
    direction: &crate::linalg::CVector,
    m: usize,
) -> Result<Discretization> {
    if direction.len() != 2 * j + 1 {
        return Err(Error::Domain(format!(
            "direction of length {} does not fit degree {j}",
            direction.len()
        )));
    }
    let expanded;
    let t = if j > t.j_max() {
        expanded = t.expand_tail(j)?;
        &expanded
    } else {
        t
    };
    let mut y = vec![Complex64::new(0.0, 0.0); harmonic_count(j)];
    // the form u^H D u corresponds to coefficient direction y = conj(u)
    for (i, v) in direction.iter().enumerate() {
        y[j * j + i] = v.conj();
    }
    let f = BandLimitedFunction::from_direction(&y)?;
    discretize_negative_direction(t, &f, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Tail, TailFamily, TailParity};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn iso(c: &[f64]) -> CoefficientTensor {
        CoefficientTensor::isotropic(c.to_vec()).unwrap()
    }

    #[test]
    fn antipodal_cases() {
        let even = iso(&[1.0, 0.0, 0.5, 0.0, 0.25]);
        let w = antipodal_witness(&even, DegreeParity::Even).unwrap();
        assert_eq!(w.kind, WitnessKind::AntipodalOddCoeffs);
        assert!(w.quad_form.abs() <= 1e-10 * w.scale);
        w.validate(&even).unwrap();

        let odd = iso(&[0.0, 1.0, 0.0, 2.0]);
        let w = antipodal_witness(&odd, DegreeParity::Odd).unwrap();
        assert!(w.quad_form.abs() <= 1e-10 * w.scale);

        assert!(matches!(
            antipodal_witness(&odd, DegreeParity::Even),
            Err(Error::Precondition(_))
        ));
        let tailed = even
            .clone()
            .with_tail(Tail::new(
                TailFamily::Geometric {
                    scale: 1.0,
                    ratio: 0.5,
                },
                TailParity::Odd,
            ))
            .unwrap();
        assert!(antipodal_witness(&tailed, DegreeParity::Even).is_err());
    }

    #[test]
    fn hemisphere_sizes() {
        assert_eq!(hemisphere_point_count(1, DegreeParity::Odd), 4);
        assert_eq!(hemisphere_point_count(3, DegreeParity::Even), 11);
        assert_eq!(annihilated_rows(1, DegreeParity::Odd).len(), 3);
        assert_eq!(annihilated_rows(2, DegreeParity::Even).len(), 6);
        for j in 0..12 {
            let parity = DegreeParity::of(j);
            assert_eq!(
                hemisphere_point_count(j, parity),
                annihilated_rows(j, parity).len() + 1
            );
        }
    }

    #[test]
    fn hemisphere_witness_finite_odd() {
        // odd degrees stop at 3; even degrees continue through the tail
        let t = iso(&[1.0, 1.0, 1.0, 1.0])
            .with_tail(Tail::new(
                TailFamily::PowerLaw {
                    scale: 1.0,
                    exponent: 3.0,
                },
                TailParity::Even,
            ))
            .unwrap()
            .expand_tail(12)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = hemisphere_nullspace_witness(&t, 3, DegreeParity::Odd, &mut rng).unwrap();
        assert!(w.quad_form.abs() <= 1e-8 * w.scale);
        assert_eq!(
            w.points.len(),
            2 * hemisphere_point_count(3, DegreeParity::Odd)
        );
        assert!(w.points[..w.points.len() / 2]
            .iter()
            .all(|p| p.xyz()[2] < 0.0));
    }

    #[test]
    fn negative_direction_is_discretized() {
        let t = iso(&[1.0, -1.0]);
        let y = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let f = BandLimitedFunction::from_direction(&y).unwrap();
        assert!((continuous_form(&t, &f) + 1.0).abs() < 1e-14);
        let d = discretize_negative_direction(&t, &f, 4).unwrap();
        assert!(d.witness.quad_form < 0.0);
        assert!((d.raw_quad_form + 1.0).abs() < 1e-12);
        d.witness.validate(&t).unwrap();
        assert!(matches!(
            discretize_negative_direction(&iso(&[1.0, 1.0]), &f, 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn coefficient_and_pointwise_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = iso(&[1.0, 0.5, -0.25]);
        let points: Vec<SpherePoint> = (0..7).map(|_| lower_hemisphere_point(&mut rng)).collect();
        let coeffs: Vec<Complex64> = (0..7)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let a = quadratic_form(&t, &points, &coeffs).unwrap();
        let b = quadratic_form_coefficients(&t, &points, &coeffs).unwrap();
        assert!((a.value - b).abs() < 1e-12 * a.scale.max(1.0));
        assert!(a.imag.abs() < 1e-12 * a.scale.max(1.0));
    }

    #[test]
    fn duplicates_and_lengths_rejected() {
        let t = iso(&[1.0]);
        let p = SpherePoint::new(0.3, 0.2).unwrap();
        let one = Complex64::new(1.0, 0.0);
        assert!(matches!(
            quadratic_form(&t, &[p, p], &[one, one]),
            Err(Error::DuplicatePoints(0, 1))
        ));
        assert!(matches!(
            quadratic_form(&t, &[p], &[one, one]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
