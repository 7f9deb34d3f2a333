mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spherekern::certify::{certify, BlockStatus, Justification, ParityCase, Verdict, DEFAULT_TOL};
use spherekern::harmonics::{spherical_harmonic, HarmonicIndex};
use spherekern::interpolate::gram;
use spherekern::kernels::{
    eval_kernel, BandLimitedFunction, CoefficientTensor, Tail, TailFamily, TailParity,
};
use spherekern::linalg::{hermitian_eigen, max_abs, CMatrix};
use spherekern::witness::{
    antipodal_witness, block_negative_witness, continuous_form, discretize,
    discretize_negative_direction, hemisphere_nullspace_witness, quadratic_form,
    quadratic_form_coefficients, DegreeParity, WitnessKind,
};
use spherekern::{Complex64, Error, SpherePoint};

fn random_block_tensor(rng: &mut ChaCha8Rng, indefinite_prob: f64) -> CoefficientTensor {
    let j_max = rng.random_range(0..=8);
    let blocks = (0..=j_max)
        .map(|j| {
            let n = 2 * j + 1;
            if rng.random_bool(indefinite_prob) {
                random_indefinite(rng, n)
            } else {
                let rank = rng.random_range(0..=n);
                random_psd(rng, n, rank)
            }
        })
        .collect();
    CoefficientTensor::block_diagonal(blocks).unwrap()
}

fn gram_min_relative(t: &CoefficientTensor, pts: &[SpherePoint]) -> f64 {
    let g = gram(t, pts).unwrap();
    let scale = max_abs(&g) * pts.len() as f64;
    hermitian_eigen(&g).min() / scale.max(f64::MIN_POSITIVE)
}

#[test]
fn verdicts_agree_with_gram_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut refuted, mut accepted) = (0, 0);
    for _ in 0..40 {
        let t = random_block_tensor(&mut rng, 0.08);
        let cert = certify(&t, t.j_max(), DEFAULT_TOL).unwrap();
        if cert.verdict == Verdict::NotPositiveDefinite {
            refuted += 1;
            let b = cert.indefinite_block().unwrap();
            let v = b.negative_direction.as_ref().unwrap();
            let d = block_negative_witness(&t, b.j, v, 9).unwrap();
            assert!(d.witness.quad_form < 0.0);
            let rel = gram_min_relative(&t, &d.witness.points);
            assert!(
                rel < -1e-9,
                "Gram of the witness points should be indefinite: {rel}"
            );
        } else {
            accepted += 1;
            for _ in 0..5 {
                let n = rng.random_range(1..=40);
                let pts = random_points(&mut rng, n);
                assert!(gram_min_relative(&t, &pts) >= -1e-9);
            }
        }
    }
    assert!(
        refuted > 5 && accepted > 5,
        "refuted {refuted}, accepted {accepted}"
    );
}

#[test]
fn psd_tensors_admit_no_negative_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..10 {
        let t = random_block_tensor(&mut rng, 0.0);
        for j in 0..=t.j_max() {
            let eig = hermitian_eigen(&t.block(j).unwrap());
            let v = eig.vector(0);
            assert!(matches!(
                block_negative_witness(&t, j, &v, 8),
                Err(Error::Precondition(_))
            ));
        }
    }
}

#[test]
fn strict_certificates_give_nonsingular_grams() {
    let c: Vec<f64> = (0..=12).map(|j| (1.0 + j as f64).powi(-4)).collect();
    let tail = Tail::new(
        TailFamily::PowerLaw {
            scale: 1.0,
            exponent: 4.0,
        },
        TailParity::Both,
    );
    let t = CoefficientTensor::isotropic(c)
        .unwrap()
        .with_tail(tail)
        .unwrap();
    assert_eq!(
        certify(&t, 40, DEFAULT_TOL).unwrap().verdict,
        Verdict::StrictlyPositiveDefinite
    );
    let explicit = t.expand_tail(60).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..10 {
        let pts = random_points(&mut rng, 30);
        assert!(hermitian_eigen(&gram(&explicit, &pts).unwrap()).min() > 0.0);
    }
}

#[test]
fn full_restriction_matches_block_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let blocks: Vec<CMatrix> = (0..=3)
        .map(|j| random_psd(&mut rng, 2 * j + 1, 2))
        .collect();
    let bd = CoefficientTensor::block_diagonal(blocks.clone()).unwrap();
    let mut a = CMatrix::zeros(16, 16);
    for (j, b) in blocks.iter().enumerate() {
        a.view_mut((j * j, j * j), (2 * j + 1, 2 * j + 1))
            .copy_from(b);
    }
    let full = CoefficientTensor::full(a).unwrap();
    assert!(full.is_degree_diagonal());
    for j in 0..=3 {
        assert_eq!(full.block(j).unwrap(), bd.block(j).unwrap());
    }
    let (cf, cb) = (
        certify(&full, 3, DEFAULT_TOL).unwrap(),
        certify(&bd, 3, DEFAULT_TOL).unwrap(),
    );
    assert_eq!(cf.verdict, cb.verdict);
    assert!(cf.coupling.is_none());
}

#[test]
fn even_only_blocks_are_case_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let blocks: Vec<CMatrix> = (0..=4)
        .map(|j| {
            if j % 2 == 0 {
                random_psd(&mut rng, 2 * j + 1, 2 * j + 1)
            } else {
                CMatrix::zeros(2 * j + 1, 2 * j + 1)
            }
        })
        .collect();
    let t = CoefficientTensor::block_diagonal(blocks).unwrap();
    let cert = certify(&t, 4, DEFAULT_TOL).unwrap();
    assert_eq!(cert.verdict, Verdict::PositiveDefiniteOnly);
    assert_eq!(
        cert.justification,
        Justification::Parity(ParityCase::EvenOnly)
    );
    assert!(cert
        .per_block
        .iter()
        .filter(|b| b.j % 2 == 1)
        .all(|b| b.status == BlockStatus::Zero));
    let w = antipodal_witness(&t, DegreeParity::Even).unwrap();
    assert!(w.quad_form.abs() <= 1e-10 * w.scale);
}

#[test]
fn antipodal_examples() {
    let even = CoefficientTensor::isotropic(vec![1.0, 0.0, 2.0]).unwrap();
    let w = antipodal_witness(&even, DegreeParity::Even).unwrap();
    assert_eq!(w.kind, WitnessKind::AntipodalOddCoeffs);
    assert_eq!(w.coeffs, vec![z(1.0, 0.0), z(-1.0, 0.0)]);
    assert!(w.quad_form.abs() < 1e-12);

    let odd = CoefficientTensor::isotropic(vec![0.0, 1.0, 0.0, 3.0]).unwrap();
    let w = antipodal_witness(&odd, DegreeParity::Odd).unwrap();
    assert_eq!(w.kind, WitnessKind::AntipodalEvenCoeffs);
    assert!(w.quad_form.abs() < 1e-12);

    // the wrong construction is not a witness: 4 K(p,p) > 0
    let p = w.points[0];
    let q = quadratic_form(&even, &[p, p.antipode()], &[z(1.0, 0.0), z(1.0, 0.0)]).unwrap();
    let kpp = eval_kernel(&even, &p, &p).re;
    assert!((q.value - 4.0 * kpp).abs() < 1e-12 && kpp > 0.0);

    // and it never fires on strictly certified kernels
    let c: Vec<f64> = (0..=10).map(|j| (1.0 + j as f64).powi(-4)).collect();
    let strict = CoefficientTensor::isotropic(c).unwrap();
    for coeffs in [[z(1.0, 0.0), z(-1.0, 0.0)], [z(1.0, 0.0), z(1.0, 0.0)]] {
        assert!(
            quadratic_form(&strict, &[p, p.antipode()], &coeffs)
                .unwrap()
                .value
                > 0.0
        );
    }
}

#[test]
fn quadratic_form_examples() {
    let t = CoefficientTensor::isotropic(vec![4.0 * std::f64::consts::PI]).unwrap();
    let p = SpherePoint::new(1.0, 2.0).unwrap();
    assert!((quadratic_form(&t, &[p], &[z(1.0, 0.0)]).unwrap().value - 1.0).abs() < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let pts = random_points(&mut rng, 5);
    let t = random_block_tensor(&mut rng, 0.5);
    assert_eq!(
        quadratic_form(&t, &pts, &[z(0.0, 0.0); 5]).unwrap().value,
        0.0
    );
}

#[test]
fn hemisphere_even_example() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let blocks = vec![
        CMatrix::identity(1, 1) * z(2.0, 0.0),
        random_psd(&mut rng, 3, 3),
        CMatrix::identity(5, 5) * z(0.5, 0.0),
        random_psd(&mut rng, 7, 4),
    ];
    let t = CoefficientTensor::block_diagonal(blocks)
        .unwrap()
        .with_tail(Tail::new(
            TailFamily::Geometric {
                scale: 1.0,
                ratio: 0.5,
            },
            TailParity::Odd,
        ))
        .unwrap();
    let cert = certify(&t, 9, DEFAULT_TOL).unwrap();
    assert_eq!(
        cert.justification,
        Justification::Parity(ParityCase::FinitelyManyEven)
    );

    let explicit = t.expand_tail(9).unwrap();
    let w = hemisphere_nullspace_witness(&explicit, 2, DegreeParity::Even, &mut rng).unwrap();
    assert_eq!(w.points.len(), 14);
    assert!(w.coeffs.iter().any(|c| c.norm() > 0.5));
    assert!(w.quad_form.abs() <= 1e-8 * w.scale);
    let half = &w.points[..7];
    let y21: Complex64 = half
        .iter()
        .zip(&w.coeffs)
        .map(|(p, c)| c * spherical_harmonic(HarmonicIndex::new(2, 1).unwrap(), p))
        .sum();
    assert!(y21.norm() < 1e-9);
}

#[test]
fn hemisphere_odd_degree_one() {
    let t = CoefficientTensor::isotropic(vec![1.0, 1.0])
        .unwrap()
        .with_tail(Tail::new(
            TailFamily::PowerLaw {
                scale: 1.0,
                exponent: 3.0,
            },
            TailParity::Even,
        ))
        .unwrap();
    assert_eq!(
        certify(&t, 8, DEFAULT_TOL).unwrap().justification,
        Justification::Parity(ParityCase::FinitelyManyOdd)
    );
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let w =
        hemisphere_nullspace_witness(&t.expand_tail(12).unwrap(), 1, DegreeParity::Odd, &mut rng)
            .unwrap();
    assert!(w.quad_form.abs() <= 1e-8 * w.scale);
    // a single point can never do this: Y_1^0 and Y_1^{±1} have no common zero
    for p in &w.points {
        let norms: f64 = (-1..=1)
            .map(|k| spherical_harmonic(HarmonicIndex::new(1, k).unwrap(), p).norm())
            .sum();
        assert!(norms > 0.1);
    }
}

#[test]
fn hemisphere_precondition() {
    let t = CoefficientTensor::isotropic(vec![1.0, 1.0, 1.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    assert!(matches!(
        hemisphere_nullspace_witness(&t, 1, DegreeParity::Even, &mut rng),
        Err(Error::Precondition(_))
    ));
}

fn coupled_example() -> (CoefficientTensor, BandLimitedFunction) {
    // coupling between (0,0) and (1,0): eigenvalues 3 and −1
    let mut a = CMatrix::zeros(4, 4);
    a[(0, 0)] = z(1.0, 0.0);
    a[(2, 2)] = z(1.0, 0.0);
    a[(0, 2)] = z(2.0, 0.0);
    a[(2, 0)] = z(2.0, 0.0);
    let t = CoefficientTensor::full(a).unwrap();
    let s = 0.5f64.sqrt();
    let y = vec![z(s, 0.0), z(0.0, 0.0), z(-s, 0.0), z(0.0, 0.0)];
    (t, BandLimitedFunction::from_direction(&y).unwrap())
}

#[test]
fn coupled_negative_direction() {
    let (t, f) = coupled_example();
    let cert = certify(&t, 1, DEFAULT_TOL).unwrap();
    assert_eq!(cert.verdict, Verdict::NotPositiveDefinite);
    let closed = continuous_form(&t, &f);
    assert!((closed + 1.0).abs() < 1e-14);
    let d = discretize_negative_direction(&t, &f, 8).unwrap();
    assert_eq!(d.resolution, 8);
    assert!(d.witness.quad_form < 0.0);
    d.witness.validate(&t).unwrap();
    // band-limited data: the product rule is already exact at m = 8, so
    // only roundoff separates the discrete and continuous forms
    for m in [8, 16, 32] {
        let (_, _, raw) = discretize(&t, &f, m).unwrap();
        assert!((raw - closed).abs() < 1e-10, "m = {m}: {raw}");
    }
}

#[test]
fn dual_paths_agree_on_random_witnesses() {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    for _ in 0..20 {
        let t = random_block_tensor(&mut rng, 0.3);
        let n = rng.random_range(1..20);
        let pts = random_points(&mut rng, n);
        let c: Vec<Complex64> = (0..n).map(|_| random_complex(&mut rng)).collect();
        let q = quadratic_form(&t, &pts, &c).unwrap();
        let y = quadratic_form_coefficients(&t, &pts, &c).unwrap();
        assert!((q.value - y).abs() <= 1e-9 * q.scale.max(f64::MIN_POSITIVE));
        assert!(q.imag.abs() <= 1e-10 * q.scale.max(f64::MIN_POSITIVE));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn certification_is_scale_invariant(seed in any::<u64>(), log_alpha in -30.0f64..30.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_block_tensor(&mut rng, 0.2);
        let alpha = 10f64.powf(log_alpha);
        let a = certify(&t, t.j_max(), DEFAULT_TOL).unwrap();
        let b = certify(&t.scaled(alpha), t.j_max(), DEFAULT_TOL).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.justification, b.justification);
        let sa: Vec<_> = a.per_block.iter().map(|x| x.status).collect();
        let sb: Vec<_> = b.per_block.iter().map(|x| x.status).collect();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn witnesses_revalidate(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..=6).map(|j| if j % 2 == 0 { rng.random_range(0.1..2.0) } else { 0.0 }).collect();
        let t = CoefficientTensor::isotropic(c).unwrap();
        let w = antipodal_witness(&t, DegreeParity::Even).unwrap();
        w.validate(&t).unwrap();
        let y = quadratic_form_coefficients(&t, &w.points, &w.coeffs).unwrap();
        prop_assert!((y - w.quad_form).abs() <= 1e-9 * w.scale);
    }
}
