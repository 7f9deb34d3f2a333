//! Positive definiteness certificates.
//!
//! For a kernel whose coefficients live on the degree diagonal
//! (`α = d_j(k,k') δ_{j,j'}`), the kernel is positive definite exactly when
//! every block `D_j` is positive semi-definite. Strictness then depends on
//! the parity content of the degrees carrying nonzero blocks:
//!
//! * if the nonzero blocks sit only at even degrees, only at odd degrees, or
//!   at finitely many degrees of one parity, the kernel is *not* strictly
//!   positive definite (an antipodal or hemisphere witness exists);
//! * if strictly positive blocks occur at infinitely many even *and*
//!   infinitely many odd degrees, it is.
//!
//! "Infinitely many" cannot be read off finite data, so it is taken from the
//! declared [`Tail`](crate::kernels::Tail) of the tensor. Without a tail,
//! strictness is never affirmed.
//!
//! Coupled tensors (coefficients linking different degrees) are classified
//! through the whole coefficient matrix instead of block by block.

use std::fmt::Write as _;

use serde_json::json;

use crate::error::{Error, Result};
use crate::kernels::{CoefficientTensor, TailParity, Variant};
use crate::linalg::{hermitian_defect, hermitian_eigen, inf_norm, CMatrix, CVector};

/// Relative threshold used when callers do not supply one.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockStatus {
    Zero,
    PsdSingular,
    PositiveDefinite,
    Indefinite,
}

impl BlockStatus {
    pub fn name(self) -> &'static str {
        match self {
            BlockStatus::Zero => "zero",
            BlockStatus::PsdSingular => "psd_singular",
            BlockStatus::PositiveDefinite => "positive_definite",
            BlockStatus::Indefinite => "indefinite",
        }
    }

    pub fn is_psd(self) -> bool {
        self != BlockStatus::Indefinite
    }
}

#[derive(Debug, Clone)]
pub struct BlockClassification {
    pub j: usize,
    pub status: BlockStatus,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Absolute threshold the status was decided with.
    pub threshold: f64,
    /// Eigenvectors with `|λ| ≤ threshold`; nonempty only for `PsdSingular`.
    pub null_space_basis: Vec<CVector>,
    /// Unit eigenvector of the most negative eigenvalue; `Some` only for
    /// `Indefinite`.
    pub negative_direction: Option<CVector>,
}

/// The block `D_j` of `t`, taken from the tail above the explicit range.
pub fn build_block(t: &CoefficientTensor, j: usize) -> Result<CMatrix> {
    t.block(j)
}

/// `1e-10 · max(1, ‖D‖_∞)`, the standalone threshold for a single block.
pub fn default_threshold(d: &CMatrix) -> f64 {
    DEFAULT_TOL * inf_norm(d).max(1.0)
}

/// Classifies a Hermitian block against the absolute threshold `tau`.
pub fn classify_block(d: &CMatrix, tau: f64) -> Result<BlockClassification> {
    if d.nrows() != d.ncols() {
        return Err(Error::Domain(format!(
            "block must be square, got {}x{}",
            d.nrows(),
            d.ncols()
        )));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain(format!(
            "threshold {tau} must be finite and nonnegative"
        )));
    }
    let defect = hermitian_defect(d);
    if defect > tau.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian { defect, tol: tau });
    }
    let j = d.nrows().saturating_sub(1) / 2;
    let eig = hermitian_eigen(d);
    let (min, max) = (eig.min(), eig.max());
    let status = if inf_norm(d) <= tau {
        BlockStatus::Zero
    } else if min < -tau {
        BlockStatus::Indefinite
    } else if min > tau {
        BlockStatus::PositiveDefinite
    } else {
        BlockStatus::PsdSingular
    };
    let null_space_basis = if status == BlockStatus::PsdSingular {
        eig.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= tau)
            .map(|(i, _)| eig.vector(i))
            .collect()
    } else {
        Vec::new()
    };
    let negative_direction = (status == BlockStatus::Indefinite).then(|| eig.vector(0));
    Ok(BlockClassification {
        j,
        status,
        min_eigenvalue: min,
        max_eigenvalue: max,
        threshold: tau,
        null_space_basis,
        negative_direction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    NotPositiveDefinite,
    PositiveDefiniteOnly,
    StrictlyPositiveDefinite,
    PositiveDefiniteStrictnessUndetermined,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::NotPositiveDefinite => "not_positive_definite",
            Verdict::PositiveDefiniteOnly => "positive_definite_only",
            Verdict::StrictlyPositiveDefinite => "strictly_positive_definite",
            Verdict::PositiveDefiniteStrictnessUndetermined => {
                "positive_definite_strictness_undetermined"
            }
        }
    }
}

/// The four ways the support of a positive definite block kernel can fail
/// the parity requirement for strictness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParityCase {
    /// Nonzero blocks only at even degrees.
    EvenOnly,
    /// Nonzero blocks only at odd degrees.
    OddOnly,
    /// At least one but finitely many even degrees.
    FinitelyManyEven,
    /// At least one but finitely many odd degrees.
    FinitelyManyOdd,
}

impl ParityCase {
    /// Case number 1–4 in the order above.
    pub fn number(self) -> u8 {
        match self {
            ParityCase::EvenOnly => 1,
            ParityCase::OddOnly => 2,
            ParityCase::FinitelyManyEven => 3,
            ParityCase::FinitelyManyOdd => 4,
        }
    }
}

/// Which argument produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Justification {
    /// Block `j` has a negative eigenvalue.
    IndefiniteBlock { j: usize },
    /// The coefficient operator of a coupled tensor has a negative eigenvalue.
    IndefiniteOperator,
    /// Tail blocks `v_j I` have `v_j < 0`; `j` is the first such degree.
    NegativeTail { j: usize },
    /// All blocks are PSD but the support fails the parity requirement.
    Parity(ParityCase),
    /// Coupled tensor with finitely many coefficients: the Gram matrix of any
    /// `L_max + 1` points is singular.
    FiniteRank,
    /// Every block is strictly positive and the tail covers both parities.
    AllBlocksStrict,
    /// Diagonal (or isotropic) coefficients, nonnegative, with strictly
    /// positive degrees of both parities infinitely often.
    DiagonalSufficiency,
    /// Strictly positive blocks at infinitely many even and odd degrees.
    InfiniteParityStrictBlocks,
    /// The tail would give strictness but is not summable enough to
    /// guarantee a continuous kernel.
    ContinuityUnverified,
    /// No criterion decides strictness.
    Undetermined,
}

impl Justification {
    pub fn name(&self) -> String {
        match self {
            Justification::IndefiniteBlock { j } => format!("indefinite_block_{j}"),
            Justification::IndefiniteOperator => "indefinite_operator".into(),
            Justification::NegativeTail { j } => format!("negative_tail_from_{j}"),
            Justification::Parity(case) => format!("parity_case_{}", case.number()),
            Justification::FiniteRank => "finite_rank".into(),
            Justification::AllBlocksStrict => "all_blocks_strict".into(),
            Justification::DiagonalSufficiency => "diagonal_sufficiency".into(),
            Justification::InfiniteParityStrictBlocks => "infinite_parity_strict_blocks".into(),
            Justification::ContinuityUnverified => "continuity_unverified".into(),
            Justification::Undetermined => "undetermined".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityReport {
    pub nonzero_even: usize,
    pub nonzero_odd: usize,
    pub strict_even: usize,
    pub strict_odd: usize,
    pub tail_parity: Option<TailParity>,
}

/// Spectrum of the full coefficient matrix of a coupled tensor.
#[derive(Debug, Clone)]
pub struct OperatorReport {
    pub dimension: usize,
    pub status: BlockStatus,
    pub min_eigenvalue: f64,
    pub negative_direction: Option<CVector>,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub j_check: usize,
    /// Absolute threshold `tol · max_j ‖D_j‖_∞` applied to every block.
    pub threshold: f64,
    pub per_block: Vec<BlockClassification>,
    /// Degrees `j ≤ j_check` whose block is strictly positive.
    pub strict_set: Vec<usize>,
    pub parity: ParityReport,
    pub coupling: Option<OperatorReport>,
    pub verdict: Verdict,
    pub justification: Justification,
}

impl Certificate {
    /// First block classified as indefinite.
    pub fn indefinite_block(&self) -> Option<&BlockClassification> {
        self.per_block
            .iter()
            .find(|b| b.status == BlockStatus::Indefinite)
    }
}

fn full_operator(t: &CoefficientTensor) -> CMatrix {
    if let Variant::Full { a } = t.variant() {
        return a.clone();
    }
    let n = t.feature_len();
    let mut a = CMatrix::zeros(n, n);
    for e in t.entries() {
        a[(e.row.slot(), e.col.slot())] = e.value;
    }
    a
}

/// Classifies all blocks `j ≤ j_check` and derives the verdict.
///
/// `tol` is relative: every block is judged against `tol · max_j ‖D_j‖_∞`,
/// so `certify(αT)` and `certify(T)` agree for every `α > 0`.
pub fn certify(t: &CoefficientTensor, j_check: usize, tol: f64) -> Result<Certificate> {
    if j_check < t.j_max() {
        return Err(Error::Precondition(format!(
            "j_check = {j_check} must cover the explicit range (j_max = {})",
            t.j_max()
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let blocks = (0..=j_check)
        .map(|j| t.block(j))
        .collect::<Result<Vec<_>>>()?;
    let scale = blocks.iter().map(inf_norm).fold(0.0, f64::max);
    let threshold = tol * scale;
    let per_block = blocks
        .iter()
        .map(|d| classify_block(d, threshold))
        .collect::<Result<Vec<_>>>()?;

    let strict_set: Vec<usize> = per_block
        .iter()
        .filter(|b| b.status == BlockStatus::PositiveDefinite)
        .map(|b| b.j)
        .collect();
    let count = |pred: &dyn Fn(&BlockClassification) -> bool, odd: bool| {
        per_block
            .iter()
            .filter(|b| (b.j % 2 == 1) == odd && pred(b))
            .count()
    };
    let nonzero = |b: &BlockClassification| b.status != BlockStatus::Zero;
    let strict = |b: &BlockClassification| b.status == BlockStatus::PositiveDefinite;
    let parity = ParityReport {
        nonzero_even: count(&nonzero, false),
        nonzero_odd: count(&nonzero, true),
        strict_even: count(&strict, false),
        strict_odd: count(&strict, true),
        tail_parity: t.tail().map(|tl| tl.parity),
    };

    let tail = t.tail().filter(|tl| tl.parity != TailParity::Finite);
    let negative_tail = tail.filter(|tl| tl.scale() < 0.0).map(|tl| {
        let first = (t.j_max() + 1..)
            .find(|&j| tl.parity.includes(j))
            .expect("non-finite parity");
        Justification::NegativeTail { j: first }
    });

    let mut cert = Certificate {
        j_check,
        threshold,
        per_block,
        strict_set,
        parity,
        coupling: None,
        verdict: Verdict::PositiveDefiniteStrictnessUndetermined,
        justification: Justification::Undetermined,
    };

    if !t.is_degree_diagonal() {
        let a = full_operator(t);
        let op_tau = tol * inf_norm(&a);
        let op = classify_block(&a, op_tau)?;
        cert.coupling = Some(OperatorReport {
            dimension: a.nrows(),
            status: op.status,
            min_eigenvalue: op.min_eigenvalue,
            negative_direction: op.negative_direction,
        });
        (cert.verdict, cert.justification) = if op.status == BlockStatus::Indefinite {
            (
                Verdict::NotPositiveDefinite,
                Justification::IndefiniteOperator,
            )
        } else if let Some(neg) = negative_tail {
            (Verdict::NotPositiveDefinite, neg)
        } else if tail.is_none() {
            (Verdict::PositiveDefiniteOnly, Justification::FiniteRank)
        } else {
            (
                Verdict::PositiveDefiniteStrictnessUndetermined,
                Justification::Undetermined,
            )
        };
        return Ok(cert);
    }

    if let Some(j) = cert.indefinite_block().map(|b| b.j) {
        cert.verdict = Verdict::NotPositiveDefinite;
        cert.justification = Justification::IndefiniteBlock { j };
        return Ok(cert);
    }
    if let Some(neg) = negative_tail {
        cert.verdict = Verdict::NotPositiveDefinite;
        cert.justification = neg;
        return Ok(cert);
    }

    let infinite_even = tail.is_some_and(|tl| tl.covers_infinitely(false));
    let infinite_odd = tail.is_some_and(|tl| tl.covers_infinitely(true));
    let even_present = cert.parity.nonzero_even > 0 || infinite_even;
    let odd_present = cert.parity.nonzero_odd > 0 || infinite_odd;

    let case = if !odd_present {
        Some(ParityCase::EvenOnly)
    } else if !even_present {
        Some(ParityCase::OddOnly)
    } else if !infinite_even {
        Some(ParityCase::FinitelyManyEven)
    } else if !infinite_odd {
        Some(ParityCase::FinitelyManyOdd)
    } else {
        None
    };
    (cert.verdict, cert.justification) = match case {
        Some(case) => (Verdict::PositiveDefiniteOnly, Justification::Parity(case)),
        // the tail puts v_j I with v_j > 0 at infinitely many degrees of both parities
        None if t.tail_bound(t.j_max()).is_none() => (
            Verdict::PositiveDefiniteStrictnessUndetermined,
            Justification::ContinuityUnverified,
        ),
        None => {
            let why = if matches!(
                t.variant(),
                Variant::Isotropic { .. } | Variant::Diagonal { .. }
            ) {
                Justification::DiagonalSufficiency
            } else if cert
                .per_block
                .iter()
                .all(|b| b.status == BlockStatus::PositiveDefinite)
            {
                Justification::AllBlocksStrict
            } else {
                Justification::InfiniteParityStrictBlocks
            };
            (Verdict::StrictlyPositiveDefinite, why)
        }
    };
    Ok(cert)
}

/// Shortest round-trip text for a float, shared by both report formats.
fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Certificate {
    /// Line-delimited JSON records: one `block` record per degree, then a
    /// `parity` record and a closing `verdict` record.
    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        for b in &self.per_block {
            let rec = json!({
                "record": "block",
                "j": b.j,
                "status": b.status.name(),
                "min_eig": b.min_eigenvalue,
            });
            writeln!(out, "{rec}").unwrap();
        }
        let rec = json!({
            "record": "parity",
            "nonzero_even": self.parity.nonzero_even,
            "nonzero_odd": self.parity.nonzero_odd,
            "strict_even": self.parity.strict_even,
            "strict_odd": self.parity.strict_odd,
            "tail": self.parity.tail_parity.map_or("none", |p| p.name()),
            "strict_set": self.strict_set,
        });
        writeln!(out, "{rec}").unwrap();
        if let Some(op) = &self.coupling {
            let rec = json!({
                "record": "operator",
                "dimension": op.dimension,
                "status": op.status.name(),
                "min_eig": op.min_eigenvalue,
            });
            writeln!(out, "{rec}").unwrap();
        }
        let rec = json!({
            "record": "verdict",
            "j_check": self.j_check,
            "threshold": self.threshold,
            "verdict": self.verdict.name(),
            "justification": self.justification.name(),
        });
        writeln!(out, "{rec}").unwrap();
        out
    }

    /// Tabular report with the same fields as [`Self::to_machine`].
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:>6}  {:<18}  min_eig", "j", "status").unwrap();
        for b in &self.per_block {
            writeln!(
                out,
                "{:>6}  {:<18}  {}",
                b.j,
                b.status.name(),
                num(b.min_eigenvalue)
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        let p = &self.parity;
        writeln!(
            out,
            "nonzero blocks:  even {}  odd {}",
            p.nonzero_even, p.nonzero_odd
        )
        .unwrap();
        writeln!(
            out,
            "strict blocks:   even {}  odd {}",
            p.strict_even, p.strict_odd
        )
        .unwrap();
        writeln!(
            out,
            "tail parity:     {}",
            p.tail_parity.map_or("none", |t| t.name())
        )
        .unwrap();
        let set: Vec<String> = self.strict_set.iter().map(|j| j.to_string()).collect();
        writeln!(out, "strict set:      {{{}}}", set.join(",")).unwrap();
        if let Some(op) = &self.coupling {
            writeln!(
                out,
                "operator:        dimension {}  status {}  min_eig {}",
                op.dimension,
                op.status.name(),
                num(op.min_eigenvalue)
            )
            .unwrap();
        }
        writeln!(out, "j_check:         {}", self.j_check).unwrap();
        writeln!(out, "threshold:       {}", num(self.threshold)).unwrap();
        writeln!(out, "verdict:         {}", self.verdict.name()).unwrap();
        writeln!(out, "justification:   {}", self.justification.name()).unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Tail, TailFamily};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn diag(values: &[f64]) -> CMatrix {
        CMatrix::from_fn(values.len(), values.len(), |r, k| {
            if r == k {
                c(values[r])
            } else {
                c(0.0)
            }
        })
    }

    #[test]
    fn block_construction() {
        let iso = CoefficientTensor::isotropic(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            build_block(&iso, 1).unwrap(),
            CMatrix::identity(3, 3) * c(2.0)
        );
        let d = CoefficientTensor::diagonal(vec![vec![0.5], vec![1.0, 0.0, 3.0]]).unwrap();
        assert_eq!(build_block(&d, 1).unwrap(), diag(&[1.0, 0.0, 3.0]));
        assert!(matches!(
            build_block(&d, 2),
            Err(Error::DegreeOutOfRange {
                degree: 2,
                j_max: 1
            })
        ));
    }

    #[test]
    fn classification_examples() {
        let id = classify_block(&CMatrix::identity(3, 3), 1e-10).unwrap();
        assert_eq!(id.status, BlockStatus::PositiveDefinite);
        assert!((id.min_eigenvalue - 1.0).abs() < 1e-14);

        let sing = classify_block(&diag(&[1.0, 0.0, 3.0]), 1e-10).unwrap();
        assert_eq!(sing.status, BlockStatus::PsdSingular);
        assert_eq!(sing.null_space_basis.len(), 1);
        let v = &sing.null_space_basis[0];
        assert!((v[1].norm() - 1.0).abs() < 1e-14 && v[0].norm() < 1e-14 && v[2].norm() < 1e-14);

        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        let ind = classify_block(&m, default_threshold(&m)).unwrap();
        assert_eq!(ind.status, BlockStatus::Indefinite);
        assert!((ind.min_eigenvalue + 1.0).abs() < 1e-13);
        assert!(ind.negative_direction.is_some());

        assert_eq!(
            classify_block(&CMatrix::zeros(3, 3), 1e-10).unwrap().status,
            BlockStatus::Zero
        );

        let skew = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(
            classify_block(&skew, 1e-10),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn null_vectors_are_annihilated() {
        let u = CVector::from_vec(vec![c(1.0), Complex64::new(0.0, 1.0), c(-1.0)]);
        let d = &u * u.adjoint();
        let b = classify_block(&d, default_threshold(&d)).unwrap();
        assert_eq!(b.status, BlockStatus::PsdSingular);
        assert_eq!(b.null_space_basis.len(), 2);
        for v in &b.null_space_basis {
            assert!((&d * v).norm() <= 10.0 * b.threshold * v.norm());
        }
    }

    fn powerlaw_tail(parity: TailParity) -> Tail {
        Tail::new(
            TailFamily::PowerLaw {
                scale: 1.0,
                exponent: 4.0,
            },
            parity,
        )
    }

    #[test]
    fn isotropic_power_law_is_strict() {
        let c: Vec<f64> = (0..=10).map(|j| (1.0 + j as f64).powi(-4)).collect();
        let t = CoefficientTensor::isotropic(c)
            .unwrap()
            .with_tail(powerlaw_tail(TailParity::Both))
            .unwrap();
        let cert = certify(&t, 40, DEFAULT_TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::StrictlyPositiveDefinite);
        assert_eq!(cert.justification, Justification::DiagonalSufficiency);
        assert_eq!(cert.strict_set.len(), 41);
    }

    #[test]
    fn parity_cases() {
        let even = CoefficientTensor::isotropic(vec![1.0, 0.0, 0.5, 0.0, 0.25]).unwrap();
        let cert = certify(&even, 4, DEFAULT_TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::PositiveDefiniteOnly);
        assert_eq!(
            cert.justification,
            Justification::Parity(ParityCase::EvenOnly)
        );

        let odd = CoefficientTensor::isotropic(vec![0.0, 1.0, 0.0, 0.5]).unwrap();
        assert_eq!(
            certify(&odd, 3, DEFAULT_TOL).unwrap().justification,
            Justification::Parity(ParityCase::OddOnly)
        );

        let finite_even = CoefficientTensor::isotropic(vec![1.0, 1.0, 1.0])
            .unwrap()
            .with_tail(powerlaw_tail(TailParity::Odd))
            .unwrap();
        assert_eq!(
            certify(&finite_even, 2, DEFAULT_TOL).unwrap().justification,
            Justification::Parity(ParityCase::FinitelyManyEven)
        );

        let finite_odd = CoefficientTensor::isotropic(vec![1.0, 1.0])
            .unwrap()
            .with_tail(powerlaw_tail(TailParity::Even))
            .unwrap();
        assert_eq!(
            certify(&finite_odd, 6, DEFAULT_TOL).unwrap().justification,
            Justification::Parity(ParityCase::FinitelyManyOdd)
        );

        // no tail, both parities present: finitely many even degrees
        let both = CoefficientTensor::isotropic(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(
            certify(&both, 2, DEFAULT_TOL).unwrap().justification,
            Justification::Parity(ParityCase::FinitelyManyEven)
        );
    }

    #[test]
    fn indefinite_blocks_refute() {
        let blocks = vec![diag(&[1.0]), diag(&[1.0, -0.5, 1.0])];
        let t = CoefficientTensor::block_diagonal(blocks).unwrap();
        let cert = certify(&t, 1, DEFAULT_TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::NotPositiveDefinite);
        assert_eq!(cert.justification, Justification::IndefiniteBlock { j: 1 });

        let neg_tail = CoefficientTensor::isotropic(vec![1.0])
            .unwrap()
            .with_tail(Tail::new(
                TailFamily::Geometric {
                    scale: -1.0,
                    ratio: 0.5,
                },
                TailParity::Odd,
            ))
            .unwrap();
        let cert = certify(&neg_tail, 0, DEFAULT_TOL).unwrap();
        assert_eq!(cert.justification, Justification::NegativeTail { j: 1 });
        assert_eq!(
            certify(&neg_tail, 3, DEFAULT_TOL).unwrap().verdict,
            Verdict::NotPositiveDefinite
        );
    }

    #[test]
    fn coupled_tensors_use_the_operator() {
        let mut a = CMatrix::zeros(4, 4);
        a[(0, 0)] = c(1.0);
        a[(2, 2)] = c(1.0);
        a[(0, 2)] = c(2.0);
        a[(2, 0)] = c(2.0);
        let t = CoefficientTensor::full(a.clone()).unwrap();
        let cert = certify(&t, 1, DEFAULT_TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::NotPositiveDefinite);
        assert_eq!(cert.justification, Justification::IndefiniteOperator);
        assert!((cert.coupling.unwrap().min_eigenvalue + 1.0).abs() < 1e-13);

        a[(0, 2)] = c(0.5);
        a[(2, 0)] = c(0.5);
        let cert = certify(&CoefficientTensor::full(a).unwrap(), 1, DEFAULT_TOL).unwrap();
        assert_eq!(cert.verdict, Verdict::PositiveDefiniteOnly);
        assert_eq!(cert.justification, Justification::FiniteRank);
    }

    #[test]
    fn slow_tails_do_not_certify_strictness() {
        let t = CoefficientTensor::isotropic(vec![1.0, 1.0])
            .unwrap()
            .with_tail(Tail::new(
                TailFamily::PowerLaw {
                    scale: 1.0,
                    exponent: 1.5,
                },
                TailParity::Both,
            ))
            .unwrap();
        let cert = certify(&t, 5, DEFAULT_TOL).unwrap();
        assert_eq!(
            cert.verdict,
            Verdict::PositiveDefiniteStrictnessUndetermined
        );
        assert_eq!(cert.justification, Justification::ContinuityUnverified);
    }

    #[test]
    fn j_check_must_cover_explicit_range() {
        let t = CoefficientTensor::isotropic(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            certify(&t, 1, DEFAULT_TOL),
            Err(Error::Precondition(_))
        ));
        assert!(certify(&t, 5, DEFAULT_TOL).is_err(), "no tail beyond j_max");
    }

    #[test]
    fn reports_agree_field_for_field() {
        let c: Vec<f64> = (0..=4).map(|j| (1.0 + j as f64).powi(-4)).collect();
        let t = CoefficientTensor::isotropic(c)
            .unwrap()
            .with_tail(powerlaw_tail(TailParity::Both))
            .unwrap();
        let cert = certify(&t, 8, DEFAULT_TOL).unwrap();
        let machine: Vec<serde_json::Value> = cert
            .to_machine()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        let human = cert.to_human();
        let rows: Vec<Vec<&str>> = human
            .lines()
            .skip(1)
            .take_while(|l| !l.is_empty())
            .map(|l| l.split_whitespace().collect())
            .collect();
        let blocks: Vec<_> = machine.iter().filter(|r| r["record"] == "block").collect();
        assert_eq!(rows.len(), blocks.len());
        for (row, rec) in rows.iter().zip(&blocks) {
            assert_eq!(row[0].parse::<u64>().unwrap(), rec["j"].as_u64().unwrap());
            assert_eq!(row[1], rec["status"].as_str().unwrap());
            assert_eq!(
                row[2].parse::<f64>().unwrap(),
                rec["min_eig"].as_f64().unwrap()
            );
        }
        let field = |name: &str| {
            human
                .lines()
                .find_map(|l| l.strip_prefix(name))
                .map(|rest| rest.trim().to_string())
                .unwrap()
        };
        let verdict = machine.last().unwrap();
        assert_eq!(field("verdict:"), verdict["verdict"].as_str().unwrap());
        assert_eq!(
            field("justification:"),
            verdict["justification"].as_str().unwrap()
        );
        assert_eq!(
            field("threshold:").parse::<f64>().unwrap(),
            verdict["threshold"].as_f64().unwrap()
        );
        let parity = machine.iter().find(|r| r["record"] == "parity").unwrap();
        assert_eq!(field("tail parity:"), parity["tail"].as_str().unwrap());
        assert_eq!(
            field("nonzero blocks:"),
            format!(
                "even {}  odd {}",
                parity["nonzero_even"], parity["nonzero_odd"]
            )
        );
        assert_eq!(
            field("strict blocks:"),
            format!(
                "even {}  odd {}",
                parity["strict_even"], parity["strict_odd"]
            )
        );
    }
}
