//! Coefficient tensors of Hermitian kernels on S².
//!
//! Every tensor stores the coefficients `α_{j,j',k,k'}` of
//! `K(ξ,ζ) = Σ α_{j,j',k,k'} Y_j^k(ξ) conj(Y_{j'}^{k'}(ζ))` in one of five
//! layouts:
//!
//! | variant             | nonzero pattern                                  |
//! |---------------------|--------------------------------------------------|
//! | `Full`              | arbitrary `a_{ℓ,ℓ'}` for `ℓ, ℓ' ≤ L_max`           |
//! | `BlockDiagonal`     | `d_j(k,k') δ_{j,j'}`                               |
//! | `AxiallySymmetric`  | `c_k(j,j') δ_{k,k'}`                               |
//! | `Isotropic`         | `c_j δ_{j,j'} δ_{k,k'}`                            |
//! | `Diagonal`          | `a_{j,k} δ_{j,j'} δ_{k,k'}`                        |
//!
//! Beyond the explicit range a tensor may carry a [`Tail`]: a closed-form
//! generator `j ↦ v_j` that contributes `v_j I` as the degree-`j` block. The
//! tail is what lets a finite description talk about infinitely many degrees.

mod band_limited;
mod spec_file;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::harmonics::{
    degree_eigenvalue, fill_harmonics, harmonic_count, HarmonicIndex, SpherePoint,
};
use crate::linalg::{max_abs, CMatrix};

pub use band_limited::BandLimitedFunction;
pub use spec_file::{parse_kernel_spec, to_kernel_spec};

const HERMITIAN_RTOL: f64 = 1e-12;

/// Closed-form coefficient generator for degrees above the explicit range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailFamily {
    /// `scale · (1+j)^{-exponent}`, `exponent > 1`.
    PowerLaw { scale: f64, exponent: f64 },
    /// `scale · ratio^j`, `0 < ratio < 1`.
    Geometric { scale: f64, ratio: f64 },
}

/// Which degrees above the explicit range the tail populates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailParity {
    Both,
    Even,
    Odd,
    /// No degree: the kernel ends at the explicit range.
    Finite,
}

impl TailParity {
    pub fn includes(self, j: usize) -> bool {
        match self {
            TailParity::Both => true,
            TailParity::Even => j.is_multiple_of(2),
            TailParity::Odd => j % 2 == 1,
            TailParity::Finite => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TailParity::Both => "both",
            TailParity::Even => "even",
            TailParity::Odd => "odd",
            TailParity::Finite => "finite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub family: TailFamily,
    pub parity: TailParity,
    /// Accumulated heat-kernel damping `t`: values are multiplied by
    /// `exp(-2 j(j+1) t)`. Zero for an undamped tail.
    pub damping: f64,
}

impl Tail {
    pub fn new(family: TailFamily, parity: TailParity) -> Self {
        Self {
            family,
            parity,
            damping: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTensor(m));
        match self.family {
            TailFamily::PowerLaw { scale, exponent } => {
                if !scale.is_finite() || scale == 0.0 {
                    return bad(format!("tail scale {scale} must be finite and nonzero"));
                }
                // Σ (2j+1) (1+j)^{-2s} < ∞  ⇔  s > 1
                if !exponent.is_finite() || exponent <= 1.0 {
                    return bad(format!(
                        "power-law exponent {exponent} must exceed 1 for square-summability"
                    ));
                }
            }
            TailFamily::Geometric { scale, ratio } => {
                if !scale.is_finite() || scale == 0.0 {
                    return bad(format!("tail scale {scale} must be finite and nonzero"));
                }
                if !(ratio > 0.0 && ratio < 1.0) {
                    return bad(format!("geometric ratio {ratio} must lie in (0, 1)"));
                }
            }
        }
        if !self.damping.is_finite() || self.damping < 0.0 {
            return bad(format!(
                "tail damping {} must be finite and nonnegative",
                self.damping
            ));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        match self.family {
            TailFamily::PowerLaw { scale, .. } | TailFamily::Geometric { scale, .. } => scale,
        }
    }

    /// Generator value at degree `j`, ignoring parity.
    pub fn envelope(&self, j: usize) -> f64 {
        let base = match self.family {
            TailFamily::PowerLaw { scale, exponent } => scale * (1.0 + j as f64).powf(-exponent),
            TailFamily::Geometric { scale, ratio } => scale * ratio.powf(j as f64),
        };
        if self.damping == 0.0 {
            base
        } else {
            base * (-2.0 * degree_eigenvalue(j) * self.damping).exp()
        }
    }

    /// Generator value at degree `j`, zero where the parity excludes `j`.
    pub fn value(&self, j: usize) -> f64 {
        if self.parity.includes(j) {
            self.envelope(j)
        } else {
            0.0
        }
    }

    /// True if the tail puts nonzero blocks at infinitely many degrees of the
    /// given parity.
    pub fn covers_infinitely(&self, odd: bool) -> bool {
        match self.parity {
            TailParity::Both => true,
            TailParity::Even => !odd,
            TailParity::Odd => odd,
            TailParity::Finite => false,
        }
    }

    fn scaled(&self, alpha: f64) -> Self {
        let family = match self.family {
            TailFamily::PowerLaw { scale, exponent } => TailFamily::PowerLaw {
                scale: scale * alpha,
                exponent,
            },
            TailFamily::Geometric { scale, ratio } => TailFamily::Geometric {
                scale: scale * alpha,
                ratio,
            },
        };
        Self { family, ..*self }
    }
}

/// Storage layouts. See the module documentation.
#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// `a[(ℓ-1, ℓ'-1)]`, square of side `L_max`.
    Full {
        a: CMatrix,
    },
    /// `blocks[j]` is the `(2j+1)²` matrix with entry `(k+j, k'+j) = d_j(k,k')`.
    BlockDiagonal {
        blocks: Vec<CMatrix>,
    },
    /// `orders[k + j_max]` is indexed by `(j-|k|, j'-|k|)` for `|k| ≤ j, j' ≤ j_max`.
    AxiallySymmetric {
        j_max: usize,
        orders: Vec<CMatrix>,
    },
    Isotropic {
        c: Vec<f64>,
    },
    /// `a[j][k+j]`.
    Diagonal {
        a: Vec<Vec<f64>>,
    },
}

/// One stored coefficient in double-index form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub row: HarmonicIndex,
    pub col: HarmonicIndex,
    pub value: Complex64,
}

/// Coefficient tensor of a Hermitian kernel, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTensor {
    variant: Variant,
    tail: Option<Tail>,
}

fn check_finite_matrix(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidTensor(format!(
            "{what} contains non-finite entries"
        )))
    }
}

fn check_hermitian(m: &CMatrix, what: &str) -> Result<()> {
    let scale = max_abs(m);
    let defect = crate::linalg::hermitian_defect(m);
    if defect > HERMITIAN_RTOL * scale {
        return Err(Error::NotHermitian {
            defect,
            tol: HERMITIAN_RTOL * scale,
        });
    }
    check_finite_matrix(m, what)
}

fn idx(j: usize, k: isize) -> HarmonicIndex {
    HarmonicIndex::new(j, k).expect("order within degree")
}

impl CoefficientTensor {
    /// General Hermitian tensor `a_{ℓ,ℓ'}` of square, nonempty shape.
    pub fn full(a: CMatrix) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::InvalidTensor(format!(
                "full coefficient matrix must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        check_hermitian(&a, "full coefficient matrix")?;
        Ok(Self {
            variant: Variant::Full { a },
            tail: None,
        })
    }

    pub fn block_diagonal(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidTensor(
                "at least the degree-0 block is required".into(),
            ));
        }
        for (j, b) in blocks.iter().enumerate() {
            if b.nrows() != 2 * j + 1 || b.ncols() != 2 * j + 1 {
                return Err(Error::InvalidTensor(format!(
                    "block {j} must be {0}x{0}, got {1}x{2}",
                    2 * j + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
            check_hermitian(b, &format!("block {j}"))?;
        }
        Ok(Self {
            variant: Variant::BlockDiagonal { blocks },
            tail: None,
        })
    }

    pub fn axially_symmetric(j_max: usize, orders: Vec<CMatrix>) -> Result<Self> {
        if orders.len() != 2 * j_max + 1 {
            return Err(Error::InvalidTensor(format!(
                "expected {} order matrices for j_max = {j_max}, got {}",
                2 * j_max + 1,
                orders.len()
            )));
        }
        for (i, m) in orders.iter().enumerate() {
            let k = i as isize - j_max as isize;
            let n = j_max - k.unsigned_abs() + 1;
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidTensor(format!(
                    "order {k} matrix must be {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            check_hermitian(m, &format!("order {k} matrix"))?;
        }
        Ok(Self {
            variant: Variant::AxiallySymmetric { j_max, orders },
            tail: None,
        })
    }

    pub fn isotropic(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::InvalidTensor("isotropic kernel needs c_0".into()));
        }
        if let Some(j) = c.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor(format!("c[{j}] is not finite")));
        }
        Ok(Self {
            variant: Variant::Isotropic { c },
            tail: None,
        })
    }

    pub fn diagonal(a: Vec<Vec<f64>>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidTensor(
                "diagonal kernel needs degree 0".into(),
            ));
        }
        for (j, row) in a.iter().enumerate() {
            if row.len() != 2 * j + 1 {
                return Err(Error::InvalidTensor(format!(
                    "diagonal degree {j} needs {} entries, got {}",
                    2 * j + 1,
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTensor(format!(
                    "diagonal degree {j} has non-finite entries"
                )));
            }
        }
        Ok(Self {
            variant: Variant::Diagonal { a },
            tail: None,
        })
    }

    /// Attaches a tail generator. Not available for the `Full` layout.
    pub fn with_tail(mut self, tail: Tail) -> Result<Self> {
        if matches!(self.variant, Variant::Full { .. }) {
            return Err(Error::InvalidTensor(
                "full tensors cannot carry a tail".into(),
            ));
        }
        tail.validate()?;
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn tail(&self) -> Option<&Tail> {
        self.tail.as_ref()
    }

    pub fn variant_name(&self) -> &'static str {
        match self.variant {
            Variant::Full { .. } => "full",
            Variant::BlockDiagonal { .. } => "block_diagonal",
            Variant::AxiallySymmetric { .. } => "axially_symmetric",
            Variant::Isotropic { .. } => "isotropic",
            Variant::Diagonal { .. } => "diagonal",
        }
    }

    /// Highest degree with explicitly stored coefficients.
    pub fn j_max(&self) -> usize {
        match &self.variant {
            Variant::Full { a } => HarmonicIndex::from_flat(a.nrows()).expect("nonempty").j(),
            Variant::BlockDiagonal { blocks } => blocks.len() - 1,
            Variant::AxiallySymmetric { j_max, .. } => *j_max,
            Variant::Isotropic { c } => c.len() - 1,
            Variant::Diagonal { a } => a.len() - 1,
        }
    }

    /// Length of the harmonic feature vectors consumed by [`Self::bilinear`].
    pub fn feature_len(&self) -> usize {
        harmonic_count(self.j_max())
    }

    /// True for layouts whose coefficients vanish off `j = j'`. `Full` and
    /// `AxiallySymmetric` tensors are checked entry by entry.
    pub fn is_degree_diagonal(&self) -> bool {
        match &self.variant {
            Variant::BlockDiagonal { .. }
            | Variant::Isotropic { .. }
            | Variant::Diagonal { .. } => true,
            _ => self.entries().iter().all(|e| e.row.j() == e.col.j()),
        }
    }

    /// Tail value `v_j` contributing `v_j I` at degree `j`; zero inside the
    /// explicit range or without a tail.
    pub fn tail_value(&self, j: usize) -> f64 {
        match &self.tail {
            Some(t) if j > self.j_max() => t.value(j),
            _ => 0.0,
        }
    }

    /// All nonzero explicit coefficients in double-index form.
    pub fn entries(&self) -> Vec<Entry> {
        let mut out = Vec::new();
        let zero = Complex64::new(0.0, 0.0);
        match &self.variant {
            Variant::Full { a } => {
                for r in 0..a.nrows() {
                    for c in 0..a.ncols() {
                        if a[(r, c)] != zero {
                            out.push(Entry {
                                row: HarmonicIndex::from_flat(r + 1).unwrap(),
                                col: HarmonicIndex::from_flat(c + 1).unwrap(),
                                value: a[(r, c)],
                            });
                        }
                    }
                }
            }
            Variant::BlockDiagonal { blocks } => {
                for (j, b) in blocks.iter().enumerate() {
                    let jj = j as isize;
                    for r in 0..b.nrows() {
                        for c in 0..b.ncols() {
                            if b[(r, c)] != zero {
                                out.push(Entry {
                                    row: idx(j, r as isize - jj),
                                    col: idx(j, c as isize - jj),
                                    value: b[(r, c)],
                                });
                            }
                        }
                    }
                }
            }
            Variant::AxiallySymmetric { j_max, orders } => {
                for (i, m) in orders.iter().enumerate() {
                    let k = i as isize - *j_max as isize;
                    let base = k.unsigned_abs();
                    for r in 0..m.nrows() {
                        for c in 0..m.ncols() {
                            if m[(r, c)] != zero {
                                out.push(Entry {
                                    row: idx(base + r, k),
                                    col: idx(base + c, k),
                                    value: m[(r, c)],
                                });
                            }
                        }
                    }
                }
            }
            Variant::Isotropic { c } => {
                for (j, &v) in c.iter().enumerate() {
                    if v != 0.0 {
                        let jj = j as isize;
                        for k in -jj..=jj {
                            out.push(Entry {
                                row: idx(j, k),
                                col: idx(j, k),
                                value: Complex64::new(v, 0.0),
                            });
                        }
                    }
                }
            }
            Variant::Diagonal { a } => {
                for (j, row) in a.iter().enumerate() {
                    let jj = j as isize;
                    for (i, &v) in row.iter().enumerate() {
                        if v != 0.0 {
                            let k = i as isize - jj;
                            out.push(Entry {
                                row: idx(j, k),
                                col: idx(j, k),
                                value: Complex64::new(v, 0.0),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest coefficient modulus over the explicit range.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.entries()
            .iter()
            .map(|e| e.value.norm())
            .fold(0.0, f64::max)
    }

    /// The `(2j+1)×(2j+1)` block `D_j` with entry `(k+j, k'+j) = d_j(k,k')`.
    ///
    /// For `Full` and `AxiallySymmetric` tensors this is the restriction to
    /// degree `j`, ignoring any coupling to other degrees.
    pub fn block(&self, j: usize) -> Result<CMatrix> {
        let n = 2 * j + 1;
        let j_max = self.j_max();
        if j > j_max {
            return match &self.tail {
                Some(t) => Ok(CMatrix::identity(n, n) * Complex64::new(t.value(j), 0.0)),
                None => Err(Error::DegreeOutOfRange { degree: j, j_max }),
            };
        }
        let jj = j as isize;
        Ok(match &self.variant {
            Variant::Full { a } => {
                let base = j * j;
                let l_max = a.nrows();
                CMatrix::from_fn(n, n, |r, c| {
                    let (lr, lc) = (base + r, base + c);
                    if lr < l_max && lc < l_max {
                        a[(lr, lc)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
            Variant::BlockDiagonal { blocks } => blocks[j].clone(),
            Variant::AxiallySymmetric { j_max, orders } => CMatrix::from_fn(n, n, |r, c| {
                if r != c {
                    return Complex64::new(0.0, 0.0);
                }
                let k = r as isize - jj;
                let m = &orders[(k + *j_max as isize) as usize];
                let off = j - k.unsigned_abs();
                m[(off, off)]
            }),
            Variant::Isotropic { c } => CMatrix::identity(n, n) * Complex64::new(c[j], 0.0),
            Variant::Diagonal { a } => CMatrix::from_fn(n, n, |r, c| {
                if r == c {
                    Complex64::new(a[j][r], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        })
    }

    /// Harmonic feature vector `(Y_j^k(p))` of length [`Self::feature_len`].
    pub fn features(&self, p: &SpherePoint) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.feature_len()];
        fill_harmonics(self.j_max(), p, &mut out);
        out
    }

    /// `Σ α_{ℓ,ℓ'} u_ℓ conj(v_ℓ')` over the explicit range.
    ///
    /// With `u`, `v` the feature vectors of two points this is `K(p, q)`; with
    /// `u = v = Σ_ξ c_ξ F(ξ)` it is the coefficient-space quadratic form.
    pub fn bilinear(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        match &self.variant {
            Variant::Full { a } => {
                for c in 0..a.ncols() {
                    let mut col = Complex64::new(0.0, 0.0);
                    for r in 0..a.nrows() {
                        col += a[(r, c)] * u[r];
                    }
                    acc += col * v[c].conj();
                }
            }
            Variant::BlockDiagonal { blocks } => {
                for (j, b) in blocks.iter().enumerate() {
                    let base = j * j;
                    for c in 0..b.ncols() {
                        let mut col = Complex64::new(0.0, 0.0);
                        for r in 0..b.nrows() {
                            col += b[(r, c)] * u[base + r];
                        }
                        acc += col * v[base + c].conj();
                    }
                }
            }
            Variant::AxiallySymmetric { j_max, orders } => {
                for (i, m) in orders.iter().enumerate() {
                    let k = i as isize - *j_max as isize;
                    let base = k.unsigned_abs();
                    let slot = |j: usize| (j * j + j).wrapping_add_signed(k);
                    for c in 0..m.ncols() {
                        let mut col = Complex64::new(0.0, 0.0);
                        for r in 0..m.nrows() {
                            col += m[(r, c)] * u[slot(base + r)];
                        }
                        acc += col * v[slot(base + c)].conj();
                    }
                }
            }
            Variant::Isotropic { c } => {
                for (j, &cj) in c.iter().enumerate() {
                    let range = j * j..(j + 1) * (j + 1);
                    let s: Complex64 = u[range.clone()]
                        .iter()
                        .zip(&v[range])
                        .map(|(x, y)| x * y.conj())
                        .sum();
                    acc += s * cj;
                }
            }
            Variant::Diagonal { a } => {
                for (j, row) in a.iter().enumerate() {
                    let base = j * j;
                    for (i, &w) in row.iter().enumerate() {
                        acc += u[base + i] * v[base + i].conj() * w;
                    }
                }
            }
        }
        acc
    }

    /// `w_ℓ' = Σ_ℓ α_{ℓ,ℓ'} u_ℓ`, so that `bilinear(u, v) = Σ w_ℓ' conj(v_ℓ')`.
    /// Contracting each feature vector once turns an `N × N` table of kernel
    /// values into `O(N² L)` work.
    pub fn contract(&self, u: &[Complex64]) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let mut w = vec![zero; self.feature_len()];
        match &self.variant {
            Variant::Full { a } => {
                for (c, wc) in w.iter_mut().enumerate().take(a.ncols()) {
                    *wc = (0..a.nrows()).map(|r| a[(r, c)] * u[r]).sum();
                }
            }
            Variant::BlockDiagonal { blocks } => {
                for (j, b) in blocks.iter().enumerate() {
                    let base = j * j;
                    for c in 0..b.ncols() {
                        w[base + c] = (0..b.nrows()).map(|r| b[(r, c)] * u[base + r]).sum();
                    }
                }
            }
            Variant::AxiallySymmetric { j_max, orders } => {
                for (i, m) in orders.iter().enumerate() {
                    let k = i as isize - *j_max as isize;
                    let base = k.unsigned_abs();
                    let slot = |j: usize| (j * j + j).wrapping_add_signed(k);
                    for c in 0..m.ncols() {
                        w[slot(base + c)] =
                            (0..m.nrows()).map(|r| m[(r, c)] * u[slot(base + r)]).sum();
                    }
                }
            }
            Variant::Isotropic { c } => {
                for (j, &cj) in c.iter().enumerate() {
                    for s in j * j..(j + 1) * (j + 1) {
                        w[s] = u[s] * cj;
                    }
                }
            }
            Variant::Diagonal { a } => {
                for (j, row) in a.iter().enumerate() {
                    for (i, &v) in row.iter().enumerate() {
                        w[j * j + i] = u[j * j + i] * v;
                    }
                }
            }
        }
        w
    }

    /// Explicit-range tensor carrying the tail coefficients up to `degree`.
    /// Tensors without a tail, or with `degree ≤ j_max`, are returned as is.
    pub fn expand_tail(&self, degree: usize) -> Result<Self> {
        let j_max = self.j_max();
        let Some(tail) = self.tail else {
            return Ok(self.clone());
        };
        if degree <= j_max {
            return Ok(self.clone());
        }
        let variant = match &self.variant {
            Variant::Full { .. } => unreachable!("full tensors have no tail"),
            Variant::BlockDiagonal { blocks } => {
                let mut blocks = blocks.clone();
                for j in j_max + 1..=degree {
                    let n = 2 * j + 1;
                    blocks.push(CMatrix::identity(n, n) * Complex64::new(tail.value(j), 0.0));
                }
                Variant::BlockDiagonal { blocks }
            }
            Variant::Isotropic { c } => {
                let mut c = c.clone();
                c.extend((j_max + 1..=degree).map(|j| tail.value(j)));
                Variant::Isotropic { c }
            }
            Variant::Diagonal { a } => {
                let mut a = a.clone();
                a.extend((j_max + 1..=degree).map(|j| vec![tail.value(j); 2 * j + 1]));
                Variant::Diagonal { a }
            }
            Variant::AxiallySymmetric { orders, .. } => {
                let new_max = degree;
                let orders = (0..2 * new_max + 1)
                    .map(|i| {
                        let k = i as isize - new_max as isize;
                        let base = k.unsigned_abs();
                        let n = new_max - base + 1;
                        CMatrix::from_fn(n, n, |r, c| {
                            let (j, jp) = (base + r, base + c);
                            if j <= j_max && jp <= j_max {
                                let old = &orders[(k + j_max as isize) as usize];
                                old[(r, c)]
                            } else if j == jp {
                                Complex64::new(tail.value(j), 0.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            }
                        })
                    })
                    .collect();
                Variant::AxiallySymmetric {
                    j_max: new_max,
                    orders,
                }
            }
        };
        Ok(Self {
            variant,
            tail: Some(tail),
        })
    }

    /// Upper bound on `sup |K − K_degree|`, the part of the tail above
    /// `max(degree, j_max)`. `Some(0)` without a tail, `None` when the tail is
    /// not absolutely summable in the sup norm.
    pub fn tail_bound(&self, degree: usize) -> Option<f64> {
        let Some(tail) = &self.tail else {
            return Some(0.0);
        };
        if tail.parity == TailParity::Finite {
            return Some(0.0);
        }
        let d = degree.max(self.j_max());
        let n = (d + 1) as f64;
        let sum = match tail.family {
            // Σ_{j>d} (2j+1)(1+j)^{-s} ≤ 2 ∫_d^∞ (1+x)^{1-s} dx
            TailFamily::PowerLaw { scale, exponent } if exponent > 2.0 => {
                scale.abs() * 2.0 * n.powf(2.0 - exponent) / (exponent - 2.0)
            }
            TailFamily::PowerLaw { .. } if tail.damping > 0.0 => {
                sum_until_negligible(d + 1, |j| (2 * j + 1) as f64 * tail.envelope(j).abs())?
            }
            TailFamily::PowerLaw { .. } => return None,
            TailFamily::Geometric { scale, ratio } => {
                let rn = ratio.powf(n);
                let q = 1.0 - ratio;
                scale.abs() * (2.0 * rn * (n - (n - 1.0) * ratio) / (q * q) + rn / q)
            }
        };
        Some(sum / (4.0 * PI))
    }

    /// Heat-kernel smoothing `a_{ℓ,ℓ'} ↦ e^{-λ_ℓ/n} a_{ℓ,ℓ'} e^{-λ_ℓ'/n}`.
    /// The layout is preserved.
    pub fn heat_smooth(&self, n: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(domain(format!(
                "smoothing parameter {n} must be positive and finite"
            )));
        }
        let damp = |j: usize| (-degree_eigenvalue(j) / n).exp();
        let variant = match &self.variant {
            Variant::Full { a } => {
                let f: Vec<f64> = (0..a.nrows())
                    .map(|r| damp(HarmonicIndex::from_flat(r + 1).unwrap().j()))
                    .collect();
                Variant::Full {
                    a: CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] * (f[r] * f[c])),
                }
            }
            Variant::BlockDiagonal { blocks } => Variant::BlockDiagonal {
                blocks: blocks
                    .iter()
                    .enumerate()
                    .map(|(j, b)| b * Complex64::new(damp(j) * damp(j), 0.0))
                    .collect(),
            },
            Variant::AxiallySymmetric { j_max, orders } => Variant::AxiallySymmetric {
                j_max: *j_max,
                orders: orders
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let base = (i as isize - *j_max as isize).unsigned_abs();
                        CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
                            m[(r, c)] * (damp(base + r) * damp(base + c))
                        })
                    })
                    .collect(),
            },
            Variant::Isotropic { c } => Variant::Isotropic {
                c: c.iter()
                    .enumerate()
                    .map(|(j, v)| v * damp(j) * damp(j))
                    .collect(),
            },
            Variant::Diagonal { a } => Variant::Diagonal {
                a: a.iter()
                    .enumerate()
                    .map(|(j, row)| row.iter().map(|v| v * damp(j) * damp(j)).collect())
                    .collect(),
            },
        };
        let tail = self.tail.map(|t| Tail {
            damping: t.damping + 1.0 / n,
            ..t
        });
        Ok(Self { variant, tail })
    }

    /// `‖K‖_{W_2^r(S²×S²)} = (Σ (1+λ_ℓ+λ_ℓ')^r |a_{ℓ,ℓ'}|²)^{1/2}`, tail included.
    pub fn sobolev_norm(&self, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(domain("Sobolev order must be finite"));
        }
        let mut sum: f64 = self
            .entries()
            .iter()
            .map(|e| (1.0 + e.row.eigenvalue() + e.col.eigenvalue()).powf(r) * e.value.norm_sqr())
            .sum();
        if let Some(tail) = &self.tail {
            if tail.parity != TailParity::Finite {
                sum += self.tail_sobolev_sum(tail, r)?;
            }
        }
        Ok(sum.sqrt())
    }

    fn tail_sobolev_sum(&self, tail: &Tail, r: f64) -> Result<f64> {
        let start = self.j_max() + 1;
        let term = |j: usize| {
            let v = tail.value(j);
            (2 * j + 1) as f64 * (1.0 + 2.0 * degree_eigenvalue(j)).powf(r) * v * v
        };
        match tail.family {
            TailFamily::PowerLaw { exponent, .. } if tail.damping == 0.0 => {
                // term ~ j^{-(2s - 2r - 1)}
                let decay = 2.0 * exponent - 2.0 * r - 1.0;
                if decay <= 1.0 {
                    return Err(Error::Divergent(format!(
                        "power-law tail with exponent {exponent} has infinite W^{r} norm (needs exponent > {})",
                        r + 1.0
                    )));
                }
                const EXPLICIT_TERMS: usize = 200_000;
                let end = start + EXPLICIT_TERMS;
                let head: f64 = (start..end).map(term).sum();
                // integral estimate of the remainder, halved for single-parity tails
                let last = (2 * end + 1) as f64
                    * (1.0 + 2.0 * degree_eigenvalue(end)).powf(r)
                    * tail.envelope(end).powi(2);
                let share = if tail.parity == TailParity::Both {
                    1.0
                } else {
                    0.5
                };
                Ok(head + share * last * end as f64 / (decay - 1.0))
            }
            _ => sum_until_negligible(start, term)
                .ok_or_else(|| Error::Divergent("tail series did not settle".into())),
        }
    }

    /// `max |λ_j − λ_j'| |α_{j,j',k,k'}| / max |α|`; zero exactly for
    /// coefficients of the form `d_j(k,k') δ_{j,j'}`.
    pub fn laplace_symmetry_defect(&self) -> f64 {
        let entries = self.entries();
        let scale = entries.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        entries
            .iter()
            .map(|e| (e.row.eigenvalue() - e.col.eigenvalue()).abs() * e.value.norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// `α T` for real `α`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let za = Complex64::new(alpha, 0.0);
        let variant = match &self.variant {
            Variant::Full { a } => Variant::Full { a: a * za },
            Variant::BlockDiagonal { blocks } => Variant::BlockDiagonal {
                blocks: blocks.iter().map(|b| b * za).collect(),
            },
            Variant::AxiallySymmetric { j_max, orders } => Variant::AxiallySymmetric {
                j_max: *j_max,
                orders: orders.iter().map(|m| m * za).collect(),
            },
            Variant::Isotropic { c } => Variant::Isotropic {
                c: c.iter().map(|v| v * alpha).collect(),
            },
            Variant::Diagonal { a } => Variant::Diagonal {
                a: a.iter()
                    .map(|row| row.iter().map(|v| v * alpha).collect())
                    .collect(),
            },
        };
        Self {
            variant,
            tail: self.tail.map(|t| t.scaled(alpha)),
        }
    }
}

/// Sums `term(j)` for `j ≥ start` until the terms have peaked and dropped
/// below `1e-18` of the running total. `None` if that never happens.
fn sum_until_negligible(start: usize, term: impl Fn(usize) -> f64) -> Option<f64> {
    const MAX_TERMS: usize = 10_000_000;
    let mut acc = 0.0;
    let mut prev = f64::INFINITY;
    for j in start..start + MAX_TERMS {
        let t = term(j);
        acc += t;
        if t <= prev && t <= 1e-18 * acc.abs().max(f64::MIN_POSITIVE) {
            return Some(acc);
        }
        prev = t;
    }
    None
}

/// `K(p, q)` from the explicit coefficients. Isotropic tensors use the
/// addition theorem `Σ_j c_j (2j+1)/(4π) P_j(p·q)`.
pub fn eval_kernel(t: &CoefficientTensor, p: &SpherePoint, q: &SpherePoint) -> Complex64 {
    if let Variant::Isotropic { c } = &t.variant {
        return Complex64::new(isotropic_sum(c, p.dot(q)), 0.0);
    }
    t.bilinear(&t.features(p), &t.features(q))
}

/// `Σ_j c_j (2j+1)/(4π) P_j(x)`.
pub(crate) fn isotropic_sum(c: &[f64], x: f64) -> f64 {
    let mut prev = 1.0;
    let mut cur = x;
    let mut acc = c[0];
    for (j, &cj) in c.iter().enumerate().skip(1) {
        if j > 1 {
            let n = (j - 1) as f64;
            let next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
            prev = cur;
            cur = next;
        }
        acc += cj * (2 * j + 1) as f64 * cur;
    }
    acc / (4.0 * PI)
}
