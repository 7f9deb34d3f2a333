//! Kernel interpolation of scattered data on the sphere.
//!
//! Given distinct sites `ξ_1, …, ξ_N` and values `f_i`, the interpolant is
//! `s(q) = Σ_i c_i K(q, ξ_i)` with `G c = f`, `G_{ij} = K(ξ_i, ξ_j)`.
//!
//! The Gram matrix is built from the explicit coefficients only. For a
//! tensor with a tail, interpolate with `t.expand_tail(d)` for a suitable
//! degree `d`; [`CoefficientTensor::tail_bound`] bounds what is left out.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::SpherePoint;
use crate::kernels::{eval_kernel, CoefficientTensor, Variant};
use crate::linalg::{hermitian_defect, hermitian_eigen, hermitian_part, max_abs, CMatrix, CVector};
use crate::witness::find_duplicate;

/// Relative eigenvalue floor below which the Gram matrix counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// `G_{ij} = K(ξ_i, ξ_j)`, checked to be Hermitian and then symmetrized.
pub fn gram(t: &CoefficientTensor, points: &[SpherePoint]) -> Result<CMatrix> {
    if let Some((i, j)) = find_duplicate(points) {
        return Err(Error::DuplicatePoints(i, j));
    }
    let n = points.len();
    let g = if matches!(t.variant(), Variant::Isotropic { .. }) {
        CMatrix::from_fn(n, n, |i, j| eval_kernel(t, &points[i], &points[j]))
    } else {
        let feats: Vec<Vec<Complex64>> = points.iter().map(|p| t.features(p)).collect();
        let contracted: Vec<Vec<Complex64>> = feats.iter().map(|f| t.contract(f)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            contracted[i]
                .iter()
                .zip(&feats[j])
                .map(|(a, b)| a * b.conj())
                .sum()
        })
    };
    let tol = 1e-11 * max_abs(&g).max(f64::MIN_POSITIVE);
    let defect = hermitian_defect(&g);
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(hermitian_part(&g))
}

/// Spectral information gathered while solving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub condition: f64,
    /// `max_i |s(ξ_i) − f_i|`.
    pub residual: f64,
    /// True when the solve went through the truncated pseudo-inverse.
    pub pseudo_inverse: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// Refuse singular Gram matrices and solve by Cholesky.
    #[default]
    Strict,
    /// Solve through the pseudo-inverse, discarding eigenvalues below
    /// `SINGULAR_RTOL · λ_max`. The result need not interpolate.
    Diagnostic,
}

#[derive(Debug, Clone)]
pub struct Interpolant {
    tensor: CoefficientTensor,
    points: Vec<SpherePoint>,
    coeffs: Vec<Complex64>,
    diagnostics: Diagnostics,
    /// `Σ_i conj(c_i) F(ξ_i)`, so that `s(q) = Σ (A^T F(q))_ℓ conj(dual_ℓ)`.
    dual: Vec<Complex64>,
}

impl Interpolant {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn tensor(&self) -> &CoefficientTensor {
        &self.tensor
    }

    /// `s(q) = Σ_i c_i K(q, ξ_i)`.
    pub fn evaluate(&self, q: &SpherePoint) -> Complex64 {
        if matches!(self.tensor.variant(), Variant::Isotropic { .. }) {
            return self
                .points
                .iter()
                .zip(&self.coeffs)
                .map(|(p, c)| c * eval_kernel(&self.tensor, q, p))
                .sum();
        }
        let w = self.tensor.contract(&self.tensor.features(q));
        w.iter().zip(&self.dual).map(|(a, b)| a * b.conj()).sum()
    }
}

/// Solves `G c = f` for the interpolation coefficients.
pub fn fit(
    t: &CoefficientTensor,
    points: &[SpherePoint],
    values: &[Complex64],
) -> Result<Interpolant> {
    fit_with(t, points, values, FitMode::Strict)
}

pub fn fit_with(
    t: &CoefficientTensor,
    points: &[SpherePoint],
    values: &[Complex64],
    mode: FitMode,
) -> Result<Interpolant> {
    if points.len() != values.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            values: values.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::Domain(
            "interpolation needs at least one site".into(),
        ));
    }
    if let Some(i) = values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(Error::Domain(format!("value {i} is not finite")));
    }
    let g = gram(t, points)?;
    let eig = hermitian_eigen(&g);
    let (min, max) = (eig.min(), eig.max());
    let singular = max <= 0.0 || min <= SINGULAR_RTOL * max;
    let condition = if singular { f64::INFINITY } else { max / min };
    let f = CVector::from_column_slice(values);

    let c = match mode {
        FitMode::Strict if singular => {
            return Err(Error::SingularGram {
                min_eigenvalue: min,
                max_eigenvalue: max,
                near_null: eig.vector(0),
            })
        }
        FitMode::Strict => match g.clone().cholesky() {
            Some(ch) => ch.solve(&f),
            None => {
                return Err(Error::SingularGram {
                    min_eigenvalue: min,
                    max_eigenvalue: max,
                    near_null: eig.vector(0),
                })
            }
        },
        FitMode::Diagnostic => {
            let cutoff = SINGULAR_RTOL * max.max(0.0);
            let mut c = CVector::zeros(f.len());
            for (i, &lambda) in eig.values.iter().enumerate() {
                if lambda > cutoff {
                    let v = eig.vectors.column(i);
                    let proj = v.adjoint() * &f;
                    c += v * (proj[(0, 0)] / lambda);
                }
            }
            c
        }
    };

    let residual = (&g * &c - &f).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if mode == FitMode::Strict {
        let bound = 1e-8 * (1.0 + fmax) * (condition / 1e10).max(1.0);
        if residual > bound {
            return Err(Error::Residual { residual, bound });
        }
    }
    let mut dual = vec![Complex64::new(0.0, 0.0); t.feature_len()];
    if !matches!(t.variant(), Variant::Isotropic { .. }) {
        for (p, ci) in points.iter().zip(c.iter()) {
            for (d, f) in dual.iter_mut().zip(t.features(p)) {
                *d += ci.conj() * f;
            }
        }
    }
    Ok(Interpolant {
        tensor: t.clone(),
        points: points.to_vec(),
        coeffs: c.iter().copied().collect(),
        dual,
        diagnostics: Diagnostics {
            min_eigenvalue: min,
            max_eigenvalue: max,
            condition,
            residual,
            pseudo_inverse: mode == FitMode::Diagnostic,
        },
    })
}

/// A site with an optional value.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub point: SpherePoint,
    pub value: Option<Complex64>,
}

fn parse_field(record: &csv::StringRecord, i: usize, name: &str, line: u64) -> Result<f64> {
    let raw = record
        .get(i)
        .ok_or_else(|| Error::Parse(format!("line {line}: missing `{name}`")))?;
    raw.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: `{name}` = {raw:?} is not a number")))
}

fn header_positions(headers: &csv::StringRecord, wanted: &[&str]) -> Result<Vec<Option<usize>>> {
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if let Some(extra) = names.iter().find(|n| !wanted.contains(n)) {
        return Err(Error::Parse(format!(
            "unexpected column `{extra}`; expected {}",
            wanted.join(",")
        )));
    }
    Ok(wanted
        .iter()
        .map(|w| names.iter().position(|n| n == w))
        .collect())
}

/// Reads `theta,phi[,value_re,value_im]` records with a header row.
/// Duplicate sites are rejected.
pub fn read_sites(reader: impl Read) -> Result<Vec<Site>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let pos = header_positions(rdr.headers()?, &["theta", "phi", "value_re", "value_im"])?;
    let (Some(ti), Some(pi)) = (pos[0], pos[1]) else {
        return Err(Error::Parse(
            "site file needs `theta` and `phi` columns".into(),
        ));
    };
    let (re_i, im_i) = (pos[2], pos[3]);
    if im_i.is_some() && re_i.is_none() {
        return Err(Error::Parse("`value_im` given without `value_re`".into()));
    }
    let mut sites = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = n as u64 + 2;
        let point = SpherePoint::new(
            parse_field(&rec, ti, "theta", line)?,
            parse_field(&rec, pi, "phi", line)?,
        )
        .map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        let value = match re_i {
            None => None,
            Some(r) => {
                let im = match im_i {
                    Some(i) => parse_field(&rec, i, "value_im", line)?,
                    None => 0.0,
                };
                Some(Complex64::new(parse_field(&rec, r, "value_re", line)?, im))
            }
        };
        sites.push(Site { point, value });
    }
    let points: Vec<SpherePoint> = sites.iter().map(|s| s.point).collect();
    if let Some((i, j)) = find_duplicate(&points) {
        return Err(Error::DuplicatePoints(i, j));
    }
    Ok(sites)
}

/// Reads a `value_re[,value_im]` file with a header row.
pub fn read_values(reader: impl Read) -> Result<Vec<Complex64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let pos = header_positions(rdr.headers()?, &["value_re", "value_im"])?;
    let Some(re_i) = pos[0] else {
        return Err(Error::Parse("value file needs a `value_re` column".into()));
    };
    let mut out = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = n as u64 + 2;
        let im = match pos[1] {
            Some(i) => parse_field(&rec, i, "value_im", line)?,
            None => 0.0,
        };
        out.push(Complex64::new(
            parse_field(&rec, re_i, "value_re", line)?,
            im,
        ));
    }
    Ok(out)
}

pub fn read_sites_file(path: impl AsRef<Path>) -> Result<Vec<Site>> {
    read_sites(std::fs::File::open(path)?)
}

pub fn read_values_file(path: impl AsRef<Path>) -> Result<Vec<Complex64>> {
    read_values(std::fs::File::open(path)?)
}

/// Writes `theta,phi,value_re,value_im` records in shortest round-trip form.
pub fn write_sites(writer: impl Write, points: &[SpherePoint], values: &[Complex64]) -> Result<()> {
    if points.len() != values.len() {
        return Err(Error::LengthMismatch {
            points: points.len(),
            values: values.len(),
        });
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta", "phi", "value_re", "value_im"])?;
    for (p, v) in points.iter().zip(values) {
        w.write_record([p.theta(), p.phi(), v.re, v.im].map(|x| format!("{x:?}")))?;
    }
    w.flush()?;
    Ok(())
}
