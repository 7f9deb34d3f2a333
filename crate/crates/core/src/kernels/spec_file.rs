//! JSON kernel spec documents.
//!
//! ```json
//! {
//!   "variant": "isotropic",
//!   "j_max": 2,
//!   "c": [1.0, 0.5, 0.25],
//!   "tail": { "family": "powerlaw", "params": { "scale": 1.0, "exponent": 4.0 }, "parity": "both" }
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. The coefficient field depends on the
//! variant: `a` (full, with `l_max`), `blocks`, `axial` (list of `{k, c}`),
//! `c` (isotropic) or `diag`. Floats are written in shortest round-trip form,
//! so `parse(serialize(T)) == T` bit for bit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CoefficientTensor, Tail, TailFamily, TailParity, Variant};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    variant: String,
    j_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    l_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<RawMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axial: Option<Vec<RawOrder>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diag: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<RawTail>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrder {
    k: isize,
    c: RawMatrix,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTail {
    family: String,
    params: RawTailParams,
    parity: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTailParams {
    scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    heat: Option<f64>,
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::SpecField {
        field: field.into(),
        message: message.into(),
    }
}

fn require<T>(value: Option<T>, field: &str, variant: &str) -> Result<T> {
    value.ok_or_else(|| field_err(field, format!("required for variant `{variant}`")))
}

fn to_matrix(raw: &RawMatrix, field: &str) -> Result<CMatrix> {
    let n = raw.len();
    if let Some(i) = raw.iter().position(|row| row.len() != n) {
        return Err(field_err(
            format!("{field}[{i}]"),
            format!("expected {n} entries to form a square matrix"),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| {
        Complex64::new(raw[r][c][0], raw[r][c][1])
    }))
}

fn from_matrix(m: &CMatrix) -> RawMatrix {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

/// Field names are attached to construction errors so messages point at the
/// offending part of the document.
fn with_field<T>(res: Result<T>, field: &str) -> Result<T> {
    res.map_err(|e| match e {
        Error::SpecField { .. } => e,
        other => field_err(field, other.to_string()),
    })
}

/// Parses a kernel spec document.
pub fn parse_kernel_spec(text: &str) -> Result<CoefficientTensor> {
    let raw: RawSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("kernel spec: {e}")))?;
    let v = raw.variant.as_str();
    let tensor = match v {
        "full" => {
            let a = to_matrix(&require(raw.a, "a", v)?, "a")?;
            let l_max = require(raw.l_max, "l_max", v)?;
            if a.nrows() != l_max {
                return Err(field_err(
                    "l_max",
                    format!("{l_max} disagrees with the {}x{0} matrix `a`", a.nrows()),
                ));
            }
            with_field(CoefficientTensor::full(a), "a")?
        }
        "block_diagonal" => {
            let blocks = require(raw.blocks, "blocks", v)?
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let field = format!("blocks[{j}]");
                    if b.len() != 2 * j + 1 {
                        return Err(field_err(
                            field,
                            format!("degree {j} block must be {0}x{0}", 2 * j + 1),
                        ));
                    }
                    to_matrix(b, &field)
                })
                .collect::<Result<Vec<_>>>()?;
            with_field(CoefficientTensor::block_diagonal(blocks), "blocks")?
        }
        "axially_symmetric" => {
            let orders = require(raw.axial, "axial", v)?;
            let j_max = raw.j_max;
            if orders.len() != 2 * j_max + 1 {
                return Err(field_err(
                    "axial",
                    format!("expected {} orders for j_max = {j_max}", 2 * j_max + 1),
                ));
            }
            let mut mats = Vec::with_capacity(orders.len());
            for (i, o) in orders.iter().enumerate() {
                let k = i as isize - j_max as isize;
                if o.k != k {
                    return Err(field_err(
                        format!("axial[{i}].k"),
                        format!("expected order {k}, found {}", o.k),
                    ));
                }
                mats.push(to_matrix(&o.c, &format!("axial[{i}].c"))?);
            }
            with_field(CoefficientTensor::axially_symmetric(j_max, mats), "axial")?
        }
        "isotropic" => with_field(CoefficientTensor::isotropic(require(raw.c, "c", v)?), "c")?,
        "diagonal" => with_field(
            CoefficientTensor::diagonal(require(raw.diag, "diag", v)?),
            "diag",
        )?,
        other => return Err(field_err("variant", format!("unknown variant `{other}`"))),
    };
    if tensor.j_max() != raw.j_max {
        return Err(field_err(
            "j_max",
            format!(
                "declared {} but the coefficients reach degree {}",
                raw.j_max,
                tensor.j_max()
            ),
        ));
    }
    match raw.tail {
        None => Ok(tensor),
        Some(t) => {
            let tail = parse_tail(t)?;
            with_field(tensor.with_tail(tail), "tail")
        }
    }
}

fn parse_tail(t: RawTail) -> Result<Tail> {
    let family = match t.family.as_str() {
        "powerlaw" => TailFamily::PowerLaw {
            scale: t.params.scale,
            exponent: t.params.exponent.ok_or_else(|| {
                field_err("tail.params.exponent", "required for family `powerlaw`")
            })?,
        },
        "geometric" => TailFamily::Geometric {
            scale: t.params.scale,
            ratio: t
                .params
                .ratio
                .ok_or_else(|| field_err("tail.params.ratio", "required for family `geometric`"))?,
        },
        other => {
            return Err(field_err(
                "tail.family",
                format!("unknown family `{other}`"),
            ))
        }
    };
    let parity = match t.parity.as_str() {
        "both" => TailParity::Both,
        "even" => TailParity::Even,
        "odd" => TailParity::Odd,
        "finite" => TailParity::Finite,
        other => {
            return Err(field_err(
                "tail.parity",
                format!("unknown parity `{other}`"),
            ))
        }
    };
    Ok(Tail {
        family,
        parity,
        damping: t.params.heat.unwrap_or(0.0),
    })
}

/// Serializes a tensor as a pretty-printed kernel spec document.
pub fn to_kernel_spec(t: &CoefficientTensor) -> String {
    let mut raw = RawSpec {
        variant: t.variant_name().to_string(),
        j_max: t.j_max(),
        l_max: None,
        a: None,
        blocks: None,
        axial: None,
        c: None,
        diag: None,
        tail: None,
    };
    match t.variant() {
        Variant::Full { a } => {
            raw.l_max = Some(a.nrows());
            raw.a = Some(from_matrix(a));
        }
        Variant::BlockDiagonal { blocks } => {
            raw.blocks = Some(blocks.iter().map(from_matrix).collect())
        }
        Variant::AxiallySymmetric { j_max, orders } => {
            raw.axial = Some(
                orders
                    .iter()
                    .enumerate()
                    .map(|(i, m)| RawOrder {
                        k: i as isize - *j_max as isize,
                        c: from_matrix(m),
                    })
                    .collect(),
            )
        }
        Variant::Isotropic { c } => raw.c = Some(c.clone()),
        Variant::Diagonal { a } => raw.diag = Some(a.clone()),
    }
    raw.tail = t.tail().map(|tail| {
        let (family, exponent, ratio, scale) = match tail.family {
            TailFamily::PowerLaw { scale, exponent } => ("powerlaw", Some(exponent), None, scale),
            TailFamily::Geometric { scale, ratio } => ("geometric", None, Some(ratio), scale),
        };
        RawTail {
            family: family.into(),
            params: RawTailParams {
                scale,
                exponent,
                ratio,
                heat: (tail.damping != 0.0).then_some(tail.damping),
            },
            parity: tail.parity.name().into(),
        }
    });
    let mut s = serde_json::to_string_pretty(&raw).expect("kernel spec serializes");
    s.push('\n');
    s
}
