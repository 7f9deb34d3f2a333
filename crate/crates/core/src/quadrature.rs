//! Gauss–Legendre rules on `[-1, 1]` and the product rule on S².
//!
//! The sphere rule with resolution `m` places `m` colatitudes at the
//! Gauss–Legendre nodes `cos θ_i` and `2m` equispaced longitudes `φ = πj/m`,
//! `j = 1..=2m`, with weights `(π/m) w_i`. It integrates `Y_j^k conj(Y_{j'}^{k'})`
//! exactly whenever `j + j' ≤ 2m − 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::harmonics::SpherePoint;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights of the `m`-point Gauss–Legendre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Strictly increasing nodes in `(-1, 1)`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_{-1}^{1} f(t) dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// `(P_m(t), P_{m-1}(t))`.
fn legendre_pair(m: usize, t: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = t;
    for n in 1..m {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0) * t * cur - nf * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn legendre_derivative(m: usize, t: f64) -> f64 {
    let (pm, pm1) = legendre_pair(m, t);
    m as f64 * (t * pm - pm1) / (t * t - 1.0)
}

/// Computes the `m`-point Gauss–Legendre rule by Newton iteration on `P_m`.
///
/// Only the positive half of the nodes is iterated; the negative half is its
/// mirror image so the rule is exactly symmetric.
pub fn gauss_legendre(m: usize) -> Result<GaussRule> {
    if m == 0 {
        return Err(domain("a Gauss rule needs at least one node"));
    }
    let mf = m as f64;
    let half = m / 2;
    let mut positive = Vec::with_capacity(half);
    for i in 0..half {
        let mut t = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (pm, pm1) = legendre_pair(m, t);
            let dp = mf * (t * pm - pm1) / (t * t - 1.0);
            let dt = pm / dp;
            t -= dt;
            if dt.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(format!(
                "Newton iteration for root {i} of P_{m} did not reach {NEWTON_TOL:e}"
            )));
        }
        let dp = legendre_derivative(m, t);
        positive.push((t, 2.0 / ((1.0 - t * t) * dp * dp)));
    }
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for &(t, w) in &positive {
        nodes.push(-t);
        weights.push(w);
    }
    if m % 2 == 1 {
        let dp = legendre_derivative(m, 0.0);
        nodes.push(0.0);
        weights.push(2.0 / (dp * dp));
    }
    for &(t, w) in positive.iter().rev() {
        nodes.push(t);
        weights.push(w);
    }
    Ok(GaussRule { nodes, weights })
}

/// Product Gauss rule on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    m: usize,
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ w_p f(p)`, accumulated in point order.
    pub fn integrate(&self, f: impl Fn(&SpherePoint) -> Complex64) -> Complex64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| f(p) * w)
            .sum()
    }

    pub fn integrate_real(&self, f: impl Fn(&SpherePoint) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * f(p))
            .sum()
    }
}

/// Builds the `2m·m`-point product rule.
pub fn sphere_rule(m: usize) -> Result<SphereRule> {
    let gauss = gauss_legendre(m)?;
    let scale = PI / m as f64;
    let mut points = Vec::with_capacity(2 * m * m);
    let mut weights = Vec::with_capacity(2 * m * m);
    for (&t, &w) in gauss.nodes().iter().zip(gauss.weights()) {
        let theta = t.acos();
        for j in 1..=2 * m {
            points.push(SpherePoint::new(theta, PI * j as f64 / m as f64)?);
            weights.push(scale * w);
        }
    }
    Ok(SphereRule { m, points, weights })
}

/// `Σ_{p,q} w_p w_q K(p, q)`, the tensor-product rule on S² × S².
pub fn tensor_integrate(
    rule: &SphereRule,
    kernel: impl Fn(&SpherePoint, &SpherePoint) -> Complex64,
) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for (p, &wp) in rule.points.iter().zip(&rule.weights) {
        let row: Complex64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(q, &wq)| kernel(p, q) * wq)
            .sum();
        total += row * wp;
    }
    total
}

/// `n` nearly uniform points on a golden-angle spiral, ordered from the north
/// pole down. Handy for evaluation grids and well-separated node sets.
pub fn fibonacci_points(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let phi = golden * i as f64;
            let r = (1.0 - z * z).sqrt();
            SpherePoint::from_xyz([r * phi.cos(), r * phi.sin(), z]).expect("unit vector")
        })
        .collect()
}
