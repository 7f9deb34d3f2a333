use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{harmonic_count, harmonics_upto, HarmonicIndex, SpherePoint};
use crate::quadrature::sphere_rule;

/// `g(ξ) = Σ_ℓ ĝ_ℓ F_ℓ(ξ)` with finitely many coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedFunction {
    coeffs: Vec<Complex64>,
    j_max: usize,
}

impl BandLimitedFunction {
    /// Coefficients in flat order (`coeffs[ℓ-1] = ĝ_ℓ`); the vector is
    /// zero-padded up to the next complete degree.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain(
                "a band-limited function needs at least one coefficient".into(),
            ));
        }
        let j_max = HarmonicIndex::from_flat(coeffs.len())?.j();
        coeffs.resize(harmonic_count(j_max), Complex64::new(0.0, 0.0));
        Ok(Self { coeffs, j_max })
    }

    /// The function `f = Σ y_ℓ conj(F_ℓ)`, whose pairings `∫ f F_ℓ` are
    /// exactly `y_ℓ`. This is the function to discretize when `y` is a
    /// coefficient-space direction of the kernel's quadratic form.
    pub fn from_direction(y: &[Complex64]) -> Result<Self> {
        let f = Self::new(y.to_vec())?;
        Ok(Self {
            coeffs: f.swap_orders(),
            j_max: f.j_max,
        })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn evaluate(&self, p: &SpherePoint) -> Complex64 {
        harmonics_upto(self.j_max, p)
            .iter()
            .zip(&self.coeffs)
            .map(|(y, c)| y * c)
            .sum()
    }

    /// `y_ℓ = ∫ g F_ℓ dξ`, computed exactly from the coefficients via
    /// `∫ Y_j^k Y_j'^k' = (-1)^k δ_{jj'} δ_{k,-k'}`.
    pub fn paired_coefficients(&self) -> Vec<Complex64> {
        self.swap_orders()
    }

    /// `(j,k) ↦ (-1)^k · coeff(j,-k)`, an involution.
    fn swap_orders(&self) -> Vec<Complex64> {
        (0..self.coeffs.len())
            .map(|slot| {
                let idx = HarmonicIndex::from_flat(slot + 1).unwrap();
                let mirror = HarmonicIndex::new(idx.j(), -idx.k()).unwrap();
                let v = self.coeffs[mirror.slot()];
                if idx.k().rem_euclid(2) == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }

    /// `Σ |ĝ_ℓ|²`.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `‖g‖²_{L²}` by the product rule with resolution `m`; exact when
    /// `2 j_max ≤ 2m − 1`.
    pub fn l2_norm_sq(&self, m: usize) -> Result<f64> {
        let rule = sphere_rule(m)?;
        Ok(rule.integrate_real(|p| self.evaluate(p).norm_sqr()))
    }
}
