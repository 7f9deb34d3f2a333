//! Hermitian kernels on the unit sphere S².
//!
//! A kernel is represented by its spherical-harmonic coefficient tensor
//!
//! ```text
//! K(ξ, ζ) = Σ_{j,j',k,k'} α_{j,j',k,k'} Y_j^k(ξ) conj(Y_{j'}^{k'}(ζ))
//! ```
//!
//! and this crate answers three questions about it:
//!
//! * is `K` positive definite, and if so is it *strictly* positive definite
//!   ([`certify`]);
//! * if it is not (strictly) positive definite, which finite point set and
//!   coefficient vector shows it ([`witness`]);
//! * given data on distinct sites, what is the kernel interpolant
//!   ([`interpolate`]).
//!
//! The numerical building blocks live in [`harmonics`] (Legendre functions and
//! complex spherical harmonics with the Condon–Shortley phase) and
//! [`quadrature`] (Gauss–Legendre and the product rule on the sphere).
//!
//! ```
//! use spherekern::kernels::{CoefficientTensor, Tail, TailFamily, TailParity};
//! use spherekern::certify::{certify, Verdict};
//!
//! let c: Vec<f64> = (0..=10).map(|j| (1.0 + j as f64).powi(-4)).collect();
//! let tail = Tail::new(TailFamily::PowerLaw { scale: 1.0, exponent: 4.0 }, TailParity::Both);
//! let kernel = CoefficientTensor::isotropic(c)?.with_tail(tail)?;
//! let cert = certify(&kernel, 20, 1e-10)?;
//! assert_eq!(cert.verdict, Verdict::StrictlyPositiveDefinite);
//! # Ok::<(), spherekern::Error>(())
//! ```

pub mod certify;
mod error;
pub mod harmonics;
pub mod interpolate;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod witness;

pub use error::{Error, Result};
pub use harmonics::{HarmonicIndex, SpherePoint};
pub use kernels::CoefficientTensor;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
