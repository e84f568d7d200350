//! Polynomial and small dense-matrix numerics.
//!
//! Everything here is sized for the degrees that appear in single-diffuser
//! stability analysis (n ≤ ~6). Roots come from the eigenvalues of a balanced
//! companion matrix, eigenvalues from a Hessenberg reduction followed by
//! Francis double-shift QR, and characteristic polynomials from the
//! Faddeev-LeVerrier recursion.

mod eigen;
mod hurwitz;
mod matrix;
mod poly;
pub(crate) mod roots;

pub use eigen::eigenvalues;
pub use hurwitz::{hurwitz_by_coefficients, hurwitz_by_roots, is_hurwitz};
pub use matrix::Matrix;
pub use poly::Poly;
pub use roots::{poly_roots, poly_roots_with, ComplexRootSet, Root};

use crate::{Error, Result};

/// Numerical tolerances shared by the numerics routines.
///
/// `scale` in the comments below is `1 + max |coefficient|` of the polynomial
/// being examined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Root back-substitution residual bound, relative to `(1 + |r|)^deg`.
    pub root: f64,
    /// Agreement between independent eigenvalue routes.
    pub eig: f64,
    /// Imaginary parts below `conj * (1 + |r|)` are treated as zero.
    pub conj: f64,
    /// Hurwitz margin: all real parts must be below `-hurwitz * scale`.
    pub hurwitz: f64,
    /// Roots closer than `merge * (1 + |r|)` are grouped into one multiple
    /// root.
    pub merge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root: 1e-9,
            eig: 1e-8,
            conj: 1e-8,
            hurwitz: 1e-9,
            merge: 1e-6,
        }
    }
}

/// Characteristic polynomial `det(sI - M)` via Faddeev-LeVerrier.
///
/// The result is monic of degree `n`.
pub fn char_poly(m: &Matrix) -> Result<Poly> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::Dimension {
            expected: "square matrix with n >= 1",
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = m.rows();
    // M_k = A M_{k-1} + c_{n-k+1} I,  c_{n-k} = -tr(A M_k) / k
    let mut coeffs = alloc::vec![0.0; n + 1];
    coeffs[0] = 1.0;
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        let mut next = m.mul(&mk)?;
        for i in 0..n {
            next[(i, i)] += coeffs[k - 1];
        }
        let am = m.mul(&next)?;
        coeffs[k] = -am.trace() / k as f64;
        mk = next;
    }
    Ok(Poly::new(coeffs))
}
