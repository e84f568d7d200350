use super::roots::raw_roots;
use super::{Poly, Tolerances};
use crate::{Error, Result};

/// Whether every root of `p` lies strictly in the open left half-plane.
///
/// Degrees 1 to 3 use the coefficient inequalities directly; higher degrees
/// compute the roots and require `max Re < -tol.hurwitz * scale`.
pub fn is_hurwitz(p: &Poly) -> Result<bool> {
    let tol = Tolerances::default();
    match hurwitz_by_coefficients(p)? {
        Some(stable) => Ok(stable),
        None => hurwitz_by_roots(p, &tol),
    }
}

/// Closed-form test for degree ≤ 3, `None` above that.
///
/// For the monic cubic `s³ + a₂s² + a₁s + a₀` this is
/// `a₂ > 0, a₁a₂ − a₀ > 0, a₀ > 0`.
pub fn hurwitz_by_coefficients(p: &Poly) -> Result<Option<bool>> {
    let m = monic_checked(p)?;
    let c = m.coeffs();
    Ok(match c.len() - 1 {
        1 => Some(c[1] > 0.0),
        2 => Some(c[1] > 0.0 && c[2] > 0.0),
        3 => {
            let (a2, a1, a0) = (c[1], c[2], c[3]);
            Some(a2 > 0.0 && a1 * a2 - a0 > 0.0 && a0 > 0.0)
        }
        _ => None,
    })
}

/// Root-based test, valid for any degree.
pub fn hurwitz_by_roots(p: &Poly, tol: &Tolerances) -> Result<bool> {
    let m = monic_checked(p)?;
    let max_re = raw_roots(&m)?
        .into_iter()
        .map(|r| r.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(max_re < -tol.hurwitz * m.scale())
}

fn monic_checked(p: &Poly) -> Result<Poly> {
    match p.degree() {
        None => Err(Error::InvalidInput("zero polynomial")),
        Some(0) => Err(Error::InvalidInput("constant polynomial")),
        Some(_) => Ok(p.monic()),
    }
}
