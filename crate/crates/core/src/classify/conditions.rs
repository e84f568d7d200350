//! Exact Type-I tests: the imaginary-axis crossing search and the
//! closed-form three-species inequalities.

use alloc::vec::Vec;

use num_complex::Complex64;

use super::scan::scan_rightmost;
use crate::model::{LinearSystem, RationalTransfer};
use crate::numerics::{is_hurwitz, poly_roots, Matrix, Poly};
use crate::{Error, Result};

/// Which crossing condition was searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma3Branch {
    /// `Ã` Hurwitz: look for `p(λ, jω) = 0`.
    IiA,
    /// `Ã` not Hurwitz: look for `p(λ, β + jω) = 0`.
    IiB,
    /// `A` itself is not Hurwitz, nothing was searched.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma3Result {
    pub satisfied: bool,
    pub branch: Lemma3Branch,
    /// `(λ, s)` with `λ > 0` and `p(λ, s) = 0` on the searched line.
    pub witness: Option<(f64, Complex64)>,
}

/// Searches for a positive gain placing a closed-loop pole on the line
/// `Re s = σ`, where `σ = 0` if `Ã` is Hurwitz and `σ = β = max Re spec(Ã)`
/// otherwise.
///
/// Writing `D(ω) = d(σ + jω)` and `N(ω) = n(σ + jω)`, a real gain exists iff
/// `Im(D N̄) = 0`, which is a real polynomial in `ω`; every real root then
/// yields `λ = −Re(D N̄)/|N|²`.
pub fn lemma3_check(sys: &LinearSystem) -> Result<Lemma3Result> {
    let tf = sys.transfer_function()?;
    if !is_hurwitz(tf.den())? {
        return Ok(Lemma3Result {
            satisfied: false,
            branch: Lemma3Branch::None,
            witness: None,
        });
    }
    let (branch, sigma) = if is_hurwitz(tf.num())? {
        (Lemma3Branch::IiA, 0.0)
    } else {
        (Lemma3Branch::IiB, poly_roots(tf.num())?.max_real())
    };
    let witness = line_crossing(&tf, sigma)?;
    Ok(Lemma3Result {
        satisfied: witness.is_some(),
        branch,
        witness,
    })
}

/// First `(λ, s)` with `λ > 0`, `Re s = sigma` and `p(λ, s) = 0`, preferring
/// the largest `|Im s|`.
pub fn line_crossing(tf: &RationalTransfer, sigma: f64) -> Result<Option<(f64, Complex64)>> {
    let (dr, di) = on_vertical_line(tf.den(), sigma);
    let (nr, ni) = on_vertical_line(tf.num(), sigma);
    let g = &(&di * &nr) - &(&dr * &ni);

    let mut candidates: Vec<f64> = alloc::vec![0.0];
    if g.degree().unwrap_or(0) >= 1 {
        let roots = poly_roots(&g)?;
        for r in roots.roots() {
            let w = r.value;
            if w.im.abs() <= 1e-7 * (1.0 + w.re.abs()) && w.re != 0.0 {
                candidates.push(w.re.abs());
            }
        }
    }
    candidates.sort_by(|a, b| b.total_cmp(a));
    for omega in candidates {
        let s = Complex64::new(sigma, omega);
        let dv = tf.den().eval_complex(s);
        let nv = tf.num().eval_complex(s);
        // A zero of N on the line is reached only as λ → ∞.
        if nv.norm() <= 1e-9 * tf.num().eval_abs(s) || dv.norm() == 0.0 {
            continue;
        }
        // D and N must be (anti)parallel; roots of g that come from a zero of
        // N on the line are not crossings.
        let prod = dv * nv.conj();
        if prod.im.abs() > 1e-6 * dv.norm() * nv.norm() {
            continue;
        }
        let lambda = -prod.re / nv.norm_sqr();
        if lambda > 0.0 && lambda.is_finite() {
            return Ok(Some((lambda, s)));
        }
    }
    Ok(None)
}

/// Real and imaginary parts of `p(σ + jω)` as real polynomials in `ω`.
fn on_vertical_line(p: &Poly, sigma: f64) -> (Poly, Poly) {
    let shifted = p.taylor_shift(sigma);
    let deg = shifted.degree().unwrap_or(0);
    let mut re = alloc::vec![0.0; deg + 1];
    let mut im = alloc::vec![0.0; deg + 1];
    for m in 0..=deg {
        let c = shifted.coeff(m);
        // j^m cycles through 1, j, -1, -j
        let slot = deg - m;
        match m % 4 {
            0 => re[slot] = c,
            1 => im[slot] = c,
            2 => re[slot] = -c,
            _ => im[slot] = -c,
        }
    }
    (Poly::new(re), Poly::new(im))
}

/// Flags of the closed-form three-species conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionFlags {
    /// `A` Hurwitz.
    pub i: bool,
    /// Crossing with `Ã` Hurwitz.
    pub ii_a: bool,
    /// Crossing with `Ã` not Hurwitz.
    pub ii_b: bool,
}

impl ConditionFlags {
    /// `I ∧ (II-A ∨ II-B)`.
    pub fn type_one(&self) -> bool {
        self.i && (self.ii_a || self.ii_b)
    }
}

/// The characteristic coefficients `α₂, α₁, α₀` of `A` and `α̃₁, α̃₀` of `Ã`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alphas {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    pub t1: f64,
    pub t0: f64,
}

impl Alphas {
    pub fn of(sys: &LinearSystem) -> Result<Self> {
        if sys.n() != 3 {
            let m = sys.matrix();
            return Err(Error::Dimension {
                expected: "3x3 system",
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let tf = sys.transfer_function()?;
        let (d, n) = (tf.den(), tf.num());
        Ok(Self {
            a2: d.coeff(2),
            a1: d.coeff(1),
            a0: d.coeff(0),
            t1: n.coeff(1),
            t0: n.coeff(0),
        })
    }

    pub fn flags(&self) -> ConditionFlags {
        let Self { a2, a1, a0, t1, t0 } = *self;
        let hurwitz_gap = a1 * a2 - a0;
        let i = a2 > 0.0 && hurwitz_gap > 0.0 && a0 > 0.0;
        let ii_a =
            t1 > 0.0 && t0 > 0.0 && t1 * hurwitz_gap >= 0.0 && a1 + t1 * a2 - t0 <= -2.0 * libm::sqrt(t1 * hurwitz_gap);
        let ii_b = t1 <= 0.0 && t1 * t1 - 4.0 * t0 < 0.0 && -t1 * t1 + t0 + t1 * a2 - a1 > 0.0;
        ConditionFlags { i, ii_a, ii_b }
    }

    /// Signed slack of every inequality; a value near zero means the sample
    /// sits on a boundary of the region.
    pub fn margins(&self) -> [f64; 9] {
        let Self { a2, a1, a0, t1, t0 } = *self;
        let gap = a1 * a2 - a0;
        [
            a2,
            gap,
            a0,
            t1,
            t0,
            -2.0 * libm::sqrt((t1 * gap).max(0.0)) - (a1 + t1 * a2 - t0),
            4.0 * t0 - t1 * t1,
            -t1 * t1 + t0 + t1 * a2 - a1,
            t1 * gap,
        ]
    }
}

/// Closed-form Type-I conditions for `n = 3`.
pub fn theorem2_conditions(sys: &LinearSystem) -> Result<ConditionFlags> {
    Ok(Alphas::of(sys)?.flags())
}

/// For a Hurwitz 2×2 `A`, true iff a dense gain scan finds no finite-gain
/// rightmost pole that is both in the closed right half-plane and strictly
/// right of the locus endpoint `β`. Two-species single-diffuser systems
/// cannot be Type-I, so this is expected to hold for every input.
pub fn theorem1_property(a: &Matrix) -> Result<bool> {
    if a.rows() != 2 || a.cols() != 2 {
        return Err(Error::Dimension {
            expected: "2x2 matrix",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let sys = LinearSystem::new(a.clone())?;
    let tf = sys.transfer_function()?;
    if !is_hurwitz(tf.den())? {
        return Err(Error::Precondition("A must be Hurwitz"));
    }
    let scale = 1.0 + a.norm_inf();
    let tol_dom = super::DOMINANCE_REL_TOL * scale;
    let beta = poly_roots(tf.num())?.max_real();
    let scan = scan_rightmost(&tf, 1e-6 * scale, 1e6 * scale, 2000)?;
    let type_one = scan.max_real >= 0.0 && scan.max_real > beta + tol_dom;
    Ok(!type_one)
}
