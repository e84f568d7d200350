//! The linearized single-diffuser system and its root-locus family.
//!
//! The diffusing species is always stored last, so with
//! `A = [[Ã, b], [cᵀ, d]]` the local reaction dynamics seen by the diffusion
//! feedback are `h(s) = n(s)/d(s) = |sI − Ã| / |sI − A|`, and the subsystem
//! for spatial mode `k` has characteristic polynomial `d(s) + λ_k n(s)` with
//! `λ_k = μ (kπ/L)²`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::{char_poly, poly_roots_with, Matrix, Poly, Tolerances};
use crate::{Error, Result};

/// Backward-error threshold for a numerator root to count as a root of the
/// denominator too.
const CANCELLATION_TOL: f64 = 1e-7;

/// Jacobian of the local reactions at a homogeneous equilibrium, with the
/// diffuser in the last row/column.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
}

/// `A = [[a_tilde, b], [cᵀ, d]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub a_tilde: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

impl LinearSystem {
    /// Wraps `a`, assuming the last species is the diffuser.
    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension {
                expected: "square matrix",
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if a.rows() < 2 {
            return Err(Error::InvalidModel("at least two species are required"));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { a })
    }

    /// Moves species `diffuser` (0-based) to the last position, keeping the
    /// relative order of the others.
    pub fn with_diffuser(a: Matrix, diffuser: usize) -> Result<Self> {
        if diffuser >= a.rows() {
            return Err(Error::InvalidModel("diffuser index out of range"));
        }
        let sys = Self::new(a)?;
        let n = sys.n();
        if diffuser == n - 1 {
            return Ok(sys);
        }
        let perm: Vec<usize> = (0..n).filter(|&i| i != diffuser).chain([diffuser]).collect();
        Ok(Self {
            a: sys.a.permuted(&perm),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// Number of species.
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn partition(&self) -> Partition {
        let m = self.n() - 1;
        Partition {
            a_tilde: self.a.block(0, 0, m, m),
            b: (0..m).map(|i| self.a[(i, m)]).collect(),
            c: (0..m).map(|j| self.a[(m, j)]).collect(),
            d: self.a[(m, m)],
        }
    }

    /// True when the diffuser neither affects nor is affected by the other
    /// species (`b = 0` and `c = 0`).
    pub fn is_decoupled(&self) -> bool {
        let p = self.partition();
        p.b.iter().chain(&p.c).all(|&v| v == 0.0)
    }

    pub fn transfer_function(&self) -> Result<RationalTransfer> {
        let num = char_poly(&self.partition().a_tilde)?;
        let den = char_poly(&self.a)?;
        Ok(RationalTransfer { num, den })
    }
}

impl Partition {
    pub fn assemble(&self) -> Matrix {
        let m = self.a_tilde.rows();
        let mut a = Matrix::zeros(m + 1, m + 1);
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] = self.a_tilde[(i, j)];
            }
            a[(i, m)] = self.b[i];
            a[(m, i)] = self.c[i];
        }
        a[(m, m)] = self.d;
        a
    }
}

/// `h(s) = n(s) / d(s)` with monic `n` of degree `deg d − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTransfer {
    num: Poly,
    den: Poly,
}

impl RationalTransfer {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        match (num.degree(), den.degree()) {
            (Some(dn), Some(dd)) if dd >= 1 && dn + 1 == dd => Ok(Self {
                num: num.monic(),
                den: den.monic(),
            }),
            _ => Err(Error::InvalidModel(
                "transfer function must be strictly proper with relative degree 1",
            )),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// Species count `n = deg d`.
    pub fn order(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// `p(λ, s) = d(s) + λ n(s)`; `λ = 0` returns `d` unchanged.
    pub fn closed_loop_poly(&self, lambda: f64) -> Result<Poly> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidGain(lambda));
        }
        if lambda == 0.0 {
            return Ok(self.den.clone());
        }
        Ok(&self.den + &self.num.scaled(lambda))
    }

    /// Roots shared by `n` and `d` (pole-zero cancellations), one entry per
    /// distinct root.
    pub fn detect_cancellation(&self) -> Vec<Complex64> {
        self.detect_cancellation_with(&Tolerances::default())
    }

    pub fn detect_cancellation_with(&self, tol: &Tolerances) -> Vec<Complex64> {
        let Ok(zeros) = poly_roots_with(&self.num, tol) else {
            return Vec::new();
        };
        zeros
            .roots()
            .iter()
            .map(|r| r.value)
            .filter(|&z| {
                let mag = self.den.eval_abs(z);
                self.den.eval_complex(z).norm() <= CANCELLATION_TOL * mag.max(f64::MIN_POSITIVE)
            })
            .collect()
    }
}

/// `e_nᵀ (sI − A)⁻¹ e_n` by complex Gaussian elimination with partial
/// pivoting; `None` if `s` is (numerically) an eigenvalue.
pub fn resolvent_corner(a: &Matrix, s: Complex64) -> Option<Complex64> {
    let n = a.rows();
    let mut m: Vec<Complex64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            m.push(diag - a[(i, j)]);
        }
    }
    let mut rhs = alloc::vec![Complex64::new(0.0, 0.0); n];
    rhs[n - 1] = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))?;
        if m[piv * n + col].norm() == 0.0 {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            rhs.swap(piv, col);
        }
        let p = m[col * n + col];
        for i in col + 1..n {
            let f = m[i * n + col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[col * n + j];
                m[i * n + j] -= f * v;
            }
            let r = rhs[col];
            rhs[i] -= f * r;
        }
    }
    // only the last component is needed
    let x_last = rhs[n - 1] / m[n * n - 1];
    x_last.is_finite().then_some(x_last)
}

/// How feedback gains are sampled when classifying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaPolicy {
    /// Only the discrete gains `λ_k`, `k = 0..=k_max`.
    #[default]
    Discrete,
    /// A dense λ grid, treating the domain as arbitrarily long.
    Continuous,
}

/// Diffusion coefficient, domain length and mode-index policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialSpec {
    pub mu: f64,
    pub length: f64,
    pub k_max: usize,
    pub policy: LambdaPolicy,
}

impl SpatialSpec {
    pub const DEFAULT_K_MAX: usize = 200;

    pub fn new(mu: f64, length: f64, k_max: usize, policy: LambdaPolicy) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidModel("diffusion coefficient must be finite and >= 0"));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidModel("domain length must be finite and > 0"));
        }
        Ok(Self {
            mu,
            length,
            k_max,
            policy,
        })
    }

    /// `λ_k = μ (kπ/L)²`.
    pub fn mode_gain(&self, k: usize) -> f64 {
        let w = k as f64 * PI / self.length;
        self.mu * w * w
    }

    /// Smallest `k` whose gain is closest to `lambda`; `None` when `μ = 0`.
    pub fn nearest_mode(&self, lambda: f64) -> Option<usize> {
        if self.mu == 0.0 || !(lambda >= 0.0) {
            return None;
        }
        let k = self.length / PI * libm::sqrt(lambda / self.mu);
        Some(libm::round(k) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> LinearSystem {
        LinearSystem::new(Matrix::from_rows(&[[-1.0, 1.0], [1.0, -2.0]]).unwrap()).unwrap()
    }

    #[test]
    fn partition_of_two_by_two() {
        let p = two_by_two().partition();
        assert_eq!(p.a_tilde, Matrix::from_rows(&[[-1.0]]).unwrap());
        assert_eq!(p.b, [1.0]);
        assert_eq!(p.c, [1.0]);
        assert_eq!(p.d, -2.0);
        assert_eq!(p.assemble(), *two_by_two().matrix());
    }

    #[test]
    fn partition_of_identity() {
        let sys = LinearSystem::new(Matrix::identity(4)).unwrap();
        let p = sys.partition();
        assert_eq!(p.a_tilde, Matrix::identity(3));
        assert_eq!(p.b, [0.0; 3]);
        assert_eq!(p.c, [0.0; 3]);
        assert_eq!(p.d, 1.0);
        assert!(sys.is_decoupled());
    }

    #[test]
    fn single_species_rejected() {
        assert!(matches!(
            LinearSystem::new(Matrix::diag(&[-1.0])),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            LinearSystem::new(Matrix::zeros(2, 3)),
            Err(Error::Dimension { .. })
        ));
        let nan = Matrix::from_rows(&[[f64::NAN, 0.0], [0.0, -1.0]]).unwrap();
        assert_eq!(LinearSystem::new(nan), Err(Error::NonFinite));
    }

    #[test]
    fn transfer_function_by_hand() {
        // det(sI - A) = (s+1)(s+2) - 1
        let tf = two_by_two().transfer_function().unwrap();
        assert_eq!(tf.num().coeffs(), &[1.0, 1.0]);
        assert_eq!(tf.den().coeffs(), &[1.0, 3.0, 1.0]);
        assert_eq!(tf.closed_loop_poly(1.0).unwrap().coeffs(), &[1.0, 4.0, 2.0]);
        assert_eq!(tf.closed_loop_poly(0.0).unwrap(), *tf.den());
        assert_eq!(tf.closed_loop_poly(-1.0), Err(Error::InvalidGain(-1.0)));
    }

    #[test]
    fn decoupled_diffuser_cancels() {
        let sys = LinearSystem::new(Matrix::diag(&[-1.0, -2.0])).unwrap();
        let tf = sys.transfer_function().unwrap();
        assert_eq!(tf.num().coeffs(), &[1.0, 1.0]);
        assert_eq!(tf.den().coeffs(), &[1.0, 3.0, 2.0]);
        let shared = tf.detect_cancellation();
        assert_eq!(shared.len(), 1);
        assert!((shared[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!(two_by_two()
            .transfer_function()
            .unwrap()
            .detect_cancellation()
            .is_empty());
    }

    #[test]
    fn diffuser_reordering() {
        let a = Matrix::from_rows(&[[-3.0, 1.0, 0.5], [2.0, -1.0, 0.0], [0.0, 4.0, -2.0]]).unwrap();
        let sys = LinearSystem::with_diffuser(a.clone(), 0).unwrap();
        // order becomes (1, 2, 0)
        assert_eq!(sys.matrix()[(2, 2)], -3.0);
        assert_eq!(sys.matrix()[(0, 0)], -1.0);
        assert_eq!(sys.matrix()[(0, 2)], 2.0);
        assert_eq!(sys.matrix()[(2, 0)], 1.0);
        assert_eq!(LinearSystem::with_diffuser(a.clone(), 2).unwrap().matrix(), &a);
        assert!(LinearSystem::with_diffuser(a, 3).is_err());
    }

    #[test]
    fn resolvent_matches_ratio() {
        let sys = two_by_two();
        let tf = sys.transfer_function().unwrap();
        for s in [
            Complex64::new(0.3, 1.0),
            Complex64::new(-4.0, 0.2),
            Complex64::new(2.0, 0.0),
        ] {
            let r = resolvent_corner(sys.matrix(), s).unwrap();
            assert!((r - tf.eval(s)).norm() <= 1e-12 * r.norm());
        }
    }

    #[test]
    fn mode_gains() {
        let spec = SpatialSpec::new(1e-3, 1.0, 200, LambdaPolicy::Discrete).unwrap();
        assert_eq!(spec.mode_gain(0), 0.0);
        let expected = 1e-3 * (2.0 * PI) * (2.0 * PI);
        assert!((spec.mode_gain(2) - expected).abs() < 1e-15);
        assert!((spec.mode_gain(2) - 3.9478e-2).abs() < 1e-6);
        assert_eq!(spec.nearest_mode(spec.mode_gain(7)), Some(7));
        let still = SpatialSpec::new(0.0, 1.0, 200, LambdaPolicy::Discrete).unwrap();
        assert_eq!(still.mode_gain(50), 0.0);
        assert!(SpatialSpec::new(-1.0, 1.0, 10, LambdaPolicy::Discrete).is_err());
        assert!(SpatialSpec::new(1.0, 0.0, 10, LambdaPolicy::Discrete).is_err());
    }
}
