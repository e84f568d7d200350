use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Real polynomial stored highest degree first.
///
/// Leading zeros are stripped on construction, so the zero polynomial has an
/// empty coefficient vector and no degree.
#[derive(Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let lead = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len());
        let mut coeffs = coeffs;
        coeffs.drain(..lead);
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// Monic polynomial with the given roots; the real part of the expanded
    /// product is kept, which is exact when non-real roots come in conjugate
    /// pairs.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, &a) in acc.iter().enumerate() {
                next[i] += a;
                next[i + 1] -= a * r;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `s^power`, zero when out of range.
    pub fn coeff(&self, power: usize) -> f64 {
        match self.degree() {
            Some(d) if power <= d => self.coeffs[d - power],
            _ => 0.0,
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Divides through by the leading coefficient. Idempotent; the zero
    /// polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.coeffs.first() {
            Some(&lead) if lead != 1.0 => Self::new(self.coeffs.iter().map(|c| c / lead).collect()),
            _ => self.clone(),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `1 + max |coefficient|`, the reference magnitude for tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + self.max_abs_coeff()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `Σ |c_i| |z|^i`, the magnitude against which `|p(z)|` is judged.
    pub fn eval_abs(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().fold(0.0, |acc, &c| acc * r + c.abs())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn derivative(&self) -> Self {
        let Some(d) = self.degree() else {
            return Self::zero();
        };
        Self::new(
            self.coeffs[..d]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (d - i) as f64)
                .collect(),
        )
    }

    /// `q(s) = p(s + shift)`.
    pub fn taylor_shift(&self, shift: f64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        // repeated synthetic division, Horner-style
        for i in 0..n {
            for j in 1..n - i {
                let prev = c[j - 1];
                c[j] += shift * prev;
            }
        }
        Self::new(c)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![0.0; len];
        for (dst, &c) in out[len - self.coeffs.len()..].iter_mut().zip(&self.coeffs) {
            *dst += c;
        }
        for (dst, &c) in out[len - rhs.coeffs.len()..].iter_mut().zip(&rhs.coeffs) {
            *dst += c;
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        self.scaled(-1.0)
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}
