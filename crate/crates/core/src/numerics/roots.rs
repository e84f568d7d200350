use alloc::vec::Vec;

use num_complex::Complex64;

use super::eigen::raw_eigenvalues;
use super::{Matrix, Poly, Tolerances};
use crate::{Error, Result};

/// A root (or eigenvalue) together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Multiset of complex numbers, stored as clusters with multiplicities and
/// ordered by decreasing real part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexRootSet {
    roots: Vec<Root>,
}

impl ComplexRootSet {
    /// Groups raw values: near-real values are snapped to the real axis and
    /// values within `tol.merge` of an existing cluster join it. Both
    /// tolerances are relative to `1 + |v|`, so small roots of a polynomial
    /// that also has huge roots keep their own resolution.
    pub fn from_values(values: Vec<Complex64>, tol: &Tolerances) -> Self {
        let mut clusters: Vec<(Complex64, usize)> = Vec::new();
        for mut v in values {
            if v.im.abs() <= tol.conj * (1.0 + v.norm()) {
                v.im = 0.0;
            }
            match clusters.iter_mut().find(|(c, m)| {
                let centre = *c / *m as f64;
                (centre - v).norm() <= tol.merge * (1.0 + centre.norm().max(v.norm()))
            }) {
                Some((sum, m)) => {
                    *sum += v;
                    *m += 1;
                }
                None => clusters.push((v, 1)),
            }
        }
        let mut roots: Vec<Root> = clusters
            .into_iter()
            .map(|(sum, m)| Root {
                value: sum / m as f64,
                multiplicity: m,
            })
            .collect();
        roots.sort_by(|a, b| {
            b.value
                .re
                .total_cmp(&a.value.re)
                .then(b.value.im.total_cmp(&a.value.im))
        });
        Self { roots }
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    /// Every value repeated according to its multiplicity.
    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.roots
            .iter()
            .flat_map(|r| core::iter::repeat_n(r.value, r.multiplicity))
    }

    /// Number of values counted with multiplicity.
    pub fn len(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Largest real part, or `-inf` for an empty set.
    pub fn max_real(&self) -> f64 {
        self.roots.first().map_or(f64::NEG_INFINITY, |r| r.value.re)
    }

    /// Values whose real part is within `tol` of the maximum.
    pub fn rightmost(&self, tol: f64) -> impl Iterator<Item = Complex64> + '_ {
        let max = self.max_real();
        self.values().filter(move |v| v.re >= max - tol)
    }

    /// Checks that non-real values pair with their conjugates within `tol`.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        self.roots.iter().all(|r| {
            r.value.im == 0.0
                || self
                    .roots
                    .iter()
                    .any(|o| (o.value - r.value.conj()).norm() <= tol && o.multiplicity == r.multiplicity)
        })
    }
}

/// All complex roots of `p` via the eigenvalues of its companion matrix,
/// followed by a Newton polish on the original polynomial.
pub fn poly_roots(p: &Poly) -> Result<ComplexRootSet> {
    poly_roots_with(p, &Tolerances::default())
}

pub fn poly_roots_with(p: &Poly, tol: &Tolerances) -> Result<ComplexRootSet> {
    let Some(degree) = p.degree() else {
        return Err(Error::InvalidInput("zero polynomial has no roots"));
    };
    if degree == 0 {
        return Err(Error::InvalidInput("constant polynomial has no roots"));
    }
    if p.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let monic = p.monic();
    let values = raw_roots(&monic)?;
    Ok(ComplexRootSet::from_values(values, tol))
}

pub(crate) fn raw_roots(monic: &Poly) -> Result<Vec<Complex64>> {
    let c = monic.coeffs();
    let degree = c.len() - 1;
    // zero roots factor out exactly
    let trailing = c.iter().rev().take_while(|&&v| v == 0.0).count();
    let mut values: Vec<Complex64> = core::iter::repeat_n(Complex64::new(0.0, 0.0), trailing).collect();
    let reduced = degree - trailing;
    if reduced == 1 {
        values.push(Complex64::new(-c[1], 0.0));
    } else if reduced > 1 {
        let mut companion = Matrix::zeros(reduced, reduced);
        for j in 0..reduced {
            companion[(0, j)] = -c[j + 1];
        }
        for i in 1..reduced {
            companion[(i, i - 1)] = 1.0;
        }
        let deriv = monic.derivative();
        for r in raw_eigenvalues(&companion)? {
            values.push(polish(monic, &deriv, r));
        }
    }
    Ok(values)
}

/// A few Newton steps, each kept only if it lowers the residual.
fn polish(p: &Poly, dp: &Poly, mut r: Complex64) -> Complex64 {
    let mut res = p.eval_complex(r).norm();
    for _ in 0..4 {
        let d = dp.eval_complex(r);
        if d.norm() == 0.0 {
            break;
        }
        let cand = r - p.eval_complex(r) / d;
        let cres = p.eval_complex(cand).norm();
        if !(cres < res) {
            break;
        }
        r = cand;
        res = cres;
    }
    r
}
