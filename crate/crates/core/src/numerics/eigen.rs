//! Eigenvalues of small dense real matrices.
//!
//! Balancing, then reduction to upper Hessenberg form by stabilized
//! elementary similarity transforms, then Francis double-shift QR with
//! deflation on single or paired small subdiagonal entries.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{ComplexRootSet, Matrix, Tolerances};
use crate::{Error, Result};

const RADIX: f64 = 2.0;
const MAX_ITERS: usize = 60;

/// Eigenvalue multiset of a square matrix.
pub fn eigenvalues(m: &Matrix) -> Result<ComplexRootSet> {
    eigenvalues_with(m, &Tolerances::default())
}

pub(crate) fn eigenvalues_with(m: &Matrix, tol: &Tolerances) -> Result<ComplexRootSet> {
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
    let values = raw_eigenvalues(m)?;
    Ok(ComplexRootSet::from_values(values, tol))
}

/// Unsorted eigenvalues, one entry per multiplicity.
pub(crate) fn raw_eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    let n = m.rows();
    let mut a = Work::from_matrix(m);
    a.balance();
    a.reduce_to_hessenberg();
    a.hqr()?;
    debug_assert_eq!(a.wr.len(), n + 1);
    Ok((1..=n).map(|i| Complex64::new(a.wr[i], a.wi[i])).collect())
}

/// 1-based working storage; index 0 is unused in every dimension.
struct Work {
    n: usize,
    a: Vec<f64>,
    wr: Vec<f64>,
    wi: Vec<f64>,
}

impl Work {
    fn from_matrix(m: &Matrix) -> Self {
        let n = m.rows();
        let mut a = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                a[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Self {
            n,
            a,
            wr: vec![0.0; n + 1],
            wi: vec![0.0; n + 1],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * (self.n + 1) + j]
    }

    fn swap(&mut self, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) {
        let w = self.n + 1;
        self.a.swap(i1 * w + j1, i2 * w + j2);
    }

    /// Scales rows and columns by powers of the radix so their norms match.
    fn balance(&mut self) {
        let n = self.n;
        let sqrdx = RADIX * RADIX;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 1..=n {
                    if j != i {
                        c += self.at(j, i).abs();
                        r += self.at(i, j).abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        *self.at_mut(i, j) *= g;
                    }
                    for j in 1..=n {
                        *self.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }

    /// Gaussian elimination with pivoting to upper Hessenberg form.
    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        for m in 2..n {
            let mut x = 0.0_f64;
            let mut piv = m;
            for j in m..=n {
                if self.at(j, m - 1).abs() > x.abs() {
                    x = self.at(j, m - 1);
                    piv = j;
                }
            }
            if piv != m {
                for j in (m - 1)..=n {
                    self.swap((piv, j), (m, j));
                }
                for j in 1..=n {
                    self.swap((j, piv), (j, m));
                }
            }
            if x != 0.0 {
                for i in (m + 1)..=n {
                    let mut y = self.at(i, m - 1);
                    if y != 0.0 {
                        y /= x;
                        *self.at_mut(i, m - 1) = y;
                        for j in m..=n {
                            let v = self.at(m, j);
                            *self.at_mut(i, j) -= y * v;
                        }
                        for j in 1..=n {
                            let v = self.at(j, i);
                            *self.at_mut(j, m) += y * v;
                        }
                    }
                }
            }
        }
        // discard the stored multipliers below the subdiagonal
        for i in 3..=n {
            for j in 1..i - 1 {
                *self.at_mut(i, j) = 0.0;
            }
        }
    }

    fn hqr(&mut self) -> Result<()> {
        let n = self.n;
        let mut anorm = 0.0;
        for i in 1..=n {
            for j in i.saturating_sub(1).max(1)..=n {
                anorm += self.at(i, j).abs();
            }
        }
        let mut nn = n;
        let mut t = 0.0;
        while nn >= 1 {
            let mut its = 0;
            loop {
                let mut l = nn;
                while l >= 2 {
                    let mut s = self.at(l - 1, l - 1).abs() + self.at(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.at(l, l - 1).abs() + s == s {
                        *self.at_mut(l, l - 1) = 0.0;
                        break;
                    }
                    l -= 1;
                }
                let mut x = self.at(nn, nn);
                if l == nn {
                    self.wr[nn] = x + t;
                    self.wi[nn] = 0.0;
                    nn -= 1;
                    break;
                }
                let mut y = self.at(nn - 1, nn - 1);
                let mut w = self.at(nn, nn - 1) * self.at(nn - 1, nn);
                if l == nn - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let z = libm::sqrt(q.abs());
                    x += t;
                    if q >= 0.0 {
                        let z = p + z.copysign(p);
                        self.wr[nn - 1] = x + z;
                        self.wr[nn] = x + z;
                        if z != 0.0 {
                            self.wr[nn] = x - w / z;
                        }
                        self.wi[nn - 1] = 0.0;
                        self.wi[nn] = 0.0;
                    } else {
                        self.wr[nn - 1] = x + p;
                        self.wr[nn] = x + p;
                        self.wi[nn - 1] = -z;
                        self.wi[nn] = z;
                    }
                    nn = nn.saturating_sub(2);
                    break;
                }
                if its == MAX_ITERS {
                    return Err(Error::NoConvergence);
                }
                if its == 10 || its == 20 || its == 40 {
                    // exceptional shift
                    t += x;
                    for i in 1..=nn {
                        *self.at_mut(i, i) -= x;
                    }
                    let s = self.at(nn, nn - 1).abs() + self.at(nn - 1, nn - 2).abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }
                its += 1;
                self.francis_step(l, nn, x, y, w);
            }
        }
        Ok(())
    }

    fn francis_step(&mut self, l: usize, nn: usize, x: f64, y: f64, w: f64) {
        let (mut p, mut q, mut r);
        let mut m = nn - 2;
        loop {
            let z = self.at(m, m);
            let rr = x - z;
            let s = y - z;
            p = (rr * s - w) / self.at(m + 1, m) + self.at(m, m + 1);
            q = self.at(m + 1, m + 1) - z - rr - s;
            r = self.at(m + 2, m + 1);
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = self.at(m, m - 1).abs() * (q.abs() + r.abs());
            let v = p.abs() * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs());
            if u + v == v {
                break;
            }
            m -= 1;
        }
        for i in (m + 2)..=nn {
            *self.at_mut(i, i - 2) = 0.0;
            if i != m + 2 {
                *self.at_mut(i, i - 3) = 0.0;
            }
        }
        let mut xk = 0.0;
        for k in m..nn {
            if k != m {
                p = self.at(k, k - 1);
                q = self.at(k + 1, k - 1);
                r = if k != nn - 1 { self.at(k + 2, k - 1) } else { 0.0 };
                xk = p.abs() + q.abs() + r.abs();
                if xk != 0.0 {
                    p /= xk;
                    q /= xk;
                    r /= xk;
                }
            }
            let s = libm::sqrt(p * p + q * q + r * r).copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    *self.at_mut(k, k - 1) = -self.at(k, k - 1);
                }
            } else {
                *self.at_mut(k, k - 1) = -s * xk;
            }
            p += s;
            let xr = p / s;
            let yr = q / s;
            let zr = r / s;
            q /= p;
            r /= p;
            for j in k..=nn {
                let mut pp = self.at(k, j) + q * self.at(k + 1, j);
                if k != nn - 1 {
                    pp += r * self.at(k + 2, j);
                    *self.at_mut(k + 2, j) -= pp * zr;
                }
                *self.at_mut(k + 1, j) -= pp * yr;
                *self.at_mut(k, j) -= pp * xr;
            }
            let mmin = if nn < k + 3 { nn } else { k + 3 };
            for i in l..=mmin {
                let mut pp = xr * self.at(i, k) + yr * self.at(i, k + 1);
                if k != nn - 1 {
                    pp += zr * self.at(i, k + 2);
                    *self.at_mut(i, k + 2) -= pp * r;
                }
                *self.at_mut(i, k + 1) -= pp * q;
                *self.at_mut(i, k) -= pp;
            }
        }
    }
}
