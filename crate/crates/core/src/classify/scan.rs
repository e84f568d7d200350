//! Dense scans of the rightmost closed-loop pole over the feedback gain.

use alloc::vec::Vec;

use crate::model::RationalTransfer;
use crate::numerics::roots::raw_roots;
use crate::Result;

const BISECT_ITERS: usize = 60;
const GOLDEN_ITERS: usize = 80;

/// Outcome of [`scan_rightmost`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Largest rightmost real part found over the scanned gains.
    pub max_real: f64,
    /// Gain at which `max_real` is attained.
    pub argmax_lambda: f64,
    /// Gains where the rightmost real part changes sign, refined by
    /// bisection.
    pub crossings: Vec<f64>,
    /// Number of gains evaluated, including refinement.
    pub evaluations: usize,
}

/// Rightmost real part of the roots of `p(λ, s)`.
pub fn rightmost_real(tf: &RationalTransfer, lambda: f64) -> Result<f64> {
    let p = tf.closed_loop_poly(lambda)?.monic();
    Ok(raw_roots(&p)?
        .into_iter()
        .map(|r| r.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Geometric grid of `points` gains over `[lo, hi]`, refined by bisection at
/// sign changes and golden-section search around each sampled local maximum.
pub fn scan_rightmost(tf: &RationalTransfer, lo: f64, hi: f64, points: usize) -> Result<ScanResult> {
    let points = points.max(3);
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    let ratio = libm::pow(hi / lo, 1.0 / (points - 1) as f64);
    let mut grid = Vec::with_capacity(points);
    let mut lam = lo;
    for i in 0..points {
        grid.push(if i + 1 == points { hi } else { lam });
        lam *= ratio;
    }
    let values = grid
        .iter()
        .map(|&l| rightmost_real(tf, l))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = points;

    let mut crossings = Vec::new();
    for i in 1..points {
        if (values[i - 1] < 0.0) != (values[i] < 0.0) {
            let (mut a, mut b) = (grid[i - 1], grid[i]);
            let neg_at_a = values[i - 1] < 0.0;
            for _ in 0..BISECT_ITERS {
                let mid = libm::sqrt(a * b);
                evaluations += 1;
                if (rightmost_real(tf, mid)? < 0.0) == neg_at_a {
                    a = mid;
                } else {
                    b = mid;
                }
                if b - a <= 1e-14 * b {
                    break;
                }
            }
            crossings.push(libm::sqrt(a * b));
        }
    }

    let (mut best_i, mut max_real) = (0, values[0]);
    for (i, &v) in values.iter().enumerate() {
        if v > max_real {
            best_i = i;
            max_real = v;
        }
    }
    let mut argmax_lambda = grid[best_i];
    for i in 1..points - 1 {
        if values[i] >= values[i - 1] && values[i] >= values[i + 1] {
            let (l, v, n) = golden_max(tf, grid[i - 1].ln_safe(), grid[i + 1].ln_safe())?;
            evaluations += n;
            if v > max_real {
                max_real = v;
                argmax_lambda = l;
            }
        }
    }
    Ok(ScanResult {
        max_real,
        argmax_lambda,
        crossings,
        evaluations,
    })
}

/// Golden-section maximization over `[ln a, ln b]`.
fn golden_max(tf: &RationalTransfer, mut a: f64, mut b: f64) -> Result<(f64, f64, usize)> {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = rightmost_real(tf, libm::exp(c))?;
    let mut fd = rightmost_real(tf, libm::exp(d))?;
    let mut n = 2;
    for _ in 0..GOLDEN_ITERS {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = rightmost_real(tf, libm::exp(c))?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = rightmost_real(tf, libm::exp(d))?;
        }
        n += 1;
        if (b - a).abs() < 1e-13 {
            break;
        }
    }
    Ok(if fc > fd {
        (libm::exp(c), fc, n)
    } else {
        (libm::exp(d), fd, n)
    })
}

trait LnSafe {
    fn ln_safe(self) -> f64;
}

impl LnSafe for f64 {
    fn ln_safe(self) -> f64 {
        libm::log(self.max(f64::MIN_POSITIVE))
    }
}
