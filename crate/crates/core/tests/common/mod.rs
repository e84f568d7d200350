#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turing_one_core::numerics::{eigenvalues, Matrix};
use turing_one_core::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, spread: f64) -> Matrix {
    let data = (0..n * n).map(|_| rng.gen_range(-spread..spread)).collect();
    Matrix::new(n, n, data).unwrap()
}

pub fn max_real_eig(m: &Matrix) -> f64 {
    eigenvalues(m).unwrap().max_real()
}

/// Rejection-samples a matrix whose eigenvalues all have real part below
/// `-margin`.
pub fn random_hurwitz(rng: &mut impl Rng, n: usize, spread: f64, margin: f64) -> Matrix {
    loop {
        let m = random_matrix(rng, n, spread);
        if max_real_eig(&m) < -margin {
            return m;
        }
    }
}

/// Pairs every expected value with a distinct nearest computed value and
/// returns the worst distance.
pub fn match_distance(expected: &[Complex64], got: &[Complex64]) -> f64 {
    assert_eq!(expected.len(), got.len(), "{expected:?} vs {got:?}");
    let mut used = vec![false; got.len()];
    let mut worst: f64 = 0.0;
    for e in expected {
        let (idx, d) = got
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, g)| (i, (g - e).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[idx] = true;
        worst = worst.max(d);
    }
    worst
}

/// Hurwitz 3×3 matrices drawn by multiplicative jitter around the scaled
/// Gray-Scott set-A Jacobian, where roughly a third are Type-I.
pub fn random_near_turing(rng: &mut impl Rng) -> Matrix {
    use turing_one_core::grayscott::{Branch, GsParams};
    let p = GsParams::preset_a();
    let j = p.jacobian_at(&p.equilibrium(Branch::Plus).unwrap());
    loop {
        let data = j
            .as_slice()
            .iter()
            .map(|v| 100.0 * v * (1.0 + rng.gen_range(-0.4..0.4)) + rng.gen_range(-0.05..0.05))
            .collect();
        let m = Matrix::new(3, 3, data).unwrap();
        if max_real_eig(&m) < 0.0 {
            return m;
        }
    }
}

/// Alternates uniform Hurwitz draws with [`random_near_turing`].
pub fn random_hurwitz_3x3(rng: &mut impl Rng, i: usize) -> Matrix {
    if i % 2 == 0 {
        random_hurwitz(rng, 3, 2.0, 0.0)
    } else {
        random_near_turing(rng)
    }
}
