//! Extended Gray-Scott model `X + 2Y ⇌ 3Y`, `Y ⇌ Z` with feed/degradation,
//! where only `Z` diffuses:
//!
//! ```text
//! ẋ = −x y² + η₁ y³ + γ (1 − x)
//! ẏ =  x y² − η₁ y³ − k (y − η₂ z) − γ y
//! ż =  k (y − η₂ z) − γ z            (+ μ ∇² z)
//! ```

use alloc::vec::Vec;

use crate::classify::{lemma3_check, scan_rightmost, Alphas, ConditionFlags};
use crate::model::LinearSystem;
use crate::numerics::{is_hurwitz, Matrix};
use crate::{Error, Result};

/// Residual bound for a homogeneous equilibrium.
pub const TOL_EQ: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsParams {
    pub eta1: f64,
    pub eta2: f64,
    pub k_rate: f64,
    pub gamma: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    Zero,
    Plus,
    Minus,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Zero => "zero",
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsEquilibrium {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub branch: Branch,
    /// `max |f_i(x, y, z)|`.
    pub residual: f64,
    /// Some concentration is negative.
    pub nonphysical: bool,
}

impl GsEquilibrium {
    pub fn state(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl GsParams {
    pub fn new(eta1: f64, eta2: f64, k_rate: f64, gamma: f64, mu: f64) -> Result<Self> {
        let p = Self {
            eta1,
            eta2,
            k_rate,
            gamma,
            mu,
        };
        let all = [eta1, eta2, k_rate, gamma, mu];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if all.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("Gray-Scott parameters must be >= 0"));
        }
        Ok(p)
    }

    /// `γ = 1.0e-2, k = 6.2e-2, μ = 1.0e-3, η₁ = η₂ = 0.1`.
    pub fn preset_a() -> Self {
        Self {
            eta1: 0.1,
            eta2: 0.1,
            k_rate: 6.2e-2,
            gamma: 1.0e-2,
            mu: 1.0e-3,
        }
    }

    /// `γ = 1.0e-2, k = 5.5e-2, μ = 1.0e-3, η₁ = η₂ = 0.1`.
    pub fn preset_b() -> Self {
        Self {
            k_rate: 5.5e-2,
            ..Self::preset_a()
        }
    }

    /// `v = γ + k η₂`.
    pub fn v(&self) -> f64 {
        self.gamma + self.k_rate * self.eta2
    }

    /// `w = v² − 4γ(k + v)((1 + η₁)v + k)`; the ± equilibria are real iff
    /// `w ≥ 0`.
    pub fn w(&self) -> f64 {
        let v = self.v();
        v * v - 4.0 * self.gamma * (self.k_rate + v) * ((1.0 + self.eta1) * v + self.k_rate)
    }

    /// Reaction terms only.
    pub fn rhs(&self, [x, y, z]: [f64; 3]) -> [f64; 3] {
        let Self {
            eta1,
            eta2,
            k_rate: k,
            gamma,
            ..
        } = *self;
        let auto = x * y * y - eta1 * y * y * y;
        let exchange = k * (y - eta2 * z);
        [
            -auto + gamma * (1.0 - x),
            auto - exchange - gamma * y,
            exchange - gamma * z,
        ]
    }

    pub fn residual(&self, state: [f64; 3]) -> f64 {
        self.rhs(state).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Jacobian of the reaction terms at an arbitrary state.
    pub fn jacobian(&self, [x, y, _z]: [f64; 3]) -> Matrix {
        let Self {
            eta1,
            eta2,
            k_rate: k,
            gamma,
            ..
        } = *self;
        let cross = 2.0 * x * y - 3.0 * eta1 * y * y;
        Matrix::from_rows(&[
            [-y * y - gamma, -cross, 0.0],
            [y * y, cross - k - gamma, k * eta2],
            [0.0, k, -k * eta2 - gamma],
        ])
        .expect("3x3 literal")
    }

    pub fn jacobian_at(&self, eq: &GsEquilibrium) -> Matrix {
        self.jacobian(eq.state())
    }

    /// The zero branch `(1, 0, 0)` and, when `w ≥ 0`, the `±` branches.
    pub fn equilibria(&self) -> Result<Vec<GsEquilibrium>> {
        let v = self.v();
        if v == 0.0 {
            return Err(Error::DegenerateParameters);
        }
        let mut out = alloc::vec![self.finish([1.0, 0.0, 0.0], Branch::Zero)];
        let w = self.w();
        if w >= 0.0 {
            let sw = libm::sqrt(w);
            let denom = 2.0 * ((1.0 + self.eta1) * v + self.k_rate);
            for (branch, y) in [(Branch::Plus, (v + sw) / denom), (Branch::Minus, (v - sw) / denom)] {
                let z = self.k_rate * y / v;
                let x = (self.eta1 * y * y * y + self.gamma) / (y * y + self.gamma);
                out.push(self.finish([x, y, z], branch));
            }
        }
        Ok(out)
    }

    pub fn equilibrium(&self, branch: Branch) -> Option<GsEquilibrium> {
        self.equilibria().ok()?.into_iter().find(|e| e.branch == branch)
    }

    /// Polishes a closed-form root with Newton steps if rounding left the
    /// residual above [`TOL_EQ`].
    fn finish(&self, mut s: [f64; 3], branch: Branch) -> GsEquilibrium {
        let mut residual = self.residual(s);
        for _ in 0..4 {
            if residual <= TOL_EQ {
                break;
            }
            let Some(step) = solve3(&self.jacobian(s), self.rhs(s)) else {
                break;
            };
            let cand = [s[0] - step[0], s[1] - step[1], s[2] - step[2]];
            let r = self.residual(cand);
            if !(r < residual) {
                break;
            }
            s = cand;
            residual = r;
        }
        GsEquilibrium {
            x: s[0],
            y: s[1],
            z: s[2],
            branch,
            residual,
            nonphysical: s.iter().any(|&c| c < 0.0),
        }
    }
}

/// Cramer's rule for a 3×3 system.
fn solve3(a: &Matrix, b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let base: [[f64; 3]; 3] = core::array::from_fn(|i| core::array::from_fn(|j| a[(i, j)]));
    let d = det(base);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some(core::array::from_fn(|col| {
        let mut m = base;
        for (row, &bv) in b.iter().enumerate() {
            m[row][col] = bv;
        }
        det(m) / d
    }))
}

/// Status of one `(γ, k)` cell of a region sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    TypeI,
    NotTypeI,
    /// `w < 0`: no Plus branch.
    NoEquilibrium,
    /// The Plus branch has a negative concentration.
    Nonphysical,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::TypeI => "type_i",
            CellStatus::NotTypeI => "not_type_i",
            CellStatus::NoEquilibrium => "no_equilibrium",
            CellStatus::Nonphysical => "nonphysical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub gamma: f64,
    pub k_rate: f64,
    pub status: CellStatus,
    pub alphas: Option<Alphas>,
    pub flags: Option<ConditionFlags>,
}

/// `(γ, k)` window and fixed parameters of a region sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub gamma_range: (f64, f64),
    pub k_range: (f64, f64),
    pub n_gamma: usize,
    pub n_k: usize,
    pub eta1: f64,
    pub eta2: f64,
    pub mu: f64,
    pub length: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gamma_range: (1e-3, 5e-2),
            k_range: (2e-2, 1e-1),
            n_gamma: 100,
            n_k: 100,
            eta1: 0.1,
            eta2: 0.1,
            mu: 1e-3,
            length: 1.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let ok_range = |(lo, hi): (f64, f64), n: usize| {
            lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi && n >= 1 && (lo < hi || n == 1)
        };
        if !ok_range(self.gamma_range, self.n_gamma) {
            return Err(Error::InvalidInput("gamma range must be positive and non-empty"));
        }
        if !ok_range(self.k_range, self.n_k) {
            return Err(Error::InvalidInput("k range must be positive and non-empty"));
        }
        GsParams::new(self.eta1, self.eta2, 0.0, 0.0, self.mu)?;
        if !(self.length > 0.0) {
            return Err(Error::InvalidInput("domain length must be > 0"));
        }
        Ok(())
    }

    pub fn gamma_at(&self, i: usize) -> f64 {
        grid_point(self.gamma_range, self.n_gamma, i)
    }

    pub fn k_at(&self, j: usize) -> f64 {
        grid_point(self.k_range, self.n_k, j)
    }

    pub fn params(&self, gamma: f64, k_rate: f64) -> GsParams {
        GsParams {
            eta1: self.eta1,
            eta2: self.eta2,
            k_rate,
            gamma,
            mu: self.mu,
        }
    }
}

fn grid_point((lo, hi): (f64, f64), n: usize, i: usize) -> f64 {
    if n == 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// Evaluates one cell with the closed-form conditions at the Plus branch.
pub fn sweep_cell(params: &GsParams) -> SweepCell {
    let mut cell = SweepCell {
        gamma: params.gamma,
        k_rate: params.k_rate,
        status: CellStatus::NoEquilibrium,
        alphas: None,
        flags: None,
    };
    let Some(plus) = params.equilibrium(Branch::Plus) else {
        return cell;
    };
    let Ok(sys) = LinearSystem::new(params.jacobian_at(&plus)) else {
        return cell;
    };
    let Ok(alphas) = Alphas::of(&sys) else {
        return cell;
    };
    let flags = alphas.flags();
    cell.alphas = Some(alphas);
    cell.flags = Some(flags);
    cell.status = if plus.nonphysical {
        CellStatus::Nonphysical
    } else if flags.type_one() {
        CellStatus::TypeI
    } else {
        CellStatus::NotTypeI
    };
    cell
}

/// Type-I by the crossing search and by a dense gain scan, for
/// cross-checking [`sweep_cell`].
pub fn verify_cell(params: &GsParams) -> Result<(bool, bool)> {
    let plus = params
        .equilibrium(Branch::Plus)
        .ok_or(Error::Precondition("no Plus equilibrium"))?;
    let sys = LinearSystem::new(params.jacobian_at(&plus))?;
    let tf = sys.transfer_function()?;
    if !is_hurwitz(tf.den())? {
        return Ok((false, false));
    }
    let lemma3 = lemma3_check(&sys)?.satisfied;
    let scale = 1.0 + sys.matrix().norm_inf();
    let beta = crate::numerics::poly_roots(tf.num())?.max_real();
    let scan = scan_rightmost(&tf, 1e-6 * scale, 1e6 * scale, 2000)?;
    let tol_dom = crate::classify::dominance_tolerance(&sys);
    Ok((lemma3, scan.max_real >= 0.0 && scan.max_real > beta + tol_dom))
}

/// Row-major `(γ index, k index)` grid of sweep cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub n_gamma: usize,
    pub n_k: usize,
    pub cells: Vec<SweepCell>,
}

impl RegionGrid {
    pub fn cell(&self, i: usize, j: usize) -> &SweepCell {
        &self.cells[i * self.n_k + j]
    }

    pub fn type_one_count(&self) -> usize {
        self.cells.iter().filter(|c| c.status == CellStatus::TypeI).count()
    }

    /// `((γ_min, γ_max), (k_min, k_max))` over Type-I cells.
    pub fn bounding_box(&self) -> Option<((f64, f64), (f64, f64))> {
        let mut it = self.cells.iter().filter(|c| c.status == CellStatus::TypeI);
        let first = it.next()?;
        let init = ((first.gamma, first.gamma), (first.k_rate, first.k_rate));
        Some(it.fold(init, |((g0, g1), (k0, k1)), c| {
            ((g0.min(c.gamma), g1.max(c.gamma)), (k0.min(c.k_rate), k1.max(c.k_rate)))
        }))
    }

    /// Index of the cell nearest to `(γ, k)`.
    pub fn nearest(&self, gamma: f64, k_rate: f64) -> Option<(usize, usize)> {
        (0..self.cells.len())
            .min_by(|&a, &b| {
                let d = |c: &SweepCell| {
                    let (dg, dk) = (c.gamma - gamma, c.k_rate - k_rate);
                    dg * dg + dk * dk
                };
                d(&self.cells[a]).total_cmp(&d(&self.cells[b]))
            })
            .map(|idx| (idx / self.n_k, idx % self.n_k))
    }

    /// Whether `(γ, k)` lies in the Type-I region: inside the sampled window
    /// and the nearest cell is Type-I.
    pub fn contains(&self, gamma: f64, k_rate: f64) -> bool {
        let first = self.cells.first();
        let last = self.cells.last();
        let (Some(first), Some(last)) = (first, last) else {
            return false;
        };
        let inside = |v: f64, a: f64, b: f64| v >= a.min(b) && v <= a.max(b);
        if !inside(gamma, first.gamma, last.gamma) || !inside(k_rate, first.k_rate, last.k_rate) {
            return false;
        }
        self.nearest(gamma, k_rate)
            .is_some_and(|(i, j)| self.cell(i, j).status == CellStatus::TypeI)
    }

    /// Non-empty, one 4-connected component, and no holes: every non-Type-I
    /// cell reaches the border through 8-connected non-Type-I cells.
    pub fn is_simply_connected(&self) -> bool {
        let inside: Vec<bool> = self.cells.iter().map(|c| c.status == CellStatus::TypeI).collect();
        let Some(start) = inside.iter().position(|&b| b) else {
            return false;
        };
        let (rows, cols) = (self.n_gamma as isize, self.n_k as isize);
        let flood = |seeds: Vec<usize>, want: bool, diag: bool| {
            let mut seen = alloc::vec![false; inside.len()];
            let mut stack = seeds;
            for &s in &stack {
                seen[s] = true;
            }
            while let Some(idx) = stack.pop() {
                let (r, c) = ((idx / self.n_k) as isize, (idx % self.n_k) as isize);
                for dr in -1..=1_isize {
                    for dc in -1..=1_isize {
                        if (dr == 0 && dc == 0) || (!diag && dr != 0 && dc != 0) {
                            continue;
                        }
                        let (nr, nc) = (r + dr, c + dc);
                        if nr < 0 || nc < 0 || nr >= rows || nc >= cols {
                            continue;
                        }
                        let n = (nr * cols + nc) as usize;
                        if !seen[n] && inside[n] == want {
                            seen[n] = true;
                            stack.push(n);
                        }
                    }
                }
            }
            seen
        };
        let region = flood(alloc::vec![start], true, false);
        if inside.iter().zip(&region).any(|(&i, &r)| i && !r) {
            return false;
        }
        let border: Vec<usize> = (0..inside.len())
            .filter(|&idx| {
                let (r, c) = (idx / self.n_k, idx % self.n_k);
                !inside[idx] && (r == 0 || c == 0 || r + 1 == self.n_gamma || c + 1 == self.n_k)
            })
            .collect();
        let outside = flood(border, false, true);
        inside.iter().zip(&outside).all(|(&i, &o)| i || o)
    }
}

/// Sequential sweep over the configured window.
pub fn region_sweep(cfg: &SweepConfig) -> Result<RegionGrid> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(cfg.n_gamma * cfg.n_k);
    for i in 0..cfg.n_gamma {
        for j in 0..cfg.n_k {
            cells.push(sweep_cell(&cfg.params(cfg.gamma_at(i), cfg.k_at(j))));
        }
    }
    Ok(RegionGrid {
        n_gamma: cfg.n_gamma,
        n_k: cfg.n_k,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_branch_always_present() {
        for p in [
            GsParams::preset_a(),
            GsParams::preset_b(),
            GsParams::new(0.3, 0.0, 0.01, 0.2, 0.0).unwrap(),
        ] {
            let eqs = p.equilibria().unwrap();
            assert_eq!(eqs[0].state(), [1.0, 0.0, 0.0]);
            assert_eq!(eqs[0].branch, Branch::Zero);
            assert_eq!(p.rhs([1.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn origin_is_fixed_without_feed() {
        let p = GsParams::new(0.1, 0.1, 0.05, 0.0, 1e-3).unwrap();
        assert_eq!(p.rhs([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn set_a_plus_branch() {
        let p = GsParams::preset_a();
        let eqs = p.equilibria().unwrap();
        assert_eq!(eqs.len(), 3);
        let plus = eqs[1];
        let minus = eqs[2];
        assert!(plus.y > minus.y && minus.y > 0.0);
        assert!(plus.residual <= TOL_EQ && minus.residual <= TOL_EQ);
        assert!(!plus.nonphysical);
        // closed forms evaluated independently
        assert!((p.w() - 1.276304e-5).abs() < 1e-12);
        assert!((plus.y - 0.12385705157144415).abs() < 1e-12);
        assert!((plus.x - 0.40212213377241157).abs() < 1e-12);
        assert!((plus.z - 0.47402081465614426).abs() < 1e-12);
    }

    #[test]
    fn large_gamma_has_only_zero_branch() {
        let p = GsParams::new(0.1, 0.1, 0.062, 0.1, 1e-3).unwrap();
        assert!(p.w() < 0.0);
        assert_eq!(p.equilibria().unwrap().len(), 1);
    }

    #[test]
    fn degenerate_v() {
        let p = GsParams::new(0.1, 0.0, 0.062, 0.0, 1e-3).unwrap();
        assert_eq!(p.equilibria(), Err(Error::DegenerateParameters));
        assert!(GsParams::new(-0.1, 0.1, 0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn jacobian_at_zero_branch() {
        let p = GsParams::preset_a();
        let (g, k, e2) = (p.gamma, p.k_rate, p.eta2);
        let expected = Matrix::from_rows(&[[-g, 0.0, 0.0], [0.0, -k - g, k * e2], [0.0, k, -k * e2 - g]]).unwrap();
        assert_eq!(p.jacobian([1.0, 0.0, 0.0]), expected);
    }

    #[test]
    fn single_cell_sweeps() {
        let a = sweep_cell(&GsParams::preset_a());
        assert_eq!(a.status, CellStatus::TypeI);
        let far = sweep_cell(&GsParams::new(0.1, 0.1, 0.01, 0.1, 1e-3).unwrap());
        assert_ne!(far.status, CellStatus::TypeI);
    }

    #[test]
    fn connectivity_detects_holes_and_islands() {
        let mk = |pattern: &[&str]| {
            let n_gamma = pattern.len();
            let n_k = pattern[0].len();
            let cells = pattern
                .iter()
                .flat_map(|row| row.chars())
                .map(|ch| SweepCell {
                    gamma: 1.0,
                    k_rate: 1.0,
                    status: if ch == '#' {
                        CellStatus::TypeI
                    } else {
                        CellStatus::NotTypeI
                    },
                    alphas: None,
                    flags: None,
                })
                .collect();
            RegionGrid { n_gamma, n_k, cells }
        };
        assert!(mk(&["....", ".##.", ".##.", "...."]).is_simply_connected());
        assert!(!mk(&["#...", "....", "...#"]).is_simply_connected());
        assert!(!mk(&["#####", "#...#", "#####"]).is_simply_connected());
        assert!(!mk(&["...", "..."]).is_simply_connected());
        // a diagonal gap in the ring lets the enclosed cell escape
        assert!(mk(&["##.", "#.#", "###"]).is_simply_connected());
    }
}
