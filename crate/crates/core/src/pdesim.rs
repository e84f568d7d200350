//! Method-of-lines simulation on `[0, L]` with zero-flux boundaries, where
//! only the last species diffuses, plus cosine-mode spectra of the result.
//!
//! States are stored species-major: species `s` at grid point `j` lives at
//! `s * N + j`, with `ξ_j = j L / (N − 1)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::RangeInclusive;

use crate::grayscott::GsParams;
use crate::numerics::Matrix;
use crate::{Error, Result};

/// Any state entry above this magnitude aborts the run.
pub const BLOW_UP: f64 = 1e12;
/// Spectral amplitudes below this are treated as zero.
pub const NOISE_FLOOR: f64 = 1e-14;
/// Explicit steppers need `dt ≤ CFL · h² / μ`.
pub const CFL: f64 = 0.4;

/// Spatially local reaction terms `f(x)`.
pub trait Reaction {
    fn species(&self) -> usize;
    fn eval(&self, state: &[f64], out: &mut [f64]);
}

impl Reaction for GsParams {
    fn species(&self) -> usize {
        3
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.rhs([state[0], state[1], state[2]]));
    }
}

/// `f(x) = A x`, for simulating the linearization in deviation variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearReaction {
    a: Matrix,
}

impl LinearReaction {
    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(Error::Dimension {
                expected: "non-empty square matrix",
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { a })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }
}

impl Reaction for LinearReaction {
    fn species(&self) -> usize {
        self.a.rows()
    }

    fn eval(&self, state: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.a.row(i).iter().zip(state).map(|(a, x)| a * x).sum();
        }
    }
}

/// One cosine perturbation `amplitude · direction · cos(kπξ/L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSeed {
    pub k: usize,
    pub amplitude: f64,
    pub direction: Vec<f64>,
}

/// Homogeneous base state plus cosine perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub base: Vec<f64>,
    pub seeds: Vec<ModeSeed>,
}

impl InitialCondition {
    pub fn homogeneous(base: Vec<f64>) -> Self {
        Self {
            base,
            seeds: Vec::new(),
        }
    }

    /// `base + Σ_{k ∈ modes} amplitude · cos(kπξ/L) · [1, …, 1]`.
    pub fn cosine_sum(base: Vec<f64>, modes: RangeInclusive<usize>, amplitude: f64) -> Self {
        let ones = vec![1.0; base.len()];
        let seeds = modes
            .map(|k| ModeSeed {
                k,
                amplitude,
                direction: ones.clone(),
            })
            .collect();
        Self { base, seeds }
    }

    pub fn with_seed(mut self, seed: ModeSeed) -> Self {
        self.seeds.push(seed);
        self
    }

    pub fn species(&self) -> usize {
        self.base.len()
    }

    /// Samples the initial state on an `n`-point grid.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        let ns = self.base.len();
        let mut u = vec![0.0; ns * n];
        for (s, &b) in self.base.iter().enumerate() {
            u[s * n..(s + 1) * n].fill(b);
        }
        for seed in &self.seeds {
            for j in 0..n {
                let c = seed.amplitude * grid_cos(seed.k, j, n);
                for (s, d) in seed.direction.iter().enumerate() {
                    u[s * n + j] += c * d;
                }
            }
        }
        u
    }

    fn validate(&self) -> Result<()> {
        if self.base.is_empty() {
            return Err(Error::Config("initial condition has no species"));
        }
        let finite = self.base.iter().all(|v| v.is_finite())
            && self
                .seeds
                .iter()
                .all(|s| s.amplitude.is_finite() && s.direction.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::NonFinite);
        }
        if self.seeds.iter().any(|s| s.direction.len() != self.base.len()) {
            return Err(Error::Config("seed direction length differs from species count"));
        }
        Ok(())
    }
}

/// `cos(kπj/(N−1))` with the argument reduced exactly in integers.
fn grid_cos(k: usize, j: usize, n: usize) -> f64 {
    let m = n - 1;
    let r = (k * j) % (2 * m);
    libm::cos(PI * r as f64 / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStepping {
    /// Classical RK4 with a constant step.
    Fixed { dt: f64 },
    /// Dormand–Prince 5(4) with error control.
    Adaptive { rtol: f64, atol: f64 },
}

impl Default for TimeStepping {
    fn default() -> Self {
        TimeStepping::Adaptive {
            rtol: 1e-7,
            atol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_grid: usize,
    pub length: f64,
    pub t_final: f64,
    pub sample_every: f64,
    pub stepping: TimeStepping,
    pub mu: f64,
    pub ic: InitialCondition,
    /// Highest mode kept in the stored spectra; defaults to `N − 1`.
    pub k_spec: Option<usize>,
}

impl SimConfig {
    /// `N = 128`, `L = 1`, `T = 5000`, samples every 10 time units.
    pub fn new(mu: f64, ic: InitialCondition) -> Self {
        Self {
            n_grid: 128,
            length: 1.0,
            t_final: 5000.0,
            sample_every: 10.0,
            stepping: TimeStepping::default(),
            mu,
            ic,
            k_spec: None,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n_grid - 1) as f64
    }

    /// Largest stable explicit step, or `None` without diffusion.
    pub fn max_explicit_dt(&self) -> Option<f64> {
        let h = self.spacing();
        (self.mu > 0.0).then(|| CFL * h * h / self.mu)
    }

    pub fn k_spec(&self) -> usize {
        self.k_spec.unwrap_or(self.n_grid - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid < 16 {
            return Err(Error::Config("grid needs at least 16 points"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.length) {
            return Err(Error::Config("domain length must be > 0"));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Config("final time must be >= 0"));
        }
        if !positive(self.sample_every) {
            return Err(Error::Config("sampling interval must be > 0"));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::Config("diffusion coefficient must be >= 0"));
        }
        if self.k_spec() >= self.n_grid {
            return Err(Error::Config("spectral cutoff must be below N"));
        }
        match self.stepping {
            TimeStepping::Fixed { dt } => {
                if !positive(dt) {
                    return Err(Error::Config("time step must be > 0"));
                }
                if self.max_explicit_dt().is_some_and(|max| dt > max) {
                    return Err(Error::Config("time step violates the diffusion stability bound"));
                }
            }
            TimeStepping::Adaptive { rtol, atol } => {
                if !positive(rtol) || !positive(atol) {
                    return Err(Error::Config("tolerances must be > 0"));
                }
            }
        }
        self.ic.validate()
    }
}

/// Counters from a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

impl core::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.rhs_evals += o.rhs_evals;
    }
}

/// An integrator for the autonomous system `u' = f(u)`.
pub trait Stepper {
    /// Advances `u` from `t` to exactly `t_end`.
    fn advance(
        &mut self,
        f: &mut dyn FnMut(&[f64], &mut [f64]),
        t: f64,
        u: &mut [f64],
        t_end: f64,
    ) -> Result<StepStats>;
}

fn check_blow_up(u: &[f64], t: f64) -> Result<()> {
    if u.iter().any(|v| !(v.abs() <= BLOW_UP)) {
        return Err(Error::Divergence { time: t });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Rk4 {
    pub dt: f64,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            k: Default::default(),
            tmp: Vec::new(),
        }
    }
}

impl Stepper for Rk4 {
    fn advance(
        &mut self,
        f: &mut dyn FnMut(&[f64], &mut [f64]),
        mut t: f64,
        u: &mut [f64],
        t_end: f64,
    ) -> Result<StepStats> {
        let n = u.len();
        for k in &mut self.k {
            k.resize(n, 0.0);
        }
        self.tmp.resize(n, 0.0);
        let mut stats = StepStats::default();
        let steps = libm::ceil((t_end - t) / self.dt - 1e-9).max(0.0) as u64;
        for step in 0..steps {
            let h = if step + 1 == steps { t_end - t } else { self.dt };
            let [k1, k2, k3, k4] = &mut self.k;
            let tmp = &mut self.tmp;
            f(u, k1);
            for i in 0..n {
                tmp[i] = u[i] + 0.5 * h * k1[i];
            }
            f(tmp, k2);
            for i in 0..n {
                tmp[i] = u[i] + 0.5 * h * k2[i];
            }
            f(tmp, k3);
            for i in 0..n {
                tmp[i] = u[i] + h * k3[i];
            }
            f(tmp, k4);
            for i in 0..n {
                u[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
            t += h;
            stats.accepted += 1;
            stats.rhs_evals += 4;
            check_blow_up(u, t)?;
        }
        Ok(stats)
    }
}

/// Dormand–Prince 5(4) with FSAL and a standard step-size controller.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step, e.g. the diffusion stability limit.
    pub h_max: f64,
    h: Option<f64>,
    k: [Vec<f64>; 7],
    y1: Vec<f64>,
    tmp: Vec<f64>,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max: f64::INFINITY,
            h: None,
            k: Default::default(),
            y1: Vec::new(),
            tmp: Vec::new(),
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Stepper for Dopri5 {
    fn advance(
        &mut self,
        f: &mut dyn FnMut(&[f64], &mut [f64]),
        mut t: f64,
        u: &mut [f64],
        t_end: f64,
    ) -> Result<StepStats> {
        let n = u.len();
        for k in &mut self.k {
            k.resize(n, 0.0);
        }
        self.y1.resize(n, 0.0);
        self.tmp.resize(n, 0.0);
        let mut stats = StepStats::default();
        if t_end <= t {
            return Ok(stats);
        }
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let (y1, tmp) = (&mut self.y1, &mut self.tmp);
        f(u, k1);
        stats.rhs_evals += 1;
        let mut h = match self.h {
            Some(h) => h,
            None => {
                // Hairer's first-step heuristic, simplified.
                let sc = |i: usize| self.atol + self.rtol * u[i].abs();
                let d0 = rms((0..n).map(|i| u[i] / sc(i)));
                let d1 = rms((0..n).map(|i| k1[i] / sc(i)));
                if d0 < 1e-5 || d1 < 1e-5 {
                    1e-6
                } else {
                    0.01 * d0 / d1
                }
            }
        }
        .min(self.h_max);
        loop {
            // Stretch by a hair rather than leave a sliver of rounding behind.
            let last = t + h * (1.0 + 1e-9) >= t_end;
            if last {
                h = t_end - t;
            }
            if !(h > 1e-14 * (1.0 + t.abs())) {
                return Err(Error::NoConvergence);
            }
            for i in 0..n {
                tmp[i] = u[i] + h * A21 * k1[i];
            }
            f(tmp, k2);
            for i in 0..n {
                tmp[i] = u[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            f(tmp, k3);
            for i in 0..n {
                tmp[i] = u[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(tmp, k4);
            for i in 0..n {
                tmp[i] = u[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(tmp, k5);
            for i in 0..n {
                tmp[i] = u[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(tmp, k6);
            for i in 0..n {
                y1[i] = u[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            f(y1, k7);
            stats.rhs_evals += 6;
            let err = rms((0..n).map(|i| {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                e / (self.atol + self.rtol * u[i].abs().max(y1[i].abs()))
            }));
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 && err.is_finite() {
                t = if last { t_end } else { t + h };
                u.copy_from_slice(y1);
                core::mem::swap(k1, k7);
                stats.accepted += 1;
                check_blow_up(u, t)?;
                if !last {
                    // Keep the controller's step rather than the clipped one.
                    self.h = Some((h * factor).min(self.h_max));
                }
                if last {
                    return Ok(stats);
                }
                h = self.h.unwrap_or(h);
            } else {
                stats.rejected += 1;
                h *= if err.is_finite() { factor.min(1.0) } else { 0.2 };
            }
        }
    }
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    if count == 0 {
        0.0
    } else {
        libm::sqrt(sum / count as f64)
    }
}

/// Cosine basis `cos(kπj/(N−1))` for `k ≤ k_spec`, normalized as a type-I
/// DCT so that `f_j = Σ_k c_k cos(kπj/(N−1))` when `k_spec = N − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineBasis {
    n: usize,
    k_spec: usize,
    table: Vec<f64>,
}

impl CosineBasis {
    pub fn new(n: usize, k_spec: usize) -> Result<Self> {
        if n < 2 || k_spec >= n {
            return Err(Error::InvalidInput("cosine basis needs n >= 2 and k_spec < n"));
        }
        let mut table = Vec::with_capacity((k_spec + 1) * n);
        for k in 0..=k_spec {
            table.extend((0..n).map(|j| grid_cos(k, j, n)));
        }
        Ok(Self { n, k_spec, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_spec(&self) -> usize {
        self.k_spec
    }

    pub fn transform(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.n {
            return Err(Error::Dimension {
                expected: "field of length N",
                rows: field.len(),
                cols: 1,
            });
        }
        let m = (self.n - 1) as f64;
        let last = self.n - 1;
        Ok((0..=self.k_spec)
            .map(|k| {
                let row = &self.table[k * self.n..(k + 1) * self.n];
                let inner: f64 = row[1..last].iter().zip(&field[1..last]).map(|(c, f)| c * f).sum();
                let ends = 0.5 * (row[0] * field[0] + row[last] * field[last]);
                let c = 2.0 / m * (inner + ends);
                if k == 0 || k == last {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect())
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (k, &c) in coeffs.iter().enumerate().take(self.k_spec + 1) {
            let row = &self.table[k * self.n..(k + 1) * self.n];
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        out
    }
}

/// Cosine coefficients `x̂_0 … x̂_{k_spec}` of a field sampled on the grid.
pub fn mode_spectrum(field: &[f64], k_spec: usize) -> Result<Vec<f64>> {
    CosineBasis::new(field.len(), k_spec)?.transform(field)
}

/// Sampled solution with per-sample spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n_grid: usize,
    pub n_species: usize,
    pub length: f64,
    pub k_spec: usize,
    pub times: Vec<f64>,
    /// Species-major state per sample.
    pub fields: Vec<Vec<f64>>,
    /// Species-major `(k_spec + 1)` coefficients per sample.
    pub spectra: Vec<Vec<f64>>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn grid(&self) -> Vec<f64> {
        let h = self.length / (self.n_grid - 1) as f64;
        (0..self.n_grid).map(|j| j as f64 * h).collect()
    }

    pub fn field(&self, sample: usize, species: usize) -> &[f64] {
        &self.fields[sample][species * self.n_grid..(species + 1) * self.n_grid]
    }

    pub fn spectrum(&self, sample: usize, species: usize) -> &[f64] {
        let w = self.k_spec + 1;
        &self.spectra[sample][species * w..(species + 1) * w]
    }

    /// Euclidean norm over species of `x̂_k` at one sample.
    pub fn mode_amplitude(&self, sample: usize, k: usize) -> f64 {
        let w = self.k_spec + 1;
        let s: f64 = (0..self.n_species)
            .map(|sp| {
                let c = self.spectra[sample][sp * w + k];
                c * c
            })
            .sum();
        libm::sqrt(s)
    }
}

/// Runs with the stepper chosen by `cfg.stepping`.
pub fn simulate<R: Reaction + ?Sized>(reaction: &R, cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    match cfg.stepping {
        TimeStepping::Fixed { dt } => simulate_with(reaction, cfg, &mut Rk4::new(dt)),
        TimeStepping::Adaptive { rtol, atol } => {
            let mut stepper = Dopri5::new(rtol, atol);
            if let Some(max) = cfg.max_explicit_dt() {
                // Dormand–Prince's real stability interval is about 3.3 h²/(4μ).
                stepper = stepper.with_h_max(2.0 * max);
            }
            simulate_with(reaction, cfg, &mut stepper)
        }
    }
}

/// Runs with a caller-supplied stepper.
pub fn simulate_with<R: Reaction + ?Sized>(
    reaction: &R,
    cfg: &SimConfig,
    stepper: &mut dyn Stepper,
) -> Result<Trajectory> {
    cfg.validate()?;
    let ns = reaction.species();
    if cfg.ic.species() != ns {
        return Err(Error::Config("initial condition species count differs from the model"));
    }
    let n = cfg.n_grid;
    let h = cfg.spacing();
    let coef = cfg.mu / (h * h);
    let basis = CosineBasis::new(n, cfg.k_spec())?;
    // The integrated state is the deviation from the homogeneous base, so
    // decaying perturbations are not lost to rounding against the base.
    let base = &cfg.ic.base;
    let mut local = vec![0.0; ns];
    let mut local_out = vec![0.0; ns];
    let mut rhs = |u: &[f64], du: &mut [f64]| {
        for j in 0..n {
            for s in 0..ns {
                local[s] = base[s] + u[s * n + j];
            }
            reaction.eval(&local, &mut local_out);
            for s in 0..ns {
                du[s * n + j] = local_out[s];
            }
        }
        if coef > 0.0 {
            let z = &u[(ns - 1) * n..];
            let dz = &mut du[(ns - 1) * n..];
            dz[0] += coef * 2.0 * (z[1] - z[0]);
            for j in 1..n - 1 {
                dz[j] += coef * (z[j - 1] - 2.0 * z[j] + z[j + 1]);
            }
            dz[n - 1] += coef * 2.0 * (z[n - 2] - z[n - 1]);
        }
    };

    let mut u = cfg.ic.sample(n);
    for (s, &b) in base.iter().enumerate() {
        u[s * n..(s + 1) * n].iter_mut().for_each(|v| *v -= b);
    }
    let spectrum_of = |u: &[f64]| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ns * (basis.k_spec() + 1));
        for s in 0..ns {
            let mut c = basis.transform(&u[s * n..(s + 1) * n])?;
            c[0] += base[s];
            out.extend(c);
        }
        Ok(out)
    };
    let absolute = |u: &[f64]| -> Vec<f64> {
        let mut out = u.to_vec();
        for (s, &b) in base.iter().enumerate() {
            out[s * n..(s + 1) * n].iter_mut().for_each(|v| *v += b);
        }
        out
    };
    let mut traj = Trajectory {
        n_grid: n,
        n_species: ns,
        length: cfg.length,
        k_spec: cfg.k_spec(),
        times: vec![0.0],
        fields: vec![absolute(&u)],
        spectra: vec![spectrum_of(&u)?],
        stats: StepStats::default(),
    };
    check_blow_up(&traj.fields[0], 0.0)?;
    let mut t = 0.0;
    let mut idx = 0u64;
    while t < cfg.t_final {
        idx += 1;
        let next = (idx as f64 * cfg.sample_every).min(cfg.t_final);
        traj.stats += stepper.advance(&mut rhs, t, &mut u, next)?;
        t = next;
        let field = absolute(&u);
        check_blow_up(&field, t)?;
        traj.times.push(t);
        traj.spectra.push(spectrum_of(&u)?);
        traj.fields.push(field);
    }
    Ok(traj)
}

/// Result of [`dominant_mode`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeReport {
    /// Every time-averaged `k ≥ 1` amplitude in the window is below
    /// [`NOISE_FLOOR`].
    NoPattern,
    Pattern {
        k_star: usize,
        /// Slope of `log |x̂_{k*}|` before saturation.
        growth_rate: f64,
        saturated: bool,
    },
}

/// Number of equal-time segments used to detect saturation.
const SEGMENTS: usize = 10;

/// Picks the mode with the largest time-averaged amplitude in `window` and
/// estimates its early growth rate from the whole trajectory.
///
/// The run is cut into ten segments. The first is discarded as the initial
/// transient, the second sets the reference slope, and the fit stops at the
/// first later segment whose slope falls below a tenth of the reference.
pub fn dominant_mode(traj: &Trajectory, window: (f64, f64)) -> Result<ModeReport> {
    let (t0, t1) = window;
    let (Some(&first), Some(&last)) = (traj.times.first(), traj.times.last()) else {
        return Err(Error::Precondition("empty trajectory"));
    };
    if !(t0 >= first && t1 <= last && t0 <= t1) {
        return Err(Error::Precondition("window outside the trajectory"));
    }
    let in_window: Vec<usize> = (0..traj.times.len())
        .filter(|&i| traj.times[i] >= t0 && traj.times[i] <= t1)
        .collect();
    if in_window.len() < 5 {
        return Err(Error::Precondition("window holds fewer than 5 samples"));
    }
    let mut best: Option<(usize, f64)> = None;
    for k in 1..=traj.k_spec {
        let sum: f64 = in_window.iter().map(|&i| traj.mode_amplitude(i, k)).sum();
        let mean = sum / in_window.len() as f64;
        if best.is_none_or(|(_, m)| mean > m) {
            best = Some((k, mean));
        }
    }
    let Some((k_star, _)) = best.filter(|&(_, mean)| mean >= NOISE_FLOOR) else {
        return Ok(ModeReport::NoPattern);
    };
    let series: Vec<(f64, f64)> = (0..traj.times.len())
        .filter_map(|i| {
            let a = traj.mode_amplitude(i, k_star);
            (a >= NOISE_FLOOR).then(|| (traj.times[i], libm::log(a)))
        })
        .collect();
    let (growth_rate, saturated) = early_growth(&series);
    Ok(ModeReport::Pattern {
        k_star,
        growth_rate,
        saturated,
    })
}

fn early_growth(series: &[(f64, f64)]) -> (f64, bool) {
    let (Some(&(ta, _)), Some(&(tb, _))) = (series.first(), series.last()) else {
        return (0.0, false);
    };
    let seg_len = (tb - ta) / SEGMENTS as f64;
    let segment = |s: usize| {
        let lo = ta + s as f64 * seg_len;
        let hi = if s + 1 == SEGMENTS { f64::INFINITY } else { lo + seg_len };
        series.iter().copied().filter(move |&(t, _)| t >= lo && t < hi)
    };
    let slopes: Vec<Option<f64>> = (0..SEGMENTS).map(|s| ls_slope(segment(s))).collect();
    let Some(reference) = slopes[1] else {
        return (ls_slope(series.iter().copied()).unwrap_or(0.0), false);
    };
    let stop = (2..SEGMENTS).find(|&s| slopes[s].is_some_and(|v| v.abs() < 0.1 * reference.abs()));
    let end = stop.unwrap_or(SEGMENTS);
    let rate = ls_slope((1..end).flat_map(segment)).unwrap_or(reference);
    (rate, stop.is_some())
}

/// Least-squares slope, or `None` with fewer than two distinct times.
fn ls_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> Option<f64> {
    let (n, st, sy) = points
        .clone()
        .fold((0.0, 0.0, 0.0), |(n, st, sy), (t, y)| (n + 1.0, st + t, sy + y));
    if n < 2.0 {
        return None;
    }
    let (tm, ym) = (st / n, sy / n);
    let (sxy, sxx) = points.fold((0.0, 0.0), |(a, b), (t, y)| {
        (a + (t - tm) * (y - ym), b + (t - tm) * (t - tm))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One-sided second-order `∂/∂ξ` at both ends of a field.
pub fn boundary_slopes(field: &[f64], length: f64) -> (f64, f64) {
    let n = field.len();
    let h = length / (n - 1) as f64;
    let left = (-3.0 * field[0] + 4.0 * field[1] - field[2]) / (2.0 * h);
    let right = (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) / (2.0 * h);
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_spectrum() {
        let c = mode_spectrum(&[2.5; 33], 32).unwrap();
        assert!((c[0] - 2.5).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn pure_mode_has_no_leakage() {
        let n = 64;
        let field: Vec<f64> = (0..n)
            .map(|j| libm::cos(2.0 * PI * j as f64 / (n - 1) as f64))
            .collect();
        let c = mode_spectrum(&field, n - 1).unwrap();
        assert!((c[2] - 1.0).abs() < 1e-12);
        for (k, v) in c.iter().enumerate() {
            if k != 2 {
                assert!(v.abs() <= 1e-10, "k = {k}: {v}");
            }
        }
    }

    #[test]
    fn highest_mode_round_trips() {
        let n = 17;
        let basis = CosineBasis::new(n, n - 1).unwrap();
        let field: Vec<f64> = (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let c = basis.transform(&field).unwrap();
        assert!((c[n - 1] - 1.0).abs() < 1e-14);
        let back = basis.reconstruct(&c);
        assert!(back.iter().zip(&field).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn fixed_dt_stability_bound() {
        let mut cfg = SimConfig::new(1e-3, InitialCondition::homogeneous(vec![0.0]));
        let max = cfg.max_explicit_dt().unwrap();
        cfg.stepping = TimeStepping::Fixed { dt: max * 1.01 };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.stepping = TimeStepping::Fixed { dt: max };
        assert!(cfg.validate().is_ok());
        cfg.n_grid = 15;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rk4_exponential() {
        let mut u = [1.0];
        let mut f = |u: &[f64], du: &mut [f64]| du[0] = -u[0];
        let stats = Rk4::new(0.01).advance(&mut f, 0.0, &mut u, 1.0).unwrap();
        assert_eq!(stats.accepted, 100);
        assert!((u[0] - libm::exp(-1.0)).abs() < 1e-10);
    }

    #[test]
    fn dopri_oscillator() {
        let mut u = [1.0, 0.0];
        let mut f = |u: &[f64], du: &mut [f64]| {
            du[0] = u[1];
            du[1] = -u[0];
        };
        let mut st = Dopri5::new(1e-10, 1e-12);
        let mut t = 0.0;
        for i in 1..=10 {
            let next = i as f64;
            st.advance(&mut f, t, &mut u, next).unwrap();
            t = next;
        }
        assert!((u[0] - libm::cos(10.0)).abs() < 1e-8);
        assert!((u[1] + libm::sin(10.0)).abs() < 1e-8);
    }

    #[test]
    fn blow_up_is_reported() {
        let r = LinearReaction::new(Matrix::from_rows(&[[1.0]]).unwrap()).unwrap();
        let mut cfg = SimConfig::new(0.0, InitialCondition::homogeneous(vec![1.0]));
        cfg.t_final = 100.0;
        match simulate(&r, &cfg) {
            Err(Error::Divergence { time }) => assert!(time > 27.0 && time < 29.0, "{time}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn growth_fit_sees_saturation() {
        let series: Vec<(f64, f64)> = (0..=1000)
            .map(|i| {
                let t = i as f64;
                (t, if t < 500.0 { 0.01 * t } else { 5.0 })
            })
            .collect();
        let (rate, saturated) = early_growth(&series);
        assert!(saturated);
        assert!((rate - 0.01).abs() < 1e-12);
        let (rate, saturated) = early_growth(&series[..400]);
        assert!(!saturated);
        assert!((rate - 0.01).abs() < 1e-12);
    }
}
