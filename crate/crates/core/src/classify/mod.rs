//! Stable / Type-I / Type-II classification of a single-diffuser system.
//!
//! Subsystem `Σ_k` has poles at the roots of `p(λ_k, s)`. The dominant poles
//! are the closed-right-half-plane poles of largest real part over every
//! finite `k` and over the `k → ∞` limit, whose poles are `spec(Ã)`. The
//! instability is Type-I when a finite `k` attains that maximum and Type-II
//! when only the limit does.

mod conditions;
mod scan;

use alloc::vec::Vec;

use num_complex::Complex64;

pub use conditions::{
    lemma3_check, line_crossing, theorem1_property, theorem2_conditions, Alphas, ConditionFlags, Lemma3Branch,
    Lemma3Result,
};
pub use scan::{rightmost_real, scan_rightmost, ScanResult};

use crate::model::{LambdaPolicy, LinearSystem, RationalTransfer, SpatialSpec};
use crate::numerics::{is_hurwitz, poly_roots_with, ComplexRootSet, Tolerances};
use crate::{Error, Result};

/// `tol_dom = DOMINANCE_REL_TOL · (1 + ‖A‖∞)`.
pub const DOMINANCE_REL_TOL: f64 = 1e-7;

/// Roots of `p(λ, s)` at one gain.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusSample {
    pub lambda: f64,
    pub roots: ComplexRootSet,
    /// Mode index when `lambda = λ_k`.
    pub source_k: Option<usize>,
}

impl LocusSample {
    pub fn at(tf: &RationalTransfer, lambda: f64, source_k: Option<usize>, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            lambda,
            roots: poly_roots_with(&tf.closed_loop_poly(lambda)?, tol)?,
            source_k,
        })
    }
}

/// Where a dominant pole comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Attainment {
    Mode(usize),
    /// The `k → ∞` locus endpoint, `spec(Ã)`.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantPoleSet {
    /// Empty when no pole reaches the closed right half-plane.
    pub poles: Vec<Complex64>,
    pub attained_at: Vec<Attainment>,
    /// Largest real part over all subsystems, including the limit.
    pub max_real: f64,
}

impl DominantPoleSet {
    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn finite_modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.attained_at.iter().filter_map(|a| match a {
            Attainment::Mode(k) => Some(*k),
            Attainment::Limit => None,
        })
    }

    pub fn has_limit(&self) -> bool {
        self.attained_at.contains(&Attainment::Limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictKind {
    Stable,
    /// `A` itself is not Hurwitz, so the homogeneous state is already
    /// unstable without diffusion.
    NotTuring,
    TypeI,
    TypeII,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub dominant: Option<DominantPoleSet>,
    /// Closed-form flags, present for three-species systems.
    pub condition_flags: Option<ConditionFlags>,
    /// Pole-zero cancellation in `h(s)` or a fully decoupled diffuser.
    pub degenerate: bool,
    /// Roots shared by `n(s)` and `d(s)`.
    pub cancellations: Vec<Complex64>,
    /// The continuous gain scan found a right-half-plane pole that no
    /// discrete mode reaches.
    pub near_instability: bool,
    /// Gain maximizing the rightmost real part in the continuous scan.
    pub critical_lambda: Option<f64>,
    pub tol_dom: f64,
    pub evidence: Vec<LocusSample>,
}

impl Verdict {
    /// Finite mode indices attaining the dominant poles.
    pub fn dominant_modes(&self) -> Vec<usize> {
        self.dominant
            .as_ref()
            .map(|d| d.finite_modes().collect())
            .unwrap_or_default()
    }

    pub fn is_turing(&self) -> bool {
        matches!(self.kind, VerdictKind::TypeI | VerdictKind::TypeII)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub tolerances: Tolerances,
    /// Points in the geometric λ grid of the continuous scan.
    pub scan_points: usize,
    /// Keep a locus sample for every discrete mode in the verdict.
    pub keep_evidence: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            scan_points: 2000,
            keep_evidence: true,
        }
    }
}

/// `tol_dom` for a given system matrix.
pub fn dominance_tolerance(sys: &LinearSystem) -> f64 {
    DOMINANCE_REL_TOL * (1.0 + sys.matrix().norm_inf())
}

/// Poles of subsystem `Σ_k`.
pub fn subsystem_poles(tf: &RationalTransfer, spec: &SpatialSpec, k: usize) -> Result<ComplexRootSet> {
    if k > spec.k_max {
        return Err(Error::ModeOutOfRange { k, k_max: spec.k_max });
    }
    poly_roots_with(&tf.closed_loop_poly(spec.mode_gain(k))?, &Tolerances::default())
}

/// Dominant closed-loop poles over `k = 0..=k_max` and the `k → ∞` limit.
pub fn dominant_poles(tf: &RationalTransfer, spec: &SpatialSpec, tol_dom: f64) -> Result<DominantPoleSet> {
    let samples = discrete_samples(tf, spec, &Tolerances::default())?;
    dominant_from_samples(tf, &samples, tol_dom, &Tolerances::default())
}

fn discrete_samples(tf: &RationalTransfer, spec: &SpatialSpec, tol: &Tolerances) -> Result<Vec<LocusSample>> {
    (0..=spec.k_max)
        .map(|k| LocusSample::at(tf, spec.mode_gain(k), Some(k), tol))
        .collect()
}

fn dominant_from_samples(
    tf: &RationalTransfer,
    samples: &[LocusSample],
    tol_dom: f64,
    tol: &Tolerances,
) -> Result<DominantPoleSet> {
    let entries = samples
        .iter()
        .map(|s| (s.source_k.map_or(Attainment::Limit, Attainment::Mode), &s.roots));
    dominant_from_entries(tf, entries, tol_dom, tol)
}

fn dominant_from_entries<'a>(
    tf: &RationalTransfer,
    entries: impl Iterator<Item = (Attainment, &'a ComplexRootSet)> + Clone,
    tol_dom: f64,
    tol: &Tolerances,
) -> Result<DominantPoleSet> {
    let limit = poly_roots_with(tf.num(), tol)?;
    let finite_max = entries
        .clone()
        .map(|(_, r)| r.max_real())
        .fold(f64::NEG_INFINITY, f64::max);
    let max_real = finite_max.max(limit.max_real());
    let mut set = DominantPoleSet {
        poles: Vec::new(),
        attained_at: Vec::new(),
        max_real,
    };
    if max_real < 0.0 {
        return Ok(set);
    }
    let cutoff = max_real - tol_dom;
    let mut take = |at: Attainment, roots: &ComplexRootSet| {
        if roots.max_real() >= cutoff {
            if !set.attained_at.contains(&at) {
                set.attained_at.push(at);
            }
            set.poles.extend(roots.values().filter(|v| v.re >= cutoff));
        }
    };
    for (at, roots) in entries {
        take(at, roots);
    }
    take(Attainment::Limit, &limit);
    Ok(set)
}

/// Classifies `sys` under the spatial configuration `spec`.
///
/// - `NotTuring` when `A` is not Hurwitz.
/// - Under [`LambdaPolicy::Discrete`] the verdict follows the dominant poles
///   over `λ_k`, `k ≤ k_max`; a finite mode within `tol_dom` of the limit
///   counts as Type-I. A continuous-scan instability that no discrete mode
///   reaches leaves the verdict `Stable` with `near_instability` set.
/// - Under [`LambdaPolicy::Continuous`] the dense scan decides, and the
///   critical gain is mapped to the nearest mode index.
pub fn classify(sys: &LinearSystem, spec: &SpatialSpec, opts: &ClassifyOptions) -> Result<Verdict> {
    let tol = &opts.tolerances;
    let tf = sys.transfer_function()?;
    let cancellations = tf.detect_cancellation_with(tol);
    let degenerate = !cancellations.is_empty() || sys.is_decoupled();
    let condition_flags = if sys.n() == 3 {
        Some(theorem2_conditions(sys)?)
    } else {
        None
    };
    let tol_dom = dominance_tolerance(sys);
    let mut verdict = Verdict {
        kind: VerdictKind::Stable,
        dominant: None,
        condition_flags,
        degenerate,
        cancellations,
        near_instability: false,
        critical_lambda: None,
        tol_dom,
        evidence: Vec::new(),
    };

    if !is_hurwitz(tf.den())? {
        verdict.kind = VerdictKind::NotTuring;
        verdict.evidence.push(LocusSample::at(&tf, 0.0, Some(0), tol)?);
        return Ok(verdict);
    }

    let samples = discrete_samples(&tf, spec, tol)?;
    let scan = if spec.mu > 0.0 {
        let lo = spec.mode_gain(1);
        let hi = spec.mode_gain(spec.k_max.max(1)).max(1e3 * sys.matrix().norm_inf());
        Some(scan_rightmost(&tf, lo, hi, opts.scan_points)?)
    } else {
        None
    };
    let beta = poly_roots_with(tf.num(), tol)?.max_real();

    match spec.policy {
        LambdaPolicy::Discrete => {
            let dominant = dominant_from_samples(&tf, &samples, tol_dom, tol)?;
            verdict.kind = kind_of(&dominant);
            if let Some(scan) = &scan {
                verdict.critical_lambda = Some(scan.argmax_lambda);
                verdict.near_instability =
                    verdict.kind == VerdictKind::Stable && scan.max_real >= 0.0 && scan.max_real > beta + tol_dom;
            }
            verdict.dominant = Some(dominant);
        }
        LambdaPolicy::Continuous => {
            let dominant = match &scan {
                Some(scan) => {
                    verdict.critical_lambda = Some(scan.argmax_lambda);
                    let critical = LocusSample::at(&tf, scan.argmax_lambda, None, tol)?;
                    let nearest = spec.nearest_mode(scan.argmax_lambda).unwrap_or(0);
                    let d = dominant_from_entries(
                        &tf,
                        core::iter::once((Attainment::Mode(nearest), &critical.roots)),
                        tol_dom,
                        tol,
                    )?;
                    verdict.evidence.push(critical);
                    d
                }
                None => dominant_from_samples(&tf, &samples[..1], tol_dom, tol)?,
            };
            verdict.kind = kind_of(&dominant);
            verdict.dominant = Some(dominant);
        }
    }
    if opts.keep_evidence {
        verdict.evidence.extend(samples);
    }
    Ok(verdict)
}

fn kind_of(dominant: &DominantPoleSet) -> VerdictKind {
    if dominant.is_empty() {
        VerdictKind::Stable
    } else if dominant.finite_modes().next().is_some() {
        VerdictKind::TypeI
    } else {
        VerdictKind::TypeII
    }
}

/// Whether every dominant pole of a Type-I verdict is non-real
/// (`|Im σ| > tol_dom`).
pub fn proposition1_check(verdict: &Verdict) -> Result<bool> {
    if verdict.kind != VerdictKind::TypeI {
        return Err(Error::Precondition("verdict must be Type-I"));
    }
    let Some(dominant) = &verdict.dominant else {
        return Err(Error::Precondition("Type-I verdict without dominant poles"));
    };
    Ok(dominant.poles.iter().all(|p| p.im.abs() > verdict.tol_dom))
}
