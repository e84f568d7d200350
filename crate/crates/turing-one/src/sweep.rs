//! Region sweeps spread over a rayon pool, plus a spot check of the
//! closed-form verdicts against the crossing search and the gain scan.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use turing_one_core::grayscott::{sweep_cell, verify_cell, CellStatus, RegionGrid, SweepConfig};

use crate::CliError;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "TURING_ONE_THREADS";

/// The worker cap from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::input(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::input(format!("thread pool: {e}")))
}

/// Same cells as [`turing_one_core::grayscott::region_sweep`], evaluated in
/// parallel.
pub fn parallel_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<RegionGrid, CliError> {
    cfg.validate().map_err(CliError::from)?;
    let cells = pool(threads)?.install(|| {
        (0..cfg.n_gamma * cfg.n_k)
            .into_par_iter()
            .map(|idx| sweep_cell(&cfg.params(cfg.gamma_at(idx / cfg.n_k), cfg.k_at(idx % cfg.n_k))))
            .collect()
    });
    Ok(RegionGrid {
        n_gamma: cfg.n_gamma,
        n_k: cfg.n_k,
        cells,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub seed: u64,
    pub checked: usize,
    pub agreed: usize,
    /// `[γ, k]` of cells where a check disagreed with the closed form.
    pub disagreements: Vec<[f64; 2]>,
}

/// Re-checks a seeded random `fraction` of the Type-I cells (at least one)
/// with the crossing search and the dense gain scan.
pub fn verify_sample(
    cfg: &SweepConfig,
    grid: &RegionGrid,
    fraction: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Verification, CliError> {
    let type_one: Vec<usize> = (0..grid.cells.len())
        .filter(|&i| grid.cells[i].status == CellStatus::TypeI)
        .collect();
    let amount = if type_one.is_empty() {
        0
    } else {
        ((type_one.len() as f64 * fraction).ceil() as usize).clamp(1, type_one.len())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, type_one.len(), amount)
        .into_iter()
        .map(|i| type_one[i])
        .collect();
    picked.sort_unstable();
    let results: Vec<(usize, bool)> = pool(threads)?.install(|| {
        picked
            .par_iter()
            .map(|&i| {
                let c = &grid.cells[i];
                let ok = verify_cell(&cfg.params(c.gamma, c.k_rate)) == Ok((true, true));
                (i, ok)
            })
            .collect()
    });
    let disagreements: Vec<[f64; 2]> = results
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|&(i, _)| [grid.cells[i].gamma, grid.cells[i].k_rate])
        .collect();
    Ok(Verification {
        seed,
        checked: results.len(),
        agreed: results.len() - disagreements.len(),
        disagreements,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Mark {
    pub name: &'static str,
    pub gamma: f64,
    pub k: f64,
    pub inside: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundingBox {
    pub gamma: [f64; 2],
    pub k: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub grid: [usize; 2],
    pub gamma_range: [f64; 2],
    pub k_range: [f64; 2],
    pub eta1: f64,
    pub eta2: f64,
    pub mu: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub type_one_cells: usize,
    pub not_type_one_cells: usize,
    pub no_equilibrium_cells: usize,
    pub nonphysical_cells: usize,
    pub bounding_box: Option<BoundingBox>,
    pub simply_connected: bool,
    /// The two published parameter marks.
    pub marks: Vec<Mark>,
    pub verification: Option<Verification>,
}

pub fn summarize(cfg: &SweepConfig, grid: &RegionGrid, verification: Option<Verification>) -> SweepSummary {
    let count = |s: CellStatus| grid.cells.iter().filter(|c| c.status == s).count();
    let marks = [("A", 1.0e-2, 6.2e-2), ("B", 1.0e-2, 5.5e-2)]
        .into_iter()
        .map(|(name, gamma, k)| Mark {
            name,
            gamma,
            k,
            inside: grid.contains(gamma, k),
        })
        .collect();
    SweepSummary {
        grid: [cfg.n_gamma, cfg.n_k],
        gamma_range: [cfg.gamma_range.0, cfg.gamma_range.1],
        k_range: [cfg.k_range.0, cfg.k_range.1],
        eta1: cfg.eta1,
        eta2: cfg.eta2,
        mu: cfg.mu,
        length: cfg.length,
        type_one_cells: count(CellStatus::TypeI),
        not_type_one_cells: count(CellStatus::NotTypeI),
        no_equilibrium_cells: count(CellStatus::NoEquilibrium),
        nonphysical_cells: count(CellStatus::Nonphysical),
        bounding_box: grid.bounding_box().map(|((g0, g1), (k0, k1))| BoundingBox {
            gamma: [g0, g1],
            k: [k0, k1],
        }),
        simply_connected: grid.is_simply_connected(),
        marks,
        verification,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use turing_one_core::grayscott::region_sweep;

    #[test]
    fn parallel_matches_sequential() {
        let cfg = SweepConfig {
            n_gamma: 23,
            n_k: 17,
            ..SweepConfig::default()
        };
        assert_eq!(parallel_sweep(&cfg, Some(3)).unwrap(), region_sweep(&cfg).unwrap());
    }

    #[test]
    fn verification_is_seeded() {
        let cfg = SweepConfig {
            n_gamma: 40,
            n_k: 40,
            ..SweepConfig::default()
        };
        let grid = parallel_sweep(&cfg, None).unwrap();
        let a = verify_sample(&cfg, &grid, 0.1, 7, Some(2)).unwrap();
        let b = verify_sample(&cfg, &grid, 0.1, 7, None).unwrap();
        assert_eq!(a.checked, b.checked);
        assert!(a.checked >= 1);
        assert_eq!(a.agreed, a.checked);
    }
}
