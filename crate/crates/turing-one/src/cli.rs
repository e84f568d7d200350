//! Command-line front end.
//!
//! Every command writes diagnostics to stderr. `analyze` and `equilibria`
//! always print JSON; `sweep` and `simulate` print a short text summary unless
//! `--json` is given, in which case stdout carries only their JSON summary.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use turing_one_core::classify::{classify, subsystem_poles, ClassifyOptions, LocusSample, VerdictKind};
use turing_one_core::grayscott::{Branch, GsParams, SweepConfig};
use turing_one_core::model::SpatialSpec;
use turing_one_core::numerics::{eigenvalues, Tolerances};
use turing_one_core::pdesim::{
    dominant_mode, simulate, InitialCondition, LinearReaction, ModeReport, ModeSeed, SimConfig, TimeStepping,
    Trajectory,
};

use crate::formats::{
    kind_name, to_json, write_locus_csv, write_spectra_csv, write_sweep_csv, write_trajectory_binary,
    write_trajectory_csv, FlagsJson, VerdictJson,
};
use crate::manifest::RunManifest;
use crate::model_file::{load, LoadedModel, ModelSource, PolicyName, SpatialOverrides};
use crate::sweep::{parallel_sweep, summarize, thread_cap, verify_sample};
use crate::{CliError, ExitCode};

#[derive(Debug, Parser)]
#[command(
    name = "turing-one",
    version,
    about = "Type-I Turing instability analysis for single-diffuser reaction-diffusion systems"
)]
pub struct Cli {
    /// Keep stdout machine-readable: JSON only.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a model as Stable, TypeI, TypeII or NotTuring.
    Analyze(AnalyzeArgs),
    /// Tabulate closed-loop poles over a range of feedback gains.
    Locus(LocusArgs),
    /// Map the Type-I region of the Gray-Scott model over (γ, k).
    Sweep(SweepArgs),
    /// Integrate the reaction-diffusion PDE and report the dominant mode.
    Simulate(SimulateArgs),
    /// List the homogeneous Gray-Scott equilibria and their stability.
    Equilibria(EquilibriaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Zero,
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Zero => Branch::Zero,
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

/// Model argument plus the overrides shared by `analyze` and `locus`.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model JSON file, or a preset (`grayscott:A`, `grayscott:B`).
    pub model: String,
    /// Equilibrium branch linearized for presets.
    #[arg(long, value_enum, default_value = "plus")]
    pub branch: BranchArg,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "length", visible_alias = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyName>,
}

impl ModelArgs {
    fn overrides(&self) -> SpatialOverrides {
        SpatialOverrides {
            mu: self.mu,
            length: self.length,
            k_max: self.k_max,
            policy: self.policy,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Include the locus sample of every mode in the output.
    #[arg(long)]
    pub evidence: bool,
    /// Also write the verdict JSON to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write a run manifest to this file.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LocusArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_min: f64,
    /// Defaults to `1e6 · (1 + ‖A‖∞)`.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `lo,hi`
    #[arg(long, value_parser = parse_range)]
    pub gamma_range: Option<(f64, f64)>,
    /// `lo,hi`
    #[arg(long, value_parser = parse_range)]
    pub k_range: Option<(f64, f64)>,
    /// `N_GAMMAxN_K`
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<(usize, usize)>,
    #[arg(long)]
    pub eta1: Option<f64>,
    #[arg(long)]
    pub eta2: Option<f64>,
    /// Sets both `eta1` and `eta2`.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "length", visible_alias = "L")]
    pub length: Option<f64>,
    /// Re-check a random 1% of Type-I cells against the crossing search and
    /// the gain scan.
    #[arg(long)]
    pub verify_lemma3: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// JSON file with any of the above fields; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    gamma_range: Option<(f64, f64)>,
    k_range: Option<(f64, f64)>,
    grid: Option<(usize, usize)>,
    eta1: Option<f64>,
    eta2: Option<f64>,
    mu: Option<f64>,
    #[serde(rename = "L")]
    length: Option<f64>,
    verify_lemma3: Option<bool>,
    seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Model JSON file, or a preset (`grayscott:A`, `grayscott:B`).
    pub model: String,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Simulate the linearization about the equilibrium (presets only; model
    /// files are always linear).
    #[arg(long)]
    pub linearized: bool,
    /// Grid points.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "length", visible_alias = "L")]
    pub length: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub sample_every: Option<f64>,
    /// Fixed RK4 step; adaptive Dormand–Prince otherwise.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub k_spec: Option<usize>,
    /// Seed only this cosine mode instead of modes `1..=max-mode`.
    #[arg(long)]
    pub seed_mode: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub max_mode: Option<usize>,
    /// `t0,t1` window for the dominant-mode average; last 20% by default.
    #[arg(long, value_parser = parse_range)]
    pub window: Option<(f64, f64)>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Skip `trajectory.bin`.
    #[arg(long)]
    pub no_binary: bool,
    /// JSON file with any of the above fields; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    branch: Option<BranchArg>,
    linearized: Option<bool>,
    n: Option<usize>,
    #[serde(rename = "L")]
    length: Option<f64>,
    mu: Option<f64>,
    t_final: Option<f64>,
    sample_every: Option<f64>,
    dt: Option<f64>,
    rtol: Option<f64>,
    atol: Option<f64>,
    k_spec: Option<usize>,
    seed_mode: Option<usize>,
    amplitude: Option<f64>,
    max_mode: Option<usize>,
    window: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct EquilibriaArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub k: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta1: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta2: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub mu: f64,
    #[arg(long = "length", visible_alias = "L", default_value_t = 1.0)]
    pub length: f64,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected `NxM`, got `{s}`"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::InvalidInput as i32
            } else {
                ExitCode::Ok as i32
            };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as i32
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Locus(a) => cmd_locus(a, cli.json),
        Command::Sweep(a) => cmd_sweep(a, cli.json),
        Command::Simulate(a) => cmd_simulate(a, cli.json),
        Command::Equilibria(a) => cmd_equilibria(a),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("<stdout>", e))
}

fn read_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<(T, Option<String>), CliError> {
    let Some(path) = path else {
        return Ok((T::default(), None));
    };
    let bytes = std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let parsed = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::input(format!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    Ok((parsed, Some(crate::model_file::sha256_hex(&bytes))))
}

fn exit_for(kind: VerdictKind) -> ExitCode {
    match kind {
        VerdictKind::Stable => ExitCode::Ok,
        VerdictKind::TypeI => ExitCode::TypeI,
        VerdictKind::TypeII => ExitCode::TypeII,
        VerdictKind::NotTuring => ExitCode::NotTuring,
    }
}

fn linear_model(a: &ModelArgs) -> Result<(LoadedModel, turing_one_core::model::LinearSystem, SpatialSpec), CliError> {
    let loaded = load(&a.model)?;
    let file = loaded.model_file(a.branch.into())?;
    let sys = file.system()?;
    let spec = file.spatial(&a.overrides())?;
    Ok((loaded, sys, spec))
}

fn spec_json(spec: &SpatialSpec) -> serde_json::Value {
    json!({
        "mu": spec.mu,
        "L": spec.length,
        "k_max": spec.k_max,
        "lambda_policy": match spec.policy {
            turing_one_core::model::LambdaPolicy::Discrete => "discrete",
            turing_one_core::model::LambdaPolicy::Continuous => "continuous",
        },
    })
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<ExitCode, CliError> {
    let (loaded, sys, spec) = linear_model(&a.model)?;
    let mut manifest = RunManifest::start(
        "analyze",
        Some(loaded.digest.clone()),
        json!({ "model": a.model.model, "branch": a.model.branch, "spatial": spec_json(&spec), "evidence": a.evidence }),
    );
    let verdict = classify(&sys, &spec, &ClassifyOptions::default())?;
    let text = to_json(&VerdictJson::new(&verdict, a.evidence));
    if let Some(out) = &a.out {
        manifest.write_output(out, text.as_bytes())?;
    }
    print_stdout(&text)?;
    if let Some(path) = &a.manifest {
        manifest.finish(path)?;
    }
    Ok(exit_for(verdict.kind))
}

/// Gains sampled by `locus`: a single point when `lo == hi`, otherwise `0`
/// (if `lo == 0`) followed by a geometric grid.
pub fn locus_gains(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0) {
        return Err(CliError::input("lambda bounds must be finite and >= 0"));
    }
    if lo > hi {
        return Err(CliError::input(format!("lambda range is inverted: {lo} > {hi}")));
    }
    if points == 0 {
        return Err(CliError::input("--points must be >= 1"));
    }
    if lo == hi {
        return Ok(vec![lo]);
    }
    if points < 2 {
        return Err(CliError::input("--points must be >= 2 for a non-degenerate range"));
    }
    let (mut gains, start, count) = if lo == 0.0 {
        (vec![0.0], 1e-8 * hi, points - 1)
    } else {
        (Vec::new(), lo, points)
    };
    if count == 1 {
        gains.push(hi);
        return Ok(gains);
    }
    let ratio = (hi / start).ln() / (count - 1) as f64;
    gains.extend((0..count).map(|i| {
        if i + 1 == count {
            hi
        } else {
            start * (ratio * i as f64).exp()
        }
    }));
    Ok(gains)
}

fn cmd_locus(a: &LocusArgs, json_mode: bool) -> Result<ExitCode, CliError> {
    if json_mode && a.out.is_none() {
        return Err(CliError::input("--json needs --out for the locus CSV"));
    }
    let (loaded, sys, spec) = linear_model(&a.model)?;
    let hi = a.lambda_max.unwrap_or(1e6 * (1.0 + sys.matrix().norm_inf()));
    let gains = locus_gains(a.lambda_min, hi, a.points)?;
    let tf = sys.transfer_function()?;
    let tol = Tolerances::default();
    let discrete: Vec<(f64, usize)> = (0..=spec.k_max)
        .map(|k| (spec.mode_gain(k), k))
        .filter(|&(l, _)| l >= a.lambda_min && l <= hi)
        .collect();
    let mut samples = Vec::with_capacity(gains.len() + discrete.len());
    for &l in &gains {
        let k = discrete.iter().find(|&&(g, _)| g == l).map(|&(_, k)| k);
        samples.push(LocusSample::at(&tf, l, k, &tol)?);
    }
    for &(l, k) in &discrete {
        if !gains.contains(&l) {
            samples.push(LocusSample::at(&tf, l, Some(k), &tol)?);
        }
    }
    samples.sort_by(|x, y| x.lambda.total_cmp(&y.lambda).then(x.source_k.cmp(&y.source_k)));

    let mut manifest = RunManifest::start(
        "locus",
        Some(loaded.digest.clone()),
        json!({
            "model": a.model.model, "branch": a.model.branch, "spatial": spec_json(&spec),
            "lambda_min": a.lambda_min, "lambda_max": hi, "points": a.points,
        }),
    );
    let rows = match &a.out {
        Some(path) => {
            let mut buf = Vec::new();
            let rows = write_locus_csv(&mut buf, &samples)?;
            manifest.write_output(path, &buf)?;
            rows
        }
        None => write_locus_csv(std::io::stdout().lock(), &samples)?,
    };
    if json_mode {
        print_stdout(&to_json(&json!({
            "rows": rows,
            "gains": samples.len(),
            "lambda_range": [a.lambda_min, hi],
            "out": a.out.as_ref().map(|p| p.display().to_string()),
        })))?;
    } else if a.out.is_some() {
        eprintln!("wrote {rows} rows");
    }
    if let Some(path) = &a.manifest {
        manifest.finish(path)?;
    }
    Ok(ExitCode::Ok)
}

fn cmd_sweep(a: &SweepArgs, json_mode: bool) -> Result<ExitCode, CliError> {
    let (file, digest): (SweepFile, _) = read_config(a.config.as_deref())?;
    let d = SweepConfig::default();
    let grid = a.grid.or(file.grid).unwrap_or((d.n_gamma, d.n_k));
    let cfg = SweepConfig {
        gamma_range: a.gamma_range.or(file.gamma_range).unwrap_or(d.gamma_range),
        k_range: a.k_range.or(file.k_range).unwrap_or(d.k_range),
        n_gamma: grid.0,
        n_k: grid.1,
        eta1: a.eta1.or(a.eta).or(file.eta1).unwrap_or(d.eta1),
        eta2: a.eta2.or(a.eta).or(file.eta2).unwrap_or(d.eta2),
        mu: a.mu.or(file.mu).unwrap_or(d.mu),
        length: a.length.or(file.length).unwrap_or(d.length),
    };
    let verify = a.verify_lemma3 || file.verify_lemma3.unwrap_or(false);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let threads = thread_cap()?;

    let mut manifest = RunManifest::start(
        "sweep",
        digest,
        json!({
            "gamma_range": [cfg.gamma_range.0, cfg.gamma_range.1],
            "k_range": [cfg.k_range.0, cfg.k_range.1],
            "grid": [cfg.n_gamma, cfg.n_k],
            "eta1": cfg.eta1, "eta2": cfg.eta2, "mu": cfg.mu, "L": cfg.length,
            "verify_lemma3": verify, "seed": seed,
        }),
    );
    let region = parallel_sweep(&cfg, threads)?;
    let verification = if verify {
        Some(verify_sample(&cfg, &region, 0.01, seed, threads)?)
    } else {
        None
    };
    let summary = summarize(&cfg, &region, verification);
    let summary_text = to_json(&summary);
    if let Some(dir) = &a.out_dir {
        ensure_dir(dir)?;
        let mut csv = Vec::new();
        write_sweep_csv(&mut csv, &region)?;
        manifest.write_output(&dir.join("region.csv"), &csv)?;
        manifest.write_output(&dir.join("summary.json"), summary_text.as_bytes())?;
        manifest.finish(&dir.join("manifest.json"))?;
    }
    if json_mode {
        print_stdout(&summary_text)?;
    } else {
        let mut text = format!(
            "{}x{} cells, {} Type-I, simply connected: {}\n",
            cfg.n_gamma, cfg.n_k, summary.type_one_cells, summary.simply_connected
        );
        for m in &summary.marks {
            text += &format!(
                "set {} (γ = {}, k = {}): {}\n",
                m.name,
                m.gamma,
                m.k,
                if m.inside { "inside" } else { "outside" }
            );
        }
        if let Some(v) = &summary.verification {
            text += &format!("verification: {}/{} cells agree\n", v.agreed, v.checked);
        }
        print_stdout(&text)?;
    }
    if summary.verification.as_ref().is_some_and(|v| v.agreed != v.checked) {
        eprintln!("error: closed-form flags disagree with the crossing search on some cells");
        return Ok(ExitCode::Failure);
    }
    Ok(ExitCode::Ok)
}

/// Report written by `simulate`.
#[derive(Debug, Serialize)]
pub struct SimReport {
    /// A mode stands above the noise floor and is growing or has saturated;
    /// a decaying transient is not a pattern.
    pub pattern: bool,
    pub k_star: Option<usize>,
    pub growth_rate: Option<f64>,
    pub saturated: bool,
    pub window: [f64; 2],
    /// Rightmost real part of `p(λ_k, s)` for the seeded mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_growth_rate: Option<f64>,
    pub final_time: f64,
    pub samples: usize,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub rhs_evals: u64,
}

fn cmd_simulate(a: &SimulateArgs, json_mode: bool) -> Result<ExitCode, CliError> {
    let (file, cfg_digest): (SimFile, _) = read_config(a.config.as_deref())?;
    let loaded = load(&a.model)?;
    let branch: Branch = a.branch.or(file.branch).unwrap_or(BranchArg::Plus).into();
    let linearized = a.linearized || file.linearized.unwrap_or(false);

    let model = loaded.model_file(branch)?;
    let sys = model.system()?;
    let n_species = sys.n();
    let (species, base, gs): (Vec<String>, Vec<f64>, Option<GsParams>) = match &loaded.source {
        ModelSource::Preset { params, .. } => {
            let names = ["x", "y", "z"].map(String::from).to_vec();
            if linearized {
                (names, vec![0.0; 3], None)
            } else {
                let eq = params
                    .equilibrium(branch)
                    .ok_or_else(|| CliError::input(format!("no {} equilibrium", branch.as_str())))?;
                (names, eq.state().to_vec(), Some(*params))
            }
        }
        ModelSource::File { model } => {
            let d = model.diffuser_index;
            let names = (0..n_species)
                .filter(|&i| i != d)
                .chain([d])
                .map(|i| format!("s{i}"))
                .collect();
            (names, vec![0.0; n_species], None)
        }
    };

    let mu = a.mu.or(file.mu).unwrap_or(model.mu);
    let length = a.length.or(file.length).unwrap_or(model.length);
    let amplitude = a.amplitude.or(file.amplitude).unwrap_or(0.01);
    let seed_mode = a.seed_mode.or(file.seed_mode);
    let max_mode = a.max_mode.or(file.max_mode).unwrap_or(20);
    let ic = match seed_mode {
        Some(k) => InitialCondition::homogeneous(base.clone()).with_seed(ModeSeed {
            k,
            amplitude,
            direction: vec![1.0; n_species],
        }),
        None => InitialCondition::cosine_sum(base.clone(), 1..=max_mode, amplitude),
    };
    let mut cfg = SimConfig::new(mu, ic);
    cfg.length = length;
    cfg.n_grid = a.n.or(file.n).unwrap_or(cfg.n_grid);
    cfg.t_final = a.t_final.or(file.t_final).unwrap_or(cfg.t_final);
    cfg.sample_every = a.sample_every.or(file.sample_every).unwrap_or(cfg.sample_every);
    cfg.k_spec = a.k_spec.or(file.k_spec);
    cfg.stepping = match a.dt.or(file.dt) {
        Some(dt) => TimeStepping::Fixed { dt },
        None => {
            let TimeStepping::Adaptive { rtol, atol } = TimeStepping::default() else {
                unreachable!()
            };
            TimeStepping::Adaptive {
                rtol: a.rtol.or(file.rtol).unwrap_or(rtol),
                atol: a.atol.or(file.atol).unwrap_or(atol),
            }
        }
    };
    cfg.validate().map_err(CliError::from)?;
    if seed_mode.is_some_and(|k| k > cfg.k_spec()) {
        return Err(CliError::input("--seed-mode exceeds the spectral cutoff"));
    }
    let window = a.window.or(file.window).unwrap_or_else(|| {
        let start = (0.8 * cfg.t_final).min(cfg.t_final - 4.0 * cfg.sample_every).max(0.0);
        (start, cfg.t_final)
    });

    let mut manifest = RunManifest::start(
        "simulate",
        Some(loaded.digest.clone()),
        json!({
            "model": a.model, "branch": branch.as_str(), "linearized": linearized,
            "N": cfg.n_grid, "L": cfg.length, "mu": cfg.mu, "t_final": cfg.t_final,
            "sample_every": cfg.sample_every, "k_spec": cfg.k_spec(),
            "stepping": match cfg.stepping {
                TimeStepping::Fixed { dt } => json!({ "fixed": { "dt": dt } }),
                TimeStepping::Adaptive { rtol, atol } => json!({ "adaptive": { "rtol": rtol, "atol": atol } }),
            },
            "seed_mode": seed_mode, "max_mode": max_mode, "amplitude": amplitude,
            "window": [window.0, window.1], "config_digest": cfg_digest,
        }),
    );

    let traj = match gs {
        Some(params) => simulate(&params, &cfg)?,
        None => simulate(&LinearReaction::new(sys.matrix().clone())?, &cfg)?,
    };
    let predicted_growth_rate = match seed_mode {
        Some(k) => {
            let spec = SpatialSpec::new(cfg.mu, cfg.length, k, Default::default())?;
            Some(subsystem_poles(&sys.transfer_function()?, &spec, k)?.max_real())
        }
        None => None,
    };
    let report = build_report(&traj, window, predicted_growth_rate)?;
    let report_text = to_json(&report);

    if let Some(dir) = &a.out_dir {
        ensure_dir(dir)?;
        let traj_path = dir.join("trajectory.csv");
        write_trajectory_csv(create(&traj_path)?, &traj, &species)?;
        manifest.record_file(&traj_path)?;
        if !a.no_binary {
            let bin_path = dir.join("trajectory.bin");
            let mut w = create(&bin_path)?;
            write_trajectory_binary(&mut w, &traj)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&bin_path, e))?;
            drop(w);
            manifest.record_file(&bin_path)?;
        }
        let spectra_path = dir.join("spectra.csv");
        write_spectra_csv(create(&spectra_path)?, &traj, &species)?;
        manifest.record_file(&spectra_path)?;
        manifest.write_output(&dir.join("report.json"), report_text.as_bytes())?;
        manifest.finish(&dir.join("manifest.json"))?;
    }
    if json_mode {
        print_stdout(&report_text)?;
    } else {
        let line = match (report.k_star, report.growth_rate) {
            (Some(k), Some(g)) if report.pattern => format!(
                "dominant mode k* = {k}, growth rate {g:.6e}, {}\n",
                if report.saturated { "saturated" } else { "not saturated" }
            ),
            (Some(k), Some(g)) => format!("no pattern: largest mode k = {k} decays at rate {g:.6e}\n"),
            _ => "no pattern: every mode k >= 1 is below the noise floor\n".to_string(),
        };
        print_stdout(&line)?;
    }
    Ok(ExitCode::Ok)
}

fn build_report(traj: &Trajectory, window: (f64, f64), predicted: Option<f64>) -> Result<SimReport, CliError> {
    let mode = dominant_mode(traj, window).map_err(CliError::from)?;
    let (pattern, k_star, growth_rate, saturated) = match mode {
        ModeReport::NoPattern => (false, None, None, false),
        ModeReport::Pattern {
            k_star,
            growth_rate,
            saturated,
        } => (
            saturated || growth_rate > 0.0,
            Some(k_star),
            Some(growth_rate),
            saturated,
        ),
    };
    Ok(SimReport {
        pattern,
        k_star,
        growth_rate,
        saturated,
        window: [window.0, window.1],
        predicted_growth_rate: predicted,
        final_time: traj.times.last().copied().unwrap_or(0.0),
        samples: traj.times.len(),
        accepted_steps: traj.stats.accepted,
        rejected_steps: traj.stats.rejected,
        rhs_evals: traj.stats.rhs_evals,
    })
}

#[derive(Debug, Serialize)]
struct EquilibriumJson {
    branch: &'static str,
    state: [f64; 3],
    residual: f64,
    nonphysical: bool,
    eigenvalues: Vec<[f64; 2]>,
    max_real: f64,
    hurwitz: bool,
    verdict: &'static str,
    condition_flags: Option<FlagsJson>,
}

fn cmd_equilibria(a: &EquilibriaArgs) -> Result<ExitCode, CliError> {
    let params = GsParams::new(a.eta1, a.eta2, a.k, a.gamma, a.mu).map_err(CliError::from)?;
    let equilibria = params.equilibria().map_err(CliError::from)?;
    let spec = SpatialSpec::new(a.mu, a.length, SpatialSpec::DEFAULT_K_MAX, Default::default())?;
    let opts = ClassifyOptions {
        keep_evidence: false,
        ..ClassifyOptions::default()
    };
    let mut rows = Vec::with_capacity(equilibria.len());
    for eq in &equilibria {
        let jac = params.jacobian_at(eq);
        let eig = eigenvalues(&jac)?;
        let max_real = eig.max_real();
        let sys = turing_one_core::model::LinearSystem::new(jac)?;
        let verdict = classify(&sys, &spec, &opts)?;
        rows.push(EquilibriumJson {
            branch: eq.branch.as_str(),
            state: eq.state(),
            residual: eq.residual,
            nonphysical: eq.nonphysical,
            eigenvalues: eig.values().map(|z| [z.re, z.im]).collect(),
            max_real,
            hurwitz: verdict.kind != VerdictKind::NotTuring,
            verdict: kind_name(verdict.kind),
            condition_flags: verdict.condition_flags.map(|f| FlagsJson {
                i: f.i,
                ii_a: f.ii_a,
                ii_b: f.ii_b,
                type_one: f.type_one(),
            }),
        });
    }
    print_stdout(&to_json(&json!({
        "params": { "gamma": a.gamma, "k": a.k, "eta1": a.eta1, "eta2": a.eta2, "mu": a.mu, "L": a.length },
        "v": params.v(),
        "w": params.w(),
        "equilibria": rows,
    })))?;
    Ok(ExitCode::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gains_layout() {
        assert_eq!(locus_gains(0.0, 0.0, 400).unwrap(), vec![0.0]);
        let g = locus_gains(0.0, 1e4, 5).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!((g[0], g[1], g[4]), (0.0, 1e-4, 1e4));
        let g = locus_gains(1.0, 100.0, 3).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert!(locus_gains(2.0, 1.0, 10).is_err());
        assert!(locus_gains(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn range_and_grid_parsing() {
        assert_eq!(parse_range("1e-3, 5e-2").unwrap(), (1e-3, 5e-2));
        assert!(parse_range("1e-3").is_err());
        assert_eq!(parse_grid("100x80").unwrap(), (100, 80));
        assert!(parse_grid("100").is_err());
    }

    #[test]
    fn help_exits_zero_and_bad_flags_two() {
        assert_eq!(run(["turing-one", "--help"]), 0);
        assert_eq!(run(["turing-one", "analyze", "--bogus"]), 2);
    }
}
