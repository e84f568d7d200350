//! Output encodings. Floats are written with 17 significant digits in both
//! CSV and JSON so every value round-trips exactly.

use std::io::{Read, Write};

use serde::Serialize;
use serde_json::Value;
use turing_one_core::classify::{Attainment, LocusSample, Verdict, VerdictKind};
use turing_one_core::grayscott::{CellStatus, RegionGrid};
use turing_one_core::pdesim::Trajectory;
use turing_one_core::Complex64;

use crate::CliError;

/// 17 significant digits with a signed exponent, e.g. `1.0000000000000001e-1`
/// or `-2.0000000000000000e+0`.
pub fn fmt_f64(x: f64) -> String {
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((m, e)) if !e.starts_with('-') => format!("{m}e+{e}"),
        _ => s,
    }
}

/// Pretty JSON with every non-integer number rewritten by [`fmt_f64`].
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("output types serialize");
    rewrite_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

fn rewrite_floats(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(f) = n.as_f64() {
                *n = fmt_f64(f).parse().expect("formatted float is a JSON number");
            }
        }
        Value::Array(items) => items.iter_mut().for_each(rewrite_floats),
        Value::Object(map) => map.values_mut().for_each(rewrite_floats),
        _ => {}
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn kind_name(kind: VerdictKind) -> &'static str {
    match kind {
        VerdictKind::Stable => "Stable",
        VerdictKind::NotTuring => "NotTuring",
        VerdictKind::TypeI => "TypeI",
        VerdictKind::TypeII => "TypeII",
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum AttainedAt {
    Mode(usize),
    Limit(&'static str),
}

#[derive(Debug, Serialize)]
pub struct FlagsJson {
    pub i: bool,
    pub ii_a: bool,
    pub ii_b: bool,
    pub type_one: bool,
}

#[derive(Debug, Serialize)]
pub struct EvidenceRow {
    pub lambda: f64,
    pub source_k: Option<usize>,
    /// `[re, im, multiplicity]`.
    pub roots: Vec<(f64, f64, usize)>,
}

impl From<&LocusSample> for EvidenceRow {
    fn from(s: &LocusSample) -> Self {
        Self {
            lambda: s.lambda,
            source_k: s.source_k,
            roots: s
                .roots
                .roots()
                .iter()
                .map(|r| (r.value.re, r.value.im, r.multiplicity))
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerdictJson {
    pub kind: &'static str,
    pub dominant: Vec<[f64; 2]>,
    pub attained_at: Vec<AttainedAt>,
    pub dominant_modes: Vec<usize>,
    pub max_real: Option<f64>,
    pub condition_flags: Option<FlagsJson>,
    pub degenerate: bool,
    pub cancellations: Vec<[f64; 2]>,
    pub near_instability: bool,
    pub critical_lambda: Option<f64>,
    pub tol_dom: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<EvidenceRow>>,
}

impl VerdictJson {
    pub fn new(v: &Verdict, with_evidence: bool) -> Self {
        let dominant = v.dominant.as_ref();
        Self {
            kind: kind_name(v.kind),
            dominant: dominant
                .map(|d| d.poles.iter().copied().map(pair).collect())
                .unwrap_or_default(),
            attained_at: dominant
                .map(|d| {
                    d.attained_at
                        .iter()
                        .map(|a| match a {
                            Attainment::Mode(k) => AttainedAt::Mode(*k),
                            Attainment::Limit => AttainedAt::Limit("limit"),
                        })
                        .collect()
                })
                .unwrap_or_default(),
            dominant_modes: v.dominant_modes(),
            max_real: dominant.map(|d| d.max_real),
            condition_flags: v.condition_flags.map(|f| FlagsJson {
                i: f.i,
                ii_a: f.ii_a,
                ii_b: f.ii_b,
                type_one: f.type_one(),
            }),
            degenerate: v.degenerate,
            cancellations: v.cancellations.iter().copied().map(pair).collect(),
            near_instability: v.near_instability,
            critical_lambda: v.critical_lambda,
            tol_dom: v.tol_dom,
            evidence: with_evidence.then(|| v.evidence.iter().map(EvidenceRow::from).collect()),
        }
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// `lambda, root_index, re, im, source_k`; `source_k` is empty for rows not
/// at a discrete mode gain.
pub fn write_locus_csv<W: Write>(w: W, samples: &[LocusSample]) -> Result<usize, CliError> {
    let mut out = csv_writer(w);
    out.write_record(["lambda", "root_index", "re", "im", "source_k"])?;
    let mut rows = 0;
    for s in samples {
        for (i, r) in s.roots.values().enumerate() {
            out.write_record([
                fmt_f64(s.lambda),
                i.to_string(),
                fmt_f64(r.re),
                fmt_f64(r.im),
                s.source_k.map(|k| k.to_string()).unwrap_or_default(),
            ])?;
            rows += 1;
        }
    }
    out.flush().map_err(|e| CliError::io("locus csv", e))?;
    Ok(rows)
}

pub fn status_name(s: CellStatus) -> &'static str {
    s.as_str()
}

/// `gamma, k, status, alpha2, alpha1, alpha0, alpha_tilde1, alpha_tilde0,
/// cond_i, cond_ii_a, cond_ii_b`, row-major in `(γ, k)`.
pub fn write_sweep_csv<W: Write>(w: W, grid: &RegionGrid) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record([
        "gamma",
        "k",
        "status",
        "alpha2",
        "alpha1",
        "alpha0",
        "alpha_tilde1",
        "alpha_tilde0",
        "cond_i",
        "cond_ii_a",
        "cond_ii_b",
    ])?;
    for c in &grid.cells {
        let mut rec = vec![fmt_f64(c.gamma), fmt_f64(c.k_rate), status_name(c.status).to_string()];
        match c.alphas {
            Some(a) => rec.extend([a.a2, a.a1, a.a0, a.t1, a.t0].map(fmt_f64)),
            None => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        match c.flags {
            Some(f) => rec.extend([f.i, f.ii_a, f.ii_b].map(|b| b.to_string())),
            None => rec.extend(std::iter::repeat_n(String::new(), 3)),
        }
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| CliError::io("sweep csv", e))?;
    Ok(())
}

/// `time, xi, <species...>`, one row per sample and grid point.
pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory, species: &[String]) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    let mut header = vec!["time".to_string(), "xi".to_string()];
    header.extend(species.iter().cloned());
    out.write_record(&header)?;
    let grid = traj.grid();
    for (i, &t) in traj.times.iter().enumerate() {
        for (j, &xi) in grid.iter().enumerate() {
            let mut rec = vec![fmt_f64(t), fmt_f64(xi)];
            rec.extend((0..traj.n_species).map(|s| fmt_f64(traj.field(i, s)[j])));
            out.write_record(&rec)?;
        }
    }
    out.flush().map_err(|e| CliError::io("trajectory csv", e))?;
    Ok(())
}

/// `time, k, species, coefficient`.
pub fn write_spectra_csv<W: Write>(w: W, traj: &Trajectory, species: &[String]) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record(["time", "k", "species", "coefficient"])?;
    for (i, &t) in traj.times.iter().enumerate() {
        for k in 0..=traj.k_spec {
            for (s, name) in species.iter().enumerate() {
                out.write_record([fmt_f64(t), k.to_string(), name.clone(), fmt_f64(traj.spectrum(i, s)[k])])?;
            }
        }
    }
    out.flush().map_err(|e| CliError::io("spectra csv", e))?;
    Ok(())
}

/// Header `N, n_species, n_times` as little-endian `u64`, then every field
/// value as little-endian `f64` in `[time][species][grid]` order.
pub fn write_trajectory_binary<W: Write>(mut w: W, traj: &Trajectory) -> std::io::Result<()> {
    for v in [traj.n_grid, traj.n_species, traj.times.len()] {
        w.write_all(&(v as u64).to_le_bytes())?;
    }
    for field in &traj.fields {
        for v in field {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

/// Decoded binary trajectory block.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryBlock {
    pub n_grid: usize,
    pub n_species: usize,
    pub n_times: usize,
    pub data: Vec<f64>,
}

pub fn read_trajectory_binary<R: Read>(mut r: R) -> std::io::Result<BinaryBlock> {
    let mut word = [0u8; 8];
    let mut header = [0usize; 3];
    for h in &mut header {
        r.read_exact(&mut word)?;
        *h = usize::try_from(u64::from_le_bytes(word))
            .map_err(|_| std::io::Error::new(std::io::ErrorKind::InvalidData, "header too large"))?;
    }
    let [n_grid, n_species, n_times] = header;
    let count = n_grid
        .checked_mul(n_species)
        .and_then(|v| v.checked_mul(n_times))
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidData, "header overflows"))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    if r.read(&mut word)? != 0 {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "trailing bytes"));
    }
    Ok(BinaryBlock {
        n_grid,
        n_species,
        n_times,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e+0");
        assert_eq!(fmt_f64(1e300), "1.0000000000000001e+300");
        let s = to_json(&serde_json::json!({"a": 0.1, "n": 3, "v": [1.5, null]}));
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("1.5000000000000000e+0"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_json(&[f64::NAN, 1.0]);
        assert!(s.contains("null"));
    }
}
