use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use turing_one::formats::read_trajectory_binary;
use turing_one_core::classify::subsystem_poles;
use turing_one_core::grayscott::{Branch, GsParams};
use turing_one_core::model::{LambdaPolicy, SpatialSpec};
use turing_one_core::numerics::eigenvalues;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turing-one"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let stable = write(
        dir.path(),
        "d.json",
        r#"{"A": [[-1, 0], [0, -2]], "diffuser_index": 1, "mu": 1e-3, "L": 1}"#,
    );
    let out = run(&["analyze", &stable]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["kind"], "Stable");

    let square = write(
        dir.path(),
        "ns.json",
        r#"{"A": [[1, 2, 3], [4, 5, 6]], "diffuser_index": 0, "mu": 1, "L": 1}"#,
    );
    let out = run(&["analyze", &square]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 0"));

    let broken = write(dir.path(), "b.json", "{\"A\": [[-1, 0],\n [0, -2]]\n \"mu\": 1}");
    let out = run(&["analyze", &broken]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let unstable = write(
        dir.path(),
        "u.json",
        r#"{"A": [[1, 0], [0, -2]], "diffuser_index": 1, "mu": 1e-3, "L": 1}"#,
    );
    assert_eq!(code(&run(&["analyze", &unstable])), 12);

    assert_eq!(code(&run(&["analyze", "missing.json"])), 2);
    assert_eq!(code(&run(&["analyze", "grayscott:Q"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn analyze_set_a() {
    let out = run(&["analyze", "grayscott:A", "--evidence"]);
    assert_eq!(code(&out), 10);
    let v = json(&out);
    assert_eq!(v["kind"], "TypeI");
    assert_eq!(v["dominant_modes"], serde_json::json!([2]));
    assert_eq!(v["condition_flags"]["type_one"], true);
    assert_eq!(v["evidence"].as_array().unwrap().len(), 201);
}

#[test]
fn analyze_type_two() {
    // Ã = [[1, 0], [0, -3]] is not Hurwitz while A is: the limit dominates.
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "t2.json",
        r#"{"A": [[0.5, 0, 1], [0, -3, 0], [-2, 0, -2]], "diffuser_index": 2, "mu": 1e-2, "L": 1}"#,
    );
    let out = run(&["analyze", &m]);
    let v = json(&out);
    assert_eq!(code(&out), 11, "{v}");
    assert_eq!(v["attained_at"], serde_json::json!(["limit"]));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for tag in ["1", "2"] {
        let locus = d.join(format!("locus{tag}.csv"));
        assert_eq!(
            code(&run(&[
                "locus",
                "grayscott:A",
                "--points",
                "50",
                "--out",
                locus.to_str().unwrap()
            ])),
            0
        );
        let sweep = d.join(format!("sweep{tag}"));
        assert_eq!(
            code(&run(&[
                "sweep",
                "--grid",
                "20x20",
                "--out-dir",
                sweep.to_str().unwrap()
            ])),
            0
        );
        let sim = d.join(format!("sim{tag}"));
        let args = [
            "simulate",
            "grayscott:A",
            "--t-final",
            "40",
            "--dt",
            "0.02",
            "--n",
            "32",
            "--out-dir",
            sim.to_str().unwrap(),
        ];
        assert_eq!(code(&run(&args)), 0);
        let out = run(&["analyze", "grayscott:B"]);
        std::fs::write(d.join(format!("analyze{tag}.json")), &out.stdout).unwrap();
    }
    let same = |a: &str, b: &str| {
        assert_eq!(
            std::fs::read(d.join(a)).unwrap(),
            std::fs::read(d.join(b)).unwrap(),
            "{a}"
        )
    };
    same("locus1.csv", "locus2.csv");
    same("analyze1.json", "analyze2.json");
    same("sweep1/region.csv", "sweep2/region.csv");
    same("sweep1/summary.json", "sweep2/summary.json");
    for f in ["trajectory.csv", "trajectory.bin", "spectra.csv", "report.json"] {
        same(&format!("sim1/{f}"), &format!("sim2/{f}"));
    }
}

#[test]
fn locus_single_point_is_spec_a() {
    let out = run(&["locus", "grayscott:A", "--lambda-min", "0", "--lambda-max", "0"]);
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let p = GsParams::preset_a();
    let j = p.jacobian_at(&p.equilibrium(Branch::Plus).unwrap());
    let eig: Vec<_> = eigenvalues(&j).unwrap().values().collect();
    assert_eq!(rows.len(), eig.len());
    for r in &rows {
        let (re, im): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!(eig
            .iter()
            .any(|z| (z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12));
        assert_eq!(&r[4], "0");
    }
}

#[test]
fn locus_flags_discrete_modes_and_respects_json() {
    assert_eq!(code(&run(&["locus", "grayscott:A", "--json"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("l.csv");
    let out = run(&[
        "locus",
        "grayscott:A",
        "--json",
        "--points",
        "100",
        "--k-max",
        "10",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    // 100 grid gains plus λ_0 shares the 0 row, so λ_1..λ_10 are added
    assert_eq!(v["gains"], 110);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let flagged = text.lines().skip(1).filter(|l| !l.ends_with(',')).count();
    assert_eq!(flagged, 11 * 3);
    assert_eq!(
        code(&run(&[
            "locus",
            "grayscott:A",
            "--lambda-min",
            "2",
            "--lambda-max",
            "1"
        ])),
        2
    );
}

#[test]
fn sweep_windows() {
    let out = run(&[
        "sweep",
        "--grid",
        "1x1",
        "--gamma-range",
        "1e-2,1e-2",
        "--k-range",
        "6.2e-2,6.2e-2",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["type_one_cells"], 1);
    assert_eq!(v["marks"][0]["inside"], true);

    let out = run(&[
        "sweep",
        "--grid",
        "10x10",
        "--gamma-range",
        "0.1,0.5",
        "--k-range",
        "2e-2,1e-1",
        "--json",
    ]);
    assert_eq!(json(&out)["type_one_cells"], 0);

    assert_eq!(code(&run(&["sweep", "--gamma-range", "5e-2,1e-3"])), 2);
    assert_eq!(code(&run(&["sweep", "--grid", "0x5"])), 2);
    assert_eq!(code(&run(&["sweep", "--grid", "4x4", "--k-range", "0.1,0.1"])), 2);
}

#[test]
fn sweep_config_precedence_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"grid": [7, 9], "gamma_range": [1e-3, 2e-2], "seed": 5}"#,
    );
    let out = run(&["sweep", "--config", &cfg, "--grid", "3x4", "--json"]);
    let v = json(&out);
    assert_eq!(v["grid"], serde_json::json!([3, 4]));
    assert_eq!(v["gamma_range"][1].as_f64(), Some(2e-2));

    let bad = write(dir.path(), "x.json", r#"{"gird": [7, 9]}"#);
    assert_eq!(code(&run(&["sweep", "--config", &bad])), 2);

    let out = Command::new(env!("CARGO_BIN_EXE_turing-one"))
        .args(["sweep", "--grid", "4x4"])
        .env("TURING_ONE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_verification_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("s");
    let out = run(&[
        "sweep",
        "--grid",
        "40x40",
        "--verify-lemma3",
        "--seed",
        "9",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let checked = v["verification"]["checked"].as_u64().unwrap();
    assert!(checked >= 1);
    assert_eq!(v["verification"]["agreed"].as_u64(), Some(checked));

    let manifest: Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sweep");
    for entry in manifest["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(entry["path"].as_str().unwrap()).unwrap();
        assert_eq!(
            entry["sha256"].as_str().unwrap(),
            turing_one::model_file::sha256_hex(&bytes)
        );
    }
}

#[test]
fn simulate_without_diffusion_has_no_pattern() {
    let out = run(&[
        "simulate",
        "grayscott:A",
        "--mu",
        "0",
        "--amplitude",
        "0",
        "--t-final",
        "200",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["pattern"], false);
    assert!(r["k_star"].is_null());
}

#[test]
fn simulate_linearized_mode_three() {
    let out = run(&[
        "simulate",
        "grayscott:A",
        "--linearized",
        "--seed-mode",
        "3",
        "--t-final",
        "20000",
        "--atol",
        "1e-16",
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    let p = GsParams::preset_a();
    let sys = turing_one_core::model::LinearSystem::new(p.jacobian_at(&p.equilibrium(Branch::Plus).unwrap())).unwrap();
    let spec = SpatialSpec::new(p.mu, 1.0, 3, LambdaPolicy::Discrete).unwrap();
    let predicted = subsystem_poles(&sys.transfer_function().unwrap(), &spec, 3)
        .unwrap()
        .max_real();
    let measured = r["growth_rate"].as_f64().unwrap();
    assert_eq!(r["k_star"], 3);
    assert!(
        ((measured - predicted) / predicted).abs() < 0.05,
        "{measured} vs {predicted}"
    );
}

#[test]
fn simulate_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "m.json",
        r#"{"A": [[-1, 0.5, 0], [0, -2, 0], [0.3, 0, -1]], "diffuser_index": 0, "mu": 1e-2, "L": 2}"#,
    );
    let out_dir = dir.path().join("o");
    let out = run(&[
        "simulate",
        &model,
        "--n",
        "24",
        "--t-final",
        "5",
        "--sample-every",
        "1",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let bin = read_trajectory_binary(std::fs::File::open(out_dir.join("trajectory.bin")).unwrap()).unwrap();
    assert_eq!((bin.n_grid, bin.n_species, bin.n_times), (24, 3, 6));
    let text = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    // diffuser moved last, the others keep their order
    assert_eq!(lines.next(), Some("time,xi,s1,s2,s0"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6 * 24);
    for (i, row) in rows.iter().enumerate() {
        let (t, j) = (i / 24, i % 24);
        assert_eq!(row[0], t as f64);
        for s in 0..3 {
            assert_eq!(row[2 + s], bin.data[(t * 3 + s) * 24 + j]);
        }
    }
    let report: Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(report.get("k_star").is_some());
}

#[test]
fn simulate_errors() {
    assert_eq!(code(&run(&["simulate", "grayscott:A", "--n", "8"])), 2);
    assert_eq!(code(&run(&["simulate", "grayscott:A", "--dt", "1.0"])), 2);
    assert_eq!(
        code(&run(&[
            "simulate",
            "grayscott:A",
            "--t-final",
            "100",
            "--window",
            "50,200"
        ])),
        2
    );
    let dir = tempfile::tempdir().unwrap();
    let blow = write(
        dir.path(),
        "u.json",
        r#"{"A": [[2, 0], [0, 2]], "diffuser_index": 1, "mu": 1e-3, "L": 1}"#,
    );
    let out = run(&["simulate", &blow, "--t-final", "100", "--n", "16"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged at t ="));
}

#[test]
fn equilibria_listing() {
    let out = run(&["equilibria", "--gamma", "1e-2", "--k", "6.2e-2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let eqs = v["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 3);
    assert_eq!(eqs[0]["branch"], "zero");
    let state: Vec<f64> = eqs[0]["state"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(state, [1.0, 0.0, 0.0]);
    assert_eq!(eqs[1]["hurwitz"], true);
    assert_eq!(eqs[1]["verdict"], "TypeI");

    // w < 0: only the zero branch
    let out = run(&["equilibria", "--gamma", "0.2", "--k", "6.2e-2"]);
    assert!(json(&out)["w"].as_f64().unwrap() < 0.0);
    assert_eq!(json(&out)["equilibria"].as_array().unwrap().len(), 1);

    assert_eq!(code(&run(&["equilibria", "--gamma", "0", "--k", "0"])), 2);
}
