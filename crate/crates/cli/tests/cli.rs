use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dfs_core::montecarlo::NoiseConfig;
use serde_json::{json, Value};
use tempfile::TempDir;

fn dfs_sim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfs-sim"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--quiet")
        .env_remove("DFS_SIM_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn hopping_config(seed: u64) -> Value {
    json!({
        "seed": seed,
        "noise": serde_json::to_value(NoiseConfig::hopping_only(1250.0, 6e-4).unwrap()).unwrap(),
        "trajectories": 400,
        "fit": {"amplitude": 0.5, "t_min": 0.0},
    })
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = dfs_sim(dir.path(), &["simulate", "--trajectories", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("seed"));
}

#[test]
fn unknown_key_is_named_in_the_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({"seed": 1, "noise": {"environment": {"B": 4.1, "delta_B": 0.0}, "hoping": {}}}));
    let out = dfs_sim(dir.path(), &["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("hoping"), "{}", stderr(&out));
}

#[test]
fn unreadable_config_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let out = dfs_sim(dir.path(), &["simulate", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn zero_noise_gives_unit_contrast() {
    let dir = TempDir::new().unwrap();
    let noise = serde_json::to_value(NoiseConfig::noiseless()).unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({"seed": 4, "noise": noise, "trajectories": 20}));
    let out = dfs_sim(dir.path(), &["simulate", "--config", &cfg, "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = data_rows(&dir.path().join("out/simulate_contrast.csv"));
    assert_eq!(rows.len(), 9);
    for r in rows {
        for col in [1, 3, 5] {
            let v: f64 = r[col].parse().unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{r:?}");
        }
    }
    assert!(!dir.path().join("out/simulate_contrast.json").exists());
}

#[test]
fn outputs_are_byte_identical_and_carry_metadata() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &hopping_config(17));
    let read = |d: &Path| {
        ["simulate_contrast.csv", "simulate_contrast.json", "simulate_fit.json"]
            .map(|f| fs::read(d.join("out").join(f)).unwrap())
    };
    assert!(dfs_sim(dir.path(), &["simulate", "--config", &cfg]).status.success());
    let first = read(dir.path());
    assert!(dfs_sim(dir.path(), &["simulate", "--config", &cfg]).status.success());
    assert_eq!(first, read(dir.path()));

    let text = String::from_utf8(first[0].clone()).unwrap();
    assert!(text.starts_with("# metadata: "));
    assert!(text.lines().nth(1).unwrap().starts_with("t_s,parity,parity_se"));
    let doc = read_json(&dir.path().join("out/simulate_contrast.json"));
    assert_eq!(doc["metadata"]["seed"], 17);
    assert_eq!(doc["metadata"]["config"]["trajectories"], 400);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &hopping_config(17));
    assert!(dfs_sim(dir.path(), &["simulate", "--config", &cfg, "--seed", "99"]).status.success());
    let doc = read_json(&dir.path().join("out/simulate_fit.json"));
    assert_eq!(doc["metadata"]["seed"], 99);
}

#[test]
fn single_cell_sweep_matches_simulate() {
    let dir = TempDir::new().unwrap();
    let mut v = hopping_config(5);
    v["sweep"] = json!({"hop_rates": [6e-4], "t_phi": [1250.0], "tau": [100.0], "t_max": 1600.0});
    let cfg = write_config(dir.path(), "c.json", &v);
    assert!(dfs_sim(dir.path(), &["simulate", "--config", &cfg]).status.success());
    assert!(dfs_sim(dir.path(), &["sweep", "--config", &cfg]).status.success());
    let sim = read_json(&dir.path().join("out/simulate_fit.json"));
    let sweep = read_json(&dir.path().join("out/sweep.json"));
    assert_eq!(sim["data"]["coherence_time_s"], sweep["data"][0]["fit"]["coherence_time_s"]);
    let rows = data_rows(&dir.path().join("out/sweep.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][6], "ok");
}

#[test]
fn halving_tau_quadruples_slow_regime_time() {
    let dir = TempDir::new().unwrap();
    let mut v = hopping_config(8);
    v["trajectories"] = json!(3000);
    v["sweep"] = json!({"hop_rates": [2e-3], "t_phi": [2500.0], "tau": [100.0, 50.0], "t_max": 1600.0, "engine": "PhaseOnly"});
    let cfg = write_config(dir.path(), "c.json", &v);
    let out = dfs_sim(dir.path(), &["sweep", "--config", &cfg, "--format", "json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = read_json(&dir.path().join("out/sweep.json"));
    let t = |i: usize| doc["data"][i]["fit"]["coherence_time_s"].as_f64().unwrap();
    let ratio = t(1) / t(0);
    assert!((ratio - 4.0).abs() < 0.6, "ratio {ratio}");
}

#[test]
fn budget_text_and_json_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &json!({"budget": {"hopping_limit": 3.9e4}}));
    let out = dfs_sim(dir.path(), &["budget", "--config", &cfg]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = read_json(&dir.path().join("out/budget.json"));
    let entries = doc["data"].as_array().unwrap();
    let text = fs::read_to_string(dir.path().join("out/budget.txt")).unwrap();
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.len(), entries.len());
    for (line, e) in lines.iter().zip(entries) {
        let cols: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(cols[1], e["mechanism"].as_str().unwrap());
        let limit: f64 = cols[2].parse().unwrap();
        let exact = e["limit"].as_f64().unwrap();
        assert!((limit - exact).abs() <= 1e-4 * exact);
    }
    assert_eq!(entries[0]["mechanism"], "hopping");
}

#[test]
fn larger_pulse_error_reorders_budget() {
    let dir = TempDir::new().unwrap();
    let mut noise = serde_json::to_value(NoiseConfig::measured_default()).unwrap();
    noise["pulse_errors"]["epsilon_rms"] = json!(0.02);
    let cfg = write_config(dir.path(), "c.json", &json!({"noise": noise, "budget": {"hopping_limit": 3.9e4}}));
    assert!(dfs_sim(dir.path(), &["budget", "--config", &cfg]).status.success());
    let doc = read_json(&dir.path().join("out/budget.json"));
    // 2τ/(π·0.02)² ≈ 5.07e4 s sits between hopping and scattering.
    assert_eq!(doc["data"][1]["mechanism"], "pulses");
}

#[test]
fn error_free_pulse_bench_is_flat_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &json!({"bench": {"n": [1, 2, 40], "pulses": {"epsilon_systematic": 0.0, "epsilon_rms": 0.0, "calibration_residual": 0.0}}}),
    );
    assert!(dfs_sim(dir.path(), &["bench-pulses", "--config", &cfg, "--shots", "10"]).status.success());
    for r in data_rows(&dir.path().join("out/bench_pulses.csv")) {
        for v in &r[1..] {
            assert!(v.parse::<f64>().unwrap().abs() < 1e-15, "{r:?}");
        }
    }
}

#[test]
fn bench_reverse_beats_calibrated_at_forty() {
    let dir = TempDir::new().unwrap();
    assert!(dfs_sim(dir.path(), &["bench-pulses", "--shots", "500"]).status.success());
    let rows = data_rows(&dir.path().join("out/bench_pulses.csv"));
    let last = rows.last().unwrap();
    assert_eq!(last[0], "40");
    let (cal, rev): (f64, f64) = (last[2].parse().unwrap(), last[3].parse().unwrap());
    assert!(rev <= 0.5 * cal);
}

#[test]
fn fit_recovers_noiseless_exponential() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("# synthetic\nt,y,sigma\n");
    for i in 0..20 {
        let t = i as f64 * 50.0;
        csv.push_str(&format!("{t},{},0.01\n", 0.8 * (-t / 321.0f64).exp() + 0.05));
    }
    let p = dir.path().join("curve.csv");
    fs::write(&p, csv).unwrap();
    let out = dfs_sim(dir.path(), &["fit", "--input", p.to_str().unwrap(), "--model", "exponential"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc = read_json(&dir.path().join("out/fit.json"));
    let params = doc["data"]["params"].as_array().unwrap();
    assert!((params[1].as_f64().unwrap() - 321.0).abs() < 1e-6);
    assert!((params[2].as_f64().unwrap() - 0.05).abs() < 1e-9);
}

#[test]
fn fit_reads_simulate_output() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &hopping_config(2));
    assert!(dfs_sim(dir.path(), &["simulate", "--config", &cfg, "--format", "csv"]).status.success());
    let input = dir.path().join("out/simulate_contrast.csv");
    let out = dfs_sim(
        dir.path(),
        &["fit", "--input", input.to_str().unwrap(), "--guess", "0.5,3e4,0", "--fix", "A,c", "--pooled-sigma"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let t = read_json(&dir.path().join("out/fit.json"))["data"]["params"][1].as_f64().unwrap();
    assert!(t > 1e4 && t < 1e5, "{t}");
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.csv");
    fs::write(&p, "t,y\n0,1.0\n1,0.9\n2,oops\n").unwrap();
    let out = dfs_sim(dir.path(), &["fit", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn output_directory_from_environment() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("from-env");
    let status = Command::new(env!("CARGO_BIN_EXE_dfs-sim"))
        .args(["bench-pulses", "--shots", "5", "--quiet", "--format", "json"])
        .env("DFS_SIM_OUT", &target)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(target.join("bench_pulses.json").exists());
}

#[test]
fn example_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dfs-sim")).arg("example-config").output().unwrap();
    assert!(out.status.success());
    let p = dir.path().join("example.json");
    fs::write(&p, &out.stdout).unwrap();
    let run = dfs_sim(dir.path(), &["bench-pulses", "--config", p.to_str().unwrap(), "--shots", "5"]);
    assert!(run.status.success(), "{}", stderr(&run));
}
