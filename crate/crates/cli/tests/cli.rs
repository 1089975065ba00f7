use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use photon_collapse_cli::runner::{verify_outputs, RunManifest, Source};
use serde_json::Value;

const MINIMAL: &str = include_str!("../../../docs/examples/minimal-trajectory.toml");

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_photon-collapse"));
    for var in ["PHOTON_COLLAPSE_SEED", "PHOTON_COLLAPSE_THREADS", "PHOTON_COLLAPSE_OUT"] {
        c.env_remove(var);
    }
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn zero_rate_trajectory_has_no_events() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        &MINIMAL.replace("mu_cell = 10.0", "mu_cell = 0.0"),
    );
    let out = tmp.path().join("out");
    let o = run(bin().args(["trajectory", "--config"]).arg(&cfg).arg("--out").arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert!(m.complete && m.passed);
    assert_eq!(m.derived["mean_events"], 0.0);
    let v: Value = serde_json::from_slice(&fs::read(out.join("trajectories.json")).unwrap()).unwrap();
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 100);
    assert!(records.iter().all(|r| r["events"].as_array().unwrap().is_empty()));
}

#[test]
fn same_seed_reproduces_result_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", MINIMAL);
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let o = run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out));
        assert!(o.status.success());
        let m = manifest(&out);
        verify_outputs(&out, &m).unwrap();
        runs.push(m);
    }
    assert_eq!(runs[0].outputs, runs[1].outputs);
    assert_eq!(runs[0].config_hash, runs[1].config_hash);

    let out = tmp.path().join("other");
    run(bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--seed", "2", "--out"])
        .arg(&out));
    let m = manifest(&out);
    assert_ne!(m.config_hash, runs[0].config_hash);
    assert_ne!(m.outputs, runs[0].outputs);
}

#[test]
fn flag_beats_env_beats_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", MINIMAL);
    let out = tmp.path().join("out");

    run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out));
    let m = manifest(&out);
    assert_eq!((m.seed, m.sources["seed"]), (1, Source::File));

    run(bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .env("PHOTON_COLLAPSE_SEED", "5")
        .env("PHOTON_COLLAPSE_OUT", &out));
    let m = manifest(&out);
    assert_eq!((m.seed, m.sources["seed"]), (5, Source::Env));
    assert_eq!(m.sources["output"], Source::Env);

    run(bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .args(["--seed", "9", "--threads", "2", "--out"])
        .arg(&out)
        .env("PHOTON_COLLAPSE_SEED", "5"));
    let m = manifest(&out);
    assert_eq!((m.seed, m.sources["seed"]), (9, Source::Flag));
    assert_eq!((m.threads, m.sources["threads"]), (2, Source::Flag));
}

#[test]
fn defaulted_keys_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", MINIMAL);
    let out = tmp.path().join("out");
    run(bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out));
    let m = manifest(&out);
    for key in ["collapse.a", "lattice.cell_size", "basis.max_total", "times.dt"] {
        assert!(m.defaults_applied.iter().any(|k| k == key), "{key}");
    }
    assert!(!m.defaults_applied.iter().any(|k| k == "collapse.b"));
    assert_eq!(m.config["collapse"]["b"], 4.0);
}

#[test]
fn exit_codes_distinguish_outcomes() {
    let tmp = tempfile::tempdir().unwrap();

    let bad = write(tmp.path(), "bad.toml", &MINIMAL.replace("b = 4.0", "b = -1.0"));
    let o = run(bin().arg("run").arg("--config").arg(&bad));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("collapse.b"));

    let strict = write(
        tmp.path(),
        "strict.toml",
        "experiment = \"master\"\n[collapse]\nlambda = 1.0\n[initial]\nterms = [{ occupation = [0], amplitude = [1.0, 0.0] }, { occupation = [2], amplitude = [1.0, 0.0] }]\n[times]\nt_final = 1.0\ndt = 0.1\n[checks]\ndephasing_law = 1e-300\n",
    );
    let out = tmp.path().join("strict");
    let o = run(bin().arg("master").arg("--config").arg(&strict).arg("--out").arg(&out));
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert!(m.complete && !m.passed);

    let ring = write(
        tmp.path(),
        "ring.toml",
        "experiment = \"master\"\n[lattice]\ncells_per_axis = 4\n[basis]\nmax_total = 1\n[collapse]\nlambda = 1.0\n[initial]\noccupation = [1, 0, 0, 0]\n",
    );
    let out = tmp.path().join("ring");
    let o = run(bin().arg("master").arg("--config").arg(&ring).arg("--out").arg(&out));
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(&out);
    assert!(!m.complete && !m.passed);
    assert!(m.error.unwrap().contains("kernel"));
    assert!(m.outputs.is_empty());

    let o = run(bin().arg("shadow").arg("--config").arg(&bad));
    assert_eq!(o.status.code(), Some(2));
    let o = run(bin().args(["run", "--preset", "no-such-preset"]));
    assert_eq!(o.status.code(), Some(2));
    let o = run(bin().args(["run", "--seed", "9223372036854775808", "--preset", "headline-estimates"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn custom_hamiltonian_is_read_relative_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    write(
        tmp.path(),
        "h.json",
        r#"{"dim": 3, "entries": [[1, 1, 1.0, 0.0], [2, 2, 2.0, 0.0]]}"#,
    );
    let cfg = write(
        tmp.path(),
        "c.toml",
        "experiment = \"master\"\n[basis]\nmax_total = 2\n[collapse]\nlambda = 0.0\n[hamiltonian]\nkind = \"custom\"\nfile = \"h.json\"\n[initial]\nterms = [{ occupation = [0], amplitude = [1.0, 0.0] }, { occupation = [1], amplitude = [1.0, 0.0] }]\n[times]\nt_final = 0.5\ndt = 0.01\n",
    );
    let out = tmp.path().join("out");
    let o = run(bin().arg("master").arg("--config").arg(&cfg).arg("--out").arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Zero collapse rate: |rho_01| stays at 1/2 while its phase rotates at omega = 1.
    let v: Value = serde_json::from_slice(&fs::read(out.join("evolution.json")).unwrap()).unwrap();
    let last = v["states"].as_array().unwrap().last().unwrap();
    let (re, im) = (last["re"][0][1].as_f64().unwrap(), last["im"][0][1].as_f64().unwrap());
    assert!(((re * re + im * im).sqrt() - 0.5).abs() < 1e-9);
    assert!((im.atan2(re) - 0.5).abs() < 1e-6);
}

#[test]
fn estimate_preset_emits_six_records() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("est");
    let o = run(bin()
        .args(["estimate", "--preset", "headline-estimates", "--out"])
        .arg(&out));
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&fs::read(out.join("estimates.json")).unwrap()).unwrap();
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 6);
    let boson = records.iter().find(|r| r["name"] == "boson_sampling_anomaly").unwrap();
    assert_eq!(boson["status"], "discrepancy");
    let csv = fs::read_to_string(out.join("estimates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn preset_commands_round_trip() {
    let o = run(bin().arg("presets"));
    let listing = String::from_utf8(o.stdout).unwrap();
    assert!(listing.contains("dust-grain-shadow"));
    let o = run(bin().args(["show-preset", "grw-cross-validation"]));
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(photon_collapse_cli::parse_config(&text).is_ok());
    let o = run(bin().args(["validate", "--preset", "energy-csl-hopping"]));
    assert!(o.status.success());
    let o = run(bin().args(["master", "--preset", "headline-estimates"]));
    assert_eq!(o.status.code(), Some(2));
}
