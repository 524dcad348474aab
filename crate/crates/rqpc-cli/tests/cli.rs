//! End-to-end tests of the `rqpc` binary: golden table bytes, replay
//! determinism across seeds and thread counts, config validation, and the
//! verification suites.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn rqpc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rqpc"))
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("rqpc-cli-test-{}-{name}", std::process::id()));
    p
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn rqpc");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

const SMALL_CHAIN: &str = "\
hops = 2
source_efficiency = 1
detector_efficiency = 1
coupling_efficiency = 1
distance_km = 2.6341
attenuation_km = 25
block_size = 2
blocks = 2
trials = 500
seed = 11
";

#[test]
fn table_default_matches_golden_bytes() {
    let out_path = tmp_path("table.csv");
    run_ok(rqpc().args(["table", "--out"]).arg(&out_path));
    let produced = fs::read(&out_path).expect("table artifact");
    let golden = include_bytes!("golden/table_default.csv");
    assert_eq!(
        produced,
        golden,
        "table output differs from the golden file\nproduced:\n{}",
        String::from_utf8_lossy(&produced)
    );
    let _ = fs::remove_file(&out_path);
}

#[test]
fn table_json_rows_parse() {
    let out = run_ok(rqpc().args(["table", "--p", "0.95,0.4", "--format", "json"]));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["status"], "ok");
    assert_eq!(rows[0]["m"], 3);
    assert_eq!(rows[0]["n"], 4);
    assert_eq!(rows[1]["status"], "infeasible");
}

#[test]
fn chain_replay_is_byte_identical_across_threads() {
    let cfg_path = tmp_path("chain.cfg");
    fs::write(&cfg_path, SMALL_CHAIN).unwrap();

    let out1 = tmp_path("chain1.jsonl");
    let out2 = tmp_path("chain2.jsonl");
    let out3 = tmp_path("chain3.jsonl");
    run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path)
            .args(["--threads", "1", "--out"])
            .arg(&out1),
    );
    run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path)
            .args(["--threads", "4", "--out"])
            .arg(&out2),
    );
    run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out3),
    );

    let a = fs::read(&out1).unwrap();
    let b = fs::read(&out2).unwrap();
    let c = fs::read(&out3).unwrap();
    assert_eq!(a, b, "1 vs 4 threads must produce identical artifacts");
    assert_eq!(a, c, "replay with the defaults must be identical");

    for p in [&cfg_path, &out1, &out2, &out3] {
        let _ = fs::remove_file(p);
    }
}

#[test]
fn thread_env_var_override_keeps_artifacts_identical() {
    let cfg_path = tmp_path("env.cfg");
    fs::write(&cfg_path, SMALL_CHAIN).unwrap();
    let plain = run_ok(rqpc().args(["chain", "--format", "json", "--config"]).arg(&cfg_path));
    let env = run_ok(rqpc()
        .env("RQPC_THREADS", "2")
        .args(["chain", "--format", "json", "--config"])
        .arg(&cfg_path));
    assert_eq!(plain.stdout, env.stdout);
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn seed_override_is_embedded_and_changes_stream() {
    let cfg_path = tmp_path("seeded.cfg");
    fs::write(&cfg_path, SMALL_CHAIN).unwrap();

    let base = run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path),
    );
    let reseeded = run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--seed", "999", "--config"])
            .arg(&cfg_path),
    );

    let base: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&base.stdout).unwrap().trim()).unwrap();
    let reseeded: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&reseeded.stdout).unwrap().trim()).unwrap();
    assert_eq!(base["seed"], 11);
    assert_eq!(reseeded["seed"], 999);
    assert_eq!(base["config_hash"], reseeded["config_hash"]);
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn chain_json_record_carries_analytic_block() {
    let cfg_path = tmp_path("analytic.cfg");
    fs::write(&cfg_path, SMALL_CHAIN).unwrap();
    let out = run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path),
    );
    let record: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&out.stdout).unwrap().trim()).unwrap();

    assert_eq!(record["record"], "chain_stats");
    assert_eq!(record["engine"], "pattern");
    let p = record["analytic"]["link_probability"].as_f64().unwrap();
    assert!((p - 0.9).abs() < 1e-4);
    let trials = record["stats"]["trials"].as_u64().unwrap();
    assert_eq!(trials, 500);
    assert!(
        record["stats"]["wall_clock"].is_null(),
        "wall clock must stay out of artifacts"
    );
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn chain_csv_format_has_one_data_row() {
    let cfg_path = tmp_path("csv.cfg");
    fs::write(&cfg_path, SMALL_CHAIN).unwrap();
    let out = run_ok(rqpc().args(["chain", "--config"]).arg(&cfg_path));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "comment, header, one row:\n{text}");
    assert!(lines[0].starts_with("# rqpc "));
    assert!(lines[1].starts_with("mode,engine,hops"));
    assert!(lines[2].starts_with("direct,pattern,2,2,2,1,500,"));
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn exact_engine_runs_from_config() {
    let cfg_path = tmp_path("exact.cfg");
    fs::write(
        &cfg_path,
        "engine = exact\nhops = 1\nsource_efficiency = 1\ndetector_efficiency = 1\n\
         coupling_efficiency = 1\ndistance_km = 2.6341\nattenuation_km = 25\n\
         block_size = 2\nblocks = 2\ntrials = 200\nseed = 3\n",
    )
    .unwrap();
    let out = run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path),
    );
    let record: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&out.stdout).unwrap().trim()).unwrap();
    assert_eq!(record["engine"], "exact");
    assert_eq!(record["stats"]["logical_errors"], 0);
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn butterfly_runs_and_labels_record() {
    let cfg_path = tmp_path("butterfly.cfg");
    fs::write(&cfg_path, SMALL_CHAIN).unwrap();
    let out = run_ok(
        rqpc()
            .args(["butterfly", "--format", "json", "--config"])
            .arg(&cfg_path),
    );
    let record: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&out.stdout).unwrap().trim()).unwrap();
    assert_eq!(record["record"], "butterfly_stats");
    assert_eq!(record["mode"], "butterfly");
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn single_trial_smoke_run() {
    let cfg_path = tmp_path("one.cfg");
    fs::write(&cfg_path, SMALL_CHAIN.replace("trials = 500", "trials = 1")).unwrap();
    let out = run_ok(
        rqpc()
            .args(["chain", "--format", "json", "--config"])
            .arg(&cfg_path),
    );
    let record: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&out.stdout).unwrap().trim()).unwrap();
    assert_eq!(record["stats"]["trials"], 1);
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg_path = tmp_path("bad.cfg");
    fs::write(&cfg_path, format!("{SMALL_CHAIN}purification = on\n")).unwrap();
    let out = rqpc()
        .args(["chain", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("purification"),
        "stderr must name the bad key: {stderr}"
    );
    let _ = fs::remove_file(&cfg_path);
}

#[test]
fn optimize_infeasible_is_data_not_error() {
    let out = run_ok(rqpc().args(["optimize", "--p", "0.4", "--format", "json"]));
    let record: serde_json::Value =
        serde_json::from_str(std::str::from_utf8(&out.stdout).unwrap().trim()).unwrap();
    assert_eq!(record["status"], "infeasible");
    assert_eq!(record["below_loss_bound"], true);
}

#[test]
fn verify_suite_runs_and_reports() {
    let out = run_ok(rqpc().args(["verify", "transfer"]));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("suite transfer"));
    assert!(text.contains("0 failures"));
}

#[test]
fn verify_rejects_unknown_and_missing_suite() {
    let out = rqpc().args(["verify", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
    let out = rqpc().arg("verify").output().unwrap();
    assert!(!out.status.success(), "missing suite name is a usage error");
}
