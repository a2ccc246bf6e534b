use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyson-lab"))
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(args)
        .env_remove("DYSON_LAB_OUT")
        .output()
        .expect("spawn dyson-lab")
}

fn runs(out: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = match fs::read_dir(out.join("runs")) {
        Ok(rd) => rd.map(|e| e.unwrap().path()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn only_run(out: &Path) -> PathBuf {
    let r = runs(out);
    assert_eq!(r.len(), 1, "{r:?}");
    r[0].clone()
}

#[test]
fn pressure_at_zero_beta_is_log_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &[
            "pressure", "--alpha", "2", "--beta", "0", "--depths", "4..12",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let result = json(&only_run(dir.path()).join("result.json"));
    assert_eq!(result["status"], "ok");
    let rows = result["data"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for r in rows {
        assert!((r["log_lambda"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    }
    let csv = fs::read_to_string(only_run(dir.path()).join("pressure.csv")).unwrap();
    assert!(csv.starts_with("m,log_lambda"));
}

#[test]
fn griffiths_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &[
            "verify-griffiths",
            "--alpha",
            "2",
            "--n",
            "6",
            "--beta-grid",
            "0:0.6:0.1",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let result = json(&only_run(dir.path()).join("result.json"));
    assert_eq!(result["status"], "pass");
    assert_eq!(result["summary"]["violations"], 0);
}

#[test]
fn divergent_condition_iii_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["modulus", "--alpha", "1.4", "--beta", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("condition (iii)"), "{err}");
    let line = err.lines().find(|l| l.starts_with('{')).unwrap();
    let v: Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["error"]["kind"], "condition-iii-divergent");
    assert!(runs(dir.path()).is_empty());
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let out = dir.path().join("out");
    let o = lab(&out, &["--config", cfg.to_str().unwrap(), "summability"]);
    assert_eq!(o.status.code(), Some(0));
    let m = json(&only_run(&out).join("manifest.json"));
    assert_eq!(m["parameters"]["alpha"], 2.0);
    assert!(m["overrides"].as_array().unwrap().is_empty());
    assert!(m["inputs"][0]["path"]
        .as_str()
        .unwrap()
        .ends_with("empty.toml"));
}

#[test]
fn flag_beats_config_and_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[model]\nalpha = 3.0\nbeta = 0.2\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(
        &out,
        &[
            "--config",
            cfg.to_str().unwrap(),
            "pressure",
            "--alpha",
            "2.5",
            "--depths",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let m = json(&only_run(&out).join("manifest.json"));
    assert_eq!(m["parameters"]["alpha"], 2.5);
    assert_eq!(m["parameters"]["beta"], 0.2);
    let ov = m["overrides"].as_array().unwrap();
    assert_eq!(ov.len(), 1);
    assert_eq!(ov[0]["key"], "alpha");
    assert_eq!(ov[0]["config"], 3.0);
    assert_eq!(ov[0]["flag"], 2.5);
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[model]\nbeta = 0.3\nalpha = 2.x\n").unwrap();
    let o = lab(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "summability"],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:3"), "{err}");

    fs::write(&cfg, "[model]\nalpah = 2\n").unwrap();
    let o = lab(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "summability"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpah"));
}

#[test]
fn bad_flags_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        lab(dir.path(), &["pressure", "--beta", "-1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lab(dir.path(), &["pressure", "--depths", "3..x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(lab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        lab(dir.path(), &["verify-lsi", "--n", "30"]).status.code(),
        Some(2)
    );
    assert_eq!(
        lab(dir.path(), &["verify-lsi", "--mask", "sideways"])
            .status
            .code(),
        Some(2)
    );
    assert!(runs(dir.path()).is_empty());
}

#[test]
fn failed_verification_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &[
            "verify-lsi",
            "--n",
            "3",
            "--constant",
            "0.2",
            "--trials",
            "200",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let run = only_run(dir.path());
    let w = json(&run.join("witness.json"));
    assert!(w["ratio"].as_f64().unwrap() > 1.0);
    assert_eq!(w["table"].as_array().unwrap().len(), 8);
    let m = json(&run.join("manifest.json"));
    assert_eq!(m["exit_code"], 1);
    assert_eq!(m["status"], "fail");
}

#[test]
fn runs_are_append_only_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify-gcb", "--n", "4", "--trials", "300", "--seed", "11"];
    assert_eq!(lab(dir.path(), &args).status.code(), Some(0));
    assert_eq!(lab(dir.path(), &args).status.code(), Some(0));
    let r = runs(dir.path());
    assert_eq!(r.len(), 2);
    assert!(r[0].to_str().unwrap().ends_with("-001") && r[1].to_str().unwrap().ends_with("-002"));
    let a = fs::read(r[0].join("report.json")).unwrap();
    let b = fs::read(r[1].join("report.json")).unwrap();
    assert_eq!(a, b);
    let m = json(&r[0].join("manifest.json"));
    assert_eq!(m["seeds"]["family"], 11);
    for f in m["outputs"].as_array().unwrap() {
        let bytes = fs::read(r[0].join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(bytes.len() as u64, f["bytes"].as_u64().unwrap());
    }
}

#[test]
fn coupling_table_input_is_digested() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("nn.txt");
    fs::write(&table, "# nearest neighbour\ntail zero\n1 1.0\n").unwrap();
    let out = dir.path().join("out");
    let o = lab(
        &out,
        &[
            "pressure",
            "--couplings",
            table.to_str().unwrap(),
            "--beta",
            "0.5",
            "--depths",
            "1",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let run = only_run(&out);
    let result = json(&run.join("result.json"));
    let got = result["data"]["rows"][0]["log_lambda"].as_f64().unwrap();
    assert!((got - (2.0 * 0.5f64.cosh()).ln()).abs() < 1e-12);
    let m = json(&run.join("manifest.json"));
    assert!(m["inputs"][0]["path"].as_str().unwrap().ends_with("nn.txt"));

    fs::write(&table, "tail zero\n1 1.0\n3 0.5\n").unwrap();
    let o = lab(&out, &["pressure", "--couplings", table.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3"));
}

#[test]
fn large_measures_are_cached_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["susceptibility", "--n", "12", "--beta-grid", "0.25"];
    assert_eq!(lab(dir.path(), &args).status.code(), Some(0));
    assert_eq!(lab(dir.path(), &args).status.code(), Some(0));
    let r = runs(dir.path());
    let first = json(&r[0].join("manifest.json"));
    let second = json(&r[1].join("manifest.json"));
    assert_eq!(first["cache"][0]["hit"], false);
    assert_eq!(second["cache"][0]["hit"], true);
    assert_eq!(
        fs::read(r[0].join("result.json")).unwrap(),
        fs::read(r[1].join("result.json")).unwrap()
    );
}

#[test]
fn report_summarizes_stored_runs() {
    let dir = tempfile::tempdir().unwrap();
    lab(dir.path(), &["summability", "--alpha", "1.6"]);
    lab(dir.path(), &["intermediate", "--n", "2"]);
    lab(
        dir.path(),
        &[
            "verify-lsi",
            "--n",
            "2",
            "--constant",
            "0.1",
            "--trials",
            "50",
        ],
    );
    let o = lab(dir.path(), &["report"]);
    assert_eq!(o.status.code(), Some(0));
    let r = runs(dir.path());
    let report = r
        .iter()
        .find(|p| p.to_str().unwrap().contains("report-"))
        .unwrap();
    let summary = json(&report.join("summary.json"));
    let rows = summary.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().filter(|r| r["status"] == "fail").count(), 1);
    let m = json(&report.join("manifest.json"));
    assert_eq!(m["inputs"].as_array().unwrap().len(), 3);
    let o = lab(dir.path(), &["report", "--command", "summability"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn mc_susceptibility_writes_streams() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        dir.path(),
        &[
            "susceptibility",
            "--n",
            "6",
            "--beta-grid",
            "0.2",
            "--mode",
            "both",
            "--sweeps",
            "2000",
            "--burnin",
            "200",
            "--chains",
            "2",
            "--stream-csv",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let run = only_run(dir.path());
    assert!(run.join("stream-b000-c00.csv").exists() && run.join("stream-b000-c01.csv").exists());
    let result = json(&run.join("result.json"));
    let row = &result["data"]["rows"][0];
    let exact = row["exact_correlation_sum"].as_f64().unwrap();
    for c in row["mc"].as_array().unwrap() {
        let est = &c["correlation_sum"];
        let (mean, se) = (
            est["mean"].as_f64().unwrap(),
            est["stderr"].as_f64().unwrap(),
        );
        assert!(
            (mean - exact).abs() < 5.0 * se + 1e-9,
            "{mean} {se} {exact}"
        );
    }
    let m = json(&run.join("manifest.json"));
    assert_eq!(m["seeds"]["sampler"], 1);
}

#[test]
fn out_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dyson-lab"))
        .args(["--quiet", "summability"])
        .env("DYSON_LAB_OUT", dir.path())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(runs(dir.path()).len(), 1);
}
