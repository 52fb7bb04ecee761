use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dfchannel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfchannel"))
        .args(args)
        .output()
        .expect("spawn dfchannel")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn channel_reports_protected_fock_state() {
    let v = json_of(&dfchannel(&["channel", "--alpha", "1.5", "--n", "2", "--Mz", "0.8"]));
    let r = &v["report"];
    assert!(r["fidelity_b"].as_f64().unwrap() > 1.0 - 1e-9);
    let amp = r["amplitude_a_out"][0].as_f64().unwrap();
    assert!((amp - 1.5 * (-0.8f64).exp()).abs() < 1e-9);
    assert_eq!(v["config"]["n"], 2);
    assert_eq!(v["command"], "channel");
}

#[test]
fn control_decays() {
    let v = json_of(&dfchannel(&["control", "--n", "1", "--Mz", "1"]));
    let fid = v["report"]["fidelity_b"].as_f64().unwrap();
    assert!((fid - (-2.0f64).exp()).abs() < 1e-12);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.cfg",
        "# protected channel\nalpha = 0.5   # coherent amplitude\nn = 1\nR = 2\nz = 0.25\nv = 1\n",
    );
    let v = json_of(&dfchannel(&["channel", "--config", &cfg, "--n", "3"]));
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["alpha"][0].as_f64(), Some(0.5));
    assert!(v["report"]["fidelity_b"].as_f64().unwrap() > 1.0 - 1e-9);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let to_stdout = dfchannel(&["stats", "--alpha", "1", "--n", "1"]);
    let to_file = dfchannel(&["stats", "--alpha", "1", "--n", "1", "--out", path.to_str().unwrap()]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let mut shown = json_of(&to_stdout);
    // Only the echoed output path differs.
    shown["config"]["out"] = written["config"]["out"].clone();
    assert_eq!(shown, written);
}

#[test]
fn vacuum_charfunc_csv_is_one() {
    let out = dfchannel(&[
        "charfunc",
        "--alpha",
        "0",
        "--n",
        "0",
        "--format",
        "csv",
        "--grid_count",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("beta1_re,beta1_im,beta2_re,beta2_im,value_re,value_im")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        assert!(row.ends_with(",1.0,0.0"), "{row}");
    }
}

#[test]
fn stats_moments_agree_with_closed_form() {
    let v = json_of(&dfchannel(&["stats", "--alpha", "0.8", "--n", "2"]));
    let r = &v["report"];
    for (k, m) in [
        ("mandel_a", "mandel_a"),
        ("mandel_b", "mandel_b"),
        ("covariance", "covariance"),
    ] {
        let x = r["moments"][m].as_f64().unwrap();
        let y = r["closed_form"][k].as_f64().unwrap();
        assert!((x - y).abs() < 1e-10, "{k}: {x} vs {y}");
    }
}

#[test]
fn verify_separates_tau_from_r() {
    let v = json_of(&dfchannel(&["verify", "--atoms", "2", "--g", "0.6", "--f", "1.1"]));
    assert!(v["report"]["tau"]["commutator_norm"].as_f64().unwrap() < 1e-10);
    assert!(v["report"]["r"]["commutator_norm"].as_f64().unwrap() > 0.1);
}

#[test]
fn raman_matches_resonant() {
    let base = json_of(&dfchannel(&["channel", "--alpha", "1", "--n", "1", "--Mz", "0.5"]));
    let raman = json_of(&dfchannel(&[
        "raman",
        "--alpha",
        "1",
        "--n",
        "1",
        "--Mz",
        "0.5",
        "--epsilon",
        "-1",
        "--Omega",
        "2",
    ]));
    let (x, y) = (&base["report"]["fidelity_b"], &raman["report"]["fidelity_b"]);
    assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn sweep_rows_follow_the_grid() {
    let out = dfchannel(&[
        "sweep",
        "--sweep_command",
        "channel",
        "--sweep_param",
        "Mz",
        "--sweep_start",
        "0",
        "--sweep_stop",
        "1",
        "--sweep_count",
        "5",
        "--alpha",
        "1",
        "--n",
        "1",
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "value");
    let col = header.iter().position(|h| *h == "amplitude_a_out_re").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    for (i, row) in rows.iter().enumerate() {
        let mz = i as f64 * 0.25;
        assert_eq!(row[0].parse::<f64>().unwrap(), mz);
        let amp: f64 = row[col].parse().unwrap();
        assert!((amp - (-mz).exp()).abs() < 1e-9);
    }
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        &["channel", "--n", "-1"][..],
        &["channel", "--alpha", "abc"],
        &["channel", "--nonsense", "1"],
        &["channel", "--theta", "0.3", "--g", "1", "--f", "1"],
        &["channel", "--config", "/nonexistent/dfchannel.cfg"],
    ] {
        let out = dfchannel(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "alpha = 1\n\nn = 1.5\n");
    let out = dfchannel(&["channel", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn truncation_failure_exits_two() {
    let out = dfchannel(&["channel", "--alpha", "3", "--n", "3", "--cutoff_cap", "12"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
