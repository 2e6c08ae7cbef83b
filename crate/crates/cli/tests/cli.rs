use std::process::{Command, Output};

fn ncspectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncspectra")).args(args).env("NCSPECTRA_GRID_N", "1500").output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn deform_at_zero_theta_has_no_theta_terms() {
    let out = ncspectra(&["deform", "--family", "even", "--a", "1", "--b", "1", "--c", "1", "--theta", "0", "--m", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    for term in v["terms"].as_array().unwrap() {
        let power = term["power"].as_i64().unwrap();
        if power == -6 {
            assert_eq!(term["coefficient"].as_f64().unwrap(), 0.0);
        }
    }
    assert!(v.get("generated").is_some());
}

#[test]
fn deform_inverse_adds_odd_terms() {
    let out = ncspectra(&["deform", "--family", "inverse", "--a", "2", "--b", "4", "--theta", "0.1", "--m", "1"]);
    let v = json(&out);
    let terms: Vec<(i64, f64)> = v["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| (t["power"].as_i64().unwrap(), t["coefficient"].as_f64().unwrap()))
        .collect();
    assert!(terms.contains(&(-3, 0.1)));
    assert!(terms.contains(&(-4, 0.1)));
}

#[test]
fn config_errors_exit_two() {
    let out = ncspectra(&["deform", "--family", "odd"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("even") && err.contains("inverse"));
    assert_eq!(ncspectra(&["sweep", "--family", "even", "--theta", "0.01,0.02"]).status.code(), Some(2));
    assert_eq!(ncspectra(&["deform", "--family", "even", "--mode", "both"]).status.code(), Some(2));
    assert_eq!(ncspectra(&["verify", "--family", "even", "--theta", "0.01", "--oracle", "off"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(&cfg, "# inverse run\nfamily = inverse\na = -2\nb = 0.5\ntheta = 0.3\nm = 1\nformat = json\n").unwrap();
    let status = ncspectra(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--theta",
        "0",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# schema=1\n# table=rows\n"));
    assert!(text.contains("inverse,0.0000000000000000e0,1,"));
}

#[test]
fn spectrum_rows_carry_both_modes_and_shift() {
    let out = ncspectra(&["spectrum", "--family", "even", "--theta", "0.01,0.05", "--m", "1", "--n", "0", "--no-timestamp"]);
    assert!(out.status.success());
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let e = row["e_physical"].as_f64().unwrap();
        let reduced = row["e_reduced"].as_f64().unwrap();
        let theta_m = row["theta_m"].as_f64().unwrap();
        assert!((e - reduced - 0.5 * theta_m).abs() < 1e-14);
        assert!(row["e_paper"].is_number() && row["e_rederived"].is_number());
        assert_eq!(row["mode"], "rederived");
        assert_eq!(row["oracle_verified"], true);
    }
    assert_eq!(v["fits"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_row_count_matches_ledger() {
    let out = ncspectra(&["verify", "--family", "even", "--a", "1", "--b", "0.5", "--c", "0.1", "--theta", "0.01", "--m", "2", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let ledger = v["ledger"].as_array().unwrap();
    assert_eq!(ledger.len(), 6);
    let indicial = ledger.iter().find(|r| r["entry"] == "indicial-root").unwrap();
    assert_eq!(indicial["verdict"], "rederived");
}

#[test]
fn oracle_reports_oscillator_levels() {
    let out = ncspectra(&["oracle", "--family", "even", "--a", "1", "--b", "0", "--c", "0", "--theta", "0", "--m", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    let e0 = v["levels"][0]["energy"].as_f64().unwrap();
    assert!((e0 - 4.0).abs() < 1e-5);
}

#[test]
fn singular_attraction_is_reported() {
    let out = ncspectra(&["oracle", "--family", "even", "--theta", "0.1", "--m", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fall to the center"));
}
