use std::process::Command;

fn srt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_srt"))
}

#[test]
fn config_errors_exit_with_two() {
    let out = srt().args(["run", "--preset", "no-such-preset"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"x\"\n").unwrap();
    let out = srt().args(["run", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = srt()
        .args(["run", "--config"])
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn palamodov_check_reports_json() {
    let out = srt()
        .args(["--seed", "3", "palamodov-check", "--samples", "10", "--quad", "256", "--grid", "41"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["samples"], 10);
    assert!(v["max_relative"].as_f64().unwrap() < 0.1);
}

#[test]
fn phantom_then_export_png() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(
        &cfg,
        r#"
name = "small"
geometry = { kind = "rotational-cst", alpha = 1.0 }
phantom = { kind = "disk", center = [0.1, 0.0], outer = 0.4 }
data_grid = { nx = 25, ny = 25, x = [-1.0, 1.0], y = [-1.0, 1.0] }
recon_grid = { nx = 20, ny = 20, x = [-1.0, 1.0], y = [-1.0, 1.0] }
axis1 = { n = 12, start = 0.3, end = 2.5 }
axis2 = { n = 16, full_turn = true }
quad_data = 64
quad_recon = 64
recon = { method = "landweber", iterations = 5 }
"#,
    )
    .unwrap();
    let out = srt()
        .arg("--out-dir")
        .arg(dir.path())
        .args(["phantom", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("phantom.srk").exists());

    let png = dir.path().join("again.png");
    let out = srt()
        .args(["export-png", "--input"])
        .arg(dir.path().join("phantom.srk"))
        .arg("--output")
        .arg(&png)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(png.exists());

    let out = srt()
        .arg("--out-dir")
        .arg(dir.path().join("run"))
        .args(["--seed", "4", "run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], 4);
    assert!(dir.path().join("run/report.json").exists());
}
