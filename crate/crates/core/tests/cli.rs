use std::process::{Command, Output};

fn growthlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_growthlab"))
        .args(args)
        .env_remove("GROWTHLAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn moments_n3_rows() {
    let out = growthlab(&["moments", "--N", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "n,mu,sigma2\n1,0,0\n2,0,0\n3,0.5,0.25\n");
}

#[test]
fn moments_rational_mode_prints_fractions() {
    let out = growthlab(&["moments", "--N", "4", "--numeric-mode", "rational"]);
    assert_eq!(stdout(&out).lines().last(), Some("4,5/3,10/9"));
    let json = growthlab(&["moments", "--N", "4", "--numeric-mode", "rational", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["mode"], "rational");
    assert_eq!(v["rows"][3]["mu"], "5/3");
}

#[test]
fn limits_endpoints() {
    let out = growthlab(&["limits", "--t", "0,1"]);
    assert_eq!(stdout(&out), "t,phi,psi,cov\n0,0,0,0\n1,1,0,0\n");
    let out = growthlab(&["limits", "--t-grid", "0.3,0.6", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cov = v[1]["cov"].as_f64().unwrap();
    assert!((cov - 8.97e-5).abs() < 5e-7, "{cov}");
}

#[test]
fn simulate_csv_layout() {
    let out = growthlab(&["simulate", "--N", "5", "--reps", "3", "--seed", "9"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "replicate,n,x_n,delta_last");
    assert_eq!(lines.len(), 1 + 3 * 6);
    for r in 0..3 {
        let summary: Vec<&str> = lines[(r + 1) * 6].split(',').collect();
        assert_eq!(summary[0], r.to_string());
        assert_eq!(summary[1], "6");
        assert_eq!(summary[2], "10");
        let x5: u64 = lines[(r + 1) * 6 - 1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(x5 + summary[3].parse::<u64>().unwrap(), 10);
    }
}

#[test]
fn simulate_tracks_edges_in_json() {
    let out = growthlab(&["simulate", "--N", "6", "--track-edges", "--format", "json", "--seed", "2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["edge_times"].as_array().unwrap().len(), 15);
}

#[test]
fn same_seed_same_bytes() {
    for args in [
        &["simulate", "--N", "40", "--reps", "20", "--seed", "5", "--sampler", "pool"][..],
        &["simulate", "--N", "40", "--reps", "20", "--seed", "5", "--sampler", "insertion", "--format", "json"],
        &["diffusion", "--reps", "10", "--seed", "5", "--method", "euler"],
        &["verify", "--suite", "moments", "--N", "20", "--reps", "500", "--seed", "5"],
    ] {
        let a = growthlab(args);
        let b = growthlab(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let mut single = args.to_vec();
        single.extend(["--threads", "1"]);
        assert_eq!(growthlab(&single).stdout, a.stdout, "{args:?} with one thread");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let flag = growthlab(&["simulate", "--N", "30", "--seed", "77"]);
    let env = Command::new(env!("CARGO_BIN_EXE_growthlab"))
        .args(["simulate", "--N", "30"])
        .env("GROWTHLAB_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn verify_martingales_example() {
    let args = ["verify", "--suite", "martingales", "--N", "100", "--reps", "10000", "--seed", "7"];
    let out = growthlab(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: Vec<serde_json::Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.len(), 9);
    let text = stdout(&out);
    let first = &text[..text.find('}').unwrap()];
    let at: Vec<usize> = ["check", "test", "statistic", "p_value", "sample_size", "rule", "threshold", "verdict"]
        .iter()
        .map(|k| first.find(&format!("\"{k}\":")).unwrap())
        .collect();
    assert!(at.windows(2).all(|w| w[0] < w[1]), "keys out of order: {first}");
    assert!(reports.iter().all(|r| r["verdict"] == "pass"));
    assert_eq!(growthlab(&args).stdout, out.stdout);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let th = dir.path().join("strict.json");
    std::fs::write(&th, r#"{"max_z": 0.0}"#).unwrap();
    let report = dir.path().join("report.json");
    let out = growthlab(&[
        "verify",
        "--suite",
        "martingales",
        "--N",
        "20",
        "--reps",
        "200",
        "--thresholds",
        th.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let reports: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert!(reports.iter().any(|r| r["verdict"] == "fail"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["moments"][..],
        &["moments", "--N", "1"],
        &["moments", "--N", "3", "--format", "xml"],
        &["limits", "--t", "0.2,0.1"],
        &["diffusion", "--t", "0.5,1"],
        &["simulate", "--N", "4", "--reps", "0"],
        &["verify", "--suite", "no-such-check"],
        &["verify", "--suite", "sampler-equivalence", "--N", "40"],
        &["bogus"],
    ] {
        assert_eq!(growthlab(args).status.code(), Some(2), "{args:?}");
    }
}
