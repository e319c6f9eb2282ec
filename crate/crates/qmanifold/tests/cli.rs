use std::process::{Command, Output};

fn qmanifold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmanifold"))
        .args(args)
        .env_remove("QMANIFOLD_SEED")
        .env_remove("QMANIFOLD_FORMAT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn x_table_of_paraboloid_fixture() {
    let o = qmanifold(&["x-table", "--input", "paraboloid_d3.qt", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let values: Vec<String> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect();
    assert_eq!(values, ["0", "1", "2", "2", "3"]);
    assert!(stdout(&o).lines().next().unwrap().ends_with(",seed"));
}

#[test]
fn json_output_is_reproducible() {
    let args = [
        "x-table", "--input", "good_d4", "--k", "4", "--format", "json", "--seed", "11",
    ];
    let a = qmanifold(&args);
    let b = qmanifold(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 11);
}

#[test]
fn exponent_of_paraboloid_family() {
    let o = qmanifold(&["exponents", "--family", "paraboloid", "--d", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["p_c"], "10/3");
    assert_eq!(v["k_star"], 3);
}

#[test]
fn seed_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qmanifold"))
        .args(["classify", "--input", "good_d4", "--format", "json"])
        .env("QMANIFOLD_SEED", "23")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 23);
}

#[test]
fn parse_errors_report_position() {
    let o = qmanifold(&["x-table", "--input", "d=2; x1^2 +* x2", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 1, column 12"), "{err}");
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(qmanifold(&["x-table"]).status.code(), Some(1));
    assert_eq!(qmanifold(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        qmanifold(&["d-table", "--input", "no_such_fixture"]).status.code(),
        Some(1)
    );
    assert_eq!(qmanifold(&["--help"]).status.code(), Some(0));
}

#[test]
fn cover_shortfall_exits_two() {
    let dir = std::env::temp_dir().join(format!("qmanifold-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("thin.json");
    let o = qmanifold(&[
        "cover",
        "--poly",
        "circle_r0.5",
        "--K",
        "100",
        "--ap",
        "1",
        "--samples",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["coverage"]["fraction"].as_f64().unwrap() < 1.0);
    assert!(out.with_extension("svg").exists());
    assert!(out.with_extension("audit.csv").exists());
    std::fs::remove_dir_all(&dir).unwrap();
}
