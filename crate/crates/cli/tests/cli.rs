use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const MINIMAL: &str = r#"{
    "alpha_grid": [1.0],
    "s_grid": [1.0],
    "intervals": [[0, 1]],
    "functions": ["x^2"],
    "theorems": ["thm31"]
}"#;

fn fhh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fhh")).args(args).output().unwrap()
}

/// Whitespace-separated arguments; none of the tests needs a value with spaces.
fn fhh_line(line: &str) -> Output {
    fhh(&line.split_whitespace().collect::<Vec<_>>())
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn sweep(dir: &Path, config: &str) -> Output {
    let path = dir.join("run.json");
    fs::write(&path, config).unwrap();
    let out = dir.join("out");
    fhh(&[
        "sweep",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn verify_prints_one_row_and_exits_zero_on_pass() {
    let out = fhh_line("verify --thm 31 --alpha 1 --s 1 --a 0 --b 1 --f x^2");
    assert_eq!(code(&out), 0, "{out:?}");
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("case_id,theorem,alpha"));
    assert!(lines[1].starts_with("c0,thm31,1.0,1.0,,0.0,1.0,x^2,operational,0.25,"));
}

#[test]
fn verify_on_quadrature_backend() {
    let out = fhh_line("verify --thm 33 --alpha 1 --s 1 --q 2 --a 0 --b 1 --f x^2 --backend quad");
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains(",quadrature,"));
}

#[test]
fn verify_exits_two_on_a_failed_identity() {
    let out = fhh_line("verify --thm l31 --alpha 0.5 --s 0.5 --a 0 --b 1 --f x^(s*a)");
    assert_eq!(code(&out), 2, "{out:?}");
    assert!(stdout(&out).contains(",false,"));
}

#[test]
fn bad_arguments_exit_one() {
    let base = ["verify", "--alpha", "1", "--s", "1", "--a", "0", "--b", "1", "--f", "x"];
    let out = fhh(&[&base[..], &["--thm", "99"]].concat());
    assert_eq!(code(&out), 1);
    let out = fhh(&[&base[..], &["--thm", "32"]].concat());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("q"));
    let out = fhh_line("verify --thm 31 --alpha 1.5 --s 1 --a 0 --b 1 --f x");
    assert_eq!(code(&out), 1);
}

#[test]
fn minimal_sweep_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep(dir.path(), MINIMAL);
    assert_eq!(code(&out), 0, "{out:?}");
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["violations"], 0);
    assert_eq!(summary["cases"], 1);
    let plot = fs::read_to_string(dir.path().join("out/plot_thm31.dat")).unwrap();
    assert_eq!(plot.lines().filter(|l| !l.starts_with('#')).count(), 1);
}

#[test]
fn injected_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = MINIMAL.replace(r#""theorems""#, r#""inject_violation": true, "theorems""#);
    let config = config.replace(r#"["x^2"]"#, r#"["x"]"#);
    assert_eq!(code(&sweep(dir.path(), &config)), 2);
}

#[test]
fn missing_functions_field_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep(dir.path(), &MINIMAL.replace(r#""functions": ["x^2"],"#, ""));
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("functions"), "{err}");
    assert!(!dir.path().join("out/report.csv").exists());
}

#[test]
fn unreadable_config_exits_one() {
    let out = fhh_line("sweep --config /nonexistent/run.json --out /tmp/unused");
    assert_eq!(code(&out), 1);
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let config = r#"{
        "alpha_grid": [0.5, 1.0],
        "s_grid": [0.5, 1.0],
        "q_grid": [2],
        "intervals": [[0, 1], [1, 2]],
        "functions": ["x^(s*a)", "x^2"]
    }"#;
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (o1, o2) = (sweep(d1.path(), config), sweep(d2.path(), config));
    assert_eq!(code(&o1), code(&o2));
    for file in ["report.csv", "summary.json", "plot_thm32.dat"] {
        let a = fs::read(d1.path().join("out").join(file)).unwrap();
        let b = fs::read(d2.path().join("out").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn certify_reports_membership() {
    let out = fhh_line("certify --sense 2 --f x^(s*a) --alpha 0.5 --s 0.5");
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).starts_with("certified=true"));
    let out = fhh_line("certify --sense 1 --f -1 --alpha 0.5 --s 0.5 --nonneg-waiver");
    assert_eq!(code(&out), 2, "{out:?}");
    let out = fhh_line("certify --sense 2 --f -1 --alpha 0.5 --s 0.5");
    assert_eq!(code(&out), 2, "{out:?}");
}

#[test]
fn moments_table() {
    let out = fhh_line("moments --alpha-grid 0.5,1 --kappa-grid 0.25,1");
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha kappa moment abs_moment K");
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(' ').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last, vec![1.0, 1.0, 0.5, 0.25, 0.25]);
}
