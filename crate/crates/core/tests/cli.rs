use std::io::Write;
use std::process::{Command, Output, Stdio};

use fracml::cli::{emit_problem, parse_problem};
use fracml::solver::{FdeProblem, Grid};
use fracml::Complex64;
use proptest::prelude::*;

const CLASSICAL: &str =
    r#"{"alpha":1,"operator":{"coefficients":[6,-5,1]},"initial_conditions":[2,5],"grid":{"t_end":1,"points":51}}"#;

fn fracml(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_fracml"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    } else {
        drop(child.stdin.take());
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_temp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("fracml-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn verify_classical_problem_exits_zero() {
    let out = fracml(&["verify", "-"], Some(CLASSICAL));
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 4);
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_failure_exits_five() {
    let spec = r#"{"alpha":0.5,"operator":{"factors":[1,1]},"initial_conditions":[0,1]}"#;
    let out = fracml(&["verify", "-"], Some(spec));
    assert_eq!(out.status.code(), Some(5));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn solve_from_file() {
    let path = write_temp("classical.json", CLASSICAL);
    let out = fracml(&["solve", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("y(t) = 1·E_α(2 t^α) + 1·E_α(3 t^α)"), "{text}");
    let machine = text.split("--- machine ---\n").nth(1).unwrap();
    let v: serde_json::Value = serde_json::from_str(machine.trim()).unwrap();
    let amp = v["modes"][0]["amplitude"][0].as_f64().unwrap();
    assert!((amp - 1.0).abs() < 1e-13);
}

#[test]
fn eval_csv_is_deterministic() {
    let a = fracml(&["eval", "-"], Some(CLASSICAL));
    let b = fracml(&["eval", "-"], Some(CLASSICAL));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re_y,im_y"));
    for (i, line) in lines.enumerate() {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let t = i as f64 / 50.0;
        assert!((cells[0] - t).abs() < 1e-15);
        let want = (2.0 * t).exp() + (3.0 * t).exp();
        assert!((cells[1] - want).abs() <= 1e-9);
    }
}

#[test]
fn report_alpha_one_is_exact() {
    let out = fracml(&["report", "--alphas", "1.0"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[3].parse::<f64>().unwrap() <= 1e-12, "{line}");
        assert_eq!(cells[4], "true");
    }
}

#[test]
fn report_half_shows_product_law_witness() {
    let out = fracml(&["report", "--alphas", "0.5", "--t", "1", "--pair", "1,1"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("product_law,")).unwrap();
    let dev: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((dev - 83.851_022_940_504_64).abs() <= 1e-8);
}

#[test]
fn exit_codes_per_error_class() {
    assert_eq!(fracml(&["solve", "-"], Some("{not json")).status.code(), Some(2));
    assert_eq!(fracml(&["solve", "/nonexistent/problem.json"], None).status.code(), Some(2));
    let bad = r#"{"alpha":1,"operator":{"coefficients":[6,-5,1]},"initial_conditions":[2]}"#;
    assert_eq!(fracml(&["solve", "-"], Some(bad)).status.code(), Some(3));
    let no_grid = r#"{"alpha":1,"operator":{"coefficients":[6,-5,1]},"initial_conditions":[2,5]}"#;
    assert_eq!(fracml(&["eval", "-"], Some(no_grid)).status.code(), Some(3));
    assert_eq!(fracml(&["report", "--alphas", "0"], None).status.code(), Some(3));
    assert_eq!(fracml(&["report", "--alphas", "0.5", "--pair", "1"], None).status.code(), Some(3));
    // Arguments too large for the series evaluator.
    let huge = r#"{"alpha":0.5,"operator":{"coefficients":[-1e6,1]},"initial_conditions":[1],"grid":{"t_end":100,"points":3}}"#;
    assert_eq!(fracml(&["eval", "-"], Some(huge)).status.code(), Some(4));
    assert_eq!(fracml(&["frobnicate"], None).status.code(), Some(2));
}

fn complex() -> impl Strategy<Value = Complex64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()).prop_map(|x| Complex64::new(x, 0.0)),
        (-1e3f64..1e3, -1e3f64..1e3).prop_map(|(a, b)| Complex64::new(a, b)),
    ]
}

proptest! {
    #[test]
    fn parse_emit_roundtrip(
        alpha in prop_oneof![Just(1.0), 1e-3f64..=1.0],
        coeffs in proptest::collection::vec(complex(), 1..5),
        lead in complex().prop_filter("nonzero", |z| z.norm() > 0.0),
        grid in proptest::option::of((1e-3f64..1e3, 2usize..500)),
    ) {
        let mut p = coeffs;
        p.push(lead);
        let ics: Vec<Complex64> = (1..p.len()).map(|k| Complex64::new(k as f64 / 3.0, -0.1 * k as f64)).collect();
        let grid = grid.map(|(t_end, points)| Grid { t_end, points });
        let problem = FdeProblem::new(alpha, p, ics, grid).unwrap();
        let back = parse_problem(&emit_problem(&problem)).unwrap().problem;
        prop_assert_eq!(back, problem);
    }
}
