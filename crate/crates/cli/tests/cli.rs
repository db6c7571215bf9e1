use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cayley-qmc")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV artifact, keyed by the header.
fn rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let data = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, data)
}

fn meta(text: &str, key: &str) -> Option<String> {
    text.lines().find_map(|l| l.strip_prefix(&format!("# {key}: ")).map(String::from))
}

#[test]
fn critical_reports_both_roots() {
    let out = run(&["critical"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, data) = rows(&stdout(&out));
    assert_eq!(header, ["root", "t", "beta", "p9_residual", "arccosh_residual"]);
    let t: f64 = data[0][1].parse().unwrap();
    let beta2: f64 = data[1][2].parse().unwrap();
    assert!(t > 1.05 && t < 1.1);
    assert!((beta2 - 1.02633).abs() < 1e-5);
}

#[test]
fn sweep_classifies_both_regimes() {
    let out = run(&["sweep", "--beta-min", "0.2", "--beta-max", "0.5", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(meta(&text, "command").as_deref(), Some("sweep"));
    let (header, data) = rows(&text);
    assert_eq!(header, ["beta", "regime", "n_fixed_points", "lambda2", "gap"]);
    assert_eq!(data.len(), 2);
    assert_eq!(&data[0][1..], ["Unique", "1", "", ""]);
    assert_eq!(&data[1][1..3], ["Window", "2"]);
    assert!(data[1][4].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let args = ["free-energy", "--steps", "7", "--n", "4"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let (_, data) = rows(&stdout(&a));
    for cell in data.iter().flatten() {
        let x: f64 = cell.parse().unwrap();
        assert_eq!(format!("{x:.16e}"), *cell);
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("cayley-qmc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fp.csv");
    let out = run(&["fixed-points", "--beta", "0.6", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let (_, data) = rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(data.len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        vec!["sweep", "--steps", "0"],
        vec!["trajectory", "--beta", "-1", "--x0", "1"],
        vec!["trajectory", "--beta", "0.5", "--x0", "1", "--y0", "2"],
        vec!["correlation", "--beta", "0.2"],
        vec!["no-such-command"],
    ] {
        assert_eq!(run(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn tolerance_failure_exits_two() {
    let out = run(&["critical", "--tol-abs", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P9 residual"));
}

#[test]
fn step_budget_exhaustion_exits_three() {
    let out = run(&["trajectory", "--beta", "0.5", "--x0", "1", "--y0", "0.3", "--max-steps", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn trajectory_reports_its_outcome() {
    let out = run(&["trajectory", "--beta", "0.5", "--x0", "1", "--y0", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(meta(&text, "outcome").as_deref(), Some("ConvergedToFree"));
    let (_, data) = rows(&text);
    assert_eq!(data[0][0], "0");
    assert!(data.last().unwrap()[2].parse::<f64>().unwrap().abs() < 1e-6);
}

#[test]
fn verify_quick_passes() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    for k in 1..=10 {
        assert!(text.contains(&format!("criterion {k:>2}")), "criterion {k} missing");
    }
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn injected_fault_is_named() {
    let out = run(&["verify", "--inject-fault", "flip-k1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("remark-identities"));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("[FAIL]") && l.contains("remark-identities")));
}

#[test]
fn verify_full_passes() {
    let out = run(&["verify", "--level", "full"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("[SKIP]"));
}
