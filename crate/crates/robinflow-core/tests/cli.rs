use robinflow_core::robinflow::{flow_shift, FlowQuery, RobinFlow};
use robinflow_core::disc::{mode_eigenvalues, ModeProblem, SpectrumWindow};
use robinflow_core::RobinSymbol;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robinflow"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("robinflow-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn spectrum_matches_library_and_round_trips() {
    let out = bin()
        .args(["spectrum", "--b", "1", "--tau", r#"{"kind":"constant","c":0}"#, "--nmin", "-5", "--nmax", "5", "--window", "0.2,0.98"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# robinflow"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().nth(1), Some("n,index,lambda"));
    let window = SpectrumWindow::new(0.2, 0.98).unwrap();
    let mut expected = Vec::new();
    for n in -5..=5 {
        for (k, l) in mode_eigenvalues(&ModeProblem::new(n, 1.0, 0.0).unwrap(), &window).unwrap().into_iter().enumerate() {
            expected.push((n, k, l));
        }
    }
    let got: Vec<(i64, usize, f64)> = rows(&text).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert!(!got.is_empty());
    // 17 significant digits reproduce the double exactly
    assert_eq!(got, expected);
}

#[test]
fn flow_writes_sidecar_equal_to_library() {
    let csv = scratch("flow.csv");
    let status = bin()
        .args(["flow", "--b", "1", "--tau", r#"{"kind":"zero"}"#, "--mu", "0.5", "--gamma", "30", "--t-start", "-30", "--no-header", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let q = FlowQuery { t_start: -30.0, ..FlowQuery::shift(1.0, RobinSymbol::Zero, 0.5, 30.0) };
    let lib: RobinFlow = flow_shift(&q).unwrap();
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["sf"].as_i64(), Some(lib.sf));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("n,t_star,sign"));
    let got = rows(&text);
    assert_eq!(got.len(), lib.crossings.len());
    for (r, c) in got.iter().zip(&lib.crossings) {
        assert_eq!(r[0].parse::<i64>().unwrap(), c.n);
        assert_eq!(r[1].parse::<f64>().unwrap(), c.t_star);
        assert_eq!(r[2].parse::<i32>().unwrap(), c.sign);
    }
    assert!(lib.sf > 0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let run = || {
        bin()
            .args(["boundary", "--b", "1", "--mu", "0.4", "--nmin", "-2", "--nmax", "2", "--no-header"])
            .env("ROBINFLOW_THREADS", "1")
            .output()
            .unwrap()
            .stdout
    };
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}

#[test]
fn exit_codes_follow_error_class() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["spectrum", "--b", "1", "--nmin", "0", "--nmax", "1", "--window", "0.5"]), Some(2));
    assert_eq!(code(&["spectrum", "--b", "1", "--tau", "{\"kind\":\"nope\"}", "--nmin", "0", "--nmax", "1", "--window", "0.2,0.5"]), Some(2));
    assert_eq!(code(&["flow", "--b", "1", "--mu", "1", "--gamma", "3"]), Some(3));
    assert_eq!(code(&["spectrum", "--b", "1", "--nmin", "0", "--nmax", "1", "--window", "3.02,6"]), Some(3));
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn json_format_parses_back() {
    let out = bin().args(["flow", "--b", "1", "--mu", "0.5", "--gamma", "10", "--t-start", "-10", "--format", "json"]).output().unwrap();
    assert!(out.status.success());
    let flow: RobinFlow = serde_json::from_slice(&out.stdout).unwrap();
    let q = FlowQuery { t_start: -10.0, ..FlowQuery::shift(1.0, RobinSymbol::Zero, 0.5, 10.0) };
    assert_eq!(flow, flow_shift(&q).unwrap());
}
