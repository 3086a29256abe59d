use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use piezobeam::scenario::{preset, InitialConfig};
use piezobeam::Scenario;
use piezobeam_cli::{trajectory_header, EXIT_DIVERGED, EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION};
use tempfile::TempDir;

fn piezobeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piezobeam"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_scenario(dir: &Path, name: &str, scenario: &Scenario) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, scenario.to_json()).unwrap();
    path
}

fn short(mut scenario: Scenario, horizon: f64) -> Scenario {
    scenario.numerics.n = 41;
    scenario.numerics.horizon_s = horizon;
    scenario.numerics.output_stride = 5;
    scenario.numerics.field_stride = Some(100);
    scenario
}

#[test]
fn check_certified_preset() {
    let out = piezobeam(&["check", "--config", s(&configs().join("certified-decay.json"))]);
    assert_eq!(code(&out), EXIT_OK);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("certificate: VALID"));
    for name in ["C1", "C2", "C3"] {
        let line = text.lines().find(|l| l.trim_start().starts_with(&format!("{name} "))).unwrap();
        let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(value > 0.0, "{line}");
    }
}

#[test]
fn check_infeasible_ratio() {
    let tmp = TempDir::new().unwrap();
    let json = tmp.path().join("check.json");
    let out = piezobeam(&[
        "check",
        "--config",
        s(&configs().join("infeasible-ratio.json")),
        "--out",
        s(&json),
    ]);
    assert_eq!(code(&out), EXIT_INFEASIBLE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("delayed-gain-ratio"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["certificate"]["valid"], false);
}

#[test]
fn parse_errors_exit_one() {
    let out = piezobeam(&["check", "--config", "/definitely/missing.json"]);
    assert_eq!(code(&out), EXIT_USAGE);

    let tmp = TempDir::new().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n  \"beam\": 3\n}\n").unwrap();
    let out = piezobeam(&["check", "--config", s(&bad)]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 3"));

    let mut invalid = preset("certified-decay").unwrap();
    invalid.numerics.n = 2;
    let path = write_scenario(tmp.path(), "n2.json", &invalid);
    let out = piezobeam(&["check", "--config", s(&path)]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("numerics.n"));
}

#[test]
fn seedless_is_a_bare_flag() {
    let cfg = configs().join("certified-decay.json");
    assert_eq!(code(&piezobeam(&["check", "--seedless", "--config", s(&cfg)])), EXIT_OK);
    assert_eq!(code(&piezobeam(&["check", "--seedless=yes", "--config", s(&cfg)])), EXIT_USAGE);
    assert_eq!(code(&piezobeam(&["frobnicate"])), EXIT_USAGE);
}

#[test]
fn zero_initial_data_gives_zero_columns() {
    let tmp = TempDir::new().unwrap();
    let mut scenario = short(preset("certified-decay").unwrap(), 1.0);
    scenario.initial = InitialConfig::Zero;
    let cfg = write_scenario(tmp.path(), "zero.json", &scenario);
    let dir = tmp.path().join("out");
    // Nothing to fit on an identically zero energy: verification fails.
    assert_eq!(code(&piezobeam(&["simulate", "--config", s(&cfg), "--out", s(&dir)])), EXIT_VERIFICATION);
    let text = std::fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), trajectory_header());
    let mut rows = 0;
    for line in lines {
        rows += 1;
        for value in line.split(',').skip(1) {
            assert_eq!(value.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
    assert!(rows > 1);
    let fields = std::fs::read_to_string(dir.join("fields_00000000.csv")).unwrap();
    assert_eq!(fields.lines().next().unwrap(), "x,v,vt,p,pt");
    assert_eq!(fields.lines().count(), 42);
}

#[test]
fn certified_simulation_and_report() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("out");
    let cfg = configs().join("certified-decay.json");
    assert_eq!(code(&piezobeam(&["simulate", "--config", s(&cfg), "--out", s(&dir)])), EXIT_OK);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["decay_fit"]["H2"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["dissipation"]["violations"], 0);
    assert!(summary["multipliers"]["N"].as_f64().unwrap() >= 1.0);

    let out = piezobeam(&["report", s(&dir)]);
    assert_eq!(code(&out), EXIT_OK);
    let text = String::from_utf8(out.stdout).unwrap();
    let decay = text.lines().find(|l| l.starts_with("decay: ")).unwrap();
    assert!(decay.starts_with("decay: CERTIFIED(H2_fit="), "{decay}");
    assert!(decay.contains(") PASS"), "{decay}");
    assert!(text.contains("equivalence: b1="));
    assert!(text.contains("dissipation: violations=0"));
}

#[test]
fn divergence_writes_partial_output() {
    let tmp = TempDir::new().unwrap();
    let mut scenario = short(preset("certified-decay").unwrap(), 5.0);
    // Far above the CFL step, still below a quarter of the delay.
    scenario.numerics.dt_s = Some(0.05);
    let cfg = write_scenario(tmp.path(), "unstable.json", &scenario);
    let dir = tmp.path().join("out");
    let out = piezobeam(&["simulate", "--config", s(&cfg), "--out", s(&dir)]);
    assert_eq!(code(&out), EXIT_DIVERGED);
    assert!(String::from_utf8(out.stderr).unwrap().contains("diverged at step"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "diverged");
    assert!(summary["failure"]["step"].as_u64().unwrap() > 0);
    assert!(std::fs::read_to_string(dir.join("trajectory.csv")).unwrap().lines().count() > 1);

    let out = piezobeam(&["report", s(&dir)]);
    assert_eq!(code(&out), EXIT_VERIFICATION);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("decay: DIVERGED(step="));
    assert!(text.lines().any(|l| l.starts_with("decay: ") && l.contains("FAILED")));
}

#[test]
fn infeasible_simulation_exit_code() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_scenario(tmp.path(), "inf.json", &short(preset("infeasible-ratio").unwrap(), 2.0));
    let dir = tmp.path().join("out");
    assert_eq!(code(&piezobeam(&["simulate", "--config", s(&cfg), "--out", s(&dir)])), EXIT_INFEASIBLE);
    assert_eq!(code(&piezobeam(&["report", s(&dir)])), EXIT_INFEASIBLE);
}

#[test]
fn report_io_errors_name_the_file() {
    let tmp = TempDir::new().unwrap();
    let out = piezobeam(&["report", s(tmp.path())]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("summary.json"));

    let cfg = write_scenario(tmp.path(), "c.json", &short(preset("certified-decay").unwrap(), 2.0));
    let dir = tmp.path().join("out");
    piezobeam(&["simulate", "--config", s(&cfg), "--out", s(&dir)]);
    let path = dir.join("trajectory.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() - 30]).unwrap();
    let out = piezobeam(&["report", s(&dir)]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("trajectory.csv"));
}

#[test]
fn sweep_tables() {
    let tmp = TempDir::new().unwrap();
    let spec = serde_json::json!({
        "base": "certified-decay",
        "axes": [
            { "path": "weights.beta0", "values": [0.3, 1.2] },
            { "path": "delay.d", "values": [0.19, 0.5] }
        ],
        "n": 21,
        "horizon_s": 2.0,
        "output_stride": 1
    });
    let cfg = tmp.path().join("sweep.json");
    std::fs::write(&cfg, spec.to_string()).unwrap();
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    assert_eq!(code(&piezobeam(&["sweep", "--config", s(&cfg), "--out", s(&a)])), EXIT_OK);
    assert_eq!(code(&piezobeam(&["sweep", "--config", s(&cfg), "--out", s(&b), "--threads", "3"])), EXIT_OK);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("weights.beta0,delay.d,valid,"));
    assert_eq!(lines.len(), 5);
    assert!(lines[1].contains(",true,,"), "{}", lines[1]);
    assert!(lines[1].contains(",ok,"), "{}", lines[1]);
    assert!(lines[3].contains(",infeasible,"));
    assert!(lines[4].contains(",infeasible,"));

    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"base": "certified-decay", "axes": [{"path": "weights.zeta", "values": [1]}]}"#).unwrap();
    let out = piezobeam(&["sweep", "--config", s(&bad), "--out", s(&tmp.path().join("c.csv"))]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("weights.zeta"));
}

#[test]
fn expression_initial_data() {
    let tmp = TempDir::new().unwrap();
    let mut scenario = short(preset("certified-decay").unwrap(), 1.0);
    scenario.initial = InitialConfig::Expressions {
        v0: "0.5 * math::sin(pi * x / (2.0 * L))".into(),
        v1: "0.0".into(),
        p0: "0.2 * x * (2.0 * L - x)".into(),
        p1: "0.0".into(),
        g0: None,
    };
    let cfg = write_scenario(tmp.path(), "expr.json", &scenario);
    let dir = tmp.path().join("out");
    let out = piezobeam(&["simulate", "--config", s(&cfg), "--out", s(&dir)]);
    assert_ne!(code(&out), EXIT_USAGE, "{}", String::from_utf8_lossy(&out.stderr));
    let fields = std::fs::read_to_string(dir.join("fields_00000000.csv")).unwrap();
    let last: Vec<f64> = fields.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 1.0).abs() < 1e-15);
    assert!((last[1] - 0.5).abs() < 1e-15);
    assert!((last[3] - 0.2).abs() < 1e-15);

    if let InitialConfig::Expressions { v0, .. } = &mut scenario.initial {
        *v0 = "math::sin(".into();
    }
    let cfg = write_scenario(tmp.path(), "broken.json", &scenario);
    let out = piezobeam(&["check", "--config", s(&cfg)]);
    assert_eq!(code(&out), EXIT_USAGE);
    assert!(String::from_utf8(out.stderr).unwrap().contains("v0"));
}
