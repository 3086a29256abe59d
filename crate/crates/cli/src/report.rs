use std::path::Path;

use piezobeam::diagnostics::{fit_decay_rate, lyapunov_equivalence, DEFAULT_WINDOW_FRACTION};
use piezobeam::scenario::MIN_R_SQUARED;
use serde_json::Value;

use crate::output::TRAJECTORY_COLUMNS;
use crate::{CliError, EXIT_INFEASIBLE, EXIT_OK, EXIT_VERIFICATION};

struct Row {
    t: f64,
    energy: f64,
    lyapunov: f64,
}

fn read_trajectory(path: &Path) -> Result<Vec<Row>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::malformed(path, format!("{other:?}")),
    })?;
    let header = reader
        .headers()
        .map_err(|e| CliError::malformed(path, e.to_string()))?
        .clone();
    if header.iter().ne(TRAJECTORY_COLUMNS) {
        return Err(CliError::malformed(path, "unexpected header"));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::malformed(path, e.to_string()))?;
        let field = |k: usize| -> Result<f64, CliError> {
            record[k].parse().map_err(|_| {
                CliError::malformed(path, format!("row {}: bad value {:?}", i + 1, &record[k]))
            })
        };
        rows.push(Row {
            t: field(0)?,
            energy: field(1)?,
            lyapunov: field(10)?,
        });
    }
    if rows.is_empty() {
        return Err(CliError::malformed(path, "no data rows"));
    }
    Ok(rows)
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::malformed(path, e.to_string()))
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAILED"
    }
}

fn num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn show(x: Option<f64>) -> String {
    x.map_or("n/a".to_string(), |x| format!("{x:.6e}"))
}

pub fn cmd_report(dir: &Path) -> Result<i32, CliError> {
    let summary_path = dir.join("summary.json");
    let summary = read_json(&summary_path)?;
    let rows = read_trajectory(&dir.join("trajectory.csv"))?;
    let window = read_json(&dir.join("scenario.json"))
        .ok()
        .and_then(|s| num(&s["numerics"]["fit_window_fraction"]))
        .unwrap_or(DEFAULT_WINDOW_FRACTION);

    let cert = &summary["certificate"];
    let valid = cert["valid"]
        .as_bool()
        .ok_or_else(|| CliError::malformed(&summary_path, "missing certificate.valid"))?;
    let c = num(&cert["c"]);
    println!(
        "certificate: {} C={} (C1={}, C2={}, C3={}, xi_bar={}, lambda={})",
        if valid { "VALID" } else { "INVALID" },
        show(c),
        show(num(&cert["c1"])),
        show(num(&cert["c2"])),
        show(num(&cert["c3"])),
        show(num(&cert["xi_bar"])),
        show(num(&cert["lambda"])),
    );
    if let Some(violations) = cert["violations"].as_array() {
        for v in violations {
            println!("  violated {}", v["id"].as_str().unwrap_or("?"));
        }
    }

    let diverged = summary["status"].as_str() != Some("ok");
    let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.energy)).collect();
    let fit = fit_decay_rate(&series, window).ok();
    let e0 = rows[0].energy;
    let ratio = rows.last().map(|r| r.energy / e0).filter(|_| e0 > 0.0);
    let decay_ok = !diverged && valid && fit.is_some_and(|f| f.h2 > 0.0 && f.r_squared >= MIN_R_SQUARED);
    let label = if diverged {
        let step = summary["failure"]["step"].as_u64().unwrap_or(0);
        format!("DIVERGED(step={step})")
    } else if valid {
        format!("CERTIFIED(H2_fit={})", show(fit.map(|f| f.h2)))
    } else {
        format!("UNCERTIFIED(H2_fit={})", show(fit.map(|f| f.h2)))
    };
    println!(
        "decay: {label} {}  r2={} E(T)/E(0)={}",
        verdict(decay_ok),
        show(fit.map(|f| f.r_squared)),
        show(ratio),
    );

    let equivalence = lyapunov_equivalence(
        rows.iter()
            .filter(|r| r.lyapunov.is_finite())
            .map(|r| (r.energy, r.lyapunov)),
    )
    .ok();
    let equivalence_ok = equivalence.is_some_and(|e| e.pass && e.b2.is_finite());
    println!(
        "equivalence: b1={} b2={} C/b2={} {}",
        show(equivalence.map(|e| e.b1)),
        show(equivalence.map(|e| e.b2)),
        show(equivalence.zip(c).map(|(e, c)| c / e.b2)),
        verdict(equivalence_ok),
    );

    let dissipation = &summary["dissipation"];
    let violations = dissipation["violations"].as_u64();
    let dissipation_ok = violations == Some(0);
    println!(
        "dissipation: violations={} worst_margin={} tol_num={} {}",
        violations.map_or("n/a".to_string(), |v| v.to_string()),
        show(num(&dissipation["worst_margin"])),
        show(num(&dissipation["tol_num"])),
        verdict(dissipation_ok),
    );

    Ok(if !valid {
        EXIT_INFEASIBLE
    } else if decay_ok && equivalence_ok && dissipation_ok {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    })
}
