use std::path::Path;

use piezobeam::scenario::Simulation;
use piezobeam::solver::Sample;
use piezobeam::sweep::{SweepRecord, SweepSpec};
use piezobeam::Scenario;
use serde_json::Value;

use crate::CliError;

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t",
    "E",
    "kinetic_v",
    "kinetic_p",
    "elastic",
    "coupling",
    "delay_term",
    "K1",
    "K2",
    "K3",
    "L",
    "int_vt2",
    "int_vt2_delayed",
];

pub fn trajectory_header() -> String {
    TRAJECTORY_COLUMNS.join(",")
}

/// 17 significant digits, independent of locale.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::malformed(path, e.to_string()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::malformed(path, e.to_string())
}

fn trajectory_row(s: &Sample) -> [String; 13] {
    let e = &s.energy;
    [
        s.t,
        e.total,
        e.kinetic_v,
        e.kinetic_p,
        e.elastic,
        e.coupling,
        e.delay_term,
        s.k1,
        s.k2,
        s.k3,
        s.lyapunov,
        s.int_vt2,
        s.int_vt2_delayed,
    ]
    .map(format_float)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable output");
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn write_simulation(dir: &Path, scenario: &Scenario, sim: &Simulation) -> Result<(), CliError> {
    let path = dir.join("trajectory.csv");
    let mut w = writer(&path)?;
    w.write_record(TRAJECTORY_COLUMNS).map_err(csv_err(&path))?;
    for s in &sim.trajectory.samples {
        w.write_record(trajectory_row(s)).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let nodes = sim.trajectory.grid.nodes();
    for f in &sim.trajectory.fields {
        let path = dir.join(format!("fields_{:08}.csv", f.step));
        let mut w = writer(&path)?;
        w.write_record(["x", "v", "vt", "p", "pt"]).map_err(csv_err(&path))?;
        for i in 0..nodes.len() {
            w.write_record([nodes[i], f.v[i], f.vt[i], f.p[i], f.pt[i]].map(format_float))
                .map_err(csv_err(&path))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }

    write_json(&dir.join("summary.json"), &sim.summary)?;
    write_json(&dir.join("scenario.json"), scenario)
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), format_float),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn write_sweep(path: &Path, spec: &SweepSpec, records: &[SweepRecord]) -> Result<(), CliError> {
    let mut w = writer(path)?;
    let mut header: Vec<&str> = spec.axes.iter().map(|a| a.path.as_str()).collect();
    header.extend([
        "valid",
        "violations",
        "H2",
        "r_squared",
        "energy_ratio",
        "status",
        "message",
    ]);
    w.write_record(&header).map_err(csv_err(path))?;
    for r in records {
        let mut row: Vec<String> = r.values.iter().map(cell).collect();
        row.extend([
            r.valid.to_string(),
            r.violations.join(";"),
            optional(r.h2),
            optional(r.r_squared),
            optional(r.energy_ratio),
            r.status.as_str().to_string(),
            r.message.clone().unwrap_or_default(),
        ]);
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
