use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use super::{HarnessError, RunMetrics, SchoolMetrics};
use crate::oracle::CompartmentVector;
use crate::planner::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("unknown format `{s}`, expected csv or json")),
        }
    }
}

/// A result type with a fixed tabular layout.
pub trait ResultRows: Serialize {
    const HEADER: &'static [&'static str];
    fn csv_row(&self) -> Vec<String>;
}

fn yes_no(b: bool) -> String {
    if b { "Yes" } else { "No" }.to_string()
}

impl ResultRows for RunMetrics {
    const HEADER: &'static [&'static str] = &[
        "simulation",
        "N",
        "masks",
        "vaccines",
        "walkable",
        "total_tiles",
        "density",
        "pred_pos_pct",
        "d_avg",
    ];

    fn csv_row(&self) -> Vec<String> {
        vec![
            self.simulation.clone(),
            self.n.to_string(),
            yes_no(self.masks),
            yes_no(self.vaccines),
            self.walkable.to_string(),
            self.total_tiles.to_string(),
            format!("{:.2}", self.density),
            format!("{:.1}", self.pred_pos_pct),
            format!("{:.2}", self.d_avg),
        ]
    }
}

impl ResultRows for SchoolMetrics {
    const HEADER: &'static [&'static str] = &[
        "model",
        "simulations",
        "masks",
        "vaccines",
        "N",
        "N_est",
        "pred_pos_pct",
        "true_pos_pct",
        "abs_error",
    ];

    fn csv_row(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.simulations.to_string(),
            yes_no(self.masks),
            yes_no(self.vaccines),
            self.n.to_string(),
            self.n_est.to_string(),
            format!("{:.1}", self.pred_pos_pct),
            format!("{:.1}", self.true_pos_pct),
            format!("{:.1}", self.abs_error),
        ]
    }
}

fn csv_error(e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io("output", io),
        other => HarnessError::Serialize(format!("{other:?}")),
    }
}

/// Writes a result table. JSON output carries every field, including
/// per-episode detail; CSV output holds the summary columns only.
pub fn emit_results<T: ResultRows>(
    rows: &[T],
    format: OutputFormat,
    out: impl Write,
) -> Result<(), HarnessError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(T::HEADER).map_err(csv_error)?;
            for row in rows {
                w.write_record(row.csv_row()).map_err(csv_error)?;
            }
            w.flush().map_err(|e| HarnessError::io("output", e))
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)
                .map_err(|e| HarnessError::Serialize(e.to_string()))?;
            writeln!(out).map_err(|e| HarnessError::io("output", e))
        }
    }
}

pub fn write_trajectory_csv(trajectory: &Trajectory, out: impl Write) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for row in &trajectory.rows {
        w.serialize(row).map_err(csv_error)?;
    }
    if trajectory.rows.is_empty() {
        w.write_record([
            "step",
            "S",
            "E",
            "I",
            "R",
            "D",
            "cum_infections",
            "cum_deaths",
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| HarnessError::io("output", e))
}

/// One JSON object per line.
pub fn write_events_jsonl<T: Serialize>(
    items: &[T],
    mut out: impl Write,
) -> Result<(), HarnessError> {
    for item in items {
        serde_json::to_writer(&mut out, item)
            .map_err(|e| HarnessError::Serialize(e.to_string()))?;
        writeln!(out).map_err(|e| HarnessError::io("output", e))?;
    }
    Ok(())
}

/// `t,S,E,I,R,D` with `t = index * dt`.
pub fn write_ode_csv(
    states: &[CompartmentVector],
    dt: f64,
    out: impl Write,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "S", "E", "I", "R", "D"])
        .map_err(csv_error)?;
    for (n, v) in states.iter().enumerate() {
        w.write_record([n as f64 * dt, v.s, v.e, v.i, v.r, v.d].map(|x| x.to_string()))
            .map_err(csv_error)?;
    }
    w.flush().map_err(|e| HarnessError::io("output", e))
}
