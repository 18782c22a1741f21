//! CSV trace and summary files.

use std::io::Write;

use sppa_core::{RunReport, TraceRow, Vector};

pub const TRACE_HEADER: [&str; 8] = [
    "n",
    "lambda",
    "xi_index",
    "dist_to_solution",
    "dist_to_domain",
    "dist_avg_to_feasible",
    "objective_avg",
    "norm_x",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One record per trace row. `xi_index` is written one-based.
pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(TRACE_HEADER)?;
    for row in rows {
        w.write_record([
            row.n.to_string(),
            float(row.lambda),
            (row.xi_index + 1).to_string(),
            optional(row.dist_to_solution),
            float(row.dist_to_domain),
            optional(row.dist_avg_to_feasible),
            optional(row.objective_avg),
            float(row.norm_x),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Final state of one replica, as reported in the summary file.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub report_rows: usize,
    pub final_x: Vector,
    pub final_xbar: Vector,
    pub burn_in_average: Option<Vector>,
    pub dist_to_solution: Option<f64>,
    pub dist_avg_to_solution: Option<f64>,
    pub dist_avg_to_feasible: Option<f64>,
    pub objective_avg: Option<f64>,
    pub lambda_sum: f64,
    pub iterations: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub wall_time_secs: Option<f64>,
}

impl ReplicaSummary {
    pub fn from_report(replica: u64, report: &RunReport) -> Self {
        let s = &report.summary;
        let last = report.rows.last();
        ReplicaSummary {
            replica,
            report_rows: report.rows.len(),
            final_x: s.final_x.clone(),
            final_xbar: s.final_xbar.clone(),
            burn_in_average: s.burn_in_average.clone(),
            dist_to_solution: s.solution.as_ref().map(|x| s.final_x.distance(x)),
            dist_avg_to_solution: s.solution.as_ref().map(|x| s.final_xbar.distance(x)),
            dist_avg_to_feasible: last.and_then(|r| r.dist_avg_to_feasible),
            objective_avg: last.and_then(|r| r.objective_avg),
            lambda_sum: s.lambda_sum,
            iterations: s.iterations,
            seed: s.seed,
            stream_id: s.stream_id,
            wall_time_secs: s.wall_time_secs,
        }
    }
}

/// Summary header for dimension `d`; burn-in columns only when requested.
pub fn summary_header(d: usize, burn_in: bool) -> Vec<String> {
    let mut h: Vec<String> = [
        "replica",
        "seed",
        "stream_id",
        "iterations",
        "trace_rows",
        "lambda_sum",
        "dist_to_solution",
        "dist_avg_to_solution",
        "dist_avg_to_feasible",
        "objective_avg",
        "wall_time_secs",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    h.extend((1..=d).map(|i| format!("x_{i}")));
    h.extend((1..=d).map(|i| format!("xbar_{i}")));
    if burn_in {
        h.extend((1..=d).map(|i| format!("xbar_burn_in_{i}")));
    }
    h
}

pub fn write_summary<W: Write>(out: W, d: usize, burn_in: bool, replicas: &[ReplicaSummary]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(summary_header(d, burn_in))?;
    for r in replicas {
        let mut record = vec![
            r.replica.to_string(),
            r.seed.to_string(),
            r.stream_id.to_string(),
            r.iterations.to_string(),
            r.report_rows.to_string(),
            float(r.lambda_sum),
            optional(r.dist_to_solution),
            optional(r.dist_avg_to_solution),
            optional(r.dist_avg_to_feasible),
            optional(r.objective_avg),
            optional(r.wall_time_secs),
        ];
        record.extend(r.final_x.iter().map(|&c| float(c)));
        record.extend(r.final_xbar.iter().map(|&c| float(c)));
        if burn_in {
            match &r.burn_in_average {
                Some(avg) => record.extend(avg.iter().map(|&c| float(c))),
                None => record.extend(std::iter::repeat_n(String::new(), d)),
            }
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
