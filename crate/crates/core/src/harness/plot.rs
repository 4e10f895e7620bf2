//! Plot data export: one CSV per figure plus a gnuplot script that reads it.
//! Nothing is rendered here.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::SweepRow;
use super::HarnessError;
use crate::sim::Traces;

/// Metric columns of every figure CSV, after `series` and `x`.
pub const METRICS: [&str; 6] = ["eta", "tcp_pct", "f_lt", "f_st", "b_norm", "p_l"];

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NaN".to_string())
}

/// Writes `<figure>.csv` and `<figure>.gp` under `dir`. Every row must
/// come from a sweep of `figure`.
pub fn emit_plot_data(rows: &[SweepRow], figure: &str, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Plot(format!("no reports for {figure}")));
    }
    if let Some(r) = rows.iter().find(|r| !r.scenario_id.starts_with(figure)) {
        return Err(HarnessError::Plot(format!(
            "report from `{}` does not belong to {figure}",
            r.scenario_id
        )));
    }
    fs::create_dir_all(dir)?;

    let mut data = String::from("series,x");
    for m in METRICS {
        data.push(',');
        data.push_str(m);
    }
    data.push('\n');
    let mut series: Vec<&str> = Vec::new();
    for row in rows {
        if !series.contains(&row.scenario_id.as_str()) {
            series.push(&row.scenario_id);
        }
        let r = &row.report;
        let cols = [Some(r.eta), r.tcp_pct, r.f_lt, r.f_st, Some(r.b_norm), Some(r.p_l)];
        let _ = write!(data, "{},{}", row.scenario_id, row.x);
        for c in cols {
            let _ = write!(data, ",{}", cell(c));
        }
        data.push('\n');
    }
    let csv_path = dir.join(format!("{figure}.csv"));
    fs::write(&csv_path, data)?;

    let mut gp = String::new();
    let _ = writeln!(gp, "set datafile separator ','");
    let _ = writeln!(gp, "set key autotitle columnhead");
    let _ = writeln!(gp, "set terminal pngcairo size 1200,800");
    let _ = writeln!(gp, "set output '{figure}.png'");
    let _ = writeln!(gp, "set multiplot layout 2,3 title '{figure}'");
    for (i, m) in METRICS.iter().enumerate() {
        let _ = writeln!(gp, "set title '{m}'");
        let plots: Vec<String> = series
            .iter()
            .map(|s| {
                format!(
                    "'{figure}.csv' using 2:(strcol(1) eq '{s}' ? ${} : NaN) with linespoints title '{s}'",
                    i + 3
                )
            })
            .collect();
        let _ = writeln!(gp, "plot {}", plots.join(", \\\n     "));
    }
    let _ = writeln!(gp, "unset multiplot");
    let gp_path = dir.join(format!("{figure}.gp"));
    fs::write(&gp_path, gp)?;
    Ok(vec![csv_path, gp_path])
}

/// Writes one `(time, cwnd)` CSV per flow, plus the queue series, named
/// `<prefix>_flow<i>.csv` and `<prefix>_queue.csv`.
pub fn emit_traces(traces: &Traces, prefix: &str, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    if traces.cwnd.is_empty() {
        return Err(HarnessError::Plot(format!("no traces for {prefix}")));
    }
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for i in 0..traces.cwnd.len() {
        let path = dir.join(format!("{prefix}_flow{i}.csv"));
        traces.write_cwnd_csv(i, fs::File::create(&path)?)?;
        paths.push(path);
    }
    let path = dir.join(format!("{prefix}_queue.csv"));
    let mut q = String::from("time_s,backlog\n");
    for (t, b) in &traces.queue {
        let _ = writeln!(q, "{:.6},{b}", t.as_secs_f64());
    }
    fs::write(&path, q)?;
    paths.push(path);
    Ok(paths)
}
