//! Scenario configs, sweeps, the experiment catalog and plot-data export.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod sweep;

use std::io::Write;
use std::time::Duration;

use thiserror::Error;

use crate::metrics::MetricsReport;
use crate::sim::{simulate, SimError, SimOutput};

pub use config::{ConfigError, FlowGroup, ScenarioConfig};
pub use experiments::ExperimentId;
pub use sweep::{run_sweep, SweepPoint, SweepRow, SweepSpec};

/// cwnd sampling period when traces are on.
pub const TRACE_INTERVAL: Duration = Duration::from_millis(10);

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario `{scenario}`: {source}")]
    Sim {
        scenario: String,
        #[source]
        source: SimError,
    },
    #[error("sweep `{sweep}` at {axis} = {value}: {source}")]
    SweepPoint {
        sweep: String,
        axis: String,
        value: String,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("experiment {id} does not apply to protocol {protocol}")]
    ProtocolMismatch { id: String, protocol: String },
    #[error("plot data: {0}")]
    Plot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug)]
pub struct ScenarioRun {
    pub report: MetricsReport,
    pub output: SimOutput,
}

/// Builds the dumbbell for `cfg`, runs it to the horizon and computes the
/// metric suite. With `traces`, cwnd and queue series are kept as well.
pub fn run_scenario(cfg: &ScenarioConfig, traces: bool) -> Result<ScenarioRun, HarnessError> {
    cfg.validate()?;
    let mut opts = cfg.run_options();
    if traces {
        opts.trace_interval = Some(TRACE_INTERVAL);
    }
    let output = simulate(cfg.topology(), cfg.flow_setups()?, opts)
        .map_err(|source| HarnessError::Sim { scenario: cfg.name.clone(), source })?;
    let report = MetricsReport::compute(&output.record);
    Ok(ScenarioRun { report, output })
}

/// Frozen column order of every report CSV.
pub const CSV_COLUMNS: [&str; 16] = [
    "scenario_id",
    "axis",
    "value",
    "x",
    "rep",
    "n_flows",
    "eta",
    "tcp_pct",
    "f_lt",
    "f_lt_lbe",
    "f_st",
    "f_st_min",
    "b_norm",
    "p_l",
    "protocols",
    "throughputs_bps",
];

fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// Writes the header and one row per sweep row.
pub fn write_report_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        let r = &row.report;
        let protocols: Vec<&str> = r.protocols.iter().map(|p| p.name()).collect();
        let throughputs: Vec<String> = r.per_flow_throughput.iter().map(|x| format!("{x:.1}")).collect();
        w.write_record([
            row.scenario_id.clone(),
            row.axis.clone(),
            row.value.clone(),
            fmt_f(row.x),
            row.rep.to_string(),
            r.protocols.len().to_string(),
            fmt_f(r.eta),
            fmt_opt(r.tcp_pct),
            fmt_opt(r.f_lt),
            fmt_opt(r.f_lt_lbe),
            fmt_opt(r.f_st),
            fmt_opt(r.f_st_min),
            fmt_f(r.b_norm),
            fmt_f(r.p_l),
            protocols.join(";"),
            throughputs.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
