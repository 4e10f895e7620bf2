use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lbesim::controllers::Protocol;
use lbesim::harness::{
    experiments, plot, run_scenario, run_sweep, write_report_csv, ExperimentId, ScenarioConfig, SweepRow,
    SweepSpec,
};

#[derive(Parser, Debug)]
#[command(name = "lbesim", version, about = "Lower-than-best-effort transport simulator")]
struct Cli {
    /// Reserved; the simulator is deterministic and ignores it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario config and print its metrics row.
    Run {
        config: PathBuf,
        /// Keep cwnd and queue series (written under --out).
        #[arg(long)]
        traces: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Print every processed event to stderr.
        #[arg(long)]
        event_log: bool,
    },
    /// Run a sweep file and print one row per point.
    Sweep { spec: PathBuf },
    /// Run a catalog experiment, print its rows and write plot data.
    Experiment {
        id: String,
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn print_rows(rows: &[SweepRow]) -> Result<()> {
    let stdout = io::stdout();
    write_report_csv(rows, stdout.lock())?;
    Ok(())
}

fn run(config: &Path, traces: bool, out: &Path, event_log: bool) -> Result<()> {
    let cfg = ScenarioConfig::parse(&read(config)?).with_context(|| format!("in {}", config.display()))?;
    let result = if event_log {
        let mut opts = cfg.run_options();
        opts.event_log = true;
        let output = lbesim::sim::simulate(cfg.topology(), cfg.flow_setups()?, opts)?;
        let mut err = io::stderr().lock();
        for line in output.event_log.iter().flatten() {
            writeln!(err, "{line}")?;
        }
        lbesim::harness::ScenarioRun { report: lbesim::metrics::MetricsReport::compute(&output.record), output }
    } else {
        run_scenario(&cfg, traces)?
    };
    if let Some(tr) = &result.output.traces {
        for p in plot::emit_traces(tr, &cfg.name, out)? {
            eprintln!("wrote {}", p.display());
        }
    }
    print_rows(&[SweepRow {
        scenario_id: cfg.name.clone(),
        axis: String::new(),
        value: String::new(),
        x: 0.0,
        rep: 0,
        report: result.report,
    }])
}

fn experiment(id: &str, protocol: Option<&str>, out: &Path) -> Result<()> {
    let id: ExperimentId = id.parse()?;
    let protocol: Option<Protocol> = protocol.map(str::parse).transpose().map_err(anyhow::Error::msg)?;
    let specs = experiments::expand(id, protocol)?;
    let mut all = Vec::new();
    for spec in &specs {
        if id.wants_traces() {
            for point in &spec.points {
                let cfg = spec.config_at(point)?;
                let run = run_scenario(&cfg, true)?;
                if let Some(tr) = &run.output.traces {
                    plot::emit_traces(tr, &format!("{}_{}", spec.id, point.label), out)?;
                }
                all.push(SweepRow {
                    scenario_id: spec.id.clone(),
                    axis: spec.axis.clone(),
                    value: point.label.clone(),
                    x: point.x,
                    rep: 0,
                    report: run.report,
                });
            }
        } else {
            all.extend(run_sweep(spec)?);
        }
    }
    for p in plot::emit_plot_data(&all, id.name(), out)? {
        eprintln!("wrote {}", p.display());
    }
    print_rows(&all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Format::Csv = cli.format;
    let result = match &cli.command {
        Command::Run { config, traces, out, event_log } => run(config, *traces, out, *event_log),
        Command::Sweep { spec } => read(spec)
            .and_then(|text| SweepSpec::parse(&text).with_context(|| format!("in {}", spec.display())))
            .and_then(|s| Ok(run_sweep(&s)?))
            .and_then(|rows| print_rows(&rows)),
        Command::Experiment { id, protocol, out } => experiment(id, protocol.as_deref(), out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
