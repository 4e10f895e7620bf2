//! Parameter sweeps: independent runs of one base scenario with some keys
//! overridden per point. Points may run in parallel; rows come back in
//! point order, then repetition order.
//!
//! A sweep file is a scenario config plus `sweep.*` keys:
//!
//! ```text
//! flows.0.protocol = reno
//! flows.1.protocol = ledbat
//! sweep.axis = flows.1.ledbat.G
//! sweep.values = 1, 2, 5, 10
//! sweep.repeat = 1
//! ```
//!
//! `sweep.axis` may list several comma-separated keys; each receives the
//! same value.

use rayon::prelude::*;

use super::config::{ConfigError, ScenarioConfig};
use super::{run_scenario, HarnessError};
use crate::metrics::MetricsReport;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    /// Human-readable axis value, also the `value` CSV column.
    pub label: String,
    pub x: f64,
    pub assignments: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub id: String,
    pub base: ScenarioConfig,
    pub axis: String,
    pub points: Vec<SweepPoint>,
    pub repeat: usize,
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub scenario_id: String,
    pub axis: String,
    pub value: String,
    pub x: f64,
    pub rep: usize,
    pub report: MetricsReport,
}

impl SweepSpec {
    /// Every key in `paths` takes each of `values` in turn.
    pub fn single_axis(id: &str, base: ScenarioConfig, paths: &[&str], values: &[String]) -> Self {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, v)| SweepPoint {
                label: v.clone(),
                x: v.parse().unwrap_or(i as f64),
                assignments: paths.iter().map(|p| (p.to_string(), v.clone())).collect(),
            })
            .collect();
        SweepSpec { id: id.to_string(), base, axis: paths.join(","), points, repeat: 1 }
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut axis = None;
        let mut values = None;
        let mut repeat = 1usize;
        let mut scenario_lines = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("").trim();
            let Some(rest) = content.strip_prefix("sweep.") else {
                scenario_lines.push(raw);
                continue;
            };
            // Blank placeholder keeps scenario line numbers aligned.
            scenario_lines.push("");
            let line = lineno + 1;
            let (key, value) = rest.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let value = value.trim();
            match key.trim() {
                "axis" => axis = Some(value.to_string()),
                "values" => values = Some(value.split(',').map(|v| v.trim().to_string()).collect::<Vec<_>>()),
                "repeat" => {
                    repeat = value.parse().map_err(|_| ConfigError::Parse {
                        line,
                        msg: format!("`sweep.repeat`: cannot parse `{value}`"),
                    })?
                }
                other => {
                    return Err(ConfigError::Parse { line, msg: format!("unknown key `sweep.{other}`") }.into());
                }
            }
        }
        let base = ScenarioConfig::parse(&scenario_lines.join("\n"))?;
        let axis = axis.ok_or_else(|| ConfigError::Invalid { field: "sweep.axis".into(), msg: "missing".into() })?;
        let values: Vec<String> = values
            .filter(|v| v.iter().all(|s| !s.is_empty()))
            .ok_or_else(|| ConfigError::Invalid { field: "sweep.values".into(), msg: "missing or empty".into() })?;
        let paths: Vec<&str> = axis.split(',').map(str::trim).collect();
        let mut spec = SweepSpec::single_axis(&base.name.clone(), base, &paths, &values);
        spec.repeat = repeat;
        spec.check()?;
        Ok(spec)
    }

    /// Resolved config of one point.
    pub fn config_at(&self, point: &SweepPoint) -> Result<ScenarioConfig, HarnessError> {
        let mut cfg = self.base.clone();
        for (k, v) in &point.assignments {
            cfg.set(k, v).map_err(|e| self.point_error(point, e.into()))?;
        }
        cfg.name = format!("{}[{}={}]", self.id, self.axis, point.label);
        cfg.validate().map_err(|e| self.point_error(point, e.into()))?;
        Ok(cfg)
    }

    /// Every point must resolve to a valid config.
    pub fn check(&self) -> Result<(), HarnessError> {
        if self.repeat == 0 {
            return Err(ConfigError::Invalid { field: "sweep.repeat".into(), msg: "must be at least 1".into() }.into());
        }
        if self.points.is_empty() {
            return Err(ConfigError::Invalid { field: "sweep.values".into(), msg: "missing or empty".into() }.into());
        }
        for p in &self.points {
            self.config_at(p)?;
        }
        Ok(())
    }

    fn point_error(&self, point: &SweepPoint, source: HarnessError) -> HarnessError {
        HarnessError::SweepPoint {
            sweep: self.id.clone(),
            axis: self.axis.clone(),
            value: point.label.clone(),
            source: Box::new(source),
        }
    }
}

/// Runs every point `repeat` times. The first failing point (in order)
/// aborts the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    let jobs: Vec<(&SweepPoint, usize)> = spec
        .points
        .iter()
        .flat_map(|p| (0..spec.repeat).map(move |rep| (p, rep)))
        .collect();
    let results: Vec<Result<SweepRow, HarnessError>> = jobs
        .par_iter()
        .map(|&(point, rep)| {
            let cfg = spec.config_at(point)?;
            let run = run_scenario(&cfg, false).map_err(|e| spec.point_error(point, e))?;
            Ok(SweepRow {
                scenario_id: spec.id.clone(),
                axis: spec.axis.clone(),
                value: point.label.clone(),
                x: point.x,
                rep,
                report: run.report,
            })
        })
        .collect();
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = "horizon_s = 5\nflows.0.protocol = reno\nflows.1.protocol = ledbat\nsweep.axis = flows.1.ledbat.G\nsweep.values = 1, 2\n";

    #[test]
    fn parses_sweep_keys() {
        let spec = SweepSpec::parse(SPEC).unwrap();
        assert_eq!(spec.axis, "flows.1.ledbat.G");
        assert_eq!(spec.points.len(), 2);
        assert_eq!(spec.points[1].x, 2.0);
        assert_eq!(spec.repeat, 1);
    }

    #[test]
    fn axis_must_resolve() {
        let text = SPEC.replace("flows.1.ledbat.G", "flows.1.ledbat.Q");
        assert!(matches!(SweepSpec::parse(&text), Err(HarnessError::SweepPoint { .. })));
        let text = SPEC.replace("sweep.values = 1, 2\n", "");
        assert!(SweepSpec::parse(&text).is_err());
    }

    #[test]
    fn scenario_errors_keep_their_line_numbers() {
        let text = format!("{SPEC}bogus = 1\n");
        match SweepSpec::parse(&text) {
            Err(HarnessError::Config(ConfigError::Parse { line, .. })) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_value_sweep_matches_direct_run() {
        let text = SPEC.replace("1, 2", "3");
        let spec = SweepSpec::parse(&text).unwrap();
        let rows = run_sweep(&spec).unwrap();
        let mut cfg = spec.base.clone();
        cfg.set("flows.1.ledbat.G", "3").unwrap();
        let direct = run_scenario(&cfg, false).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].report, direct.report);
    }
}
