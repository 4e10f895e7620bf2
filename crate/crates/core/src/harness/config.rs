//! Scenario configuration: a flat, line-oriented `key = value` document.
//!
//! ```text
//! # dumbbell defaults shown explicitly
//! name = reno_vs_ledbat
//! capacity_bps = 10000000
//! fwd_prop_delay_ms = 25
//! buffer_pkts = 100
//! horizon_s = 120
//! flows.0.protocol = reno
//! flows.1.protocol = ledbat
//! flows.1.ledbat.T_pct = 20
//! ```
//!
//! `#` starts a comment. Each flow group `flows.N` needs a `protocol` and
//! may set `count` to instantiate several identical flows. Group indices
//! must be contiguous from 0. Every key is listed in [`KEYS`].

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::controllers::{
    Controller, CoordsError, GainTargetCoords, LedbatParams, LedbatState, LpParams, LpState, NiceParams,
    NiceState, Protocol, RenoState,
};
use crate::engine::SimTime;
use crate::sim::{FlowSetup, RunOptions, Topology};

/// Top-level keys, then per-flow keys (after `flows.N.`).
pub const KEYS: &[&str] = &[
    "name",
    "capacity_bps",
    "fwd_prop_delay_ms",
    "buffer_pkts",
    "pkt_size_bytes",
    "ack_size_bytes",
    "horizon_s",
    "fairness_window_s",
    "start_spacing_ms",
];

pub const FLOW_KEYS: &[&str] = &[
    "protocol",
    "count",
    "start_s",
    "extra_return_delay_ms",
    "rtt_scale",
    "lp.alpha",
    "lp.delta",
    "lp.inference_rtts",
    "lp.rebase",
    "nice.delta",
    "nice.phi",
    "nice.floor",
    "nice.slow_start",
    "ledbat.tau_ms",
    "ledbat.T_pct",
    "ledbat.gamma",
    "ledbat.G",
    "ledbat.slow_start",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: cannot parse `{value}`")]
    BadValue { key: String, value: String },
    #[error("`{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error("`{field}`: {source}")]
    Coords {
        field: String,
        #[source]
        source: CoordsError,
    },
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), msg: msg.into() }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReturnDelay {
    /// Added on top of the base return delay.
    Extra(Duration),
    /// Propagation RTT as a multiple of the base one; extra delay goes on the
    /// return path so forward delays stay untouched.
    RttScale(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LedbatTarget {
    Millis(f64),
    /// Share of the full-buffer drain time, in percent.
    Percent(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LedbatGain {
    /// Absolute gain in 1/s.
    Gamma(f64),
    /// `G = gamma * tau`.
    Normalized(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedbatSpec {
    pub target: LedbatTarget,
    pub gain: LedbatGain,
    pub slow_start: bool,
}

impl Default for LedbatSpec {
    fn default() -> Self {
        LedbatSpec {
            target: LedbatTarget::Millis(25.0),
            gain: LedbatGain::Normalized(1.0),
            slow_start: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowGroup {
    pub protocol: Option<Protocol>,
    pub count: usize,
    pub start_s: f64,
    pub return_delay: ReturnDelay,
    pub lp: LpParams,
    pub nice: NiceParams,
    pub ledbat: LedbatSpec,
}

impl Default for FlowGroup {
    fn default() -> Self {
        FlowGroup {
            protocol: None,
            count: 1,
            start_s: 0.0,
            return_delay: ReturnDelay::Extra(Duration::ZERO),
            lp: LpParams::default(),
            nice: NiceParams::default(),
            ledbat: LedbatSpec::default(),
        }
    }
}

impl FlowGroup {
    pub fn new(protocol: Protocol) -> Self {
        FlowGroup { protocol: Some(protocol), ..FlowGroup::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub capacity_bps: u64,
    pub fwd_prop_delay_ms: f64,
    pub buffer_pkts: usize,
    pub pkt_size_bytes: u32,
    pub ack_size_bytes: u32,
    pub horizon_s: f64,
    pub fairness_window_s: f64,
    /// Offset between consecutive flow starts; `None` is one packet
    /// serialization time, so every first packet finds an idle link.
    pub start_spacing_ms: Option<f64>,
    pub flows: Vec<FlowGroup>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".to_string(),
            capacity_bps: 10_000_000,
            fwd_prop_delay_ms: 25.0,
            buffer_pkts: 100,
            pkt_size_bytes: 1500,
            ack_size_bytes: 40,
            horizon_s: 120.0,
            fairness_window_s: 1.0,
            start_spacing_ms: None,
            flows: Vec::new(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::BadValue { key: key.to_string(), value: value.to_string() }),
    }
}

fn millis(ms: f64) -> Duration {
    Duration::from_secs_f64(ms / 1e3)
}

/// Splits `flows.N.rest` into `(N, rest)`.
fn flow_path(key: &str) -> Option<Result<(usize, &str), ConfigError>> {
    let rest = key.strip_prefix("flows.")?;
    let (idx, field) = match rest.split_once('.') {
        Some(parts) => parts,
        None => return Some(Err(ConfigError::UnknownKey(key.to_string()))),
    };
    Some(
        idx.parse::<usize>()
            .map(|i| (i, field))
            .map_err(|_| ConfigError::UnknownKey(key.to_string())),
    )
}

impl ScenarioConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(ConfigError::Parse { line, msg: "empty key".into() });
            }
            if seen.contains(&key) {
                return Err(ConfigError::Duplicate { line, key: key.to_string() });
            }
            seen.push(key);
            if let Some(Ok((idx, _))) = flow_path(key) {
                if idx >= cfg.flows.len() {
                    cfg.flows.resize_with(idx + 1, FlowGroup::default);
                }
            }
            cfg.set(key, value).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::Parse { line, msg: format!("unknown key `{k}`") },
                ConfigError::BadValue { key, value } => {
                    ConfigError::Parse { line, msg: format!("`{key}`: cannot parse `{value}`") }
                }
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key. Flow groups must already exist.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if let Some(path) = flow_path(key) {
            let (idx, field) = path?;
            let n = self.flows.len();
            let group = self
                .flows
                .get_mut(idx)
                .ok_or_else(|| invalid(key, format!("flow group {idx} does not exist ({n} defined)")))?;
            return group.set(key, field, value);
        }
        match key {
            "name" => self.name = value.to_string(),
            "capacity_bps" => self.capacity_bps = parse(key, value)?,
            "fwd_prop_delay_ms" => self.fwd_prop_delay_ms = parse(key, value)?,
            "buffer_pkts" => self.buffer_pkts = parse(key, value)?,
            "pkt_size_bytes" => self.pkt_size_bytes = parse(key, value)?,
            "ack_size_bytes" => self.ack_size_bytes = parse(key, value)?,
            "horizon_s" => self.horizon_s = parse(key, value)?,
            "fairness_window_s" => self.fairness_window_s = parse(key, value)?,
            "start_spacing_ms" => self.start_spacing_ms = Some(parse(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.capacity_bps == 0 {
            return Err(invalid("capacity_bps", "must be positive"));
        }
        if !(self.fwd_prop_delay_ms >= 0.0 && self.fwd_prop_delay_ms.is_finite()) {
            return Err(invalid("fwd_prop_delay_ms", "must be a non-negative number"));
        }
        if self.buffer_pkts == 0 {
            return Err(invalid("buffer_pkts", "must be positive"));
        }
        if self.pkt_size_bytes == 0 {
            return Err(invalid("pkt_size_bytes", "must be positive"));
        }
        if self.ack_size_bytes == 0 {
            return Err(invalid("ack_size_bytes", "must be positive"));
        }
        if !(self.horizon_s > 0.0 && self.horizon_s.is_finite()) {
            return Err(invalid("horizon_s", "must be positive"));
        }
        if !(self.fairness_window_s > 0.0 && self.fairness_window_s.is_finite()) {
            return Err(invalid("fairness_window_s", "must be positive"));
        }
        if self.start_spacing_ms.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
            return Err(invalid("start_spacing_ms", "must be non-negative"));
        }
        if self.flows.is_empty() {
            return Err(invalid("flows", "at least one flow is required"));
        }
        for (i, g) in self.flows.iter().enumerate() {
            g.validate(i)?;
            self.ledbat_params(g).map_err(|e| match e {
                ConfigError::Coords { source, .. } => ConfigError::Coords { field: format!("flows.{i}.ledbat"), source },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn total_flows(&self) -> usize {
        self.flows.iter().map(|g| g.count).sum()
    }

    /// Full-buffer drain time in seconds.
    pub fn buffer_drain_secs(&self) -> f64 {
        crate::controllers::buffer_drain_secs(self.capacity_bps, self.pkt_size_bytes, self.buffer_pkts)
    }

    fn ledbat_params(&self, g: &FlowGroup) -> Result<LedbatParams, ConfigError> {
        let tau_s = match g.ledbat.target {
            LedbatTarget::Millis(ms) => ms / 1e3,
            LedbatTarget::Percent(pct) => {
                let (_, tau) = GainTargetCoords { gain: 1.0, target_fraction: pct / 100.0 }
                    .to_params(self.capacity_bps, self.pkt_size_bytes, self.buffer_pkts)
                    .map_err(|source| ConfigError::Coords { field: "ledbat.T_pct".into(), source })?;
                tau.as_secs_f64()
            }
        };
        if !(tau_s > 0.0 && tau_s.is_finite()) {
            return Err(invalid("ledbat.tau_ms", "must be positive"));
        }
        let gain = match g.ledbat.gain {
            LedbatGain::Gamma(gamma) => gamma,
            LedbatGain::Normalized(big_g) => big_g / tau_s,
        };
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(invalid("ledbat.gamma", "must be positive"));
        }
        Ok(LedbatParams {
            target: Duration::from_secs_f64(tau_s),
            gain,
            slow_start: g.ledbat.slow_start,
        })
    }

    pub fn topology(&self) -> Topology {
        let fwd = millis(self.fwd_prop_delay_ms);
        Topology {
            capacity_bps: self.capacity_bps,
            fwd_prop_delay: fwd,
            return_delay: fwd,
            buffer_pkts: self.buffer_pkts,
            pkt_size: self.pkt_size_bytes,
            ack_size: self.ack_size_bytes,
        }
    }

    /// Expands flow groups into one setup per flow, in group order.
    pub fn flow_setups(&self) -> Result<Vec<FlowSetup>, ConfigError> {
        let base_rtt = 2.0 * self.fwd_prop_delay_ms;
        let spacing = self.start_spacing();
        let mut out = Vec::with_capacity(self.total_flows());
        for (i, g) in self.flows.iter().enumerate() {
            let protocol = g.protocol.ok_or_else(|| invalid(format!("flows.{i}.protocol"), "missing"))?;
            let extra = match g.return_delay {
                ReturnDelay::Extra(d) => d,
                ReturnDelay::RttScale(r) => millis((r - 1.0) * base_rtt),
            };
            let controller = match protocol {
                Protocol::Reno => Controller::Reno(RenoState),
                Protocol::Lp => Controller::Lp(LpState::new(g.lp)),
                Protocol::Nice => Controller::Nice(NiceState::new(g.nice)),
                Protocol::Ledbat => Controller::Ledbat(LedbatState::new(self.ledbat_params(g)?)),
            };
            for _ in 0..g.count {
                let offset = spacing * out.len() as u32;
                out.push(FlowSetup {
                    controller: controller.clone(),
                    extra_return_delay: extra,
                    start_at: SimTime::from_secs_f64(g.start_s) + offset,
                });
            }
        }
        Ok(out)
    }

    pub fn start_spacing(&self) -> Duration {
        match self.start_spacing_ms {
            Some(ms) => millis(ms),
            None => Duration::from_secs_f64(f64::from(self.pkt_size_bytes) * 8.0 / self.capacity_bps as f64),
        }
    }

    pub fn run_options(&self) -> RunOptions {
        let mut opts = RunOptions::new(Duration::from_secs_f64(self.horizon_s));
        opts.fairness_window = Duration::from_secs_f64(self.fairness_window_s);
        opts
    }

    /// Protocol of every instantiated flow.
    pub fn protocols(&self) -> Vec<Protocol> {
        self.flows
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.protocol.unwrap_or(Protocol::Reno), g.count))
            .collect()
    }
}

impl FlowGroup {
    fn set(&mut self, key: &str, field: &str, value: &str) -> Result<(), ConfigError> {
        match field {
            "protocol" => self.protocol = Some(parse(key, value)?),
            "count" => self.count = parse(key, value)?,
            "start_s" => self.start_s = parse(key, value)?,
            "extra_return_delay_ms" => self.return_delay = ReturnDelay::Extra(millis(non_negative(key, parse(key, value)?)?)),
            "rtt_scale" => self.return_delay = ReturnDelay::RttScale(parse(key, value)?),
            "lp.alpha" => self.lp.alpha = parse(key, value)?,
            "lp.delta" => self.lp.delta = parse(key, value)?,
            "lp.inference_rtts" => self.lp.inference_rtts = parse(key, value)?,
            "lp.rebase" => self.lp.rebase = parse_bool(key, value)?,
            "nice.delta" => self.nice.delta = parse(key, value)?,
            "nice.phi" => self.nice.phi = parse(key, value)?,
            "nice.floor" => self.nice.floor = parse(key, value)?,
            "nice.slow_start" => self.nice.slow_start = parse_bool(key, value)?,
            "ledbat.tau_ms" => self.ledbat.target = LedbatTarget::Millis(parse(key, value)?),
            "ledbat.T_pct" => self.ledbat.target = LedbatTarget::Percent(parse(key, value)?),
            "ledbat.gamma" => self.ledbat.gain = LedbatGain::Gamma(parse(key, value)?),
            "ledbat.G" => self.ledbat.gain = LedbatGain::Normalized(parse(key, value)?),
            "ledbat.slow_start" => self.ledbat.slow_start = parse_bool(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    fn validate(&self, i: usize) -> Result<(), ConfigError> {
        let f = |name: &str| format!("flows.{i}.{name}");
        if self.protocol.is_none() {
            return Err(invalid(f("protocol"), "missing"));
        }
        if self.count == 0 {
            return Err(invalid(f("count"), "must be at least 1"));
        }
        if !(self.start_s >= 0.0 && self.start_s.is_finite()) {
            return Err(invalid(f("start_s"), "must be non-negative"));
        }
        if let ReturnDelay::RttScale(r) = self.return_delay {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(invalid(f("rtt_scale"), "must be at least 1"));
            }
        }
        let lp = &self.lp;
        if !(lp.alpha > 0.0 && lp.alpha <= 1.0) {
            return Err(invalid(f("lp.alpha"), "must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&lp.delta) {
            return Err(invalid(f("lp.delta"), "must be in [0, 1]"));
        }
        if !(lp.inference_rtts > 0.0 && lp.inference_rtts.is_finite()) {
            return Err(invalid(f("lp.inference_rtts"), "must be positive"));
        }
        let nice = &self.nice;
        if !(0.0..=1.0).contains(&nice.delta) {
            return Err(invalid(f("nice.delta"), "must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&nice.phi) {
            return Err(invalid(f("nice.phi"), "must be in [0, 1]"));
        }
        if !(nice.floor > 0.0 && nice.floor <= 1.0) {
            return Err(invalid(f("nice.floor"), "must be in (0, 1]"));
        }
        Ok(())
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be non-negative"))
    }
}

impl fmt::Display for ScenarioConfig {
    /// Writes the config back in its own grammar; parsing the output
    /// reproduces `self`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "capacity_bps = {}", self.capacity_bps)?;
        writeln!(f, "fwd_prop_delay_ms = {}", self.fwd_prop_delay_ms)?;
        writeln!(f, "buffer_pkts = {}", self.buffer_pkts)?;
        writeln!(f, "pkt_size_bytes = {}", self.pkt_size_bytes)?;
        writeln!(f, "ack_size_bytes = {}", self.ack_size_bytes)?;
        writeln!(f, "horizon_s = {}", self.horizon_s)?;
        writeln!(f, "fairness_window_s = {}", self.fairness_window_s)?;
        if let Some(s) = self.start_spacing_ms {
            writeln!(f, "start_spacing_ms = {s}")?;
        }
        for (i, g) in self.flows.iter().enumerate() {
            let p = format!("flows.{i}");
            if let Some(proto) = g.protocol {
                writeln!(f, "{p}.protocol = {proto}")?;
            }
            writeln!(f, "{p}.count = {}", g.count)?;
            writeln!(f, "{p}.start_s = {}", g.start_s)?;
            match g.return_delay {
                ReturnDelay::Extra(d) => writeln!(f, "{p}.extra_return_delay_ms = {}", d.as_secs_f64() * 1e3)?,
                ReturnDelay::RttScale(r) => writeln!(f, "{p}.rtt_scale = {r}")?,
            }
            match g.protocol {
                Some(Protocol::Lp) => {
                    writeln!(f, "{p}.lp.alpha = {}", g.lp.alpha)?;
                    writeln!(f, "{p}.lp.delta = {}", g.lp.delta)?;
                    writeln!(f, "{p}.lp.inference_rtts = {}", g.lp.inference_rtts)?;
                    writeln!(f, "{p}.lp.rebase = {}", g.lp.rebase)?;
                }
                Some(Protocol::Nice) => {
                    writeln!(f, "{p}.nice.delta = {}", g.nice.delta)?;
                    writeln!(f, "{p}.nice.phi = {}", g.nice.phi)?;
                    writeln!(f, "{p}.nice.floor = {}", g.nice.floor)?;
                    writeln!(f, "{p}.nice.slow_start = {}", g.nice.slow_start)?;
                }
                Some(Protocol::Ledbat) => {
                    match g.ledbat.target {
                        LedbatTarget::Millis(ms) => writeln!(f, "{p}.ledbat.tau_ms = {ms}")?,
                        LedbatTarget::Percent(pct) => writeln!(f, "{p}.ledbat.T_pct = {pct}")?,
                    }
                    match g.ledbat.gain {
                        LedbatGain::Gamma(x) => writeln!(f, "{p}.ledbat.gamma = {x}")?,
                        LedbatGain::Normalized(x) => writeln!(f, "{p}.ledbat.G = {x}")?,
                    }
                    writeln!(f, "{p}.ledbat.slow_start = {}", g.ledbat.slow_start)?;
                }
                Some(Protocol::Reno) | None => {}
            }
        }
        Ok(())
    }
}
