//! The experiment catalog. Each id expands, purely, into the sweeps that
//! produce one figure's data. Every scenario uses the dumbbell defaults:
//! 10 Mbps, 25 ms each way, 100-packet buffer, 1500-byte packets, 120 s.

use std::fmt;
use std::str::FromStr;

use super::config::{FlowGroup, ScenarioConfig};
use super::sweep::{SweepPoint, SweepSpec};
use super::HarnessError;
use crate::controllers::Protocol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Fig1,
    Fig2Gain,
    Fig2Target,
    Fig3GainRatio,
    Fig3TargetRatio,
    Fig4,
    Fig5,
    Fig6,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Fig1,
        ExperimentId::Fig2Gain,
        ExperimentId::Fig2Target,
        ExperimentId::Fig3GainRatio,
        ExperimentId::Fig3TargetRatio,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1",
            ExperimentId::Fig2Gain => "fig2_gain",
            ExperimentId::Fig2Target => "fig2_target",
            ExperimentId::Fig3GainRatio => "fig3_gain_ratio",
            ExperimentId::Fig3TargetRatio => "fig3_target_ratio",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
        }
    }

    /// Whether runs of this experiment keep cwnd traces.
    pub fn wants_traces(self) -> bool {
        self == ExperimentId::Fig1
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| HarnessError::UnknownExperiment(s.to_string()))
    }
}

/// LEDBAT target sweep, in percent of the buffer drain time.
pub const FIG2_TARGETS: [f64; 23] = [
    2.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0, 90.0, 95.0, 100.0,
    110.0, 120.0, 130.0, 140.0, 150.0,
];
pub const FIG3_RATIOS: [f64; 11] = [1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
pub const FIG4_MAX_LBE: usize = 10;
pub const FIG5_MAX_PER_FLAVOR: usize = 5;
pub const FIG6_MAX_RATIO: usize = 10;
/// Canonical LEDBAT target in milliseconds.
pub const CANONICAL_TAU_MS: f64 = 25.0;

fn scenario(name: &str, groups: Vec<FlowGroup>) -> ScenarioConfig {
    ScenarioConfig { name: name.to_string(), flows: groups, ..ScenarioConfig::default() }
}

fn label(x: f64) -> String {
    format!("{x}")
}

fn point(x: f64, assignments: &[(&str, String)]) -> SweepPoint {
    SweepPoint {
        label: label(x),
        x,
        assignments: assignments.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
    }
}

fn spec(id: String, base: ScenarioConfig, axis: &str, points: Vec<SweepPoint>) -> SweepSpec {
    SweepSpec { id, base, axis: axis.to_string(), points, repeat: 1 }
}

fn ledbat_only(id: ExperimentId, protocol: Option<Protocol>) -> Result<(), HarnessError> {
    match protocol {
        None | Some(Protocol::Ledbat) => Ok(()),
        Some(p) => Err(HarnessError::ProtocolMismatch { id: id.name().into(), protocol: p.name().into() }),
    }
}

/// Sweeps for `id`, restricted to `protocol` when given.
pub fn expand(id: ExperimentId, protocol: Option<Protocol>) -> Result<Vec<SweepSpec>, HarnessError> {
    let specs = match id {
        ExperimentId::Fig1 => fig1(protocol)?,
        ExperimentId::Fig2Gain => {
            ledbat_only(id, protocol)?;
            let base = scenario("fig2_gain", vec![FlowGroup::new(Protocol::Reno), FlowGroup::new(Protocol::Ledbat)]);
            let points = (1..=10).map(|g| point(g as f64, &[("flows.1.ledbat.G", g.to_string())])).collect();
            vec![spec("fig2_gain".into(), base, "G", points)]
        }
        ExperimentId::Fig2Target => {
            ledbat_only(id, protocol)?;
            let base = scenario("fig2_target", vec![FlowGroup::new(Protocol::Reno), FlowGroup::new(Protocol::Ledbat)]);
            let points = FIG2_TARGETS
                .iter()
                .map(|&t| point(t, &[("flows.1.ledbat.T_pct", label(t))]))
                .collect();
            vec![spec("fig2_target".into(), base, "T_pct", points)]
        }
        ExperimentId::Fig3GainRatio => {
            ledbat_only(id, protocol)?;
            let base = scenario("fig3_gain_ratio", vec![FlowGroup::new(Protocol::Ledbat), FlowGroup::new(Protocol::Ledbat)]);
            let points = FIG3_RATIOS
                .iter()
                .map(|&r| point(r, &[("flows.0.ledbat.G", label(r))]))
                .collect();
            vec![spec("fig3_gain_ratio".into(), base, "G1/G2", points)]
        }
        ExperimentId::Fig3TargetRatio => {
            ledbat_only(id, protocol)?;
            let base = scenario("fig3_target_ratio", vec![FlowGroup::new(Protocol::Ledbat), FlowGroup::new(Protocol::Ledbat)]);
            let points = FIG3_RATIOS
                .iter()
                .map(|&r| point(r, &[("flows.0.ledbat.tau_ms", label(CANONICAL_TAU_MS * r))]))
                .collect();
            vec![spec("fig3_target_ratio".into(), base, "T1/T2", points)]
        }
        ExperimentId::Fig4 => fig4(protocol),
        ExperimentId::Fig5 => fig5(protocol),
        ExperimentId::Fig6 => fig6(protocol),
    };
    Ok(specs)
}

fn lbe_set(protocol: Option<Protocol>, id: ExperimentId) -> Result<Vec<Protocol>, HarnessError> {
    match protocol {
        None => Ok(Protocol::LBE.to_vec()),
        Some(p) if p.is_lbe() => Ok(vec![p]),
        Some(p) => Err(HarnessError::ProtocolMismatch { id: id.name().into(), protocol: p.name().into() }),
    }
}

/// Two-flow trace runs per LBE flavor: against Reno, then against itself.
fn fig1(protocol: Option<Protocol>) -> Result<Vec<SweepSpec>, HarnessError> {
    Ok(lbe_set(protocol, ExperimentId::Fig1)?
        .into_iter()
        .map(|p| {
            let id = format!("fig1_{p}");
            let base = scenario(&id, vec![FlowGroup::new(Protocol::Reno), FlowGroup::new(p)]);
            let points = vec![
                SweepPoint { label: format!("reno_vs_{p}"), x: 0.0, assignments: vec![] },
                SweepPoint {
                    label: format!("{p}_vs_{p}"),
                    x: 1.0,
                    assignments: vec![("flows.0.protocol".into(), p.name().into())],
                },
            ];
            spec(id, base, "pair", points)
        })
        .collect())
}

/// N LBE flows against one Reno flow, and the all-Reno reference.
fn fig4(protocol: Option<Protocol>) -> Vec<SweepSpec> {
    let lbe: Vec<Protocol> = match protocol {
        None => Protocol::LBE.to_vec(),
        Some(Protocol::Reno) => vec![],
        Some(p) => vec![p],
    };
    let mut specs: Vec<SweepSpec> = lbe
        .into_iter()
        .map(|p| {
            let id = format!("fig4_{p}");
            let base = scenario(&id, vec![FlowGroup::new(Protocol::Reno), FlowGroup::new(p)]);
            let points = (1..=FIG4_MAX_LBE)
                .map(|n| point(n as f64, &[("flows.1.count", n.to_string())]))
                .collect();
            spec(id, base, "N", points)
        })
        .collect();
    if matches!(protocol, None | Some(Protocol::Reno)) {
        let base = scenario("fig4_reno", vec![FlowGroup::new(Protocol::Reno)]);
        let points = (1..=FIG4_MAX_LBE)
            .map(|n| point(n as f64, &[("flows.0.count", (n + 1).to_string())]))
            .collect();
        specs.push(spec("fig4_reno".into(), base, "N", points));
    }
    specs
}

/// k flows of each LBE flavor sharing the link, and 3k Reno flows.
fn fig5(protocol: Option<Protocol>) -> Vec<SweepSpec> {
    let mut specs = Vec::new();
    if protocol != Some(Protocol::Reno) {
        let groups = Protocol::LBE.iter().map(|&p| FlowGroup::new(p)).collect();
        let base = scenario("fig5_lbe", groups);
        let points = (1..=FIG5_MAX_PER_FLAVOR)
            .map(|k| {
                let n = k.to_string();
                point(
                    k as f64,
                    &[("flows.0.count", n.clone()), ("flows.1.count", n.clone()), ("flows.2.count", n)],
                )
            })
            .collect();
        specs.push(spec("fig5_lbe".into(), base, "flows_per_flavor", points));
    }
    if matches!(protocol, None | Some(Protocol::Reno)) {
        let base = scenario("fig5_reno", vec![FlowGroup::new(Protocol::Reno)]);
        let points = (1..=FIG5_MAX_PER_FLAVOR)
            .map(|k| point(k as f64, &[("flows.0.count", (3 * k).to_string())]))
            .collect();
        specs.push(spec("fig5_reno".into(), base, "flows_per_flavor", points));
    }
    specs
}

/// Two same-protocol flows, the first with an RTT `r` times longer.
fn fig6(protocol: Option<Protocol>) -> Vec<SweepSpec> {
    let set: Vec<Protocol> = protocol.map_or(Protocol::ALL.to_vec(), |p| vec![p]);
    set.into_iter()
        .map(|p| {
            let id = format!("fig6_{p}");
            let base = scenario(&id, vec![FlowGroup::new(p), FlowGroup::new(p)]);
            let points = (1..=FIG6_MAX_RATIO)
                .map(|r| point(r as f64, &[("flows.0.rtt_scale", r.to_string())]))
                .collect();
            spec(id, base, "RTT1/RTT2", points)
        })
        .collect()
}
