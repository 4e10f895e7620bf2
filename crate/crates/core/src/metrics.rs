//! Run-level metrics: efficiency, TCP breakdown, Jain fairness over the
//! whole run and per window, normalized queue occupancy and loss rate.
//!
//! Throughput is receiver-side goodput: only in-order bytes count, so
//! retransmissions are never double-counted and efficiency cannot exceed
//! one by more than a packet's worth of boundary effect.

use std::time::Duration;

use crate::controllers::Protocol;
use crate::network::FlowId;

/// Per-flow counters captured at the end of the measurement horizon.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowCounters {
    pub flow: FlowId,
    pub protocol: Option<Protocol>,
    /// In-order bytes delivered to the receiver.
    pub bytes_delivered: u64,
    /// Enqueue attempts at the bottleneck, drops included.
    pub packets_sent: u64,
    pub packets_dropped: u64,
    /// Data packets that reached the receiver (duplicates included).
    pub packets_arrived: u64,
}

/// `bytes * 8 / horizon`, in bits per second.
pub fn flow_throughput(bytes_delivered: u64, horizon: Duration) -> f64 {
    assert!(!horizon.is_zero(), "throughput horizon must be positive");
    bytes_delivered as f64 * 8.0 / horizon.as_secs_f64()
}

/// Aggregate throughput over capacity. Not clipped.
pub fn efficiency(throughputs_bps: &[f64], capacity_bps: f64) -> f64 {
    assert!(capacity_bps > 0.0, "capacity must be positive");
    throughputs_bps.iter().sum::<f64>() / capacity_bps
}

/// Share of delivered data belonging to Reno flows; `None` when there is
/// no Reno flow or nothing was delivered.
pub fn tcp_breakdown(flows: &[(Protocol, f64)]) -> Option<f64> {
    if !flows.iter().any(|(p, _)| *p == Protocol::Reno) {
        return None;
    }
    let total: f64 = flows.iter().map(|(_, x)| x).sum();
    if total <= 0.0 {
        return None;
    }
    let tcp: f64 = flows.iter().filter(|(p, _)| *p == Protocol::Reno).map(|(_, x)| x).sum();
    Some(tcp / total)
}

/// Jain's index `(Σx)² / (N Σx²)`; `None` for empty or all-zero input.
pub fn jain_index(rates: &[f64]) -> Option<f64> {
    let n = rates.len() as f64;
    let sum: f64 = rates.iter().sum();
    let sum_sq: f64 = rates.iter().map(|x| x * x).sum();
    if rates.is_empty() || sum_sq <= 0.0 {
        return None;
    }
    // Rounding can nudge an exactly fair vector past 1.
    Some((sum * sum / (n * sum_sq)).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShortTermFairness {
    pub mean: f64,
    pub min: f64,
    pub windows: usize,
}

/// Jain index per window (rows are windows, columns flows), averaged over
/// the windows that carried any traffic.
pub fn short_term_fairness(window_rates: &[Vec<f64>]) -> Option<ShortTermFairness> {
    let per_window: Vec<f64> = window_rates.iter().filter_map(|w| jain_index(w)).collect();
    if per_window.is_empty() {
        return None;
    }
    let mean = per_window.iter().sum::<f64>() / per_window.len() as f64;
    let min = per_window.iter().copied().fold(f64::INFINITY, f64::min);
    Some(ShortTermFairness { mean, min, windows: per_window.len() })
}

/// Mean backlog over the buffer size.
pub fn queue_occupancy(mean_backlog: f64, buffer_pkts: usize) -> f64 {
    assert!(buffer_pkts > 0);
    mean_backlog / buffer_pkts as f64
}

pub fn queue_occupancy_from_samples(samples: &[usize], buffer_pkts: usize) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mean = samples.iter().sum::<usize>() as f64 / samples.len() as f64;
    Some(queue_occupancy(mean, buffer_pkts))
}

/// Dropped over sent, summed across flows; `None` if nothing was sent.
pub fn loss_rate(counters: &[FlowCounters]) -> Option<f64> {
    let sent: u64 = counters.iter().map(|c| c.packets_sent).sum();
    let dropped: u64 = counters.iter().map(|c| c.packets_dropped).sum();
    (sent > 0).then(|| dropped as f64 / sent as f64)
}

/// Everything a finished run hands to the metric suite.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub capacity_bps: u64,
    pub horizon: Duration,
    pub buffer_pkts: usize,
    pub fairness_window: Duration,
    pub flows: Vec<FlowCounters>,
    /// Per fairness window, bytes delivered by each flow.
    pub window_bytes: Vec<Vec<u64>>,
    pub mean_backlog: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub eta: f64,
    pub tcp_pct: Option<f64>,
    pub f_lt: Option<f64>,
    /// Long-term fairness over the LBE flows only.
    pub f_lt_lbe: Option<f64>,
    pub f_st: Option<f64>,
    pub f_st_min: Option<f64>,
    pub b_norm: f64,
    pub p_l: f64,
    pub per_flow_throughput: Vec<f64>,
    pub protocols: Vec<Protocol>,
    /// Jain index per fairness window (`None` for idle windows).
    pub per_window_jain: Vec<Option<f64>>,
}

impl MetricsReport {
    pub fn compute(run: &RunRecord) -> Self {
        let per_flow: Vec<f64> = run
            .flows
            .iter()
            .map(|c| flow_throughput(c.bytes_delivered, run.horizon))
            .collect();
        let protocols: Vec<Protocol> = run
            .flows
            .iter()
            .map(|c| c.protocol.unwrap_or(Protocol::Reno))
            .collect();
        let tagged: Vec<(Protocol, f64)> = protocols.iter().copied().zip(per_flow.iter().copied()).collect();
        let lbe: Vec<f64> = tagged.iter().filter(|(p, _)| p.is_lbe()).map(|(_, x)| *x).collect();

        let win_secs = run.fairness_window.as_secs_f64();
        let window_rates: Vec<Vec<f64>> = run
            .window_bytes
            .iter()
            .map(|w| w.iter().map(|&b| b as f64 * 8.0 / win_secs).collect())
            .collect();
        let fst = short_term_fairness(&window_rates);

        MetricsReport {
            eta: efficiency(&per_flow, run.capacity_bps as f64),
            tcp_pct: tcp_breakdown(&tagged),
            f_lt: jain_index(&per_flow),
            f_lt_lbe: jain_index(&lbe),
            f_st: fst.map(|f| f.mean),
            f_st_min: fst.map(|f| f.min),
            b_norm: run
                .mean_backlog
                .map_or(0.0, |m| queue_occupancy(m, run.buffer_pkts)),
            p_l: loss_rate(&run.flows).unwrap_or(0.0),
            per_flow_throughput: per_flow,
            protocols,
            per_window_jain: window_rates.iter().map(|w| jain_index(w)).collect(),
        }
    }

    /// Throughput of each protocol class as a share of capacity.
    pub fn class_share(&self, protocol: Protocol, capacity_bps: f64) -> f64 {
        self.per_flow_throughput
            .iter()
            .zip(&self.protocols)
            .filter(|(_, p)| **p == protocol)
            .map(|(x, _)| x)
            .sum::<f64>()
            / capacity_bps
    }

    /// Mean per-flow share of capacity for one protocol.
    pub fn per_flow_share(&self, protocol: Protocol, capacity_bps: f64) -> Option<f64> {
        let n = self.protocols.iter().filter(|p| **p == protocol).count();
        (n > 0).then(|| self.class_share(protocol, capacity_bps) / n as f64)
    }
}
