//! TCP-NICE: Vegas window dynamics plus a per-RTT vote. When more than a
//! fraction `phi` of the acks in one RTT carried a delay above the
//! `delta` threshold between min and max RTT, the window is halved. The
//! window may fall below one packet.

use super::{AckSample, LossKind, Window};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NiceParams {
    pub delta: f64,
    pub phi: f64,
    /// Smallest window; 1/48 means one packet every 48 RTTs.
    pub floor: f64,
    /// Vegas lower bound on extra queued packets.
    pub vegas_alpha: f64,
    /// Vegas upper bound on extra queued packets.
    pub vegas_beta: f64,
    /// Vegas-style slow start at connection start and after a timeout: +1
    /// per ack, no vote, until the Vegas estimate exceeds `vegas_alpha`,
    /// cwnd reaches ssthresh, or a loss.
    pub slow_start: bool,
}

impl Default for NiceParams {
    fn default() -> Self {
        NiceParams {
            delta: 0.2,
            phi: 0.5,
            floor: 1.0 / 48.0,
            vegas_alpha: 1.0,
            vegas_beta: 3.0,
            slow_start: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NiceState {
    pub params: NiceParams,
    rtt_min: f64,
    rtt_max: f64,
    marked: u32,
    total: u32,
    epoch_min_rtt: f64,
    /// The epoch closes once the cumulative ack reaches this sequence.
    epoch_end: u64,
    in_slow_start: bool,
}

impl NiceState {
    pub fn new(params: NiceParams) -> Self {
        NiceState {
            params,
            rtt_min: f64::INFINITY,
            rtt_max: 0.0,
            marked: 0,
            total: 0,
            epoch_min_rtt: f64::INFINITY,
            epoch_end: 0,
            in_slow_start: params.slow_start,
        }
    }

    pub fn fractional_floor(&self) -> f64 {
        self.params.floor
    }

    pub fn rtt_range(&self) -> (f64, f64) {
        (self.rtt_min, self.rtt_max)
    }

    pub fn counters(&self) -> (u32, u32) {
        (self.marked, self.total)
    }

    pub fn in_slow_start(&self) -> bool {
        self.in_slow_start
    }

    pub fn mark_threshold(&self) -> f64 {
        self.rtt_min + (self.rtt_max - self.rtt_min) * self.params.delta
    }

    /// Records one RTT sample (seconds); returns whether it was marked.
    pub fn observe(&mut self, rtt: f64) -> bool {
        self.rtt_min = self.rtt_min.min(rtt);
        self.rtt_max = self.rtt_max.max(rtt);
        self.epoch_min_rtt = self.epoch_min_rtt.min(rtt);
        self.total += 1;
        let marked = rtt > self.mark_threshold();
        if marked {
            self.marked += 1;
        }
        marked
    }

    /// Strict majority test against `phi`.
    pub fn congested_epoch(&self) -> bool {
        self.total > 0 && f64::from(self.marked) > self.params.phi * f64::from(self.total)
    }

    /// Extra packets this flow keeps queued, as estimated by Vegas.
    pub fn vegas_diff(&self, cwnd: f64) -> f64 {
        if !self.epoch_min_rtt.is_finite() || self.epoch_min_rtt <= 0.0 {
            return 0.0;
        }
        let expected = cwnd / self.rtt_min;
        let actual = cwnd / self.epoch_min_rtt;
        (expected - actual) * self.rtt_min
    }

    fn reset_epoch(&mut self, next_seq: u64) {
        self.marked = 0;
        self.total = 0;
        self.epoch_min_rtt = f64::INFINITY;
        self.epoch_end = next_seq;
    }

    pub fn on_ack(&mut self, w: &mut Window, ack: &AckSample) {
        self.observe(ack.rtt.as_secs_f64());
        if self.in_slow_start {
            w.cwnd += 1.0;
            if w.cwnd >= w.ssthresh {
                self.in_slow_start = false;
            }
        }
        if ack.ack_no < self.epoch_end {
            return;
        }
        let diff = self.vegas_diff(w.cwnd);
        if self.in_slow_start {
            // Slow start ends on the Vegas queue estimate alone; the vote
            // only applies afterwards.
            if diff > self.params.vegas_alpha {
                self.in_slow_start = false;
                // Drop the slow-start overshoot: keep one packet queued.
                w.cwnd -= diff - 1.0;
            }
        } else if self.congested_epoch() {
            w.cwnd = (w.cwnd / 2.0).max(self.params.floor);
        } else if diff < self.params.vegas_alpha {
            w.cwnd += 1.0;
        } else if diff > self.params.vegas_beta {
            w.cwnd = (w.cwnd - 1.0).max(self.params.floor);
        }
        self.reset_epoch(ack.next_seq);
    }

    /// A timeout restarts slow start, capped at ssthresh, when slow start
    /// is enabled; any other loss ends it.
    pub fn on_loss(&mut self, kind: LossKind) {
        self.in_slow_start = self.params.slow_start && kind == LossKind::Timeout;
        self.marked = 0;
        self.total = 0;
        self.epoch_min_rtt = f64::INFINITY;
    }
}
