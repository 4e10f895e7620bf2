//! LEDBAT: a linear controller on the distance between the measured
//! queuing delay and a target.
//!
//! Per ack, `cwnd += gain * offset / cwnd` with
//! `offset = target - (owd - base_delay)` in seconds and `gain` in 1/s.
//! The offset is not clamped; the window never drops below one packet.

use std::time::Duration;

use super::{Window, MIN_CWND};

/// Slow start (when enabled) ends once queuing delay reaches this share of
/// the target.
pub const SLOW_START_EXIT: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedbatParams {
    pub target: Duration,
    /// Gain in 1/seconds.
    pub gain: f64,
    pub slow_start: bool,
}

impl LedbatParams {
    /// Target `tau` with the dimensionless gain `G = gain * tau`.
    pub fn with_normalized_gain(target: Duration, g: f64) -> Self {
        LedbatParams {
            target,
            gain: g / target.as_secs_f64(),
            slow_start: false,
        }
    }
}

impl Default for LedbatParams {
    fn default() -> Self {
        LedbatParams::with_normalized_gain(Duration::from_millis(25), 1.0)
    }
}

#[derive(Clone, Debug)]
pub struct LedbatState {
    pub params: LedbatParams,
    base_delay: Option<Duration>,
    in_slow_start: bool,
}

impl LedbatState {
    pub fn new(params: LedbatParams) -> Self {
        LedbatState {
            params,
            base_delay: None,
            in_slow_start: params.slow_start,
        }
    }

    pub fn base_delay(&self) -> Option<Duration> {
        self.base_delay
    }

    pub fn in_slow_start(&self) -> bool {
        self.in_slow_start
    }

    /// Updates the running minimum with `d`, then returns the signed
    /// distance from the target in seconds.
    pub fn offset(&mut self, d: Duration) -> f64 {
        let base = self.base_delay.map_or(d, |b| b.min(d));
        self.base_delay = Some(base);
        let queuing = (d - base).as_secs_f64();
        self.params.target.as_secs_f64() - queuing
    }

    /// One window step for an already computed offset.
    pub fn step(&self, cwnd: f64, offset: f64) -> f64 {
        (cwnd + self.params.gain * offset / cwnd).max(MIN_CWND)
    }

    pub fn on_ack(&mut self, w: &mut Window, owd: Duration) {
        let offset = self.offset(owd);
        if self.in_slow_start {
            let queuing = self.params.target.as_secs_f64() - offset;
            if queuing < SLOW_START_EXIT * self.params.target.as_secs_f64() {
                w.cwnd += 1.0;
                return;
            }
            self.in_slow_start = false;
        }
        w.cwnd = self.step(w.cwnd, offset);
    }

    /// Base delay survives losses.
    pub fn on_loss(&mut self) {
        self.in_slow_start = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MS: f64 = 1e-3;

    #[test]
    fn offset_examples() {
        let mut s = LedbatState::new(LedbatParams::default());
        let base = Duration::from_micros(26_200);
        assert!((s.offset(base) - 25.0 * MS).abs() < 1e-12);
        assert!(s.offset(base + Duration::from_millis(25)).abs() < 1e-12);
        assert!((s.offset(base + Duration::from_millis(40)) + 15.0 * MS).abs() < 1e-12);
        assert_eq!(s.base_delay(), Some(base));
    }

    #[test]
    fn unit_gain_adds_one_packet_per_window() {
        let s = LedbatState::new(LedbatParams::default());
        let mut cwnd = 10.0;
        for _ in 0..10 {
            cwnd = s.step(cwnd, 25.0 * MS);
        }
        // Ten acks at +1/cwnd each: slightly under 11 because cwnd grows.
        assert!(cwnd > 10.9 && cwnd < 11.0, "{cwnd}");
        assert!((s.step(10.0, 25.0 * MS) - 10.1).abs() < 1e-12);
        assert_eq!(s.step(10.0, 0.0), 10.0);
    }

    #[test]
    fn window_floor() {
        let s = LedbatState::new(LedbatParams::default());
        assert_eq!(s.step(1.5, -1.0), 1.0);
    }

    #[test]
    fn slow_start_until_queue_builds() {
        let mut s = LedbatState::new(LedbatParams { slow_start: true, ..LedbatParams::default() });
        let mut w = Window::initial();
        let base = Duration::from_millis(26);
        s.on_ack(&mut w, base);
        s.on_ack(&mut w, base + Duration::from_millis(5));
        assert_eq!(w.cwnd, 3.0);
        assert!(s.in_slow_start());
        s.on_ack(&mut w, base + Duration::from_millis(20));
        assert!(!s.in_slow_start());
        assert!((w.cwnd - (3.0 + 40.0 * 0.005 / 3.0)).abs() < 1e-12);
    }
}
