//! TCP-LP: early congestion inferred from a smoothed one-way delay crossing
//! a threshold between the observed minimum and maximum.

use std::time::Duration;

use super::{reno_increase, AckSample, TimerRequest, Window, MIN_CWND};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpParams {
    /// EWMA smoothing weight of the newest sample.
    pub alpha: f64,
    /// Threshold position between `d_min` and `d_max`.
    pub delta: f64,
    /// Inference phase length as a multiple of srtt.
    pub inference_rtts: f64,
    /// On each early-congestion reaction, restart the delay range from the
    /// current smoothed delay (min = d, max = 2d).
    pub rebase: bool,
}

impl Default for LpParams {
    fn default() -> Self {
        LpParams { alpha: 1.0 / 8.0, delta: 0.15, inference_rtts: 3.0, rebase: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpPhase {
    Normal,
    Inference,
}

/// Delays are kept in seconds.
#[derive(Clone, Debug)]
pub struct LpState {
    pub params: LpParams,
    d_ewma: Option<f64>,
    d_min: f64,
    d_max: f64,
    phase: LpPhase,
}

impl LpState {
    pub fn new(params: LpParams) -> Self {
        LpState {
            params,
            d_ewma: None,
            d_min: f64::INFINITY,
            d_max: 0.0,
            phase: LpPhase::Normal,
        }
    }

    pub fn phase(&self) -> LpPhase {
        self.phase
    }

    pub fn smoothed_delay(&self) -> Option<f64> {
        self.d_ewma
    }

    pub fn delay_range(&self) -> (f64, f64) {
        (self.d_min, self.d_max)
    }

    /// Folds one delay sample (seconds) into the EWMA and the min/max.
    pub fn update_delay(&mut self, d: f64) {
        let alpha = self.params.alpha;
        self.d_ewma = Some(match self.d_ewma {
            None => d,
            Some(prev) => (1.0 - alpha) * prev + alpha * d,
        });
        self.d_min = self.d_min.min(d);
        self.d_max = self.d_max.max(d);
    }

    pub fn threshold(&self) -> f64 {
        self.d_min + (self.d_max - self.d_min) * self.params.delta
    }

    /// Strict comparison of the smoothed delay against the threshold.
    pub fn early_congestion(&self) -> bool {
        self.d_ewma.is_some_and(|d| d > self.threshold())
    }

    fn rebase_range(&mut self) {
        if let (true, Some(d)) = (self.params.rebase, self.d_ewma) {
            self.d_min = d;
            self.d_max = 2.0 * d;
        }
    }

    pub fn on_ack(&mut self, w: &mut Window, ack: &AckSample) -> TimerRequest {
        self.update_delay(ack.owd.as_secs_f64());
        match self.phase {
            LpPhase::Normal if self.early_congestion() => {
                w.cwnd = (w.cwnd / 2.0).max(MIN_CWND);
                // Growth after the cut is additive, as after a Reno loss.
                w.ssthresh = w.cwnd.max(2.0);
                self.phase = LpPhase::Inference;
                self.rebase_range();
                let rtts = self.params.inference_rtts.max(0.0);
                TimerRequest::ArmInference(Duration::from_secs_f64(ack.srtt.as_secs_f64() * rtts))
            }
            LpPhase::Normal => {
                reno_increase(w);
                TimerRequest::None
            }
            // The window is frozen while LP watches the network.
            LpPhase::Inference => TimerRequest::None,
        }
    }

    /// End of the inference timer: a still-congested path collapses the
    /// window to the minimum and the Reno scheme restarts from there.
    pub fn on_inference_end(&mut self, w: &mut Window) {
        if self.phase != LpPhase::Inference {
            return;
        }
        if self.early_congestion() {
            w.cwnd = MIN_CWND;
            self.rebase_range();
        }
        self.phase = LpPhase::Normal;
    }

    pub fn on_loss(&mut self) -> TimerRequest {
        if self.phase == LpPhase::Inference {
            self.phase = LpPhase::Normal;
            TimerRequest::CancelInference
        } else {
            TimerRequest::None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SimTime;

    fn ms(v: f64) -> f64 {
        v / 1000.0
    }

    fn ack(owd_ms: f64) -> AckSample {
        AckSample {
            now: SimTime::ZERO,
            owd: Duration::from_secs_f64(owd_ms / 1000.0),
            rtt: Duration::from_millis(60),
            srtt: Duration::from_millis(60),
            ack_no: 1,
            next_seq: 2,
        }
    }

    #[test]
    fn ewma_initialization_and_step() {
        let mut s = LpState::new(LpParams::default());
        s.update_delay(ms(30.0));
        assert_eq!(s.smoothed_delay(), Some(ms(30.0)));
        s.update_delay(ms(62.0));
        assert!((s.smoothed_delay().unwrap() - ms(34.0)).abs() < 1e-12);
    }

    #[test]
    fn threshold_arithmetic() {
        let mut s = LpState::new(LpParams::default());
        s.update_delay(ms(25.0));
        s.update_delay(ms(75.0));
        assert!((s.threshold() - ms(32.5)).abs() < 1e-12);
        s.d_ewma = Some(ms(33.0));
        assert!(s.early_congestion());
        s.d_ewma = Some(s.threshold());
        assert!(!s.early_congestion(), "equality is not congestion");
    }

    #[test]
    fn degenerate_range() {
        let mut s = LpState::new(LpParams::default());
        s.update_delay(ms(25.0));
        assert!(!s.early_congestion());
        s.d_ewma = Some(ms(25.1));
        assert!(s.early_congestion());
    }

    #[test]
    fn halve_then_freeze_then_collapse() {
        let mut s = LpState::new(LpParams { rebase: false, ..LpParams::default() });
        let mut w = Window { cwnd: 20.0, ssthresh: f64::INFINITY };
        // Warm-up: flat delay keeps LP in Normal and growing.
        assert_eq!(s.on_ack(&mut w, &ack(25.0)), TimerRequest::None);
        assert_eq!(w.cwnd, 21.0);
        w.cwnd = 20.0;
        s.update_delay(ms(125.0));
        s.d_ewma = Some(ms(100.0));
        let req = s.on_ack(&mut w, &ack(100.0));
        assert_eq!((w.cwnd, w.ssthresh), (10.0, 10.0));
        assert_eq!(s.phase(), LpPhase::Inference);
        assert_eq!(req, TimerRequest::ArmInference(Duration::from_millis(180)));
        // Frozen during inference.
        assert_eq!(s.on_ack(&mut w, &ack(100.0)), TimerRequest::None);
        assert_eq!(w.cwnd, 10.0);
        s.on_inference_end(&mut w);
        assert_eq!(w.cwnd, 1.0);
        assert_eq!(s.phase(), LpPhase::Normal);
    }

    #[test]
    fn rebase_restarts_the_range_at_each_reaction() {
        let mut s = LpState::new(LpParams::default());
        let mut w = Window { cwnd: 20.0, ssthresh: f64::INFINITY };
        s.update_delay(ms(25.0));
        s.update_delay(ms(125.0));
        s.d_ewma = Some(ms(100.0));
        s.on_ack(&mut w, &ack(100.0));
        assert_eq!(w.cwnd, 10.0);
        // The sample of 100 ms moved the EWMA to 100 ms before the reset.
        let (lo, hi) = s.delay_range();
        assert!((lo - ms(100.0)).abs() < 1e-12 && (hi - ms(200.0)).abs() < 1e-12);
        // 100 ms is now the floor of the range, so the path reads as calm.
        s.on_inference_end(&mut w);
        assert_eq!((w.cwnd, s.phase()), (10.0, LpPhase::Normal));
    }

    #[test]
    fn quiet_inference_resumes_increase() {
        let mut s = LpState::new(LpParams::default());
        let mut w = Window { cwnd: 20.0, ssthresh: 10.0 };
        s.update_delay(ms(25.0));
        s.update_delay(ms(125.0));
        s.d_ewma = Some(ms(100.0));
        s.on_ack(&mut w, &ack(100.0));
        assert_eq!(s.phase(), LpPhase::Inference);
        s.d_ewma = Some(ms(26.0));
        s.on_inference_end(&mut w);
        assert_eq!((w.cwnd, s.phase()), (10.0, LpPhase::Normal));
        s.on_ack(&mut w, &ack(25.0));
        assert!(w.cwnd > 10.0);
    }

    #[test]
    fn loss_during_inference_exits() {
        let mut s = LpState::new(LpParams::default());
        s.phase = LpPhase::Inference;
        assert_eq!(s.on_loss(), TimerRequest::CancelInference);
        assert_eq!(s.phase(), LpPhase::Normal);
        assert_eq!(s.on_loss(), TimerRequest::None);
    }
}
