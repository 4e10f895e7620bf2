use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoordsError {
    #[error("normalized gain must be positive, got {0}")]
    Gain(f64),
    #[error("target fraction must be positive, got {0}")]
    Target(f64),
    #[error("capacity, packet size and buffer must be positive")]
    Scenario,
}

/// LEDBAT parameters expressed relative to the scenario.
///
/// `gain` is `G = gamma * tau` (dimensionless); `target_fraction` is
/// `T = tau * C / (8 * S * B_max)`, the target as a share of the time
/// needed to drain a full buffer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainTargetCoords {
    pub gain: f64,
    pub target_fraction: f64,
}

/// Seconds needed to drain `buffer_pkts` packets of `pkt_size` bytes.
pub fn buffer_drain_secs(capacity_bps: u64, pkt_size: u32, buffer_pkts: usize) -> f64 {
    pkt_size as f64 * 8.0 * buffer_pkts as f64 / capacity_bps as f64
}

impl GainTargetCoords {
    /// Converts to `(gamma [1/s], tau)`.
    pub fn to_params(
        self,
        capacity_bps: u64,
        pkt_size: u32,
        buffer_pkts: usize,
    ) -> Result<(f64, Duration), CoordsError> {
        if self.gain.is_nan() || self.gain <= 0.0 {
            return Err(CoordsError::Gain(self.gain));
        }
        if self.target_fraction.is_nan() || self.target_fraction <= 0.0 {
            return Err(CoordsError::Target(self.target_fraction));
        }
        if capacity_bps == 0 || pkt_size == 0 || buffer_pkts == 0 {
            return Err(CoordsError::Scenario);
        }
        let tau = self.target_fraction * buffer_drain_secs(capacity_bps, pkt_size, buffer_pkts);
        Ok((self.gain / tau, Duration::from_secs_f64(tau)))
    }

    pub fn from_params(gamma: f64, tau: Duration, capacity_bps: u64, pkt_size: u32, buffer_pkts: usize) -> Self {
        let tau_s = tau.as_secs_f64();
        GainTargetCoords {
            gain: gamma * tau_s,
            target_fraction: tau_s / buffer_drain_secs(capacity_bps, pkt_size, buffer_pkts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: u64 = 10_000_000;

    fn tau_ms(t: f64) -> f64 {
        let (_, tau) = GainTargetCoords { gain: 1.0, target_fraction: t }
            .to_params(C, 1500, 100)
            .unwrap();
        tau.as_secs_f64() * 1e3
    }

    #[test]
    fn target_range_endpoints() {
        assert!((tau_ms(0.02) - 2.4).abs() < 1e-6);
        assert!((tau_ms(1.50) - 180.0).abs() < 1e-6);
        assert!((tau_ms(1.00) - 120.0).abs() < 1e-6);
        assert!((tau_ms(0.20) - 24.0).abs() < 1e-6);
    }

    #[test]
    fn unit_gain_at_25ms() {
        let c = GainTargetCoords::from_params(40.0, Duration::from_millis(25), C, 1500, 100);
        assert!((c.gain - 1.0).abs() < 1e-12);
        let (gamma, tau) = c.to_params(C, 1500, 100).unwrap();
        assert!((gamma - 40.0).abs() < 1e-9);
        assert!((tau.as_secs_f64() - 0.025).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_positive() {
        let bad = GainTargetCoords { gain: 0.0, target_fraction: 0.2 };
        assert_eq!(bad.to_params(C, 1500, 100), Err(CoordsError::Gain(0.0)));
        let bad = GainTargetCoords { gain: 1.0, target_fraction: -0.1 };
        assert_eq!(bad.to_params(C, 1500, 100), Err(CoordsError::Target(-0.1)));
    }
}
