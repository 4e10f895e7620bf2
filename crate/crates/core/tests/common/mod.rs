//! Shared test support: a seeded generator of small valid scenarios and
//! arithmetic oracles coded independently of the controllers.

#![allow(dead_code)]

use std::fmt::Write as _;

use lbesim::controllers::Protocol;
use lbesim::harness::ScenarioConfig;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A config document with at most four flows and a short horizon, drawn
/// from the valid range of every key it sets.
pub fn random_config_text(rng: &mut ChaCha8Rng) -> String {
    let mut doc = String::new();
    let _ = writeln!(doc, "name = random");
    let _ = writeln!(doc, "capacity_bps = {}", rng.gen_range(1..=20) * 1_000_000);
    let _ = writeln!(doc, "fwd_prop_delay_ms = {}", rng.gen_range(1..=50));
    let _ = writeln!(doc, "buffer_pkts = {}", rng.gen_range(5..=150));
    let _ = writeln!(doc, "horizon_s = {}", rng.gen_range(2..=8));
    let groups = rng.gen_range(1..=3);
    let mut left = 4;
    for i in 0..groups {
        let count = rng.gen_range(1..=left - (groups - 1 - i));
        left -= count;
        let p = Protocol::ALL[rng.gen_range(0..4)];
        let _ = writeln!(doc, "flows.{i}.protocol = {p}");
        let _ = writeln!(doc, "flows.{i}.count = {count}");
        if rng.gen_bool(0.3) {
            let _ = writeln!(doc, "flows.{i}.start_s = {:.3}", rng.gen_range(0.0..1.0));
        }
        if rng.gen_bool(0.3) {
            let _ = writeln!(doc, "flows.{i}.rtt_scale = {:.2}", rng.gen_range(1.0..4.0));
        }
        match p {
            Protocol::Reno => {}
            Protocol::Lp => {
                let _ = writeln!(doc, "flows.{i}.lp.alpha = {:.3}", rng.gen_range(0.05..=1.0));
                let _ = writeln!(doc, "flows.{i}.lp.delta = {:.3}", rng.gen_range(0.0..=1.0));
                let _ = writeln!(doc, "flows.{i}.lp.inference_rtts = {:.2}", rng.gen_range(0.5..5.0));
                let _ = writeln!(doc, "flows.{i}.lp.rebase = {}", rng.gen_bool(0.5));
            }
            Protocol::Nice => {
                let _ = writeln!(doc, "flows.{i}.nice.delta = {:.3}", rng.gen_range(0.0..=1.0));
                let _ = writeln!(doc, "flows.{i}.nice.phi = {:.3}", rng.gen_range(0.0..=1.0));
                let _ = writeln!(doc, "flows.{i}.nice.floor = {:.4}", rng.gen_range(0.01..=1.0));
                let _ = writeln!(doc, "flows.{i}.nice.slow_start = {}", rng.gen_bool(0.5));
            }
            Protocol::Ledbat => {
                let _ = writeln!(doc, "flows.{i}.ledbat.tau_ms = {:.2}", rng.gen_range(1.0..200.0));
                let _ = writeln!(doc, "flows.{i}.ledbat.G = {:.2}", rng.gen_range(0.1..10.0));
                let _ = writeln!(doc, "flows.{i}.ledbat.slow_start = {}", rng.gen_bool(0.5));
            }
        }
    }
    doc
}

pub fn random_config(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let doc = random_config_text(rng);
    ScenarioConfig::parse(&doc).unwrap_or_else(|e| panic!("generated config rejected: {e}\n{doc}"))
}

/// Positive delays in seconds, spread over a few orders of magnitude.
pub fn random_delays(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(1e-3..0.5)).collect()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Jain's index from its closed form.
pub fn jain(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let s: f64 = x.iter().sum();
    let q: f64 = x.iter().map(|v| v * v).sum();
    s * s / (n * q)
}

/// Smoothed delay after all `samples`, as the explicit weighted sum
/// `(1-a)^(n-1) d0 + sum a (1-a)^(n-1-k) dk`, plus the extremes.
pub fn lp_smoothed(samples: &[f64], alpha: f64) -> (f64, f64, f64) {
    let n = samples.len();
    let mut ewma = (1.0 - alpha).powi(n as i32 - 1) * samples[0];
    for (k, d) in samples.iter().enumerate().skip(1) {
        ewma += alpha * (1.0 - alpha).powi((n - 1 - k) as i32) * d;
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (ewma, lo, hi)
}

pub fn lp_congested(smoothed: f64, lo: f64, hi: f64, delta: f64) -> bool {
    smoothed > lo + delta * (hi - lo)
}

/// Per-sample marks against the range of every sample seen so far,
/// the current one included.
pub fn nice_marks(samples: &[f64], delta: f64) -> Vec<bool> {
    (0..samples.len())
        .map(|i| {
            let seen = &samples[..=i];
            let lo = seen.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = seen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            samples[i] > lo + delta * (hi - lo)
        })
        .collect()
}

pub fn nice_vote(marks: &[bool], phi: f64) -> bool {
    let marked = marks.iter().filter(|m| **m).count() as f64;
    !marks.is_empty() && marked > phi * marks.len() as f64
}

/// Distance to the target after each sample, against the running minimum.
pub fn ledbat_offsets(samples: &[f64], target: f64) -> Vec<f64> {
    (0..samples.len())
        .map(|i| {
            let base = samples[..=i].iter().copied().fold(f64::INFINITY, f64::min);
            target - (samples[i] - base)
        })
        .collect()
}

pub fn ledbat_step(cwnd: f64, gain: f64, offset: f64) -> f64 {
    f64::max(1.0, cwnd + gain * offset / cwnd)
}
