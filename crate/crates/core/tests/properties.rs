mod common;

use std::time::Duration;

use lbesim::controllers::{LedbatParams, LedbatState, LpParams, LpState, NiceParams, NiceState};
use lbesim::harness::{run_scenario, write_report_csv, ScenarioConfig, SweepRow};
use lbesim::metrics::jain_index;
use proptest::prelude::*;

fn csv_of(cfg: &ScenarioConfig) -> Vec<u8> {
    let run = run_scenario(cfg, false).expect("scenario runs");
    let row = SweepRow {
        scenario_id: cfg.name.clone(),
        axis: String::new(),
        value: String::new(),
        x: 0.0,
        rep: 0,
        report: run.report,
    };
    let mut out = Vec::new();
    write_report_csv(&[row], &mut out).unwrap();
    out
}

fn delays() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..0.5f64, 1..60)
}

proptest! {
    #[test]
    fn jain_is_scale_invariant_and_bounded(x in prop::collection::vec(1e-3..1e9f64, 1..12), k in 1e-6..1e6f64) {
        let j = jain_index(&x).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * k).collect();
        prop_assert!((jain_index(&scaled).unwrap() - j).abs() < 1e-9);
        prop_assert!((j - common::jain(&x)).abs() < 1e-9);
        prop_assert!(j >= 1.0 / x.len() as f64 - 1e-12 && j <= 1.0);
    }

    #[test]
    fn jain_anchors(x in 1e-6..1e9f64, n in 1usize..16) {
        prop_assert!((jain_index(&[x, 0.0]).unwrap() - 0.5).abs() < 1e-12);
        prop_assert!((jain_index(&vec![x; n]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_delay_fold_matches_weighted_sum(samples in delays(), alpha in 0.01..=1.0f64, delta in 0.0..=1.0f64) {
        let mut lp = LpState::new(LpParams { alpha, delta, ..LpParams::default() });
        for &d in &samples {
            lp.update_delay(d);
        }
        let (ewma, lo, hi) = common::lp_smoothed(&samples, alpha);
        prop_assert!(common::close(lp.smoothed_delay().unwrap(), ewma));
        prop_assert_eq!(lp.delay_range(), (lo, hi));
        let threshold = lo + delta * (hi - lo);
        if (ewma - threshold).abs() > 1e-12 {
            prop_assert_eq!(lp.early_congestion(), common::lp_congested(ewma, lo, hi, delta));
        }
    }

    #[test]
    fn nice_marks_and_vote_match_oracle(samples in delays(), delta in 0.0..=1.0f64, phi in 0.0..=1.0f64) {
        let mut nice = NiceState::new(NiceParams { delta, phi, ..NiceParams::default() });
        let marks: Vec<bool> = samples.iter().map(|&d| nice.observe(d)).collect();
        prop_assert_eq!(&marks, &common::nice_marks(&samples, delta));
        prop_assert_eq!(nice.congested_epoch(), common::nice_vote(&marks, phi));
    }

    #[test]
    fn ledbat_offset_and_step_match_oracle(
        samples in delays(),
        tau_ms in 1.0..500.0f64,
        g in 0.1..10.0f64,
        cwnd in 1.0..200.0f64,
    ) {
        let durations: Vec<Duration> = samples.iter().map(|&d| Duration::from_secs_f64(d)).collect();
        let exact: Vec<f64> = durations.iter().map(Duration::as_secs_f64).collect();
        let params = LedbatParams::with_normalized_gain(Duration::from_secs_f64(tau_ms / 1e3), g);
        let target = params.target.as_secs_f64();
        let mut ledbat = LedbatState::new(params);
        let expected = common::ledbat_offsets(&exact, target);
        for (d, want) in durations.iter().zip(&expected) {
            let off = ledbat.offset(*d);
            prop_assert!((off - want).abs() < 1e-12);
            prop_assert!(common::close(ledbat.step(cwnd, off), common::ledbat_step(cwnd, params.gain, off)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_runs_conserve_packets_and_keep_metrics_in_range(seed in any::<u64>()) {
        let cfg = common::random_config(&mut common::rng(seed));
        let run = run_scenario(&cfg, false).expect("conservation holds at every tick and after drain");
        for c in &run.output.record.flows {
            prop_assert!(c.packets_arrived + c.packets_dropped <= c.packets_sent);
        }
        let r = &run.report;
        let n = cfg.total_flows() as f64;
        prop_assert!((0.0..=1.001).contains(&r.eta), "eta {}", r.eta);
        for f in [r.f_lt, r.f_st].into_iter().flatten() {
            prop_assert!(f >= 1.0 / n - 1e-12 && f <= 1.0, "fairness {f}");
        }
        prop_assert!((0.0..=1.0).contains(&r.b_norm));
        prop_assert!((0.0..=1.0).contains(&r.p_l));
    }

    #[test]
    fn runs_are_byte_reproducible(seed in any::<u64>()) {
        let cfg = common::random_config(&mut common::rng(seed));
        prop_assert_eq!(csv_of(&cfg), csv_of(&cfg));
    }
}

proptest! {
    #[test]
    fn config_text_round_trips(seed in any::<u64>()) {
        let cfg = common::random_config(&mut common::rng(seed));
        let again = ScenarioConfig::parse(&cfg.to_string()).unwrap();
        prop_assert_eq!(again, cfg);
    }
}
