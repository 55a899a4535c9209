use std::collections::HashMap;
use std::sync::Arc;

use hcca_core::mac::PhyMacParams;
use hcca_core::metrics::{aggregate_txop, mean_e2e_delay};
use hcca_core::scheduler::{admit, compute_n, compute_si, compute_txop_dyn, compute_txop_ref, Admission};
use hcca_core::trace::{emit_trace, generate_synthetic, parse_trace};
use hcca_core::tspec::derive_tspec;
use hcca_core::{run, EventKind, EventLog, SchedulerKind, SimConfig, StationConfig, Tspec};
use proptest::prelude::*;

fn tspec_strategy() -> impl Strategy<Value = Tspec> {
    (1u32..20_000, 0u32..20_000, 1u64..5_000_000, 1u64..100_000).prop_map(|(l, extra, rho, msi)| Tspec {
        nominal_msdu: l,
        max_msdu: l + extra,
        mean_rate: rho,
        delay_bound: msi * 2,
        phy_rate: 11_000_000,
        max_service_interval: msi,
    })
}

fn sim(n: usize, kind: SchedulerKind, seed: u64, loss: f64) -> SimConfig {
    let stations = (0..n)
        .map(|i| {
            let trace = generate_synthetic(1500.0, 0.7, 200, 40_000, seed ^ (i as u64 + 1)).unwrap();
            StationConfig {
                tspec: derive_tspec(&trace, 40_000, 80_000, 11_000_000).unwrap(),
                trace: Arc::new(trace),
            }
        })
        .collect();
    SimConfig {
        beacon_interval: 160_000,
        t_cp: 0,
        mac: PhyMacParams::default(),
        scheduler: kind,
        stations,
        sim_duration: 4_000_000,
        warmup: 0,
        loss_probability: loss,
        qs_quantized: false,
        admission_control: true,
        seed,
    }
}

fn kind_strategy() -> impl Strategy<Value = SchedulerKind> {
    prop_oneof![Just(SchedulerKind::ReferenceHcca), Just(SchedulerKind::DynamicTxop)]
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn si_is_largest_submultiple(beacon in 1u64..400_000, msis in prop::collection::vec(500u64..500_000, 1..6)) {
        let min = *msis.iter().min().unwrap();
        let x = (1..=beacon).find(|&x| beacon <= min * x).unwrap();
        let si = compute_si(beacon, &msis);
        prop_assert_eq!(si, beacon / x);
        prop_assert!(si <= min);
        prop_assert!(beacon - si * x < x);
    }

    #[test]
    fn n_grows_with_rate(t in tspec_strategy(), si in 1u64..200_000, bump in 1u64..1_000_000) {
        let faster = Tspec { mean_rate: t.mean_rate + bump, ..t };
        prop_assert!(compute_n(si, &t) >= 1);
        prop_assert!(compute_n(si, &faster) >= compute_n(si, &t));
        prop_assert!(compute_n(si + 1_000, &t) >= compute_n(si, &t));
    }

    #[test]
    fn dynamic_grant_never_exceeds_reference(t in tspec_strategy(), si in 1u64..200_000, frac in 0.0f64..=1.0) {
        let mac = PhyMacParams::default();
        let size = ((f64::from(t.max_msdu) * frac) as u32).max(1);
        prop_assert!(compute_txop_dyn(size, t.phy_rate, &mac) <= compute_txop_ref(&t, si, &mac));
    }

    #[test]
    fn admission_is_monotone_in_load(
        existing in prop::collection::vec(1u64..20_000, 0..8),
        candidate in 1u64..40_000,
        extra in 1u64..10_000,
        t_cp in 0u64..100_000,
    ) {
        let pairs: Vec<_> = existing.iter().map(|&t| (t, 40_000)).collect();
        let before = admit(&pairs, candidate, 40_000, 160_000, t_cp);
        let heavier = admit(&pairs, candidate + extra, 40_000, 160_000, t_cp);
        if before == Admission::Reject {
            prop_assert_eq!(heavier, Admission::Reject);
        }
        let mut more = pairs.clone();
        more.push((extra, 40_000));
        if before == Admission::Reject {
            prop_assert_eq!(admit(&more, candidate, 40_000, 160_000, t_cp), Admission::Reject);
        }
    }

    #[test]
    fn trace_text_round_trips(mean in 1.0f64..20_000.0, cov in 0.0f64..2.0, n in 1usize..200, seed: u64) {
        let trace = generate_synthetic(mean, cov, n, 40_000, seed).unwrap();
        let text = emit_trace(&trace).unwrap();
        let back = parse_trace(&text, 40_000).unwrap();
        prop_assert_eq!(back.frames(), trace.frames());
        prop_assert_eq!(emit_trace(&back).unwrap(), text);
    }

    #[test]
    fn engine_log_invariants(n in 1usize..5, kind in kind_strategy(), seed: u64, loss in 0.0f64..0.5) {
        let cfg = sim(n, kind, seed, loss);
        let result = run(&cfg).unwrap();
        let log = &result.log;
        prop_assert!(log.records().windows(2).all(|w| w[0].time <= w[1].time));

        let mut grant = HashMap::new();
        let mut last_gen = HashMap::new();
        let mut txop_end = 0;
        for r in log.iter() {
            match r.kind {
                EventKind::Poll => {
                    let poll_start = r.time;
                    prop_assert!(poll_start >= txop_end, "TXOPs overlap at {}", poll_start);
                    grant.insert(r.station_id, r.granted_txop);
                }
                EventKind::DataRx => {
                    prop_assert!(r.used_time <= grant[&r.station_id]);
                    let prev = last_gen.insert(r.station_id, r.frame_gen_time).unwrap_or(0);
                    prop_assert!(r.frame_gen_time >= prev);
                }
                EventKind::TxopEnd => {
                    prop_assert!(r.used_time <= grant[&r.station_id]);
                    txop_end = r.time;
                }
                _ => {}
            }
        }
        // Grants bound use.
        let used: u64 = log.of_kind(EventKind::TxopEnd).map(|r| r.used_time).sum();
        prop_assert!(aggregate_txop(log) * 1e6 + 0.5 >= used as f64);

        let mut ids = result.admitted.clone();
        ids.extend(&result.rejected);
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..n as u32).collect::<Vec<_>>());

        for s in &result.stations {
            prop_assert_eq!(s.generated, s.delivered + s.queued_at_end);
        }
        prop_assert_eq!(run(&cfg).unwrap().log, result.log);
    }

    #[test]
    fn channel_time_fits_in_si(n in 1usize..6, kind in kind_strategy(), seed: u64) {
        let cfg = sim(n, kind, seed, 0.0);
        let result = run(&cfg).unwrap();
        let pifs = cfg.mac.pifs;
        let mut per_round: HashMap<u64, u64> = HashMap::new();
        for r in result.log.of_kind(EventKind::Poll) {
            *per_round.entry(r.si_index).or_default() += r.granted_txop + pifs;
        }
        for (idx, total) in per_round {
            prop_assert!(total <= result.si, "round {} uses {} of {}", idx, total, result.si);
        }
    }

    #[test]
    fn dynamic_dominates_per_poll(n in 1usize..5, seed: u64) {
        let hcca = run(&sim(n, SchedulerKind::ReferenceHcca, seed, 0.0)).unwrap();
        let dynamic = run(&sim(n, SchedulerKind::DynamicTxop, seed, 0.0)).unwrap();
        let fixed: HashMap<_, _> = hcca.admitted_txops.iter().copied().collect();
        for r in dynamic.log.of_kind(EventKind::Poll) {
            prop_assert!(r.granted_txop <= fixed[&r.station_id.unwrap()]);
        }
        // A dynamic grant covers exactly one frame.
        let mut in_txop = 0;
        for r in dynamic.log.iter() {
            match r.kind {
                EventKind::Poll => in_txop = 0,
                EventKind::DataRx => in_txop += 1,
                EventKind::TxopEnd => prop_assert!(in_txop <= 1),
                _ => {}
            }
        }
    }

    #[test]
    fn mean_delay_ignores_record_order(seed: u64) {
        let result = run(&sim(3, SchedulerKind::DynamicTxop, seed, 0.0)).unwrap();
        let mut records = result.log.records().to_vec();
        records.reverse();
        let a = mean_e2e_delay(&result.log).unwrap();
        let b = mean_e2e_delay(&EventLog::from_records(records)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}
