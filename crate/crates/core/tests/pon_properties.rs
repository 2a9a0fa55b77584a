use fivegsim::pon_dba::{
    ggiant_allocate, giant_allocate, hot_onu_experiment, run_sim, run_sim_traced, Algorithm, DbaPointers,
    HotOnuScenario, OnuState, OnuTraffic, PonConfig, Source, TrafficSpec,
};
use proptest::prelude::*;

const AB: f64 = 0.9 * 38_880.0 * 8.0 / 125e-6 / 8.0;

fn short() -> PonConfig {
    PonConfig { sim_duration_s: 0.5, ..PonConfig::default() }
}

fn poisson(load: f64, mean_batch: f64) -> Source {
    Source::Poisson { rate_bps: load * AB, packet_bytes: 1250, mean_batch }
}

fn traffic(sources: &[(u32, Source)]) -> TrafficSpec {
    TrafficSpec {
        onus: sources.iter().map(|&(group_id, source)| OnuTraffic { group_id, assured_rate_bps: AB, source }).collect(),
    }
}

fn onu_strategy() -> impl Strategy<Value = (u32, bool, f64, Vec<u64>)> {
    (0u32..3, prop::bool::weighted(0.15), 0.0f64..4e8, prop::collection::vec(1u64..20_000, 0..6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn frames_conserve_capacity_and_work(
        onus in prop::collection::vec(onu_strategy(), 1..9),
        grouped in any::<bool>(),
        start in 0usize..8,
        overhead in 0u64..64,
    ) {
        let config = PonConfig { per_grant_overhead_bytes: overhead, ..PonConfig::default() };
        let capacity = config.frame_capacity_bytes();
        let mut states: Vec<OnuState> = onus
            .iter()
            .enumerate()
            .map(|(i, (g, sat, rate, packets))| {
                if *sat {
                    OnuState::saturated(i, *g, *rate)
                } else {
                    let mut o = OnuState::new(i, *g, *rate);
                    for &p in packets {
                        o.enqueue(p, 0.0);
                    }
                    o
                }
            })
            .collect();
        let mut pointers = DbaPointers { assured: start, best_effort: start, ..Default::default() };
        for frame in 0..12u64 {
            let before: Vec<u64> = states.iter().map(|o| o.backlog()).collect();
            let grants = if grouped {
                ggiant_allocate(&mut states, &mut pointers, &config, frame)
            } else {
                giant_allocate(&mut states, &mut pointers, &config, frame)
            };
            let used: u64 = grants.iter().map(|g| g.bytes + overhead).sum();
            prop_assert!(used <= capacity);
            let total: u64 = before.iter().sum();
            if total >= capacity {
                prop_assert!(capacity - used <= overhead, "left {} of {}", capacity - used, capacity);
            }
            for g in &grants {
                prop_assert!(g.bytes > 0 && g.bytes <= before[g.onu_id]);
            }
            prop_assert!(grants.windows(2).all(|w| w[0].onu_id < w[1].onu_id));
        }
    }

    #[test]
    fn singleton_groups_reproduce_giant(seed in 0u64..500, loads in prop::collection::vec(0.0f64..1.6, 3..6)) {
        let sources: Vec<(u32, Source)> = loads
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as u32 + 1, poisson(l, 2.0)))
            .chain([(99, Source::Saturated)])
            .collect();
        let config = PonConfig { sim_duration_s: 0.05, ..PonConfig::default() };
        let a = run_sim(&traffic(&sources), Algorithm::Giant, &config, seed).unwrap();
        let b = run_sim(&traffic(&sources), Algorithm::GroupGiant, &config, seed).unwrap();
        prop_assert_eq!(a.grant_digest, b.grant_digest);
        prop_assert_eq!(format!("{:?}", a.per_onu), format!("{:?}", b.per_onu));
    }

    #[test]
    fn departures_follow_arrivals(seed in 0u64..500, grouped in any::<bool>()) {
        let sources = [(1, poisson(1.4, 3.0)), (1, poisson(0.2, 1.0)), (0, poisson(0.8, 5.0)), (0, Source::Saturated)];
        let algorithm = if grouped { Algorithm::GroupGiant } else { Algorithm::Giant };
        let config = PonConfig { sim_duration_s: 0.1, ..PonConfig::default() };
        let (_, trace) = run_sim_traced(&traffic(&sources), algorithm, &config, seed).unwrap();
        for t in &trace {
            prop_assert!(t.windows(2).all(|w| w[0] <= w[1]));
        }
        prop_assert!(trace[0].len() > 100);
    }
}

#[test]
fn assured_traffic_is_served_in_full() {
    let sources = [
        (0, poisson(0.9, 1.0)),
        (0, poisson(0.6, 4.0)),
        (2, poisson(0.3, 1.0)),
        (2, poisson(0.9, 8.0)),
        (0, Source::Saturated),
        (0, Source::Saturated),
        (0, Source::Saturated),
        (0, Source::Saturated),
    ];
    for algorithm in [Algorithm::Giant, Algorithm::GroupGiant] {
        let out = run_sim(&traffic(&sources), algorithm, &short(), 1).unwrap();
        for s in &out.per_onu[..4] {
            assert!(s.stable, "{s:?}");
            assert_eq!(s.served_bytes, s.offered_bytes, "{s:?}");
            assert!(s.mean_delay_s <= s.p95_delay_s && s.mean_delay_s.is_finite());
        }
    }
}

/// Hot-member delay ratio `d(N = 1) / d(N = 4)` for a group of four.
fn group_gain(loads: [f64; 4], mean_batch: f64) -> f64 {
    let delay = |grouped: bool| {
        let mut sources: Vec<(u32, Source)> =
            loads.iter().enumerate().map(|(i, &l)| (if grouped { 1 } else { i as u32 + 10 }, poisson(l, mean_batch))).collect();
        sources.extend([(0, Source::Saturated); 4]);
        run_sim(&traffic(&sources), Algorithm::GroupGiant, &short(), 5).unwrap().per_onu[0].mean_delay_s
    };
    delay(false) / delay(true)
}

#[test]
fn heterogeneous_groups_gain_more() {
    // equal group load of 1.8 assured rates, split unevenly or evenly
    let hetero = group_gain([1.5, 0.1, 0.1, 0.1], 1.0);
    let homo = group_gain([0.45; 4], 1.0);
    assert!(hetero > homo, "heterogeneous {hetero} vs homogeneous {homo}");
    assert!(hetero > 1.0);
    let bursty = group_gain([1.5, 0.1, 0.1, 0.1], 4.0);
    assert!(bursty > hetero, "bursty {bursty} vs smooth {hetero}");
}

#[test]
fn experiment_covers_every_point() {
    let s = HotOnuScenario { pon: short(), ..HotOnuScenario::default() };
    let rows = hot_onu_experiment(&s, 0).unwrap();
    assert_eq!(rows.len(), s.group_sizes.len() * s.hot_load_points.len());
    let below: Vec<f64> = rows.iter().filter(|r| r.hot_load_fraction < 1.0).map(|r| r.mean_delay_ms).collect();
    let (lo, hi) = below.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi < 1.0 && hi / lo < 1.5, "{below:?}");
}

