use bcrelay_core::error::Stage;
use bcrelay_core::oracle::exhaustive_allocate;
use bcrelay_core::throughput::rate_sum_upper;
use bcrelay_core::{allocate, channel_gains, rate_sum, AllocError, Allocation, NetworkConfig, SolverOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_config(rng: &mut ChaCha8Rng) -> NetworkConfig {
    NetworkConfig {
        l: rng.gen_range(2..=40),
        alpha1: rng.gen_range(2.5..4.0),
        coord_r: [rng.gen_range(5.0..60.0), rng.gen_range(0.0..40.0)],
        pmax: rng.gen_range(20.0..35.0),
        ..NetworkConfig::baseline()
    }
}

#[test]
fn default_scenario_close_to_oracle() {
    let cfg = NetworkConfig::baseline();
    let ch = channel_gains(&cfg).unwrap();
    let opts = SolverOptions::default();
    let r = allocate(&ch, &cfg, &opts).unwrap();
    let o = exhaustive_allocate(&ch, &cfg, &opts).unwrap();
    assert!(r.violations.is_empty());
    assert!(r.throughput <= o.report.throughput * (1.0 + 1e-6));
    assert!(r.throughput >= 0.95 * o.report.throughput);
    assert_eq!(r.allocation.m + r.allocation.n, cfg.l);
}

#[test]
fn oracle_picks_best_split() {
    let cfg = NetworkConfig::baseline();
    let ch = channel_gains(&cfg).unwrap();
    let o = exhaustive_allocate(&ch, &cfg, &SolverOptions::default()).unwrap();
    assert_eq!(o.per_split.len(), cfg.l + 1);
    let best = o.per_split.iter().filter_map(|s| s.throughput).fold(f64::MIN, f64::max);
    assert_eq!(best, o.report.throughput);
    let m = o.report.allocation.m;
    assert_eq!(o.per_split[m].throughput, Some(best));
}

#[test]
fn random_scenarios_feasible_and_dominated() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = SolverOptions::default();
    for _ in 0..30 {
        let cfg = random_config(&mut rng);
        let ch = channel_gains(&cfg).unwrap();
        let starved = cfg.pc > cfg.eta * cfg.pmax * ch.g_sr;
        match allocate(&ch, &cfg, &opts) {
            Err(e) => {
                assert!(starved, "{cfg:?}: {e}");
                assert_eq!(e, AllocError::Infeasible(Stage::ReflectionCoefficient));
            }
            Ok(r) => {
                assert!(!starved);
                assert!(r.violations.is_empty(), "{cfg:?}: {:?}", r.violations);
                let o = exhaustive_allocate(&ch, &cfg, &opts).unwrap();
                assert!(r.throughput <= o.report.throughput * (1.0 + 1e-6), "{cfg:?}");
                assert_eq!(r.throughput, rate_sum(&r.allocation, &ch, &cfg).r_sum);
            }
        }
    }
}

#[test]
fn more_power_never_hurts_the_oracle() {
    let opts = SolverOptions::default();
    let mut last = 0.0;
    for pmax in [20.0, 25.0, 30.0, 40.0] {
        let cfg = NetworkConfig {
            pmax,
            ..NetworkConfig::baseline()
        };
        let ch = channel_gains(&cfg).unwrap();
        let t = exhaustive_allocate(&ch, &cfg, &opts).unwrap().report.throughput;
        assert!(t >= last * (1.0 - 1e-9));
        last = t;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upper_bound_dominates(m in 0usize..=30, extra in 0usize..=30, beta in 0.0f64..1.0,
                             p0 in 0.0f64..30.0, p1 in 0.0f64..30.0, alpha1 in 2.5f64..4.0) {
        let cfg = NetworkConfig { l: m + extra, alpha1, ..NetworkConfig::baseline() };
        prop_assume!(cfg.l > 0);
        let ch = channel_gains(&cfg).unwrap();
        let a = Allocation::with_uniform_eigenvalues(m, extra, p0, p1, beta);
        let r = rate_sum(&a, &ch, &cfg);
        prop_assert!(rate_sum_upper(&a, &ch, &cfg) >= r.r_sum);
        prop_assert!(r.r_sum >= r.r_sd);
    }

    #[test]
    fn relay_power_is_monotone(m in 1usize..=20, n in 1usize..=20, beta in 0.0f64..1.0,
                               p0 in 0.0f64..30.0, p1 in 0.0f64..30.0, dp in 0.0f64..5.0) {
        let cfg = NetworkConfig { l: m + n, ..NetworkConfig::baseline() };
        let ch = channel_gains(&cfg).unwrap();
        let lo = rate_sum(&Allocation::with_uniform_eigenvalues(m, n, p0, p1, beta), &ch, &cfg);
        let hi = rate_sum(&Allocation::with_uniform_eigenvalues(m, n, p0, p1 + dp, beta), &ch, &cfg);
        prop_assert!(hi.r_sum >= lo.r_sum);
        prop_assert_eq!(hi.r_sr, lo.r_sr);
    }

    #[test]
    fn allocation_is_feasible(alpha1 in 2.5f64..4.0, pmax in 20.0f64..35.0, l in 2usize..=30) {
        let cfg = NetworkConfig { alpha1, pmax, l, ..NetworkConfig::baseline() };
        let ch = channel_gains(&cfg).unwrap();
        let r = allocate(&ch, &cfg, &SolverOptions::default()).unwrap();
        prop_assert!(r.violations.is_empty());
        prop_assert!(r.allocation.beta >= 0.0 && r.allocation.beta <= 1.0);
        prop_assert!(r.throughput.is_finite() && r.throughput >= 0.0);
    }
}
