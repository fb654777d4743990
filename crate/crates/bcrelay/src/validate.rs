//! Randomized invariant suites run by `bcrelay validate`.

use bcrelay_core::error::Stage;
use bcrelay_core::linmap::{build_mapping_matrix, numeric_logdet_rate};
use bcrelay_core::model::check_constraints;
use bcrelay_core::throughput::{
    equal_time_reference, rate_relay_combined, BoundRelation,
};
use bcrelay_core::{allocate, AllocError, channel_gains, rate_sum, Allocation, NetworkConfig, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_instance(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (NetworkConfig, Allocation) {
    let cfg = NetworkConfig {
        coord_r: [rng.gen_range(5.0..95.0), rng.gen_range(5.0..40.0)],
        alpha1: rng.gen_range(2.5..4.0),
        l: (m + n).max(2),
        ..NetworkConfig::baseline()
    };
    let alloc = Allocation::with_uniform_eigenvalues(
        m,
        n,
        rng.gen_range(1.0..cfg.pmax),
        rng.gen_range(0.0..cfg.pmax),
        rng.gen_range(0.01..0.99),
    );
    (cfg, alloc)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Explicit log-det rate against the closed form.
pub fn logdet_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let (m, n) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let (cfg, a) = random_instance(&mut rng, m, n);
        let chan = channel_gains(&cfg).expect("random geometry is distinct");
        let g = build_mapping_matrix(m, n);
        let closed = rate_relay_combined(&a, &chan, &cfg);
        match numeric_logdet_rate(&g, a.beta, a.p0, a.p1, &chan, &cfg) {
            Ok(v) if rel_diff(v, closed) <= 1e-9 => {}
            Ok(v) => failures.push(format!("M={m} N={n}: {v} vs {closed}")),
            Err(e) => failures.push(format!("M={m} N={n}: {e}")),
        }
    }
    SuiteResult {
        name: "logdet-chain",
        cases,
        failures,
    }
}

/// Upper bound dominance, case classification and the equal-split identity.
pub fn bound_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..cases {
        let m = rng.gen_range(1..=20);
        let n = rng.gen_range(0..=20);
        let (cfg, a) = random_instance(&mut rng, m, n);
        let chan = channel_gains(&cfg).expect("random geometry is distinct");
        let r = rate_sum(&a, &chan, &cfg);
        if r.r_sum_upper < r.r_sum {
            failures.push(format!("M={m} N={n}: upper {} < sum {}", r.r_sum_upper, r.r_sum));
        }
        let ok = match r.case_label.relation() {
            BoundRelation::Equal => r.r_sum_upper == r.r_sum,
            BoundRelation::GreaterOrEqual => r.r_sum_upper >= r.r_sum,
        };
        if !ok {
            failures.push(format!(
                "M={m} N={n}: {:?} but upper {} vs sum {}",
                r.case_label, r.r_sum_upper, r.r_sum
            ));
        }
        if m == n {
            let e = equal_time_reference(&chan, &cfg, a.beta, a.p0, a.p1);
            if rel_diff(e, r.r_sum) > 1e-12 {
                failures.push(format!("M=N={m}: {} vs equal-time {e}", r.r_sum));
            }
        }
    }
    SuiteResult {
        name: "upper-bound",
        cases,
        failures,
    }
}

/// Allocator output is feasible on random geometries.
pub fn allocator_suite(seed: u64, cases: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = SolverOptions::default();
    let mut failures = Vec::new();
    for _ in 0..cases {
        let cfg = NetworkConfig {
            coord_r: [rng.gen_range(10.0..90.0), rng.gen_range(5.0..30.0)],
            alpha1: rng.gen_range(2.5..4.0),
            pmax: if rng.gen_bool(0.5) { 20.0 } else { 30.0 },
            ..NetworkConfig::baseline()
        };
        let chan = channel_gains(&cfg).expect("random geometry is distinct");
        match allocate(&chan, &cfg, &opts) {
            Ok(r) => {
                let v = check_constraints(&r.allocation, &chan, &cfg);
                if !v.is_empty() {
                    failures.push(format!("R={:?} alpha1={}: {v:?}", cfg.coord_r, cfg.alpha1));
                }
            }
            // A relay too far away cannot harvest its circuit power at any
            // transmit power; refusing that instance is the correct answer.
            Err(AllocError::Infeasible(Stage::ReflectionCoefficient))
                if cfg.pc > cfg.eta * cfg.pmax * chan.g_sr => {}
            Err(e) => failures.push(format!("R={:?} alpha1={}: {e}", cfg.coord_r, cfg.alpha1)),
        }
    }
    SuiteResult {
        name: "allocator-feasibility",
        cases,
        failures,
    }
}

pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    vec![
        logdet_suite(seed, 200),
        bound_suite(seed.wrapping_add(1), 1000),
        allocator_suite(seed.wrapping_add(2), 20),
    ]
}
