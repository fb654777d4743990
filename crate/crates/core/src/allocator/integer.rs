use super::{ContinuousSolution, IntegerRule, SolverOptions};
use crate::math::{abs, ceil, floor, rel_eq, round};
use crate::model::{Allocation, ChannelState, NetworkConfig};
use crate::throughput::rate_sum;

/// Integer split chosen from a continuous solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerChoice {
    pub m: usize,
    pub n: usize,
    pub rule: IntegerRule,
    /// `rho L` before rounding.
    pub m_star: f64,
}

/// Rounds `rho L` down when `P0 > P1`, up when `P0 < P1`, and compares both
/// candidates at the continuous powers when the powers are equal (ties keep
/// the floor).
pub fn integer_convert(
    cont: &ContinuousSolution,
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> IntegerChoice {
    let l = cfg.l;
    let mut m_star = if cont.on_upper_guard {
        l as f64
    } else {
        cont.rho * l as f64
    };
    if abs(m_star - round(m_star)) <= 1e-9 * l as f64 {
        m_star = round(m_star);
    }
    let clamp = |x: f64| (x.max(0.0) as usize).min(l);
    let lo = clamp(floor(m_star));
    let hi = clamp(ceil(m_star));
    let (m, rule) = if rel_eq(cont.p0, cont.p1, opts.equal_power_tol) {
        let eval = |m: usize| {
            let a = Allocation::with_uniform_eigenvalues(m, l - m, cont.p0, cont.p1, cont.beta);
            rate_sum(&a, chan, cfg).r_sum
        };
        if eval(lo) >= eval(hi) {
            (lo, IntegerRule::Condition1)
        } else {
            (hi, IntegerRule::Condition2)
        }
    } else if cont.p0 > cont.p1 {
        (lo, IntegerRule::Floor)
    } else {
        (hi, IntegerRule::Ceil)
    };
    IntegerChoice {
        m,
        n: l - m,
        rule,
        m_star,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::ContinuousCase;
    use crate::model::channel_gains;
    use alloc::vec::Vec;

    fn cont(rho: f64, p0: f64, p1: f64) -> ContinuousSolution {
        ContinuousSolution {
            p0,
            p1,
            rho,
            beta: 0.99,
            t: 0.0,
            objective: 0.0,
            case: ContinuousCase::Case1HighRho,
            on_upper_guard: false,
            sca_trace: Vec::new(),
            newton_steps: 0,
        }
    }

    fn setup() -> (ChannelState, NetworkConfig) {
        let cfg = NetworkConfig::baseline();
        (channel_gains(&cfg).unwrap(), cfg)
    }

    #[test]
    fn floor_branch() {
        let (ch, cfg) = setup();
        let c = integer_convert(&cont(7.4 / 20.0, 20.0, 10.0), &ch, &cfg, &SolverOptions::default());
        assert_eq!((c.m, c.n, c.rule), (7, 13, IntegerRule::Floor));
    }

    #[test]
    fn ceil_branch() {
        let (ch, cfg) = setup();
        let c = integer_convert(&cont(7.4 / 20.0, 10.0, 20.0), &ch, &cfg, &SolverOptions::default());
        assert_eq!((c.m, c.n, c.rule), (8, 12, IntegerRule::Ceil));
    }

    #[test]
    fn integral_share_kept_by_every_rule() {
        let (ch, cfg) = setup();
        for (p0, p1) in [(20.0, 10.0), (10.0, 20.0), (15.0, 15.0)] {
            let c = integer_convert(&cont(0.6, p0, p1), &ch, &cfg, &SolverOptions::default());
            assert_eq!(c.m, 12);
        }
    }

    #[test]
    fn equal_powers_keep_better_candidate() {
        let (ch, cfg) = setup();
        let c0 = cont(0.62, 18.0, 18.0);
        let c = integer_convert(&c0, &ch, &cfg, &SolverOptions::default());
        let eval = |m: usize| {
            let a = Allocation::with_uniform_eigenvalues(m, 20 - m, 18.0, 18.0, 0.99);
            rate_sum(&a, &ch, &cfg).r_sum
        };
        let other = if c.m == 12 { 13 } else { 12 };
        assert!(eval(c.m) >= eval(other));
        assert!(matches!(c.rule, IntegerRule::Condition1 | IntegerRule::Condition2));
    }

    #[test]
    fn upper_guard_snaps_to_all_backscatter() {
        let (ch, cfg) = setup();
        let mut c0 = cont(0.995, 20.0, 5.0);
        c0.on_upper_guard = true;
        let c = integer_convert(&c0, &ch, &cfg, &SolverOptions::default());
        assert_eq!((c.m, c.n), (20, 0));
    }
}
