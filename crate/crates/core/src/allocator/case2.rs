//! Continuous relaxation when the direct link is stronger (`g_sd > g_sr`).
//!
//! The relay stays silent, the whole budget goes to the backscatter phase
//! (`P0 = P / rho`), and the objective is the concave
//! `q(rho) = Ts W rho log2(B + c / rho)` with `c = P k_sd`.

use alloc::vec::Vec;

use super::forms::Forms;
use super::{ContinuousCase, ContinuousSolution, SolverOptions};
use crate::error::{AllocError, Stage};
use crate::kernel::bisect_decreasing;
use crate::math::{log2, LN_2};
use crate::model::{ChannelState, NetworkConfig};

fn c(forms: &Forms) -> f64 {
    forms.p * forms.k_sd
}

pub fn q_value(forms: &Forms, rho: f64) -> f64 {
    forms.tsw * rho * log2(forms.b + c(forms) / rho)
}

pub fn q_derivative(forms: &Forms, rho: f64) -> f64 {
    let c = c(forms);
    forms.tsw * log2(forms.b + c / rho) - forms.tsw * c / ((forms.b * rho + c) * LN_2)
}

pub fn q_second_derivative(forms: &Forms, rho: f64) -> f64 {
    let c = c(forms);
    let d = forms.b * rho + c;
    -forms.tsw * c * c / (rho * d * d * LN_2)
}

/// Feasible time-share interval `[P / Pmax, min(1, P eta g_sr / Pc)]`.
pub fn case2_interval(forms: &Forms) -> (f64, f64) {
    (forms.p / forms.pmax, (forms.p / forms.p0_min).min(1.0))
}

pub fn solve_case2(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<ContinuousSolution, AllocError> {
    let forms = Forms::new(chan, cfg);
    let (lo, hi) = case2_interval(&forms);
    let rho = if lo < hi {
        bisect_decreasing(|r| q_derivative(&forms, r), lo, hi, opts.bisect_tol)?
    } else if lo - hi <= 1e-12 * hi {
        hi
    } else {
        return Err(AllocError::Infeasible(Stage::DirectCase));
    };
    let p0 = (forms.p / rho).clamp(forms.p0_min, forms.pmax);
    let q = q_value(&forms, rho);
    Ok(ContinuousSolution {
        p0,
        p1: 0.0,
        rho,
        beta: forms.beta(p0).clamp(0.0, 1.0),
        t: q,
        objective: q,
        case: ContinuousCase::Case2,
        on_upper_guard: false,
        sca_trace: Vec::new(),
        newton_steps: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::channel_gains;

    /// Direct link shorter than the source-relay link.
    fn direct_setup(pmax: f64) -> (ChannelState, NetworkConfig) {
        let cfg = NetworkConfig {
            coord_d: [15.0, 0.0],
            alpha1: 2.7,
            pmax,
            ..NetworkConfig::baseline()
        };
        let ch = channel_gains(&cfg).unwrap();
        assert!(ch.g_sd > ch.g_sr);
        (ch, cfg)
    }

    #[test]
    fn q_is_concave() {
        let (ch, cfg) = direct_setup(30.0);
        let f = Forms::new(&ch, &cfg);
        let (lo, hi) = case2_interval(&f);
        for i in 0..100 {
            let r = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
            assert!(q_second_derivative(&f, r) < 0.0);
        }
    }

    #[test]
    fn matches_dense_grid() {
        let (ch, cfg) = direct_setup(30.0);
        let f = Forms::new(&ch, &cfg);
        let s = solve_case2(&ch, &cfg, &SolverOptions::default()).unwrap();
        let (lo, hi) = case2_interval(&f);
        let n = 100_000;
        let step = (hi - lo) / n as f64;
        let mut best = (lo, f64::NEG_INFINITY);
        for i in 0..=n {
            let r = lo + step * i as f64;
            let v = q_value(&f, r);
            if v > best.1 {
                best = (r, v);
            }
        }
        assert!((s.rho - best.0).abs() <= step + 1e-12);
        assert!(s.objective >= best.1 - 1e-9 * best.1);
    }

    #[test]
    fn negligible_circuit_power_with_increasing_q_picks_one() {
        let (ch, cfg) = direct_setup(30.0);
        let cfg = NetworkConfig { pc: 1e-12, ..cfg };
        let f = Forms::new(&ch, &cfg);
        assert_eq!(case2_interval(&f).1, 1.0);
        let s = solve_case2(&ch, &cfg, &SolverOptions::default()).unwrap();
        if q_derivative(&f, 1.0) >= 0.0 {
            assert_eq!(s.rho, 1.0);
        }
    }

    #[test]
    fn budget_at_peak_forces_full_share() {
        let (ch, cfg) = direct_setup(20.0);
        let s = solve_case2(&ch, &cfg, &SolverOptions::default()).unwrap();
        assert_eq!(s.rho, 1.0);
        assert_eq!(s.p0, 20.0);
    }
}
