//! Power re-optimization at a fixed integer split.

use alloc::vec;

use super::forms::Forms;
use super::{fit_budget, optimal_beta, SolverOptions};
use crate::error::{AllocError, Stage};
use crate::kernel::functions::{Affine, PerspLog, Sum};
use crate::kernel::{maximize_concave, ConcaveProgram, Smooth, Status};
use crate::model::{ChannelState, NetworkConfig};

/// Powers, reflection coefficient and objective at one split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSolution {
    pub p0: f64,
    pub p1: f64,
    pub beta: f64,
    /// Auxiliary variable of the split problem at the solver's optimum
    /// (closed form when no solve is needed), bits per block.
    pub t: f64,
    pub newton_steps: usize,
}

const P0: usize = 0;
const P1: usize = 1;
const T: usize = 2;

/// `weight * s * ln(c + X / s)` with constant `s = frac`.
fn scaled_log(forms: &Forms, frac: f64, k0: f64, k1: f64, c: f64) -> PerspLog {
    PerspLog {
        weight: forms.log2_weight(),
        s: Affine::constant(3, frac),
        x: Affine::new(vec![frac * k0, frac * k1, 0.0], 0.0),
        c,
    }
}

fn destination_rate(forms: &Forms, m: usize, n: usize) -> Sum {
    let l = forms.l as f64;
    let mut r = Sum::new(3);
    if m >= n {
        if n > 0 {
            r = r.with(1.0, scaled_log(forms, n as f64 / l, forms.k_sd, forms.k_rd, forms.b));
        }
        if m > n {
            r = r.with(1.0, scaled_log(forms, (m - n) as f64 / l, forms.k_sd, 0.0, forms.b));
        }
    } else {
        let ratio = n as f64 / m as f64;
        r = r.with(1.0, scaled_log(forms, m as f64 / l, forms.k_sd, ratio * forms.k_rd, forms.b));
    }
    r
}

fn solved(forms: &Forms, p0: f64, p1: f64, t: f64, steps: usize) -> PowerSolution {
    PowerSolution {
        p0,
        p1,
        beta: forms.beta(p0).clamp(0.0, 1.0),
        t,
        newton_steps: steps,
    }
}

/// Best `(P0, P1)` at the split `(m, n)`.
///
/// When the direct link dominates the relay is silent and the backscatter
/// phase takes `min(P L / M, Pmax)`. Otherwise `min(R_SR, R_D)` is maximized
/// subject to the budget `M P0 + N P1 <= P L` and the power box, then any
/// leftover budget is spent.
pub fn reoptimize_powers(
    m: usize,
    n: usize,
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<PowerSolution, AllocError> {
    let forms = Forms::new(chan, cfg);
    let infeasible = AllocError::Infeasible(Stage::PowerReoptimization);
    if m + n != cfg.l {
        return Err(infeasible);
    }
    let l = cfg.l as f64;
    if chan.g_sd > chan.g_sr {
        if m == 0 {
            return Err(infeasible);
        }
        let p0 = (cfg.p * l / m as f64).min(cfg.pmax);
        let beta = optimal_beta(p0, chan, cfg).map_err(|_| infeasible.clone())?;
        let rho = m as f64 / l;
        return Ok(PowerSolution {
            p0,
            p1: 0.0,
            beta,
            t: forms.r_sd(rho, p0),
            newton_steps: 0,
        });
    }
    if m == 0 {
        return Ok(PowerSolution {
            p0: 0.0,
            p1: 0.0,
            beta: 0.0,
            t: 0.0,
            newton_steps: 0,
        });
    }
    if forms.p0_min > forms.pmax || m as f64 * forms.p0_min > cfg.p * l {
        return Err(infeasible);
    }
    if n == 0 {
        let p0 = cfg.p.min(cfg.pmax);
        return Ok(solved(&forms, p0, 0.0, forms.t_case1(1.0, p0, 0.0), 0));
    }

    let (mf, nf) = (m as f64, n as f64);
    let weight = forms.log2_weight();
    let tb = forms.tsw * 64.0;
    let r_sr = PerspLog {
        weight,
        s: Affine::constant(3, mf / l),
        x: Affine::new(vec![mf / l * forms.k_sr, 0.0, 0.0], 0.0),
        c: forms.a,
    };
    let r_d = destination_rate(&forms, m, n);
    let epi = |f: PerspLog| Sum::new(3).with(1.0, Affine::coordinate(3, T)).with(-1.0, f);
    let prog = ConcaveProgram::new(
        Affine::coordinate(3, T),
        vec![forms.p0_min, 0.0, -tb],
        vec![cfg.pmax, cfg.pmax, tb],
    )
    .subject_to(Affine::new(vec![mf, nf, 0.0], -cfg.p * l))
    .subject_to(epi(r_sr))
    .subject_to(Sum::new(3).with(1.0, Affine::coordinate(3, T)).with(-1.0, r_d));

    let p0s = cfg.p.clamp(forms.p0_min, cfg.pmax);
    let p1s = ((cfg.p * l - mf * p0s) / nf).clamp(0.0, cfg.pmax) * 0.5;
    let t0 = forms.t_case1(mf / l, p0s, p1s);
    let t0 = if t0.is_finite() { t0 - 1.0 } else { 0.0 };
    let r = maximize_concave(&prog, &[p0s, p1s, t0], &opts.kernel);
    if r.status == Status::Infeasible {
        return Err(infeasible);
    }
    debug_assert!(prog.objective.value(&r.x).is_finite());
    let (p0, p1) = fit_budget(&forms, mf / l, r.x[P0], r.x[P1]);
    Ok(solved(&forms, p0, p1, r.x[T], r.newton_steps))
}
