//! Continuous relaxation when the direct link is no stronger than the
//! source-relay link (`g_sd <= g_sr`): the objective is `min(R_SR, R_D)`.

use alloc::vec;
use alloc::vec::Vec;

use super::forms::Forms;
use super::surrogates::{self, sca_surrogates, SurrogatePoint, DIM};
use super::{fit_budget, ContinuousCase, ContinuousSolution, ScaStep, SolverOptions};
use crate::error::{AllocError, Stage};
use crate::kernel::functions::{Affine, PerspLog, Sum};
use crate::kernel::{maximize_concave, ConcaveProgram, Status};
use crate::math::{abs, log2};
use crate::model::{ChannelState, NetworkConfig};

/// Upper guard on `rho` in the high branch; `1 - rho` divides the powers.
pub(crate) fn rho_upper_guard(l: usize) -> f64 {
    1.0 - 1.0 / (10.0 * l as f64)
}

/// Lower guard on `rho` in the low branch.
pub(crate) fn rho_lower_guard(l: usize) -> f64 {
    1.0 / (10.0 * l as f64)
}

/// Loose bound on any rate, used to box the auxiliary variable.
fn t_bound(forms: &Forms) -> f64 {
    let top = forms.pmax * (forms.k_sr + forms.k_sd + forms.k_rd);
    forms.tsw * log2(forms.a.abs() + forms.b.abs() + 1.0 + top) + 10.0
}

fn epigraph(dim: usize, t: usize, concave: impl crate::kernel::Smooth + 'static) -> Sum {
    Sum::new(dim)
        .with(1.0, Affine::coordinate(dim, t))
        .with(-1.0, concave)
}

fn high_program(forms: &Forms, pt: &SurrogatePoint, rho_hi: f64) -> ConcaveProgram<'static> {
    use surrogates::{A, B, RHO, T};
    let s = sca_surrogates(pt);
    let (p, pmax) = (forms.p, forms.pmax);
    let tb = t_bound(forms);

    let mut budget_lin = vec![0.0; DIM];
    budget_lin[A] = 1.0;
    budget_lin[B] = -1.0;
    let budget = Sum::new(DIM)
        .with(1.0, Affine::new(budget_lin, p))
        .with(1.0, s.f_ub)
        .with(-p, s.y_lb);

    let mut cap_a = vec![0.0; DIM];
    cap_a[RHO] = pmax;
    cap_a[A] = 1.0;
    let mut cap_b = vec![0.0; DIM];
    cap_b[RHO] = pmax;
    cap_b[B] = 1.0;
    let mut circuit = vec![0.0; DIM];
    circuit[RHO] = -forms.pc;
    circuit[A] = -forms.eta * forms.g_sr;

    let relay = Sum::new(DIM)
        .with(1.0, Affine::coordinate(DIM, T))
        .with(-1.0, surrogates::e_smooth(forms))
        .with(-1.0, s.w_lb);

    let mut lower = vec![0.0; DIM];
    let mut upper = vec![0.0; DIM];
    lower[RHO] = 0.5;
    upper[RHO] = rho_hi;
    upper[A] = 0.5 * pmax;
    upper[B] = 0.5 * pmax;
    lower[T] = -tb;
    upper[T] = tb;

    ConcaveProgram::new(Affine::coordinate(DIM, T), lower, upper)
        .subject_to(budget)
        .subject_to(Affine::new(cap_a, -pmax))
        .subject_to(Affine::new(cap_b, -pmax))
        .subject_to(Affine::new(circuit, forms.pc))
        .subject_to(epigraph(DIM, T, s.g_lb))
        .subject_to(relay)
}

fn project_start(forms: &Forms, rho: f64, a: f64, b: Option<f64>, rho_hi: f64) -> (f64, f64, f64) {
    let rho = rho.clamp(0.5, rho_hi);
    let om = 1.0 - rho;
    let a = a.clamp(forms.p0_min * om, forms.pmax * om);
    let b = b.unwrap_or(forms.p * om / 2.0).clamp(0.0, forms.pmax * om);
    (rho, a, b)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    forms: &Forms,
    rho: f64,
    p0: f64,
    p1: f64,
    t: f64,
    case: ContinuousCase,
    on_upper_guard: bool,
    sca_trace: Vec<ScaStep>,
    newton_steps: usize,
) -> ContinuousSolution {
    let (p0, p1) = fit_budget(forms, rho, p0, p1);
    ContinuousSolution {
        p0,
        p1,
        rho,
        beta: forms.beta(p0).clamp(0.0, 1.0),
        t,
        objective: forms.t_case1(rho, p0, p1),
        case,
        on_upper_guard,
        sca_trace,
        newton_steps,
    }
}

/// SCA over `rho in [1/2, 1 - 1/(10 L)]` in the `(a, b)` parameterization.
///
/// Runs from `(rho0, a0, b0)` and from every extra start in
/// `opts.sca_extra_starts`, keeping the best objective (earliest start on
/// ties). SCA only finds a local optimum, and when the budget binds with
/// `P = Pmax` the surrogate budget lets `rho` move very little per
/// iteration, so a single start can stall far from the best split.
pub fn solve_case1_highrho(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<ContinuousSolution, AllocError> {
    let mut best = sca_from(chan, cfg, opts, opts.rho0, opts.a0, opts.b0);
    for &r0 in &opts.sca_extra_starts {
        let s = sca_from(chan, cfg, opts, r0, opts.a0, None);
        best = match (best, s) {
            (Ok(b), Ok(s)) => Ok(if s.objective > b.objective { s } else { b }),
            (Err(_), s) => s,
            (b, Err(_)) => b,
        };
    }
    best
}

fn sca_from(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
    rho0: f64,
    a0: f64,
    b0: Option<f64>,
) -> Result<ContinuousSolution, AllocError> {
    let forms = Forms::new(chan, cfg);
    let rho_hi = rho_upper_guard(cfg.l);
    let (mut rho, mut a, mut b) = project_start(&forms, rho0, a0, b0, rho_hi);
    let center_rho = 0.5 * (0.5 + rho_hi);
    let mut trace: Vec<ScaStep> = Vec::new();
    let mut restarts = 0;
    let mut steps = 0;
    let mut iter = 0;
    while iter < opts.sca_max_iter {
        let pt = SurrogatePoint::new(&forms, rho, a, b);
        let prog = high_program(&forms, &pt, rho_hi);
        let t0 = surrogates::g(&forms, rho, a)
            .min(surrogates::e(&forms, rho, a, b) + surrogates::w(&forms, rho, a));
        let t0 = if t0.is_finite() { t0 - 1.0 } else { 0.0 };
        let r = maximize_concave(&prog, &[rho, a, b, t0], &opts.kernel);
        steps += r.newton_steps;
        if r.status == Status::Infeasible {
            if trace.is_empty() && restarts < opts.sca_max_restarts {
                restarts += 1;
                let next_rho = center_rho + 0.5 * (rho - center_rho);
                let om = 1.0 - next_rho;
                let ca = 0.5 * (forms.p0_min + forms.pmax) * om;
                let (nr, na, nb) = project_start(
                    &forms,
                    next_rho,
                    ca + 0.5 * (a - ca),
                    Some(0.5 * b),
                    rho_hi,
                );
                rho = nr;
                a = na;
                b = nb;
                continue;
            }
            if trace.is_empty() {
                return Err(AllocError::Infeasible(Stage::HighRho));
            }
            break;
        }
        iter += 1;
        let (nr, na, nb, nt) = (r.x[0], r.x[1], r.x[2], r.x[3]);
        let done = trace
            .last()
            .is_some_and(|prev| abs(nt - prev.t) <= opts.sca_tol * abs(nt).max(1.0));
        trace.push(ScaStep {
            rho: nr,
            a: na,
            b: nb,
            t: nt,
        });
        rho = nr;
        a = na;
        b = nb;
        if done {
            break;
        }
    }
    let last = *trace.last().ok_or(AllocError::Infeasible(Stage::HighRho))?;
    let om = 1.0 - last.rho;
    let on_guard = last.rho >= rho_hi - 1e-6;
    Ok(finish(
        &forms,
        last.rho,
        last.a / om,
        last.b / om,
        last.t,
        ContinuousCase::Case1HighRho,
        on_guard,
        trace,
        steps,
    ))
}

/// Direct convex solve over `rho in [1/(10 L), 1/2]` with `u = P0 rho`,
/// `v = P1 (1 - rho)`.
pub fn solve_case1_lowrho(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<ContinuousSolution, AllocError> {
    const RHO: usize = 0;
    const U: usize = 1;
    const V: usize = 2;
    const T: usize = 3;
    let forms = Forms::new(chan, cfg);
    let (p, pmax) = (forms.p, forms.pmax);
    let tb = t_bound(&forms);
    let weight = forms.log2_weight();
    let rho_var = Affine::coordinate(DIM, RHO);

    let r_sr = PerspLog {
        weight,
        s: rho_var.clone(),
        x: Affine::new(vec![0.0, forms.k_sr, 0.0, 0.0], 0.0),
        c: forms.a,
    };
    let r_d = PerspLog {
        weight,
        s: rho_var,
        x: Affine::new(vec![0.0, forms.k_sd, forms.k_rd, 0.0], 0.0),
        c: forms.b,
    };
    let lower = vec![rho_lower_guard(cfg.l), 0.0, 0.0, -tb];
    let upper = vec![0.5, 0.5 * pmax, pmax, tb];
    let prog = ConcaveProgram::new(Affine::coordinate(DIM, T), lower, upper)
        .subject_to(Affine::new(vec![0.0, 1.0, 1.0, 0.0], -p))
        .subject_to(Affine::new(vec![-pmax, 1.0, 0.0, 0.0], 0.0))
        .subject_to(Affine::new(vec![pmax, 0.0, 1.0, 0.0], -pmax))
        .subject_to(Affine::new(vec![forms.pc, -forms.eta * forms.g_sr, 0.0, 0.0], 0.0))
        .subject_to(epigraph(DIM, T, r_sr))
        .subject_to(epigraph(DIM, T, r_d));

    let rho0 = 0.25;
    let u0 = rho0 * (forms.p0_min + 0.5 * (pmax - forms.p0_min).max(0.0));
    let v0 = (0.5 * (p - u0)).clamp(0.0, pmax * (1.0 - rho0) * 0.5);
    let t0 = forms.t_case1(rho0, u0 / rho0, v0 / (1.0 - rho0));
    let t0 = if t0.is_finite() { t0 - 1.0 } else { 0.0 };
    let r = maximize_concave(&prog, &[rho0, u0, v0, t0], &opts.kernel);
    if r.status == Status::Infeasible {
        return Err(AllocError::Infeasible(Stage::LowRho));
    }
    let (rho, u, v, t) = (r.x[RHO], r.x[U], r.x[V], r.x[T]);
    Ok(finish(
        &forms,
        rho,
        u / rho,
        v / (1.0 - rho),
        t,
        ContinuousCase::Case1LowRho,
        false,
        Vec::new(),
        r.newton_steps,
    ))
}

/// Runs both branches and keeps the one with the larger objective.
pub fn solve_case1(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<ContinuousSolution, AllocError> {
    let high = solve_case1_highrho(chan, cfg, opts);
    let low = solve_case1_lowrho(chan, cfg, opts);
    match (high, low) {
        (Ok(h), Ok(l)) => Ok(if h.objective >= l.objective { h } else { l }),
        (Ok(h), Err(_)) => Ok(h),
        (Err(_), Ok(l)) => Ok(l),
        (Err(e), Err(_)) => Err(e),
    }
}
