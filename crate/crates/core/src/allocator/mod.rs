//! The three-step allocator.
//!
//! 1. Relax the subframe split to a time share `rho` and solve the
//!    continuous problem: SCA plus a direct convex solve when the direct link
//!    is weaker than the source-relay link, a concave 1-D search otherwise.
//! 2. Round `rho L` to a subframe count.
//! 3. Re-optimize the powers at the integer split.
//!
//! The reflection coefficient is always `1 - Pc / (eta P0 g_sr)`, which
//! spends exactly the harvested energy on the circuit.

mod case1;
mod case2;
pub mod forms;
mod integer;
mod power;
pub mod surrogates;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use case1::{solve_case1, solve_case1_highrho, solve_case1_lowrho};
pub use case2::{q_derivative, q_second_derivative, q_value, solve_case2};
pub use integer::{integer_convert, IntegerChoice};
pub use power::{reoptimize_powers, PowerSolution};

use crate::error::{AllocError, Stage};
use crate::kernel::KernelOptions;
use crate::model::{check_constraints, Allocation, ChannelState, NetworkConfig, Violation};
use crate::throughput::{rate_sum, RateBreakdown};
use forms::Forms;

/// Which continuous subproblem produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ContinuousCase {
    Case1HighRho,
    Case1LowRho,
    Case2,
}

/// One outer SCA iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaStep {
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

/// Solution of the time-share relaxation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContinuousSolution {
    pub p0: f64,
    pub p1: f64,
    pub rho: f64,
    pub beta: f64,
    /// Auxiliary objective returned by the last subproblem solve.
    pub t: f64,
    /// Exact relaxed objective at the returned powers.
    pub objective: f64,
    pub case: ContinuousCase,
    /// `rho` sits on the upper guard of the high branch; the integer split
    /// then uses `M = L`.
    pub on_upper_guard: bool,
    pub sca_trace: Vec<ScaStep>,
    pub newton_steps: usize,
}

/// Rounding rule applied to `rho L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum IntegerRule {
    /// `P0 > P1`: round down.
    Floor,
    /// `P0 < P1`: round up.
    Ceil,
    /// Equal powers, the floor candidate is at least as good.
    Condition1,
    /// Equal powers, the ceiling candidate is strictly better.
    Condition2,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// Relative change in `t` below which SCA stops.
    pub sca_tol: f64,
    pub sca_max_iter: usize,
    /// Restarts toward the box center when the first SCA subproblem is
    /// infeasible.
    pub sca_max_restarts: usize,
    /// Additional initial time shares for the high branch.
    pub sca_extra_starts: Vec<f64>,
    /// Bracket width for the direct-case bisection.
    pub bisect_tol: f64,
    pub rho0: f64,
    pub a0: f64,
    /// `None` projects `P (1 - rho0) / 2` into the feasible box.
    pub b0: Option<f64>,
    /// Relative tolerance under which `P0` and `P1` count as equal.
    pub equal_power_tol: f64,
    pub kernel: KernelOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            sca_tol: 1e-7,
            sca_max_iter: 50,
            sca_max_restarts: 5,
            sca_extra_starts: vec![0.85, 0.95],
            bisect_tol: 1e-12,
            rho0: 0.7,
            a0: 6.0,
            b0: None,
            equal_power_tol: 1e-6,
            kernel: KernelOptions::default(),
        }
    }
}

/// Result of [`allocate`] or of the exhaustive oracle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverReport {
    pub allocation: Allocation,
    /// Sum rate of `allocation`, bits per block.
    pub throughput: f64,
    pub rates: RateBreakdown,
    /// `g_sd > g_sr`: the direct link dominates and the relay stays silent.
    pub direct_dominant: bool,
    pub continuous: Option<ContinuousSolution>,
    pub sca_trace: Vec<ScaStep>,
    pub integer_rule: Option<IntegerRule>,
    /// Auxiliary objective of the final power re-optimization.
    pub final_t: f64,
    pub newton_steps: usize,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

/// `1 - Pc / (eta P0 g_sr)`.
pub fn optimal_beta(p0: f64, chan: &ChannelState, cfg: &NetworkConfig) -> Result<f64, AllocError> {
    let floor = cfg.pc / (cfg.eta * chan.g_sr);
    if !(p0 >= floor) {
        return Err(AllocError::InfeasiblePower { p0, floor });
    }
    Ok((1.0 - cfg.pc / (cfg.eta * p0 * chan.g_sr)).clamp(0.0, 1.0))
}

/// Spends leftover budget (raising `P0`, then `P1`, within `Pmax`) or trims
/// an overdraft (lowering `P1`, then `P0` down to the circuit floor) so the
/// budget `rho P0 + (1 - rho) P1 <= P` holds with equality when possible.
pub(crate) fn fit_budget(forms: &Forms, rho: f64, p0: f64, p1: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (p0.clamp(forms.p0_min, forms.pmax), p1.clamp(0.0, forms.pmax));
    let sigma = 1.0 - rho;
    let used = rho * p0 + sigma * p1;
    let mut slack = forms.p - used;
    if slack > 0.0 {
        if rho > 0.0 {
            let d = (forms.pmax - p0).min(slack / rho);
            p0 += d;
            slack -= rho * d;
        }
        if sigma > 0.0 && slack > 0.0 {
            p1 = (p1 + slack / sigma).min(forms.pmax);
        }
    } else if slack < 0.0 {
        let mut over = -slack;
        if sigma > 0.0 {
            let d = p1.min(over / sigma);
            p1 -= d;
            over -= sigma * d;
        }
        if rho > 0.0 && over > 0.0 {
            p0 = (p0 - over / rho).max(forms.p0_min);
        }
    }
    (p0, p1)
}

/// Runs the full pipeline and audits the result.
pub fn allocate(chan: &ChannelState, cfg: &NetworkConfig, opts: &SolverOptions) -> Result<SolverReport, AllocError> {
    cfg.validate()?;
    if cfg.pc > cfg.eta * cfg.pmax * chan.g_sr {
        return Err(AllocError::Infeasible(Stage::ReflectionCoefficient));
    }
    let direct_dominant = chan.g_sd > chan.g_sr;
    let cont = if direct_dominant {
        solve_case2(chan, cfg, opts)?
    } else {
        solve_case1(chan, cfg, opts)?
    };
    let choice = integer_convert(&cont, chan, cfg, opts);
    let power = reoptimize_powers(choice.m, choice.n, chan, cfg, opts)?;
    let allocation = Allocation::with_uniform_eigenvalues(choice.m, choice.n, power.p0, power.p1, power.beta);
    let rates = rate_sum(&allocation, chan, cfg);
    let violations = check_constraints(&allocation, chan, cfg);
    let mut notes = Vec::new();
    if !violations.is_empty() {
        notes.push(format!("constraint audit failed: {violations:?}"));
    }
    if rates.relay_undefined {
        notes.push(String::from("no backscatter subframes; relay rate taken as zero"));
    }
    if cont.sca_trace.len() >= opts.sca_max_iter {
        notes.push(format!("SCA stopped at the {}-iteration cap", opts.sca_max_iter));
    }
    if cont.on_upper_guard {
        notes.push(String::from("time share on the upper guard; split snapped to M = L"));
    }
    Ok(SolverReport {
        throughput: rates.r_sum,
        rates,
        direct_dominant,
        sca_trace: cont.sca_trace.clone(),
        newton_steps: cont.newton_steps + power.newton_steps,
        continuous: Some(cont),
        integer_rule: Some(choice.rule),
        final_t: power.t,
        allocation,
        violations,
        notes,
    })
}
