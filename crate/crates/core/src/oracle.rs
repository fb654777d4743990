//! Exhaustive search over the subframe split.
//!
//! For a fixed split the power problem is convex (or closed-form when the
//! direct link dominates), so enumerating every `M` and re-optimizing the
//! powers gives the global optimum.

use alloc::vec::Vec;

use crate::allocator::{allocate, reoptimize_powers, SolverOptions, SolverReport};
use crate::error::{AllocError, Stage};
use crate::model::{check_constraints, Allocation, ChannelState, NetworkConfig};
use crate::throughput::rate_sum;

/// Largest `L` accepted by [`exhaustive_allocate`].
pub const MAX_SUBFRAMES: usize = 1000;

/// Outcome at one split; `throughput` is `None` when the split is infeasible.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SplitResult {
    pub m: usize,
    pub n: usize,
    pub throughput: Option<f64>,
    pub p0: f64,
    pub p1: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleReport {
    pub report: SolverReport,
    pub per_split: Vec<SplitResult>,
}

/// Evaluates every `M in 0..=L` and keeps the best; the smallest `M` wins
/// ties.
pub fn exhaustive_allocate(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<OracleReport, AllocError> {
    cfg.validate()?;
    if cfg.l > MAX_SUBFRAMES {
        return Err(AllocError::TooManySubframes(cfg.l));
    }
    let mut per_split = Vec::with_capacity(cfg.l + 1);
    let mut best: Option<(Allocation, f64, usize)> = None;
    let mut steps = 0;
    for m in 0..=cfg.l {
        let n = cfg.l - m;
        match reoptimize_powers(m, n, chan, cfg, opts) {
            Ok(s) => {
                steps += s.newton_steps;
                let alloc = Allocation::with_uniform_eigenvalues(m, n, s.p0, s.p1, s.beta);
                let thr = rate_sum(&alloc, chan, cfg).r_sum;
                per_split.push(SplitResult {
                    m,
                    n,
                    throughput: Some(thr),
                    p0: s.p0,
                    p1: s.p1,
                    beta: s.beta,
                });
                if best.as_ref().is_none_or(|b| thr > b.1) {
                    best = Some((alloc, thr, m));
                }
            }
            Err(_) => per_split.push(SplitResult {
                m,
                n,
                throughput: None,
                p0: f64::NAN,
                p1: f64::NAN,
                beta: f64::NAN,
            }),
        }
    }
    let (allocation, _, m) = best.ok_or(AllocError::Infeasible(Stage::Exhaustive))?;
    let rates = rate_sum(&allocation, chan, cfg);
    let violations = check_constraints(&allocation, chan, cfg);
    let final_t = reoptimize_powers(m, cfg.l - m, chan, cfg, opts)?.t;
    Ok(OracleReport {
        report: SolverReport {
            throughput: rates.r_sum,
            rates,
            direct_dominant: chan.g_sd > chan.g_sr,
            continuous: None,
            sca_trace: Vec::new(),
            integer_rule: None,
            final_t,
            newton_steps: steps,
            violations,
            notes: Vec::new(),
            allocation,
        },
        per_split,
    })
}

/// Oracle and allocator throughput at one `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapPoint {
    pub l: usize,
    pub oracle: f64,
    pub proposed: f64,
    /// `oracle - proposed`, bits per block.
    pub gap: f64,
}

/// Loss from rounding the time share, for each `L` in `l_list`.
pub fn timesharing_gap(
    chan: &ChannelState,
    cfg_base: &NetworkConfig,
    l_list: &[usize],
    opts: &SolverOptions,
) -> Result<Vec<GapPoint>, AllocError> {
    l_list
        .iter()
        .map(|&l| {
            let cfg = NetworkConfig {
                l,
                ..cfg_base.clone()
            };
            let oracle = exhaustive_allocate(chan, &cfg, opts)?.report.throughput;
            let proposed = allocate(chan, &cfg, opts)?.throughput;
            Ok(GapPoint {
                l,
                oracle,
                proposed,
                gap: oracle - proposed,
            })
        })
        .collect()
}
