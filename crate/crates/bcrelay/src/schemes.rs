//! The proposed allocator and the baselines it is compared against.
//!
//! - `bc-only`: every subframe is backscatter, the relay stays silent.
//! - `relay-bc-fixed`: equal split, `N = floor(L/2)`, powers re-optimized.
//! - `opportunistic-relay-bc`: per block, the better of direct-only and the
//!   equal-split relay mode.
//! - `related-continuous-upper`: continuous time share optimized against the
//!   separately-decoded upper bound `R_SD + R_RD`; no integer conversion.

use std::fmt;
use std::str::FromStr;

use bcrelay_core::allocator::forms::Forms;
use bcrelay_core::allocator::{reoptimize_powers, solve_case2, SolverReport};
use bcrelay_core::kernel::functions::{Affine, PerspLog, Sum};
use bcrelay_core::kernel::{maximize_concave, ConcaveProgram, Status};
use bcrelay_core::model::check_constraints;
use bcrelay_core::{
    allocate, rate_sum, AllocError, Allocation, ChannelState, NetworkConfig, SolverOptions,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    Proposed,
    BcOnly,
    RelayBcFixed,
    OpportunisticRelayBc,
    RelatedContinuousUpper,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] = [
        SchemeId::Proposed,
        SchemeId::BcOnly,
        SchemeId::RelayBcFixed,
        SchemeId::OpportunisticRelayBc,
        SchemeId::RelatedContinuousUpper,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::BcOnly => "bc-only",
            SchemeId::RelayBcFixed => "relay-bc-fixed",
            SchemeId::OpportunisticRelayBc => "opportunistic-relay-bc",
            SchemeId::RelatedContinuousUpper => "related-continuous-upper",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown scheme `{s}`"))
    }
}

/// Result of one scheme at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: SchemeId,
    /// Bits per block.
    pub throughput: f64,
    /// `None` for the continuous-time scheme.
    pub allocation: Option<Allocation>,
    /// Time share of the backscatter phase.
    pub rho: f64,
    pub p0: f64,
    pub p1: f64,
    pub beta: f64,
    pub case: String,
    /// Outer SCA iterations; zero for schemes without SCA.
    pub iterations: usize,
    pub notes: Vec<String>,
    /// Full report for the proposed scheme.
    pub report: Option<SolverReport>,
}

impl SchemeOutcome {
    fn from_allocation(scheme: SchemeId, alloc: Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> Self {
        let rates = rate_sum(&alloc, chan, cfg);
        Self {
            scheme,
            throughput: rates.r_sum,
            rho: alloc.m as f64 / cfg.l as f64,
            p0: alloc.p0,
            p1: alloc.p1,
            beta: alloc.beta,
            case: case_label(&rates.case_label),
            iterations: 0,
            notes: Vec::new(),
            report: None,
            allocation: Some(alloc),
        }
    }
}

fn case_label(c: &bcrelay_core::throughput::BoundCase) -> String {
    use bcrelay_core::throughput::BoundCase::*;
    match c {
        DestinationLimited => "destination-limited",
        RelayLimited => "relay-limited",
        Straddling => "straddling",
    }
    .to_string()
}

/// Evaluates a fixed split with re-optimized powers.
pub fn fixed_split(
    scheme: SchemeId,
    m: usize,
    n: usize,
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<SchemeOutcome, AllocError> {
    let s = reoptimize_powers(m, n, chan, cfg, opts)?;
    let alloc = Allocation::with_uniform_eigenvalues(m, n, s.p0, s.p1, s.beta);
    Ok(SchemeOutcome::from_allocation(scheme, alloc, chan, cfg))
}

pub fn proposed(chan: &ChannelState, cfg: &NetworkConfig, opts: &SolverOptions) -> Result<SchemeOutcome, AllocError> {
    let r = allocate(chan, cfg, opts)?;
    let mut out = SchemeOutcome::from_allocation(SchemeId::Proposed, r.allocation.clone(), chan, cfg);
    out.iterations = r.sca_trace.len();
    out.notes = r.notes.clone();
    out.report = Some(r);
    Ok(out)
}

pub fn bc_only(chan: &ChannelState, cfg: &NetworkConfig, opts: &SolverOptions) -> Result<SchemeOutcome, AllocError> {
    fixed_split(SchemeId::BcOnly, cfg.l, 0, chan, cfg, opts)
}

pub fn relay_bc_fixed(chan: &ChannelState, cfg: &NetworkConfig, opts: &SolverOptions) -> Result<SchemeOutcome, AllocError> {
    let n = cfg.l / 2;
    let mut out = fixed_split(SchemeId::RelayBcFixed, cfg.l - n, n, chan, cfg, opts)?;
    if cfg.l % 2 == 1 {
        out.notes.push(format!("odd L; relay phase uses floor(L/2) = {n} subframes"));
    }
    Ok(out)
}

/// Better of the direct-only block and the equal-split relay block.
pub fn opportunistic(chan: &ChannelState, cfg: &NetworkConfig, opts: &SolverOptions) -> Result<SchemeOutcome, AllocError> {
    let direct = bc_only(chan, cfg, opts);
    let relay = relay_bc_fixed(chan, cfg, opts);
    let (mut best, mode) = match (direct, relay) {
        (Ok(d), Ok(r)) if r.throughput > d.throughput => (r, "relay"),
        (Ok(d), _) => (d, "direct"),
        (Err(_), Ok(r)) => (r, "relay"),
        (Err(e), Err(_)) => return Err(e),
    };
    best.scheme = SchemeId::OpportunisticRelayBc;
    best.notes.push(format!("mode={mode}"));
    Ok(best)
}

/// Continuous-time optimum of the separately-decoded bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousUpper {
    pub rho: f64,
    pub p0: f64,
    pub p1: f64,
    pub throughput: f64,
    pub newton_steps: usize,
}

const RHO: usize = 0;
const U: usize = 1;
const V: usize = 2;
const T: usize = 3;

/// Smallest relay share kept away from the endpoints of the barrier box.
const RHO_MARGIN: f64 = 1e-6;

/// Maximizes `max(R_SD, min(R_SR, R_SD + R_RD))` over a continuous share.
///
/// With `u = rho P0` and `v = (1 - rho) P1` the relay branch is a concave
/// program in `(rho, u, v, t)`. The direct-only branch and the endpoint
/// `rho = 1` are evaluated separately and the best of the three is kept.
pub fn continuous_upper(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<ContinuousUpper, AllocError> {
    cfg.validate()?;
    let f = Forms::new(chan, cfg);
    let mut best: Option<ContinuousUpper> = None;
    let mut keep = |c: ContinuousUpper| {
        if c.throughput.is_finite() && best.is_none_or(|b| c.throughput > b.throughput) {
            best = Some(c);
        }
    };

    if f.p0_min <= f.pmax {
        let p0 = f.p.min(f.pmax);
        let r_sd = f.r_sd(1.0, p0);
        let r_sr = f.r_sr(1.0, p0);
        keep(ContinuousUpper {
            rho: 1.0,
            p0,
            p1: 0.0,
            throughput: r_sd.max(r_sr.min(r_sd)),
            newton_steps: 0,
        });
    }
    if let Ok(c) = solve_case2(chan, cfg, opts) {
        keep(ContinuousUpper {
            rho: c.rho,
            p0: c.p0,
            p1: 0.0,
            throughput: c.objective,
            newton_steps: 0,
        });
    }
    if let Some(c) = relay_branch(&f, opts) {
        keep(c);
    }
    best.ok_or(AllocError::Infeasible(bcrelay_core::error::Stage::HighRho))
}

fn relay_branch(f: &Forms, opts: &SolverOptions) -> Option<ContinuousUpper> {
    if f.p0_min >= f.pmax {
        return None;
    }
    let w = f.log2_weight();
    let share = Affine::coordinate(4, RHO);
    let rest = Affine::new(vec![-1.0, 0.0, 0.0, 0.0], 1.0);
    let r_sr = PerspLog {
        weight: w,
        s: share.clone(),
        x: Affine::new(vec![0.0, f.k_sr, 0.0, 0.0], 0.0),
        c: f.a,
    };
    let r_sd = PerspLog {
        weight: w,
        s: share,
        x: Affine::new(vec![0.0, f.k_sd, 0.0, 0.0], 0.0),
        c: f.b,
    };
    let r_rd = PerspLog {
        weight: w,
        s: rest,
        x: Affine::new(vec![0.0, 0.0, f.k_rd, 0.0], 0.0),
        c: 1.0,
    };
    let tb = f.tsw * 64.0;
    let t = || Affine::coordinate(4, T);
    let prog = ConcaveProgram::new(
        t(),
        vec![RHO_MARGIN, 0.0, 0.0, -tb],
        vec![1.0 - RHO_MARGIN, f.pmax, f.pmax, tb],
    )
    .subject_to(Affine::new(vec![0.0, 1.0, 1.0, 0.0], -f.p))
    .subject_to(Affine::new(vec![f.p0_min, -1.0, 0.0, 0.0], 0.0))
    .subject_to(Affine::new(vec![-f.pmax, 1.0, 0.0, 0.0], 0.0))
    .subject_to(Affine::new(vec![f.pmax, 0.0, 1.0, 0.0], -f.pmax))
    .subject_to(Sum::new(4).with(1.0, t()).with(-1.0, r_sr))
    .subject_to(Sum::new(4).with(1.0, t()).with(-1.0, r_sd).with(-1.0, r_rd));

    let rho0 = opts.rho0;
    let p0s = 0.5 * (f.p0_min + f.p.min(f.pmax));
    let p1s = 0.5 * ((f.p - rho0 * p0s) / (1.0 - rho0)).clamp(0.0, f.pmax);
    let mut x0 = [rho0, rho0 * p0s, (1.0 - rho0) * p1s, 0.0];
    x0[T] = bound_value(f, rho0, p0s, p1s) - 1.0;
    if !x0[T].is_finite() {
        x0[T] = 0.0;
    }
    let r = maximize_concave(&prog, &x0, &opts.kernel);
    if r.status == Status::Infeasible {
        return None;
    }
    let rho = r.x[RHO];
    let p0 = r.x[U] / rho;
    let p1 = r.x[V] / (1.0 - rho);
    Some(ContinuousUpper {
        rho,
        p0,
        p1,
        throughput: bound_value(f, rho, p0, p1),
        newton_steps: r.newton_steps,
    })
}

/// `min(R_SR, R_SD + R_RD)` at a continuous share.
pub fn bound_value(f: &Forms, rho: f64, p0: f64, p1: f64) -> f64 {
    let r_rd = f.tsw * (1.0 - rho) * (1.0 + p1 * f.k_rd).log2();
    f.r_sr(rho, p0).min(f.r_sd(rho, p0) + r_rd)
}

pub fn related_continuous_upper(
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<SchemeOutcome, AllocError> {
    let c = continuous_upper(chan, cfg, opts)?;
    let f = Forms::new(chan, cfg);
    Ok(SchemeOutcome {
        scheme: SchemeId::RelatedContinuousUpper,
        throughput: c.throughput,
        allocation: None,
        rho: c.rho,
        p0: c.p0,
        p1: c.p1,
        beta: f.beta(c.p0).clamp(0.0, 1.0),
        case: "upper-bound".to_string(),
        iterations: 0,
        notes: Vec::new(),
        report: None,
    })
}

pub fn scheme_throughput(
    scheme: SchemeId,
    chan: &ChannelState,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<SchemeOutcome, AllocError> {
    match scheme {
        SchemeId::Proposed => proposed(chan, cfg, opts),
        SchemeId::BcOnly => bc_only(chan, cfg, opts),
        SchemeId::RelayBcFixed => relay_bc_fixed(chan, cfg, opts),
        SchemeId::OpportunisticRelayBc => opportunistic(chan, cfg, opts),
        SchemeId::RelatedContinuousUpper => related_continuous_upper(chan, cfg, opts),
    }
}

/// Constraint audit of a scheme outcome; continuous results are skipped.
pub fn audit(outcome: &SchemeOutcome, chan: &ChannelState, cfg: &NetworkConfig) -> usize {
    outcome
        .allocation
        .as_ref()
        .map_or(0, |a| check_constraints(a, chan, cfg).len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bcrelay_core::channel_gains;

    fn setup() -> (ChannelState, NetworkConfig, SolverOptions) {
        let cfg = NetworkConfig::baseline();
        (channel_gains(&cfg).unwrap(), cfg, SolverOptions::default())
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.as_str().parse::<SchemeId>(), Ok(id));
        }
        assert!("bc".parse::<SchemeId>().is_err());
    }

    #[test]
    fn bc_only_is_pure_backscatter() {
        let (ch, cfg, o) = setup();
        let r = bc_only(&ch, &cfg, &o).unwrap();
        let a = r.allocation.unwrap();
        assert_eq!((a.m, a.n), (20, 0));
        let expected = cfg.ts * cfg.w * (1.0 + r.p0 * r.beta * ch.g_sr * ch.g_sd / ch.noise_bw).log2();
        assert!((r.throughput - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn odd_split_is_noted() {
        let (ch, cfg, o) = setup();
        let cfg = NetworkConfig { l: 21, ..cfg };
        let r = relay_bc_fixed(&ch, &cfg, &o).unwrap();
        let a = r.allocation.unwrap();
        assert_eq!((a.m, a.n), (11, 10));
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn opportunistic_takes_the_better_mode() {
        let (ch, cfg, o) = setup();
        let d = bc_only(&ch, &cfg, &o).unwrap().throughput;
        let r = relay_bc_fixed(&ch, &cfg, &o).unwrap().throughput;
        let op = opportunistic(&ch, &cfg, &o).unwrap().throughput;
        assert_eq!(op, d.max(r));
    }

    #[test]
    fn continuous_upper_dominates_every_split() {
        let (ch, cfg, o) = setup();
        let up = continuous_upper(&ch, &cfg, &o).unwrap().throughput;
        for m in 0..=cfg.l {
            let s = reoptimize_powers(m, cfg.l - m, &ch, &cfg, &o).unwrap();
            let a = Allocation::with_uniform_eigenvalues(m, cfg.l - m, s.p0, s.p1, s.beta);
            let r = rate_sum(&a, &ch, &cfg);
            assert!(up >= r.r_sum_upper * (1.0 - 1e-6), "m={m}: {up} < {}", r.r_sum_upper);
        }
    }

    #[test]
    fn useless_relay_bc_matches_proposed_at_full_share() {
        let (mut ch, cfg, o) = setup();
        ch.g_rd = 0.0;
        let p = proposed(&ch, &cfg, &o).unwrap();
        let b = bc_only(&ch, &cfg, &o).unwrap();
        assert!(p.throughput >= b.throughput * (1.0 - 1e-9));
        if p.allocation.as_ref().unwrap().m == cfg.l {
            assert!((p.throughput - b.throughput).abs() <= 1e-9 * b.throughput);
        }
    }
}
