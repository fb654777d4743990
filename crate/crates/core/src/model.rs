//! Network configuration, link gains, energy accounting and the feasibility
//! predicates shared by the allocator, the oracle and the reports.

use alloc::vec::Vec;

use crate::error::ModelError;
use crate::math::{abs, hypot, powf};

/// Default relative tolerance for constraint checks.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Converts a noise density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_w(dbm: f64) -> f64 {
    powf(10.0, (dbm - 30.0) / 10.0)
}

/// Geometry, propagation constants, radio constants and budgets.
///
/// All quantities are linear SI. The HAP budget is stored as the average
/// power `p` (W); the per-block energy is `p * ts`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkConfig {
    /// IoT node (source) position, meters.
    pub coord_s: [f64; 2],
    /// HAP (relay) position, meters.
    pub coord_r: [f64; 2],
    /// Destination position, meters.
    pub coord_d: [f64; 2],
    /// Path-loss exponent of the S-D link.
    pub alpha1: f64,
    /// Path-loss exponent of the S-R link.
    pub alpha2: f64,
    /// Path-loss exponent of the R-D link.
    pub alpha3: f64,
    pub xi_sd: f64,
    pub xi_sr: f64,
    pub xi_rd: f64,
    /// Block duration, seconds.
    pub ts: f64,
    /// Bandwidth, Hz.
    pub w: f64,
    /// Noise power spectral density, W/Hz.
    pub sigma2: f64,
    /// Energy-conversion efficiency.
    pub eta: f64,
    /// Backscatter circuit power, W.
    pub pc: f64,
    /// HAP average-power budget, W.
    pub p: f64,
    /// HAP peak transmit power, W.
    pub pmax: f64,
    /// Subframes per block.
    pub l: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl NetworkConfig {
    /// The reference simulation setup: S at the origin, HAP at (20, 20),
    /// destination at (100, 0), 10 ms blocks over 10 kHz, -100 dBm/Hz noise,
    /// 200 uW circuit power and a 200 mJ per-block HAP budget.
    pub fn baseline() -> Self {
        Self {
            coord_s: [0.0, 0.0],
            coord_r: [20.0, 20.0],
            coord_d: [100.0, 0.0],
            alpha1: 3.0,
            alpha2: 2.7,
            alpha3: 2.7,
            xi_sd: 1.0,
            xi_sr: 1.0,
            xi_rd: 1.0,
            ts: 0.01,
            w: 10e3,
            sigma2: dbm_per_hz_to_w(-100.0),
            eta: 0.5,
            pc: 200e-6,
            p: 20.0,
            pmax: 20.0,
            l: 20,
        }
    }

    /// Per-block HAP energy budget, J.
    pub fn energy(&self) -> f64 {
        self.p * self.ts
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive: [(&'static str, f64); 10] = [
            ("xi_sd", self.xi_sd),
            ("xi_sr", self.xi_sr),
            ("xi_rd", self.xi_rd),
            ("Ts", self.ts),
            ("W", self.w),
            ("sigma2", self.sigma2),
            ("eta", self.eta),
            ("Pc", self.pc),
            ("P", self.p),
            ("Pmax", self.pmax),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidConfig {
                    field,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        for (field, v) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
        ] {
            if !(1.0..=6.0).contains(&v) {
                return Err(ModelError::InvalidConfig {
                    field,
                    reason: "path-loss exponent must lie in [1, 6]",
                });
            }
        }
        if self.eta > 1.0 {
            return Err(ModelError::InvalidConfig {
                field: "eta",
                reason: "must lie in (0, 1]",
            });
        }
        if self.l < 2 {
            return Err(ModelError::InvalidConfig {
                field: "L",
                reason: "need at least two subframes",
            });
        }
        if self.p > self.pmax {
            return Err(ModelError::InvalidConfig {
                field: "P",
                reason: "average budget exceeds peak power",
            });
        }
        for c in [self.coord_s, self.coord_r, self.coord_d] {
            if !(c[0].is_finite() && c[1].is_finite()) {
                return Err(ModelError::InvalidConfig {
                    field: "coordinates",
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }
}

/// Link power gains and the noise power over the band.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelState {
    /// |h_SD|^2
    pub g_sd: f64,
    /// |h_SR|^2
    pub g_sr: f64,
    /// |h_RD|^2
    pub g_rd: f64,
    /// W * sigma^2, watts.
    pub noise_bw: f64,
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    hypot(a[0] - b[0], a[1] - b[1])
}

/// Path-loss gains `xi * d^-alpha` for the three links.
pub fn channel_gains(cfg: &NetworkConfig) -> Result<ChannelState, ModelError> {
    let d_sd = distance(cfg.coord_s, cfg.coord_d);
    let d_sr = distance(cfg.coord_s, cfg.coord_r);
    let d_rd = distance(cfg.coord_r, cfg.coord_d);
    if d_sd <= 0.0 {
        return Err(ModelError::DegenerateGeometry("S", "D"));
    }
    if d_sr <= 0.0 {
        return Err(ModelError::DegenerateGeometry("S", "R"));
    }
    if d_rd <= 0.0 {
        return Err(ModelError::DegenerateGeometry("R", "D"));
    }
    Ok(ChannelState {
        g_sd: cfg.xi_sd * powf(d_sd, -cfg.alpha1),
        g_sr: cfg.xi_sr * powf(d_sr, -cfg.alpha2),
        g_rd: cfg.xi_rd * powf(d_rd, -cfg.alpha3),
        noise_bw: cfg.w * cfg.sigma2,
    })
}

/// One candidate solution of the joint problem.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Allocation {
    /// Backscatter-phase subframes.
    pub m: usize,
    /// Relay-phase subframes.
    pub n: usize,
    /// HAP power during the backscatter phase, W.
    pub p0: f64,
    /// HAP power during the relay phase, W.
    pub p1: f64,
    /// Power reflection coefficient.
    pub beta: f64,
    /// Nonzero eigenvalues of `G G^H`, `min(M, N)` of them.
    pub eigenvalues: Vec<f64>,
}

impl Allocation {
    /// Allocation with the uniform (optimal) eigenvalue profile.
    pub fn with_uniform_eigenvalues(m: usize, n: usize, p0: f64, p1: f64, beta: f64) -> Self {
        Self {
            m,
            n,
            p0,
            p1,
            beta,
            eigenvalues: crate::linmap::optimal_eigenvalues(m, n).values,
        }
    }
}

/// `A` and `B` of the reparameterized rates; negative values are legal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityConstants {
    pub a: f64,
    pub b: f64,
}

pub fn feasibility_constants(chan: &ChannelState, cfg: &NetworkConfig) -> FeasibilityConstants {
    let scale = cfg.pc / (cfg.eta * chan.noise_bw);
    FeasibilityConstants {
        a: 1.0 - scale * chan.g_sr,
        b: 1.0 - scale * chan.g_sd,
    }
}

/// Energy harvested by the IoT node over one block, J.
pub fn harvested_energy(alloc: &Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> f64 {
    let frac = alloc.m as f64 / cfg.l as f64;
    frac * cfg.ts * cfg.eta * (1.0 - alloc.beta) * alloc.p0 * chan.g_sr
}

/// Constraint labels of the joint problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Constraint {
    /// HAP energy budget.
    C1,
    /// Energy causality of the IoT node.
    C2,
    /// `M + N = L`.
    C3,
    /// Nonnegative subframe counts.
    C4,
    /// Eigenvalue sum equals `N`.
    C5,
    /// Transmit-power box.
    C6,
    /// Reflection coefficient in `[0, 1]`.
    C7,
}

/// A violated constraint and its signed slack (negative means violated).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub constraint: Constraint,
    pub slack: f64,
}

pub fn check_constraints(
    alloc: &Allocation,
    chan: &ChannelState,
    cfg: &NetworkConfig,
) -> Vec<Violation> {
    check_constraints_with_tol(alloc, chan, cfg, CONSTRAINT_TOL)
}

/// Evaluates every constraint; an empty result means feasible.
///
/// An inequality `lhs <= rhs` counts as violated when `lhs - rhs` exceeds
/// `tol * max(|lhs|, |rhs|)`.
pub fn check_constraints_with_tol(
    alloc: &Allocation,
    chan: &ChannelState,
    cfg: &NetworkConfig,
    tol: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut le = |constraint: Constraint, lhs: f64, rhs: f64| {
        let slack = rhs - lhs;
        let bad = !slack.is_finite() || -slack > tol * abs(lhs).max(abs(rhs));
        if bad {
            out.push(Violation { constraint, slack });
        }
    };
    let l = cfg.l as f64;
    let (m, n) = (alloc.m as f64, alloc.n as f64);

    le(
        Constraint::C1,
        m / l * cfg.ts * alloc.p0 + n / l * cfg.ts * alloc.p1,
        cfg.energy(),
    );
    le(
        Constraint::C2,
        m / l * cfg.ts * cfg.pc,
        harvested_energy(alloc, chan, cfg),
    );
    if alloc.m + alloc.n != cfg.l {
        out.push(Violation {
            constraint: Constraint::C3,
            slack: -abs((alloc.m + alloc.n) as f64 - l),
        });
    }
    // C4 holds by type for unsigned counts.

    let k = alloc.m.min(alloc.n);
    let c5_slack = if alloc.eigenvalues.len() != k {
        Some(-abs(alloc.eigenvalues.len() as f64 - k as f64))
    } else if let Some(neg) = alloc.eigenvalues.iter().copied().find(|v| *v < 0.0) {
        Some(neg)
    } else if k > 0 {
        let sum: f64 = alloc.eigenvalues.iter().sum();
        if abs(sum - n) > tol * n {
            Some(-abs(sum - n))
        } else {
            None
        }
    } else {
        None
    };
    if let Some(slack) = c5_slack {
        out.push(Violation {
            constraint: Constraint::C5,
            slack,
        });
    }

    let mut le = |constraint: Constraint, lhs: f64, rhs: f64| {
        let slack = rhs - lhs;
        let bad = !slack.is_finite() || -slack > tol * abs(lhs).max(abs(rhs));
        if bad {
            out.push(Violation { constraint, slack });
        }
    };
    le(Constraint::C6, 0.0, alloc.p0);
    le(Constraint::C6, 0.0, alloc.p1);
    le(Constraint::C6, alloc.p0, cfg.pmax);
    le(Constraint::C6, alloc.p1, cfg.pmax);
    le(Constraint::C7, 0.0, alloc.beta);
    le(Constraint::C7, alloc.beta, 1.0);
    out
}
