//! Closed-form rates in bits per block.
//!
//! Every function here takes the reflection coefficient, powers and split
//! from an [`Allocation`] as given; nothing is optimized. The relay rate
//! assumes the uniform eigenvalue profile of the optimal mapping matrix; use
//! [`crate::linmap`] for arbitrary profiles.

use crate::math::log2;
use crate::model::{Allocation, ChannelState, NetworkConfig};

/// Linear SINRs of the three links for one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sinrs {
    pub gamma_sd: f64,
    pub gamma_sr: f64,
    pub gamma_rd: f64,
}

pub fn sinrs(beta: f64, p0: f64, p1: f64, chan: &ChannelState) -> Sinrs {
    let bp = beta * p0 * chan.g_sr / chan.noise_bw;
    Sinrs {
        gamma_sd: bp * chan.g_sd,
        gamma_sr: bp * chan.g_sr,
        gamma_rd: p1 * chan.g_rd / chan.noise_bw,
    }
}

/// How the upper bound relates to the exact sum rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundCase {
    /// `R_SR >= R_D0`: the destination side binds in both expressions, the
    /// bound may exceed the exact rate.
    DestinationLimited,
    /// `R_SR < R'_D`: the relay's decoding rate binds in both, bound is tight.
    RelayLimited,
    /// `R'_D <= R_SR < R_D0`: the bound is loose by at most `R_D0 - R_SR`.
    Straddling,
}

/// Relation implied between the upper bound and the exact sum rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BoundRelation {
    GreaterOrEqual,
    Equal,
}

impl BoundCase {
    pub fn relation(self) -> BoundRelation {
        match self {
            BoundCase::RelayLimited => BoundRelation::Equal,
            _ => BoundRelation::GreaterOrEqual,
        }
    }
}

/// All rates of one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateBreakdown {
    pub r_sd: f64,
    pub r_sr: f64,
    /// Rate at the destination combining both phases (`R'_D`).
    pub r_relay: f64,
    /// Relay-phase rate if the destination decoded both phases separately.
    pub r_rd: f64,
    /// `R_SD + R_RD`, the separately-decoded destination rate.
    pub r_relay_upper: f64,
    pub r_sum: f64,
    /// `max(R_SD, min(R_SR, R_SD + R_RD))`.
    pub r_sum_upper: f64,
    pub gamma_sd: f64,
    pub gamma_sr: f64,
    pub gamma_rd: f64,
    pub case_label: BoundCase,
    /// Set when `M = 0 < N`: the relay has nothing to forward and `R'_D` is
    /// taken as zero.
    pub relay_undefined: bool,
}

fn tsw(cfg: &NetworkConfig) -> f64 {
    cfg.ts * cfg.w
}

fn frac(k: usize, cfg: &NetworkConfig) -> f64 {
    k as f64 / cfg.l as f64
}

pub fn rate_sd(alloc: &Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> f64 {
    let s = sinrs(alloc.beta, alloc.p0, alloc.p1, chan);
    frac(alloc.m, cfg) * tsw(cfg) * log2(1.0 + s.gamma_sd)
}

pub fn rate_sr(alloc: &Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> f64 {
    let s = sinrs(alloc.beta, alloc.p0, alloc.p1, chan);
    frac(alloc.m, cfg) * tsw(cfg) * log2(1.0 + s.gamma_sr)
}

/// Two-branch destination rate for given SINRs and split.
pub fn relay_rate_from_sinrs(m: usize, n: usize, gamma_sd: f64, gamma_rd: f64, cfg: &NetworkConfig) -> f64 {
    let c = tsw(cfg);
    if m == 0 {
        return 0.0;
    }
    if m >= n {
        frac(n, cfg) * c * log2(1.0 + gamma_sd + gamma_rd)
            + frac(m - n, cfg) * c * log2(1.0 + gamma_sd)
    } else {
        let ratio = n as f64 / m as f64;
        frac(m, cfg) * c * log2(1.0 + gamma_sd + ratio * gamma_rd)
    }
}

pub fn rate_relay_combined(alloc: &Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> f64 {
    let s = sinrs(alloc.beta, alloc.p0, alloc.p1, chan);
    relay_rate_from_sinrs(alloc.m, alloc.n, s.gamma_sd, s.gamma_rd, cfg)
}

pub fn rate_sum(alloc: &Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> RateBreakdown {
    let s = sinrs(alloc.beta, alloc.p0, alloc.p1, chan);
    let c = tsw(cfg);
    let r_sd = frac(alloc.m, cfg) * c * log2(1.0 + s.gamma_sd);
    let r_sr = frac(alloc.m, cfg) * c * log2(1.0 + s.gamma_sr);
    let r_relay = relay_rate_from_sinrs(alloc.m, alloc.n, s.gamma_sd, s.gamma_rd, cfg);
    let r_rd = frac(alloc.n, cfg) * c * log2(1.0 + s.gamma_rd);
    let r_relay_upper = r_sd + r_rd;
    let r_sum = r_sd.max(r_sr.min(r_relay));
    let r_sum_upper = r_sd.max(r_sr.min(r_relay_upper));
    let mut out = RateBreakdown {
        r_sd,
        r_sr,
        r_relay,
        r_rd,
        r_relay_upper,
        r_sum,
        r_sum_upper,
        gamma_sd: s.gamma_sd,
        gamma_sr: s.gamma_sr,
        gamma_rd: s.gamma_rd,
        case_label: BoundCase::RelayLimited,
        relay_undefined: alloc.m == 0 && alloc.n > 0,
    };
    out.case_label = classify_case(&out);
    out
}

pub fn rate_sum_upper(alloc: &Allocation, chan: &ChannelState, cfg: &NetworkConfig) -> f64 {
    rate_sum(alloc, chan, cfg).r_sum_upper
}

/// Throughput of the equal-time, separately-decoded relay scheme.
pub fn equal_time_reference(chan: &ChannelState, cfg: &NetworkConfig, beta: f64, p0: f64, p1: f64) -> f64 {
    let s = sinrs(beta, p0, p1, chan);
    let inner = s.gamma_sd.max(s.gamma_sr.min(s.gamma_sd + s.gamma_rd));
    0.5 * tsw(cfg) * log2(1.0 + inner)
}

pub fn classify_case(r: &RateBreakdown) -> BoundCase {
    if r.r_sr >= r.r_relay_upper {
        BoundCase::DestinationLimited
    } else if r.r_sr < r.r_relay {
        BoundCase::RelayLimited
    } else {
        BoundCase::Straddling
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::channel_gains;
    use proptest::prelude::*;

    fn table() -> (ChannelState, NetworkConfig) {
        let cfg = NetworkConfig::baseline();
        (channel_gains(&cfg).unwrap(), cfg)
    }

    fn alloc(m: usize, n: usize, p0: f64, p1: f64, beta: f64) -> Allocation {
        Allocation::with_uniform_eigenvalues(m, n, p0, p1, beta)
    }

    #[test]
    fn zero_reflection_gives_zero_rates() {
        let (ch, cfg) = table();
        let a = alloc(10, 10, 20.0, 20.0, 0.0);
        assert_eq!(rate_sd(&a, &ch, &cfg), 0.0);
        assert_eq!(rate_sr(&a, &ch, &cfg), 0.0);
    }

    #[test]
    fn unit_sinr_gives_one_bit_per_symbol() {
        let (mut ch, cfg) = table();
        ch.g_sr = 1e-4;
        ch.g_sd = ch.noise_bw / (ch.g_sr * 20.0);
        let a = alloc(20, 0, 20.0, 0.0, 1.0);
        let r = rate_sd(&a, &ch, &cfg);
        assert!((r - 100.0).abs() < 1e-12);
    }

    #[test]
    fn rate_sd_at_baseline() {
        let (ch, cfg) = table();
        let a = alloc(10, 10, 20.0, 0.0, 0.5);
        let gamma = 0.5 * 20.0 * ch.g_sr * ch.g_sd / 1e-9;
        let expected = 0.5 * 100.0 * libm::log(1.0 + gamma) / core::f64::consts::LN_2;
        assert!((rate_sd(&a, &ch, &cfg) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn symmetric_links_equal_rates() {
        let (mut ch, cfg) = table();
        ch.g_sd = ch.g_sr;
        let a = alloc(7, 13, 15.0, 3.0, 0.8);
        assert_eq!(rate_sd(&a, &ch, &cfg), rate_sr(&a, &ch, &cfg));
    }

    #[test]
    fn no_relay_power_collapses_to_direct() {
        let (ch, cfg) = table();
        for (m, n) in [(15, 5), (5, 15), (10, 10)] {
            let a = alloc(m, n, 20.0, 0.0, 0.9);
            let d = rate_sd(&a, &ch, &cfg);
            assert!((rate_relay_combined(&a, &ch, &cfg) - d).abs() <= 1e-12 * d);
            let r = rate_sum(&a, &ch, &cfg);
            assert_eq!(r.r_sum, r.r_sum_upper);
        }
    }

    #[test]
    fn branches_meet_at_equal_split() {
        let cfg = NetworkConfig { l: 20, ..NetworkConfig::baseline() };
        let a = relay_rate_from_sinrs(10, 10, 2.0, 5.0, &cfg);
        let expected = 0.5 * 100.0 * log2(8.0);
        assert!((a - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_backscatter_phase_flagged() {
        let (ch, cfg) = table();
        let r = rate_sum(&alloc(0, 20, 20.0, 20.0, 0.5), &ch, &cfg);
        assert!(r.relay_undefined);
        assert_eq!(r.r_relay, 0.0);
        assert_eq!(r.r_sum, 0.0);
    }

    #[test]
    fn strong_source_relay_link_is_destination_limited() {
        let (mut ch, cfg) = table();
        ch.g_sr = 1.0;
        let r = rate_sum(&alloc(10, 10, 20.0, 20.0, 0.99), &ch, &cfg);
        assert_eq!(r.case_label, BoundCase::DestinationLimited);
    }

    #[test]
    fn equal_split_matches_reference() {
        let (ch, cfg) = table();
        let a = alloc(10, 10, 20.0, 20.0, 0.9);
        let r = rate_sum(&a, &ch, &cfg);
        let e = equal_time_reference(&ch, &cfg, 0.9, 20.0, 20.0);
        assert!((r.r_sum - e).abs() <= 1e-12 * e);
    }

    #[test]
    fn equal_split_upper_closed_form() {
        let (ch, cfg) = table();
        let a = alloc(10, 10, 20.0, 20.0, 0.9);
        let s = sinrs(0.9, 20.0, 20.0, &ch);
        let inner = s
            .gamma_sd
            .max(s.gamma_sr.min(s.gamma_sd + s.gamma_rd + s.gamma_sd * s.gamma_rd));
        let expected = 50.0 * log2(1.0 + inner);
        let got = rate_sum_upper(&a, &ch, &cfg);
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    proptest! {
        #[test]
        fn sum_is_max_min(m in 0usize..=20, beta in 0.0f64..1.0, p0 in 0.0f64..20.0, p1 in 0.0f64..20.0) {
            let (ch, cfg) = table();
            let a = alloc(m, 20 - m, p0, p1, beta);
            let r = rate_sum(&a, &ch, &cfg);
            let sd = rate_sd(&a, &ch, &cfg);
            let sr = rate_sr(&a, &ch, &cfg);
            let rd = rate_relay_combined(&a, &ch, &cfg);
            prop_assert_eq!(r.r_sum, if sd > sr.min(rd) { sd } else { sr.min(rd) });
            prop_assert!(rd >= sd * (1.0 - 1e-12));
            prop_assert!(r.r_sum_upper >= r.r_sum * (1.0 - 1e-12));
        }

        #[test]
        fn rates_monotone_in_powers(m in 1usize..20, beta in 0.01f64..1.0, p0 in 0.1f64..19.0, p1 in 0.0f64..19.0, d in 0.0f64..1.0) {
            let (ch, cfg) = table();
            let lo = rate_sum(&alloc(m, 20 - m, p0, p1, beta), &ch, &cfg);
            let hi0 = rate_sum(&alloc(m, 20 - m, p0 + d, p1, beta), &ch, &cfg);
            let hi1 = rate_sum(&alloc(m, 20 - m, p0, p1 + d, beta), &ch, &cfg);
            prop_assert!(hi0.r_sum >= lo.r_sum);
            prop_assert!(hi1.r_sum >= lo.r_sum);
        }

        #[test]
        fn rates_scale_with_block_length(m in 1usize..20, beta in 0.01f64..1.0, p0 in 0.1f64..20.0, p1 in 0.0f64..20.0) {
            let (ch, cfg) = table();
            let cfg2 = NetworkConfig { ts: 2.0 * cfg.ts, ..cfg.clone() };
            let a = alloc(m, 20 - m, p0, p1, beta);
            let r1 = rate_sum(&a, &ch, &cfg).r_sum;
            let r2 = rate_sum(&a, &ch, &cfg2).r_sum;
            prop_assert!((r2 - 2.0 * r1).abs() <= 1e-12 * r2.max(1.0));
        }
    }
}
