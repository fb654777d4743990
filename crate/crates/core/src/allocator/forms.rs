//! Rates with the optimal reflection coefficient substituted, as functions
//! of a continuous time share `rho` and the two HAP powers.

use crate::math::{log2, LN_2};
use crate::model::{feasibility_constants, ChannelState, NetworkConfig};

/// Constants shared by every reparameterized rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forms {
    /// `g_sr^2 / (W sigma^2)`
    pub k_sr: f64,
    /// `g_sr g_sd / (W sigma^2)`
    pub k_sd: f64,
    /// `g_rd / (W sigma^2)`
    pub k_rd: f64,
    pub a: f64,
    pub b: f64,
    /// Smallest `P0` meeting the circuit-power requirement.
    pub p0_min: f64,
    /// `Ts W`
    pub tsw: f64,
    pub p: f64,
    pub pmax: f64,
    pub pc: f64,
    pub eta: f64,
    pub g_sr: f64,
    pub l: usize,
}

impl Forms {
    pub fn new(chan: &ChannelState, cfg: &NetworkConfig) -> Self {
        let k = feasibility_constants(chan, cfg);
        Self {
            k_sr: chan.g_sr * chan.g_sr / chan.noise_bw,
            k_sd: chan.g_sr * chan.g_sd / chan.noise_bw,
            k_rd: chan.g_rd / chan.noise_bw,
            a: k.a,
            b: k.b,
            p0_min: cfg.pc / (cfg.eta * chan.g_sr),
            tsw: cfg.ts * cfg.w,
            p: cfg.p,
            pmax: cfg.pmax,
            pc: cfg.pc,
            eta: cfg.eta,
            g_sr: chan.g_sr,
            l: cfg.l,
        }
    }

    /// Weight turning a natural log into `Ts W log2`.
    pub fn log2_weight(&self) -> f64 {
        self.tsw / LN_2
    }

    pub fn beta(&self, p0: f64) -> f64 {
        1.0 - self.pc / (self.eta * p0 * self.g_sr)
    }

    pub fn r_sr(&self, rho: f64, p0: f64) -> f64 {
        self.tsw * rho * log2(self.a + p0 * self.k_sr)
    }

    pub fn r_sd(&self, rho: f64, p0: f64) -> f64 {
        self.tsw * rho * log2(self.b + p0 * self.k_sd)
    }

    /// Destination rate; `rho >= 1/2` corresponds to `M >= N`.
    pub fn r_d(&self, rho: f64, p0: f64, p1: f64) -> f64 {
        let direct = self.b + p0 * self.k_sd;
        if rho >= 0.5 {
            self.tsw * (1.0 - rho) * log2(direct + p1 * self.k_rd)
                + self.tsw * (2.0 * rho - 1.0) * log2(direct)
        } else if rho > 0.0 {
            self.tsw * rho * log2(direct + (1.0 - rho) * p1 * self.k_rd / rho)
        } else {
            0.0
        }
    }

    /// `min(R_SR, R_D)`, the objective once the direct link is dominated.
    pub fn t_case1(&self, rho: f64, p0: f64, p1: f64) -> f64 {
        self.r_sr(rho, p0).min(self.r_d(rho, p0, p1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{channel_gains, Allocation};
    use crate::throughput::rate_sum;

    #[test]
    fn integer_split_matches_throughput_module() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let f = Forms::new(&ch, &cfg);
        for m in 1..20 {
            let (p0, p1) = (17.0, 9.0);
            let a = Allocation::with_uniform_eigenvalues(m, 20 - m, p0, p1, f.beta(p0));
            let r = rate_sum(&a, &ch, &cfg);
            let rho = m as f64 / 20.0;
            assert!((f.r_sr(rho, p0) - r.r_sr).abs() <= 1e-9 * r.r_sr);
            assert!((f.r_sd(rho, p0) - r.r_sd).abs() <= 1e-9 * r.r_sd);
            assert!((f.r_d(rho, p0, p1) - r.r_relay).abs() <= 1e-9 * r.r_relay, "{m}");
        }
    }

    #[test]
    fn circuit_floor_gives_zero_sinr() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let f = Forms::new(&ch, &cfg);
        assert!((f.a + f.p0_min * f.k_sr - 1.0).abs() < 1e-9);
        assert!((f.b + f.p0_min * f.k_sd - 1.0).abs() < 1e-9);
        assert!(f.beta(f.p0_min).abs() < 1e-12);
    }
}
