//! Linear mapping matrices for the relay phase.
//!
//! The relay re-encodes the `M` decoded backscatter symbols into `N` relay
//! symbols through an `N x M` matrix `G`. Only the spectrum of `G G^H`
//! matters for the destination rate; the uniform spectrum is optimal.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::AllocError;
use crate::math::{ln, log2, round, sin_cos, sqrt, LN_2};
use crate::model::{ChannelState, NetworkConfig};
use crate::throughput::sinrs;

/// Largest `min(M, N)` accepted by [`brute_force_eigen_search`].
pub const MAX_SEARCH_DIM: usize = 4;

/// Hermitian tolerance applied before factorizing.
const HERMITIAN_TOL: f64 = 1e-10;

/// Row-major `rows x cols` complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl MappingMatrix {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    /// `G G^H`, `rows x rows`.
    pub fn gram_rows(&self) -> Vec<Complex64> {
        let (r, c) = (self.rows, self.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); r * r];
        for i in 0..r {
            for k in 0..r {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..c {
                    s += self.at(i, j) * self.at(k, j).conj();
                }
                out[i * r + k] = s;
            }
        }
        out
    }

    /// `G^H G`, `cols x cols`.
    pub fn gram_cols(&self) -> Vec<Complex64> {
        let (r, c) = (self.rows, self.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); c * c];
        for j in 0..c {
            for k in 0..c {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..r {
                    s += self.at(i, j).conj() * self.at(i, k);
                }
                out[j * c + k] = s;
            }
        }
        out
    }

    /// `(1/N) tr(G G^H)`.
    pub fn normalized_power(&self) -> f64 {
        let s: f64 = self.entries.iter().map(|z| z.norm_sqr()).sum();
        s / self.rows as f64
    }
}

/// Nonzero eigenvalues of `G G^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenProfile {
    pub values: Vec<f64>,
}

/// Uniform profile `N / min(M, N)`, empty when either count is zero.
pub fn optimal_eigenvalues(m: usize, n: usize) -> EigenProfile {
    let k = m.min(n);
    if k == 0 {
        return EigenProfile { values: Vec::new() };
    }
    EigenProfile {
        values: vec![n as f64 / k as f64; k],
    }
}

fn unitary_dft(size: usize, i: usize, j: usize) -> Complex64 {
    let angle = -2.0 * PI * ((i * j) % size) as f64 / size as f64;
    let (s, c) = sin_cos(angle);
    Complex64::new(c, s) / sqrt(size as f64)
}

/// A mapping matrix with the optimal spectrum, built from DFT rows (when
/// `M >= N`) or scaled DFT columns (when `M < N`).
pub fn build_mapping_matrix(m: usize, n: usize) -> MappingMatrix {
    let mut entries = Vec::with_capacity(m * n);
    if m >= n {
        for i in 0..n {
            for j in 0..m {
                entries.push(unitary_dft(m, i, j));
            }
        }
    } else {
        let scale = sqrt(n as f64 / m as f64);
        for i in 0..n {
            for j in 0..m {
                entries.push(unitary_dft(n, i, j) * scale);
            }
        }
    }
    MappingMatrix {
        rows: n,
        cols: m,
        entries,
    }
}

/// `log2 det(A)` of a Hermitian positive-definite `k x k` matrix via a
/// complex Cholesky factorization. `None` if `A` is not Hermitian within
/// tolerance or not positive definite.
pub fn log2_det_hpd(a: &[Complex64], k: usize) -> Option<f64> {
    if a.len() != k * k {
        return None;
    }
    for i in 0..k {
        for j in 0..=i {
            let d = a[i * k + j] - a[j * k + i].conj();
            let scale = 1.0f64.max(a[i * k + j].norm());
            if d.norm() > HERMITIAN_TOL * scale {
                return None;
            }
        }
    }
    let mut l = vec![Complex64::new(0.0, 0.0); k * k];
    let mut acc = 0.0;
    for j in 0..k {
        let mut d = a[j * k + j].re;
        for p in 0..j {
            d -= l[j * k + p].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = sqrt(d);
        l[j * k + j] = Complex64::new(ljj, 0.0);
        acc += ln(ljj);
        for i in (j + 1)..k {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p].conj();
            }
            l[i * k + j] = s / ljj;
        }
    }
    Some(2.0 * acc / LN_2)
}

/// Stacked destination channel: the `M x M` direct block over `sqrt(P1) h_RD G`.
pub fn destination_channel(
    g: &MappingMatrix,
    beta: f64,
    p0: f64,
    p1: f64,
    chan: &ChannelState,
) -> Vec<Complex64> {
    let (n, m) = (g.rows, g.cols);
    let mut h = vec![Complex64::new(0.0, 0.0); (m + n) * m];
    let direct = sqrt(beta * p0) * sqrt(chan.g_sd) * sqrt(chan.g_sr);
    for i in 0..m {
        h[i * m + i] = Complex64::new(direct, 0.0);
    }
    let relay = sqrt(p1) * sqrt(chan.g_rd);
    for i in 0..n {
        for j in 0..m {
            h[(m + i) * m + j] = g.at(i, j) * relay;
        }
    }
    h
}

/// `I + H H^H / x` (`outer = true`, size `rows`) or `I + H^H H / x` (size `cols`).
pub fn regularized_gram(h: &[Complex64], rows: usize, cols: usize, x: f64, outer: bool) -> Vec<Complex64> {
    let k = if outer { rows } else { cols };
    let mut out = vec![Complex64::new(0.0, 0.0); k * k];
    for i in 0..k {
        for j in 0..k {
            let mut s = Complex64::new(0.0, 0.0);
            if outer {
                for p in 0..cols {
                    s += h[i * cols + p] * h[j * cols + p].conj();
                }
            } else {
                for p in 0..rows {
                    s += h[p * cols + i].conj() * h[p * cols + j];
                }
            }
            out[i * k + j] = s / x;
        }
        out[i * k + i] += 1.0;
    }
    out
}

/// Destination rate from the explicit channel matrix,
/// `(Ts W / L) log2 det(I_M + H^H H / (W sigma^2))`.
pub fn numeric_logdet_rate(
    g: &MappingMatrix,
    beta: f64,
    p0: f64,
    p1: f64,
    chan: &ChannelState,
    cfg: &NetworkConfig,
) -> Result<f64, AllocError> {
    let (n, m) = (g.rows, g.cols);
    if g.entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(AllocError::NonFinite("mapping matrix"));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let h = destination_channel(g, beta, p0, p1, chan);
    if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(AllocError::NonFinite("destination channel"));
    }
    let a = regularized_gram(&h, m + n, m, chan.noise_bw, false);
    let ld = log2_det_hpd(&a, m).ok_or(AllocError::NonFinite("log-det factorization"))?;
    Ok(cfg.ts * cfg.w / cfg.l as f64 * ld)
}

/// Relay-phase gain `(Ts W / L) sum log2(1 + lambda_i gamma_RD / (1 + gamma_SD))`.
pub fn relay_gain(profile: &[f64], gamma_sd: f64, gamma_rd: f64, tsw_per_subframe: f64) -> f64 {
    let q = gamma_rd / (1.0 + gamma_sd);
    profile.iter().map(|l| log2(1.0 + l * q)).sum::<f64>() * tsw_per_subframe
}

/// Grid maximizer of the relay-phase gain over the simplex
/// `{lambda >= 0, sum lambda = n}` in `k` coordinates.
///
/// The step is shrunk so that it divides `n`. Ties keep the
/// lexicographically smallest profile.
pub fn simplex_search(
    k: usize,
    n: usize,
    gamma_sd: f64,
    gamma_rd: f64,
    tsw_per_subframe: f64,
    step: f64,
) -> Result<(EigenProfile, f64), AllocError> {
    if k > MAX_SEARCH_DIM {
        return Err(AllocError::SearchTooLarge(k));
    }
    if k == 0 {
        return Ok((EigenProfile { values: Vec::new() }, 0.0));
    }
    let units = (round(n as f64 / step) as usize).max(1);
    let h = n as f64 / units as f64;
    let mut parts = vec![0usize; k];
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut visit = |parts: &[usize]| {
        let profile: Vec<f64> = parts.iter().map(|&p| p as f64 * h).collect();
        let v = relay_gain(&profile, gamma_sd, gamma_rd, tsw_per_subframe);
        match &best {
            Some((_, bv)) if v <= *bv => {}
            _ => best = Some((parts.to_vec(), v)),
        }
    };
    compositions(&mut parts, 0, units, &mut visit);
    let (parts, v) = best.expect("simplex has at least one point");
    Ok((
        EigenProfile {
            values: parts.iter().map(|&p| p as f64 * h).collect(),
        },
        v,
    ))
}

fn compositions(parts: &mut [usize], idx: usize, remaining: usize, visit: &mut impl FnMut(&[usize])) {
    if idx + 1 == parts.len() {
        parts[idx] = remaining;
        visit(parts);
        return;
    }
    for p in 0..=remaining {
        parts[idx] = p;
        compositions(parts, idx + 1, remaining - p, visit);
    }
}

/// Brute-force eigenvalue search for a concrete allocation.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_eigen_search(
    m: usize,
    n: usize,
    beta: f64,
    p0: f64,
    p1: f64,
    chan: &ChannelState,
    cfg: &NetworkConfig,
    grid_step: f64,
) -> Result<(EigenProfile, f64), AllocError> {
    let s = sinrs(beta, p0, p1, chan);
    let per = cfg.ts * cfg.w / cfg.l as f64;
    simplex_search(m.min(n), n, s.gamma_sd, s.gamma_rd, per, grid_step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::channel_gains;
    use crate::throughput::{rate_sd, relay_rate_from_sinrs};
    use crate::Allocation;

    fn close(a: Complex64, b: f64, tol: f64) -> bool {
        (a - Complex64::new(b, 0.0)).norm() <= tol
    }

    #[test]
    fn profiles() {
        assert_eq!(optimal_eigenvalues(5, 5).values, vec![1.0; 5]);
        assert_eq!(optimal_eigenvalues(8, 4).values, vec![1.0; 4]);
        assert_eq!(optimal_eigenvalues(4, 12).values, vec![3.0; 4]);
        assert!(optimal_eigenvalues(0, 3).values.is_empty());
    }

    #[test]
    fn wide_matrix_has_orthonormal_rows() {
        let g = build_mapping_matrix(3, 2);
        let gg = g.gram_rows();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(gg[i * 2 + j], if i == j { 1.0 } else { 0.0 }, 1e-12));
            }
        }
        assert!((g.normalized_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tall_matrix_has_scaled_orthogonal_columns() {
        let g = build_mapping_matrix(2, 4);
        let gg = g.gram_cols();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(gg[i * 2 + j], if i == j { 2.0 } else { 0.0 }, 1e-12));
            }
        }
        assert!((g.normalized_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_matrix_is_unitary() {
        let g = build_mapping_matrix(4, 4);
        let gg = g.gram_rows();
        for i in 0..4 {
            for j in 0..4 {
                assert!(close(gg[i * 4 + j], if i == j { 1.0 } else { 0.0 }, 1e-12));
            }
        }
    }

    #[test]
    fn scalar_determinant() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let g = build_mapping_matrix(1, 1);
        let (beta, p0, p1) = (0.7, 18.0, 12.0);
        let s = sinrs(beta, p0, p1, &ch);
        let expected = 100.0 / 20.0 * log2(1.0 + s.gamma_sd + s.gamma_rd);
        let got = numeric_logdet_rate(&g, beta, p0, p1, &ch, &cfg).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn no_relay_power_matches_direct_rate() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let g = build_mapping_matrix(6, 3);
        let a = Allocation::with_uniform_eigenvalues(6, 3, 20.0, 0.0, 0.8);
        let got = numeric_logdet_rate(&g, 0.8, 20.0, 0.0, &ch, &cfg).unwrap();
        let expected = rate_sd(&a, &ch, &cfg);
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn logdet_matches_closed_form_both_branches() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        for (m, n) in [(5, 3), (3, 5), (4, 4), (1, 7), (8, 1)] {
            let g = build_mapping_matrix(m, n);
            let got = numeric_logdet_rate(&g, 0.9, 15.0, 17.0, &ch, &cfg).unwrap();
            let s = sinrs(0.9, 15.0, 17.0, &ch);
            let expected = relay_rate_from_sinrs(m, n, s.gamma_sd, s.gamma_rd, &cfg);
            assert!((got - expected).abs() <= 1e-10 * expected, "{m} {n}");
        }
    }

    #[test]
    fn determinant_identity_inner_outer() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let g = build_mapping_matrix(3, 5);
        let h = destination_channel(&g, 0.9, 15.0, 17.0, &ch);
        let inner = log2_det_hpd(&regularized_gram(&h, 8, 3, ch.noise_bw, false), 3).unwrap();
        let outer = log2_det_hpd(&regularized_gram(&h, 8, 3, ch.noise_bw, true), 8).unwrap();
        assert!((inner - outer).abs() <= 1e-9 * inner);
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(2.0, 0.0),
        ];
        assert!(log2_det_hpd(&a, 2).is_none());
    }

    #[test]
    fn single_coordinate_simplex() {
        let (p, _) = simplex_search(1, 7, 1.0, 3.0, 5.0, 0.1).unwrap();
        assert_eq!(p.values, vec![7.0]);
    }

    #[test]
    fn search_guard() {
        assert_eq!(
            simplex_search(5, 10, 1.0, 1.0, 1.0, 0.5),
            Err(AllocError::SearchTooLarge(5))
        );
    }

    #[test]
    fn two_coordinate_search_finds_uniform() {
        let (p, v) = simplex_search(2, 6, 0.5, 40.0, 5.0, 0.05).unwrap();
        assert!((p.values[0] - 3.0).abs() <= 0.05 + 1e-12);
        let uniform = relay_gain(&[3.0, 3.0], 0.5, 40.0, 5.0);
        assert!((v - uniform).abs() <= 1e-12 * uniform);
    }
}
