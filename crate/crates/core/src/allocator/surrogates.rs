//! Convex surrogates of the high time-share subproblem.
//!
//! With `a = P0 (1 - rho)` and `b = P1 (1 - rho)` the budget and rate
//! constraints contain four nonconvex pieces:
//!
//! - `y(rho) = 1 / rho`
//! - `f(rho, b) = b / rho`
//! - `g(rho, a) = Ts W rho log2(A + a k_sr / (1 - rho))`
//! - `w(rho, a) = Ts W (2 rho - 1) log2(B + a k_sd / (1 - rho))`
//!
//! and one concave piece `e(rho, a, b) = Ts W (1 - rho) log2(B + (a k_sd +
//! b k_rd) / (1 - rho))` kept exact. Each nonconvex piece is replaced by a
//! first-order expansion at `(rho_j, a_j, b_j)` plus a curvature term.
//! Variables are ordered `[rho, a, b, t]`.

use alloc::vec;

use super::forms::Forms;
use crate::kernel::functions::{Affine, PerspLog, Quadratic};
use crate::kernel::Smooth;
use crate::math::{log2, LN_2};

pub const DIM: usize = 4;
pub const RHO: usize = 0;
pub const A: usize = 1;
pub const B: usize = 2;
pub const T: usize = 3;

pub fn y(rho: f64) -> f64 {
    1.0 / rho
}

pub fn f(rho: f64, b: f64) -> f64 {
    b / rho
}

pub fn g(forms: &Forms, rho: f64, a: f64) -> f64 {
    forms.tsw * rho * log2(forms.a + a * forms.k_sr / (1.0 - rho))
}

pub fn w(forms: &Forms, rho: f64, a: f64) -> f64 {
    forms.tsw * (2.0 * rho - 1.0) * log2(forms.b + a * forms.k_sd / (1.0 - rho))
}

pub fn e(forms: &Forms, rho: f64, a: f64, b: f64) -> f64 {
    forms.tsw * (1.0 - rho) * log2(forms.b + (a * forms.k_sd + b * forms.k_rd) / (1.0 - rho))
}

/// `e` as a smooth function of `[rho, a, b, t]`.
pub fn e_smooth(forms: &Forms) -> PerspLog {
    PerspLog {
        weight: forms.log2_weight(),
        s: Affine::new(vec![-1.0, 0.0, 0.0, 0.0], 1.0),
        x: Affine::new(vec![0.0, forms.k_sd, forms.k_rd, 0.0], 0.0),
        c: forms.b,
    }
}

/// Expansion point with the values and partial derivatives of `y, f, g, w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogatePoint {
    pub rho_j: f64,
    pub a_j: f64,
    pub b_j: f64,
    pub y: f64,
    pub y_rho: f64,
    pub f: f64,
    pub f_rho: f64,
    pub f_b: f64,
    pub f_rhorho: f64,
    pub g: f64,
    pub g_rho: f64,
    pub g_a: f64,
    pub g_aa: f64,
    pub w: f64,
    pub w_rho: f64,
    pub w_a: f64,
    pub w_aa: f64,
}

impl SurrogatePoint {
    pub fn new(forms: &Forms, rho: f64, a: f64, b: f64) -> Self {
        let c = forms.tsw;
        let om = 1.0 - rho;
        let zg = forms.a + a * forms.k_sr / om;
        let zw = forms.b + a * forms.k_sd / om;
        let (ks, kd) = (forms.k_sr, forms.k_sd);
        Self {
            rho_j: rho,
            a_j: a,
            b_j: b,
            y: 1.0 / rho,
            y_rho: -1.0 / (rho * rho),
            f: b / rho,
            f_rho: -b / (rho * rho),
            f_b: 1.0 / rho,
            f_rhorho: 2.0 * b / (rho * rho * rho),
            g: c * rho * log2(zg),
            g_rho: c * (log2(zg) + rho * a * ks / (om * om * zg * LN_2)),
            g_a: c * rho * ks / (om * zg * LN_2),
            g_aa: -c * rho * ks * ks / (om * om * zg * zg * LN_2),
            w: c * (2.0 * rho - 1.0) * log2(zw),
            w_rho: c * (2.0 * log2(zw) + (2.0 * rho - 1.0) * a * kd / (om * om * zw * LN_2)),
            w_a: c * (2.0 * rho - 1.0) * kd / (om * zw * LN_2),
            w_aa: -c * (2.0 * rho - 1.0) * kd * kd / (om * om * zw * zw * LN_2),
        }
    }
}

/// Surrogate bundle over `[rho, a, b, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogates {
    pub y_lb: Affine,
    pub f_ub: Quadratic,
    pub g_lb: Quadratic,
    pub w_lb: Quadratic,
}

/// Values of `(y, f, g, w)` or of their surrogates at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateValues {
    pub y: f64,
    pub f: f64,
    pub g: f64,
    pub w: f64,
}

impl Surrogates {
    pub fn eval(&self, rho: f64, a: f64, b: f64) -> SurrogateValues {
        let x = [rho, a, b, 0.0];
        SurrogateValues {
            y: self.y_lb.value(&x),
            f: self.f_ub.value(&x),
            g: self.g_lb.value(&x),
            w: self.w_lb.value(&x),
        }
    }
}

pub fn originals(forms: &Forms, rho: f64, a: f64, b: f64) -> SurrogateValues {
    SurrogateValues {
        y: y(rho),
        f: f(rho, b),
        g: g(forms, rho, a),
        w: w(forms, rho, a),
    }
}

fn quad(pt: &SurrogatePoint, value: f64, grad: [f64; DIM], diag: (usize, f64)) -> Quadratic {
    let mut q = vec![0.0; DIM * DIM];
    q[diag.0 * DIM + diag.0] = diag.1;
    Quadratic::new(vec![pt.rho_j, pt.a_j, pt.b_j, 0.0], value, grad.to_vec(), q)
}

pub fn sca_surrogates(pt: &SurrogatePoint) -> Surrogates {
    let y_lb = Affine::new(
        vec![pt.y_rho, 0.0, 0.0, 0.0],
        pt.y - pt.y_rho * pt.rho_j,
    );
    Surrogates {
        y_lb,
        f_ub: quad(pt, pt.f, [pt.f_rho, 0.0, pt.f_b, 0.0], (RHO, pt.f_rhorho)),
        g_lb: quad(pt, pt.g, [pt.g_rho, pt.g_a, 0.0, 0.0], (A, pt.g_aa)),
        w_lb: quad(pt, pt.w, [pt.w_rho, pt.w_a, 0.0, 0.0], (A, pt.w_aa)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::check_gradients;
    use crate::model::{channel_gains, NetworkConfig};

    struct Orig<'f>(&'f Forms, u8);

    impl Smooth for Orig<'_> {
        fn dim(&self) -> usize {
            DIM
        }
        fn value(&self, x: &[f64]) -> f64 {
            match self.1 {
                0 => y(x[RHO]),
                1 => f(x[RHO], x[B]),
                2 => g(self.0, x[RHO], x[A]),
                _ => w(self.0, x[RHO], x[A]),
            }
        }
        fn gradient(&self, x: &[f64], out: &mut [f64]) {
            let pt = SurrogatePoint::new(self.0, x[RHO], x[A], x[B]);
            out.fill(0.0);
            match self.1 {
                0 => out[RHO] = pt.y_rho,
                1 => {
                    out[RHO] = pt.f_rho;
                    out[B] = pt.f_b;
                }
                2 => {
                    out[RHO] = pt.g_rho;
                    out[A] = pt.g_a;
                }
                _ => {
                    out[RHO] = pt.w_rho;
                    out[A] = pt.w_a;
                }
            }
        }
    }

    #[test]
    fn analytic_partials_match_differences() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let forms = Forms::new(&ch, &cfg);
        for which in 0..4 {
            check_gradients(&Orig(&forms, which), &[0.7, 5.0, 3.0, 0.0]).unwrap();
        }
    }

    #[test]
    fn surrogates_touch_at_expansion_point() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let forms = Forms::new(&ch, &cfg);
        let pt = SurrogatePoint::new(&forms, 0.63, 4.0, 2.5);
        let s = sca_surrogates(&pt).eval(0.63, 4.0, 2.5);
        let o = originals(&forms, 0.63, 4.0, 2.5);
        assert!((s.y - o.y).abs() <= 1e-12 * o.y);
        assert!((s.f - o.f).abs() <= 1e-12 * o.f);
        assert!((s.g - o.g).abs() <= 1e-12 * o.g);
        assert!((s.w - o.w).abs() <= 1e-12 * o.w);
    }

    #[test]
    fn e_smooth_matches_closed_form() {
        let cfg = NetworkConfig::baseline();
        let ch = channel_gains(&cfg).unwrap();
        let forms = Forms::new(&ch, &cfg);
        let v = e_smooth(&forms).value(&[0.6, 5.0, 2.0, 0.0]);
        let expected = e(&forms, 0.6, 5.0, 2.0);
        assert!((v - expected).abs() <= 1e-12 * expected);
    }
}
