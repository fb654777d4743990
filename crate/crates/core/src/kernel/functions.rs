//! Building blocks for objectives and constraints.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::Smooth;
use crate::math::ln;

/// `c . x + c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub coef: Vec<f64>,
    pub c0: f64,
}

impl Affine {
    pub fn new(coef: Vec<f64>, c0: f64) -> Self {
        Self { coef, c0 }
    }

    pub fn constant(dim: usize, c0: f64) -> Self {
        Self {
            coef: vec![0.0; dim],
            c0,
        }
    }

    /// The coordinate `x[i]`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut coef = vec![0.0; dim];
        coef[i] = 1.0;
        Self { coef, c0: 0.0 }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.c0 + self.coef.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }
}

impl Smooth for Affine {
    fn dim(&self) -> usize {
        self.coef.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
    fn gradient(&self, _x: &[f64], g: &mut [f64]) {
        g.copy_from_slice(&self.coef);
    }
    fn hessian(&self, _x: &[f64], h: &mut [f64]) {
        h.fill(0.0);
    }
}

/// `v0 + g . (x - c) + (x - c)^T Q (x - c)`.
///
/// `quad` holds `Q` directly (no one-half factor), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub center: Vec<f64>,
    pub value0: f64,
    pub grad: Vec<f64>,
    pub quad: Vec<f64>,
}

impl Quadratic {
    pub fn new(center: Vec<f64>, value0: f64, grad: Vec<f64>, quad: Vec<f64>) -> Self {
        Self {
            center,
            value0,
            grad,
            quad,
        }
    }
}

impl Smooth for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut v = self.value0;
        for i in 0..n {
            let di = x[i] - self.center[i];
            v += self.grad[i] * di;
            for j in 0..n {
                v += di * self.quad[i * n + j] * (x[j] - self.center[j]);
            }
        }
        v
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.grad[i];
            for j in 0..n {
                let dj = x[j] - self.center[j];
                s += (self.quad[i * n + j] + self.quad[j * n + i]) * dj;
            }
            g[i] = s;
        }
    }
    fn hessian(&self, _x: &[f64], h: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = self.quad[i * n + j] + self.quad[j * n + i];
            }
        }
    }
}

/// `weight * s(x) * ln(c + X(x) / s(x))` with affine `s` and `X`.
///
/// Jointly concave in `(s, X)` on `s > 0`. Undefined (NaN) when `s <= 0` or
/// the log argument is not positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PerspLog {
    pub weight: f64,
    pub s: Affine,
    pub x: Affine,
    pub c: f64,
}

impl PerspLog {
    fn parts(&self, x: &[f64]) -> Option<(f64, f64, f64)> {
        let s = self.s.eval(x);
        let xv = self.x.eval(x);
        if !(s > 0.0) {
            return None;
        }
        let z = self.c + xv / s;
        if !(z > 0.0) {
            return None;
        }
        Some((s, xv, z))
    }
}

impl Smooth for PerspLog {
    fn dim(&self) -> usize {
        self.s.coef.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self.parts(x) {
            Some((s, _, z)) => self.weight * s * ln(z),
            None => f64::NAN,
        }
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let Some((s, xv, z)) = self.parts(x) else {
            g.fill(f64::NAN);
            return;
        };
        let d_x = 1.0 / z;
        let d_s = ln(z) - xv / (s * z);
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = self.weight * (d_s * self.s.coef[i] + d_x * self.x.coef[i]);
        }
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let n = self.dim();
        let Some((s, xv, z)) = self.parts(x) else {
            h.fill(f64::NAN);
            return;
        };
        let sz2 = s * z * z;
        let xx = -1.0 / sz2;
        let sx = xv / (s * sz2);
        let ss = -xv * xv / (s * s * sz2);
        for i in 0..n {
            for j in 0..n {
                let (si, sj) = (self.s.coef[i], self.s.coef[j]);
                let (xi, xj) = (self.x.coef[i], self.x.coef[j]);
                h[i * n + j] =
                    self.weight * (ss * si * sj + sx * (si * xj + xi * sj) + xx * xi * xj);
            }
        }
    }
}

/// Weighted sum of smooth terms.
pub struct Sum {
    dim: usize,
    terms: Vec<(f64, Box<dyn Smooth>)>,
}

impl Sum {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    pub fn with(mut self, weight: f64, term: impl Smooth + 'static) -> Self {
        debug_assert_eq!(term.dim(), self.dim);
        self.terms.push((weight, Box::new(term)));
        self
    }
}

impl Smooth for Sum {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(w, t)| w * t.value(x)).sum()
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        g.fill(0.0);
        let mut tmp = vec![0.0; self.dim];
        for (w, t) in &self.terms {
            t.gradient(x, &mut tmp);
            for (gi, ti) in g.iter_mut().zip(&tmp) {
                *gi += w * ti;
            }
        }
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        h.fill(0.0);
        let mut tmp = vec![0.0; self.dim * self.dim];
        for (w, t) in &self.terms {
            t.hessian(x, &mut tmp);
            for (hi, ti) in h.iter_mut().zip(&tmp) {
                *hi += w * ti;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::check_gradients;

    #[test]
    fn persp_log_gradient_and_hessian() {
        let f = PerspLog {
            weight: 2.0,
            s: Affine::new(vec![1.0, 0.0, 0.5], 0.1),
            x: Affine::new(vec![0.0, 3.0, 1.0], 0.0),
            c: 0.7,
        };
        let x = [0.4, 1.3, 0.2];
        check_gradients(&f, &x).unwrap();
        let mut h = [0.0; 9];
        f.hessian(&x, &mut h);
        let mut fd = [0.0; 9];
        super::super::fd_hessian(&f, &x, &mut fd);
        for i in 0..9 {
            assert!((h[i] - fd[i]).abs() <= 1e-5 * (1.0 + h[i].abs()), "{i}");
        }
    }

    #[test]
    fn persp_log_outside_domain_is_nan() {
        let f = PerspLog {
            weight: 1.0,
            s: Affine::coordinate(1, 0),
            x: Affine::constant(1, 1.0),
            c: -5.0,
        };
        assert!(f.value(&[1.0]).is_nan());
        assert!(f.value(&[-1.0]).is_nan());
        assert!(f.value(&[0.1]).is_finite());
    }

    #[test]
    fn quadratic_matches_expansion() {
        let q = Quadratic::new(
            vec![1.0, 2.0],
            3.0,
            vec![0.5, -1.0],
            vec![2.0, 0.0, 0.0, -1.0],
        );
        let v = q.value(&[2.0, 4.0]);
        assert!((v - (3.0 + 0.5 - 2.0 + 2.0 - 4.0)).abs() < 1e-14);
        check_gradients(&q, &[0.3, 0.9]).unwrap();
    }
}
