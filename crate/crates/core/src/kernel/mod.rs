//! A log-barrier interior-point method for small concave programs, and a
//! monotone bisection routine.
//!
//! Problems are `maximize f(x)` subject to `g_k(x) <= 0` and a box
//! `lower <= x <= upper`, with concave `f`, convex `g_k`, and at most a
//! handful of variables. Functions report `NaN` outside their domain; the
//! line search never accepts such a point.

mod bisect;
pub mod dense;
pub mod functions;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

pub use bisect::bisect_decreasing;

use crate::math::{abs, ln};

/// A twice-differentiable scalar function on `R^dim`.
pub trait Smooth {
    fn dim(&self) -> usize;

    /// Function value, `NaN` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64], g: &mut [f64]);

    /// Row-major Hessian. Defaults to central differences of the gradient.
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        fd_hessian(self, x, h);
    }
}

impl<T: Smooth + ?Sized> Smooth for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        (**self).gradient(x, g)
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        (**self).hessian(x, h)
    }
}

fn fd_step(x: f64) -> f64 {
    1e-6 * abs(x).max(1.0)
}

/// Central-difference Hessian from analytic gradients.
pub fn fd_hessian<F: Smooth + ?Sized>(f: &F, x: &[f64], h: &mut [f64]) {
    let n = f.dim();
    let mut xp = x.to_vec();
    let mut gp = vec![0.0; n];
    let mut gm = vec![0.0; n];
    for j in 0..n {
        let step = fd_step(x[j]);
        xp[j] = x[j] + step;
        f.gradient(&xp, &mut gp);
        xp[j] = x[j] - step;
        f.gradient(&xp, &mut gm);
        xp[j] = x[j];
        for i in 0..n {
            h[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
        }
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (h[i * n + j] + h[j * n + i]);
            h[i * n + j] = s;
            h[j * n + i] = s;
        }
    }
}

/// Gradient component that disagrees with central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientMismatch {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Relative tolerance of [`check_gradients`].
pub const GRADIENT_CHECK_TOL: f64 = 1e-4;

/// Compares the analytic gradient with Richardson-extrapolated central
/// differences (steps `h` and `h/2`, `h = 1e-6 * max(1, |x_i|)`).
/// Components whose stencil leaves the domain are skipped.
pub fn check_gradients<F: Smooth + ?Sized>(f: &F, x: &[f64]) -> Result<(), GradientMismatch> {
    let n = f.dim();
    let f0 = f.value(x);
    let mut g = vec![0.0; n];
    f.gradient(x, &mut g);
    let mut xp = x.to_vec();
    let mut central = |i: usize, step: f64| {
        xp[i] = x[i] + step;
        let fp = f.value(&xp);
        xp[i] = x[i] - step;
        let fm = f.value(&xp);
        xp[i] = x[i];
        let d = (fp - fm) / (2.0 * step);
        if d.is_finite() {
            Some(d)
        } else {
            None
        }
    };
    for i in 0..n {
        let step = fd_step(x[i]);
        let (Some(d1), Some(d2)) = (central(i, step), central(i, 0.5 * step)) else {
            continue;
        };
        let numeric = (4.0 * d2 - d1) / 3.0;
        let scale = abs(g[i]).max(abs(numeric));
        let floor = 1e-7 * (1.0 + abs(f0));
        if abs(g[i] - numeric) > GRADIENT_CHECK_TOL * scale + floor {
            return Err(GradientMismatch {
                index: i,
                analytic: g[i],
                numeric,
            });
        }
    }
    Ok(())
}

/// `maximize objective` subject to `constraints <= 0` and the box.
pub struct ConcaveProgram<'a> {
    pub objective: Box<dyn Smooth + 'a>,
    pub constraints: Vec<Box<dyn Smooth + 'a>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl<'a> ConcaveProgram<'a> {
    pub fn new(objective: impl Smooth + 'a, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            objective: Box::new(objective),
            constraints: Vec::new(),
            lower,
            upper,
        }
    }

    pub fn subject_to(mut self, g: impl Smooth + 'a) -> Self {
        self.constraints.push(Box::new(g));
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelOptions {
    /// Stop once the barrier gap is below `tol * max(1, |f|)`.
    pub tol: f64,
    /// Cap on total Newton steps (phase 1 included).
    pub max_iter: usize,
    /// Barrier parameter growth factor.
    pub mu: f64,
    /// Initial barrier parameter.
    pub tau0: f64,
    /// Compare supplied gradients with finite differences at the start point.
    pub check_gradients: bool,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            mu: 10.0,
            tau0: 1.0,
            check_gradients: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Status {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: Status,
    pub newton_steps: usize,
}

struct Barrier<'p> {
    objective: &'p dyn Smooth,
    constraints: Vec<&'p dyn Smooth>,
    lower: &'p [f64],
    upper: &'p [f64],
    fixed: Vec<bool>,
}

impl Barrier<'_> {
    fn n(&self) -> usize {
        self.lower.len()
    }

    fn terms(&self) -> usize {
        self.constraints.len() + 2 * self.fixed.iter().filter(|f| !**f).count()
    }

    fn inside_box(&self, x: &[f64]) -> bool {
        (0..self.n()).all(|i| self.fixed[i] || (x[i] > self.lower[i] && x[i] < self.upper[i]))
    }

    fn eval(&self, x: &[f64], tau: f64) -> f64 {
        if !self.inside_box(x) {
            return f64::NAN;
        }
        let f = self.objective.value(x);
        let mut phi = -tau * f;
        for g in &self.constraints {
            let v = g.value(x);
            if !(v < 0.0) {
                return f64::NAN;
            }
            phi -= ln(-v);
        }
        for i in 0..self.n() {
            if !self.fixed[i] {
                phi -= ln(x[i] - self.lower[i]) + ln(self.upper[i] - x[i]);
            }
        }
        phi
    }

    fn derivatives(&self, x: &[f64], tau: f64, grad: &mut [f64], hess: &mut [f64]) {
        let n = self.n();
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n * n];
        self.objective.gradient(x, &mut g);
        self.objective.hessian(x, &mut h);
        for i in 0..n {
            grad[i] = -tau * g[i];
        }
        for k in 0..n * n {
            hess[k] = -tau * h[k];
        }
        for c in &self.constraints {
            let v = c.value(x);
            c.gradient(x, &mut g);
            c.hessian(x, &mut h);
            let inv = -1.0 / v;
            for i in 0..n {
                grad[i] += inv * g[i];
                for j in 0..n {
                    hess[i * n + j] += inv * h[i * n + j] + inv * inv * g[i] * g[j];
                }
            }
        }
        for i in 0..n {
            if self.fixed[i] {
                grad[i] = 0.0;
                for j in 0..n {
                    hess[i * n + j] = 0.0;
                    hess[j * n + i] = 0.0;
                }
                hess[i * n + i] = 1.0;
            } else {
                let dl = x[i] - self.lower[i];
                let du = self.upper[i] - x[i];
                grad[i] += -1.0 / dl + 1.0 / du;
                hess[i * n + i] += 1.0 / (dl * dl) + 1.0 / (du * du);
            }
        }
    }

    /// Damped Newton centering. Returns the number of steps taken and stops
    /// early when `stop` fires.
    fn center(
        &self,
        x: &mut [f64],
        tau: f64,
        budget: usize,
        stop: &dyn Fn(&[f64]) -> bool,
    ) -> (usize, bool) {
        let n = self.n();
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n * n];
        let mut steps = 0;
        let mut phi = self.eval(x, tau);
        while steps < budget {
            self.derivatives(x, tau, &mut grad, &mut hess);
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(d) = dense::solve_regularized(&hess, n, &rhs) else {
                return (steps, false);
            };
            let slope: f64 = grad.iter().zip(&d).map(|(g, d)| g * d).sum();
            if !(slope < 0.0) || -slope * 0.5 <= 1e-10 {
                return (steps, false);
            }
            let mut s = 1.0;
            let mut trial = x.to_vec();
            let mut accepted = false;
            for _ in 0..80 {
                for i in 0..n {
                    trial[i] = x[i] + s * d[i];
                }
                let pt = self.eval(&trial, tau);
                if pt.is_finite() && pt <= phi + 0.25 * s * slope {
                    phi = pt;
                    accepted = true;
                    break;
                }
                s *= 0.5;
            }
            steps += 1;
            if !accepted {
                return (steps, false);
            }
            x.copy_from_slice(&trial);
            if stop(x) {
                return (steps, true);
            }
        }
        (steps, false)
    }
}

struct Phase1Objective {
    n: usize,
}

impl Smooth for Phase1Objective {
    fn dim(&self) -> usize {
        self.n + 1
    }
    fn value(&self, x: &[f64]) -> f64 {
        -x[self.n]
    }
    fn gradient(&self, _x: &[f64], g: &mut [f64]) {
        g.fill(0.0);
        g[self.n] = -1.0;
    }
    fn hessian(&self, _x: &[f64], h: &mut [f64]) {
        h.fill(0.0);
    }
}

struct Shifted<'p> {
    inner: &'p dyn Smooth,
    n: usize,
}

impl Smooth for Shifted<'_> {
    fn dim(&self) -> usize {
        self.n + 1
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&x[..self.n]) - x[self.n]
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.inner.gradient(&x[..self.n], &mut g[..self.n]);
        g[self.n] = -1.0;
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let n = self.n;
        let mut inner = vec![0.0; n * n];
        self.inner.hessian(&x[..n], &mut inner);
        h.fill(0.0);
        for i in 0..n {
            for j in 0..n {
                h[i * (n + 1) + j] = inner[i * n + j];
            }
        }
    }
}

fn strictly_feasible(prog: &ConcaveProgram<'_>, x: &[f64]) -> bool {
    prog.objective.value(x).is_finite() && prog.constraints.iter().all(|g| g.value(x) < 0.0)
}

fn in_domain(prog: &ConcaveProgram<'_>, x: &[f64]) -> bool {
    prog.objective.value(x).is_finite() && prog.constraints.iter().all(|g| g.value(x).is_finite())
}

/// Maximizes a concave program from the start point `x0`.
///
/// `x0` is first pulled into the open box and, if some function is
/// undefined there, halved toward the box center. A phase-1 slack problem
/// then restores strict feasibility when needed.
pub fn maximize_concave(prog: &ConcaveProgram<'_>, x0: &[f64], opts: &KernelOptions) -> KernelResult {
    let n = prog.dim();
    let infeasible = |steps| KernelResult {
        x: x0.to_vec(),
        objective: f64::NAN,
        status: Status::Infeasible,
        newton_steps: steps,
    };
    if prog.upper.len() != n || x0.len() != n {
        return infeasible(0);
    }
    if (0..n).any(|i| !(prog.lower[i] <= prog.upper[i])) {
        return infeasible(0);
    }
    let fixed: Vec<bool> = (0..n).map(|i| prog.lower[i] == prog.upper[i]).collect();
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            let (l, u) = (prog.lower[i], prog.upper[i]);
            if fixed[i] {
                l
            } else {
                let m = 1e-6 * (u - l);
                x0[i].clamp(l + m, u - m)
            }
        })
        .collect();
    let center: Vec<f64> = (0..n).map(|i| 0.5 * (prog.lower[i] + prog.upper[i])).collect();
    let mut tries = 0;
    while !in_domain(prog, &x) && tries < 60 {
        for i in 0..n {
            x[i] = center[i] + 0.5 * (x[i] - center[i]);
        }
        tries += 1;
    }
    if !in_domain(prog, &x) {
        return infeasible(0);
    }

    if opts.check_gradients {
        let report = |what: &str, r: Result<(), GradientMismatch>| {
            if let Err(m) = r {
                panic!("gradient self-check failed for {what}: {m:?}");
            }
        };
        report("objective", check_gradients(&*prog.objective, &x));
        for c in &prog.constraints {
            report("constraint", check_gradients(&**c, &x));
        }
    }

    let mut steps = 0;
    if !strictly_feasible(prog, &x) {
        match phase1(prog, &x, &fixed, opts) {
            Some((xf, s)) => {
                x = xf;
                steps += s;
            }
            None => return infeasible(steps),
        }
    }

    let barrier = Barrier {
        objective: &*prog.objective,
        constraints: prog.constraints.iter().map(|c| &**c as &dyn Smooth).collect(),
        lower: &prog.lower,
        upper: &prog.upper,
        fixed,
    };
    let m = barrier.terms() as f64;
    let mut tau = opts.tau0;
    let never = |_: &[f64]| false;
    loop {
        let budget = opts.max_iter.saturating_sub(steps);
        let (s, _) = barrier.center(&mut x, tau, budget, &never);
        steps += s;
        let f = prog.objective.value(&x);
        if m / tau <= opts.tol * abs(f).max(1.0) || m == 0.0 {
            return KernelResult {
                x,
                objective: f,
                status: Status::Optimal,
                newton_steps: steps,
            };
        }
        if steps >= opts.max_iter {
            return KernelResult {
                x,
                objective: f,
                status: Status::MaxIter,
                newton_steps: steps,
            };
        }
        tau *= opts.mu;
    }
}

fn phase1(
    prog: &ConcaveProgram<'_>,
    x: &[f64],
    fixed: &[bool],
    opts: &KernelOptions,
) -> Option<(Vec<f64>, usize)> {
    let n = x.len();
    let gmax = prog
        .constraints
        .iter()
        .map(|g| g.value(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let s0 = gmax + 0.1 * abs(gmax).max(1e-3);
    let span = abs(s0).max(1.0);
    let mut lower = prog.lower.clone();
    let mut upper = prog.upper.clone();
    lower.push(-span - abs(s0));
    upper.push(s0 + 10.0 * span);
    let mut fixed = fixed.to_vec();
    fixed.push(false);

    let objective = Phase1Objective { n };
    let shifted: Vec<Shifted<'_>> = prog
        .constraints
        .iter()
        .map(|c| Shifted { inner: &**c, n })
        .collect();
    let barrier = Barrier {
        objective: &objective,
        constraints: shifted.iter().map(|s| s as &dyn Smooth).collect(),
        lower: &lower,
        upper: &upper,
        fixed,
    };
    let mut z = x.to_vec();
    z.push(s0);
    let done = |z: &[f64]| strictly_feasible(prog, &z[..n]);
    let mut tau = 1.0 / span;
    let mut steps = 0;
    let m = barrier.terms() as f64;
    loop {
        let budget = opts.max_iter.saturating_sub(steps);
        let (s, hit) = barrier.center(&mut z, tau, budget, &done);
        steps += s;
        if hit || done(&z) {
            z.truncate(n);
            return Some((z, steps));
        }
        // Slack optimum certified positive: the constraints are jointly
        // infeasible.
        if z[n] - m / tau > 0.0 || steps >= opts.max_iter || m / tau < 1e-14 * span {
            return None;
        }
        tau *= opts.mu;
    }
}

#[cfg(test)]
mod tests {
    use super::functions::{Affine, PerspLog, Quadratic, Sum};
    use super::*;

    fn opts() -> KernelOptions {
        KernelOptions {
            check_gradients: true,
            ..KernelOptions::default()
        }
    }

    #[test]
    fn unconstrained_parabola() {
        let f = Quadratic::new(vec![1.0], 0.0, vec![0.0], vec![-1.0]);
        let prog = ConcaveProgram::new(f, vec![0.0], vec![2.0]);
        let r = maximize_concave(&prog, &[0.3], &opts());
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[0] - 1.0).abs() < 1e-6);
        assert!(r.objective.abs() < 1e-8);
    }

    #[test]
    fn linear_on_constraint_face() {
        let f = Affine::new(vec![1.0, 1.0], 0.0);
        let prog = ConcaveProgram::new(f, vec![0.0, 0.0], vec![1.0, 1.0])
            .subject_to(Affine::new(vec![1.0, 1.0], -1.0));
        let r = maximize_concave(&prog, &[0.1, 0.1], &opts());
        assert_eq!(r.status, Status::Optimal);
        assert!((r.objective - 1.0).abs() < 1e-7);
    }

    fn log_sum() -> Sum {
        let log1p = |i: usize| PerspLog {
            weight: 1.0,
            s: Affine::constant(2, 1.0),
            x: Affine::coordinate(2, i),
            c: 1.0,
        };
        Sum::new(2).with(1.0, log1p(0)).with(1.0, log1p(1))
    }

    #[test]
    fn symmetric_log_utility() {
        let prog = ConcaveProgram::new(log_sum(), vec![0.0, 0.0], vec![2.0, 2.0])
            .subject_to(Affine::new(vec![1.0, 1.0], -2.0));
        let r = maximize_concave(&prog, &[0.2, 1.5], &opts());
        assert_eq!(r.status, Status::Optimal);
        let mut best = f64::NEG_INFINITY;
        let f = log_sum();
        for i in 0..=2000 {
            let x = i as f64 * 1e-3;
            best = best.max(f.value(&[x, 2.0 - x]));
        }
        assert!(r.objective >= best - 1e-7);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn infeasible_start_recovered_by_phase_one() {
        // x >= 1.5 with start at 0.
        let prog = ConcaveProgram::new(Affine::new(vec![-1.0], 0.0), vec![0.0], vec![2.0])
            .subject_to(Affine::new(vec![-1.0], 1.5));
        let r = maximize_concave(&prog, &[0.0], &opts());
        assert_eq!(r.status, Status::Optimal);
        assert!((r.x[0] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn infeasible_program_reported() {
        let prog = ConcaveProgram::new(Affine::new(vec![1.0], 0.0), vec![0.0], vec![1.0])
            .subject_to(Affine::new(vec![-1.0], 2.0));
        let r = maximize_concave(&prog, &[0.5], &opts());
        assert_eq!(r.status, Status::Infeasible);
    }

    #[test]
    fn fixed_variable_respected() {
        let prog = ConcaveProgram::new(log_sum(), vec![0.0, 0.5], vec![2.0, 0.5])
            .subject_to(Affine::new(vec![1.0, 1.0], -2.0));
        let r = maximize_concave(&prog, &[0.2, 0.5], &opts());
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.x[1], 0.5);
        assert!((r.x[0] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn deterministic_iterates() {
        let prog = ConcaveProgram::new(log_sum(), vec![0.0, 0.0], vec![2.0, 2.0])
            .subject_to(Affine::new(vec![1.0, 1.0], -2.0));
        let a = maximize_concave(&prog, &[0.2, 1.5], &opts());
        let b = maximize_concave(&prog, &[0.2, 1.5], &opts());
        assert_eq!(a, b);
    }

    #[test]
    fn finite_difference_hessian_default() {
        struct Cubic;
        impl Smooth for Cubic {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0] * x[0] * x[0]
            }
            fn gradient(&self, x: &[f64], g: &mut [f64]) {
                g[0] = 3.0 * x[0] * x[0];
            }
        }
        let mut h = [0.0];
        Cubic.hessian(&[2.0], &mut h);
        assert!((h[0] - 12.0).abs() < 1e-6);
    }

    #[test]
    fn wrong_gradient_detected() {
        struct Bad;
        impl Smooth for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0] * x[0]
            }
            fn gradient(&self, x: &[f64], g: &mut [f64]) {
                g[0] = x[0];
            }
        }
        assert!(check_gradients(&Bad, &[3.0]).is_err());
    }
}
