//! Augmented Lagrangian penalty function (ALPF) solver for the joint
//! time-switching / power allocation problem
//!
//! ```text
//! min  W (alpha - 1) sum_n log2(1 + A_n mu_n)
//! s.t. sum mu + S1 = 1,  sum mu_bar + S2 = 1,
//!      w_n (A_n mu_n - 2 alpha / (1 - alpha) B_n mu_bar_n) = 0,
//!      alpha in [alpha_min, alpha_max],  mu, mu_bar, S1, S2 >= 0.
//! ```
//!
//! Each outer iteration approximately minimizes the augmented Lagrangian over
//! the box with a projected-gradient method, then updates penalties and
//! multipliers.

use std::fmt;

use crate::error::{Error, Result};
use crate::tsr::{Allocation, SystemInstance};

/// Reduced problem data. `a[n]` and `b[n]` belong to pair `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlpfProblem {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub bandwidth_hz: f64,
    pub k_subcarriers: usize,
    /// Factor `W` in front of `(alpha - 1) sum log2(...)`.
    pub objective_weight: f64,
    /// Row scaling `w_n` of the pair equality constraints.
    pub pair_weights: Vec<f64>,
}

impl AlpfProblem {
    /// Problem in natural units: `W = B / 2K` and unit pair weights.
    pub fn new(a: Vec<f64>, b: Vec<f64>, bandwidth_hz: f64, k_subcarriers: usize) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::invalid(
                "coefficients",
                format!("need equal nonempty lists, got {} and {}", a.len(), b.len()),
            ));
        }
        if a.iter().chain(&b).any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::invalid("coefficients", "must be finite and nonnegative"));
        }
        if k_subcarriers == 0 || !(bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "bandwidth and K must be positive"));
        }
        let n = a.len();
        Ok(Self {
            a,
            b,
            bandwidth_hz,
            k_subcarriers,
            objective_weight: bandwidth_hz / (2.0 * k_subcarriers as f64),
            pair_weights: vec![1.0; n],
        })
    }

    /// Same feasible set and minimizers, rescaled so the solver sees O(1)
    /// quantities: unit objective weight, and each pair constraint divided by
    /// `max(1, A_n / KN)` (the hop-1 SNR at an equal power split).
    pub fn normalized(mut self) -> Self {
        let share = 1.0 / self.len() as f64;
        self.objective_weight = 1.0;
        self.pair_weights = self.a.iter().map(|&a| 1.0 / (a * share).max(1.0)).collect();
        self
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Bit/s per unit of `(1 - alpha) sum log2(...)`.
    pub fn rate_scale(&self) -> f64 {
        self.bandwidth_hz / (2.0 * self.k_subcarriers as f64)
    }

    /// Achieved rate in bit/s of the hop-1 side, `(1 - alpha) B / 2K sum log2(1 + A mu)`.
    pub fn source_rate(&self, alpha: f64, mu: &[f64]) -> f64 {
        (1.0 - alpha)
            * self.rate_scale()
            * self
                .a
                .iter()
                .zip(mu)
                .map(|(a, m)| (1.0 + a * m.max(0.0)).log2())
                .sum::<f64>()
    }

    /// Rate in bit/s counting each pair at the weaker of its two hops.
    pub fn balanced_rate(&self, alpha: f64, mu: &[f64], mu_bar: &[f64]) -> f64 {
        let t = gain_factor(alpha);
        (1.0 - alpha)
            * self.rate_scale()
            * (0..self.len())
                .map(|n| {
                    let s1 = self.a[n] * mu[n].max(0.0);
                    let s2 = t * self.b[n] * mu_bar[n].max(0.0);
                    (1.0 + s1.min(s2)).log2()
                })
                .sum::<f64>()
    }
}

/// `2 alpha / (1 - alpha)`.
pub fn gain_factor(alpha: f64) -> f64 {
    2.0 * alpha / (1.0 - alpha)
}

/// Primal point `(alpha, mu, mu_bar, S1, S2)`; `mu_bar` in pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub alpha: f64,
    pub mu: Vec<f64>,
    pub mu_bar: Vec<f64>,
    pub s1: f64,
    pub s2: f64,
}

impl Point {
    /// Default start `(0.5, 1/KN, 1/KN, 0.05, 0.05)`.
    pub fn initial(len: usize) -> Self {
        let share = 1.0 / len as f64;
        Self {
            alpha: 0.5,
            mu: vec![share; len],
            mu_bar: vec![share; len],
            s1: 0.05,
            s2: 0.05,
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            alpha: 0.0,
            mu: vec![0.0; self.mu.len()],
            mu_bar: vec![0.0; self.mu_bar.len()],
            s1: 0.0,
            s2: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        2 * self.mu.len() + 3
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat layout `[alpha, mu..., mu_bar..., s1, s2]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.push(self.alpha);
        v.extend_from_slice(&self.mu);
        v.extend_from_slice(&self.mu_bar);
        v.push(self.s1);
        v.push(self.s2);
        v
    }

    pub fn from_slice(v: &[f64]) -> Self {
        assert!(v.len() >= 3 && (v.len() - 3) % 2 == 0, "bad flat point length");
        let n = (v.len() - 3) / 2;
        Self {
            alpha: v[0],
            mu: v[1..1 + n].to_vec(),
            mu_bar: v[1 + n..1 + 2 * n].to_vec(),
            s1: v[1 + 2 * n],
            s2: v[2 + 2 * n],
        }
    }
}

/// One value per constraint: source budget, relay budget, and one per pair.
/// Used for violations, multipliers and penalty parameters alike.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintVector {
    pub source: f64,
    pub relay: f64,
    pub pairs: Vec<f64>,
}

impl ConstraintVector {
    pub fn filled(len: usize, value: f64) -> Self {
        Self {
            source: value,
            relay: value,
            pairs: vec![value; len],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        [self.source, self.relay].into_iter().chain(self.pairs.iter().copied())
    }

    pub fn norm_inf(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            source: f(self.source, other.source),
            relay: f(self.relay, other.relay),
            pairs: self
                .pairs
                .iter()
                .zip(&other.pairs)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        }
    }
}

/// Constraint residuals `C(x)`.
pub fn violation(x: &Point, problem: &AlpfProblem) -> ConstraintVector {
    let t = gain_factor(x.alpha);
    ConstraintVector {
        source: x.mu.iter().sum::<f64>() + x.s1 - 1.0,
        relay: x.mu_bar.iter().sum::<f64>() + x.s2 - 1.0,
        pairs: (0..problem.len())
            .map(|n| {
                problem.pair_weights[n] * (problem.a[n] * x.mu[n] - t * problem.b[n] * x.mu_bar[n])
            })
            .collect(),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha < 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::AlphaDomain(alpha))
    }
}

fn objective(x: &Point, problem: &AlpfProblem) -> f64 {
    problem.objective_weight
        * (x.alpha - 1.0)
        * problem
            .a
            .iter()
            .zip(&x.mu)
            .map(|(a, m)| (1.0 + a * m).log2())
            .sum::<f64>()
}

/// Augmented Lagrangian `f(x) - nu . C(x) + 1/2 sum sigma_i C_i(x)^2`.
pub fn penalty_value(
    x: &Point,
    nu: &ConstraintVector,
    sigma: &ConstraintVector,
    problem: &AlpfProblem,
) -> Result<f64> {
    check_alpha(x.alpha)?;
    let c = violation(x, problem);
    let mut p = objective(x, problem);
    for ((ci, ni), si) in c.iter().zip(nu.iter()).zip(sigma.iter()) {
        p += -ni * ci + 0.5 * si * ci * ci;
    }
    Ok(p)
}

/// Analytic gradient of [`penalty_value`] with respect to every coordinate
/// of the point.
pub fn penalty_gradient(
    x: &Point,
    nu: &ConstraintVector,
    sigma: &ConstraintVector,
    problem: &AlpfProblem,
) -> Result<Point> {
    check_alpha(x.alpha)?;
    let c = violation(x, problem);
    let t = gain_factor(x.alpha);
    let dt = 2.0 / ((1.0 - x.alpha) * (1.0 - x.alpha));
    let w_obj = problem.objective_weight;
    let ln2 = std::f64::consts::LN_2;

    // d/dC_i of the penalty terms
    let r_src = sigma.source * c.source - nu.source;
    let r_rel = sigma.relay * c.relay - nu.relay;

    let mut g = x.zeros_like();
    g.s1 = r_src;
    g.s2 = r_rel;
    g.alpha = w_obj
        * problem
            .a
            .iter()
            .zip(&x.mu)
            .map(|(a, m)| (1.0 + a * m).log2())
            .sum::<f64>();
    for n in 0..problem.len() {
        let (a, b, w) = (problem.a[n], problem.b[n], problem.pair_weights[n]);
        let r = sigma.pairs[n] * c.pairs[n] - nu.pairs[n];
        g.mu[n] = w_obj * (x.alpha - 1.0) * a / ((1.0 + a * x.mu[n]) * ln2) + r_src + r * w * a;
        g.mu_bar[n] = r_rel - r * w * t * b;
        g.alpha -= r * w * dt * b * x.mu_bar[n];
    }
    Ok(g)
}

/// Diagonal of the Gauss-Newton approximation of the penalty Hessian, used
/// as a per-coordinate metric by the projected-gradient steps.
fn curvature_diagonal(
    x: &Point,
    nu: &ConstraintVector,
    sigma: &ConstraintVector,
    problem: &AlpfProblem,
) -> Point {
    let c = violation(x, problem);
    let t = gain_factor(x.alpha);
    let one_m = 1.0 - x.alpha;
    let dt = 2.0 / (one_m * one_m);
    let ddt = 4.0 / (one_m * one_m * one_m);
    let ln2 = std::f64::consts::LN_2;
    let mut h = x.zeros_like();
    h.s1 = sigma.source;
    h.s2 = sigma.relay;
    let mut second = 0.0;
    for n in 0..problem.len() {
        let (a, b, w) = (problem.a[n], problem.b[n], problem.pair_weights[n]);
        let sp = sigma.pairs[n];
        let q = 1.0 + a * x.mu[n];
        h.mu[n] = problem.objective_weight * one_m * a * a / (q * q * ln2) + sigma.source + sp * (w * a).powi(2);
        h.mu_bar[n] = sigma.relay + sp * (w * t * b).powi(2);
        h.alpha += sp * (w * dt * b * x.mu_bar[n]).powi(2);
        second += (sp * c.pairs[n] - nu.pairs[n]) * w * ddt * b * x.mu_bar[n];
    }
    h.alpha += second.abs();
    h
}

/// Box `alpha in [lo, hi]`, everything else nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBounds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for AlphaBounds {
    fn default() -> Self {
        Self {
            lo: 1e-4,
            hi: 1.0 - 1e-4,
        }
    }
}

fn project(v: &mut [f64], bounds: AlphaBounds) {
    v[0] = v[0].clamp(bounds.lo, bounds.hi);
    for x in v[1..].iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

/// Sup-norm of the projected gradient `P(x - g) - x`.
fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: AlphaBounds) -> f64 {
    let mut y: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    project(&mut y, bounds);
    y.iter().zip(x).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

/// Which penalty parameters the multiplier step uses. Penalties are always
/// updated before multipliers within an outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierStep {
    /// `nu <- nu - sigma^(k) C(x^(k+1))`, the penalties the subproblem was
    /// solved with.
    PreviousPenalties,
    /// `nu <- nu - sigma^(k+1) C(x^(k+1))`, the freshly raised penalties.
    /// Tends to overshoot and drive the penalties up without bound.
    UpdatedPenalties,
}

#[derive(Debug, Clone)]
pub struct AlpfOptions {
    /// Outer tolerance on `||C(x)||_inf`.
    pub eps: f64,
    pub max_outer_iters: usize,
    pub max_inner_iters: usize,
    pub alpha_bounds: AlphaBounds,
    pub armijo: f64,
    pub max_halvings: usize,
    /// Inner tolerance is
    /// `clamp(inner_tol_factor * violation, inner_tol_floor, inner_tol_cap)`.
    pub inner_tol_floor: f64,
    pub inner_tol_factor: f64,
    pub inner_tol_cap: f64,
    pub initial_penalty: f64,
    pub multiplier_step: MultiplierStep,
    /// Scale gradient steps by the inverse Gauss-Newton diagonal.
    pub diagonal_scaling: bool,
    pub step_rule: StepRule,
}

/// First trial step of each backtracking line search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// Always start from 1.
    Unit,
    /// Barzilai-Borwein step `s's / s'y` from the previous iterate, 1 on the
    /// first iteration or when curvature is not positive.
    Spectral,
}

impl Default for AlpfOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_outer_iters: 100,
            max_inner_iters: 5000,
            alpha_bounds: AlphaBounds::default(),
            armijo: 1e-4,
            max_halvings: 60,
            inner_tol_floor: 1e-8,
            inner_tol_factor: 0.1,
            inner_tol_cap: 1e-2,
            initial_penalty: 1.0,
            multiplier_step: MultiplierStep::PreviousPenalties,
            diagonal_scaling: true,
            step_rule: StepRule::Spectral,
        }
    }
}

/// Optimizer iterate.
#[derive(Debug, Clone)]
pub struct AlpfState {
    pub x: Point,
    pub nu: ConstraintVector,
    pub sigma: ConstraintVector,
    pub iter: usize,
    /// `||C(x)||_inf` at `x`.
    pub violation: f64,
}

impl AlpfState {
    /// Zero multipliers and uniform penalties at `x`.
    pub fn new(x: Point, problem: &AlpfProblem, initial_penalty: f64) -> Self {
        let violation = violation(&x, problem).norm_inf();
        Self {
            nu: ConstraintVector::filled(problem.len(), 0.0),
            sigma: ConstraintVector::filled(problem.len(), initial_penalty),
            x,
            iter: 0,
            violation,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemOutcome {
    pub x: Point,
    pub iterations: usize,
    pub projected_gradient: f64,
    pub converged: bool,
    /// The line search could not find a decrease; `x` is the best point seen.
    pub line_search_failed: bool,
}

/// Approximately minimize the penalty function over the box, starting from
/// `state.x`, by projected gradient with Armijo backtracking.
pub fn solve_subproblem(
    state: &AlpfState,
    problem: &AlpfProblem,
    options: &AlpfOptions,
    inner_tol: f64,
    max_inner_iters: usize,
) -> Result<SubproblemOutcome> {
    let bounds = options.alpha_bounds;
    let eval = |v: &[f64]| -> Result<(f64, Vec<f64>)> {
        let p = Point::from_slice(v);
        let f = penalty_value(&p, &state.nu, &state.sigma, problem)?;
        let g = penalty_gradient(&p, &state.nu, &state.sigma, problem)?.to_vec();
        Ok((f, g))
    };
    let mut x = state.x.to_vec();
    project(&mut x, bounds);
    let (mut f, mut g) = eval(&x)?;
    let mut pg = projected_gradient_norm(&x, &g, bounds);
    let mut iterations = 0;
    let mut line_search_failed = false;
    let mut first_step = 1.0;

    while pg > inner_tol && iterations < max_inner_iters {
        let scale = if options.diagonal_scaling {
            let h = curvature_diagonal(&Point::from_slice(&x), &state.nu, &state.sigma, problem).to_vec();
            let hmax = h.iter().cloned().fold(0.0, f64::max);
            let floor = (hmax * 1e-12).max(1e-300);
            h.into_iter().map(|v| 1.0 / v.max(floor)).collect()
        } else {
            vec![1.0; x.len()]
        };
        let mut step = first_step;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let mut trial: Vec<f64> = x
                .iter()
                .zip(&g)
                .zip(&scale)
                .map(|((xi, gi), di)| xi - step * di * gi)
                .collect();
            project(&mut trial, bounds);
            let decrease: f64 = g.iter().zip(trial.iter().zip(&x)).map(|(gi, (t, xi))| gi * (t - xi)).sum();
            if decrease >= 0.0 {
                // projected step collapsed onto x
                break;
            }
            let (ft, gt) = eval(&trial)?;
            if ft <= f + options.armijo * decrease {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((xt, ft, gt)) => {
                if options.step_rule == StepRule::Spectral {
                    // curvature measured in the metric of the scaled step
                    let (mut ss, mut sy) = (0.0, 0.0);
                    for i in 0..x.len() {
                        let dx = xt[i] - x[i];
                        ss += dx * dx / scale[i];
                        sy += dx * (gt[i] - g[i]);
                    }
                    first_step = if sy > 0.0 && ss > 0.0 {
                        (ss / sy).clamp(1e-12, 1e12)
                    } else {
                        1.0
                    };
                }
                x = xt;
                f = ft;
                g = gt;
                pg = projected_gradient_norm(&x, &g, bounds);
            }
            None => {
                line_search_failed = true;
                break;
            }
        }
    }
    Ok(SubproblemOutcome {
        x: Point::from_slice(&x),
        iterations,
        projected_gradient: pg,
        converged: pg <= inner_tol,
        line_search_failed,
    })
}

/// `nu_i <- nu_i - sigma_i C_i(x_new)`.
pub fn update_multipliers(nu: &ConstraintVector, sigma: &ConstraintVector, c_new: &ConstraintVector) -> ConstraintVector {
    let step = sigma.zip_map(c_new, |s, c| s * c);
    nu.zip_map(&step, |n, s| n - s)
}

/// Keep `sigma_i` if `|C_i(x_new)| <= |C_i(x_old)| / 4`, otherwise raise it to
/// `max(10 sigma_i, k^2)`.
pub fn update_penalties(
    sigma: &ConstraintVector,
    c_new: &ConstraintVector,
    c_old: &ConstraintVector,
    k: usize,
) -> ConstraintVector {
    let k2 = (k * k) as f64;
    let reduced = c_new.zip_map(c_old, |n, o| if n.abs() <= 0.25 * o.abs() { 1.0 } else { 0.0 });
    sigma.zip_map(&reduced, |s, keep| if keep == 1.0 { s } else { (10.0 * s).max(k2) })
}

/// Result of [`optimize`].
#[derive(Debug, Clone)]
pub struct AlpfReport {
    /// Final primal point, slacks included.
    pub x: Point,
    pub converged: bool,
    pub iterations: usize,
    pub inner_iterations: usize,
    pub final_violation: f64,
    pub final_penalties: ConstraintVector,
    pub final_multipliers: ConstraintVector,
    /// Augmented Lagrangian value at the final point.
    pub final_penalty_value: f64,
    /// Rate in bit/s, each pair counted at its weaker hop.
    pub rate: f64,
    /// `||C||_inf` after every outer iteration.
    pub violation_history: Vec<f64>,
    /// Penalty parameters used by every outer iteration's subproblem.
    pub penalty_history: Vec<ConstraintVector>,
}

impl fmt::Display for AlpfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "converged = {}", self.converged)?;
        writeln!(f, "outer_iterations = {}", self.iterations)?;
        writeln!(f, "inner_iterations = {}", self.inner_iterations)?;
        writeln!(f, "final_violation = {:e}", self.final_violation)?;
        writeln!(f, "final_penalty_value = {}", self.final_penalty_value)?;
        writeln!(
            f,
            "final_penalties = {}",
            self.final_penalties.iter().map(|s| format!("{s:e}")).collect::<Vec<_>>().join(",")
        )?;
        writeln!(f, "rate_bps = {}", self.rate)?;
        write!(f, "alpha = {}", self.x.alpha)
    }
}

/// Run the outer ALPF loop from `init`: subproblem, convergence check,
/// penalty update, multiplier update.
pub fn optimize(problem: &AlpfProblem, init: Point, options: &AlpfOptions) -> Result<AlpfReport> {
    if init.mu.len() != problem.len() || init.mu_bar.len() != problem.len() {
        return Err(Error::invalid("init", "point length differs from problem"));
    }
    let mut state = AlpfState::new(init, problem, options.initial_penalty);
    let mut c_old = violation(&state.x, problem);
    let mut history = Vec::new();
    let mut penalty_history = Vec::new();
    let mut inner_total = 0;
    let mut converged = false;

    while state.iter < options.max_outer_iters {
        let inner_tol = (options.inner_tol_factor * state.violation)
            .min(options.inner_tol_cap)
            .max(options.inner_tol_floor);
        let sub = solve_subproblem(&state, problem, options, inner_tol, options.max_inner_iters)?;
        penalty_history.push(state.sigma.clone());
        inner_total += sub.iterations;
        state.iter += 1;
        state.x = sub.x;
        let c_new = violation(&state.x, problem);
        state.violation = c_new.norm_inf();
        history.push(state.violation);
        if state.violation <= options.eps {
            converged = true;
            break;
        }
        let sigma_new = update_penalties(&state.sigma, &c_new, &c_old, state.iter);
        state.nu = match options.multiplier_step {
            MultiplierStep::PreviousPenalties => update_multipliers(&state.nu, &state.sigma, &c_new),
            MultiplierStep::UpdatedPenalties => update_multipliers(&state.nu, &sigma_new, &c_new),
        };
        state.sigma = sigma_new;
        c_old = c_new;
    }

    let final_penalty_value = penalty_value(&state.x, &state.nu, &state.sigma, problem)?;
    let rate = problem.balanced_rate(state.x.alpha, &state.x.mu, &state.x.mu_bar);
    Ok(AlpfReport {
        x: state.x,
        converged,
        iterations: state.iter,
        inner_iterations: inner_total,
        final_violation: state.violation,
        final_penalties: state.sigma,
        final_multipliers: state.nu,
        final_penalty_value,
        rate,
        violation_history: history,
        penalty_history,
    })
}

/// Strip the slacks and trim every pair to its weaker hop, after scaling
/// either budget back to 1 if the iterate overshoots it. The min-rate is
/// unchanged by the trim and both hops of every pair come out equal.
pub fn balanced_fractions(x: &Point, problem: &AlpfProblem) -> (Vec<f64>, Vec<f64>) {
    let fit = |v: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = v.iter().map(|&m| m.max(0.0)).collect();
        let s: f64 = v.iter().sum();
        if s > 1.0 {
            v.iter().map(|m| m / s).collect()
        } else {
            v
        }
    };
    let mut mu = fit(&x.mu);
    let mut mu_bar = fit(&x.mu_bar);
    let t = gain_factor(x.alpha);
    for n in 0..problem.len() {
        let s1 = problem.a[n] * mu[n];
        let s2 = t * problem.b[n] * mu_bar[n];
        if s1 > s2 {
            mu[n] = if problem.a[n] > 0.0 { s2 / problem.a[n] } else { 0.0 };
        } else if s2 > s1 {
            mu_bar[n] = if t * problem.b[n] > 0.0 { s1 / (t * problem.b[n]) } else { 0.0 };
        }
    }
    (mu, mu_bar)
}

/// Optimize one system instance from the default start. The solver works on
/// the normalized problem; the report's rate is in bit/s.
pub fn optimize_instance(inst: &SystemInstance, options: &AlpfOptions) -> Result<(Allocation, AlpfReport)> {
    let problem = inst.problem()?.normalized();
    let report = optimize(&problem, Point::initial(problem.len()), options)?;
    let (mu, mu_bar) = balanced_fractions(&report.x, &problem);
    let alloc = inst.allocation_from_pairs(report.x.alpha, &mu, &mu_bar);
    Ok((alloc, report))
}
