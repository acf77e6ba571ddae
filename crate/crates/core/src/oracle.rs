//! Reference solver for the reduced problem.
//!
//! For a fixed `alpha` the pair equalities pin `mu_bar_n = c_n mu_n` with
//! `c_n = A_n (1 - alpha) / (2 alpha B_n)`, leaving a concave program
//!
//! ```text
//! max sum log(1 + A_n mu_n)  s.t.  sum mu <= 1,  sum c_n mu_n <= 1,  mu >= 0
//! ```
//!
//! solved by water-filling on the combined budget `(1 - theta) + theta c_n`
//! with a bisection on `theta`. A grid plus golden-section search over
//! `alpha` finishes the job.

use crate::alpf::{gain_factor, AlphaBounds, AlpfProblem};

/// Water-filling for `max sum log(1 + a_n mu_n)` subject to
/// `sum w_n mu_n <= 1`. Entries with `a_n <= 0` or infinite weight get zero.
pub fn weighted_waterfill(a: &[f64], w: &[f64]) -> Vec<f64> {
    let n = a.len();
    // mu_n = (L - f_n)^+ / w_n with floors f_n = w_n / a_n and sum (L - f_n)^+ = 1
    let mut floors: Vec<(usize, f64)> = (0..n)
        .filter(|&i| a[i] > 0.0 && w[i].is_finite() && w[i] > 0.0)
        .map(|i| (i, w[i] / a[i]))
        .collect();
    floors.sort_by(|x, y| x.1.total_cmp(&y.1));
    let mut mu = vec![0.0; n];
    if floors.is_empty() {
        return mu;
    }
    let mut level = 0.0;
    let mut partial = 0.0;
    for (count, &(_, f)) in floors.iter().enumerate() {
        partial += f;
        let candidate = (1.0 + partial) / (count + 1) as f64;
        let next_floor = floors.get(count + 1).map(|p| p.1).unwrap_or(f64::INFINITY);
        if candidate <= next_floor {
            level = candidate;
            break;
        }
    }
    for &(i, f) in &floors {
        if level > f {
            mu[i] = (level - f) / w[i];
        }
    }
    mu
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Best `(mu, mu_bar, rate)` at a fixed time-switching factor.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub mu: Vec<f64>,
    pub mu_bar: Vec<f64>,
    /// bit/s
    pub rate: f64,
    /// Budget weights `c_n` of the relay constraint (`inf` when `B_n = 0`).
    pub relay_cost: Vec<f64>,
    /// Mixing parameter of the two budgets at the optimum.
    pub theta: f64,
}

/// Two-budget water-filling at fixed `alpha`.
pub fn inner_waterfill(alpha: f64, problem: &AlpfProblem) -> InnerSolution {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let t = gain_factor(alpha);
    let a: Vec<f64> = problem.a.clone();
    let cost: Vec<f64> = problem
        .a
        .iter()
        .zip(&problem.b)
        .map(|(&a, &b)| if b > 0.0 { a / (t * b) } else { f64::INFINITY })
        .collect();
    let ones = vec![1.0; a.len()];

    let combined = |theta: f64| -> Vec<f64> {
        let w: Vec<f64> = cost.iter().map(|&c| (1.0 - theta) + theta * c).collect();
        // an infinite relay cost blocks a pair whenever theta > 0
        let w: Vec<f64> = w
            .iter()
            .zip(&cost)
            .map(|(&wi, &c)| if c.is_infinite() { f64::INFINITY } else { wi })
            .collect();
        weighted_waterfill(&a, &w)
    };
    let relay_use = |mu: &[f64]| -> f64 {
        mu.iter()
            .zip(&cost)
            .map(|(&m, &c)| if m > 0.0 { m * c } else { 0.0 })
            .sum()
    };

    let (mut mu, theta) = {
        let mu0 = combined(0.0);
        if relay_use(&mu0) <= 1.0 {
            (mu0, 0.0)
        } else {
            let mu1 = combined(1.0);
            if mu1.iter().sum::<f64>() <= 1.0 {
                (mu1, 1.0)
            } else {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let m = combined(mid);
                    if relay_use(&m) > m.iter().sum::<f64>() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (combined(hi), hi)
            }
        }
    };
    // absorb bisection round-off so both budgets hold exactly
    let excess = dot(&mu, &ones).max(relay_use(&mu));
    if excess > 1.0 {
        for m in mu.iter_mut() {
            *m /= excess;
        }
    }
    let mu_bar: Vec<f64> = mu
        .iter()
        .zip(&cost)
        .map(|(&m, &c)| if m > 0.0 { m * c } else { 0.0 })
        .collect();
    let rate = problem.source_rate(alpha, &mu);
    InnerSolution {
        mu,
        mu_bar,
        rate,
        relay_cost: cost,
        theta,
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub alpha_star: f64,
    pub mu_star: Vec<f64>,
    pub mu_bar_star: Vec<f64>,
    /// bit/s
    pub rate_star: f64,
    /// `(alpha, best rate at alpha)` over the search grid.
    pub alpha_grid_profile: Vec<(f64, f64)>,
}

pub const DEFAULT_GRID_POINTS: usize = 199;
pub const DEFAULT_REFINE_TOL: f64 = 1e-6;

/// Grid search over `alpha` followed by golden-section refinement around the
/// best grid point, down to a bracket of width at most `refine_tol * alpha`.
pub fn solve(problem: &AlpfProblem, grid_points: usize, refine_tol: f64) -> OracleSolution {
    solve_within(problem, grid_points, refine_tol, AlphaBounds::default())
}

pub fn solve_within(
    problem: &AlpfProblem,
    grid_points: usize,
    refine_tol: f64,
    bounds: AlphaBounds,
) -> OracleSolution {
    assert!(grid_points >= 8, "need at least 8 grid points");
    let rate_at = |alpha: f64| inner_waterfill(alpha, problem).rate;
    let step = (bounds.hi - bounds.lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| if i + 1 == grid_points { bounds.hi } else { bounds.lo + step * i as f64 })
        .collect();
    let profile: Vec<(f64, f64)> = grid.iter().map(|&al| (al, rate_at(al))).collect();
    let best_idx = profile
        .iter()
        .enumerate()
        .fold(0, |b, (i, p)| if p.1 > profile[b].1 { i } else { b });

    let mut lo = grid[best_idx.saturating_sub(1)];
    let mut hi = grid[(best_idx + 1).min(grid_points - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = rate_at(x1);
    let mut f2 = rate_at(x2);
    // width relative to alpha, so small optima are resolved as finely as large ones
    let width = |lo: f64| (refine_tol * lo.min(1.0)).max(1e-15);
    while hi - lo > width(lo) {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = rate_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = rate_at(x2);
        }
    }
    let mut best_alpha = profile[best_idx].0;
    let mut best_rate = profile[best_idx].1;
    for (al, r) in [(x1, f1), (x2, f2)] {
        if r > best_rate {
            best_alpha = al;
            best_rate = r;
        }
    }
    let inner = inner_waterfill(best_alpha, problem);
    OracleSolution {
        alpha_star: best_alpha,
        mu_star: inner.mu,
        mu_bar_star: inner.mu_bar,
        rate_star: inner.rate,
        alpha_grid_profile: profile,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(a: Vec<f64>, b: Vec<f64>) -> AlpfProblem {
        AlpfProblem::new(a, b, 1000.0, 1).unwrap()
    }

    /// Textbook water-filling by bisection on the water level.
    fn bisection_waterfill(a: &[f64]) -> Vec<f64> {
        let fill = |level: f64| -> Vec<f64> {
            a.iter().map(|&g| if g > 0.0 { (level - 1.0 / g).max(0.0) } else { 0.0 }).collect()
        };
        let (mut lo, mut hi) = (0.0, 1e12);
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if fill(mid).iter().sum::<f64>() > 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        fill(0.5 * (lo + hi))
    }

    #[test]
    fn single_subchannel_closed_form() {
        for (a, b, alpha) in [(4.0, 1.0, 0.3), (4.0, 1.0, 0.9), (1.0, 50.0, 0.01)] {
            let p = problem(vec![a], vec![b]);
            let s = inner_waterfill(alpha, &p);
            let c = a * (1.0 - alpha) / (2.0 * alpha * b);
            let mu = 1f64.min(1.0 / c);
            assert!((s.mu[0] - mu).abs() < 1e-12, "{} vs {mu}", s.mu[0]);
            assert!((s.mu_bar[0] - c * mu).abs() < 1e-12);
            let rate = (1.0 - alpha) * 1000.0 / 2.0 * (1.0 + a * mu).log2();
            assert!((s.rate - rate).abs() < 1e-9);
        }
    }

    #[test]
    fn slack_relay_budget_is_classic_waterfilling() {
        let a = vec![5.0, 2.0, 0.4, 0.05];
        // huge B makes every c_n tiny
        let p = problem(a.clone(), vec![1e9; 4]);
        let s = inner_waterfill(0.5, &p);
        let reference = bisection_waterfill(&a);
        for (x, y) in s.mu.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        assert_eq!(s.theta, 0.0);
    }

    #[test]
    fn kkt_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.random_range(1..7);
            let a: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-1.0..3.0))).collect();
            let b: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-1.0..3.0))).collect();
            let alpha = rng.random_range(0.01..0.99);
            let p = problem(a.clone(), b);
            let s = inner_waterfill(alpha, &p);
            let sum_mu: f64 = s.mu.iter().sum();
            let sum_bar: f64 = s.mu_bar.iter().sum();
            assert!(sum_mu <= 1.0 + 1e-9 && sum_bar <= 1.0 + 1e-9);
            assert!(s.mu.iter().all(|&m| m >= 0.0));
            let w: Vec<f64> = s.relay_cost.iter().map(|&c| (1.0 - s.theta) + s.theta * c).collect();
            let marginal: Vec<f64> = (0..n).map(|i| a[i] / ((1.0 + a[i] * s.mu[i]) * w[i])).collect();
            let water = (0..n)
                .filter(|&i| s.mu[i] > 0.0)
                .map(|i| marginal[i])
                .fold(f64::NAN, f64::max);
            for i in 0..n {
                if s.mu[i] > 0.0 {
                    assert!((marginal[i] - water).abs() <= 1e-8 * water, "{marginal:?}");
                } else {
                    assert!(marginal[i] <= water * (1.0 + 1e-8));
                }
            }
            // pair SNRs balance by construction
            let t = gain_factor(alpha);
            for i in 0..n {
                let hop2 = t * p.b[i] * s.mu_bar[i];
                assert!((a[i] * s.mu[i] - hop2).abs() <= 1e-9 * (1.0 + hop2));
            }
            // at least one budget is tight
            assert!((sum_mu - 1.0).abs() < 1e-9 || (sum_bar - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_feasible_points_do_not_beat_waterfill() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = problem(vec![8.0, 3.0, 0.7], vec![2.0, 0.6, 5.0]);
        let alpha = 0.4;
        let s = inner_waterfill(alpha, &p);
        let c = &s.relay_cost;
        for _ in 0..100_000 {
            let raw: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let scale = raw.iter().sum::<f64>().max(dot(&raw, c)) / rng.random_range(0.5..1.0f64);
            let mu: Vec<f64> = raw.iter().map(|x| x / scale).collect();
            assert!(p.source_rate(alpha, &mu) <= s.rate + 1e-9);
        }
    }

    #[test]
    fn zero_gains_give_zero_rate() {
        let p = problem(vec![0.0, 0.0], vec![1.0, 1.0]);
        let s = inner_waterfill(0.5, &p);
        assert_eq!(s.rate, 0.0);
        assert_eq!(s.mu, vec![0.0, 0.0]);
    }

    #[test]
    fn equal_coefficients_give_one_third() {
        for a in [0.5, 1.0, 5.0] {
            let p = problem(vec![a], vec![a]);
            let s = solve(&p, DEFAULT_GRID_POINTS, 1e-6);
            assert!((s.alpha_star - 1.0 / 3.0).abs() < 2e-6, "A={a}: {}", s.alpha_star);
            assert!((s.mu_star[0] - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn cheap_relay_pushes_alpha_down() {
        let mut last = 1.0;
        for b in [1e1, 1e2, 1e3, 1e6] {
            let s = solve(&problem(vec![1.0], vec![b]), DEFAULT_GRID_POINTS, 1e-7);
            assert!(s.alpha_star < last, "B={b}: {} vs {last}", s.alpha_star);
            last = s.alpha_star;
        }
        // at the lower clamp 1e-4 once B is large enough
        assert!(last < 2e-4, "{last}");
    }

    #[test]
    fn profile_is_unimodal_for_single_pair() {
        let s = solve(&problem(vec![3.0], vec![2.0]), 64, 1e-6);
        let rates: Vec<f64> = s.alpha_grid_profile.iter().map(|p| p.1).collect();
        let peak = rates.iter().enumerate().fold(0, |b, (i, &r)| if r > rates[b] { i } else { b });
        assert!(rates[..=peak].windows(2).all(|w| w[0] <= w[1]));
        assert!(rates[peak..].windows(2).all(|w| w[0] >= w[1]));
    }
}
