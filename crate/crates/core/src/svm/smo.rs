//! Soft-margin C-SVM dual solved by sequential minimal optimization.
//!
//! Maximizes `W(a) = sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij` subject to
//! `0 <= a_i <= C` and `sum a_i y_i = 0`. Each step picks the worst KKT
//! violator as the first index and, as its partner, the violator on the
//! opposite side whose pairing gives the largest second-order gain
//! `(E_i - E_j)^2 / eta`; ties go to the earlier index in a seeded
//! permutation. The pair is then optimized analytically. Training stops
//! once the largest violation gap is at most `tol`, which puts every KKT
//! condition within `tol`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::kernel::KernelMatrix;
use super::TrainParams;

/// Curvature floor for pairs with a non-positive second derivative
/// (duplicate points, for instance).
const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    /// `sum_j a_j y_j K_ij - y_i`, i.e. training error without the bias.
    pub errors: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// Dual objective after each accepted update, when requested.
    pub objective_trace: Vec<f64>,
}

impl SmoSolution {
    /// Decision value `f(x_i)` on training point `i`.
    pub fn training_decision(&self, i: usize, y: &[f64]) -> f64 {
        self.errors[i] + y[i] + self.b
    }
}

fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// Rounding can leave a multiplier an ulp or two away from a bound, which
/// keeps it in the violator sets while no step can move it.
fn snap(a: f64, c: f64) -> f64 {
    let eps = 4.0 * f64::EPSILON * c;
    if a <= eps {
        0.0
    } else if a >= c - eps {
        c
    } else {
        a
    }
}

fn objective(alpha: &[f64], y: &[f64], errors: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(y.iter().zip(errors))
        .map(|(&a, (&yi, &e))| 0.5 * a * (1.0 - yi * e))
        .sum()
}

/// Runs SMO on a precomputed kernel. `y` holds +1/-1 labels.
pub fn solve(kernel: &mut KernelMatrix, y: &[f64], params: &TrainParams, trace: bool) -> SmoSolution {
    let n = y.len();
    let c = params.c;
    let mut alpha = vec![0.0; n];
    let mut errors: Vec<f64> = y.iter().map(|&yi| -yi).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));

    let budget = params.max_passes.unwrap_or(10 * n).saturating_mul(n).max(1);
    let mut objective_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        // first index: largest -E over the "can move up" set; the stopping
        // gap uses the smallest -E over the "can move down" set
        let mut first: Option<(usize, f64)> = None;
        let mut low = f64::INFINITY;
        for &t in &order {
            let score = -errors[t];
            if in_up(alpha[t], y[t], c) && first.is_none_or(|(_, s)| score > s) {
                first = Some((t, score));
            }
            if in_low(alpha[t], y[t], c) {
                low = low.min(score);
            }
        }
        let Some((i, up)) = first else {
            converged = true;
            break;
        };
        if up - low <= params.tol {
            converged = true;
            break;
        }
        if iterations >= budget {
            break;
        }
        iterations += 1;

        // partner: the violator whose pairing promises the largest dual gain
        let row_i = kernel.row(i);
        let mut second: Option<(usize, f64)> = None;
        for &t in &order {
            let score = -errors[t];
            if !in_low(alpha[t], y[t], c) || score >= up {
                continue;
            }
            let b = up - score;
            let a = (kernel.diag(i) + kernel.diag(t) - 2.0 * row_i[t]).max(TAU);
            let gain = b * b / a;
            if second.is_none_or(|(_, g)| gain > g) {
                second = Some((t, gain));
            }
        }
        let Some((j, _)) = second else {
            converged = true;
            break;
        };
        let row_j = kernel.row(j);
        let eta = (kernel.diag(i) + kernel.diag(j) - 2.0 * row_i[j]).max(TAU);
        let (ai, aj) = (alpha[i], alpha[j]);
        let (lo, hi) = if y[i] != y[j] {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        let aj_new = snap((aj + y[j] * (errors[i] - errors[j]) / eta).clamp(lo, hi), c);
        let ai_new = snap((ai + y[i] * y[j] * (aj - aj_new)).clamp(0.0, c), c);
        let (di, dj) = (ai_new - ai, aj_new - aj);
        if di == 0.0 && dj == 0.0 {
            // numerically stuck on this pair; the gap test above will not improve
            break;
        }
        alpha[i] = ai_new;
        alpha[j] = aj_new;
        let (si, sj) = (y[i] * di, y[j] * dj);
        for (t, e) in errors.iter_mut().enumerate() {
            *e += si * row_i[t] + sj * row_j[t];
        }
        if trace {
            objective_trace.push(objective(&alpha, y, &errors));
        }
    }

    let b = bias(&alpha, y, &errors, c);
    SmoSolution {
        objective: objective(&alpha, y, &errors),
        alpha,
        b,
        errors,
        iterations,
        converged,
        objective_trace,
    }
}

/// Mean of `-E_t` over free vectors, or the midpoint of the feasible
/// interval when every multiplier sits at a bound.
fn bias(alpha: &[f64], y: &[f64], errors: &[f64], c: f64) -> f64 {
    let free: Vec<f64> = (0..alpha.len())
        .filter(|&t| alpha[t] > 0.0 && alpha[t] < c)
        .map(|t| -errors[t])
        .collect();
    if !free.is_empty() {
        return free.iter().sum::<f64>() / free.len() as f64;
    }
    let mut up = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..alpha.len() {
        if in_up(alpha[t], y[t], c) {
            up = up.max(-errors[t]);
        }
        if in_low(alpha[t], y[t], c) {
            low = low.min(-errors[t]);
        }
    }
    match (up.is_finite(), low.is_finite()) {
        (true, true) => 0.5 * (up + low),
        (true, false) => up,
        (false, true) => low,
        (false, false) => 0.0,
    }
}

/// Largest KKT violation on the training set (0 when all conditions hold).
pub fn max_kkt_violation(alpha: &[f64], y: &[f64], decisions: &[f64], c: f64) -> f64 {
    alpha
        .iter()
        .zip(y.iter().zip(decisions))
        .map(|(&a, (&yi, &f))| {
            let margin = yi * f;
            if a <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if a >= c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Dual objective evaluated from scratch.
pub fn dual_objective(alpha: &[f64], y: &[f64], kernel: &mut KernelMatrix) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        let row = kernel.row(i);
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * row[j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}
