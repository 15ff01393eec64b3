//! Inexact augmented Lagrangian solver for the group-sparse regression
//! problem.
//!
//! The constrained form splits the regression matrix into `C` (carrying the
//! group sparsity) and an auxiliary copy `D` (carrying the least-squares
//! fit), tied by multipliers `P` and a growing penalty `mu`:
//!
//! ```text
//! minimize ||L~ - D^T X~||_F^2 + lambda * sum_i ||C_i||_F   s.t. D_i = C_i
//! ```
//!
//! One iteration:
//! 1. `D <- (mu*I + 2 X~ X~^T)^{-1} (2 X~ L~^T + P + mu*C)`;
//! 2. per-group radial soft threshold of `G = D - P/mu` at
//!    `tau = d_(kappa+1)`, the (kappa+1)-th largest group norm of `G`
//!    (`tau = 0` when `kappa = K`), which keeps at most `kappa` groups and
//!    fixes the effective weight `lambda = mu * tau` for this iteration;
//! 3. `P <- P + mu*(C - D)`, `mu <- min(rho*mu, mu_max)`;
//! 4. stop when `max|C - D| < epsilon`.
//!
//! The sparsity weight is never a user hyper-parameter; step 2 derives it
//! from the requested group count each iteration.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::{ridge_solve_direct, ridge_solve_reduced};
use crate::problem::{AugmentedProblem, ObjectiveBreakdown};

/// Tunable knobs of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    /// Number of groups allowed to survive, in `[1, K]`.
    pub kappa: usize,
    /// Initial penalty weight, > 0.
    pub mu0: f64,
    /// Penalty growth factor, > 1.
    pub rho: f64,
    /// Penalty ceiling.
    pub mu_max: f64,
    /// Convergence tolerance on `max|C - D|`.
    pub epsilon: f64,
    /// Iteration cap.
    pub max_iter: usize,
}

impl SolverOptions {
    pub fn new(kappa: usize) -> Self {
        Self {
            kappa,
            mu0: 0.1,
            rho: 1.2,
            mu_max: 1e6,
            epsilon: 1e-6,
            max_iter: 500,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.kappa == 0 || self.kappa > k {
            return Err(Error::InvalidInput(format!(
                "kappa: must be in [1, {k}], got {}",
                self.kappa
            )));
        }
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "mu0: must be > 0, got {}",
                self.mu0
            )));
        }
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return Err(Error::InvalidInput(format!(
                "rho: must be > 1, got {}",
                self.rho
            )));
        }
        if !(self.mu_max.is_finite() && self.mu_max >= self.mu0) {
            return Err(Error::InvalidInput(format!(
                "mu_max: must be >= mu0 ({}), got {}",
                self.mu0, self.mu_max
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "epsilon: must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter: must be >= 1".into()));
        }
        Ok(())
    }
}

/// Mutable iteration state: the `(C, D, P, mu)` quadruple.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub c: Array2<f64>,
    pub d: Array2<f64>,
    pub p: Array2<f64>,
    pub mu: f64,
    pub iter: usize,
    /// Effective sparsity weight of the latest C-update, `mu * d_(kappa+1)`.
    pub lambda_eff: f64,
}

impl SolverState {
    /// Zero-initialized state (C = 0, P = 0, mu = mu0).
    pub fn new(problem: &AugmentedProblem, opts: &SolverOptions) -> Self {
        let shape = (problem.k() * problem.d(), problem.c());
        Self {
            c: Array2::zeros(shape),
            d: Array2::zeros(shape),
            p: Array2::zeros(shape),
            mu: opts.mu0,
            iter: 0,
            lambda_eff: 0.0,
        }
    }
}

/// Solver output: the converged regression matrix plus diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub c_hat: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `max|C - D|` after each iteration.
    pub feasibility_history: Vec<f64>,
    /// Objective components after each iteration.
    pub objective_history: Vec<ObjectiveBreakdown>,
    /// Groups with a nonzero block in `c_hat`, ascending.
    pub selected_groups: Vec<usize>,
    /// Effective sparsity weight at the final iteration.
    pub lambda_eff: f64,
}

/// Frobenius norm of each `d`-row block of a `(K*d) x C` matrix.
pub fn group_norms(m: &ArrayView2<f64>, d: usize) -> Vec<f64> {
    let k = m.nrows() / d;
    (0..k)
        .map(|i| {
            m.slice(ndarray::s![i * d..(i + 1) * d, ..])
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// The (kappa+1)-th largest value of `norms`, which the C-update uses as its
/// shrinkage radius; zero when `kappa >= K` so that no shrinkage occurs.
pub fn kappa_threshold(norms: &[f64], kappa: usize) -> f64 {
    if kappa >= norms.len() {
        return 0.0;
    }
    let mut sorted = norms.to_vec();
    // descending, stable; NaN cannot appear (norms are sums of squares)
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite norms"));
    sorted[kappa]
}

/// Radial soft threshold of each group block: blocks with norm <= tau are
/// zeroed, the rest shrink by `(norm - tau) / norm`.
pub fn group_soft_threshold(g: &ArrayView2<f64>, d: usize, tau: f64) -> Array2<f64> {
    let mut out = Array2::<f64>::zeros(g.raw_dim());
    let norms = group_norms(g, d);
    for (i, &ni) in norms.iter().enumerate() {
        if tau < ni {
            let scale = (ni - tau) / ni;
            let src = g.slice(ndarray::s![i * d..(i + 1) * d, ..]);
            out.slice_mut(ndarray::s![i * d..(i + 1) * d, ..])
                .assign(&src.mapv(|v| v * scale));
        }
    }
    out
}

/// Cached per-problem matrices for the D-update.
struct RidgeCache {
    /// `X~^T X~`, used by the reduced route.
    gram: Option<Array2<f64>>,
    /// `2 X~ L~^T`.
    xlt2: Array2<f64>,
    reduced: bool,
}

impl RidgeCache {
    fn new(problem: &AugmentedProblem) -> Self {
        let x = problem.x_tilde();
        let reduced = x.nrows() > x.ncols();
        Self {
            gram: reduced.then(|| x.t().dot(x)),
            xlt2: x.dot(&problem.l_tilde().t()) * 2.0,
            reduced,
        }
    }
}

fn update_d_with_cache(
    state: &SolverState,
    problem: &AugmentedProblem,
    cache: &RidgeCache,
) -> Result<Array2<f64>> {
    let rhs = &cache.xlt2 + &state.p + &state.c.mapv(|v| v * state.mu);
    if cache.reduced {
        ridge_solve_reduced(
            &problem.x_tilde().view(),
            &cache.gram.as_ref().expect("reduced cache").view(),
            &rhs.view(),
            state.mu,
        )
    } else {
        ridge_solve_direct(&problem.x_tilde().view(), &rhs.view(), state.mu)
    }
}

/// One D-update: the unique minimizer of the quadratic subproblem at the
/// current `(C, P, mu)`. Picks the reduced route when `K*d` exceeds the
/// sample count; both routes agree to rounding.
pub fn update_d(state: &SolverState, problem: &AugmentedProblem) -> Result<Array2<f64>> {
    update_d_with_cache(state, problem, &RidgeCache::new(problem))
}

/// One C-update: computes the per-group norms of `D - P/mu`, derives the
/// threshold from `kappa`, and applies the radial shrinkage. Returns the new
/// C and the effective weight `lambda = mu * tau`.
pub fn update_c(state: &SolverState, kappa: usize, d_per_group: usize) -> (Array2<f64>, f64) {
    let g = &state.d - &state.p.mapv(|v| v / state.mu);
    let norms = group_norms(&g.view(), d_per_group);
    let tau = kappa_threshold(&norms, kappa);
    let c = group_soft_threshold(&g.view(), d_per_group, tau);
    (c, state.mu * tau)
}

/// Multiplier and penalty step: `P += mu*(C - D)`, `mu <- min(rho*mu, mu_max)`.
pub fn update_multipliers(state: &mut SolverState, opts: &SolverOptions) {
    let scaled = (&state.c - &state.d).mapv(|v| v * state.mu);
    state.p += &scaled;
    state.mu = (state.mu * opts.rho).min(opts.mu_max);
}

/// Max absolute entry of `C - D`.
pub fn feasibility(state: &SolverState) -> f64 {
    state
        .c
        .iter()
        .zip(state.d.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Convergence test: `max|C - D| < epsilon`.
pub fn converged(state: &SolverState, epsilon: f64) -> bool {
    feasibility(state) < epsilon
}

/// Run the full iteration until convergence or the iteration cap.
///
/// Hitting the cap is not an error: the result comes back with
/// `converged = false`. A non-finite intermediate is a hard error naming the
/// iteration.
pub fn solve(problem: &AugmentedProblem, opts: &SolverOptions) -> Result<SolveResult> {
    opts.validate(problem.k())?;
    let d_per_group = problem.d();
    let cache = RidgeCache::new(problem);
    let mut state = SolverState::new(problem, opts);
    let mut feasibility_history = Vec::new();
    let mut objective_history = Vec::new();
    let mut did_converge = false;

    while state.iter < opts.max_iter {
        state.iter += 1;
        state.d = update_d_with_cache(&state, problem, &cache)?;
        let (c, lambda_eff) = update_c(&state, opts.kappa, d_per_group);
        state.c = c;
        state.lambda_eff = lambda_eff;
        update_multipliers(&mut state, opts);

        let feas = feasibility(&state);
        if !feas.is_finite() {
            return Err(Error::SolverDiverged {
                iteration: state.iter,
            });
        }
        feasibility_history.push(feas);
        objective_history.push(problem.breakdown(&state.c.view())?);
        if feas < opts.epsilon {
            did_converge = true;
            break;
        }
    }

    let final_norms = group_norms(&state.c.view(), d_per_group);
    let selected_groups = (0..problem.k()).filter(|&i| final_norms[i] > 0.0).collect();
    Ok(SolveResult {
        c_hat: state.c,
        iterations: state.iter,
        converged: did_converge,
        feasibility_history,
        objective_history,
        selected_groups,
        lambda_eff: state.lambda_eff,
    })
}
