//! Multistart minimization of `A_M` over pure states.
//!
//! A state is parameterized by a real vector `(a_0..a_{2S}, b_0..b_{2S})`
//! with `psi_m` proportional to `a_m + i b_m`. The objective
//! `A_M(x / |x|)` is invariant under scaling and global phase, so descent
//! runs unconstrained. A start that never reaches zero is evidence of
//! nonexistence, not a proof.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::majorana::{state_constellation, Constellation};
use crate::multipole::{
    check_order, cumulative_pure, tensor_shell, unpolarization_order, TensorShell,
};
use crate::spinstate::SpinState;

/// Threshold below which a search value counts as zero.
pub const SEARCH_EPS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    #[serde(rename = "S")]
    pub spin: HalfInt,
    #[serde(rename = "M")]
    pub order: i64,
    pub multistarts: usize,
    pub max_iters: usize,
    pub tol_value: f64,
    pub tol_grad: f64,
    pub rng_seed: u64,
    pub optimizer: String,
}

impl SearchConfig {
    pub fn new(spin: HalfInt, order: i64) -> Self {
        Self {
            spin,
            order,
            multistarts: 64,
            max_iters: 2000,
            tol_value: 1e-12,
            tol_grad: 1e-10,
            rng_seed: 0,
            optimizer: "lbfgs".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spin.twice() < 1 {
            return Err(Error::Spin(self.spin));
        }
        check_order(self.spin, self.order)?;
        if self.multistarts == 0 {
            return Err(Error::Invalid("multistarts must be at least 1".into()));
        }
        if [self.tol_value, self.tol_grad]
            .iter()
            .any(|t| t.is_nan() || *t <= 0.0)
        {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        optimizer(&self.optimizer).map(|_| ())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub best_state: SpinState,
    pub best_value: f64,
    pub certified_order: i64,
    pub starts_converged: usize,
    pub iterations_total: usize,
    pub best_start: usize,
    pub seed: u64,
}

/// `A_M` as a function of the unnormalized real parameter vector.
pub struct Objective {
    dim: usize,
    shells: Vec<(f64, Arc<TensorShell>)>,
}

impl Objective {
    pub fn new(spin: HalfInt, order: i64) -> Result<Self> {
        check_order(spin, order)?;
        let dim = spin.dim();
        let shells = (1..=order)
            .map(|k| ((2 * k + 1) as f64 / dim as f64, tensor_shell(spin, k)))
            .collect();
        Ok(Self { dim, shells })
    }

    pub fn n_params(&self) -> usize {
        2 * self.dim
    }

    fn amplitudes(&self, params: &[f64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| Complex64::new(params[i], params[self.dim + i]))
            .collect()
    }

    pub fn value(&self, params: &[f64]) -> f64 {
        self.value_and_gradient(params).0
    }

    /// `f / N^2` and its real gradient, where `f = sum_K w_K sum_q |c_Kq|^2`,
    /// `c_Kq = sum_m C x_{m+q} x_m^*` and `N = |x|^2`.
    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let x = self.amplitudes(params);
        let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let mut f = 0.0;
        // Wirtinger derivative of f with respect to conj(x)
        let mut df = vec![Complex64::new(0.0, 0.0); self.dim];
        for (w, shell) in &self.shells {
            for entries in &shell.by_q {
                let c: Complex64 = entries
                    .iter()
                    .map(|&(i, j, cg)| x[j] * x[i].conj() * cg)
                    .sum();
                f += w * c.norm_sqr();
                for &(i, j, cg) in entries {
                    df[i] += c.conj() * x[j] * (w * cg);
                    df[j] += c * x[i] * (w * cg);
                }
            }
        }
        let n2 = norm * norm;
        let value = f / n2;
        let mut grad = vec![0.0; 2 * self.dim];
        for i in 0..self.dim {
            let d = df[i] / n2 - x[i] * (2.0 * f / (n2 * norm));
            grad[i] = 2.0 * d.re;
            grad[self.dim + i] = 2.0 * d.im;
        }
        (value, grad)
    }

    pub fn state(&self, params: &[f64]) -> Result<SpinState> {
        let spin = HalfInt::from_twice(self.dim as i32 - 1);
        SpinState::new_normalized(spin, self.amplitudes(params))
    }
}

pub fn objective_and_gradient(
    params: &[f64],
    spin: HalfInt,
    order: i64,
) -> Result<(f64, Vec<f64>)> {
    let obj = Objective::new(spin, order)?;
    if params.len() != obj.n_params() {
        return Err(Error::Length {
            expected: obj.n_params(),
            got: params.len(),
        });
    }
    if params.iter().all(|&p| p == 0.0) {
        return Err(Error::ZeroState);
    }
    Ok(obj.value_and_gradient(params))
}

/// Parameters `(Re psi, Im psi)` of a state.
pub fn state_params(state: &SpinState) -> Vec<f64> {
    state
        .amps()
        .iter()
        .map(|z| z.re)
        .chain(state.amps().iter().map(|z| z.im))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct StopRule {
    pub max_iters: usize,
    pub tol_value: f64,
    pub tol_grad: f64,
}

impl StopRule {
    /// Whether `(value, |grad|)` already meets a tolerance.
    fn satisfied(&self, value: f64, grad_norm: f64) -> bool {
        grad_norm < self.tol_grad || value < self.tol_value * self.tol_value
    }

    fn stalled(&self, previous: f64, current: f64) -> bool {
        previous - current <= self.tol_value * previous.abs()
    }
}

#[derive(Clone, Debug)]
pub struct LocalRun {
    pub params: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub type ValueAndGradient<'a> = dyn Fn(&[f64]) -> (f64, Vec<f64>) + Sync + 'a;

/// A local descent method.
pub trait LocalOptimizer: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, f: &ValueAndGradient<'_>, x0: Vec<f64>, rule: &StopRule) -> LocalRun;
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Backtracking from step `t`; `None` if no step achieves sufficient decrease.
fn backtrack(
    f: &ValueAndGradient<'_>,
    x: &[f64],
    value: f64,
    slope: f64,
    d: &[f64],
    mut t: f64,
) -> Option<(f64, Vec<f64>, f64, Vec<f64>)> {
    for _ in 0..MAX_HALVINGS {
        let trial = axpy(x, t, d);
        let (v, g) = f(&trial);
        if v.is_finite() && v <= value + ARMIJO * t * slope {
            return Some((t, trial, v, g));
        }
        t *= 0.5;
    }
    None
}

/// Limited-memory BFGS with Armijo backtracking.
pub struct Lbfgs {
    pub memory: usize,
}

impl LocalOptimizer for Lbfgs {
    fn name(&self) -> &'static str {
        "lbfgs"
    }

    fn run(&self, f: &ValueAndGradient<'_>, x0: Vec<f64>, rule: &StopRule) -> LocalRun {
        let mut x = x0;
        let (mut value, mut grad) = f(&x);
        let mut history: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
        let mut iterations = 0;
        loop {
            if rule.satisfied(value, dot(&grad, &grad).sqrt()) {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: true,
                };
            }
            if iterations >= rule.max_iters {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: false,
                };
            }
            // two-loop recursion
            let mut q = grad.clone();
            let mut alphas = Vec::with_capacity(history.len());
            for (s, y, rho) in history.iter().rev() {
                let a = rho * dot(s, &q);
                q = axpy(&q, -a, y);
                alphas.push(a);
            }
            if let Some((s, y, _)) = history.back() {
                let gamma = dot(s, y) / dot(y, y);
                q.iter_mut().for_each(|v| *v *= gamma);
            }
            for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(y, &q);
                q = axpy(&q, a - b, s);
            }
            let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
            let mut slope = dot(&grad, &d);
            let mut t0 = 1.0;
            if slope.is_nan() || slope >= 0.0 {
                history.clear();
                d = grad.iter().map(|v| -v).collect();
                slope = -dot(&grad, &grad);
            }
            if history.is_empty() {
                t0 = 1.0 / dot(&grad, &grad).sqrt().max(1e-300);
                t0 = t0.min(1.0);
            }
            let Some((_, x_new, v_new, g_new)) = backtrack(f, &x, value, slope, &d, t0) else {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: false,
                };
            };
            iterations += 1;
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-300 {
                if history.len() == self.memory {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }
            let previous = value;
            x = x_new;
            value = v_new;
            grad = g_new;
            if rule.stalled(previous, value) {
                let converged = true;
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged,
                };
            }
        }
    }
}

/// Gradient descent with backtracking and step-length memory.
pub struct SteepestDescent;

impl LocalOptimizer for SteepestDescent {
    fn name(&self) -> &'static str {
        "steepest"
    }

    fn run(&self, f: &ValueAndGradient<'_>, x0: Vec<f64>, rule: &StopRule) -> LocalRun {
        let mut x = x0;
        let (mut value, mut grad) = f(&x);
        let mut t = 1.0 / dot(&grad, &grad).sqrt().max(1e-300);
        let mut iterations = 0;
        loop {
            let gn = dot(&grad, &grad).sqrt();
            if rule.satisfied(value, gn) {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: true,
                };
            }
            if iterations >= rule.max_iters {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: false,
                };
            }
            let d: Vec<f64> = grad.iter().map(|v| -v).collect();
            let Some((step, x_new, v_new, g_new)) = backtrack(f, &x, value, -gn * gn, &d, 2.0 * t)
            else {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: false,
                };
            };
            iterations += 1;
            t = step;
            let previous = value;
            x = x_new;
            value = v_new;
            grad = g_new;
            if rule.stalled(previous, value) {
                return LocalRun {
                    params: x,
                    value,
                    iterations,
                    converged: true,
                };
            }
        }
    }
}

pub fn optimizers() -> Vec<Box<dyn LocalOptimizer>> {
    vec![Box::new(Lbfgs { memory: 10 }), Box::new(SteepestDescent)]
}

pub fn optimizer(name: &str) -> Result<Box<dyn LocalOptimizer>> {
    optimizers()
        .into_iter()
        .find(|o| o.name() == name)
        .ok_or_else(|| {
            let known: Vec<_> = optimizers().iter().map(|o| o.name()).collect();
            Error::Invalid(format!(
                "unknown optimizer {name:?}; known: {}",
                known.join(", ")
            ))
        })
}

/// Starting point of start `index`: a Gaussian vector from stream `index`
/// of the generator keyed by `seed`.
pub fn start_point(seed: u64, index: usize, n_params: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..n_params)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect()
}

pub fn minimize(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let obj = Objective::new(cfg.spin, cfg.order)?;
    let method = optimizer(&cfg.optimizer)?;
    let rule = StopRule {
        max_iters: cfg.max_iters,
        tol_value: cfg.tol_value,
        tol_grad: cfg.tol_grad,
    };
    let f = |p: &[f64]| obj.value_and_gradient(p);
    let runs: Vec<LocalRun> = (0..cfg.multistarts)
        .into_par_iter()
        .map(|i| method.run(&f, start_point(cfg.rng_seed, i, obj.n_params()), &rule))
        .collect();
    let (best_start, best) = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .expect("at least one start");
    let best_state = obj.state(&best.params)?;
    let best_value = cumulative_pure(&best_state, cfg.order)?;
    Ok(SearchResult {
        certified_order: unpolarization_order(&best_state, SEARCH_EPS)?,
        best_state,
        best_value,
        starts_converged: runs.iter().filter(|r| r.converged).count(),
        iterations_total: runs.iter().map(|r| r.iterations).sum(),
        best_start,
        seed: cfg.rng_seed,
    })
}

/// Largest `M` reached below `eps`, scanning upward from 1 and stopping at
/// the first failure.
pub fn max_killable_order(spin: HalfInt, base: &SearchConfig, eps: f64) -> Result<i64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Invalid(format!("eps must be positive, got {eps}")));
    }
    let mut reached = 0;
    for m in 1..=spin.twice() as i64 {
        let cfg = SearchConfig {
            spin,
            order: m,
            ..base.clone()
        };
        if minimize(&cfg)?.best_value < eps {
            reached = m;
        } else {
            break;
        }
    }
    Ok(reached)
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    pub best_value: f64,
    pub reached_zero: bool,
    pub certified_order: i64,
    pub starts_converged: usize,
    pub iterations_total: usize,
    pub best_start: usize,
    pub best_state: SpinState,
    pub constellation: Constellation,
    pub note: &'static str,
}

impl SearchReport {
    pub fn new(config: SearchConfig, result: SearchResult) -> Self {
        let reached_zero = result.best_value < SEARCH_EPS;
        Self {
            constellation: state_constellation(&result.best_state),
            config,
            best_value: result.best_value,
            reached_zero,
            certified_order: result.certified_order,
            starts_converged: result.starts_converged,
            iterations_total: result.iterations_total,
            best_start: result.best_start,
            best_state: result.best_state,
            note: if reached_zero {
                "a state with A_M below the threshold was found"
            } else {
                "no start reached the threshold; this is numerical evidence, not a proof of nonexistence"
            },
        }
    }
}
