//! L-BFGS with a strong-Wolfe cubic-interpolation line search, plus the
//! central-difference gradient checker used by tests.
//!
//! The minimize loop is strictly sequential and allocation-light; identical
//! inputs produce bitwise identical iterates. Objectives signal infeasible
//! points (e.g. a collapsed overlap matrix) with a non-finite loss, which the
//! line search treats as "too far" and backs off from instead of crashing.

use std::collections::VecDeque;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OptimError {
    /// The loss was non-finite at an accepted iterate (not merely during a
    /// line-search probe); parameters and step index are kept for post-mortem.
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: usize, params: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub memory: usize,
    pub max_steps: usize,
    pub wolfe_c1: f64,
    pub wolfe_c2: f64,
    pub grad_tol: f64,
    pub max_linesearch: usize,
    /// Abort when the objective's auxiliary diagnostic of an accepted iterate
    /// exceeds this bound (used for overlap-condition explosions).
    pub aux_abort_above: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            memory: 10,
            max_steps: 1000,
            wolfe_c1: 1e-4,
            wolfe_c2: 0.9,
            grad_tol: 1e-9,
            max_linesearch: 40,
            aux_abort_above: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.wolfe_c1 && self.wolfe_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(format!(
                "need 0 < c1 < c2 < 1, got c1={} c2={}",
                self.wolfe_c1, self.wolfe_c2
            ));
        }
        if self.memory == 0 {
            return Err("memory must be >= 1".to_string());
        }
        Ok(())
    }
}

/// One objective evaluation. A non-finite loss marks an infeasible point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub loss: f64,
    pub grad: Vec<f64>,
    /// Optional diagnostic carried into the trace (overlap condition number).
    pub aux: Option<f64>,
}

pub trait Objective {
    fn eval(&mut self, x: &[f64]) -> Evaluation;
}

impl<F> Objective for F
where
    F: FnMut(&[f64]) -> Evaluation,
{
    fn eval(&mut self, x: &[f64]) -> Evaluation {
        self(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradTol,
    MaxSteps,
    LineSearchFailed,
    AuxGuard,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::GradTol => "grad_tol",
            Termination::MaxSteps => "max_steps",
            Termination::LineSearchFailed => "line_search_failed",
            Termination::AuxGuard => "aux_guard",
        }
    }
}

/// Accepted-iterate record.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub step: usize,
    pub loss: f64,
    pub grad_norm: f64,
    pub aux: Option<f64>,
    pub step_length: f64,
    pub wall_ms: f64,
    /// Both strong-Wolfe conditions held at acceptance (false for the
    /// best-progress fallback of an exhausted line search).
    pub wolfe_ok: bool,
}

#[derive(Debug, Clone)]
pub struct OptTrace {
    pub records: Vec<StepRecord>,
    pub final_params: Vec<f64>,
    pub final_loss: f64,
    pub termination: Termination,
    pub n_evals: usize,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cubic-interpolation minimizer of a 1D function bracketed by two points
/// with values and derivatives, clamped to the bracket interior.
fn cubic_interpolate(x1: f64, f1: f64, g1: f64, x2: f64, f2: f64, g2: f64) -> f64 {
    let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let d1 = g1 + g2 - 3.0 * (f1 - f2) / (x1 - x2);
    let d2_sq = d1 * d1 - g1 * g2;
    if d2_sq >= 0.0 {
        let d2 = d2_sq.sqrt() * (x2 - x1).signum();
        let min_pos = x2 - (x2 - x1) * ((g2 + d2 - d1) / (g2 - g1 + 2.0 * d2));
        if min_pos.is_finite() {
            min_pos.clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        }
    } else {
        0.5 * (lo + hi)
    }
}

struct LinePoint {
    alpha: f64,
    loss: f64,
    /// directional derivative at alpha
    deriv: f64,
    eval: Evaluation,
    /// both strong-Wolfe conditions verified (false only for the
    /// budget-exhausted best-progress fallback)
    wolfe: bool,
}

/// Strong-Wolfe line search (bracket + zoom with cubic interpolation).
/// Returns the accepted point or None after the evaluation budget.
fn strong_wolfe(
    obj: &mut dyn Objective,
    x: &[f64],
    direction: &[f64],
    f0: f64,
    d0: f64,
    initial_step: f64,
    cfg: &OptimizerConfig,
    n_evals: &mut usize,
) -> Option<LinePoint> {
    let c1 = cfg.wolfe_c1;
    let c2 = cfg.wolfe_c2;
    let probe = |alpha: f64, obj: &mut dyn Objective, n_evals: &mut usize| -> LinePoint {
        let trial: Vec<f64> = x
            .iter()
            .zip(direction)
            .map(|(xi, di)| xi + alpha * di)
            .collect();
        let eval = obj.eval(&trial);
        *n_evals += 1;
        let deriv = if eval.loss.is_finite() {
            dot(&eval.grad, direction)
        } else {
            f64::INFINITY
        };
        LinePoint {
            alpha,
            loss: eval.loss,
            deriv,
            eval,
            wolfe: true,
        }
    };

    // Refinement toward the 1D minimizer: a point accepted by the Wolfe
    // tests with a directional derivative still far from zero is polished by
    // one cubic fit through (0, f0, d0) and itself. On quadratics the fit is
    // exact, which restores the conjugate-direction termination property.
    let refine = |p: LinePoint,
                  obj: &mut dyn Objective,
                  n_evals: &mut usize,
                  probe: &dyn Fn(f64, &mut dyn Objective, &mut usize) -> LinePoint|
     -> LinePoint {
        if p.deriv.abs() <= 0.1 * d0.abs() {
            return p;
        }
        let trial = if p.deriv > 0.0 {
            cubic_interpolate(0.0, f0, d0, p.alpha, p.loss, p.deriv)
        } else {
            // minimizer lies beyond: secant step on the derivative
            let slope = (p.deriv - d0) / p.alpha;
            if slope <= 0.0 {
                return p;
            }
            (-d0 / slope).min(10.0 * p.alpha)
        };
        if !trial.is_finite() || trial <= 0.0 {
            return p;
        }
        let q = probe(trial, obj, n_evals);
        let wolfe =
            q.loss.is_finite() && q.loss <= f0 + c1 * q.alpha * d0 && q.deriv.abs() <= -c2 * d0;
        if wolfe && q.loss <= p.loss {
            q
        } else {
            p
        }
    };

    let mut budget = cfg.max_linesearch;
    let mut alpha = initial_step;
    // non-finite probes shrink the step until the objective is defined
    let mut cur = loop {
        let p = probe(alpha, obj, n_evals);
        budget = budget.checked_sub(1)?;
        if p.loss.is_finite() {
            break p;
        }
        alpha *= 0.5;
        if budget == 0 {
            return None;
        }
    };

    let mut prev_alpha = 0.0f64;
    let mut prev_loss = f0;
    let mut prev_deriv = d0;
    let mut bracket: Option<(LinePoint, LinePoint)> = None;
    let mut first = true;

    // bracketing phase
    while budget > 0 {
        if cur.loss > f0 + c1 * cur.alpha * d0 || (!first && cur.loss >= prev_loss) {
            let lo = LinePoint {
                alpha: prev_alpha,
                loss: prev_loss,
                deriv: prev_deriv,
                eval: Evaluation {
                    loss: prev_loss,
                    grad: Vec::new(),
                    aux: None,
                },
                wolfe: false,
            };
            bracket = Some((lo, cur));
            break;
        }
        if cur.deriv.abs() <= -c2 * d0 {
            return Some(refine(cur, obj, n_evals, &probe));
        }
        if cur.deriv >= 0.0 {
            let hi = LinePoint {
                alpha: prev_alpha,
                loss: prev_loss,
                deriv: prev_deriv,
                eval: Evaluation {
                    loss: prev_loss,
                    grad: Vec::new(),
                    aux: None,
                },
                wolfe: false,
            };
            bracket = Some((cur, hi));
            break;
        }
        let next_alpha = 2.0 * cur.alpha;
        prev_alpha = cur.alpha;
        prev_loss = cur.loss;
        prev_deriv = cur.deriv;
        // expand, shrinking back on non-finite losses
        let mut trial_alpha = next_alpha;
        loop {
            let p = probe(trial_alpha, obj, n_evals);
            budget = budget.checked_sub(1)?;
            if p.loss.is_finite() {
                cur = p;
                break;
            }
            trial_alpha = 0.5 * (prev_alpha + trial_alpha);
            if budget == 0 || trial_alpha <= prev_alpha {
                return None;
            }
        }
        first = false;
    }

    let (mut lo, mut hi) = bracket?;

    // zoom phase: lo always has the lowest seen loss satisfying descent
    while budget > 0 {
        let width = (hi.alpha - lo.alpha).abs();
        if width < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
        let mut trial = cubic_interpolate(lo.alpha, lo.loss, lo.deriv, hi.alpha, hi.loss, hi.deriv);
        // bisect when the fit lands outside or hugs an edge of the bracket
        let lo_a = lo.alpha.min(hi.alpha);
        let hi_a = lo.alpha.max(hi.alpha);
        if !trial.is_finite()
            || trial <= lo_a
            || trial >= hi_a
            || (trial - lo_a).min(hi_a - trial) < 0.01 * (hi_a - lo_a)
        {
            trial = 0.5 * (lo_a + hi_a);
        }
        let mut p = probe(trial, obj, n_evals);
        budget = budget.checked_sub(1)?;
        if !p.loss.is_finite() {
            // treat as beyond the feasible region: bisect toward lo
            let mut shrink = 0.5 * (lo.alpha + trial);
            loop {
                p = probe(shrink, obj, n_evals);
                budget = budget.checked_sub(1)?;
                if p.loss.is_finite() {
                    break;
                }
                shrink = 0.5 * (lo.alpha + shrink);
                if budget == 0 {
                    return None;
                }
            }
        }
        if p.loss > f0 + c1 * p.alpha * d0 || p.loss >= lo.loss {
            hi = p;
        } else {
            if p.deriv.abs() <= -c2 * d0 {
                return Some(refine(p, obj, n_evals, &probe));
            }
            if p.deriv * (hi.alpha - lo.alpha) >= 0.0 {
                hi = LinePoint {
                    alpha: lo.alpha,
                    loss: lo.loss,
                    deriv: lo.deriv,
                    eval: Evaluation {
                        loss: lo.loss,
                        grad: Vec::new(),
                        aux: None,
                    },
                    wolfe: false,
                };
            }
            lo = p;
        }
    }
    // budget exhausted: accept lo if it made progress with a usable gradient
    if lo.alpha > 0.0 && lo.loss < f0 && !lo.eval.grad.is_empty() {
        Some(LinePoint { wolfe: false, ..lo })
    } else {
        None
    }
}

/// Minimize with L-BFGS (two-loop recursion) and the strong-Wolfe search.
pub fn minimize(
    obj: &mut dyn Objective,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptTrace, OptimError> {
    minimize_with_callback(obj, x0, cfg, &mut |_| {})
}

/// [`minimize`] with a per-accepted-step callback, so callers can stream the
/// trace to disk while the run is in flight.
pub fn minimize_with_callback(
    obj: &mut dyn Objective,
    x0: &[f64],
    cfg: &OptimizerConfig,
    on_step: &mut dyn FnMut(&StepRecord),
) -> Result<OptTrace, OptimError> {
    cfg.validate().expect("invalid optimizer configuration");
    let t_start = Instant::now();
    let mut x = x0.to_vec();
    let mut eval = obj.eval(&x);
    let mut n_evals = 1usize;
    if !eval.loss.is_finite() {
        return Err(OptimError::NonFiniteLoss { step: 0, params: x });
    }

    let mut records: Vec<StepRecord> = Vec::new();
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new(); // (s, y, 1/(y.s))
    let mut termination = Termination::MaxSteps;

    let grad_norm = norm2(&eval.grad);
    records.push(StepRecord {
        step: 0,
        loss: eval.loss,
        grad_norm,
        aux: eval.aux,
        step_length: 0.0,
        wall_ms: t_start.elapsed().as_secs_f64() * 1e3,
        wolfe_ok: true,
    });
    on_step(records.last().unwrap());
    if grad_norm <= cfg.grad_tol {
        return Ok(OptTrace {
            final_params: x,
            final_loss: eval.loss,
            termination: Termination::GradTol,
            n_evals,
            records,
        });
    }

    for step in 1..=cfg.max_steps {
        // two-loop recursion
        let mut direction: Vec<f64> = eval.grad.iter().map(|g| -g).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &direction);
            for (d, yi) in direction.iter_mut().zip(y) {
                *d -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            for d in direction.iter_mut() {
                *d *= gamma;
            }
        }
        for ((s, y, rho), a) in pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &direction);
            for (d, si) in direction.iter_mut().zip(s) {
                *d += (a - b) * si;
            }
        }
        let mut d0 = dot(&eval.grad, &direction);
        if !(d0 < 0.0) {
            // not a descent direction; drop the memory and restart on -g
            pairs.clear();
            direction = eval.grad.iter().map(|g| -g).collect();
            d0 = -dot(&eval.grad, &eval.grad);
        }

        // on a fresh memory (first iteration or post-reset) the direction is
        // the raw gradient, whose scale carries the objective's units; damp
        // the first trial step accordingly, as quasi-Newton line searches do
        let initial_step = if pairs.is_empty() {
            let l1: f64 = eval.grad.iter().map(|g| g.abs()).sum();
            (1.0 / l1.max(1.0)).min(1.0)
        } else {
            1.0
        };
        let accepted = strong_wolfe(
            obj,
            &x,
            &direction,
            eval.loss,
            d0,
            initial_step,
            cfg,
            &mut n_evals,
        );
        let Some(point) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };
        if !point.eval.loss.is_finite() {
            return Err(OptimError::NonFiniteLoss { step, params: x });
        }

        let new_x: Vec<f64> = x
            .iter()
            .zip(&direction)
            .map(|(xi, di)| xi + point.alpha * di)
            .collect();
        let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = point
            .eval
            .grad
            .iter()
            .zip(&eval.grad)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * norm2(&s) * norm2(&y) {
            let rho = 1.0 / sy;
            if pairs.len() == cfg.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, rho));
        }
        x = new_x;
        eval = point.eval;
        let grad_norm = norm2(&eval.grad);
        records.push(StepRecord {
            step,
            loss: eval.loss,
            grad_norm,
            aux: eval.aux,
            step_length: point.alpha,
            wall_ms: t_start.elapsed().as_secs_f64() * 1e3,
            wolfe_ok: point.wolfe,
        });
        on_step(records.last().unwrap());
        if let Some(bound) = cfg.aux_abort_above {
            if eval.aux.is_some_and(|a| a > bound) {
                termination = Termination::AuxGuard;
                break;
            }
        }
        if grad_norm <= cfg.grad_tol {
            termination = Termination::GradTol;
            break;
        }
    }

    Ok(OptTrace {
        final_params: x,
        final_loss: eval.loss,
        termination,
        n_evals,
        records,
    })
}

/// Central finite differences, (f(x + h e_k) - f(x - h e_k)) / 2h.
pub fn fd_gradient<F>(mut f: F, x: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(step > 0.0);
    let mut out = Vec::with_capacity(x.len());
    let mut work = x.to_vec();
    for k in 0..x.len() {
        work[k] = x[k] + step;
        let up = f(&work);
        work[k] = x[k] - step;
        let dn = f(&work);
        work[k] = x[k];
        out.push((up - dn) / (2.0 * step));
    }
    out
}
