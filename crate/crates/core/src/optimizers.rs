//! Gradient descent, LSGD and modified LSGD.
//!
//! All three schemes share one update, `x ← x − η A_{σ(k)}⁻¹ ∇f(x)`: plain
//! gradient descent is the constant schedule `σ = 0` (`A_0 = I`), LSGD a
//! constant `σ > 0`, and modified LSGD an iteration-dependent `σ(k)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm, Vector};
use crate::smoothing::CirculantSmoother;

/// Gradient oracle for an objective on `ℝⁿ`.
///
/// Implementations must be deterministic and safe to evaluate from many
/// threads at once.
pub trait GradientSource: Sync {
    fn dim(&self) -> usize;

    /// Writes `∇f(x)` into `out` (both of length `dim()`).
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn gradient(&self, x: &[f64]) -> Vector {
        let mut out = vec![0.0; self.dim()];
        self.gradient_into(x, &mut out);
        Vector::from_vec_unchecked(out)
    }

    /// `f(x)`, when the source knows it.
    fn value(&self, _x: &[f64]) -> Option<f64> {
        None
    }
}

/// Gradient source backed by a closure.
pub struct FnGradient<F> {
    dim: usize,
    gradient: F,
}

impl<F> FnGradient<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, gradient: F) -> Self {
        FnGradient { dim, gradient }
    }
}

impl<F> GradientSource for FnGradient<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }
}

/// Iteration-dependent smoothing parameter `σ(k)`, `k = 0, 1, 2, …`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSchedule {
    /// `σ(k) = σ₀`. `Constant(0.0)` is plain gradient descent.
    Constant(f64),
    /// `σ(k) = (k + offset + 1) / (k + offset + 2)`: strictly increasing, bounded by 1.
    ///
    /// `offset = 0` starts at `σ(0) = 1/2`; `offset = 1` counts iterations from one.
    RatioMonotone { offset: usize },
    /// `σ(k) = (min(k, k₀) + 1) / (min(k, k₀) + 2)`: increases, then stays constant for `k ≥ k₀`.
    RatioThenPlateau { k0: usize },
}

impl SigmaSchedule {
    pub const GD: SigmaSchedule = SigmaSchedule::Constant(0.0);
    pub const RATIO: SigmaSchedule = SigmaSchedule::RatioMonotone { offset: 0 };

    pub fn constant(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::domain(format!(
                "constant sigma must be finite and >= 0, got {sigma}"
            )));
        }
        Ok(SigmaSchedule::Constant(sigma))
    }

    pub fn plateau(k0: usize) -> Result<Self> {
        if k0 == 0 {
            return Err(Error::domain("plateau index k0 must be positive"));
        }
        Ok(SigmaSchedule::RatioThenPlateau { k0 })
    }

    /// Plateau schedule used for checking the convergence theorem in dimension
    /// `n`: `k₀ = max(n − ⌊(n−1)/2⌋ + 1, 8)`, which exceeds `n − ⌊(n−1)/2⌋`.
    pub fn theorem_default(n: usize) -> Self {
        let k0 = (n - (n.saturating_sub(1)) / 2 + 1).max(8);
        SigmaSchedule::RatioThenPlateau { k0 }
    }

    pub fn sigma(&self, k: usize) -> f64 {
        match *self {
            SigmaSchedule::Constant(s) => s,
            SigmaSchedule::RatioMonotone { offset } => ratio(k + offset),
            SigmaSchedule::RatioThenPlateau { k0 } => ratio(k.min(k0)),
        }
    }

    /// A constant `C` with `0 ≤ σ(k) ≤ C` for every `k`.
    pub fn bound(&self) -> f64 {
        match *self {
            SigmaSchedule::Constant(s) => s,
            SigmaSchedule::RatioMonotone { .. } => 1.0,
            SigmaSchedule::RatioThenPlateau { k0 } => ratio(k0),
        }
    }

    pub fn is_gradient_descent(&self) -> bool {
        matches!(self, SigmaSchedule::Constant(s) if *s == 0.0)
    }
}

fn ratio(k: usize) -> f64 {
    (k as f64 + 1.0) / (k as f64 + 2.0)
}

impl fmt::Display for SigmaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SigmaSchedule::Constant(0.0) => write!(f, "gd"),
            SigmaSchedule::Constant(s) => write!(f, "constant:{s}"),
            SigmaSchedule::RatioMonotone { offset: 0 } => write!(f, "ratio"),
            SigmaSchedule::RatioMonotone { offset } => write!(f, "ratio:{offset}"),
            SigmaSchedule::RatioThenPlateau { k0 } => write!(f, "plateau:{k0}"),
        }
    }
}

/// Parses `gd`, `constant:<σ>`, `ratio`, `ratio:<offset>` or `plateau:<k0>`.
impl FromStr for SigmaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let bad = || {
            Error::domain(format!("invalid schedule '{s}' (expected gd, constant:<sigma>, ratio, ratio:<offset> or plateau:<k0>)"))
        };
        match (kind, arg) {
            ("gd", None) => Ok(SigmaSchedule::GD),
            ("constant", Some(a)) => SigmaSchedule::constant(a.parse().map_err(|_| bad())?),
            ("ratio", None) => Ok(SigmaSchedule::RATIO),
            ("ratio", Some(a)) => Ok(SigmaSchedule::RatioMonotone {
                offset: a.parse().map_err(|_| bad())?,
            }),
            ("plateau", Some(a)) => SigmaSchedule::plateau(a.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// Step size, stopping rules and recording options for [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub eta: f64,
    pub max_iters: usize,
    /// Stop once `‖∇f(x)‖ ≤ eps_stationary`.
    pub eps_stationary: f64,
    /// Declare divergence once `‖x‖ > escape_radius` (may be infinite).
    pub escape_radius: f64,
    pub record_trajectory: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eta: 0.1,
            max_iters: 10_000,
            eps_stationary: 0.0,
            escape_radius: 1e3,
            record_trajectory: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::domain(format!(
                "step size must be positive, got {}",
                self.eta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be positive"));
        }
        if !(self.eps_stationary >= 0.0) {
            return Err(Error::domain("eps_stationary must be >= 0"));
        }
        if !(self.escape_radius > 0.0) {
            return Err(Error::domain("escape_radius must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    ReachedStationary,
    MaxIters,
    Escaped,
    /// A gradient evaluation produced a non-finite value.
    Failed,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunStatus::ReachedStationary => "reached_stationary",
            RunStatus::MaxIters => "max_iters",
            RunStatus::Escaped => "escaped",
            RunStatus::Failed => "failed",
        })
    }
}

impl FromStr for RunStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reached_stationary" => Ok(RunStatus::ReachedStationary),
            "max_iters" => Ok(RunStatus::MaxIters),
            "escaped" => Ok(RunStatus::Escaped),
            "failed" => Ok(RunStatus::Failed),
            other => Err(Error::domain(format!("unknown run status '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_point: Vector,
    pub iterations_used: usize,
    pub status: RunStatus,
    /// Iterates `x⁰ … x^K` when recording was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Vector>>,
    /// `‖∇f(x^k)‖` for every recorded iterate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_norms: Option<Vec<f64>>,
    pub final_grad_norm: f64,
}

/// `x − η∇f(x)`.
pub fn step_gd(g: &dyn GradientSource, x: &[f64], eta: f64) -> Result<Vector> {
    step_mlsgd(g, x, eta, &SigmaSchedule::GD, 0)
}

/// `x − η A_{σ(k)}⁻¹ ∇f(x)`.
pub fn step_mlsgd(
    g: &dyn GradientSource,
    x: &[f64],
    eta: f64,
    sched: &SigmaSchedule,
    k: usize,
) -> Result<Vector> {
    if x.len() != g.dim() {
        return Err(Error::domain(format!(
            "iterate has {} entries, objective expects {}",
            x.len(),
            g.dim()
        )));
    }
    let mut out = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut work = Vec::new();
    Stepper::new(g, eta, *sched).step(&mut out, &mut grad, &mut work, k)?;
    Ok(Vector::from_vec_unchecked(out))
}

/// Allocation-free update loop shared by the single-step functions and [`run`].
struct Stepper<'a> {
    g: &'a dyn GradientSource,
    eta: f64,
    sched: SigmaSchedule,
}

impl<'a> Stepper<'a> {
    fn new(g: &'a dyn GradientSource, eta: f64, sched: SigmaSchedule) -> Self {
        Stepper { g, eta, sched }
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64], k: usize) -> Result<()> {
        self.g.gradient_into(x, grad);
        if grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                iteration: k,
                iterate: x.to_vec(),
            });
        }
        Ok(())
    }

    /// Full step from `x` (gradient evaluated here).
    fn step(&self, x: &mut [f64], grad: &mut [f64], work: &mut Vec<f64>, k: usize) -> Result<()> {
        self.gradient(x, grad, k)?;
        self.apply_step(x, grad, work, k)
    }

    /// Step using a gradient already stored in `grad`; `grad` is overwritten.
    fn apply_step(
        &self,
        x: &mut [f64],
        grad: &mut [f64],
        work: &mut Vec<f64>,
        k: usize,
    ) -> Result<()> {
        let sigma = self.sched.sigma(k);
        if sigma != 0.0 {
            CirculantSmoother::new(x.len(), sigma)?.solve_thomas_in_place(grad, work);
        }
        for (xi, gi) in x.iter_mut().zip(grad.iter()) {
            *xi -= self.eta * gi;
        }
        Ok(())
    }
}

/// Iterates modified LSGD from `x0` until the gradient norm drops to
/// `eps_stationary`, the iterate leaves the escape ball, or `max_iters`
/// steps have been taken, whichever comes first.
///
/// A non-finite gradient ends the run with [`RunStatus::Failed`]; the partial
/// trajectory is kept.
pub fn run(
    g: &dyn GradientSource,
    x0: &[f64],
    cfg: &RunConfig,
    sched: &SigmaSchedule,
) -> Result<RunResult> {
    cfg.validate()?;
    if x0.len() != g.dim() {
        return Err(Error::domain(format!(
            "starting point has {} entries, objective expects {}",
            x0.len(),
            g.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("starting point must be finite"));
    }
    if sched.sigma(0) != 0.0 || sched.bound() != 0.0 {
        // validates σ ranges and the dimension once up front
        CirculantSmoother::new(g.dim(), sched.bound())?;
    }

    let stepper = Stepper::new(g, cfg.eta, *sched);
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut work = Vec::with_capacity(2 * n);
    let mut trajectory = cfg.record_trajectory.then(Vec::new);
    let mut grad_norms = cfg.record_trajectory.then(Vec::new);

    let mut k = 0;
    let (status, grad_norm) = loop {
        if stepper.gradient(&x, &mut grad, k).is_err() {
            if let Some(t) = trajectory.as_mut() {
                t.push(Vector::from_vec_unchecked(x.clone()));
            }
            break (RunStatus::Failed, f64::NAN);
        }
        let gn = norm(&grad);
        if let (Some(t), Some(gns)) = (trajectory.as_mut(), grad_norms.as_mut()) {
            t.push(Vector::from_vec_unchecked(x.clone()));
            gns.push(gn);
        }
        if gn <= cfg.eps_stationary {
            break (RunStatus::ReachedStationary, gn);
        }
        if norm(&x) > cfg.escape_radius {
            break (RunStatus::Escaped, gn);
        }
        if k == cfg.max_iters {
            break (RunStatus::MaxIters, gn);
        }
        stepper.apply_step(&mut x, &mut grad, &mut work, k)?;
        if x.iter().any(|v| !v.is_finite()) {
            if let Some(t) = trajectory.as_mut() {
                t.push(Vector::from_vec_unchecked(x.clone()));
            }
            k += 1;
            break (RunStatus::Failed, f64::NAN);
        }
        k += 1;
    };

    Ok(RunResult {
        final_point: Vector::from_vec_unchecked(x),
        iterations_used: k,
        status,
        trajectory,
        grad_norms,
        final_grad_norm: grad_norm,
    })
}

/// Worst-case number of modified LSGD iterations, with `η = 1/ℓ` and
/// `0 ≤ σ(k) ≤ C`, before reaching `‖∇f‖ ≤ ε`:
/// `2(1+4C)²ℓ(f(x⁰) − f*) / ((1+8C)ε²)`.
pub fn iteration_bound(c: f64, ell: f64, f0: f64, fstar: f64, eps: f64) -> Result<f64> {
    if !(c >= 0.0) || !(ell > 0.0) || !(f0 >= fstar) || !(eps > 0.0) {
        return Err(Error::domain(format!(
            "iteration_bound needs C >= 0, ell > 0, f0 >= f*, eps > 0 (got C={c}, ell={ell}, f0={f0}, f*={fstar}, eps={eps})"
        )));
    }
    let a = 1.0 + 4.0 * c;
    Ok(2.0 * a * a * ell * (f0 - fstar) / ((1.0 + 8.0 * c) * eps * eps))
}

/// Guaranteed per-step decrease factor with `η = 1/ℓ`:
/// `f(x^{k+1}) − f(x^k) ≤ −(1+8C) / (2(1+4C)²ℓ) · ‖∇f(x^k)‖²`.
pub fn descent_coefficient(c: f64, ell: f64) -> f64 {
    let a = 1.0 + 4.0 * c;
    (1.0 + 8.0 * c) / (2.0 * a * a * ell)
}
