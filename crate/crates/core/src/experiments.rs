//! Polar distance-field sweeps, the two-scale search, and the empirical
//! iteration-bound check.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_atomic};
use crate::linalg::{norm, sym_eigendecompose, DenseMatrix, Vector};
use crate::optimizers::{
    descent_coefficient, iteration_bound, run, GradientSource, RunConfig, RunStatus, SigmaSchedule,
};
use crate::saddle::{canonical_objective, QuadraticObjective};

/// The two planar test problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    /// `f(x) = x₁² − x₂²` (canonical `B`, `c = 2`).
    One,
    /// `f(x) = x₁² + 6x₁x₂ + 2x₂²`, i.e. `B = [[2, 6], [6, 4]]`, `c = 1`.
    Two,
}

impl Example {
    pub fn objective(self) -> QuadraticObjective {
        match self {
            Example::One => canonical_objective(2, 2.0).expect("valid preset"),
            Example::Two => QuadraticObjective::new(
                DenseMatrix::from_rows(&[vec![2.0, 6.0], vec![6.0, 4.0]]).expect("valid preset"),
                1.0,
            )
            .expect("valid preset"),
        }
    }

    /// Angle (degrees) of the line along which plain gradient descent converges to the saddle.
    pub fn gd_attraction_angle_deg(self) -> f64 {
        match self {
            Example::One => 0.0,
            Example::Two => (6.0 / (37f64.sqrt() - 1.0)).atan().to_degrees(),
        }
    }

    /// Coarse polar grid of the exhaustive search: `r ∈ [0.1, 1]` in steps of
    /// 0.1 and a full turn of angles.
    pub fn coarse_grid(theta_step_deg: f64) -> PolarGrid {
        PolarGrid {
            r_min: 0.1,
            r_max: 1.0,
            r_step: 0.1,
            theta_min_deg: -180.0,
            theta_max_deg: 180.0,
            theta_step_deg,
        }
    }
}

/// Schedule of the planar experiments, `σ(k) = k/(k+1)` with the iteration
/// counter starting at 1.
pub const EXPERIMENT_SCHEDULE: SigmaSchedule = SigmaSchedule::RatioMonotone { offset: 1 };

/// Run settings of the planar experiments: `η = 0.1`, exactly `K = 100` iterations.
pub fn experiment_config() -> RunConfig {
    RunConfig {
        eta: 0.1,
        max_iters: 100,
        eps_stationary: 0.0,
        escape_radius: f64::INFINITY,
        record_trajectory: false,
    }
}

/// Rectangle in polar coordinates `(r, θ)`, θ in degrees.
///
/// Radii run from `r_min` to `r_max` inclusive; angles from `theta_min_deg`
/// (inclusive) to `theta_max_deg` (exclusive). Grid values are computed as
/// `start + i·step`, never by accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
}

impl PolarGrid {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.r_min,
            self.r_max,
            self.r_step,
            self.theta_min_deg,
            self.theta_max_deg,
            self.theta_step_deg,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("polar grid parameters must be finite"));
        }
        if !(self.r_min > 0.0) || !(self.r_step > 0.0) || !(self.theta_step_deg > 0.0) {
            return Err(Error::domain(
                "r_min, r_step and theta_step must be positive",
            ));
        }
        if self.r_max < self.r_min || self.theta_max_deg <= self.theta_min_deg {
            return Err(Error::domain("polar grid is empty"));
        }
        if self.theta_max_deg - self.theta_min_deg > 360.0 + 1e-9 {
            return Err(Error::domain("theta range exceeds 360 degrees"));
        }
        Ok(())
    }

    pub fn radii(&self) -> Vec<f64> {
        let count = ((self.r_max - self.r_min) / self.r_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.r_min + i as f64 * self.r_step)
            .collect()
    }

    pub fn thetas_deg(&self) -> Vec<f64> {
        let count = ((self.theta_max_deg - self.theta_min_deg) / self.theta_step_deg - 1e-9).ceil()
            as usize;
        (0..count.max(1))
            .map(|j| self.theta_min_deg + j as f64 * self.theta_step_deg)
            .collect()
    }

    pub fn cell_count(&self) -> usize {
        self.radii().len() * self.thetas_deg().len()
    }
}

/// One grid cell: its starting point and the distance to the origin after the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub r: f64,
    pub theta_deg: f64,
    pub x0: [f64; 2],
    /// `‖x^K‖`, or NaN when the run failed.
    pub final_distance: f64,
    pub status: RunStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub optimizer: String,
    pub eta: f64,
    pub iters: usize,
    pub schedule: String,
    pub objective: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub metadata: FieldMetadata,
    pub rows: Vec<FieldRow>,
}

/// Extremes of a distance field; failed cells are skipped and counted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub min_distance: f64,
    pub argmin_r: f64,
    pub argmin_theta_deg: f64,
    pub max_distance: f64,
    pub failed_cells: usize,
}

impl DistanceField {
    /// `None` when every cell failed (or the field is empty).
    pub fn summary(&self) -> Option<FieldSummary> {
        let mut best: Option<&FieldRow> = None;
        let mut max_distance = f64::NEG_INFINITY;
        let mut failed = 0;
        for row in &self.rows {
            if row.status == RunStatus::Failed || row.final_distance.is_nan() {
                failed += 1;
                continue;
            }
            // first minimum in grid order wins ties
            if best.is_none_or(|b| row.final_distance < b.final_distance) {
                best = Some(row);
            }
            max_distance = max_distance.max(row.final_distance);
        }
        best.map(|b| FieldSummary {
            min_distance: b.final_distance,
            argmin_r: b.r,
            argmin_theta_deg: b.theta_deg,
            max_distance,
            failed_cells: failed,
        })
    }

    /// Number of successful cells with distance strictly below `threshold`.
    pub fn rows_below(&self, threshold: f64) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status != RunStatus::Failed && r.final_distance < threshold)
            .count()
    }

    /// Writes the CSV form (see [`emit_csv`]) to `w`.
    pub fn write_csv(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let m = &self.metadata;
        writeln!(w, "# optimizer: {}", m.optimizer)?;
        writeln!(w, "# eta: {}", fmt_f64(m.eta))?;
        writeln!(w, "# iters: {}", m.iters)?;
        writeln!(w, "# schedule: {}", m.schedule)?;
        writeln!(w, "# objective: {}", m.objective)?;
        writeln!(w, "r,theta_deg,x0_0,x0_1,final_distance,status")?;
        let mut line = String::with_capacity(160);
        for row in &self.rows {
            line.clear();
            let distance = if row.status == RunStatus::Failed {
                "nan".to_string()
            } else {
                fmt_f64(row.final_distance)
            };
            let _ = writeln!(
                line,
                "{},{},{},{},{},{}",
                fmt_f64(row.r),
                fmt_f64(row.theta_deg),
                fmt_f64(row.x0[0]),
                fmt_f64(row.x0[1]),
                distance,
                row.status
            );
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

fn describe_optimizer(sched: &SigmaSchedule) -> &'static str {
    match sched {
        s if s.is_gradient_descent() => "gd",
        SigmaSchedule::Constant(_) => "lsgd",
        _ => "mlsgd",
    }
}

fn check_sweep_inputs(
    objective: &QuadraticObjective,
    grid: &PolarGrid,
    cfg: &RunConfig,
) -> Result<()> {
    if objective.dim() != 2 {
        return Err(Error::domain(format!(
            "polar sweeps need a 2-dimensional objective, got n = {}",
            objective.dim()
        )));
    }
    if cfg.record_trajectory {
        return Err(Error::domain("sweeps do not record trajectories"));
    }
    cfg.validate()?;
    grid.validate()
}

fn sweep_cell(
    objective: &QuadraticObjective,
    cfg: &RunConfig,
    sched: &SigmaSchedule,
    r: f64,
    theta_deg: f64,
) -> FieldRow {
    let t = theta_deg.to_radians();
    let x0 = [r * t.cos(), r * t.sin()];
    let (final_distance, status) = match run(objective, &x0, cfg, sched) {
        Ok(res) if res.status != RunStatus::Failed => (res.final_point.norm(), res.status),
        _ => (f64::NAN, RunStatus::Failed),
    };
    FieldRow {
        r,
        theta_deg,
        x0,
        final_distance,
        status,
    }
}

fn field_metadata(
    objective: &QuadraticObjective,
    cfg: &RunConfig,
    sched: &SigmaSchedule,
) -> FieldMetadata {
    FieldMetadata {
        optimizer: describe_optimizer(sched).to_string(),
        eta: cfg.eta,
        iters: cfg.max_iters,
        schedule: sched.to_string(),
        objective: objective.describe(),
    }
}

/// Runs the optimizer from every cell of `grid` on the current rayon pool.
///
/// Rows come back in grid order (radius-major, then angle) regardless of how
/// the work was scheduled, so the output is identical to [`sweep_serial`].
pub fn sweep(
    objective: &QuadraticObjective,
    grid: &PolarGrid,
    cfg: &RunConfig,
    sched: &SigmaSchedule,
) -> Result<DistanceField> {
    check_sweep_inputs(objective, grid, cfg)?;
    let radii = grid.radii();
    let thetas = grid.thetas_deg();
    let rows = (0..radii.len() * thetas.len())
        .into_par_iter()
        .with_min_len(1024)
        .map(|idx| {
            let (i, j) = (idx / thetas.len(), idx % thetas.len());
            sweep_cell(objective, cfg, sched, radii[i], thetas[j])
        })
        .collect();
    Ok(DistanceField {
        metadata: field_metadata(objective, cfg, sched),
        rows,
    })
}

/// Single-threaded [`sweep`].
pub fn sweep_serial(
    objective: &QuadraticObjective,
    grid: &PolarGrid,
    cfg: &RunConfig,
    sched: &SigmaSchedule,
) -> Result<DistanceField> {
    check_sweep_inputs(objective, grid, cfg)?;
    let thetas = grid.thetas_deg();
    let rows = grid
        .radii()
        .into_iter()
        .flat_map(|r| thetas.iter().map(move |&t| (r, t)))
        .map(|(r, t)| sweep_cell(objective, cfg, sched, r, t))
        .collect();
    Ok(DistanceField {
        metadata: field_metadata(objective, cfg, sched),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoScaleResult {
    pub coarse: DistanceField,
    pub fine: DistanceField,
    /// Summary of the fine field.
    pub summary: FieldSummary,
}

/// Coarse sweep, then a fine angular sweep over
/// `[θ₀ − halfwidth, θ₀ + halfwidth)` at the coarse argmin radius `r₀`.
pub fn two_scale_search(
    objective: &QuadraticObjective,
    coarse: &PolarGrid,
    refine_halfwidth_deg: f64,
    fine_step_deg: f64,
    cfg: &RunConfig,
    sched: &SigmaSchedule,
) -> Result<TwoScaleResult> {
    if !(refine_halfwidth_deg > 0.0) || !(fine_step_deg > 0.0) {
        return Err(Error::domain(
            "refinement half-width and fine step must be positive",
        ));
    }
    let coarse_field = sweep(objective, coarse, cfg, sched)?;
    let coarse_summary = coarse_field
        .summary()
        .ok_or_else(|| Error::domain("every coarse cell failed; nothing to refine"))?;
    let fine_grid = PolarGrid {
        r_min: coarse_summary.argmin_r,
        r_max: coarse_summary.argmin_r,
        r_step: coarse.r_step,
        theta_min_deg: coarse_summary.argmin_theta_deg - refine_halfwidth_deg,
        theta_max_deg: coarse_summary.argmin_theta_deg + refine_halfwidth_deg,
        theta_step_deg: fine_step_deg,
    };
    let fine = sweep(objective, &fine_grid, cfg, sched)?;
    let summary = fine
        .summary()
        .ok_or_else(|| Error::domain("every fine cell failed"))?;
    Ok(TwoScaleResult {
        coarse: coarse_field,
        fine,
        summary,
    })
}

/// Writes `field` as CSV: `#`-prefixed metadata lines, the header
/// `r,theta_deg,x0_0,x0_1,final_distance,status`, then one row per cell with
/// 17 significant digits. The file appears atomically.
pub fn emit_csv(field: &DistanceField, path: &Path) -> Result<()> {
    write_atomic(path, |w| field.write_csv(w))
}

/// Parses a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<DistanceField> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(path, &text)
}

fn parse_csv(path: &Path, text: &str) -> Result<DistanceField> {
    let err = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut meta = std::collections::HashMap::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once(':') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if !seen_header {
            if line.trim() != "r,theta_deg,x0_0,x0_1,final_distance,status" {
                return Err(err(format!("line {lineno}: unexpected header '{line}'")));
            }
            seen_header = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(err(format!(
                "line {lineno}: expected 6 fields, found {}",
                fields.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            match s {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => s
                    .parse()
                    .map_err(|_| err(format!("line {lineno}: '{s}' is not a number"))),
            }
        };
        rows.push(FieldRow {
            r: num(fields[0])?,
            theta_deg: num(fields[1])?,
            x0: [num(fields[2])?, num(fields[3])?],
            final_distance: num(fields[4])?,
            status: fields[5]
                .parse()
                .map_err(|e: Error| err(format!("line {lineno}: {e}")))?,
        });
    }
    if !seen_header {
        return Err(err("missing CSV header".to_string()));
    }
    let get = |k: &str| meta.get(k).cloned().unwrap_or_default();
    Ok(DistanceField {
        metadata: FieldMetadata {
            optimizer: get("optimizer"),
            eta: get("eta").parse().unwrap_or(f64::NAN),
            iters: get("iters").parse().unwrap_or(0),
            schedule: get("schedule"),
            objective: get("objective"),
        },
        rows,
    })
}

/// One trial of [`rate_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTrial {
    pub x0: Vector,
    /// Iterations until `‖∇f‖ ≤ ε` (capped one past the bound).
    pub empirical_iters: usize,
    pub bound: f64,
    /// `empirical_iters / bound` (0 when the bound is 0).
    pub ratio: f64,
    /// Steps whose decrease fell short of the guaranteed descent by more than 1e-9.
    pub descent_violations: usize,
    /// Largest `Δf + coef·‖∇f‖²` seen (non-positive when the descent inequality holds).
    pub max_descent_excess: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub ell: f64,
    pub eta: f64,
    pub c_bound: f64,
    pub eps: f64,
    pub trials: Vec<RateTrial>,
    pub violations: usize,
}

/// Compares empirical iteration counts with [`iteration_bound`] on random
/// starts in the unit ball, for a positive-definite quadratic with `η = 1/ℓ`.
pub fn rate_check(
    objective: &QuadraticObjective,
    trials: usize,
    eps: f64,
    sched: &SigmaSchedule,
    seed: u64,
) -> Result<RateReport> {
    if !(eps > 0.0) {
        return Err(Error::domain("eps must be positive"));
    }
    let n = objective.dim();
    let hessian = objective.hessian();
    let pairs = sym_eigendecompose(&hessian, 1e-14)?;
    let smallest = pairs.last().expect("n >= 1").value;
    if !(smallest > 0.0) {
        return Err(Error::domain(format!(
            "rate_check needs a positive-definite B (smallest eigenvalue {smallest:e})"
        )));
    }
    let ell = pairs[0].value;
    let eta = 1.0 / ell;
    let c = sched.bound();
    let coef = descent_coefficient(c, ell);
    let mut rng = StdRng::seed_from_u64(seed);

    let trials = (0..trials)
        .map(|_| {
            let x0 = random_in_unit_ball(&mut rng, n);
            let f0 = objective.eval(&x0);
            let bound = iteration_bound(c, ell, f0, 0.0, eps)?;
            let cfg = RunConfig {
                eta,
                max_iters: (bound.ceil() as usize).saturating_add(1).max(1),
                eps_stationary: eps,
                escape_radius: f64::INFINITY,
                record_trajectory: true,
            };
            let res = run(objective, &x0, &cfg, sched)?;
            let traj = res.trajectory.as_deref().unwrap_or_default();
            let grads = res.grad_norms.as_deref().unwrap_or_default();
            let mut violations = 0;
            let mut max_excess = f64::NEG_INFINITY;
            for (k, w) in traj.windows(2).enumerate() {
                let excess =
                    objective.eval(&w[1]) - objective.eval(&w[0]) + coef * grads[k] * grads[k];
                max_excess = max_excess.max(excess);
                if excess > 1e-9 {
                    violations += 1;
                }
            }
            let reached = res.status == RunStatus::ReachedStationary;
            let empirical = res.iterations_used;
            Ok(RateTrial {
                x0,
                empirical_iters: empirical,
                bound,
                ratio: if bound > 0.0 {
                    empirical as f64 / bound
                } else {
                    0.0
                },
                descent_violations: violations,
                max_descent_excess: max_excess,
                violated: !reached || empirical as f64 > bound || violations > 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = trials.iter().filter(|t| t.violated).count();
    Ok(RateReport {
        ell,
        eta,
        c_bound: c,
        eps,
        trials,
        violations,
    })
}

/// Uniform sample from the closed unit ball in `ℝⁿ`.
pub fn random_in_unit_ball(rng: &mut impl Rng, n: usize) -> Vector {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&g);
        if len > 0.0 {
            let radius: f64 = rng.random::<f64>().powf(1.0 / n as f64);
            return Vector::from_vec_unchecked(g.iter().map(|v| v * radius / len).collect());
        }
    }
}
