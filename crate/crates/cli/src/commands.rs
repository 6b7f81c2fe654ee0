use std::io::Write;
use std::path::Path;

use lsgd_core::experiments::{experiment_config, Example, EXPERIMENT_SCHEDULE};
use lsgd_core::io::{fmt_f64, read_matrix_file, read_vector_file, write_atomic};
use lsgd_core::saddle::{
    canonical_attraction_basis, canonical_objective, degenerate_check, eigen_structure,
    general_attraction_basis, QuadraticObjective, SubspaceBasis,
};
use lsgd_core::{
    dense_solve, emit_csv, run, sym_eigendecompose, two_scale_search, CirculantSmoother,
    FieldSummary, GradientSource, PolarGrid, RunConfig, RunStatus, SigmaSchedule, Vector,
};
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, ExampleChoice, Method, ObjectiveArgs, ObjectiveSpec, OptimizeArgs,
    OptimizerChoice, SmoothArgs, SweepArgs,
};
use crate::error::CliError;

type CmdResult = Result<(), CliError>;

fn require(ok: bool, msg: impl FnOnce() -> String) -> CmdResult {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg()))
    }
}

fn positive(flag: &str, v: f64) -> CmdResult {
    require(v > 0.0 && v.is_finite(), || {
        format!("{flag} must be a positive finite number, got {v}")
    })
}

fn write_json(value: &Value, dest: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    match dest {
        Some(path) => Ok(write_atomic(path, |w| writeln!(w, "{text}"))?),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn build_objective(args: &ObjectiveArgs) -> Result<QuadraticObjective, CliError> {
    positive("--c", args.c)?;
    match &args.objective {
        ObjectiveSpec::Canonical => {
            let n = args
                .n
                .ok_or_else(|| CliError::usage("--n is required with --objective canonical"))?;
            require(n >= 2, || {
                format!("--n must be at least 2 for the canonical objective, got {n}")
            })?;
            Ok(canonical_objective(n, args.c)?)
        }
        ObjectiveSpec::File(path) => {
            let b = read_matrix_file(path)?;
            Ok(QuadraticObjective::new(b, args.c)?)
        }
    }
}

pub fn smooth(args: SmoothArgs) -> CmdResult {
    require(args.n >= 2, || {
        format!("--n must be at least 2, got {}", args.n)
    })?;
    require(args.sigma >= 0.0 && args.sigma.is_finite(), || {
        format!("--sigma must be finite and >= 0, got {}", args.sigma)
    })?;
    let y = read_vector_file(&args.input)?;
    require(y.dim() == args.n, || {
        format!("--input has {} entries but --n is {}", y.dim(), args.n)
    })?;
    let smoother = CirculantSmoother::new(args.n, args.sigma)?;
    let x = match args.method {
        Method::Dft => smoother.solve_dft(&y)?,
        Method::Thomas => smoother.solve_thomas(&y)?,
        Method::Dense => dense_solve(&smoother.dense(), &y)?,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for v in x.iter() {
        writeln!(out, "{}", fmt_f64(*v)).map_err(|source| lsgd_core::Error::Io {
            path: "<stdout>".into(),
            source,
        })?;
    }
    Ok(())
}

fn write_trajectory(path: &Path, points: &[Vector], grad_norms: &[f64]) -> CmdResult {
    let n = points.first().map_or(0, |p| p.dim());
    Ok(write_atomic(path, |w| {
        let mut header = vec!["k".to_string()];
        header.extend((0..n).map(|i| format!("x_{i}")));
        header.push("grad_norm".to_string());
        writeln!(w, "{}", header.join(","))?;
        for (k, p) in points.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(p.iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(grad_norms.get(k).copied().unwrap_or(f64::NAN)));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })?)
}

pub fn optimize(args: OptimizeArgs) -> CmdResult {
    let q = build_objective(&args.objective)?;
    positive("--eta", args.eta)?;
    require(args.iters >= 1, || "--iters must be at least 1".to_string())?;
    require(args.eps >= 0.0 && args.eps.is_finite(), || {
        format!("--eps must be finite and >= 0, got {}", args.eps)
    })?;
    require(args.escape_radius > 0.0, || {
        format!(
            "--escape-radius must be positive, got {}",
            args.escape_radius
        )
    })?;
    let x0 = read_vector_file(&args.x0)?;
    require(x0.dim() == q.dim(), || {
        format!(
            "--x0 has {} entries but the objective has dimension {}",
            x0.dim(),
            q.dim()
        )
    })?;
    let cfg = RunConfig {
        eta: args.eta,
        max_iters: args.iters,
        eps_stationary: args.eps,
        escape_radius: args.escape_radius,
        record_trajectory: args.trajectory.is_some(),
    };
    let res = run(&q, &x0, &cfg, &args.schedule)?;
    if let (Some(path), Some(points)) = (&args.trajectory, &res.trajectory) {
        write_trajectory(path, points, res.grad_norms.as_deref().unwrap_or_default())?;
    }
    let report = json!({
        "objective": q.describe(),
        "schedule": args.schedule.to_string(),
        "eta": args.eta,
        "status": res.status.to_string(),
        "iterations_used": res.iterations_used,
        "final_point": res.final_point.as_slice(),
        "final_distance": res.final_point.norm(),
        "final_grad_norm": res.final_grad_norm,
        "final_value": q.eval(&res.final_point),
    });
    write_json(&report, args.output.as_deref())?;
    if res.status == RunStatus::Failed {
        return Err(lsgd_core::Error::Numeric {
            iteration: res.iterations_used,
            iterate: res.final_point.into_inner(),
        }
        .into());
    }
    Ok(())
}

/// Largest `‖Mw − P_W Mw‖ / ‖Mw‖` over the basis of `W`, with `M = A_σ⁻¹B`.
fn invariance_residual(
    q: &QuadraticObjective,
    w: &SubspaceBasis,
    sigma: f64,
) -> Result<f64, CliError> {
    let smoother = CirculantSmoother::new(q.dim(), sigma)?;
    let mut worst = 0.0f64;
    for v in &w.vectors {
        let m = smoother.solve_thomas(&q.b().matvec(v)?)?;
        let scale = m.norm();
        if scale == 0.0 {
            continue;
        }
        let p = w.project(&m);
        worst = worst.max(m.sub(&p).norm() / scale);
    }
    Ok(worst)
}

fn vectors_json(vs: &[Vector]) -> Value {
    Value::Array(vs.iter().map(|v| json!(v.as_slice())).collect())
}

pub fn analyze(args: AnalyzeArgs) -> CmdResult {
    let q = build_objective(&args.objective)?;
    require(q.dim() >= 2, || {
        "the smoothing operator needs dimension at least 2".to_string()
    })?;
    require(!args.sigma_list.is_empty(), || {
        "--sigma-list is empty".to_string()
    })?;
    for &s in &args.sigma_list {
        require(s >= 0.0 && s.is_finite(), || {
            format!("--sigma-list entries must be finite and >= 0, got {s}")
        })?;
    }

    let mut per_sigma = Vec::new();
    let mut degenerate = false;
    for &sigma in &args.sigma_list {
        let es = eigen_structure(&q, sigma)?;
        degenerate |= es.degenerate;
        per_sigma.push(json!({
            "sigma": sigma,
            "eigenvalues": es.pairs.iter().map(|p| p.value).collect::<Vec<_>>(),
            "classes": es.classes,
            "eigenvectors": es.pairs.iter().map(|p| p.vector.as_slice().to_vec()).collect::<Vec<_>>(),
        }));
    }

    let mut report = json!({
        "objective": q.describe(),
        "n": q.dim(),
        "degenerate": degenerate,
        "per_sigma": per_sigma,
    });

    let basis = if q.is_canonical() {
        Some(canonical_attraction_basis(q.dim())?.0)
    } else {
        match general_attraction_basis(&q, 1e-8) {
            Ok(w) => Some(w),
            Err(lsgd_core::Error::DegenerateHessian { eigenvalue }) => {
                report["note"] = json!(format!(
                    "B has an eigenvalue {eigenvalue:e} that is zero within tolerance; \
                     modified LSGD leaves its kernel direction fixed, see degenerate_check"
                ));
                None
            }
            Err(e) => return Err(e.into()),
        }
    };

    match basis {
        Some(w) => {
            let mut worst = 0.0f64;
            for &sigma in &args.sigma_list {
                worst = worst.max(invariance_residual(&q, &w, sigma)?);
            }
            report["dim_W"] = json!(w.dim());
            report["W_basis"] = vectors_json(&w.vectors);
            report["sigma_independent"] = json!(worst <= 1e-8);
            report["max_invariance_residual"] = json!(worst);
        }
        None => {
            report["dim_W"] = Value::Null;
            report["W_basis"] = Value::Null;
            report["sigma_independent"] = Value::Null;
        }
    }

    if degenerate {
        let pairs = sym_eigendecompose(&q.hessian(), 1e-14)?;
        let kernel = pairs
            .iter()
            .min_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
            .expect("dimension >= 2");
        let fixed = degenerate_check(&q, &kernel.vector, &EXPERIMENT_SCHEDULE, 100)?;
        report["degenerate_check"] = json!({
            "kernel_direction": kernel.vector.as_slice(),
            "schedule": EXPERIMENT_SCHEDULE.to_string(),
            "steps": 100,
            "fixed": fixed,
        });
    }

    write_json(&report, args.report.as_deref())
}

fn summary_json(s: &FieldSummary) -> Value {
    serde_json::to_value(s).expect("summary serializes")
}

pub fn sweep(args: SweepArgs) -> CmdResult {
    let objective = match args.example {
        ExampleChoice::One => Example::One.objective(),
        ExampleChoice::Two => Example::Two.objective(),
        ExampleChoice::Custom => {
            let path = args
                .matrix
                .as_ref()
                .ok_or_else(|| CliError::usage("--matrix is required with --example custom"))?;
            positive("--c", args.c)?;
            let b = read_matrix_file(path)?;
            require(b.rows() == 2, || {
                format!(
                    "--matrix must be 2x2 for a polar sweep, got n = {}",
                    b.rows()
                )
            })?;
            QuadraticObjective::new(b, args.c)?
        }
    };
    let sched = match (args.optimizer, args.schedule) {
        (OptimizerChoice::Gd, None) => SigmaSchedule::GD,
        (OptimizerChoice::Gd, Some(_)) => {
            return Err(CliError::usage(
                "--schedule only applies to --optimizer mlsgd",
            ))
        }
        (OptimizerChoice::Mlsgd, s) => s.unwrap_or(EXPERIMENT_SCHEDULE),
    };
    positive("--eta", args.eta)?;
    require(args.iters >= 1, || "--iters must be at least 1".to_string())?;
    positive("--fine-theta-step", args.fine_theta_step)?;
    positive("--refine-halfwidth", args.refine_halfwidth)?;
    let grid = PolarGrid {
        r_min: args.r_min,
        r_max: args.r_max,
        r_step: args.r_step,
        theta_min_deg: -180.0,
        theta_max_deg: 180.0,
        theta_step_deg: args.coarse_theta_step,
    };
    grid.validate().map_err(|e| {
        CliError::usage(format!(
            "invalid grid (--r-min/--r-max/--r-step/--coarse-theta-step): {e}"
        ))
    })?;
    if let Some(t) = args.threads {
        require(t >= 1, || "--threads must be at least 1".to_string())?;
    }
    let cfg = RunConfig {
        eta: args.eta,
        max_iters: args.iters,
        ..experiment_config()
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| {
        CliError::usage(format!(
            "cannot start {:?} worker threads: {e}",
            args.threads
        ))
    })?;
    let result = pool.install(|| {
        two_scale_search(
            &objective,
            &grid,
            args.refine_halfwidth,
            args.fine_theta_step,
            &cfg,
            &sched,
        )
    })?;

    emit_csv(&result.fine, &args.out)?;
    if let Some(path) = &args.coarse_out {
        emit_csv(&result.coarse, path)?;
    }
    let mut summary = summary_json(&result.summary);
    if let Some(coarse) = result.coarse.summary() {
        summary["coarse"] = summary_json(&coarse);
    }
    write_json(&summary, args.summary.as_deref())
}
