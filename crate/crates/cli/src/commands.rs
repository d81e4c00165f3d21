use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use drumshape_core::features::{
    analyze, corner_symmetry_violations, counterexample_rectangles, minkowski_suite, optimality_residual, parse_grid,
    FeatureReport,
};
use drumshape_core::functional::{evaluate, isoperimetric_score, J01};
use drumshape_core::optimizer::{best_trace, gradient_check, run_starts, uniqueness_from_traces, GradientReport};
use drumshape_core::spectral::{base_spacing, eigenfunction_rows, eigenvalue_extrapolated, solve};
use drumshape_core::{ConvexPolygon, Norm, SupportVector, Vec2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{fmt12, polygon_csv, read_polygon, svg, table_csv, to_json, write_atomic, Overlays};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EvalNorm,
    Wulff,
    Eigen,
    Functional,
    Minimize,
    Analyze,
    Verify,
    Reproduce,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EvalNorm => "eval-norm",
            Command::Wulff => "wulff",
            Command::Eigen => "eigen",
            Command::Functional => "functional",
            Command::Minimize => "minimize",
            Command::Analyze => "analyze",
            Command::Verify => "verify",
            Command::Reproduce => "reproduce",
        }
    }
}

/// What a run produced: the manifest as written, a human summary and, for
/// `verify`, whether everything passed.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: Value,
    pub summary: String,
    pub passed: bool,
}

struct Run<'a> {
    cfg: &'a RunConfig,
    command: Command,
    timings: Vec<(String, f64)>,
    clock: Instant,
    summary: String,
}

impl<'a> Run<'a> {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push((stage.to_string(), (now - self.clock).as_secs_f64()));
        self.clock = now;
    }

    fn path(&self, suffix: &str, ext: &str) -> std::path::PathBuf {
        self.cfg.out.join(format!("{}{suffix}.{ext}", self.command.name()))
    }

    fn write(&self, suffix: &str, format: Format, ext: &str, text: &str) -> Result<()> {
        if self.cfg.wants(format) {
            write_atomic(&self.path(suffix, ext), text.as_bytes())?;
        }
        Ok(())
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.summary.push_str(s.as_ref());
        self.summary.push('\n');
    }
}

fn shape_arg(cfg: &RunConfig) -> Result<ConvexPolygon> {
    let path = cfg.shape.as_deref().ok_or_else(|| CliError::Config("this command needs a shape (CSV file)".into()))?;
    read_polygon(Path::new(path))
}

/// Execute `command`, write its files under `cfg.out` and return the manifest.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let norm = cfg.norm()?;
    let mut run = Run { cfg, command, timings: Vec::new(), clock: Instant::now(), summary: String::new() };
    let (results, passed) = match command {
        Command::EvalNorm => (eval_norm(&mut run, &norm)?, true),
        Command::Wulff => (wulff(&mut run, &norm)?, true),
        Command::Eigen => (eigen(&mut run)?, true),
        Command::Functional => (functional(&mut run, &norm)?, true),
        Command::Minimize => (minimize(&mut run, &norm)?, true),
        Command::Analyze => (analyze_shape(&mut run, &norm)?, true),
        Command::Verify => verify(&mut run, &norm)?,
        Command::Reproduce => (reproduce(&mut run)?, true),
    };
    let mut manifest = Map::new();
    manifest.insert("tool".into(), json!("drumshape"));
    manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    manifest.insert("command".into(), json!(command.name()));
    manifest.insert("config".into(), to_json(cfg)?);
    manifest.insert("seed".into(), json!(cfg.seed));
    manifest.insert("passed".into(), json!(passed));
    manifest.insert("results".into(), results);
    if cfg.timings {
        let t: Map<String, Value> = run.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        manifest.insert("timings".into(), Value::Object(t));
    }
    let manifest = Value::Object(manifest);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    run.write("", Format::Json, "json", &text)?;
    Ok(Outcome { manifest, summary: run.summary, passed })
}

fn eval_norm(run: &mut Run, norm: &Norm) -> Result<Value> {
    let n = run.cfg.directions;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let angle = 2.0 * PI * i as f64 / n as f64;
        let probe = norm.one_sided_derivatives(Vec2::from_angle(angle));
        rows.push(vec![angle, norm.eval(Vec2::from_angle(angle)), probe.theta_minus, probe.theta_plus]);
    }
    let degenerate = norm.degenerate_directions(720, 1e-6);
    let cones = norm.additivity_cones(720);
    run.lap("scan");
    run.line(format!("norm {norm}"));
    for i in 0..8 {
        let angle = PI * i as f64 / 4.0;
        run.line(format!("rho(e({})) = {}", fmt12(angle), fmt12(norm.eval(Vec2::from_angle(angle)))));
    }
    for d in &degenerate {
        run.line(format!("degenerate direction {} (gap {})", fmt12(d.angle), fmt12(d.gap)));
    }
    for c in &cones {
        run.line(format!("additivity cone [{}, {}]", fmt12(c.start), fmt12(c.end)));
    }
    run.write("", Format::Csv, "csv", &table_csv(&["angle", "rho", "theta_minus", "theta_plus"], &rows))?;
    let samples: Vec<Value> = rows.iter().map(|r| json!({"angle": r[0], "rho": r[1]})).collect();
    to_json(&json!({
        "norm": norm.to_string(),
        "samples": samples,
        "degenerate_directions": degenerate,
        "additivity_cones": cones,
        "kink_angles": norm.kink_angles(),
    }))
}

fn wulff(run: &mut Run, norm: &Norm) -> Result<Value> {
    let w = norm.wulff_shape(run.cfg.directions)?;
    run.lap("wulff");
    let report = analyze(norm, &w);
    run.line(format!("wulff shape of {norm}: {} vertices, area {}", w.len(), fmt12(w.area())));
    run.write("", Format::Csv, "csv", &polygon_csv(&w))?;
    run.write("", Format::Svg, "svg", &svg(&w, &Overlays { facets: &report.facets, ..Default::default() }))?;
    to_json(&json!({
        "area": w.area(),
        "perimeter": w.perimeter(norm),
        "isoperimetric_score": isoperimetric_score(&w, norm),
        "polygon": w,
    }))
}

fn eigen(run: &mut Run) -> Result<Value> {
    let p = shape_arg(run.cfg)?;
    let e = eigenvalue_extrapolated(&p, run.cfg.levels)?;
    run.lap("eigenvalue");
    run.line(format!("lambda = {} +- {}", fmt12(e.lambda), fmt12(e.error_estimate)));
    if run.cfg.dump_eigenfunction {
        let h = base_spacing(&p) / 2f64.powi(run.cfg.levels as i32 - 1);
        let (grid, sol) = solve(&p, h)?;
        let rows: Vec<Vec<f64>> = eigenfunction_rows(&grid, &sol).into_iter().map(|(x, v)| vec![x.x, x.y, v]).collect();
        write_atomic(&run.path("_function", "csv"), table_csv(&["x", "y", "value"], &rows).as_bytes())?;
        run.lap("eigenfunction");
    }
    to_json(&e)
}

fn functional(run: &mut Run, norm: &Norm) -> Result<Value> {
    let p = shape_arg(run.cfg)?;
    let v = evaluate(&p, norm, run.cfg.levels)?;
    run.lap("functional");
    run.line(format!(
        "lambda {} perimeter {} F {} t* {} f* {}",
        fmt12(v.lambda),
        fmt12(v.perim),
        fmt12(v.f),
        fmt12(v.t_star),
        fmt12(v.f_star)
    ));
    to_json(&json!({"value": v, "isoperimetric_score": isoperimetric_score(&p, norm)}))
}

fn shape_svg(run: &Run, norm: &Norm, p: &ConvexPolygon, report: &FeatureReport) -> Result<()> {
    if run.cfg.wants(Format::Svg) {
        let w = norm.wulff_shape(run.cfg.directions)?;
        let overlays = Overlays { facets: &report.facets, corners: &report.corners, wulff: Some(&w) };
        write_atomic(&run.path("", "svg"), svg(p, &overlays).as_bytes())?;
    }
    Ok(())
}

fn minimize(run: &mut Run, norm: &Norm) -> Result<Value> {
    let traces = run_starts(norm, &run.cfg.optimizer())?;
    run.lap("descent");
    let best = best_trace(&traces).ok_or_else(|| CliError::Config("no starts were run".into()))?;
    let shape = &traces[best].final_shape;
    let report = analyze(norm, shape);
    let uniqueness = uniqueness_from_traces(&traces);
    run.lap("analysis");
    let v = traces[best].final_value;
    run.line(format!("f* = {} (lambda {}, perimeter {}) from start {best}", fmt12(v.f_star), fmt12(v.lambda), fmt12(v.perim)));
    run.line(format!(
        "{} facets, {} corners, {} theorem violations, spread between starts {} of diameter",
        report.facets.len(),
        report.corners.len(),
        report.violations().count(),
        fmt12(uniqueness.relative())
    ));
    run.write("", Format::Csv, "csv", &polygon_csv(shape))?;
    let mut rows = Vec::new();
    for t in &traces {
        for (i, it) in t.iterates.iter().enumerate() {
            rows.push(vec![t.start_index as f64, i as f64, it.level as f64, it.value.f_star, it.value.lambda, it.value.perim]);
        }
    }
    run.write("_trace", Format::Csv, "csv", &table_csv(&["start", "iterate", "level", "f_star", "lambda", "perimeter"], &rows))?;
    shape_svg(run, norm, shape, &report)?;
    let starts: Vec<Value> = traces
        .iter()
        .map(|t| {
            json!({
                "start": t.start,
                "index": t.start_index,
                "status": t.status,
                "iterations": t.iterates.len(),
                "evaluations": t.evaluations,
                "f_star": t.final_value.f_star,
            })
        })
        .collect();
    to_json(&json!({
        "best_start": best,
        "value": v,
        "polygon": shape,
        "features": report,
        "uniqueness": uniqueness,
        "starts": starts,
    }))
}

fn analyze_shape(run: &mut Run, norm: &Norm) -> Result<Value> {
    let p = shape_arg(run.cfg)?;
    let report = analyze(norm, &p);
    let symmetry = corner_symmetry_violations(&p);
    // Only defined for smooth norms on shapes without facets or corners.
    let residual = if norm.kink_angles().is_empty() && report.facets.is_empty() && report.corners.is_empty() {
        let (_, e) = solve(&p, base_spacing(&p) / 4.0)?;
        optimality_residual(norm, &p, &e).ok()
    } else {
        None
    };
    run.lap("analysis");
    run.line(format!("{} facets, {} corners", report.facets.len(), report.corners.len()));
    for v in report.violations().chain(&symmetry) {
        run.line(format!("violation: {v}"));
    }
    if let Some(r) = residual {
        run.line(format!("optimality residual {}", fmt12(r)));
    }
    shape_svg(run, norm, &p, &report)?;
    to_json(&json!({
        "features": report,
        "corner_symmetry_violations": symmetry,
        "optimality_residual": residual,
    }))
}

/// Shape gradient against finite differences on 8 random faces of a disc at
/// half the Euclidean optimal radius. That far from optimal, the eigenvalue term
/// dominates every face, so no component is close to zero.
pub fn gradient_battery(cfg: &RunConfig, norm: &Norm) -> Result<GradientReport> {
    let r = 0.5 * (J01 * J01 / PI).cbrt();
    let s = SupportVector::new(vec![r; cfg.k])?;
    let p = s.to_polygon()?;
    let mut faces: Vec<usize> = (0..cfg.k).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    faces.shuffle(&mut rng);
    faces.truncate(8);
    faces.sort_unstable();
    gradient_check(norm, &s, &faces, 2.0 * p.inradius() / 128.0).map_err(Into::into)
}

#[derive(Serialize)]
struct ScalingRow {
    t: f64,
    lambda_error: f64,
    perimeter_error: f64,
}

fn verify(run: &mut Run, norm: &Norm) -> Result<(Value, bool)> {
    let cfg = run.cfg;
    let mut violations = Vec::new();

    let mink = minkowski_suite(cfg.seed, cfg.pairs, cfg.levels)?;
    for p in mink.pairs.iter().filter(|p| !p.passed) {
        violations.push(format!("minkowski pair {} failed", p.index));
    }
    run.lap("minkowski");

    let grad = gradient_battery(cfg, norm)?;
    if !(grad.max_relative_error <= cfg.gradient_tol) {
        violations.push(format!("gradient relative error {} above {}", fmt12(grad.max_relative_error), cfg.gradient_tol));
    }
    run.lap("gradient");

    let shape = match &cfg.shape {
        Some(_) => shape_arg(cfg)?,
        None => ConvexPolygon::rectangle(-0.5, -0.5, 0.5, 0.5)?,
    };
    let base = eigenvalue_extrapolated(&shape, cfg.levels)?.lambda;
    let mut scaling = Vec::new();
    for t in [0.5, 2.0, 3.0] {
        let scaled = shape.scale(t);
        let lambda = eigenvalue_extrapolated(&scaled, cfg.levels)?.lambda;
        let row = ScalingRow {
            t,
            lambda_error: (lambda * t * t / base - 1.0).abs(),
            perimeter_error: (scaled.perimeter(norm) / (t * shape.perimeter(norm)) - 1.0).abs(),
        };
        if !(row.lambda_error <= cfg.scaling_tol && row.perimeter_error <= cfg.scaling_tol) {
            violations.push(format!("scaling by {t} off by {} / {}", fmt12(row.lambda_error), fmt12(row.perimeter_error)));
        }
        scaling.push(row);
    }
    run.lap("scaling");

    let features = match &cfg.shape {
        Some(_) => {
            let report = analyze(norm, &shape);
            violations.extend(report.violations().cloned());
            Some(report)
        }
        None => None,
    };
    run.lap("features");

    let passed = violations.is_empty();
    run.line(format!("minkowski {}/{} pairs", mink.n_passed, mink.pairs.len()));
    run.line(format!("gradient max relative error {}", fmt12(grad.max_relative_error)));
    for s in &scaling {
        run.line(format!("scaling t={} lambda {} perimeter {}", s.t, fmt12(s.lambda_error), fmt12(s.perimeter_error)));
    }
    for v in &violations {
        run.line(format!("violation: {v}"));
    }
    run.line(if passed { "verify: PASS" } else { "verify: FAIL" });
    let value = to_json(&json!({
        "minkowski": mink,
        "gradient": grad,
        "scaling": scaling,
        "features": features,
        "violations": violations,
    }))?;
    Ok((value, passed))
}

fn reproduce(run: &mut Run) -> Result<Value> {
    let grid = parse_grid(&run.cfg.a_grid)?;
    let report = counterexample_rectangles(run.cfg.n, &grid, Some(run.cfg.levels))?;
    run.lap("rectangles");
    let mut table = String::from("       a      lambda_exact     f_star_exact   f_star_numeric\n");
    let mut rows = Vec::new();
    for r in &report.rows {
        let numeric = r.f_star_numeric.unwrap_or(f64::NAN);
        let _ = writeln!(table, "{:8.4} {:17.9} {:16.9} {:16.9}", r.a, r.lambda_exact, r.f_star_exact, numeric);
        rows.push(vec![r.a, r.lambda_exact, r.half_perimeter, r.f_star_exact, r.lambda_numeric.unwrap_or(f64::NAN), numeric]);
    }
    run.summary.push_str(&table);
    run.line(format!("minimum of f_star at a = {}", fmt12(report.argmin_a)));
    run.write(
        "",
        Format::Csv,
        "csv",
        &table_csv(&["a", "lambda_exact", "half_perimeter", "f_star_exact", "lambda_numeric", "f_star_numeric"], &rows),
    )?;
    to_json(&report)
}
