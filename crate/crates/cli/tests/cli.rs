use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use drumshape_cli::output::{read_polygon, svg, wulff_like, Overlays};
use drumshape_core::features::analyze;
use drumshape_core::{hausdorff_modulo_translation, ConvexPolygon, Norm};
use serde_json::Value;

fn square_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/unitsquare.csv")
}

fn drumshape(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drumshape"))
        .args(args)
        .env("DRUMSHAPE_OUT", out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path, command: &str) -> Value {
    let text = fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn eigen_of_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let out = drumshape(dir.path(), &["eigen", "--shape", square_csv().to_str().unwrap(), "--levels", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "eigen");
    assert!((num(&m["results"]["lambda"]) - 19.739).abs() < 0.02);
    assert!(m.get("timings").is_none());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("lambda = 19.739"));
}

#[test]
fn eigenfunction_dump_is_positive_inside() {
    let dir = tempfile::tempdir().unwrap();
    let out = drumshape(
        dir.path(),
        &["eigen", "--shape", square_csv().to_str().unwrap(), "--levels", "2", "--dump-eigenfunction"],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("eigen_function.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r[2] > 0.0 && (0.0..=1.0).contains(&r[0]) && (0.0..=1.0).contains(&r[1])));
}

#[test]
fn reproduce_minimum_is_away_from_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = drumshape(dir.path(), &["reproduce", "--n", "3", "--a-grid", "0.5:0.25:4", "--levels", "2"]);
    assert!(out.status.success());
    let m = manifest(dir.path(), "reproduce");
    assert_eq!(num(&m["results"]["argmin_a"]), 2.0);
    let rows = m["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 15);
    let at = |a: f64| rows.iter().find(|r| num(&r["a"]) == a).unwrap();
    assert!(num(&at(2.0)["f_star_exact"]) < num(&at(1.0)["f_star_exact"]));
    let csv = fs::read_to_string(dir.path().join("reproduce.csv")).unwrap();
    assert!(csv.starts_with("a,lambda_exact,half_perimeter,f_star_exact,lambda_numeric,f_star_numeric\n"));
    assert_eq!(csv.lines().count(), 16);
}

#[test]
fn minimize_euclidean_gives_the_disc() {
    let dir = tempfile::tempdir().unwrap();
    let out = drumshape(dir.path(), &["minimize", "--norm", "p:2", "--starts", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "minimize");
    let f = num(&m["results"]["value"]["f_star"]);
    assert!((f - 11.55).abs() < 0.01 * 11.55, "{f}");
    let shape = read_polygon(&dir.path().join("minimize.csv")).unwrap();
    assert!(shape.len() > 32);
    let svg = fs::read_to_string(dir.path().join("minimize.svg")).unwrap();
    assert!(svg.contains(r#"class="wulff""#));
    assert!(!svg.contains(r#"class="corner""#));
    let trace = fs::read_to_string(dir.path().join("minimize_trace.csv")).unwrap();
    assert!(trace.starts_with("start,iterate,level,f_star,lambda,perimeter\n"));
}

#[test]
fn verify_passes_and_fails_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = drumshape(dir.path(), &["verify", "--pairs", "3", "--norm", "p:1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert_eq!(manifest(dir.path(), "verify")["passed"], Value::Bool(true));
    // The square has facets, but the Euclidean norm has no degenerate direction.
    let bad = drumshape(
        dir.path(),
        &["verify", "--pairs", "3", "--norm", "p:2", "--shape", square_csv().to_str().unwrap()],
    );
    assert_eq!(bad.status.code(), Some(1));
    let m = manifest(dir.path(), "verify");
    assert_eq!(m["passed"], Value::Bool(false));
    assert!(!m["results"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = drumshape(dir, &["analyze", "--norm", "p:1", "--shape", square_csv().to_str().unwrap()]);
        assert!(out.status.success());
    }
    for file in ["analyze.json", "analyze.svg"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn square_svg_highlights_four_facets() {
    let dir = tempfile::tempdir().unwrap();
    let out = drumshape(dir.path(), &["analyze", "--norm", "p:1", "--shape", square_csv().to_str().unwrap()]);
    assert!(out.status.success());
    let svg = fs::read_to_string(dir.path().join("analyze.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="facet""#).count(), 4);
    assert_eq!(svg.matches(r#"class="corner""#).count(), 4);
    assert!(svg.contains(r#"points="0.000000,0.000000 1.000000,0.000000 1.000000,-1.000000 0.000000,-1.000000""#));
}

#[test]
fn wl1_minimizer_is_not_homothetic_to_wulff() {
    let norm = Norm::weighted_l1(1.0 / 3.0, 3.0).unwrap();
    let cfg = drumshape_core::optimizer::OptimizerConfig { n_starts: 1, ..Default::default() };
    let t = drumshape_core::optimizer::minimize(&norm, &cfg).unwrap();
    let w = norm.wulff_shape(256).unwrap();
    let ghost = wulff_like(&w, &t.final_shape);
    let d = t.final_shape.diameter();
    assert!(hausdorff_modulo_translation(&t.final_shape, &ghost).0 > 0.1 * d);
    let report = analyze(&norm, &t.final_shape);
    let overlays = Overlays { facets: &report.facets, corners: &report.corners, wulff: Some(&w) };
    let text = svg(&t.final_shape, &overlays);
    assert_eq!(text, svg(&t.final_shape, &overlays));
    assert_eq!(text.matches(r#"class="wulff""#).count(), 1);
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# eval\nnorm = wl1:1/3,3\ndirections = 16\nformats = json\n").unwrap();
    let out = drumshape(dir.path(), &["--config", cfg.to_str().unwrap(), "eval-norm", "--timings"]);
    assert!(out.status.success());
    let m = manifest(dir.path(), "eval-norm");
    assert_eq!(m["config"]["norm"], "wl1:1/3,3");
    assert_eq!(m["results"]["samples"].as_array().unwrap().len(), 16);
    assert_eq!(m["results"]["degenerate_directions"].as_array().unwrap().len(), 2);
    assert!(m["timings"]["scan"].is_number());
    assert!(!dir.path().join("eval-norm.csv").exists());
    let flagged = drumshape(dir.path(), &["--config", cfg.to_str().unwrap(), "--norm", "p:2", "eval-norm"]);
    assert!(flagged.status.success());
    assert_eq!(manifest(dir.path(), "eval-norm")["config"]["norm"], "p:2");
}

#[test]
fn explicit_out_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = drumshape(env_dir.path(), &["wulff", "--norm", "p:inf", "--out", flag_dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(flag_dir.path().join("wulff.json").exists());
    assert!(!env_dir.path().join("wulff.json").exists());
    let w = read_polygon(&flag_dir.path().join("wulff.csv")).unwrap();
    assert_eq!(w.len(), 4);
    let diamond = ConvexPolygon::new(vec![
        drumshape_core::Vec2::new(1.0, 0.0),
        drumshape_core::Vec2::new(0.0, 1.0),
        drumshape_core::Vec2::new(-1.0, 0.0),
        drumshape_core::Vec2::new(0.0, -1.0),
    ])
    .unwrap();
    assert!(drumshape_core::hausdorff_distance(&w, &diamond) < 1e-9);
}

#[test]
fn errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["eigen"],
        &["eigen", "--shape", "/nonexistent/shape.csv"],
        &["eval-norm", "--norm", "p:0.5"],
        &["--set", "colour=red", "eval-norm"],
        &["minimize", "--k", "30"],
    ];
    for args in cases {
        let out = drumshape(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("drumshape: "), "{args:?}");
    }
    let bad_csv = dir.path().join("bad.csv");
    fs::write(&bad_csv, "0,0\n1,0\n1,1,1\n").unwrap();
    let out = drumshape(dir.path(), &["functional", "--shape", bad_csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let clockwise = dir.path().join("cw.csv");
    fs::write(&clockwise, "0,0\n0,1\n1,1\n1,0\n").unwrap();
    let out = drumshape(dir.path(), &["functional", "--shape", clockwise.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn functional_reports_scale_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = drumshape(dir.path(), &["functional", "--norm", "p:1", "--shape", square_csv().to_str().unwrap()]);
    assert!(out.status.success());
    let v = &manifest(dir.path(), "functional")["results"]["value"];
    // λ = 2π², P = 4: t* = (π²)^{1/3}, f* = 3·2^{-2/3}(2π²)^{1/3}·4^{2/3}.
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((num(&v["perim"]) - 4.0).abs() < 1e-12);
    assert!((num(&v["t_star"]) - pi2.cbrt()).abs() < 1e-3);
    let f = 3.0 * 2f64.powf(-2.0 / 3.0) * (2.0 * pi2).cbrt() * 4f64.powf(2.0 / 3.0);
    assert!((num(&v["f_star"]) - f).abs() < 1e-3 * f);
}
