//! Facets and corners of computed shapes, matched against what the norm predicts,
//! plus the numerical experiments built on them.

use crate::error::{Error, Result};
use crate::functional::FunctionalValue;
use crate::geometry::{hausdorff_modulo_translation, ConvexPolygon};
use crate::norm::{AdditivityCone, DegenerateDirection, Norm};
use crate::spectral::{eigenvalue_extrapolated, EigenSolution};
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const FACET_TOL: f64 = 0.05;
pub const CORNER_TOL: f64 = 0.2;
pub const MATCH_TOL: f64 = 0.035;
/// Consecutive edges closer than this in direction belong to one facet.
pub const ANGLE_MERGE_TOL: f64 = 0.01;
/// Gap θ⁺ − θ⁻ above which a direction counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;
/// Relative defect below which a tangent pair counts as additive.
pub const ADDITIVITY_TOL: f64 = 1e-9;
const SCAN_ANGLES: usize = 720;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Unit direction of the segment, counterclockwise along the boundary.
    pub direction: Vec2,
    pub length: f64,
    pub start: Vec2,
    pub end: Vec2,
}

impl Facet {
    /// Direction angle modulo π, in `[0, π)`.
    pub fn axis_angle(&self) -> f64 {
        axis_angle(self.direction)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub point: Vec2,
    pub v_minus: Vec2,
    pub v_plus: Vec2,
    pub turning: f64,
}

fn axis_angle(v: Vec2) -> f64 {
    let a = v.angle().rem_euclid(PI);
    if PI - a < 1e-12 {
        0.0
    } else {
        a
    }
}

/// Distance between two angles taken modulo π.
fn axis_mismatch(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Maximal straight runs of the boundary longer than `facet_tol·diameter`.
pub fn detect_facets(p: &ConvexPolygon, facet_tol: f64) -> Vec<Facet> {
    let v = p.vertices();
    let n = v.len();
    let dir = |e: usize| (v[(e + 1) % n] - v[e]).normalized();
    let merged = |e: usize| dir(e).angle_to(dir((e + 1) % n)).abs() < ANGLE_MERGE_TOL;
    // Start at an edge that does not continue the previous one.
    let Some(first) = (0..n).find(|&e| !merged((e + n - 1) % n)) else {
        return vec![];
    };
    let limit = facet_tol * p.diameter();
    let mut facets = Vec::new();
    let mut e = first;
    let mut seen = 0;
    while seen < n {
        let start = e;
        let mut len = 1;
        while len < n && merged((start + len - 1) % n) {
            len += 1;
        }
        let (a, b) = (v[start], v[(start + len) % n]);
        let length = a.dist(b);
        if length > limit {
            facets.push(Facet { direction: (b - a).normalized(), length, start: a, end: b });
        }
        seen += len;
        e = (start + len) % n;
    }
    facets
}

/// Vertices whose exterior turning angle exceeds `corner_tol`.
pub fn detect_corners(p: &ConvexPolygon, corner_tol: f64) -> Vec<Corner> {
    let v = p.vertices();
    let n = v.len();
    (0..n)
        .filter_map(|i| {
            let v_minus = (v[i] - v[(i + n - 1) % n]).normalized();
            let v_plus = (v[(i + 1) % n] - v[i]).normalized();
            let turning = v_minus.angle_to(v_plus);
            (turning > corner_tol).then_some(Corner { point: v[i], v_minus, v_plus, turning })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetMatch {
    pub facet_angle: f64,
    pub degenerate_angle: f64,
    pub mismatch: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerMatch {
    pub point: Vec2,
    pub additive: bool,
    /// `1 − ρ(v⁻ + v⁺) / (ρ(v⁻) + ρ(v⁺))`.
    pub defect: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureReport {
    pub facets: Vec<Facet>,
    pub corners: Vec<Corner>,
    pub degenerate_dirs: Vec<DegenerateDirection>,
    pub additivity_cones: Vec<AdditivityCone>,
    pub facet_matches: Vec<FacetMatch>,
    pub corner_matches: Vec<CornerMatch>,
    pub facet_violations: Vec<String>,
    pub corner_violations: Vec<String>,
}

impl FeatureReport {
    pub fn violations(&self) -> impl Iterator<Item = &String> {
        self.facet_violations.iter().chain(&self.corner_violations)
    }

    pub fn passed(&self) -> bool {
        self.facet_violations.is_empty() && self.corner_violations.is_empty()
    }
}

/// Facets of `p` against the degenerate directions of ρ, both ways.
pub fn verify_facet_theorem(norm: &Norm, p: &ConvexPolygon) -> FeatureReport {
    let facets = detect_facets(p, FACET_TOL);
    let degenerate_dirs = norm.degenerate_directions(SCAN_ANGLES, DEGENERACY_TOL);
    let mut facet_matches = Vec::new();
    let mut facet_violations = Vec::new();
    for f in &facets {
        let a = f.axis_angle();
        let best = degenerate_dirs
            .iter()
            .map(|d| (d.angle, axis_mismatch(a, d.angle)))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((d, m)) if m < MATCH_TOL => {
                facet_matches.push(FacetMatch { facet_angle: a, degenerate_angle: d, mismatch: m })
            }
            _ => facet_violations.push(format!(
                "facet at angle {a:.6} (length {:.6}) has no degenerate direction",
                f.length
            )),
        }
    }
    for d in &degenerate_dirs {
        if !facets.iter().any(|f| axis_mismatch(f.axis_angle(), d.angle) < MATCH_TOL) {
            facet_violations.push(format!("degenerate direction at angle {:.6} has no facet", d.angle));
        }
    }
    FeatureReport { facets, degenerate_dirs, facet_matches, facet_violations, ..Default::default() }
}

/// Corners of `p` against the linearity cones of ρ: every corner must have an
/// additive tangent pair, and every cone must hold the tangents of some corner.
pub fn verify_corner_theorem(norm: &Norm, p: &ConvexPolygon) -> FeatureReport {
    let corners = detect_corners(p, CORNER_TOL);
    let additivity_cones = norm.additivity_cones(SCAN_ANGLES);
    let mut corner_matches = Vec::new();
    let mut corner_violations = Vec::new();
    for c in &corners {
        let rhs = norm.eval(c.v_minus) + norm.eval(c.v_plus);
        let defect = 1.0 - norm.eval(c.v_minus + c.v_plus) / rhs;
        let additive = norm.additivity_on_pair(c.v_minus, c.v_plus, ADDITIVITY_TOL);
        if !additive {
            corner_violations.push(format!(
                "corner at ({:.6}, {:.6}) turning {:.4} has non-additive tangents (defect {defect:.3e})",
                c.point.x, c.point.y, c.turning
            ));
        }
        corner_matches.push(CornerMatch { point: c.point, additive, defect });
    }
    for cone in &additivity_cones {
        let held = corners
            .iter()
            .any(|c| cone.contains(c.v_minus, MATCH_TOL) && cone.contains(c.v_plus, MATCH_TOL));
        if !held {
            corner_violations.push(format!(
                "additivity cone [{:.6}, {:.6}] has no corner",
                cone.start, cone.end
            ));
        }
    }
    FeatureReport { corners, additivity_cones, corner_matches, corner_violations, ..Default::default() }
}

/// Both theorems on one shape.
pub fn analyze(norm: &Norm, p: &ConvexPolygon) -> FeatureReport {
    let f = verify_facet_theorem(norm, p);
    let c = verify_corner_theorem(norm, p);
    FeatureReport {
        facets: f.facets,
        corners: c.corners,
        degenerate_dirs: f.degenerate_dirs,
        additivity_cones: c.additivity_cones,
        facet_matches: f.facet_matches,
        corner_matches: c.corner_matches,
        facet_violations: f.facet_violations,
        corner_violations: c.corner_violations,
    }
}

/// Corners of the centered shape that lack a mirror corner at `−x` with
/// tangents `−v±`: position within `0.02·diameter`, tangents within half of
/// [`CORNER_TOL`]. On a support-sampled polygon a corner's one-sided tangents are
/// only known to one angular step, and half the corner threshold still cannot
/// confuse a corner with a smooth point.
pub fn corner_symmetry_violations(p: &ConvexPolygon) -> Vec<String> {
    let centered = p.translate(-p.centroid());
    let corners = detect_corners(&centered, CORNER_TOL);
    let tol = 0.02 * centered.diameter();
    let close = |a: Vec2, b: Vec2| a.angle_to(b).abs() < 0.5 * CORNER_TOL;
    corners
        .iter()
        .filter(|c| {
            // Under x ↦ −x the tangent order along the boundary is preserved.
            !corners.iter().any(|d| {
                d.point.dist(-c.point) < tol && close(d.v_minus, -c.v_minus) && close(d.v_plus, -c.v_plus)
            })
        })
        .map(|c| format!("corner at ({:.6}, {:.6}) has no mirror image", c.point.x, c.point.y))
        .collect()
}

/// First variation of the ρ-perimeter when edge `i` moves outward at unit speed.
fn edge_perimeter_rate(norm: &Norm, v: &[Vec2], i: usize) -> f64 {
    let n = v.len();
    let t = |e: usize| (v[(e + 1) % n] - v[e % n]).normalized();
    let (tp, tc, tn) = (t(i + n - 1), t(i), t(i + 1));
    let a1 = tp.angle_to(tc);
    let a2 = tc.angle_to(tn);
    norm.eval(tp) / a1.sin() + norm.eval(tn) / a2.sin() - norm.eval(tc) * (1.0 / a1.tan() + 1.0 / a2.tan())
}

/// Spread of `|∇h|² / C_ρ` along the boundary, as a coefficient of variation
/// weighted by edge length. `C_ρ` is the ρ-curvature, read off as the perimeter
/// first variation per unit edge length. Numerator and denominator are averaged
/// over a Gaussian window of 3 edges before dividing. `e` must be the eigenpair
/// computed on `p` itself.
pub fn optimality_residual(norm: &Norm, p: &ConvexPolygon, e: &EigenSolution) -> Result<f64> {
    if !norm.kink_angles().is_empty() {
        return Err(Error::Precondition("optimality residual needs a norm smooth away from 0".into()));
    }
    let corners = detect_corners(p, CORNER_TOL);
    let facets = detect_facets(p, FACET_TOL);
    if !corners.is_empty() || !facets.is_empty() {
        return Err(Error::Precondition(format!(
            "shape has {} corners and {} facets",
            corners.len(),
            facets.len()
        )));
    }
    let v = p.vertices();
    let n = v.len();
    let lengths: Vec<f64> = (0..n).map(|i| v[i].dist(v[(i + 1) % n])).collect();
    let flux: Vec<f64> = (0..n).map(|i| e.profile.edge_integral(i)).collect();
    let rate: Vec<f64> = (0..n).map(|i| edge_perimeter_rate(norm, v, i)).collect();
    let width = 3.0;
    let reach = (3.0 * width) as isize;
    let kernel: Vec<(isize, f64)> =
        (-reach..=reach).map(|j| (j, (-0.5 * (j as f64 / width).powi(2)).exp())).collect();
    let window = |x: &[f64], i: usize| -> f64 {
        kernel.iter().map(|&(j, w)| w * x[(i as isize + j).rem_euclid(n as isize) as usize]).sum()
    };
    let ratio: Vec<f64> = (0..n).map(|i| window(&flux, i) / window(&rate, i)).collect();
    let total: f64 = lengths.iter().sum();
    let mean = ratio.iter().zip(&lengths).map(|(r, l)| r * l).sum::<f64>() / total;
    let var = ratio.iter().zip(&lengths).map(|(r, l)| l * (r - mean).powi(2)).sum::<f64>() / total;
    Ok(var.sqrt() / mean)
}

// ---------------------------------------------------------------------------
// Minkowski combinations

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiPair {
    pub index: usize,
    /// `αλ(p) + (1−α)λ(q) − λ(αp ⊕ (1−α)q)` for α = 1/4, 1/2, 3/4.
    pub convexity_slack: [f64; 3],
    /// Combined solver error bound for the slack.
    pub tolerance: f64,
    /// Largest relative error of perimeter affinity over the checked norms.
    pub perimeter_affinity_error: f64,
    /// `λ(p⊕q)^{−1/2} / (λ(p)^{−1/2} + λ(q)^{−1/2}) − 1`.
    pub brunn_minkowski_margin: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiReport {
    pub pairs: Vec<MinkowskiPair>,
    pub n_passed: usize,
    pub min_relative_slack: f64,
}

pub const PERIMETER_AFFINITY_TOL: f64 = 1e-12;
pub const BRUNN_MINKOWSKI_TOL: f64 = 0.01;

/// Random convex polygon under a random linear map, so pairs are far from homothetic.
pub fn random_convex<R: Rng>(rng: &mut R) -> ConvexPolygon {
    loop {
        let n = rng.gen_range(5..12);
        let base = ConvexPolygon::random(rng, n, 1.0);
        let stretch = rng.gen_range(0.5..2.0);
        let turn = rng.gen_range(0.0..PI);
        let mapped: Vec<Vec2> =
            base.vertices().iter().map(|v| Vec2::new(v.x * stretch, v.y / stretch).rotate(turn)).collect();
        if let Ok(p) = ConvexPolygon::new(mapped) {
            if p.inradius() > 0.12 * p.diameter() {
                return p;
            }
        }
    }
}

/// Check λ-convexity, perimeter affinity and Brunn–Minkowski on one pair.
/// `λ(p⊕q)` is taken as `λ(½p⊕½q)/4` to reuse the α = 1/2 solve.
pub fn minkowski_check(index: usize, p: &ConvexPolygon, q: &ConvexPolygon, levels: usize) -> Result<MinkowskiPair> {
    let norms = [Norm::l1(), Norm::euclidean(), Norm::linf()];
    let lp = eigenvalue_extrapolated(p, levels)?;
    let lq = eigenvalue_extrapolated(q, levels)?;
    let mut convexity_slack = [0.0; 3];
    let mut tolerance: f64 = 0.0;
    let mut perimeter_affinity_error: f64 = 0.0;
    let mut half = 0.0;
    for (slot, alpha) in [0.25, 0.5, 0.75].into_iter().enumerate() {
        let m = p.scale(alpha).minkowski_sum(&q.scale(1.0 - alpha));
        let lm = eigenvalue_extrapolated(&m, levels)?;
        convexity_slack[slot] = alpha * lp.lambda + (1.0 - alpha) * lq.lambda - lm.lambda;
        let err = alpha * lp.error_estimate + (1.0 - alpha) * lq.error_estimate + lm.error_estimate;
        tolerance = tolerance.max(err);
        for norm in &norms {
            let lhs = m.perimeter(norm);
            let rhs = alpha * p.perimeter(norm) + (1.0 - alpha) * q.perimeter(norm);
            perimeter_affinity_error = perimeter_affinity_error.max((lhs - rhs).abs() / rhs);
        }
        if slot == 1 {
            half = lm.lambda;
        }
    }
    let sum = half / 4.0;
    let brunn_minkowski_margin = sum.powf(-0.5) / (lp.lambda.powf(-0.5) + lq.lambda.powf(-0.5)) - 1.0;
    let passed = convexity_slack.iter().all(|&s| s >= -tolerance)
        && convexity_slack[1] > tolerance
        && perimeter_affinity_error <= PERIMETER_AFFINITY_TOL
        && brunn_minkowski_margin >= -BRUNN_MINKOWSKI_TOL;
    Ok(MinkowskiPair { index, convexity_slack, tolerance, perimeter_affinity_error, brunn_minkowski_margin, passed })
}

/// [`minkowski_check`] on `n_pairs` seeded random pairs; pair `i` draws from
/// stream `i` of the generator seeded by `seed`.
pub fn minkowski_suite(seed: u64, n_pairs: usize, levels: usize) -> Result<MinkowskiReport> {
    let mut pairs = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let p = random_convex(&mut rng);
        let q = random_convex(&mut rng);
        pairs.push(minkowski_check(i, &p, &q, levels)?);
    }
    let n_passed = pairs.iter().filter(|p| p.passed).count();
    let min_relative_slack = pairs
        .iter()
        .map(|p| p.convexity_slack[1] / p.tolerance.max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    Ok(MinkowskiReport { pairs, n_passed, min_relative_slack })
}

// ---------------------------------------------------------------------------
// Rectangles under the asymmetric ℓ¹ norm

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleRow {
    pub a: f64,
    /// `π²(a²/n² + n²/a²)`, the eigenvalue of `[0, n/a]×[0, a/n]`.
    pub lambda_exact: f64,
    /// `1/a + a`, half the perimeter.
    pub half_perimeter: f64,
    /// `3 A^{1/3} B^{2/3}`.
    pub f_star_exact: f64,
    pub lambda_numeric: Option<f64>,
    pub f_star_numeric: Option<f64>,
}

impl RectangleRow {
    pub fn lambda_error(&self) -> Option<f64> {
        self.lambda_numeric.map(|l| (l - self.lambda_exact).abs() / self.lambda_exact)
    }

    pub fn f_star_error(&self) -> Option<f64> {
        self.f_star_numeric.map(|f| (f - self.f_star_exact).abs() / self.f_star_exact)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleReport {
    pub n: f64,
    pub rows: Vec<RectangleRow>,
    pub argmin_a: f64,
}

/// The rectangle family `[0, n/a]×[0, a/n]` under `ρ(x) = |x₁|/n + n|x₂|`.
/// With `levels = Some(l)` each row is cross-checked against the eigensolver.
pub fn counterexample_rectangles(n: f64, a_grid: &[f64], levels: Option<usize>) -> Result<RectangleReport> {
    if !(n >= 1.0) || a_grid.is_empty() || a_grid.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("need n >= 1 and a non-empty positive a-grid".into()));
    }
    let norm = Norm::weighted_l1(1.0 / n, n)?;
    let mut rows = Vec::with_capacity(a_grid.len());
    for &a in a_grid {
        let lambda_exact = PI * PI * (a * a / (n * n) + n * n / (a * a));
        let half_perimeter = 1.0 / a + a;
        let f_star_exact = 3.0 * lambda_exact.cbrt() * half_perimeter.powf(2.0 / 3.0);
        let (lambda_numeric, f_star_numeric) = match levels {
            Some(l) => {
                let rect = ConvexPolygon::rectangle(0.0, 0.0, n / a, a / n)?;
                let e = eigenvalue_extrapolated(&rect, l)?;
                let v = FunctionalValue::from_parts(e.lambda, rect.perimeter(&norm), e.error_estimate)?;
                (Some(e.lambda), Some(v.f_star))
            }
            None => (None, None),
        };
        rows.push(RectangleRow { a, lambda_exact, half_perimeter, f_star_exact, lambda_numeric, f_star_numeric });
    }
    let argmin_a = rows.iter().min_by(|x, y| x.f_star_exact.total_cmp(&y.f_star_exact)).unwrap().a;
    Ok(RectangleReport { n, rows, argmin_a })
}

/// Parse `lo:step:hi` into the inclusive grid `lo, lo+step, …`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("grid `{spec}` is not lo:step:hi"));
    let parts: Vec<f64> =
        spec.split(':').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [lo, step, hi] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

// ---------------------------------------------------------------------------
// Perimeter derivative under facet bumps

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerimeterDerivativeReport {
    pub direction: Vec2,
    pub gap: f64,
    /// `∫|ψ'|` over the facet.
    pub total_variation: f64,
    pub predicted: f64,
    pub measured: f64,
    /// `|measured − predicted| / max(predicted, ∫|ψ'|)`.
    pub relative_error: f64,
}

/// Right derivative in `s` of the ρ-perimeter when the facet is pushed outward
/// by `s·ψ`, against `((θ⁺ − θ⁻)/2)·∫|ψ'|`. `bump` lists `(σ, ψ)` knots with `σ`
/// the fraction of the facet length; ψ must vanish at both ends. The derivative
/// is a Richardson extrapolation of difference quotients at `s = 1e-2, 5e-3, 2.5e-3`.
pub fn perimeter_derivative_check(norm: &Norm, facet: &Facet, bump: &[(f64, f64)]) -> Result<PerimeterDerivativeReport> {
    if bump.len() < 2 || bump[0].1 != 0.0 || bump[bump.len() - 1].1 != 0.0 {
        return Err(Error::InvalidArgument("bump must have at least two knots and vanish at the ends".into()));
    }
    let e = facet.direction;
    let outward = Vec2::new(e.y, -e.x);
    let len = facet.length;
    let path_length = |s: f64| -> f64 {
        let pts: Vec<Vec2> = bump.iter().map(|&(t, psi)| facet.start + e * (t * len) + outward * (s * psi)).collect();
        pts.windows(2).map(|w| norm.eval(w[1] - w[0])).sum()
    };
    let base = path_length(0.0);
    let q = |s: f64| (path_length(s) - base) / s;
    let (q1, q2, q3) = (q(1e-2), q(5e-3), q(2.5e-3));
    let r1 = 2.0 * q2 - q1;
    let r2 = 2.0 * q3 - q2;
    let measured = (4.0 * r2 - r1) / 3.0;
    let total_variation: f64 =
        bump.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum();
    // θ± along the facet direction: its outward normal is e rotated by −π/2.
    let probe = norm.one_sided_derivatives(e);
    let gap = probe.gap();
    let predicted = 0.5 * gap * total_variation;
    let relative_error = (measured - predicted).abs() / predicted.max(total_variation);
    Ok(PerimeterDerivativeReport { direction: e, gap, total_variation, predicted, measured, relative_error })
}

// ---------------------------------------------------------------------------
// Stability of the minimizer

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySample {
    pub direction: usize,
    /// Hausdorff distance modulo translation, relative to the diameter of U₀.
    pub distance: f64,
    /// `F(U) − F(U₀)` with both evaluated at their actual size.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub samples: Vec<StabilitySample>,
    /// Smallest gap in each distance decile, nearest decile first.
    pub decile_min_gaps: Vec<f64>,
    pub positive: bool,
    pub nondecreasing: bool,
}

/// Perturbations `U_t = (1−t)U₀ ⊕ tV` toward `n_directions` random convex `V`,
/// with `t` chosen so the distances to U₀ spread over `[0.05, 0.3]·diameter` in
/// `n_levels` steps. `F` is evaluated with `levels` extrapolated grids.
pub fn stability_trend(
    norm: &Norm,
    u0: &ConvexPolygon,
    seed: u64,
    n_directions: usize,
    n_levels: usize,
    levels: usize,
) -> Result<StabilityReport> {
    if n_directions == 0 || n_levels < 2 {
        return Err(Error::InvalidArgument("need at least one direction and two levels".into()));
    }
    let center = u0.centroid();
    let u0 = u0.translate(-center);
    let diam = u0.diameter();
    let eval_f = |p: &ConvexPolygon| -> Result<f64> {
        let e = eigenvalue_extrapolated(p, levels)?;
        Ok(e.lambda + p.perimeter(norm))
    };
    let f0 = eval_f(&u0)?;
    let mut samples = Vec::with_capacity(n_directions * n_levels);
    for dir in 0..n_directions {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(dir as u64);
        let raw = random_convex(&mut rng);
        // Dilate V until the far end of the path is comfortably past 0.3.
        let mut v = raw.translate(-raw.centroid()).scale(diam / raw.diameter());
        while hausdorff_modulo_translation(&v, &u0).0 / diam < 0.35 {
            v = v.scale(1.25);
        }
        let combo = |t: f64| {
            if t >= 1.0 {
                v.clone()
            } else if t <= 0.0 {
                u0.clone()
            } else {
                u0.scale(1.0 - t).minkowski_sum(&v.scale(t))
            }
        };
        let dist = |t: f64| hausdorff_modulo_translation(&combo(t), &u0).0 / diam;
        for level in 0..n_levels {
            let target = 0.05 + 0.25 * level as f64 / (n_levels - 1) as f64;
            // Distance grows with t; bisect for the target.
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..30 {
                let mid = 0.5 * (lo + hi);
                if dist(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            let shape = combo(t);
            let gap = eval_f(&shape)? - f0;
            samples.push(StabilitySample { direction: dir, distance: dist(t), gap });
        }
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[a].distance.total_cmp(&samples[b].distance));
    let per = samples.len() / 10;
    let decile_min_gaps: Vec<f64> = (0..10)
        .map(|d| {
            let hi = if d == 9 { samples.len() } else { (d + 1) * per };
            order[d * per..hi].iter().map(|&i| samples[i].gap).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let positive = decile_min_gaps.iter().all(|&g| g > 0.0);
    let nondecreasing = decile_min_gaps.windows(2).all(|w| w[1] >= w[0]);
    Ok(StabilityReport { samples, decile_min_gaps, positive, nondecreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::solve;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_has_four_facets_and_corners() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let f = detect_facets(&sq, FACET_TOL);
        assert_eq!(f.len(), 4);
        for x in &f {
            assert_relative_eq!(x.length, 1.0, epsilon = 1e-12);
            let a = x.axis_angle();
            assert!(a.abs() < 1e-12 || (a - PI / 2.0).abs() < 1e-12);
        }
        let c = detect_corners(&sq, CORNER_TOL);
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|c| (c.turning - PI / 2.0).abs() < 1e-12));
    }

    #[test]
    fn regular_64_gon_has_neither() {
        let p = ConvexPolygon::regular(64, 1.0, 0.0).unwrap();
        assert!(detect_facets(&p, FACET_TOL).is_empty());
        assert!(detect_corners(&p, CORNER_TOL).is_empty());
    }

    #[test]
    fn thin_rectangle_facets() {
        let r = ConvexPolygon::rectangle(0.0, 0.0, 3.0, 1.0 / 3.0).unwrap();
        let mut lengths: Vec<f64> = detect_facets(&r, FACET_TOL).iter().map(|f| f.length).collect();
        lengths.sort_by(f64::total_cmp);
        for (l, want) in lengths.iter().zip([1.0 / 3.0, 1.0 / 3.0, 3.0, 3.0]) {
            assert_relative_eq!(*l, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn nearly_parallel_edges_merge() {
        let p = ConvexPolygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.004),
            Vec2::new(2.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let f = detect_facets(&p, FACET_TOL);
        assert_eq!(f.len(), 4);
        assert!(f.iter().any(|f| (f.length - 2.0).abs() < 1e-4));
    }

    #[test]
    fn diamond_corner_tangents() {
        let d = ConvexPolygon::regular(4, 1.0, 0.0).unwrap();
        let c = detect_corners(&d, CORNER_TOL);
        assert_eq!(c.len(), 4);
        let s = 1.0 / 2f64.sqrt();
        for c in &c {
            assert_relative_eq!(c.v_minus.x.abs(), s, epsilon = 1e-12);
            assert_relative_eq!(c.v_plus.y.abs(), s, epsilon = 1e-12);
        }
    }

    #[test]
    fn theorems_on_exact_shapes() {
        let side = PI.powf(2.0 / 3.0);
        let sq = ConvexPolygon::rectangle(-side / 2.0, -side / 2.0, side / 2.0, side / 2.0).unwrap();
        assert!(analyze(&Norm::l1(), &sq).passed());
        assert!(analyze(&Norm::linf(), &sq.rotate(PI / 4.0)).passed());
        let disc = ConvexPolygon::regular(128, 1.0, 0.0).unwrap();
        assert!(analyze(&Norm::euclidean(), &disc).passed());
        // The square is wrong for ℓ∞: facets in non-degenerate directions and
        // corners with non-additive tangents.
        let r = analyze(&Norm::linf(), &sq);
        assert!(!r.facet_violations.is_empty() && !r.corner_violations.is_empty());
        // The disc is wrong for ℓ¹: the degenerate directions have no facets.
        let r = analyze(&Norm::l1(), &disc);
        assert_eq!(r.facet_violations.len(), 2);
        assert_eq!(r.corner_violations.len(), 4);
    }

    #[test]
    fn corner_symmetry() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap();
        assert!(corner_symmetry_violations(&sq).is_empty());
        let tri = ConvexPolygon::regular(3, 1.0, 0.0).unwrap();
        assert_eq!(corner_symmetry_violations(&tri).len(), 3);
    }

    #[test]
    fn residual_separates_disc_from_ellipse() {
        let disc = ConvexPolygon::regular(256, 1.0, 0.0).unwrap();
        let (_, e) = solve(&disc, 1.0 / 64.0).unwrap();
        let r = optimality_residual(&Norm::euclidean(), &disc, &e).unwrap();
        assert!(r < 0.05, "disc residual {r}");
        let ellipse: Vec<Vec2> =
            disc.vertices().iter().map(|v| Vec2::new(2.0 * v.x, v.y)).collect();
        let ellipse = ConvexPolygon::new(ellipse).unwrap();
        let (_, e) = solve(&ellipse, 1.0 / 64.0).unwrap();
        let r = optimality_residual(&Norm::euclidean(), &ellipse, &e).unwrap();
        assert!(r > 0.2, "ellipse residual {r}");
        assert!(matches!(
            optimality_residual(&Norm::l1(), &disc, &e),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.5:0.25:4").unwrap();
        assert_eq!(g.len(), 15);
        assert_relative_eq!(g[14], 4.0);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn rectangle_table_closed_forms() {
        let r = counterexample_rectangles(3.0, &[1.0, 2.0], None).unwrap();
        assert_relative_eq!(r.rows[0].lambda_exact, PI * PI * (1.0 / 9.0 + 9.0), epsilon = 1e-12);
        assert_relative_eq!(r.rows[1].half_perimeter, 2.5);
        assert_eq!(r.argmin_a, 2.0);
        let sym = counterexample_rectangles(1.0, &parse_grid("0.5:0.25:2").unwrap(), None).unwrap();
        assert_eq!(sym.argmin_a, 1.0);
    }

    #[test]
    fn bump_derivative_l1_and_euclidean() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let bottom = detect_facets(&sq, FACET_TOL).into_iter().find(|f| f.direction.x > 0.5).unwrap();
        let tent = [(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)];
        let r = perimeter_derivative_check(&Norm::l1(), &bottom, &tent).unwrap();
        assert_relative_eq!(r.predicted, 2.0, epsilon = 1e-9);
        assert_relative_eq!(r.measured, 2.0, epsilon = 1e-6);
        let r = perimeter_derivative_check(&Norm::euclidean(), &bottom, &tent).unwrap();
        assert_eq!(r.predicted, 0.0);
        assert!(r.measured.abs() < 1e-3);
    }
}
