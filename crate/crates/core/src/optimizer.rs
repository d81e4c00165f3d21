//! Descent on support values for the minimizer of `F = λ + P_ρ`.
//!
//! The iterate is a [`SupportVector`]; the shape is the polygon it cuts out. The
//! objective is the dilation-free value `f* = 3·2^{−2/3} λ^{1/3} P^{2/3}`, with
//! λ from a single grid whose lattice is anchored at the origin and scales with
//! the shape, so rescaling to `t* = 1` and recentering by whole lattice steps
//! leave the discrete objective unchanged.

use crate::error::{Error, Result};
use crate::functional::{optimal_scale, FunctionalValue};
use crate::geometry::{hausdorff_modulo_translation, ConvexPolygon, SupportVector};
use crate::norm::Norm;
use crate::spectral::{eigenvalue_extrapolated, principal_eigenpair_shifted, EigenSolution, GridDiscretization};
use crate::vec2::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const EIGEN_TOL: f64 = 1e-10;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 14;
/// Consecutive small improvements needed to declare convergence on the finest level.
const PATIENCE: usize = 3;
/// Faces shorter than this fraction of the diameter get no λ-gradient.
const SHORT_FACE: f64 = 1e-3;
/// Angular frequency above which the descent direction is damped quadratically.
const SMOOTHING_FREQUENCY: f64 = 4.0;
/// Edges shorter than this fraction of the diameter are candidates for collapsing.
const COLLAPSE_EDGE: f64 = 0.05;
const MAX_POLISH_ROUNDS: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub k_angles: usize,
    pub grid_levels: usize,
    pub max_iters: usize,
    pub step0: f64,
    pub tol_f: f64,
    pub n_starts: usize,
    pub seed: u64,
    /// Grid cells across twice the inradius on the coarsest level; doubled per level.
    pub base_cells: usize,
    /// Grids used for the extrapolated λ of the final shape.
    pub final_levels: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            k_angles: 64,
            grid_levels: 3,
            max_iters: 400,
            step0: 0.1,
            tol_f: 1e-5,
            n_starts: 4,
            seed: 0,
            base_cells: 16,
            final_levels: 3,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.k_angles < 16 || self.k_angles % 4 != 0 {
            return bad(format!("k_angles must be >= 16 and divisible by 4, got {}", self.k_angles));
        }
        if self.grid_levels == 0 || self.max_iters == 0 || self.n_starts == 0 || self.base_cells < 8 {
            return bad("grid_levels, max_iters, n_starts must be positive and base_cells >= 8".into());
        }
        if self.final_levels < 2 {
            return bad(format!("final_levels must be >= 2, got {}", self.final_levels));
        }
        if !(self.step0 > 0.0) || !(self.tol_f > 0.0) {
            return bad("step0 and tol_f must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    Stalled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Wulff,
    Disc,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub support: SupportVector,
    /// Grid-level value (λ from one grid, not extrapolated).
    pub value: FunctionalValue,
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub start: StartKind,
    pub start_index: usize,
    pub iterates: Vec<Iterate>,
    pub grad_norms: Vec<f64>,
    pub accepted_steps: Vec<f64>,
    /// Centered at its centroid and dilated to `t* = 1` with extrapolated λ.
    pub final_shape: ConvexPolygon,
    pub final_value: FunctionalValue,
    pub status: Status,
    pub evaluations: usize,
}

/// One shape with its grid eigenpair and the gradients of λ, P and `f*` in `h`.
#[derive(Clone, Debug)]
pub struct ShapeState {
    pub support: SupportVector,
    pub polygon: ConvexPolygon,
    pub spacing: f64,
    pub value: FunctionalValue,
    pub eigen: EigenSolution,
    /// `∂λ/∂h_k = −∫_{face k} |∇h|²`, zero on inactive and very short faces.
    pub grad_lambda: Vec<f64>,
    /// `∂P/∂h_k`; on a face of zero length this is the rate of cutting the vertex.
    pub grad_perim: Vec<f64>,
    /// Whether face `k` is an edge of the polygon.
    pub active: Vec<bool>,
}

impl ShapeState {
    /// `∂F/∂h_k`.
    pub fn grad_f(&self) -> Vec<f64> {
        self.grad_lambda.iter().zip(&self.grad_perim).map(|(a, b)| a + b).collect()
    }

    /// `∂f*/∂h_k = f* (λ_k / 3λ + 2 P_k / 3P)`.
    pub fn grad_f_star(&self) -> Vec<f64> {
        let v = &self.value;
        self.grad_lambda
            .iter()
            .zip(&self.grad_perim)
            .map(|(l, p)| v.f_star * (l / (3.0 * v.lambda) + 2.0 * p / (3.0 * v.perim)))
            .collect()
    }
}

/// Eigensolve with a shift hint, retrying unshifted if the result is not the
/// positive principal mode.
fn eigensolve(grid: &GridDiscretization, shift: f64) -> Result<EigenSolution> {
    if shift > 0.0 {
        if let Ok(s) = principal_eigenpair_shifted(grid, EIGEN_TOL, shift) {
            if s.values.iter().all(|&v| v > 0.0) && s.lambda_h > shift {
                return Ok(s);
            }
        }
    }
    principal_eigenpair_shifted(grid, EIGEN_TOL, 0.0)
}

/// Evaluate the polygon cut out by `s` on the origin-anchored grid of `spacing`.
/// `lambda_hint` (0 for none) is a nearby eigenvalue used to shift the solver.
pub fn evaluate_support(norm: &Norm, s: &SupportVector, spacing: f64, lambda_hint: f64) -> Result<ShapeState> {
    let k = s.k();
    let polygon = s.to_polygon()?;
    let support = SupportVector::from_polygon(&polygon, k)?;
    let grid = GridDiscretization::new(&polygon, spacing)?;
    let eigen = eigensolve(&grid, 0.8 * lambda_hint)?;
    let perim = polygon.perimeter(norm);
    let value = FunctionalValue::from_parts(eigen.lambda_h, perim, 0.0)?;

    // Faces that are polygon edges, and which edge.
    let step = 2.0 * PI / k as f64;
    let mut edge_of = vec![None; k];
    for e in 0..polygon.len() {
        let a = polygon.edge_normal(e).angle().rem_euclid(2.0 * PI);
        let j = (a / step).round() as usize % k;
        let off = (a - j as f64 * step + PI).rem_euclid(2.0 * PI) - PI;
        if off.abs() < 1e-7 {
            edge_of[j] = Some(e);
        }
    }
    let active: Vec<bool> = edge_of.iter().map(|e| e.is_some()).collect();
    let act_idx: Vec<usize> = (0..k).filter(|&j| active[j]).collect();
    if act_idx.len() < 3 {
        return Err(Error::DegeneratePolygon(format!("only {} active faces", act_idx.len())));
    }
    let tangent_len = |j: usize| norm.eval(Vec2::from_angle(j as f64 * step).perp());
    let c: Vec<f64> = (0..k).map(tangent_len).collect();
    let diam = polygon.diameter();
    let mut grad_lambda = vec![0.0; k];
    let mut grad_perim = vec![0.0; k];
    for j in 0..k {
        // Nearest active faces strictly before and after j.
        let pos = act_idx.partition_point(|&a| a < j);
        let before = if pos == 0 { act_idx[act_idx.len() - 1] } else { act_idx[pos - 1] };
        let after_pos = if active[j] { pos + 1 } else { pos };
        let after = act_idx[after_pos % act_idx.len()];
        let a1 = ((j + k - before) % k) as f64 * step;
        let a2 = ((after + k - j) % k) as f64 * step;
        grad_perim[j] = c[before] / a1.sin() + c[after] / a2.sin() - c[j] * (1.0 / a1.tan() + 1.0 / a2.tan());
        if let Some(e) = edge_of[j] {
            let (p0, p1) = (polygon.vertices()[e], polygon.vertices()[(e + 1) % polygon.len()]);
            if p0.dist(p1) >= SHORT_FACE * diam {
                grad_lambda[j] = -eigen.profile.edge_integral(e);
            }
        }
    }
    Ok(ShapeState { support, polygon, spacing, value, eigen, grad_lambda, grad_perim, active })
}

/// Grid spacing of `level`: `base_cells·2^level` cells across twice the inradius.
fn level_spacing(p: &ConvexPolygon, cfg: &OptimizerConfig, level: usize) -> f64 {
    2.0 * p.inradius() / (cfg.base_cells as f64 * 2f64.powi(level as i32))
}

/// Starting shapes in order: Wulff shape, disc, then random hulls.
pub fn start_shape(norm: &Norm, cfg: &OptimizerConfig, index: usize) -> Result<(StartKind, SupportVector)> {
    let (kind, poly) = match index {
        0 => (StartKind::Wulff, norm.wulff_shape(256)?),
        1 => (StartKind::Disc, ConvexPolygon::regular(256, 1.0, 0.0)?),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index as u64);
            let n = rng.gen_range(6..14);
            (StartKind::Random, ConvexPolygon::random(&mut rng, n, 1.0))
        }
    };
    let centered = poly.translate(-poly.centroid());
    let scaled = centered.scale(2.5 / centered.diameter());
    Ok((kind, SupportVector::from_polygon(&scaled, cfg.k_angles)?))
}

/// Run one start to convergence.
pub fn run_start(norm: &Norm, cfg: &OptimizerConfig, index: usize) -> Result<OptimizationTrace> {
    cfg.validate()?;
    let (kind, s0) = start_shape(norm, cfg, index)?;
    descend(norm, cfg, kind, index, s0)
}

/// Descend from an explicit starting support vector.
pub fn descend(
    norm: &Norm,
    cfg: &OptimizerConfig,
    start: StartKind,
    start_index: usize,
    s0: SupportVector,
) -> Result<OptimizationTrace> {
    let mut level = 0;
    let p0 = s0.to_polygon()?;
    let mut state = evaluate_support(norm, &s0, level_spacing(&p0, cfg, 0), 0.0)?;
    let mut evaluations = 1;
    state = normalize(norm, state, &mut evaluations)?;
    let mut iterates = vec![Iterate { support: state.support.clone(), value: state.value, level }];
    let mut grad_norms = Vec::new();
    let mut accepted_steps = Vec::new();
    let mut step = cfg.step0;
    let mut quiet = 0;
    let mut polish_rounds = 0;
    let mut status = Status::MaxIters;
    let finest = cfg.grid_levels - 1;

    for _ in 0..cfg.max_iters {
        let g = state.grad_f_star();
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        grad_norms.push(g.iter().map(|v| v * v).sum::<f64>().sqrt());
        let mut advanced = false;
        if gmax > 0.0 {
            let d = direction(&g, &state.active, state.support.mean());
            let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            let f0 = state.value.f_star;
            let mut s = step;
            for _ in 0..MAX_BACKTRACKS {
                let trial: Vec<f64> = state.support.values().iter().zip(&d).map(|(h, d)| h + s * d).collect();
                let candidate = SupportVector::new(trial)
                    .and_then(|t| evaluate_support(norm, &t, state.spacing, state.value.lambda));
                evaluations += 1;
                if let Ok(next) = candidate {
                    if next.value.f_star <= f0 + ARMIJO * s * slope {
                        let gain = (f0 - next.value.f_star) / f0;
                        state = normalize(norm, next, &mut evaluations)?;
                        accepted_steps.push(s);
                        iterates.push(Iterate { support: state.support.clone(), value: state.value, level });
                        step = (1.5 * s).min(1.0);
                        let threshold = if level == finest { cfg.tol_f } else { 10.0 * cfg.tol_f };
                        quiet = if gain < threshold { quiet + 1 } else { 0 };
                        advanced = true;
                        break;
                    }
                }
                s *= 0.5;
            }
        }
        let stalled = !advanced;
        let settled = quiet >= if level == finest { PATIENCE } else { 1 };
        if stalled || settled {
            if level == finest && polish_rounds < MAX_POLISH_ROUNDS {
                polish_rounds += 1;
                if let Some(next) = collapse_short_runs(norm, &state, &mut evaluations)? {
                    state = next;
                    iterates.push(Iterate { support: state.support.clone(), value: state.value, level });
                    quiet = 0;
                    continue;
                }
            }
            if level < finest {
                level += 1;
                let spacing = level_spacing(&state.polygon, cfg, level);
                state = evaluate_support(norm, &state.support, spacing, state.value.lambda)?;
                evaluations += 1;
                iterates.push(Iterate { support: state.support.clone(), value: state.value, level });
                quiet = 0;
                step = step.max(cfg.step0 * 0.25);
                continue;
            }
            status = if stalled { Status::Stalled } else { Status::Converged };
            break;
        }
    }

    let (final_shape, final_value) = finalize(&state.polygon, norm, cfg.final_levels)?;
    Ok(OptimizationTrace {
        start,
        start_index,
        iterates,
        grad_norms,
        accepted_steps,
        final_shape,
        final_value,
        status,
        evaluations,
    })
}

/// Descent direction scaled so its largest entry is `scale`. Active faces move
/// along the smoothed gradient of the active part; inactive faces only by their
/// own cut rate, so smoothing never opens a corner the objective does not ask for.
fn direction(g: &[f64], active: &[bool], scale: f64) -> Vec<f64> {
    let masked: Vec<f64> = g.iter().zip(active).map(|(v, &a)| if a { *v } else { 0.0 }).collect();
    let sg = smooth(&masked, SMOOTHING_FREQUENCY);
    let d: Vec<f64> = sg.iter().zip(g).zip(active).map(|((s, v), &a)| if a { -s } else { -v }).collect();
    let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if dmax == 0.0 {
        return d;
    }
    d.iter().map(|v| v * scale / dmax).collect()
}

/// Try replacing each run of consecutive short edges by the single vertex where
/// the neighbouring edges meet. Descent cannot do this itself: a rounded corner
/// costs almost nothing and faces below [`SHORT_FACE`] carry no λ-gradient. A
/// collapse is kept only if it lowers the grid value of `f*`.
fn collapse_short_runs(norm: &Norm, state: &ShapeState, evaluations: &mut usize) -> Result<Option<ShapeState>> {
    let k = state.support.k();
    let step = 2.0 * PI / k as f64;
    let limit = COLLAPSE_EDGE * state.polygon.diameter();
    let poly = &state.polygon;
    let n = poly.len();
    let short: Vec<bool> = (0..n).map(|e| poly.vertices()[e].dist(poly.vertices()[(e + 1) % n]) < limit).collect();
    if short.iter().all(|&s| s) {
        return Ok(None);
    }
    // Face index of each edge.
    let face = |e: usize| {
        let a = poly.edge_normal(e).angle().rem_euclid(2.0 * PI);
        (a / step).round() as usize % k
    };
    // Runs of short edges as the faces of the long edges on either side.
    let first = (0..n).find(|&e| !short[e]).unwrap();
    let mut runs = Vec::new();
    let mut prev_long = first;
    let mut in_run = false;
    for i in 1..=n {
        let e = (first + i) % n;
        if short[e] {
            in_run = true;
        } else {
            if in_run {
                runs.push((face(prev_long), face(e)));
            }
            in_run = false;
            prev_long = e;
        }
    }
    let mut best: Option<ShapeState> = None;
    for (fa, fb) in runs {
        let base = best.as_ref().unwrap_or(state);
        let lift = 2.0 * base.polygon.diameter();
        let mut h = base.support.values().to_vec();
        let mut j = (fa + 1) % k;
        while j != fb {
            h[j] += lift;
            j = (j + 1) % k;
        }
        let candidate = SupportVector::new(h).and_then(|t| evaluate_support(norm, &t, base.spacing, base.value.lambda));
        *evaluations += 1;
        if let Ok(next) = candidate {
            if next.value.f_star <= base.value.f_star {
                best = Some(next);
            }
        }
    }
    Ok(best)
}

/// Apply `(I + β T)⁻¹` with `T` the cyclic second difference, so Fourier mode
/// `m` is scaled by `1 / (1 + (2 − 2cos(mΔ)) / (m₀Δ)²)`: an `H¹`-type gradient
/// that leaves modes below `m₀` nearly untouched and damps zig-zag oscillation.
pub fn smooth(g: &[f64], m0: f64) -> Vec<f64> {
    let k = g.len();
    let step = 2.0 * PI / k as f64;
    let beta = 1.0 / (m0 * step).powi(2);
    let mut out = vec![0.0; k];
    for m in 0..=k / 2 {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in g.iter().enumerate() {
            let t = (m * j % k) as f64 * step;
            a += v * t.cos();
            b += v * t.sin();
        }
        let weight = if m == 0 || 2 * m == k { 1.0 } else { 2.0 } / k as f64;
        let damp = 1.0 / (1.0 + beta * (2.0 - 2.0 * (m as f64 * step).cos()));
        for (j, o) in out.iter_mut().enumerate() {
            let t = (m * j % k) as f64 * step;
            *o += weight * damp * (a * t.cos() + b * t.sin());
        }
    }
    out
}

/// Dilate to `t* = 1` and recenter by whole lattice steps; both keep the discrete
/// problem identical, so only the representation changes.
fn normalize(norm: &Norm, state: ShapeState, evaluations: &mut usize) -> Result<ShapeState> {
    let t = state.value.t_star;
    let c = state.polygon.centroid();
    let g = state.spacing;
    let shift = Vec2::new((c.x / g).round() * g, (c.y / g).round() * g);
    if (t - 1.0).abs() <= 0.02 && shift == Vec2::ZERO {
        return Ok(state);
    }
    let moved = state.support.translated(-shift)?.scaled(t);
    *evaluations += 1;
    evaluate_support(norm, &moved, g * t, state.value.lambda / (t * t))
}

/// Centered shape dilated to `t* = 1` with extrapolated λ, and its value.
pub fn finalize(p: &ConvexPolygon, norm: &Norm, levels: usize) -> Result<(ConvexPolygon, FunctionalValue)> {
    let centered = p.translate(-p.centroid());
    let e = eigenvalue_extrapolated(&centered, levels)?;
    let (t, _) = optimal_scale(e.lambda, centered.perimeter(norm))?;
    let shape = centered.scale(t);
    let value = FunctionalValue::from_parts(e.lambda / (t * t), shape.perimeter(norm), e.error_estimate / (t * t))?;
    Ok((shape, value))
}

/// Every start, in start order.
pub fn run_starts(norm: &Norm, cfg: &OptimizerConfig) -> Result<Vec<OptimizationTrace>> {
    cfg.validate()?;
    (0..cfg.n_starts).map(|i| run_start(norm, cfg, i)).collect()
}

/// Index of the best trace by `(f_star, start index)`.
pub fn best_trace(traces: &[OptimizationTrace]) -> Option<usize> {
    (0..traces.len()).min_by(|&a, &b| {
        traces[a].final_value.f_star.total_cmp(&traces[b].final_value.f_star).then(a.cmp(&b))
    })
}

/// Best of all starts.
pub fn minimize(norm: &Norm, cfg: &OptimizerConfig) -> Result<OptimizationTrace> {
    let mut traces = run_starts(norm, cfg)?;
    let best = best_trace(&traces).expect("at least one start");
    Ok(traces.swap_remove(best))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// Largest pairwise Hausdorff distance modulo translation.
    pub max_pairwise: f64,
    /// Diameter of the best shape, for relative comparisons.
    pub diameter: f64,
    pub f_stars: Vec<f64>,
}

impl UniquenessReport {
    pub fn relative(&self) -> f64 {
        self.max_pairwise / self.diameter
    }
}

pub fn uniqueness_from_traces(traces: &[OptimizationTrace]) -> UniquenessReport {
    let mut max_pairwise: f64 = 0.0;
    for i in 0..traces.len() {
        for j in i + 1..traces.len() {
            let (d, _) = hausdorff_modulo_translation(&traces[i].final_shape, &traces[j].final_shape);
            max_pairwise = max_pairwise.max(d);
        }
    }
    let best = best_trace(traces).unwrap_or(0);
    UniquenessReport {
        max_pairwise,
        diameter: traces.get(best).map_or(0.0, |t| t.final_shape.diameter()),
        f_stars: traces.iter().map(|t| t.final_value.f_star).collect(),
    }
}

/// Run all starts and compare the centered results.
pub fn uniqueness_probe(norm: &Norm, cfg: &OptimizerConfig) -> Result<UniquenessReport> {
    if cfg.n_starts < 2 {
        return Err(Error::Precondition(format!("uniqueness probe needs n_starts >= 2, got {}", cfg.n_starts)));
    }
    Ok(uniqueness_from_traces(&run_starts(norm, cfg)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientEntry {
    pub index: usize,
    pub assembled: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub entries: Vec<GradientEntry>,
    pub max_relative_error: f64,
}

/// Assembled `∂F/∂h_k` against central differences at step `1e−3·h_k`, on the
/// grid of the given spacing. Meaningful for active faces; on an inactive face
/// the outward difference is zero and the inward one cuts a vertex.
pub fn gradient_check(norm: &Norm, s: &SupportVector, indices: &[usize], spacing: f64) -> Result<GradientReport> {
    let base = evaluate_support(norm, s, spacing, 0.0)?;
    let g = base.grad_f();
    // Inactive faces rest on vertices; lift them so a pushed face only drags its
    // active neighbours along, as the assembled gradient assumes.
    let lift = 2.0 * base.polygon.diameter();
    let lifted: Vec<f64> = base
        .support
        .values()
        .iter()
        .zip(&base.active)
        .map(|(h, &a)| if a { *h } else { h + lift })
        .collect();
    let f_at = |vals: Vec<f64>| -> Result<f64> {
        let st = evaluate_support(norm, &SupportVector::new(vals)?, spacing, base.value.lambda)?;
        Ok(st.value.f)
    };
    let mut entries = Vec::new();
    for &k in indices {
        let h = base.support.values()[k];
        let d = 1e-3 * h;
        let mut plus = lifted.clone();
        plus[k] = h;
        let mut minus = plus.clone();
        plus[k] += d;
        minus[k] -= d;
        let fd = (f_at(plus)? - f_at(minus)?) / (2.0 * d);
        let relative_error = (g[k] - fd).abs() / fd.abs();
        entries.push(GradientEntry { index: k, assembled: g[k], finite_difference: fd, relative_error });
    }
    let max_relative_error = entries.iter().map(|e| e.relative_error).fold(0.0, f64::max);
    Ok(GradientReport { entries, max_relative_error })
}
