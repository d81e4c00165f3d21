//! Boundary normal derivative of the eigenfunction and the Hadamard quadrature.

use super::grid::{GridDiscretization, DIRECTIONS};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Vertices turning more than this are treated as corners, where `|∇h|` vanishes.
pub const CORNER_TURNING: f64 = 0.2;

/// `|∇h|` at one boundary crossing of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    pub point: Vec2,
    pub normal: Vec2,
    pub edge: usize,
    /// Arc-length position along the boundary, measured from vertex 0.
    pub arc: f64,
    pub grad: f64,
    /// Trapezoid arc-length weight among all samples.
    pub weight: f64,
    /// Within `2h` of a corner; left out of the quadrature.
    pub near_corner: bool,
}

/// Piecewise-linear profile of `|∇h|²` in arc length, closed around the boundary.
#[derive(Clone, Debug, Default)]
pub struct FluxProfile {
    /// (arc, |∇h|², point, normal), sorted by arc.
    knots: Vec<(f64, f64, Vec2, Vec2)>,
    perimeter: f64,
    /// Arc position of each vertex.
    vertex_arc: Vec<f64>,
}

/// Exterior turning angle at each vertex.
pub(crate) fn turning_angles(v: &[Vec2]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i] - v[(i + n - 1) % n];
            let b = v[(i + 1) % n] - v[i];
            a.cross(b).atan2(a.dot(b))
        })
        .collect()
}

/// Samples of `|∇h|` from one-sided quadratic extrapolation along each stencil
/// arm that crosses the boundary. Only arms within 45° of the edge normal are used.
pub fn boundary_gradient(grid: &GridDiscretization, values: &[f64]) -> Vec<FluxSample> {
    let p = grid.polygon();
    let v = p.vertices();
    let n = v.len();
    let h = grid.spacing();
    let mut vertex_arc = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        vertex_arc.push(acc);
        acc += v[i].dist(v[(i + 1) % n]);
    }
    let perimeter = acc;
    let turning = turning_angles(v);
    let corners: Vec<Vec2> = (0..n).filter(|&i| turning[i] > CORNER_TURNING).map(|i| v[i]).collect();

    let mut samples = Vec::new();
    for link in grid.boundary_links() {
        let d = DIRECTIONS[link.dir];
        let normal = p.edge_normal(link.edge);
        let cos = normal.dot(d).abs();
        if cos < 0.7071 {
            continue;
        }
        let opp = link.dir ^ 1;
        let a = link.arm;
        let c = a + grid.arms(link.node)[opp];
        let u_p = values[link.node];
        let u_q = grid.neighbors(link.node)[opp].map_or(0.0, |m| values[m]);
        let du = (-u_p * c / (a * (c - a)) + u_q * a / (c * (c - a))) / h;
        let point = grid.position(link.node) + d * (a * h);
        let arc = vertex_arc[link.edge] + v[link.edge].dist(point);
        let near_corner = corners.iter().any(|&x| x.dist(point) < 2.0 * h);
        samples.push(FluxSample { point, normal, edge: link.edge, arc, grad: du.abs() / cos, weight: 0.0, near_corner });
    }
    samples.sort_by(|a, b| a.arc.total_cmp(&b.arc).then(a.point.x.total_cmp(&b.point.x)));
    let m = samples.len();
    for i in 0..m {
        if m == 1 {
            samples[i].weight = perimeter;
            break;
        }
        let prev = samples[(i + m - 1) % m].arc - if i == 0 { perimeter } else { 0.0 };
        let next = samples[(i + 1) % m].arc + if i == m - 1 { perimeter } else { 0.0 };
        samples[i].weight = 0.5 * (next - prev);
    }
    samples
}

impl FluxProfile {
    /// Quadrature profile: samples away from corners plus a zero at every corner.
    pub fn new(grid: &GridDiscretization, samples: &[FluxSample]) -> Self {
        let p = grid.polygon();
        let v = p.vertices();
        let n = v.len();
        let mut vertex_arc = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            vertex_arc.push(acc);
            acc += v[i].dist(v[(i + 1) % n]);
        }
        let turning = turning_angles(v);
        let mut knots: Vec<(f64, f64, Vec2, Vec2)> = samples
            .iter()
            .filter(|s| !s.near_corner)
            .map(|s| (s.arc, s.grad * s.grad, s.point, s.normal))
            .collect();
        for i in 0..n {
            if turning[i] > CORNER_TURNING {
                knots.push((vertex_arc[i], 0.0, v[i], Vec2::ZERO));
            }
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        FluxProfile { knots, perimeter: acc, vertex_arc }
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Trapezoid weights of the knots on the closed boundary.
    fn weights(&self) -> Vec<f64> {
        let m = self.knots.len();
        let l = self.perimeter;
        (0..m)
            .map(|i| {
                if m == 1 {
                    return l;
                }
                let prev = self.knots[(i + m - 1) % m].0 - if i == 0 { l } else { 0.0 };
                let next = self.knots[(i + 1) % m].0 + if i == m - 1 { l } else { 0.0 };
                0.5 * (next - prev)
            })
            .collect()
    }

    /// `−∮ |∇h|² v·n ds` for a boundary velocity field `v`.
    pub fn hadamard(&self, v: impl Fn(Vec2) -> Vec2) -> f64 {
        let w = self.weights();
        let s: f64 = self.knots.iter().zip(&w).map(|(k, w)| w * k.1 * v(k.2).dot(k.3)).sum();
        -s
    }

    /// `∮ |∇h|² ds`.
    pub fn total(&self) -> f64 {
        self.integral(0.0, self.perimeter)
    }

    /// `∫ |∇h|² ds` over the arc `[s0, s1]`, `0 ≤ s0 ≤ s1 ≤ perimeter`.
    pub fn integral(&self, s0: f64, s1: f64) -> f64 {
        self.antiderivative(s1) - self.antiderivative(s0)
    }

    /// `∫ |∇h|² ds` over edge `e` of the discretized polygon.
    pub fn edge_integral(&self, e: usize) -> f64 {
        let s0 = self.vertex_arc[e];
        let s1 = self.vertex_arc.get(e + 1).copied().unwrap_or(self.perimeter);
        self.integral(s0, s1)
    }

    fn antiderivative(&self, s: f64) -> f64 {
        let m = self.knots.len();
        if m == 0 {
            return 0.0;
        }
        let l = self.perimeter;
        // Extended knot list: last knot wrapped before 0, first after l.
        let first = self.knots[0];
        let last = self.knots[m - 1];
        let mut xs = Vec::with_capacity(m + 2);
        xs.push((last.0 - l, last.1));
        xs.extend(self.knots.iter().map(|k| (k.0, k.1)));
        xs.push((first.0 + l, first.1));
        let value = |x: f64| -> f64 {
            let j = xs.partition_point(|k| k.0 <= x).clamp(1, xs.len() - 1);
            let (a, b) = (xs[j - 1], xs[j]);
            if b.0 - a.0 <= 0.0 {
                a.1
            } else {
                a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
            }
        };
        // Integrate from 0 to s through the knots in between.
        let mut total = 0.0;
        let mut x = 0.0;
        let mut fx = value(0.0);
        for k in &self.knots {
            if k.0 <= 0.0 {
                continue;
            }
            if k.0 >= s {
                break;
            }
            total += 0.5 * (fx + k.1) * (k.0 - x);
            x = k.0;
            fx = k.1;
        }
        total + 0.5 * (fx + value(s)) * (s - x)
    }
}
