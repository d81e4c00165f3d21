//! Convex polygons: hulls, Minkowski sums, anisotropic perimeter, support
//! functions, Hausdorff distance and the support-value parameterization used by
//! the optimizer.

mod metric;
mod support;

pub use metric::{hausdorff_distance, hausdorff_modulo_translation, sandwich_epsilon};
pub use support::SupportVector;

use crate::error::{Error, Result};
use crate::norm::Norm;
use crate::vec2::Vec2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative cross-product threshold for collinearity (scaled by diameter²).
const COLLINEAR_REL: f64 = 1e-12;
/// Relative distance below which two vertices are merged (scaled by diameter).
const DUPLICATE_REL: f64 = 1e-11;

/// A convex polygon in canonical form: counterclockwise, no duplicate vertices,
/// no three consecutive collinear vertices, lexicographically smallest vertex first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Vec2>,
}

/// Centering mode for [`ConvexPolygon::center`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterMode {
    Centroid,
    Symmetrize,
}

impl ConvexPolygon {
    /// Validate a counterclockwise convex vertex list and bring it to canonical form.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::DegeneratePolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !(v.x.is_finite() && v.y.is_finite())) {
            return Err(Error::DegeneratePolygon("non-finite vertex".into()));
        }
        let scale = diameter_of(&vertices).max(f64::MIN_POSITIVE);
        let tol = COLLINEAR_REL * scale * scale;
        let n = vertices.len();
        let mut winding = 0.0;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).cross(c - b) < -tol {
                return Err(Error::DegeneratePolygon(
                    "vertices are not in counterclockwise convex position".into(),
                ));
            }
            winding += (b - a).angle_to(c - b);
        }
        if (winding - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::DegeneratePolygon(
                "vertex list winds more than once or is clockwise".into(),
            ));
        }
        Self::convex_hull(&vertices)
    }

    /// Convex hull (Andrew's monotone chain) in canonical form.
    pub fn convex_hull(points: &[Vec2]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegeneratePolygon("fewer than 3 points".into()));
        }
        let scale = diameter_of(points);
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::DegeneratePolygon("points are coincident or non-finite".into()));
        }
        let tol = COLLINEAR_REL * scale * scale;
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let dup = DUPLICATE_REL * scale;
        pts.dedup_by(|a, b| a.dist(*b) <= dup);
        let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Vec2>> =
                if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
            for &p in iter {
                while hull.len() >= start + 2 {
                    let a = hull[hull.len() - 2];
                    let b = hull[hull.len() - 1];
                    if (b - a).cross(p - b) <= tol {
                        hull.pop();
                    } else {
                        break;
                    }
                }
                hull.push(p);
            }
            hull.pop();
        }
        // Tiny edges can survive the chain; merge them.
        let mut cleaned: Vec<Vec2> = Vec::with_capacity(hull.len());
        for p in hull {
            if cleaned.last().is_none_or(|q: &Vec2| q.dist(p) > dup) {
                cleaned.push(p);
            }
        }
        while cleaned.len() > 1 && cleaned[0].dist(*cleaned.last().unwrap()) <= dup {
            cleaned.pop();
        }
        if cleaned.len() < 3 {
            return Err(Error::DegeneratePolygon("all points are collinear".into()));
        }
        let poly = ConvexPolygon { vertices: cleaned };
        if poly.area() <= tol {
            return Err(Error::DegeneratePolygon("hull has no area".into()));
        }
        Ok(poly.canonical_start())
    }

    fn canonical_start(mut self) -> Self {
        let idx = (0..self.vertices.len())
            .min_by(|&i, &j| {
                let (a, b) = (self.vertices[i], self.vertices[j]);
                a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
            })
            .unwrap_or(0);
        self.vertices.rotate_left(idx);
        self
    }

    /// Intersection of the half-planes `x · normals[k] ≤ offsets[k]`.
    pub fn from_halfplanes(normals: &[Vec2], offsets: &[f64]) -> Result<Self> {
        assert_eq!(normals.len(), offsets.len());
        let reach = offsets.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1e-300);
        let b = 8.0 * reach;
        let mut poly = vec![Vec2::new(-b, -b), Vec2::new(b, -b), Vec2::new(b, b), Vec2::new(-b, b)];
        for (&n, &c) in normals.iter().zip(offsets) {
            poly = clip(&poly, n, c);
            if poly.is_empty() {
                return Err(Error::Infeasible("half-plane intersection is empty".into()));
            }
        }
        if poly.iter().any(|v| v.x.abs() >= 0.999 * b || v.y.abs() >= 0.999 * b) {
            return Err(Error::Infeasible("half-plane intersection is unbounded".into()));
        }
        Self::convex_hull(&poly).map_err(|e| Error::Infeasible(e.to_string()))
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    /// Regular n-gon with the given circumradius, first vertex at angle `phase`.
    pub fn regular(n: usize, radius: f64, phase: f64) -> Result<Self> {
        let verts = (0..n)
            .map(|i| Vec2::from_angle(phase + 2.0 * PI * i as f64 / n as f64) * radius)
            .collect();
        Self::new(verts)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges `(v_i, v_{i+1})`, cyclically.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Outward unit normal of edge `i`.
    pub fn edge_normal(&self, i: usize) -> Vec2 {
        let n = self.vertices.len();
        let d = self.vertices[(i + 1) % n] - self.vertices[i];
        Vec2::new(d.y, -d.x).normalized()
    }

    /// Shoelace area.
    pub fn area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    /// ρ-perimeter: sum of ρ over edge vectors.
    pub fn perimeter(&self, norm: &Norm) -> f64 {
        self.edges().map(|(a, b)| norm.eval(b - a)).sum()
    }

    pub fn euclidean_perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.dist(b)).sum()
    }

    /// `max_v v · u`.
    pub fn support(&self, u: Vec2) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        diameter_of(&self.vertices)
    }

    pub fn centroid(&self) -> Vec2 {
        let o = self.vertices[0];
        let mut acc = Vec2::ZERO;
        let mut a2 = 0.0;
        for (p, q) in self.edges() {
            let (p, q) = (p - o, q - o);
            let w = p.cross(q);
            acc += (p + q) * w;
            a2 += w;
        }
        o + acc / (3.0 * a2)
    }

    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    /// Signed distance from `x` to the boundary, positive inside.
    pub fn depth(&self, x: Vec2) -> f64 {
        (0..self.len())
            .map(|i| {
                let n = self.edge_normal(i);
                n.dot(self.vertices[i]) - n.dot(x)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.depth(x) >= -1e-12 * self.diameter()
    }

    /// Radius of the largest inscribed disc.
    pub fn inradius(&self) -> f64 {
        // depth is concave; nested golden-section search over the bounding box.
        let (lo, hi) = self.bounding_box();
        let best_y = |x: f64| golden_max(lo.y, hi.y, 80, |y| self.depth(Vec2::new(x, y)));
        golden_max(lo.x, hi.x, 80, |x| best_y(x))
    }

    /// Minkowski sum by merging edge sequences in angular order.
    pub fn minkowski_sum(&self, other: &ConvexPolygon) -> ConvexPolygon {
        let (a, b) = (&self.vertices, &other.vertices);
        // Canonical start is the lexicographically smallest vertex, so both edge
        // sequences start at outward-normal angle in (−π, −π/2]; merge by angle.
        let ea: Vec<Vec2> = self.edges().map(|(p, q)| q - p).collect();
        let eb: Vec<Vec2> = other.edges().map(|(p, q)| q - p).collect();
        let key = |d: Vec2| {
            let t = d.angle();
            // Edges leaving the lexicographic minimum point downward/rightward first.
            if t <= -PI / 2.0 {
                t + 2.0 * PI
            } else {
                t
            }
        };
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut cur = a[0] + b[0];
        let (mut i, mut j) = (0, 0);
        while i < ea.len() || j < eb.len() {
            out.push(cur);
            let take_a = if i == ea.len() {
                false
            } else if j == eb.len() {
                true
            } else {
                key(ea[i]) <= key(eb[j])
            };
            if take_a {
                cur += ea[i];
                i += 1;
            } else {
                cur += eb[j];
                j += 1;
            }
        }
        ConvexPolygon::convex_hull(&out).expect("Minkowski sum of convex polygons is nondegenerate")
    }

    /// Vertex-wise `t·x + shift`.
    pub fn scale_translate(&self, t: f64, shift: Vec2) -> Result<ConvexPolygon> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!("dilation factor must be > 0, got {t}")));
        }
        Ok(ConvexPolygon { vertices: self.vertices.iter().map(|&v| v * t + shift).collect() })
    }

    pub fn translate(&self, shift: Vec2) -> ConvexPolygon {
        ConvexPolygon { vertices: self.vertices.iter().map(|&v| v + shift).collect() }
    }

    pub fn scale(&self, t: f64) -> ConvexPolygon {
        self.scale_translate(t, Vec2::ZERO).expect("positive dilation")
    }

    pub fn rotate(&self, angle: f64) -> ConvexPolygon {
        let pts: Vec<Vec2> = self.vertices.iter().map(|v| v.rotate(angle)).collect();
        ConvexPolygon::convex_hull(&pts).expect("rotation preserves nondegeneracy")
    }

    /// Point reflection `x ↦ −x`.
    pub fn reflect(&self) -> ConvexPolygon {
        let pts: Vec<Vec2> = self.vertices.iter().map(|&v| -v).collect();
        ConvexPolygon::convex_hull(&pts).expect("reflection preserves nondegeneracy")
    }

    /// Image under `(x₁, x₂) ↦ (x₂, x₁)`.
    pub fn swap_axes(&self) -> ConvexPolygon {
        let pts: Vec<Vec2> = self.vertices.iter().map(|v| Vec2::new(v.y, v.x)).collect();
        ConvexPolygon::convex_hull(&pts).expect("reflection preserves nondegeneracy")
    }

    /// Translate the centroid to the origin. In symmetrize mode the asymmetry
    /// defect `dist_H(p, −p)` of the centered polygon is reported as well.
    pub fn center(&self, mode: CenterMode) -> (ConvexPolygon, Option<f64>) {
        let centered = self.translate(-self.centroid());
        match mode {
            CenterMode::Centroid => (centered, None),
            CenterMode::Symmetrize => {
                let defect = hausdorff_distance(&centered, &centered.reflect());
                (centered, Some(defect))
            }
        }
    }

    pub fn hausdorff_distance(&self, other: &ConvexPolygon) -> f64 {
        hausdorff_distance(self, other)
    }

    /// Support values at `k` uniform angles.
    pub fn support_samples(&self, k: usize) -> Vec<f64> {
        (0..k).map(|i| self.support(Vec2::from_angle(2.0 * PI * i as f64 / k as f64))).collect()
    }

    /// Hull of `n_points` uniform samples in a disc of the given radius, retried
    /// until the hull has at least 3 vertices and is not too thin.
    pub fn random<R: Rng>(rng: &mut R, n_points: usize, radius: f64) -> ConvexPolygon {
        loop {
            let pts: Vec<Vec2> = (0..n_points.max(3))
                .map(|_| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    Vec2::from_angle(rng.gen::<f64>() * 2.0 * PI) * r
                })
                .collect();
            if let Ok(p) = ConvexPolygon::convex_hull(&pts) {
                if p.inradius() > 0.12 * p.diameter() {
                    return p;
                }
            }
        }
    }
}

impl Vec2 {
    /// Signed angle from `self` to `o` in (−π, π].
    pub fn angle_to(self, o: Vec2) -> f64 {
        self.cross(o).atan2(self.dot(o))
    }
}

fn diameter_of(pts: &[Vec2]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max(a.dist(*b));
        }
    }
    d
}

fn clip(poly: &[Vec2], n: Vec2, c: f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        let fp = n.dot(p) - c;
        let fq = n.dot(q) - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

fn golden_max(mut a: f64, mut b: f64, iters: usize, f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}
