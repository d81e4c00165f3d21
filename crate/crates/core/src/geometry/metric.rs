//! Exact distances between convex polygons.

use super::ConvexPolygon;
use crate::error::{Error, Result};
use crate::vec2::Vec2;
use std::f64::consts::PI;

/// Outward normal angles of the edges, normalized to `[0, 2π)` and paired with
/// the vertex that supports the polygon on the arc *ending* at that angle.
fn normal_events(p: &ConvexPolygon) -> Vec<(f64, usize)> {
    let mut ev: Vec<(f64, usize)> = (0..p.len())
        .map(|i| {
            let a = p.edge_normal(i).angle().rem_euclid(2.0 * PI);
            (a, i)
        })
        .collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev
}

/// Index of the vertex attaining the support function at angle `theta`.
fn support_vertex(events: &[(f64, usize)], theta: f64) -> usize {
    // Vertex i is extreme on [normal(i−1), normal(i)]; the first event at or after
    // theta names the edge i whose start vertex is i.
    let pos = events.partition_point(|e| e.0 < theta);
    let (_, edge) = events[pos % events.len()];
    edge
}

/// Hausdorff distance `max_u |h_p(u) − h_q(u)|` between convex polygons.
///
/// On every arc between consecutive edge-normal angles of either polygon both
/// support points are fixed, so the difference is `(v − w)·u(θ)`; its maximum on
/// the arc is attained at an endpoint or where `u ∥ ±(v − w)`.
pub fn hausdorff_distance(p: &ConvexPolygon, q: &ConvexPolygon) -> f64 {
    let ep = normal_events(p);
    let eq = normal_events(q);
    let mut angles: Vec<f64> = ep.iter().chain(eq.iter()).map(|e| e.0).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let m = angles.len();
    let mut best: f64 = 0.0;
    for k in 0..m {
        let a = angles[k];
        let b = if k + 1 < m { angles[k + 1] } else { angles[0] + 2.0 * PI };
        let mid = (0.5 * (a + b)).rem_euclid(2.0 * PI);
        let v = p.vertices()[support_vertex(&ep, mid)];
        let w = q.vertices()[support_vertex(&eq, mid)];
        let d = v - w;
        best = best.max(d.dot(Vec2::from_angle(a)).abs());
        best = best.max(d.dot(Vec2::from_angle(b)).abs());
        let len = d.norm();
        if len > 0.0 {
            for phi in [d.angle(), d.angle() + PI] {
                let rel = (phi - a).rem_euclid(2.0 * PI);
                if rel < b - a {
                    best = best.max(len);
                }
            }
        }
    }
    best
}

/// Minkowski gauge of `p` about the origin.
fn gauge(p: &ConvexPolygon, x: Vec2) -> f64 {
    p.edges()
        .map(|(a, b)| {
            let d = b - a;
            let n = Vec2::new(d.y, -d.x);
            n.dot(x) / n.dot(a)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest ε ≥ 0 with `(1 − ε)u ⊆ v ⊆ (1 + ε)u`, both containing the origin strictly.
///
/// The radial ratio `r_v/r_u` is monotone between consecutive vertex angles of
/// either polygon, so its extremes are attained at those angles.
pub fn sandwich_epsilon(u: &ConvexPolygon, v: &ConvexPolygon) -> Result<f64> {
    for (name, p) in [("u", u), ("v", v)] {
        if p.depth(Vec2::ZERO) <= 1e-12 * p.diameter() {
            return Err(Error::Precondition(format!(
                "origin must lie strictly inside {name}"
            )));
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for x in u.vertices().iter().chain(v.vertices()) {
        // r_v/r_u = gauge_u/gauge_v along the ray through x.
        let ratio = gauge(u, *x) / gauge(v, *x);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((hi - 1.0).max(1.0 - lo).max(0.0))
}

/// `min_t dist_H(p + t, q)` and the minimizing shift, by compass search from
/// the centroid alignment. The objective is convex in `t`; the search stops at
/// step `1e-7·diam`.
pub fn hausdorff_modulo_translation(p: &ConvexPolygon, q: &ConvexPolygon) -> (f64, Vec2) {
    let mut t = q.centroid() - p.centroid();
    let f = |t: Vec2| hausdorff_distance(&p.translate(t), q);
    let mut best = f(t);
    let mut step = 0.05 * p.diameter().max(q.diameter());
    let stop = 1e-7 * p.diameter().max(q.diameter());
    let dirs: Vec<Vec2> = (0..8).map(|k| Vec2::from_angle(k as f64 * PI / 4.0)).collect();
    while step > stop {
        let mut improved = false;
        for d in &dirs {
            let c = t + *d * step;
            let v = f(c);
            if v < best {
                best = v;
                t = c;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sq(a: f64) -> ConvexPolygon {
        ConvexPolygon::rectangle(-a, -a, a, a).unwrap()
    }

    #[test]
    fn translation_is_quotiented_out() {
        let p = ConvexPolygon::regular(9, 1.0, 0.3).unwrap();
        let q = p.translate(Vec2::new(0.37, -1.2));
        let (d, t) = hausdorff_modulo_translation(&p, &q);
        assert!(d < 1e-6, "{d}");
        assert!((t - Vec2::new(0.37, -1.2)).norm() < 1e-5);
    }

    #[test]
    fn shifted_and_nested_squares() {
        let p = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(hausdorff_distance(&p, &p.translate(Vec2::new(0.3, 0.0))), 0.3, epsilon = 1e-15);
        assert_relative_eq!(hausdorff_distance(&sq(1.0), &sq(2.0)), 2f64.sqrt(), epsilon = 1e-14);
        assert_eq!(hausdorff_distance(&p, &p), 0.0);
    }

    #[test]
    fn brute_force_agrees_on_triangle_vs_square() {
        let t = ConvexPolygon::new(vec![Vec2::new(-1.0, -0.5), Vec2::new(1.5, 0.0), Vec2::new(0.0, 1.2)]).unwrap();
        let s = sq(0.7);
        let exact = hausdorff_distance(&t, &s);
        let sampled = (0..200_000)
            .map(|i| {
                let u = Vec2::from_angle(i as f64 * 2.0 * PI / 200_000.0);
                (t.support(u) - s.support(u)).abs()
            })
            .fold(0.0, f64::max);
        assert!(exact >= sampled - 1e-12);
        assert!(exact - sampled < 1e-6);
    }

    #[test]
    fn sandwich_examples() {
        let u = ConvexPolygon::regular(256, 1.0, 0.0).unwrap();
        assert_relative_eq!(sandwich_epsilon(&u, &u.scale(1.1)).unwrap(), 0.1, epsilon = 1e-12);
        assert_eq!(sandwich_epsilon(&u, &u).unwrap(), 0.0);
        let off = ConvexPolygon::rectangle(1.0, 1.0, 2.0, 2.0).unwrap();
        assert!(sandwich_epsilon(&u, &off).is_err());
    }
}
