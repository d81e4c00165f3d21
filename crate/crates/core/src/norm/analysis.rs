//! Angular scans of a norm: degenerate directions, linearity cones, Wulff shape.

use super::Norm;
use crate::error::Result;
use crate::geometry::ConvexPolygon;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Angular resolution of the bisection in [`Norm::degenerate_directions`].
const BISECT_RESOLUTION: f64 = 1e-8;

/// A direction where `s ↦ ρ(e + s e')` has a kink.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateDirection {
    /// Angle of `e` in `[0, π)`.
    pub angle: f64,
    pub direction: Vec2,
    /// θ⁺ − θ⁻ estimated across the final bracketing interval.
    pub gap: f64,
}

/// Maximal arc of directions on which ρ is linear, `[start, end]` counterclockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivityCone {
    pub start: f64,
    pub end: f64,
}

impl AdditivityCone {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    /// Whether the direction `v` lies in the cone, widened by `tol` radians.
    pub fn contains(&self, v: Vec2, tol: f64) -> bool {
        let rel = (v.angle() - (self.start - tol)).rem_euclid(2.0 * PI);
        rel <= self.width() + 2.0 * tol
    }
}

impl Norm {
    /// Jump of the directional derivative along the unit chord between `e(a)` and `e(b)`.
    ///
    /// `ψ(s) = ρ(e(a) + s·c)` is convex, so `ψ'(end⁻) − ψ'(0⁺) ≥ 0`; it stays bounded
    /// below by the gap of any kink inside while smooth curvature shrinks with the arc.
    fn chord_jump(&self, a: f64, b: f64) -> f64 {
        let xa = Vec2::from_angle(a);
        let xb = Vec2::from_angle(b);
        let c = (xb - xa).normalized();
        (-self.directional_derivative(xb, -c) - self.directional_derivative(xa, c)).max(0.0)
    }

    /// Degenerate directions modulo sign: a uniform scan of `n_angles ≥ 64` arcs
    /// over a half turn, each arc bisected while the derivative jump across it
    /// exceeds `tol`, down to 1e-8 rad.
    pub fn degenerate_directions(&self, n_angles: usize, tol: f64) -> Vec<DegenerateDirection> {
        let n = n_angles.max(64);
        let width = PI / n as f64;
        // Offset keeps kinks at "round" angles away from the arc endpoints.
        let origin = 0.012_345_678_9 * width;
        let mut found = Vec::new();
        for i in 0..n {
            let mut stack = vec![(origin + i as f64 * width, origin + (i + 1) as f64 * width)];
            while let Some((a, b)) = stack.pop() {
                let jump = self.chord_jump(a, b);
                if jump <= tol {
                    continue;
                }
                if b - a <= BISECT_RESOLUTION {
                    let mut angle = (0.5 * (a + b)).rem_euclid(PI);
                    if PI - angle < BISECT_RESOLUTION {
                        angle -= PI;
                    }
                    found.push(DegenerateDirection {
                        angle,
                        direction: Vec2::from_angle(angle),
                        gap: jump,
                    });
                    continue;
                }
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
            }
        }
        found.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        // Adjacent leaves can bracket the same kink when it sits on a split point.
        let mut out: Vec<DegenerateDirection> = Vec::with_capacity(found.len());
        for d in found {
            if let Some(last) = out.last_mut() {
                if (d.angle - last.angle).abs() < 4.0 * BISECT_RESOLUTION {
                    last.gap = last.gap.max(d.gap);
                    continue;
                }
            }
            out.push(d);
        }
        out
    }

    /// Maximal cones on which ρ is linear, found by scanning the gradient on
    /// `n_angles` uniform directions of the full circle and refining each run's
    /// endpoints by bisection. Strictly convex norms return no cones.
    pub fn additivity_cones(&self, n_angles: usize) -> Vec<AdditivityCone> {
        let n = n_angles.max(64);
        let step = 2.0 * PI / n as f64;
        let origin = 0.012_345_678_9 * step;
        let angle = |i: usize| origin + i as f64 * step;
        let grads: Vec<Vec2> = (0..n).map(|i| self.gradient(Vec2::from_angle(angle(i)))).collect();
        let scale = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
        let tol = 1e-9 * scale;
        let same = |g: Vec2, h: Vec2| (g - h).norm() <= tol;
        let linked: Vec<bool> = (0..n).map(|i| same(grads[i], grads[(i + 1) % n])).collect();
        if linked.iter().all(|&l| l) {
            // Linear on the whole circle is impossible for a norm.
            return vec![];
        }
        // Start scanning right after a break so runs do not wrap.
        let first_break = linked.iter().position(|&l| !l).unwrap();
        let mut cones = Vec::new();
        let mut i = 0;
        while i < n {
            let start = (first_break + 1 + i) % n;
            let mut len = 0;
            while linked[(start + len) % n] && len < n {
                len += 1;
            }
            if len >= 1 {
                let g = grads[start];
                let a = angle(start);
                let b = a + len as f64 * step;
                let lo = self.refine_edge(g, a, a - step, tol);
                let hi = self.refine_edge(g, b, b + step, tol);
                cones.push(AdditivityCone { start: lo, end: hi });
            }
            i += len + 1;
        }
        cones
    }

    /// Bisect between `inside` (gradient equals `g`) and `outside` for the boundary.
    fn refine_edge(&self, g: Vec2, mut inside: f64, mut outside: f64, tol: f64) -> f64 {
        while (outside - inside).abs() > 1e-11 {
            let m = 0.5 * (inside + outside);
            if (self.gradient(Vec2::from_angle(m)) - g).norm() <= tol {
                inside = m;
            } else {
                outside = m;
            }
        }
        0.5 * (inside + outside)
    }

    /// Isoperimetric shape of the ρ-perimeter `Σ ρ(edge)`, at unit dilation.
    ///
    /// The perimeter integrates ρ over *tangent* vectors, so the minimizer is the
    /// dual ball `{x : x·y ≤ ρ(y) ∀y}` turned a quarter turn clockwise:
    /// `{x : x·u ≤ ρ(u⊥)}` with `u⊥` = `u` rotated by +π/2. The half-planes are
    /// taken at `n_directions` uniform normals plus every kink direction of ρ, which
    /// makes the result exact for polyhedral norms.
    pub fn wulff_shape(&self, n_directions: usize) -> Result<ConvexPolygon> {
        let n = n_directions.max(16);
        let mut angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        for a in self.kink_angles() {
            // Kinks of ρ at y are facet normals of the dual ball; after the quarter
            // turn they become normals y rotated by −π/2.
            angles.push(a - FRAC_PI_2);
            angles.push(a + FRAC_PI_2);
        }
        let normals: Vec<Vec2> = angles.iter().map(|&a| Vec2::from_angle(a)).collect();
        let offsets: Vec<f64> = normals.iter().map(|u| self.eval(u.perp())).collect();
        ConvexPolygon::from_halfplanes(&normals, &offsets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hausdorff_distance;
    use std::f64::consts::FRAC_PI_4;

    fn close_to(found: &[DegenerateDirection], expect: &[f64]) {
        assert_eq!(found.len(), expect.len(), "{found:?}");
        for (d, e) in found.iter().zip(expect) {
            assert!((d.angle - e).abs() < 1e-7, "{} vs {e}", d.angle);
        }
    }

    #[test]
    fn degenerate_directions_examples() {
        close_to(&Norm::l1().degenerate_directions(64, 1e-6), &[0.0, FRAC_PI_2]);
        assert!(Norm::euclidean().degenerate_directions(64, 1e-6).is_empty());
        assert!(Norm::p(4.0).unwrap().degenerate_directions(64, 1e-6).is_empty());
        let w = Norm::weighted_l1(1.0 / 3.0, 3.0).unwrap();
        let d = w.degenerate_directions(64, 1e-6);
        close_to(&d, &[0.0, FRAC_PI_2]);
        assert!((d[0].gap - 6.0).abs() < 1e-6);
        assert!((d[1].gap - 2.0 / 3.0).abs() < 1e-6);
        close_to(&Norm::linf().degenerate_directions(64, 1e-6), &[FRAC_PI_4, 3.0 * FRAC_PI_4]);
    }

    #[test]
    fn cones_of_polyhedral_norms() {
        let c = Norm::l1().additivity_cones(720);
        assert_eq!(c.len(), 4);
        for cone in &c {
            assert!((cone.width() - FRAC_PI_2).abs() < 1e-9);
            assert!((cone.start / FRAC_PI_2 - (cone.start / FRAC_PI_2).round()).abs() < 1e-9);
        }
        let c = Norm::linf().additivity_cones(720);
        assert_eq!(c.len(), 4);
        assert!(c.iter().any(|k| k.contains(Vec2::E1, 0.0)));
        assert!(Norm::euclidean().additivity_cones(720).is_empty());
        assert!(Norm::p(4.0).unwrap().additivity_cones(720).is_empty());
        let s = Norm::sum(vec![(1.0, Norm::l1()), (1.0, Norm::rotated(FRAC_PI_4, Norm::l1()).unwrap())]).unwrap();
        assert_eq!(s.additivity_cones(720).len(), 8);
    }

    #[test]
    fn wulff_examples() {
        let disc = Norm::euclidean().wulff_shape(256).unwrap();
        let reference = ConvexPolygon::regular(4096, 1.0, 0.0).unwrap();
        assert!(hausdorff_distance(&disc, &reference) < 1e-3);
        let sq = Norm::l1().wulff_shape(16).unwrap();
        assert!(hausdorff_distance(&sq, &ConvexPolygon::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap()) < 1e-12);
        let dia = Norm::linf().wulff_shape(16).unwrap();
        let d = ConvexPolygon::new(vec![
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, -1.0),
        ])
        .unwrap();
        assert!(hausdorff_distance(&dia, &d) < 1e-12);
    }

    #[test]
    fn wulff_of_weighted_l1_is_elongated_along_e1() {
        let w = Norm::weighted_l1(1.0 / 3.0, 3.0).unwrap();
        let r = w.wulff_shape(64).unwrap();
        let expect = ConvexPolygon::rectangle(-3.0, -1.0 / 3.0, 3.0, 1.0 / 3.0).unwrap();
        assert!(hausdorff_distance(&r, &expect) < 1e-12);
    }
}
