//! Norms on the plane.
//!
//! A [`Norm`] is a closed set of variants (p-norms, weighted ℓ¹, polygonal gauges,
//! nonnegative combinations and rotations). Besides evaluation, every variant
//! provides exact one-sided directional derivatives, which is what the facet and
//! corner analysis in [`crate::features`] is built on.

mod analysis;
mod parse;

pub use analysis::{AdditivityCone, DegenerateDirection};
pub use parse::parse_norm;

use crate::error::{Error, Result};
use crate::vec2::Vec2;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

/// Relative threshold below which a coordinate (or a gap between competing
/// linear pieces) is treated as an exact tie.
const TIE_REL: f64 = 1e-12;

/// Unit ball of a polygonal norm, stored as one half of a centrally symmetric
/// vertex list. The other half is the exact negation, so evaluation is exactly even.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalBall {
    /// Counterclockwise vertices `v_0, …, v_{m-1}`; the full ball is
    /// `v_0, …, v_{m-1}, −v_0, …, −v_{m-1}`.
    half: Vec<Vec2>,
    /// Dual functionals `g_j` with `ρ(x) = max_j |g_j · x|`, one per edge of the half ring.
    functionals: Vec<Vec2>,
}

impl PolygonalBall {
    fn new(vertices: &[Vec2]) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::InvalidNorm(format!(
                "polygonal ball needs at least 4 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.len() % 2 != 0 {
            return Err(Error::InvalidNorm(
                "polygonal ball is not centrally symmetric (odd vertex count)".into(),
            ));
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidNorm("polygonal ball has no extent".into()));
        }
        let mut sorted: Vec<Vec2> = vertices.to_vec();
        if sorted.iter().any(|v| v.norm() <= 1e-12 * scale) {
            return Err(Error::InvalidNorm(
                "origin must lie strictly inside the polygonal ball".into(),
            ));
        }
        sorted.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        let m = sorted.len() / 2;
        let tol = 1e-9 * scale;
        for i in 0..m {
            if (sorted[i] + sorted[i + m]).norm() > tol {
                return Err(Error::InvalidNorm(format!(
                    "polygonal ball is not centrally symmetric: vertex ({}, {}) has no opposite",
                    sorted[i].x, sorted[i].y
                )));
            }
        }
        let half: Vec<Vec2> = sorted[..m].to_vec();
        let full: Vec<Vec2> = half.iter().copied().chain(half.iter().map(|&v| -v)).collect();
        let n = full.len();
        for i in 0..n {
            let a = full[i];
            let b = full[(i + 1) % n];
            let c = full[(i + 2) % n];
            if (b - a).cross(c - b) <= 1e-12 * scale * scale {
                return Err(Error::InvalidNorm(
                    "polygonal ball vertices are not in strictly convex position".into(),
                ));
            }
            if a.cross(b) <= 0.0 {
                return Err(Error::InvalidNorm(
                    "origin must lie strictly inside the polygonal ball".into(),
                ));
            }
        }
        let functionals = (0..m)
            .map(|i| {
                let a = full[i];
                let b = full[i + 1];
                let d = b - a;
                let normal = Vec2::new(d.y, -d.x);
                normal / normal.dot(a)
            })
            .collect();
        Ok(PolygonalBall { half, functionals })
    }

    /// Full counterclockwise vertex ring.
    pub fn vertices(&self) -> Vec<Vec2> {
        self.half.iter().copied().chain(self.half.iter().map(|&v| -v)).collect()
    }

    fn eval(&self, x: Vec2) -> f64 {
        self.functionals.iter().map(|g| g.dot(x).abs()).fold(0.0, f64::max)
    }

    fn directional(&self, x: Vec2, d: Vec2) -> f64 {
        let val = self.eval(x);
        let mut best = f64::NEG_INFINITY;
        for g in &self.functionals {
            let gx = g.dot(x);
            if gx.abs() >= val - TIE_REL * val {
                let s = if gx >= 0.0 { 1.0 } else { -1.0 };
                best = best.max(s * g.dot(d));
            }
        }
        best
    }
}

/// A norm on ℝ².
#[derive(Clone, Debug, PartialEq)]
pub enum Norm {
    /// ℓᵖ norm, `p ∈ [1, ∞]`.
    PNorm { p: f64 },
    /// `w1·|x₁| + w2·|x₂|`.
    WeightedL1 { w1: f64, w2: f64 },
    /// Gauge of a centrally symmetric convex polygon.
    Polygonal(PolygonalBall),
    /// `Σ wᵢ·ρᵢ` with positive weights.
    Sum(Vec<(f64, Norm)>),
    /// `x ↦ inner(R₋θ x)`: the unit ball of `inner` rotated by `angle`.
    Rotated { angle: f64, inner: Box<Norm> },
}

impl Norm {
    pub fn p(p: f64) -> Result<Norm> {
        if !(p >= 1.0) {
            return Err(Error::InvalidNorm(format!("p-norm requires p >= 1, got {p}")));
        }
        Ok(Norm::PNorm { p })
    }

    pub fn l1() -> Norm {
        Norm::PNorm { p: 1.0 }
    }

    pub fn euclidean() -> Norm {
        Norm::PNorm { p: 2.0 }
    }

    pub fn linf() -> Norm {
        Norm::PNorm { p: f64::INFINITY }
    }

    pub fn weighted_l1(w1: f64, w2: f64) -> Result<Norm> {
        if !(w1 > 0.0 && w2 > 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(Error::InvalidNorm(format!(
                "weighted l1 requires positive weights, got ({w1}, {w2})"
            )));
        }
        Ok(Norm::WeightedL1 { w1, w2 })
    }

    pub fn polygonal(vertices: &[Vec2]) -> Result<Norm> {
        Ok(Norm::Polygonal(PolygonalBall::new(vertices)?))
    }

    pub fn sum(terms: Vec<(f64, Norm)>) -> Result<Norm> {
        if terms.is_empty() {
            return Err(Error::InvalidNorm("sum of norms needs at least one term".into()));
        }
        if let Some((w, _)) = terms.iter().find(|(w, _)| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidNorm(format!(
                "sum of norms requires positive weights, got {w}"
            )));
        }
        Ok(Norm::Sum(terms))
    }

    pub fn rotated(angle: f64, inner: Norm) -> Result<Norm> {
        if !angle.is_finite() {
            return Err(Error::InvalidNorm("rotation angle must be finite".into()));
        }
        Ok(Norm::Rotated { angle, inner: Box::new(inner) })
    }

    /// ρ(x).
    pub fn eval(&self, x: Vec2) -> f64 {
        match self {
            Norm::PNorm { p } => pnorm(*p, x),
            Norm::WeightedL1 { w1, w2 } => w1 * x.x.abs() + w2 * x.y.abs(),
            Norm::Polygonal(ball) => ball.eval(x),
            Norm::Sum(terms) => terms.iter().map(|(w, n)| w * n.eval(x)).sum(),
            Norm::Rotated { angle, inner } => inner.eval(x.rotate(-angle)),
        }
    }

    /// One-sided directional derivative `lim_{s↓0} (ρ(x + s d) − ρ(x)) / s`, exact
    /// for every variant. At `x = 0` this is `ρ(d)`.
    pub fn directional_derivative(&self, x: Vec2, d: Vec2) -> f64 {
        if x == Vec2::ZERO {
            return self.eval(d);
        }
        match self {
            Norm::PNorm { p } => pnorm_directional(*p, x, d),
            Norm::WeightedL1 { w1, w2 } => {
                let scale = x.x.abs().max(x.y.abs());
                w1 * abs_directional(x.x, d.x, scale) + w2 * abs_directional(x.y, d.y, scale)
            }
            Norm::Polygonal(ball) => ball.directional(x, d),
            Norm::Sum(terms) => terms.iter().map(|(w, n)| w * n.directional_derivative(x, d)).sum(),
            Norm::Rotated { angle, inner } => {
                inner.directional_derivative(x.rotate(-angle), d.rotate(-angle))
            }
        }
    }

    /// Gradient at `x ≠ 0`, averaging one-sided derivatives (exact where ρ is differentiable).
    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let gx = 0.5
            * (self.directional_derivative(x, Vec2::E1) - self.directional_derivative(x, -Vec2::E1));
        let gy = 0.5
            * (self.directional_derivative(x, Vec2::E2) - self.directional_derivative(x, -Vec2::E2));
        Vec2::new(gx, gy)
    }

    /// θ± for the unit vector `e` with `e' = e` rotated by +π/2.
    pub fn one_sided_derivatives(&self, e: Vec2) -> NormProbe {
        let e_perp = e.perp();
        NormProbe {
            e,
            e_perp,
            theta_minus: -self.directional_derivative(e, -e_perp),
            theta_plus: self.directional_derivative(e, e_perp),
        }
    }

    /// θ± from difference quotients `(ρ(e ± s e') − ρ(e))/s` at s = 1e-3, 1e-4, 1e-5
    /// with two rounds of Richardson extrapolation. Independent of the analytic path.
    pub fn one_sided_derivatives_numeric(&self, e: Vec2) -> NormProbe {
        let e_perp = e.perp();
        let base = self.eval(e);
        let quotient = |dir: f64| {
            let q = |s: f64| (self.eval(e + e_perp * (dir * s)) - base) / s;
            let (d1, d2, d3) = (q(1e-3), q(1e-4), q(1e-5));
            let r1 = (10.0 * d2 - d1) / 9.0;
            let r2 = (10.0 * d3 - d2) / 9.0;
            (10.0 * r2 - r1) / 9.0
        };
        NormProbe { e, e_perp, theta_minus: -quotient(-1.0), theta_plus: quotient(1.0) }
    }

    /// `e` is degenerate when θ⁺ − θ⁻ exceeds `tol`.
    pub fn is_degenerate(&self, e: Vec2, tol: f64) -> bool {
        self.one_sided_derivatives(e).gap() > tol
    }

    /// Whether ρ(v⁻ + v⁺) = ρ(v⁻) + ρ(v⁺) within `tol` (relative to the right side).
    ///
    /// By homogeneity and the triangle inequality, equality at (1, 1) forces
    /// ρ(a v⁻ + b v⁺) = a ρ(v⁻) + b ρ(v⁺) for all a, b ≥ 0.
    pub fn additivity_on_pair(&self, v_minus: Vec2, v_plus: Vec2, tol: f64) -> bool {
        let rhs = self.eval(v_minus) + self.eval(v_plus);
        (rhs - self.eval(v_minus + v_plus)).abs() <= tol * rhs
    }

    /// Directions (angles in `[0, π)`) where ρ may fail to be differentiable, listed
    /// analytically per variant. Polyhedral norms have all their kinks here; the list
    /// is a superset for sums (a kink of a term is a kink of the sum).
    pub fn kink_angles(&self) -> Vec<f64> {
        let mut out = match self {
            Norm::PNorm { p } if *p == 1.0 => vec![0.0, FRAC_PI_2],
            Norm::PNorm { p } if p.is_infinite() => vec![FRAC_PI_4, 3.0 * FRAC_PI_4],
            Norm::PNorm { .. } => vec![],
            Norm::WeightedL1 { .. } => vec![0.0, FRAC_PI_2],
            Norm::Polygonal(ball) => ball.half.iter().map(|v| v.angle()).collect(),
            Norm::Sum(terms) => terms.iter().flat_map(|(_, n)| n.kink_angles()).collect(),
            Norm::Rotated { angle, inner } => {
                inner.kink_angles().into_iter().map(|a| a + angle).collect()
            }
        };
        for a in out.iter_mut() {
            *a = a.rem_euclid(PI);
            if PI - *a < 1e-14 {
                *a = 0.0;
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        out
    }

    /// Whether ρ is invariant under `x ↦ (x₂, x₁)`, probed on a fixed angular grid.
    pub fn is_swap_symmetric(&self) -> bool {
        (0..97).all(|i| {
            let x = Vec2::from_angle(0.0731 + i as f64 * 2.0 * PI / 97.0);
            let y = Vec2::new(x.y, x.x);
            (self.eval(x) - self.eval(y)).abs() <= 1e-12 * self.eval(x)
        })
    }
}

fn pnorm(p: f64, x: Vec2) -> f64 {
    let (a, b) = (x.x.abs(), x.y.abs());
    if p == 1.0 {
        a + b
    } else if p == 2.0 {
        a.hypot(b)
    } else if p.is_infinite() {
        a.max(b)
    } else {
        let m = a.max(b);
        if m == 0.0 {
            return 0.0;
        }
        let (lo, _) = if a < b { (a, b) } else { (b, a) };
        m * (1.0 + (lo / m).powf(p)).powf(1.0 / p)
    }
}

fn abs_directional(xi: f64, di: f64, scale: f64) -> f64 {
    if xi.abs() <= TIE_REL * scale {
        di.abs()
    } else {
        xi.signum() * di
    }
}

fn pnorm_directional(p: f64, x: Vec2, d: Vec2) -> f64 {
    let scale = x.x.abs().max(x.y.abs());
    if p == 1.0 {
        abs_directional(x.x, d.x, scale) + abs_directional(x.y, d.y, scale)
    } else if p.is_infinite() {
        let (a, b) = (x.x.abs(), x.y.abs());
        let mut best = f64::NEG_INFINITY;
        if a >= scale - TIE_REL * scale {
            best = best.max(x.x.signum() * d.x);
        }
        if b >= scale - TIE_REL * scale {
            best = best.max(x.y.signum() * d.y);
        }
        best
    } else {
        let r = pnorm(p, x);
        let gx = x.x.signum() * (x.x.abs() / r).powf(p - 1.0);
        let gy = x.y.signum() * (x.y.abs() / r).powf(p - 1.0);
        gx * d.x + gy * d.y
    }
}

/// One-sided derivatives of `s ↦ ρ(e + s e')` at `s = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormProbe {
    pub e: Vec2,
    pub e_perp: Vec2,
    pub theta_minus: f64,
    pub theta_plus: f64,
}

impl NormProbe {
    pub fn gap(&self) -> f64 {
        self.theta_plus - self.theta_minus
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::PNorm { p } if p.is_infinite() => write!(f, "p:inf"),
            Norm::PNorm { p } => write!(f, "p:{p}"),
            Norm::WeightedL1 { w1, w2 } => write!(f, "wl1:{w1},{w2}"),
            Norm::Polygonal(ball) => {
                write!(f, "poly:")?;
                for (i, v) in ball.vertices().iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "({},{})", v.x, v.y)?;
                }
                Ok(())
            }
            Norm::Sum(terms) => {
                write!(f, "sum:")?;
                for (i, (w, n)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*({n})")?;
                }
                Ok(())
            }
            Norm::Rotated { angle, inner } => write!(f, "rot:{angle}:({inner})"),
        }
    }
}
