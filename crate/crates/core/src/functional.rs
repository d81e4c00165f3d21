//! `F(U) = λ(U) + P_ρ(U)` and its dilation-optimal value.

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::norm::Norm;
use crate::spectral::eigenvalue_extrapolated;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// First zero of the Bessel function `J₀`.
pub const J01: f64 = 2.404_825_557_695_773;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub lambda: f64,
    pub perim: f64,
    pub f: f64,
    pub t_star: f64,
    pub f_star: f64,
    /// Error estimate carried by `lambda`.
    pub solver_error: f64,
}

impl FunctionalValue {
    pub fn from_parts(lambda: f64, perim: f64, solver_error: f64) -> Result<Self> {
        let (t_star, f_star) = optimal_scale(lambda, perim)?;
        Ok(FunctionalValue { lambda, perim, f: lambda + perim, t_star, f_star, solver_error })
    }
}

/// Minimizer and minimum of `t ↦ t⁻²λ + tP`.
pub fn optimal_scale(lambda: f64, perim: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && perim > 0.0) || !lambda.is_finite() || !perim.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "optimal scale needs positive lambda and perimeter, got {lambda} and {perim}"
        )));
    }
    let t = (2.0 * lambda / perim).cbrt();
    let f = 3.0 * 2f64.powf(-2.0 / 3.0) * lambda.cbrt() * perim.powf(2.0 / 3.0);
    Ok((t, f))
}

/// Golden-section minimization of `t⁻²λ + tP` on `[t_lo, t_hi]`.
pub fn scan_scale(lambda: f64, perim: f64, t_lo: f64, t_hi: f64) -> (f64, f64) {
    let g = |t: f64| lambda / (t * t) + t * perim;
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (t_lo, t_hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while b - a > 1e-13 * (a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, g(t))
}

/// `F` with λ from `levels` extrapolated grids and the exact ρ-perimeter.
pub fn evaluate(p: &ConvexPolygon, norm: &Norm, levels: usize) -> Result<FunctionalValue> {
    let e = eigenvalue_extrapolated(p, levels)?;
    FunctionalValue::from_parts(e.lambda, p.perimeter(norm), e.error_estimate)
}

/// Scale-invariant isoperimetric ratio `P_ρ(U) / |U|^{1/2}`.
pub fn isoperimetric_score(p: &ConvexPolygon, norm: &Norm) -> f64 {
    p.perimeter(norm) / p.area().sqrt()
}

/// Area and Euclidean-perimeter bounds forced on any convex `U` with `F(U) ≤ bound`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriWindow {
    pub area_min: f64,
    pub area_max: f64,
    pub perim_min: f64,
    pub perim_max: f64,
}

impl AprioriWindow {
    /// Faber–Krahn gives `|U| ≥ πj²/λ ≥ πj²/bound`; `ρ ≥ m|·|` bounds the Euclidean
    /// perimeter by `bound/m`; the isoperimetric inequality closes the window.
    pub fn new(norm: &Norm, bound: f64) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(Error::InvalidArgument(format!("bound must be positive, got {bound}")));
        }
        let m = min_on_circle(norm);
        let area_min = PI * J01 * J01 / bound;
        let perim_max = bound / m;
        Ok(AprioriWindow {
            area_min,
            area_max: perim_max * perim_max / (4.0 * PI),
            perim_min: 2.0 * (PI * area_min).sqrt(),
            perim_max,
        })
    }

    pub fn contains(&self, p: &ConvexPolygon) -> bool {
        let (a, l) = (p.area(), p.euclidean_perimeter());
        self.area_min <= a && a <= self.area_max && self.perim_min <= l && l <= self.perim_max
    }
}

/// A lower bound for `min ρ` on the Euclidean unit circle.
fn min_on_circle(norm: &Norm) -> f64 {
    let n = 4096;
    let values: Vec<f64> = (0..n).map(|k| norm.eval(Vec2::from_angle(2.0 * PI * k as f64 / n as f64))).collect();
    let max = values.iter().cloned().fold(0.0, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    // ρ is max-Lipschitz on the circle, so samples miss the minimum by at most this.
    (min - max * PI / n as f64).max(0.5 * min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let (t, f) = optimal_scale(PI * PI, 4.0).unwrap();
        assert!((t - (PI * PI / 2.0).cbrt()).abs() < 1e-14, "{t}");
        assert!((t - 1.7029).abs() < 5e-4 && (f - 10.215).abs() < 1e-3, "{t} {f}");
        let (t, f) = optimal_scale(2.0, 4.0).unwrap();
        assert!((t - 1.0).abs() < 1e-15 && (f - 6.0).abs() < 1e-14);
        assert!(optimal_scale(0.0, 1.0).is_err());
        assert!(optimal_scale(1.0, -1.0).is_err());
    }

    #[test]
    fn closed_form_agrees_with_scan() {
        for &(l, p) in &[(PI * PI, 4.0), (19.739, 4.0), (5.78, 6.28), (300.0, 0.1)] {
            let (t, f) = optimal_scale(l, p).unwrap();
            let (ts, fs) = scan_scale(l, p, t / 10.0, 10.0 * t);
            assert!((f - fs).abs() < 1e-9 * f);
            assert!((t - ts).abs() < 1e-6 * t);
        }
    }

    #[test]
    fn functional_value_invariants() {
        let v = FunctionalValue::from_parts(2.0 * PI * PI, 4.0, 0.0).unwrap();
        assert_eq!(v.f, v.lambda + v.perim);
        assert!(v.f_star <= v.f);
        assert!((v.f_star - 12.870).abs() < 1e-3, "{}", v.f_star);
    }

    #[test]
    fn window_contains_low_energy_square() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 2.0, 2.0).unwrap();
        let w = AprioriWindow::new(&Norm::l1(), 14.0).unwrap();
        assert!(sq.area() > w.area_min && sq.area() < w.area_max);
        assert!(w.contains(&sq));
    }
}
