//! Principal Dirichlet eigenpair of `−Δ` on convex polygons.

mod band;
mod flux;
mod grid;

pub use flux::{boundary_gradient, FluxProfile, FluxSample, CORNER_TURNING};
pub use grid::{BoundaryLink, GridDiscretization, DIRECTIONS, MIN_ARM};

use crate::error::{Error, Result};
use crate::geometry::ConvexPolygon;
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};

/// Default outer tolerance on the relative eigenvalue change.
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 20_000;

#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub lambda_h: f64,
    /// Nodal values with `h² Σ u² = 1`.
    pub values: Vec<f64>,
    /// `‖A u − λ u‖ / ‖u‖`.
    pub residual: f64,
    pub iterations: usize,
    pub boundary_flux: Vec<FluxSample>,
    pub profile: FluxProfile,
}

impl EigenSolution {
    /// Hadamard first variation `−∮ |∇h|² v·n ds` of λ under the boundary field `v`.
    pub fn hadamard_derivative(&self, v: impl Fn(Vec2) -> Vec2) -> f64 {
        self.profile.hadamard(v)
    }
}

/// Smallest eigenpair by inverse iteration from the all-ones vector.
pub fn principal_eigenpair(grid: &GridDiscretization, tol: f64) -> Result<EigenSolution> {
    principal_eigenpair_shifted(grid, tol, 0.0)
}

/// Inverse iteration on `A − σI`; `σ` must stay below the first eigenvalue.
pub fn principal_eigenpair_shifted(grid: &GridDiscretization, tol: f64, shift: f64) -> Result<EigenSolution> {
    let n = grid.len();
    let mut lu = grid.band_matrix(shift);
    lu.factor()?;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut ax = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        lu.solve(&mut x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: norm });
        }
        x.iter_mut().for_each(|v| *v *= sign / norm);
        grid.apply(&x, &mut ax);
        let lambda: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        residual = x.iter().zip(&ax).map(|(a, b)| (b - lambda * a).powi(2)).sum::<f64>().sqrt();
        if (lambda - prev).abs() <= tol * lambda && residual <= 1e-8 * lambda {
            let h = grid.spacing();
            let values: Vec<f64> = x.iter().map(|v| v / h).collect();
            let boundary_flux = boundary_gradient(grid, &values);
            let profile = FluxProfile::new(grid, &boundary_flux);
            return Ok(EigenSolution {
                lambda_h: lambda,
                values,
                residual,
                iterations: it,
                boundary_flux,
                profile,
            });
        }
        prev = lambda;
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, residual })
}

/// Discretize and solve in one call.
pub fn solve(p: &ConvexPolygon, h: f64) -> Result<(GridDiscretization, EigenSolution)> {
    let grid = GridDiscretization::new(p, h)?;
    let sol = principal_eigenpair(&grid, DEFAULT_TOL)?;
    Ok((grid, sol))
}

/// Richardson-extrapolated eigenvalue over a sequence of halved grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub lambda: f64,
    pub error_estimate: f64,
    /// `log₂` of successive difference ratios, when three or more levels exist.
    pub observed_order: Option<f64>,
    /// Set when the observed order dropped below 1.5 and the finest value was used.
    pub fell_back: bool,
    /// `(h, λ_h)` per level, coarsest first.
    pub levels: Vec<(f64, f64)>,
}

/// Largest power of two not exceeding `min(diameter/24, inradius/4.5)`.
pub fn base_spacing(p: &ConvexPolygon) -> f64 {
    let target = (p.diameter() / 24.0).min(p.inradius() / 4.5);
    2f64.powi(target.log2().floor() as i32)
}

/// λ extrapolated from `levels ≥ 2` grids `h0, h0/2, …` with [`base_spacing`].
pub fn eigenvalue_extrapolated(p: &ConvexPolygon, levels: usize) -> Result<Extrapolation> {
    eigenvalue_extrapolated_from(p, base_spacing(p), levels)
}

pub fn eigenvalue_extrapolated_from(p: &ConvexPolygon, h0: f64, levels: usize) -> Result<Extrapolation> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!("extrapolation needs at least 2 levels, got {levels}")));
    }
    let mut values = Vec::with_capacity(levels);
    let mut shift = 0.0;
    for l in 0..levels {
        let h = h0 / f64::powi(2.0, l as i32);
        let grid = GridDiscretization::new(p, h)?;
        let sol = principal_eigenpair_shifted(&grid, DEFAULT_TOL, shift)?;
        shift = 0.9 * sol.lambda_h;
        values.push((h, sol.lambda_h));
    }
    Ok(richardson(values))
}

pub(crate) fn richardson(levels: Vec<(f64, f64)>) -> Extrapolation {
    let lam: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let m = lam.len();
    let ext: Vec<f64> = (1..m).map(|i| (4.0 * lam[i] - lam[i - 1]) / 3.0).collect();
    let observed_order = (m >= 3).then(|| {
        let d1 = lam[m - 2] - lam[m - 3];
        let d2 = lam[m - 1] - lam[m - 2];
        (d1 / d2).abs().log2()
    });
    let fell_back = matches!(observed_order, Some(p) if !(p >= 1.5));
    let (lambda, error_estimate) = if fell_back {
        (lam[m - 1], (lam[m - 1] - lam[m - 2]).abs())
    } else if ext.len() >= 2 {
        (ext[ext.len() - 1], (ext[ext.len() - 1] - ext[ext.len() - 2]).abs())
    } else {
        (ext[0], (ext[0] - lam[m - 1]).abs())
    };
    Extrapolation { lambda, error_estimate, observed_order, fell_back, levels }
}

/// `x,y,value` lines of the eigenfunction for export.
pub fn eigenfunction_rows(grid: &GridDiscretization, sol: &EigenSolution) -> Vec<(Vec2, f64)> {
    (0..grid.len()).map(|i| (grid.position(i), sol.values[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn square_matches_discrete_closed_form() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let h = 1.0 / 32.0;
        let (_, s) = solve(&sq, h).unwrap();
        let exact = 8.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
        assert!((s.lambda_h - exact).abs() < 1e-9 * exact, "{} vs {exact}", s.lambda_h);
        assert!(s.values.iter().all(|&v| v > 0.0));
        let l2: f64 = s.values.iter().map(|v| v * v).sum::<f64>() * h * h;
        assert!((l2 - 1.0).abs() < 1e-12);
        assert!(s.residual < 1e-8 * s.lambda_h);
        let w: f64 = s.boundary_flux.iter().map(|f| f.weight).sum();
        assert!((w - 4.0).abs() < 1e-9);
    }

    #[test]
    fn square_extrapolates_to_two_pi_squared() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let e = eigenvalue_extrapolated(&sq, 3).unwrap();
        assert!((e.lambda - 2.0 * PI * PI).abs() < 1e-3 * e.lambda, "{e:?}");
        assert!(e.error_estimate < 1e-3);
    }

    #[test]
    fn square_flux_matches_sine_mode() {
        // u = 2 sin(πx) sin(πy) has |∇u| = 2π sin(πs) on each side.
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let (_, s) = solve(&sq, 1.0 / 64.0).unwrap();
        for f in &s.boundary_flux {
            let t = if f.normal.x.abs() > 0.5 { f.point.y } else { f.point.x };
            let exact = 2.0 * PI * (PI * t).sin();
            assert!((f.grad - exact).abs() < 0.01 * 2.0 * PI, "{f:?} {exact}");
        }
        // ∮|∇u|² = 8π² = 4λ.
        let total = s.profile.total();
        assert!((total - 8.0 * PI * PI).abs() < 0.01 * total, "{total}");
    }

    #[test]
    fn richardson_fallback() {
        let e = richardson(vec![(0.1, 10.0), (0.05, 10.5), (0.025, 10.9)]);
        assert!(e.fell_back);
        assert_eq!(e.lambda, 10.9);
        let e = richardson(vec![(0.1, 10.4), (0.05, 10.1), (0.025, 10.025)]);
        assert!(!e.fell_back);
        assert!((e.lambda - 10.0).abs() < 1e-12);
    }
}
