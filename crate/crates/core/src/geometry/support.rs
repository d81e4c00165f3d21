//! Support-value coordinates for convex bodies.
//!
//! A [`SupportVector`] stores `h_k = h_U(u_k)` at `K` uniform angles
//! `θ_k = 2πk/K`. The polygon it describes is `∩_k {x : x·u_k ≤ h_k}`; face `k`
//! (outward normal `u_k`) has length
//! `L_k = (h_{k−1} + h_{k+1} − 2 cos(2π/K) h_k) / sin(2π/K)`,
//! so the discrete convexity cone `L_k ≥ 0` is linear in `h`.

use super::ConvexPolygon;
use crate::error::{Error, Result};
use crate::vec2::Vec2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportVector {
    values: Vec<f64>,
}

impl SupportVector {
    /// Requires `K ≥ 8` positive finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 8 {
            return Err(Error::InvalidArgument(format!(
                "support vector needs K >= 8 angles, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Infeasible(format!("support value {v} is not positive")));
        }
        Ok(SupportVector { values })
    }

    /// Support samples of `p` at `k` angles (requires the origin strictly inside `p`).
    pub fn from_polygon(p: &ConvexPolygon, k: usize) -> Result<Self> {
        Self::new(p.support_samples(k))
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        2.0 * PI / self.k() as f64
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.step() * k as f64
    }

    pub fn normal(&self, k: usize) -> Vec2 {
        Vec2::from_angle(self.angle(k))
    }

    /// `h_{k−1} + h_{k+1} − 2 cos(2π/K) h_k`, nonnegative inside the cone.
    pub fn cone_slack(&self, k: usize) -> f64 {
        let n = self.k();
        let c = self.step().cos();
        self.values[(k + n - 1) % n] + self.values[(k + 1) % n] - 2.0 * c * self.values[k]
    }

    /// Whether every cone inequality holds up to `tol·mean(h)`.
    pub fn in_cone(&self, tol: f64) -> bool {
        let scale = self.mean();
        (0..self.k()).all(|k| self.cone_slack(k) >= -tol * scale)
    }

    /// Face lengths `L_k`; meaningful inside the cone.
    pub fn face_lengths(&self) -> Vec<f64> {
        let s = self.step().sin();
        (0..self.k()).map(|k| self.cone_slack(k) / s).collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.k() as f64
    }

    /// `∩_k {x : x·u_k ≤ h_k}`.
    pub fn to_polygon(&self) -> Result<ConvexPolygon> {
        let normals: Vec<Vec2> = (0..self.k()).map(|k| self.normal(k)).collect();
        ConvexPolygon::from_halfplanes(&normals, &self.values)
    }

    /// Replace every value by the true support value of [`Self::to_polygon`]; the
    /// result lies in the cone and describes the same polygon.
    pub fn snapped(&self) -> Result<Self> {
        let p = self.to_polygon()?;
        Self::from_polygon(&p, self.k())
    }

    pub fn scaled(&self, t: f64) -> Self {
        SupportVector { values: self.values.iter().map(|h| h * t).collect() }
    }

    /// Support vector of the translate by `shift`.
    pub fn translated(&self, shift: Vec2) -> Result<Self> {
        Self::new((0..self.k()).map(|k| self.values[k] + shift.dot(self.normal(k))).collect())
    }

    /// Cyclic projection onto the cone: each violated inequality `a_k·h ≥ 0` is
    /// fixed by the Euclidean projection onto its half-space, sweeping until every
    /// slack is above `−tol·mean(h)` or `max_sweeps` is exhausted.
    pub fn project_cone_cyclic(&self, tol: f64, max_sweeps: usize) -> Result<Self> {
        let n = self.k();
        let c = self.step().cos();
        let norm_sq = 2.0 + 4.0 * c * c;
        let mut h = self.values.clone();
        let scale = self.mean();
        for _ in 0..max_sweeps {
            let mut worst: f64 = 0.0;
            for k in 0..n {
                let (km, kp) = ((k + n - 1) % n, (k + 1) % n);
                let slack = h[km] + h[kp] - 2.0 * c * h[k];
                if slack < 0.0 {
                    worst = worst.min(slack);
                    let t = -slack / norm_sq;
                    h[km] += t;
                    h[kp] += t;
                    h[k] -= 2.0 * c * t;
                }
            }
            if worst >= -tol * scale {
                return Self::new(h);
            }
        }
        Err(Error::Infeasible(format!(
            "cyclic cone projection did not reach feasibility in {max_sweeps} sweeps"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hausdorff_distance;
    use approx::assert_relative_eq;

    #[test]
    fn constant_support_is_regular_polygon() {
        let s = SupportVector::new(vec![1.0; 8]).unwrap();
        let p = s.to_polygon().unwrap();
        assert_eq!(p.len(), 8);
        for (k, h) in p.support_samples(8).iter().enumerate() {
            assert_relative_eq!(*h, s.values()[k], epsilon = 1e-12);
        }
        let s64 = SupportVector::new(vec![1.0; 64]).unwrap();
        let disc = s64.to_polygon().unwrap();
        assert!((disc.area() - PI).abs() < 0.01);
        assert!(SupportVector::new(vec![1.0; 4]).is_err());
    }

    #[test]
    fn violating_vector_is_detected() {
        let mut h = vec![1.0; 8];
        h[3] = 1.6; // slack 2 − 2cos(π/4)·1.6 < 0
        let s = SupportVector::new(h).unwrap();
        assert!(s.cone_slack(3) < 0.0);
        assert!(!s.in_cone(0.0));
        let p = s.to_polygon().unwrap();
        let back = p.support_samples(8);
        assert!((back[3] - 1.6).abs() > 1e-3, "round trip must expose the violation");
        let snapped = s.snapped().unwrap();
        assert!(snapped.in_cone(1e-12));
    }

    #[test]
    fn cyclic_projection_reaches_cone() {
        let mut h = vec![1.0; 16];
        h[2] = 1.5;
        h[9] = 1.3;
        let s = SupportVector::new(h).unwrap();
        let p = s.project_cone_cyclic(1e-12, 10_000).unwrap();
        assert!(p.in_cone(1e-12));
    }

    #[test]
    fn face_lengths_sum_to_perimeter() {
        let sq = ConvexPolygon::rectangle(-1.0, -0.5, 2.0, 1.0).unwrap();
        let s = SupportVector::from_polygon(&sq, 16).unwrap();
        let total: f64 = s.face_lengths().iter().sum();
        assert_relative_eq!(total, sq.euclidean_perimeter(), epsilon = 1e-12);
        let back = s.to_polygon().unwrap();
        assert!(hausdorff_distance(&back, &sq) < 1e-12);
    }
}
