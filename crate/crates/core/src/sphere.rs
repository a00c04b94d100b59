//! Points and caps on the unit sphere S^d, embedded in R^{d+1}.

use crate::error::{ensure_domain, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A point on S^d stored as its `d + 1` Cartesian coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitPoint(Vec<f64>);

impl UnitPoint {
    /// Normalises `coords`; fails on a zero or non-finite vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        ensure_domain!(coords.len() >= 2, "a unit point needs at least two coordinates");
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        ensure_domain!(norm.is_finite() && norm > 0.0, "cannot normalise vector of norm {norm}");
        Ok(Self(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Wraps coordinates already known to have unit norm.
    pub(crate) fn from_unit(coords: Vec<f64>) -> Self {
        debug_assert!((coords.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-9);
        Self(coords)
    }

    /// North pole `(0, ..., 0, 1)` of S^d.
    pub fn north_pole(d: usize) -> Self {
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        Self(c)
    }

    /// Point on S² from polar angle `theta` (from the north pole) and azimuth `alpha`.
    pub fn from_spherical(theta: f64, alpha: f64) -> Self {
        let s = theta.sin();
        Self(vec![s * alpha.cos(), s * alpha.sin(), theta.cos()])
    }

    /// Sphere dimension `d` (the point lives in R^{d+1}).
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean inner product, clamped to `[-1, 1]`.
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.0.len(), other.0.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            .clamp(-1.0, 1.0)
    }

    /// Geodesic distance in `[0, pi]`.
    pub fn angle_to(&self, other: &Self) -> f64 {
        self.dot(other).acos()
    }

    /// Polar angle and azimuth in `[0, 2 pi)` of a point on S².
    pub fn to_spherical(&self) -> (f64, f64) {
        debug_assert_eq!(self.dim(), 2);
        let theta = self.0[2].clamp(-1.0, 1.0).acos();
        let mut alpha = self.0[1].atan2(self.0[0]);
        if alpha < 0.0 {
            alpha += 2.0 * PI;
        }
        if alpha >= 2.0 * PI {
            alpha = 0.0;
        }
        (theta, alpha)
    }
}

/// Open spherical cap `{ y : <x, y> > cos(angle) }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    center: UnitPoint,
    angle: f64,
    cos_angle: f64,
}

impl Cap {
    pub fn new(center: UnitPoint, angle: f64) -> Result<Self> {
        ensure_domain!(
            (center.norm() - 1.0).abs() <= 1e-12,
            "cap center has norm {}",
            center.norm()
        );
        ensure_domain!(angle > 0.0 && angle <= PI, "cap angle {angle} outside (0, pi]");
        Ok(Self { center, angle, cos_angle: angle.cos() })
    }

    pub fn center(&self) -> &UnitPoint {
        &self.center
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn contains(&self, p: &UnitPoint) -> bool {
        self.center.dot(p) > self.cos_angle
    }

    /// Number of `points` inside the cap.
    pub fn count<'a, I: IntoIterator<Item = &'a UnitPoint>>(&self, points: I) -> usize {
        points.into_iter().filter(|p| self.contains(p)).count()
    }
}
