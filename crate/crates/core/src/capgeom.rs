//! Geometry of spherical caps on S^d under the normalised surface measure.
//!
//! Caps of equal opening angle `phi` whose centers are at geodesic distance
//! `psi` are described by [`CapPairGeometry`]. The central quantity is the
//! difference volume `sigma(C(x, phi) \ C(y, phi)) = g(1) - g(cos psi)`, where
//! `g(t) = sigma(C(x, phi) ∩ C(y, phi)) - sigma(C(phi))^2` with `t = <x, y>`.

use crate::error::{ensure_domain, Result};
use crate::quadrature;
use crate::specfun::{dim_z, gamma_d, legendre_pd_all, legendre_pd_unchecked};
use std::f64::consts::{FRAC_PI_2, PI};

const AREA_TOL: f64 = 1e-12;
const DIFF_TOL: f64 = 1e-11;

/// Default truncation of the Laplace series route.
pub const DEFAULT_SERIES_TERMS: usize = 500;

/// Two caps of equal angle `phi` at center distance `psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapPairGeometry {
    pub d: usize,
    pub phi: f64,
    pub psi: f64,
}

impl CapPairGeometry {
    pub fn new(d: usize, phi: f64, psi: f64) -> Result<Self> {
        ensure_domain!(d >= 2, "cap geometry requires d >= 2, got {d}");
        ensure_domain!(phi > 0.0 && phi <= FRAC_PI_2, "cap angle {phi} outside (0, pi/2]");
        ensure_domain!((0.0..=PI).contains(&psi), "center distance {psi} outside [0, pi]");
        Ok(Self { d, phi, psi })
    }

    pub fn diff_volume(&self) -> Result<f64> {
        cap_diff_volume(self.d, self.phi, self.psi)
    }

    pub fn intersection_volume(&self) -> Result<f64> {
        cap_intersection_volume(self.d, self.phi, self.psi)
    }

    pub fn symmetric_difference_volume(&self) -> Result<f64> {
        Ok(2.0 * self.diff_volume()?)
    }
}

/// Normalised area `sigma(C(phi)) = gamma_d int_0^phi sin^{d-1} t dt`.
pub fn cap_area(d: usize, phi: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "cap_area requires d >= 2, got {d}");
    ensure_domain!((0.0..=PI).contains(&phi), "cap angle {phi} outside [0, pi]");
    Ok(cap_area_unchecked(d, phi))
}

pub(crate) fn cap_area_unchecked(d: usize, phi: f64) -> f64 {
    if phi <= 0.0 {
        return 0.0;
    }
    if phi >= PI {
        return 1.0;
    }
    if d == 2 {
        // (1 - cos phi)/2 without cancellation
        let s = (0.5 * phi).sin();
        return s * s;
    }
    let k = d as i32 - 1;
    // integrate the smaller side to keep the absolute tolerance meaningful
    if phi <= FRAC_PI_2 {
        gamma_d(d) * quadrature::adaptive(0.0, phi, AREA_TOL, |t| t.sin().powi(k))
    } else {
        1.0 - gamma_d(d) * quadrature::adaptive(phi, PI, AREA_TOL, |t| t.sin().powi(k))
    }
}

/// Laplace coefficient `a_n(phi) = gamma_d/d sin^d(phi) P_{n-1}^{(d+2)}(cos phi)`
/// of the cap indicator, `n >= 1`.
pub fn laplace_coefficient(d: usize, n: usize, phi: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "laplace_coefficient requires d >= 2, got {d}");
    ensure_domain!(n >= 1, "Laplace coefficients are indexed from n = 1");
    ensure_domain!((0.0..=PI).contains(&phi), "cap angle {phi} outside [0, pi]");
    let df = d as f64;
    Ok(gamma_d(d) / df * phi.sin().powi(d as i32) * legendre_pd_unchecked(d + 2, n - 1, phi.cos()))
}

/// Integral form `gamma_d int_0^phi P_n^{(d)}(cos t) sin^{d-1} t dt` of the
/// Laplace coefficient, by adaptive quadrature.
pub fn laplace_coefficient_quadrature(d: usize, n: usize, phi: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "laplace_coefficient requires d >= 2, got {d}");
    ensure_domain!(n >= 1, "Laplace coefficients are indexed from n = 1");
    ensure_domain!((0.0..=PI).contains(&phi), "cap angle {phi} outside [0, pi]");
    let k = d as i32 - 1;
    Ok(gamma_d(d)
        * quadrature::adaptive(0.0, phi, 1e-13, |t| {
            legendre_pd_unchecked(d, n, t.cos()) * t.sin().powi(k)
        }))
}

fn check_pair(d: usize, phi: f64, psi: f64) -> Result<()> {
    CapPairGeometry::new(d, phi, psi).map(|_| ())
}

/// `sigma(C(x, phi) \ C(y, phi))` for centers at angular distance `psi`.
///
/// Uses the closed form on S² and quadrature otherwise. Disjoint caps
/// (`psi >= 2 phi`) return the full cap area.
pub fn cap_diff_volume(d: usize, phi: f64, psi: f64) -> Result<f64> {
    check_pair(d, phi, psi)?;
    Ok(cap_diff_volume_unchecked(d, phi, psi))
}

pub(crate) fn cap_diff_volume_unchecked(d: usize, phi: f64, psi: f64) -> f64 {
    if psi <= 0.0 {
        return 0.0;
    }
    if psi >= 2.0 * phi {
        return cap_area_unchecked(d, phi);
    }
    if d == 2 {
        diff_volume_s2(phi, psi)
    } else {
        diff_volume_integral(d, phi, psi)
    }
}

fn diff_volume_s2(phi: f64, psi: f64) -> f64 {
    let half = 0.5 * psi;
    let a = (half.sin() / phi.sin()).clamp(-1.0, 1.0).asin();
    // tan(psi/2)/tan(phi) written as tan(psi/2) cos(phi)/sin(phi) stays finite at phi = pi/2
    let b = (half.tan() * phi.cos() / phi.sin()).clamp(-1.0, 1.0).asin();
    ((a - b * phi.cos()) / PI).max(0.0)
}

fn diff_volume_integral(d: usize, phi: f64, psi: f64) -> f64 {
    // the integrand vanishes beyond v = phi; truncating there keeps the
    // derivative singularity at an endpoint
    let upper = (0.5 * psi).min(phi);
    let s2 = phi.sin().powi(2);
    let expo = 0.5 * (d as f64 - 1.0);
    let k = d as i32 - 1;
    let v = quadrature::adaptive(0.0, upper, DIFF_TOL, |v| {
        let gap = (s2 - v.sin().powi(2)).max(0.0);
        gap.powf(expo) / v.cos().powi(k)
    });
    (v / PI).max(0.0)
}

/// Quadrature route for the difference volume, valid for every `d >= 2`
/// including S². Used to cross-check the closed form.
pub fn cap_diff_volume_quadrature(d: usize, phi: f64, psi: f64) -> Result<f64> {
    check_pair(d, phi, psi)?;
    if psi <= 0.0 {
        return Ok(0.0);
    }
    Ok(diff_volume_integral(d, phi, psi))
}

/// `sigma(C(x, phi) ∩ C(y, phi))`.
pub fn cap_intersection_volume(d: usize, phi: f64, psi: f64) -> Result<f64> {
    check_pair(d, phi, psi)?;
    let area = cap_area_unchecked(d, phi);
    Ok((area - cap_diff_volume_unchecked(d, phi, psi)).clamp(0.0, area))
}

/// All Laplace coefficients `a_1(phi), ..., a_{n_max}(phi)`.
pub fn laplace_coefficients(d: usize, phi: f64, n_max: usize) -> Result<Vec<f64>> {
    ensure_domain!(d >= 2, "laplace_coefficient requires d >= 2, got {d}");
    ensure_domain!(n_max >= 1, "series needs at least one term");
    let p = legendre_pd_all(d + 2, n_max - 1, phi.cos())?;
    let scale = gamma_d(d) / d as f64 * phi.sin().powi(d as i32);
    Ok(p.into_iter().map(|v| scale * v).collect())
}

/// Truncated Laplace series `sum_{n=1}^{n_max} a_n^2 Z(d, n) P_n^{(d)}(x)`
/// of `g_phi(x) = sigma(C ∩ C') - sigma(C)^2`.
pub fn g_phi_series(d: usize, phi: f64, x: f64, n_max: usize) -> Result<f64> {
    ensure_domain!(x.abs() <= 1.0 + 1e-12, "inner product {x} outside [-1, 1]");
    let a = laplace_coefficients(d, phi, n_max)?;
    let p = legendre_pd_all(d, n_max, x)?;
    let mut sum = 0.0;
    for n in 1..=n_max {
        sum += a[n - 1] * a[n - 1] * dim_z(d, n)? as f64 * p[n];
    }
    Ok(sum)
}

/// Series route for `g_phi(1) - g_phi(cos psi)`.
pub fn diff_volume_series(d: usize, phi: f64, psi: f64, n_max: usize) -> Result<f64> {
    let a = laplace_coefficients(d, phi, n_max)?;
    let p = legendre_pd_all(d, n_max, psi.cos())?;
    let mut sum = 0.0;
    for n in 1..=n_max {
        sum += a[n - 1] * a[n - 1] * dim_z(d, n)? as f64 * (1.0 - p[n]);
    }
    Ok(sum)
}

/// Upper bound `psi sin^{d-1}(phi) / (2 pi)` on the difference volume,
/// valid on all of `[0, pi/2] x [0, pi]`. For `psi >= 2 phi` the volume
/// stays at the cap area while the bound keeps growing, so the whole range
/// follows from `psi <= 2 phi`.
pub fn diff_volume_upper_bound(d: usize, phi: f64, psi: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "requires d >= 2, got {d}");
    ensure_domain!(
        (0.0..=FRAC_PI_2).contains(&phi) && (0.0..=PI).contains(&psi),
        "bound requires phi in [0, pi/2] and psi in [0, pi] (got phi={phi}, psi={psi})"
    );
    Ok(psi * phi.sin().powi(d as i32 - 1) / (2.0 * PI))
}

/// Smallest constant `A` with `bound - A psi^3 sin^{d-3}(phi) <= diff` on a
/// `grid x grid` lattice of `(phi, psi)` with `0 < psi <= 2 phi`, `phi <= pi/2`.
pub fn diff_volume_bound_constant(d: usize, grid: usize) -> Result<f64> {
    ensure_domain!(grid >= 2, "grid needs at least two points per axis");
    let mut worst: f64 = 0.0;
    for i in 1..=grid {
        let phi = FRAC_PI_2 * i as f64 / grid as f64;
        for j in 1..=grid {
            let psi = 2.0 * phi * j as f64 / grid as f64;
            let gap = diff_volume_upper_bound(d, phi, psi)? - cap_diff_volume(d, phi, psi)?;
            let scale = psi.powi(3) * phi.sin().powi(d as i32 - 3);
            worst = worst.max(gap / scale);
        }
    }
    Ok(worst)
}
