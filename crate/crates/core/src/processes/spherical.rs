//! Spherical ensemble: eigenvalues of `A^{-1} B` for independent complex
//! Gaussian matrices, lifted to S² by inverse stereographic projection.

use crate::error::{Error, Result};
use crate::sphere::UnitPoint;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Smallest accepted ratio of the extreme LU pivots of `A`.
const PIVOT_RATIO_MIN: f64 = 1e-13;
const SCHUR_EPS: f64 = 1e-14;
const SCHUR_ITER: usize = 10_000;
const SCHUR_RETRY_ITER: usize = 1_000_000;
const MAX_REDRAWS: usize = 100;

/// Standard complex normal: real and imaginary parts independent N(0, 1/2).
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    // fill row by row so the draw order does not depend on storage layout
    let entries: Vec<Complex64> = (0..n * n).map(|_| complex_gaussian(rng)).collect();
    DMatrix::from_row_slice(n, n, &entries)
}

/// Stereographic coordinate `(x1 + i x2) / (1 - x3)` of a point on S².
pub fn stereographic(p: &UnitPoint) -> Complex64 {
    let c = p.coords();
    Complex64::new(c[0], c[1]) / (1.0 - c[2])
}

/// Inverse of [`stereographic`]: `(2u, 2v, |z|^2 - 1) / (1 + |z|^2)`.
pub fn inverse_stereographic(z: Complex64) -> UnitPoint {
    let r2 = z.norm_sqr();
    if r2 > 1e150 {
        // far from the origin, divide through by |z|^2 first
        let inv = 1.0 / r2;
        let s = 1.0 / (1.0 + inv);
        return UnitPoint::from_unit(vec![2.0 * z.re * inv * s, 2.0 * z.im * inv * s, (1.0 - inv) * s]);
    }
    let s = 1.0 / (1.0 + r2);
    UnitPoint::from_unit(vec![2.0 * z.re * s, 2.0 * z.im * s, (r2 - 1.0) * s])
}

fn eigenvalues(m: DMatrix<Complex64>) -> Option<Vec<Complex64>> {
    let schur = m
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_ITER)
        .or_else(|| m.try_schur(SCHUR_EPS, SCHUR_RETRY_ITER))?;
    let (_, t) = schur.unpack();
    let values: Vec<Complex64> = t.diagonal().iter().copied().collect();
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(values)
}

/// `n` points of the spherical ensemble on S².
pub fn sample_spherical_ensemble<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<UnitPoint>> {
    if n == 0 {
        return Err(Error::Domain("spherical ensemble requires n >= 1".into()));
    }
    for _ in 0..MAX_REDRAWS {
        let a = gaussian_matrix(n, rng);
        let b = gaussian_matrix(n, rng);
        let lu = a.lu();
        let u = lu.u();
        let pivots: Vec<f64> = u.diagonal().iter().map(|z| z.norm()).collect();
        let max = pivots.iter().cloned().fold(0.0, f64::max);
        let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > PIVOT_RATIO_MIN * max) {
            continue;
        }
        let Some(m) = lu.solve(&b) else { continue };
        let values = eigenvalues(m).ok_or_else(|| {
            Error::Numerical(format!("Schur decomposition of a {n}x{n} matrix did not converge"))
        })?;
        return Ok(values.into_iter().map(inverse_stereographic).collect());
    }
    Err(Error::Numerical(format!("{MAX_REDRAWS} singular Gaussian matrices in a row")))
}
