//! Dimension counts and zonal polynomial families on S^d.
//!
//! `P_n^{(d)}` denotes the Legendre polynomial for S^d normalised so that
//! `P_n^{(d)}(1) = 1`. For `d >= 2` it is the Gegenbauer polynomial
//! `C_n^{(d-1)/2}` divided by its value at 1; the recurrence below is written
//! directly for the normalised family so nothing grows with `n`.
//!
//! Arguments outside `[-1, 1]` are clamped. All routines are pure.

use crate::error::{ensure_domain, Error, Result};

/// Largest polynomial degree accepted by the checked entry points.
pub const MAX_DEGREE: usize = 4096;

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Dimension `Z(d, ell)` of the space of spherical harmonics of degree `ell` on S^d.
///
/// `dim_z(d + 1, L)` is the number of points of the harmonic ensemble of
/// degree `L` on S^d. For `d = 1` the convention `Z(1, 0) = 1`,
/// `Z(1, ell) = 2` is used.
pub fn dim_z(d: usize, ell: usize) -> Result<u64> {
    ensure_domain!(d >= 1, "dim_z requires d >= 1, got {d}");
    if d == 1 {
        return Ok(if ell == 0 { 1 } else { 2 });
    }
    let overflow = || Error::Overflow(format!("Z({d}, {ell}) exceeds u64"));
    let (d, ell) = (d as u64, ell as u64);
    let binom = binomial_u128(ell + d - 2, d - 2).ok_or_else(overflow)?;
    let value = binom
        .checked_mul((2 * ell + d - 1) as u128)
        .ok_or_else(overflow)?
        / (d - 1) as u128;
    u64::try_from(value).map_err(|_| overflow())
}

/// Number of points of the harmonic ensemble of degree `l` on S^d.
pub fn harmonic_point_count(d: usize, l: usize) -> Result<usize> {
    ensure_domain!(d >= 2, "harmonic ensemble requires d >= 2, got {d}");
    let n = dim_z(d + 1, l)?;
    usize::try_from(n).map_err(|_| Error::Overflow(format!("N_L = {n} exceeds usize")))
}

/// `gamma_d = (int_0^pi sin^{d-1} t dt)^{-1}`, the density normaliser of the
/// polar angle on S^d.
pub fn gamma_d(d: usize) -> f64 {
    // Wallis recurrence I_k = (k-1)/k I_{k-2}, I_0 = pi, I_1 = 2.
    let k = d.saturating_sub(1);
    let mut integral = if k % 2 == 0 { std::f64::consts::PI } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        integral *= (j - 1) as f64 / j as f64;
        j += 2;
    }
    1.0 / integral
}

/// Normalised Legendre polynomial `P_n^{(d)}(x)`.
pub fn legendre_pd(d: usize, n: usize, x: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "legendre_pd requires d >= 2, got {d}");
    ensure_domain!(n <= MAX_DEGREE, "degree {n} exceeds limit {MAX_DEGREE}");
    ensure_domain!(x.abs() <= 1.0 + 1e-12, "legendre_pd argument {x} outside [-1, 1]");
    Ok(legendre_pd_unchecked(d, n, x))
}

pub(crate) fn legendre_pd_unchecked(d: usize, n: usize, x: f64) -> f64 {
    let x = clamp_unit(x);
    let lambda = 0.5 * (d as f64 - 1.0);
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = (2.0 * (k + lambda) * x * cur - k * prev) / (k + 2.0 * lambda);
        prev = cur;
        cur = next;
    }
    cur
}

/// Values `P_0^{(d)}(x), ..., P_{n_max}^{(d)}(x)`.
pub fn legendre_pd_all(d: usize, n_max: usize, x: f64) -> Result<Vec<f64>> {
    ensure_domain!(d >= 2, "legendre_pd requires d >= 2, got {d}");
    ensure_domain!(n_max <= MAX_DEGREE, "degree {n_max} exceeds limit {MAX_DEGREE}");
    let x = clamp_unit(x);
    let lambda = 0.5 * (d as f64 - 1.0);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max >= 1 {
        out.push(x);
    }
    for k in 1..n_max {
        let kf = k as f64;
        let next = (2.0 * (kf + lambda) * x * out[k] - kf * out[k - 1]) / (kf + 2.0 * lambda);
        out.push(next);
    }
    Ok(out)
}

/// Jacobi polynomial `P_n^{(alpha, beta)}(x)` in the classical normalisation,
/// `P_n^{(alpha, beta)}(1) = binom(n + alpha, n)`.
pub fn jacobi(n: usize, alpha: f64, beta: f64, x: f64) -> Result<f64> {
    ensure_domain!(n <= MAX_DEGREE, "degree {n} exceeds limit {MAX_DEGREE}");
    ensure_domain!(
        alpha > -1.0 && beta > -1.0,
        "jacobi parameters must exceed -1, got ({alpha}, {beta})"
    );
    Ok(jacobi_unchecked(n, alpha, beta, clamp_unit(x)))
}

fn jacobi_unchecked(n: usize, alpha: f64, beta: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let ab = alpha + beta;
    let mut cur = (alpha + 1.0) + 0.5 * (ab + 2.0) * (x - 1.0);
    for k in 1..n {
        let k = k as f64;
        let c = 2.0 * k + ab;
        let a1 = 2.0 * (k + 1.0) * (k + ab + 1.0) * c;
        let a2 = (c + 1.0) * (alpha * alpha - beta * beta);
        let a3 = c * (c + 1.0) * (c + 2.0);
        let a4 = 2.0 * (k + alpha) * (k + beta) * (c + 2.0);
        let next = ((a2 + a3 * x) * cur - a4 * prev) / a1;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalised binomial coefficient `binom(n + a, n)` for real `a > -1`.
pub fn binomial_shifted(n: usize, a: f64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * (k as f64 + a) / k as f64)
}

/// Reproducing kernel of spherical harmonics of degree at most `l` on S^d,
/// as a function of the inner product `x`:
/// `K_L(x) = sum_{ell <= L} Z(d, ell) P_ell^{(d)}(x)`.
pub fn kernel_kl(d: usize, l: usize, x: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "kernel_kl requires d >= 2, got {d}");
    ensure_domain!(l <= MAX_DEGREE, "degree {l} exceeds limit {MAX_DEGREE}");
    ensure_domain!(x.abs() <= 1.0 + 1e-12, "kernel_kl argument {x} outside [-1, 1]");
    Ok(kernel_kl_unchecked(d, l, x))
}

pub(crate) fn kernel_kl_unchecked(d: usize, l: usize, x: f64) -> f64 {
    let x = clamp_unit(x);
    let df = d as f64;
    let lambda = 0.5 * (df - 1.0);
    // Z(d, ell) in floating point from the running binomial
    let z_of = |ell: f64, binom: f64| (2.0 * ell + df - 1.0) / (df - 1.0) * binom;
    let mut binom = 1.0; // binom(ell + d - 2, d - 2)
    let (mut prev, mut cur) = (1.0, x);
    let mut sum = 1.0;
    for ell in 1..=l {
        let ellf = ell as f64;
        binom *= (ellf + df - 2.0) / ellf;
        if ell >= 2 {
            let k = ellf - 1.0;
            let next = (2.0 * (k + lambda) * x * cur - k * prev) / (k + 2.0 * lambda);
            prev = cur;
            cur = next;
        }
        sum += z_of(ellf, binom) * cur;
    }
    sum
}

/// Closed Jacobi form of [`kernel_kl`]:
/// `Z(d+1, L) / binom(L + d/2, L) * P_L^{(d/2, d/2 - 1)}(x)`.
pub fn kernel_kl_jacobi(d: usize, l: usize, x: f64) -> Result<f64> {
    ensure_domain!(d >= 2, "kernel_kl requires d >= 2, got {d}");
    ensure_domain!(l <= MAX_DEGREE, "degree {l} exceeds limit {MAX_DEGREE}");
    let half = 0.5 * d as f64;
    let n_l = dim_z(d + 1, l)? as f64;
    Ok(n_l / binomial_shifted(l, half) * jacobi_unchecked(l, half, half - 1.0, clamp_unit(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;
    use std::f64::consts::PI;

    #[test]
    fn dim_z_examples() {
        assert_eq!(dim_z(2, 0).unwrap(), 1);
        assert_eq!(dim_z(2, 3).unwrap(), 7);
        assert_eq!(dim_z(3, 2).unwrap(), 9);
        assert_eq!(dim_z(1, 0).unwrap(), 1);
        assert_eq!(dim_z(1, 5).unwrap(), 2);
        for d in 2..12 {
            assert_eq!(dim_z(d, 0).unwrap(), 1);
            assert_eq!(dim_z(d, 1).unwrap(), d as u64 + 1);
        }
        for ell in 0..100 {
            assert_eq!(dim_z(2, ell).unwrap(), 2 * ell as u64 + 1);
            assert_eq!(dim_z(3, ell).unwrap(), (ell as u64 + 1).pow(2));
        }
    }

    #[test]
    fn dim_z_telescopes() {
        for d in 2..=4 {
            let mut acc = 0;
            for l in 0..=50 {
                acc += dim_z(d, l).unwrap();
                assert_eq!(acc, dim_z(d + 1, l).unwrap(), "d={d} L={l}");
            }
        }
    }

    #[test]
    fn dim_z_overflow_is_reported() {
        assert!(matches!(dim_z(200, 1_000_000), Err(Error::Overflow(_))));
        assert!(matches!(dim_z(0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_d_matches_quadrature() {
        assert!((gamma_d(2) - 0.5).abs() < 1e-15);
        assert!((gamma_d(1) - 1.0 / PI).abs() < 1e-15);
        assert!((gamma_d(3) - 2.0 / PI).abs() < 1e-15);
        let rule = GaussLegendre::new(64);
        for d in 1..10 {
            let integral = rule.integrate(0.0, PI, |t| t.sin().powi(d as i32 - 1));
            assert!((gamma_d(d) - 1.0 / integral).abs() < 1e-13, "d={d}");
        }
    }

    #[test]
    fn legendre_examples() {
        assert!((legendre_pd(2, 2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((legendre_pd(4, 1, 0.3).unwrap() - 0.3).abs() < 1e-15);
        for x in [-0.9, -0.2, 0.4, 0.77] {
            let p3 = 0.5 * (5.0 * x * x * x - 3.0 * x);
            assert!((legendre_pd(2, 3, x).unwrap() - p3).abs() < 1e-14);
        }
        // S^3: P_n^{(3)}(cos t) = sin((n+1)t) / ((n+1) sin t)
        for n in 0..30 {
            let t: f64 = 0.7;
            let expected = ((n as f64 + 1.0) * t).sin() / ((n as f64 + 1.0) * t.sin());
            assert!((legendre_pd(3, n, t.cos()).unwrap() - expected).abs() < 1e-13);
        }
        assert!(legendre_pd(2, MAX_DEGREE + 1, 0.0).is_err());
        assert!(legendre_pd(2, 3, 1.5).is_err());
    }

    #[test]
    fn legendre_normalisation_and_bounds() {
        for d in 2..=5 {
            for n in 0..=200 {
                assert!((legendre_pd(d, n, 1.0).unwrap() - 1.0).abs() <= 1e-13);
            }
            for n in [0, 1, 2, 5, 17, 64, 200, 1000] {
                for i in 0..=1000 {
                    let x = -1.0 + 2.0 * i as f64 / 1000.0;
                    assert!(legendre_pd(d, n, x).unwrap().abs() <= 1.0 + 1e-10);
                }
            }
        }
    }

    #[test]
    fn legendre_orthogonality() {
        let rule = GaussLegendre::new(256);
        for d in 2..=5 {
            // x = cos(t) turns the weight (1 - x^2)^{(d-2)/2} dx into sin^{d-1}(t) dt
            for n in 0..=20 {
                for m in 0..n {
                    let v = gamma_d(d)
                        * rule.integrate(0.0, PI, |t| {
                            legendre_pd_unchecked(d, n, t.cos())
                                * legendre_pd_unchecked(d, m, t.cos())
                                * t.sin().powi(d as i32 - 1)
                        });
                    assert!(v.abs() <= 1e-10, "d={d} n={n} m={m} v={v}");
                }
            }
        }
    }

    #[test]
    fn legendre_all_matches_pointwise() {
        let all = legendre_pd_all(4, 50, 0.3).unwrap();
        for (n, v) in all.iter().enumerate() {
            assert!((v - legendre_pd(4, n, 0.3).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn kernel_examples() {
        for d in 2..=5 {
            for l in 0..20 {
                let n = dim_z(d + 1, l).unwrap() as f64;
                assert!((kernel_kl(d, l, 1.0).unwrap() - n).abs() < 1e-9 * n);
            }
        }
        for x in [-1.0, -0.3, 0.0, 0.6, 1.0] {
            assert_eq!(kernel_kl(2, 0, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_sum_and_jacobi_forms_agree() {
        for d in 2..=5 {
            for l in [0, 1, 2, 5, 8, 17, 32, 64, 128] {
                let scale = dim_z(d + 1, l).unwrap() as f64;
                for i in 0..=200 {
                    let x = -1.0 + 2.0 * i as f64 / 200.0;
                    let a = kernel_kl(d, l, x).unwrap();
                    let b = kernel_kl_jacobi(d, l, x).unwrap();
                    // relative to the kernel's scale K_L(1); pointwise relative
                    // error is meaningless at the kernel's zeros
                    assert!((a - b).abs() <= 1e-10 * scale, "d={d} L={l} x={x}: {a} vs {b}");
                }
            }
        }
        let a = kernel_kl(2, 5, 0.7).unwrap();
        let b = kernel_kl_jacobi(2, 5, 0.7).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs());
    }

    #[test]
    fn jacobi_reference_values() {
        // explicit sum: sum_k binom(n+a, n-k) binom(n+b, k) ((x-1)/2)^k ((x+1)/2)^(n-k)
        let explicit = |n: usize, a: f64, b: f64, x: f64| {
            let mut s = 0.0;
            for k in 0..=n {
                let g = |m: f64, j: usize| {
                    (0..j).fold(1.0, |acc, i| acc * (m - i as f64) / (i as f64 + 1.0))
                };
                s += g(n as f64 + a, n - k)
                    * g(n as f64 + b, k)
                    * ((x - 1.0) / 2.0).powi(k as i32)
                    * ((x + 1.0) / 2.0).powi((n - k) as i32);
            }
            s
        };
        for n in 0..12 {
            for (a, b) in [(1.0, 0.0), (1.5, 0.5), (2.0, 1.0), (0.0, 0.0)] {
                for x in [-0.8, 0.1, 0.55, 1.0] {
                    let v = jacobi(n, a, b, x).unwrap();
                    let e = explicit(n, a, b, x);
                    assert!((v - e).abs() < 1e-11 * e.abs().max(1.0), "n={n} a={a} b={b} x={x}");
                }
            }
        }
    }
}
