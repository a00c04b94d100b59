//! Deterministic identity checks between independent evaluation routes.

use hyperuniform::capgeom::{cap_diff_volume, cap_diff_volume_quadrature, laplace_coefficient, laplace_coefficient_quadrature};
use hyperuniform::partition::ZonalPartition;
use hyperuniform::specfun::{kernel_kl, kernel_kl_jacobi};
use hyperuniform::Result;
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

/// `(phi, psi)` lattice with `phi` in `(0, pi/2]` and `psi` in `[0, pi]`.
pub fn cap_pair_grid(size: usize) -> Vec<(f64, f64)> {
    let mut grid = Vec::with_capacity(size * size);
    for i in 1..=size {
        let phi = FRAC_PI_2 * i as f64 / size as f64;
        for j in 0..size {
            grid.push((phi, PI * j as f64 / (size - 1) as f64));
        }
    }
    grid
}

fn laplace_identity() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        for n in 1..=20 {
            for phi in [0.1, 0.5, 1.0, 1.5] {
                let err = laplace_coefficient(d, n, phi)? - laplace_coefficient_quadrature(d, n, phi)?;
                worst = worst.max(err.abs());
            }
        }
    }
    Ok(Check { name: "Laplace coefficient closed form vs quadrature", max_error: worst, tolerance: 1e-9 })
}

fn s2_difference_volume() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (phi, psi) in cap_pair_grid(50) {
        worst = worst.max((cap_diff_volume(2, phi, psi)? - cap_diff_volume_quadrature(2, phi, psi)?).abs());
    }
    Ok(Check { name: "S^2 difference volume closed form vs quadrature", max_error: worst, tolerance: 1e-9 })
}

fn kernel_forms() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for d in 2..=5 {
        for l in 0..=24 {
            let scale = kernel_kl(d, l, 1.0)?;
            for k in 0..=40 {
                let x = -1.0 + k as f64 / 20.0;
                worst = worst.max((kernel_kl(d, l, x)? - kernel_kl_jacobi(d, l, x)?).abs() / scale);
            }
        }
    }
    Ok(Check { name: "harmonic kernel sum vs Jacobi form (relative to K_L(1))", max_error: worst, tolerance: 1e-10 })
}

fn partition_areas() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for n in [1, 2, 10, 100, 1000, 2000] {
        let p = ZonalPartition::new(n)?;
        for c in p.cells() {
            worst = worst.max((c.area() - 1.0 / n as f64).abs());
        }
    }
    Ok(Check { name: "partition cell areas equal 1/N", max_error: worst, tolerance: 1e-10 })
}

pub fn run_checks() -> Result<Vec<Check>> {
    Ok(vec![laplace_identity()?, s2_difference_volume()?, kernel_forms()?, partition_areas()?])
}

pub fn report(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{} {} (max error {:.3e}, tolerance {:.0e})\n",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance
        ));
    }
    out
}
