//! Equal-area zonal partitions of S².
//!
//! The sphere is cut into two polar caps of area `1/N` and a sequence of
//! collars between them. Each collar is split into equal azimuthal arcs; the
//! collar boundaries are re-levelled from cumulative cell counts so every
//! cell has area exactly `1/N` (up to rounding). The scheme follows the
//! recursive zonal equal-area construction and keeps cell diameters of order
//! `N^{-1/2}`.
//!
//! Ownership of boundary points: a point on a boundary belongs to the cell
//! with the lower index.

use crate::error::{ensure_domain, Result};
use crate::sphere::UnitPoint;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Acceptance constant for `max_diameter * sqrt(N)`.
pub const DIAMETER_CONSTANT: f64 = 7.0;

/// One cell: a polar-angle band crossed with an azimuthal arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    /// `[theta1, theta2]` with `theta1 < theta2`, measured from the north pole.
    pub theta_range: (f64, f64),
    /// `[alpha1, alpha2]`; the full circle for polar caps.
    pub azimuth_range: (f64, f64),
    z_range: (f64, f64),
}

impl Cell {
    /// Normalised area `(cos theta1 - cos theta2)(alpha2 - alpha1) / (4 pi)`.
    pub fn area(&self) -> f64 {
        let (z_bottom, z_top) = self.z_range;
        (z_top - z_bottom) * (self.azimuth_range.1 - self.azimuth_range.0) / (4.0 * PI)
    }

    /// Geodesic diameter of the cell.
    pub fn diameter(&self) -> f64 {
        band_diameter(
            self.theta_range.0,
            self.theta_range.1,
            self.azimuth_range.1 - self.azimuth_range.0,
        )
    }

    /// Point at the middle height (in `z`) and middle azimuth; the pole for caps.
    pub fn center(&self) -> UnitPoint {
        let (z_bottom, z_top) = self.z_range;
        if self.theta_range.0 == 0.0 {
            return UnitPoint::north_pole(2);
        }
        if self.theta_range.1 >= PI {
            return UnitPoint::from_unit(vec![0.0, 0.0, -1.0]);
        }
        let z: f64 = 0.5 * (z_bottom + z_top);
        UnitPoint::from_spherical(z.acos(), 0.5 * (self.azimuth_range.0 + self.azimuth_range.1))
    }

    /// `(cos theta2, cos theta1)`.
    pub fn z_range(&self) -> (f64, f64) {
        self.z_range
    }
}

/// Geodesic diameter of `{theta1 <= theta <= theta2} x` an azimuthal arc of
/// width `width`.
///
/// For two points the cosine of their distance is
/// `cos a cos b + cos(dalpha) sin a sin b`; the coefficient of `cos(dalpha)`
/// is nonnegative so the largest usable azimuth gap `min(width, pi)` is
/// optimal, and the remaining minimisation over `(a, b)` has its candidates
/// at the corners, on the edges and at `(pi/2, pi/2)`.
pub fn band_diameter(theta1: f64, theta2: f64, width: f64) -> f64 {
    let c = width.min(PI).cos();
    let f = |a: f64, b: f64| a.cos() * b.cos() + c * a.sin() * b.sin();
    let inside = |t: f64| t >= theta1 && t <= theta2;
    let mut best = f(theta1, theta1).min(f(theta1, theta2)).min(f(theta2, theta2));
    for a in [theta1, theta2] {
        // f(a, b) = r cos(b - beta)
        let (ca, sa) = (a.cos(), c * a.sin());
        let beta = sa.atan2(ca);
        for b in [beta + PI, beta - PI] {
            if inside(b) {
                best = best.min(f(a, b));
            }
        }
    }
    if inside(0.5 * PI) {
        best = best.min(c);
    }
    best.clamp(-1.0, 1.0).acos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Collar {
    z_bottom: f64,
    first: usize,
    count: usize,
}

/// An equal-area partition of S² into `n_cells` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonalPartition {
    n_cells: usize,
    cells: Vec<Cell>,
    collars: Vec<Collar>,
    boundaries: Vec<f64>,
}

fn polar_angle_of_cap(area_fraction: f64) -> f64 {
    // sigma(C(theta)) = sin^2(theta/2)
    2.0 * area_fraction.clamp(0.0, 1.0).sqrt().asin()
}

/// Cells per collar, north to south, including both polar caps.
fn collar_counts(n: usize) -> Vec<usize> {
    if n == 1 {
        return vec![1];
    }
    if n == 2 {
        return vec![1, 1];
    }
    let nf = n as f64;
    let cap = polar_angle_of_cap(1.0 / nf);
    let ideal_angle = (4.0 * PI / nf).sqrt();
    let span = PI - 2.0 * cap;
    let n_collars = ((span / ideal_angle).round() as usize).max(1);
    let fitting = span / n_collars as f64;
    let mut counts = vec![1];
    let mut carry = 0.0;
    let mut assigned = 0usize;
    for i in 0..n_collars {
        let top = cap + i as f64 * fitting;
        let bottom = top + fitting;
        let ideal = 0.5 * (top.cos() - bottom.cos()) * nf;
        let mut m = if i + 1 == n_collars {
            n - 2 - assigned
        } else {
            (ideal + carry).round().max(0.0) as usize
        };
        m = m.min(n - 2 - assigned);
        carry += ideal - m as f64;
        assigned += m;
        if m > 0 {
            counts.push(m);
        }
    }
    counts.push(1);
    counts
}

impl ZonalPartition {
    pub fn new(n_cells: usize) -> Result<Self> {
        ensure_domain!(n_cells >= 1, "a partition needs at least one cell");
        let counts = collar_counts(n_cells);
        let nf = n_cells as f64;
        let mut cells = Vec::with_capacity(n_cells);
        let mut collars = Vec::with_capacity(counts.len());
        let mut boundaries = vec![0.0];
        let mut cumulative = 0usize;
        let (mut theta_top, mut z_top) = (0.0, 1.0);
        for (k, &m) in counts.iter().enumerate() {
            let first = cumulative;
            cumulative += m;
            let last_collar = k + 1 == counts.len();
            let (theta_bottom, z_bottom) = if last_collar {
                (PI, -1.0)
            } else {
                let frac = cumulative as f64 / nf;
                (polar_angle_of_cap(frac), 1.0 - 2.0 * frac)
            };
            let width = TWO_PI / m as f64;
            for j in 0..m {
                let a1 = j as f64 * width;
                let a2 = if j + 1 == m { TWO_PI } else { (j + 1) as f64 * width };
                cells.push(Cell {
                    index: first + j,
                    theta_range: (theta_top, theta_bottom),
                    azimuth_range: (a1, a2),
                    z_range: (z_bottom, z_top),
                });
            }
            collars.push(Collar { z_bottom, first, count: m });
            boundaries.push(theta_bottom);
            theta_top = theta_bottom;
            z_top = z_bottom;
        }
        debug_assert_eq!(cumulative, n_cells);
        Ok(Self { n_cells, cells, collars, boundaries })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, index: usize) -> Option<&Cell> {
        self.cells.get(index)
    }

    /// Polar angles of the collar boundaries, from 0 to pi.
    pub fn collar_boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Number of cells in each collar, north to south.
    pub fn collar_sizes(&self) -> Vec<usize> {
        self.collars.iter().map(|c| c.count).collect()
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells.iter().map(Cell::diameter).fold(0.0, f64::max)
    }

    /// Index of the cell containing `p` (a point on S²).
    pub fn locate(&self, p: &UnitPoint) -> usize {
        debug_assert_eq!(p.dim(), 2);
        let z = p.coords()[2];
        // collars north to south own [z_bottom, z_top); the north cap also owns z = 1
        let k = self
            .collars
            .partition_point(|c| z < c.z_bottom)
            .min(self.collars.len() - 1);
        let collar = &self.collars[k];
        if collar.count == 1 {
            return collar.first;
        }
        let (_, alpha) = p.to_spherical();
        let width = TWO_PI / collar.count as f64;
        // arcs own (alpha1, alpha2]; alpha = 0 belongs to the first arc
        let j = if alpha <= 0.0 { 0 } else { ((alpha / width).ceil() as usize).saturating_sub(1) };
        collar.first + j.min(collar.count - 1)
    }

    /// Uniform point in cell `index`: `z` uniform on the band, azimuth
    /// uniform on the arc.
    pub fn sample_in_cell<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> UnitPoint {
        let cell = &self.cells[index];
        let (z_bottom, z_top) = cell.z_range;
        let (a1, a2) = cell.azimuth_range;
        loop {
            let z = z_bottom + rng.random::<f64>() * (z_top - z_bottom);
            let alpha = a2 - rng.random::<f64>() * (a2 - a1);
            let r = (1.0 - z * z).max(0.0).sqrt();
            let p = UnitPoint::from_unit(vec![r * alpha.cos(), r * alpha.sin(), z]);
            // a draw rounding onto a neighbouring boundary is redrawn
            if self.locate(&p) == index {
                return p;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, uniform_on_sphere};

    #[test]
    fn trivial_partitions() {
        let p = ZonalPartition::new(1).unwrap();
        assert_eq!(p.n_cells(), 1);
        assert!((p.cells()[0].area() - 1.0).abs() < 1e-15);
        assert!((p.cells()[0].diameter() - PI).abs() < 1e-12);
        let p = ZonalPartition::new(2).unwrap();
        assert_eq!(p.cells().len(), 2);
        for c in p.cells() {
            assert!((c.area() - 0.5).abs() < 1e-15);
        }
        assert!((p.collar_boundaries()[1] - PI / 2.0).abs() < 1e-15);
        assert!(ZonalPartition::new(0).is_err());
    }

    #[test]
    fn areas_are_equal_and_sum_to_one() {
        for n in 1..=2000 {
            let p = ZonalPartition::new(n).unwrap();
            assert_eq!(p.cells().len(), n);
            let target = 1.0 / n as f64;
            let mut total = 0.0;
            for (i, c) in p.cells().iter().enumerate() {
                assert_eq!(c.index, i);
                assert!((c.area() - target).abs() <= 1e-10, "n={n} cell={i}");
                assert!(c.theta_range.0 < c.theta_range.1);
                total += c.area();
            }
            assert!((total - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn diameters_scale_like_inverse_sqrt() {
        for n in [2, 10, 100, 1000, 2000] {
            let p = ZonalPartition::new(n).unwrap();
            let scaled = p.max_diameter() * (n as f64).sqrt();
            assert!(scaled <= DIAMETER_CONSTANT, "n={n}: {scaled}");
        }
        assert!(ZonalPartition::new(100).unwrap().max_diameter() <= 0.7);
    }

    #[test]
    fn band_diameter_matches_brute_force() {
        let cases = [
            (0.0, 0.4, 2.0 * PI),
            (0.3, 0.9, 1.0),
            (1.2, 1.9, 0.6),
            (1.0, 2.2, 2.0 * PI),
            (0.5, 1.4, 3.5),
            (2.0, PI, 2.0 * PI),
            (0.9, 1.1, 0.05),
        ];
        for (t1, t2, w) in cases {
            let exact = band_diameter(t1, t2, w);
            let k = 60;
            let pts: Vec<UnitPoint> = (0..=k)
                .flat_map(|i| {
                    (0..=k).map(move |j| {
                        let t = t1 + (t2 - t1) * i as f64 / k as f64;
                        UnitPoint::from_spherical(t, w * j as f64 / k as f64)
                    })
                })
                .collect();
            let mut brute: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    brute = brute.max(a.angle_to(b));
                }
            }
            assert!(brute <= exact + 1e-9, "({t1},{t2},{w}) brute {brute} > {exact}");
            assert!(brute >= exact - 0.02, "({t1},{t2},{w}) brute {brute} << {exact}");
        }
    }

    #[test]
    fn locate_poles_and_sample_round_trip() {
        let mut rng = stream(5, 0, 0);
        for n in [2, 3, 8, 37, 100] {
            let p = ZonalPartition::new(n).unwrap();
            assert_eq!(p.locate(&UnitPoint::north_pole(2)), 0);
            assert_eq!(p.locate(&UnitPoint::from_unit(vec![0.0, 0.0, -1.0])), n - 1);
            for trial in 0..20_000 {
                let i = trial % n;
                let q = p.sample_in_cell(i, &mut rng);
                assert!((q.norm() - 1.0).abs() < 1e-12);
                assert_eq!(p.locate(&q), i);
            }
        }
    }

    #[test]
    fn boundary_ties_go_to_lower_index() {
        let p = ZonalPartition::new(10).unwrap();
        let sizes = p.collar_sizes();
        assert!(sizes.len() >= 3);
        let second = &p.cells()[1];
        let z = second.z_range().0;
        let r = (1.0 - z * z).sqrt();
        let a = 0.5 * second.azimuth_range.1;
        let on_lower_edge = UnitPoint::from_unit(vec![r * a.cos(), r * a.sin(), z]);
        assert_eq!(p.locate(&on_lower_edge), second.index);
        let z = 0.5 * (second.z_range().0 + second.z_range().1);
        let r = (1.0 - z * z).sqrt();
        let on_first_arc_edge = UnitPoint::from_unit(vec![r, 0.0, z]);
        assert_eq!(p.locate(&on_first_arc_edge), second.index);
    }

    #[test]
    fn uniform_points_fill_cells_evenly() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let n = 50;
        let p = ZonalPartition::new(n).unwrap();
        let mut rng = stream(9, 0, 0);
        let draws = 100_000;
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            counts[p.locate(&uniform_on_sphere(2, &mut rng))] += 1;
        }
        let expected = draws as f64 / n as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let pval = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(chi2);
        assert!(pval > 0.001, "chi2={chi2} p={pval}");
    }

    #[test]
    fn in_cell_mean_matches_quadrature() {
        use crate::quadrature::adaptive;
        let p = ZonalPartition::new(40).unwrap();
        let mut rng = stream(3, 1, 0);
        for idx in [0, 5, 17, 39] {
            let cell = p.cell(idx).unwrap();
            let center = cell.center();
            let (zb, zt) = cell.z_range();
            let (a1, a2) = cell.azimuth_range;
            let half = 0.5 * (a2 - a1);
            let (theta_c, _) = center.to_spherical();
            let mean_sin = adaptive(zb, zt, 1e-13, |z| (1.0 - z * z).sqrt()) / (zt - zb);
            let sinc = if half >= PI { 0.0 } else { half.sin() / half };
            let predicted = mean_sin * theta_c.sin() * sinc + 0.5 * (zb + zt) * theta_c.cos();
            let draws = 10_000;
            let vals: Vec<f64> = (0..draws).map(|_| p.sample_in_cell(idx, &mut rng).dot(&center)).collect();
            let mean = vals.iter().sum::<f64>() / draws as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            assert!((mean - predicted).abs() <= 3.0 * se.max(1e-12), "cell {idx}: {mean} vs {predicted}");
        }
    }
}
