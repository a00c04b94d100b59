//! Sequential sampling of projection determinantal point processes.
//!
//! Point `i` is drawn from the conditional density
//! `p_i(x) = K(x, x) - k_i(x)^* G^{-1} k_i(x)` (relative to the uniform
//! measure), where `G` is the kernel matrix of the points already placed.
//! Since `p_i <= N`, uniform proposals accepted with probability
//! `p_i(x) / N` realise the step exactly. The Cholesky factor of `G` grows by
//! one row per accepted point, so evaluating `p_i` costs one triangular solve.

use crate::error::{Error, Result};
use crate::partition::ZonalPartition;
use crate::rng::uniform_on_sphere;
use crate::specfun::{harmonic_point_count, kernel_kl_unchecked};
use crate::sphere::UnitPoint;
use num_complex::Complex64;
use rand::Rng;

/// Proposals rejected in a row before the sampler gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: u64 = 1_000_000;

/// Relative pivot size below which a proposal counts as coincident.
const PIVOT_TOL: f64 = 1e-10;

/// Kernel of a rank-`N` projection on L²(S^d) with constant diagonal `N`.
pub trait ProjectionKernel {
    /// Sphere dimension `d`.
    fn dim(&self) -> usize;
    /// Rank `N`, which is also the number of sampled points.
    fn rank(&self) -> usize;
    fn eval(&self, x: &UnitPoint, y: &UnitPoint) -> Complex64;
    /// Value of `K(x, x)`, equal to the rank for every kernel here.
    fn diagonal(&self) -> f64 {
        self.rank() as f64
    }
}

/// Reproducing kernel of polynomials of degree at most `L` on S^d.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicKernel {
    d: usize,
    l: usize,
    n: usize,
}

impl HarmonicKernel {
    pub fn new(d: usize, l: usize) -> Result<Self> {
        let n = harmonic_point_count(d, l)?;
        Ok(Self { d, l, n })
    }

    pub fn degree(&self) -> usize {
        self.l
    }
}

impl ProjectionKernel for HarmonicKernel {
    fn dim(&self) -> usize {
        self.d
    }

    fn rank(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &UnitPoint, y: &UnitPoint) -> Complex64 {
        Complex64::new(kernel_kl_unchecked(self.d, self.l, x.dot(y)), 0.0)
    }
}

/// Block kernel `N 1[x and y share a cell]` of an equal-area partition.
#[derive(Debug, Clone, Copy)]
pub struct JitteredKernel<'a> {
    partition: &'a ZonalPartition,
}

impl<'a> JitteredKernel<'a> {
    pub fn new(partition: &'a ZonalPartition) -> Self {
        Self { partition }
    }
}

impl ProjectionKernel for JitteredKernel<'_> {
    fn dim(&self) -> usize {
        2
    }

    fn rank(&self) -> usize {
        self.partition.n_cells()
    }

    fn eval(&self, x: &UnitPoint, y: &UnitPoint) -> Complex64 {
        if self.partition.locate(x) == self.partition.locate(y) {
            Complex64::new(self.rank() as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// Bookkeeping from one run of the sampler.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChainRuleStats {
    /// Number of uniform proposals used for each of the `N` points.
    pub proposals: Vec<u64>,
}

/// Samples the projection DPP with the given kernel.
pub fn chain_rule_projection_dpp<K, R>(kernel: &K, rng: &mut R) -> Result<Vec<UnitPoint>>
where
    K: ProjectionKernel + ?Sized,
    R: Rng + ?Sized,
{
    chain_rule_with_stats(kernel, rng).map(|(points, _)| points)
}

/// Like [`chain_rule_projection_dpp`], also reporting proposal counts.
pub fn chain_rule_with_stats<K, R>(kernel: &K, rng: &mut R) -> Result<(Vec<UnitPoint>, ChainRuleStats)>
where
    K: ProjectionKernel + ?Sized,
    R: Rng + ?Sized,
{
    let n = kernel.rank();
    let d = kernel.dim();
    if n == 0 {
        return Err(Error::Domain("projection kernel has rank zero".into()));
    }
    let diag = kernel.diagonal();
    let mut points: Vec<UnitPoint> = Vec::with_capacity(n);
    // row j holds the first j + 1 entries of row j of the Cholesky factor
    let mut chol: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut stats = ChainRuleStats { proposals: Vec::with_capacity(n) };
    let mut w = vec![Complex64::new(0.0, 0.0); n];

    while points.len() < n {
        let i = points.len();
        let mut tries = 0u64;
        loop {
            if tries >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::Numerical(format!(
                    "{tries} consecutive rejections at point {} of {n}; the kernel is not a projection of rank {n}",
                    i + 1
                )));
            }
            tries += 1;
            let x = uniform_on_sphere(d, rng);
            let mut residual = diag;
            for j in 0..i {
                let row = &chol[j];
                let mut s = kernel.eval(&points[j], &x);
                for m in 0..j {
                    s -= row[m] * w[m];
                }
                w[j] = s / row[j];
                residual -= w[j].norm_sqr();
            }
            let u: f64 = rng.random();
            if residual < PIVOT_TOL * n as f64 || u * n as f64 >= residual {
                continue;
            }
            let mut row: Vec<Complex64> = w[..i].iter().map(|c| c.conj()).collect();
            row.push(Complex64::new(residual.sqrt(), 0.0));
            chol.push(row);
            points.push(x);
            stats.proposals.push(tries);
            break;
        }
    }
    Ok((points, stats))
}

/// Harmonic ensemble of degree `l` on S^d.
pub fn sample_harmonic_ensemble<R: Rng + ?Sized>(d: usize, l: usize, rng: &mut R) -> Result<Vec<UnitPoint>> {
    chain_rule_projection_dpp(&HarmonicKernel::new(d, l)?, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capgeom::cap_area;
    use crate::processes::{sample_spherical_ensemble, stereographic};
    use crate::rng::stream;
    use crate::sphere::Cap;

    /// Projected kernel of the spherical ensemble in the stereographic chart.
    /// Only usable for small `n` since its factors overflow near the poles.
    struct SphericalKernel {
        n: usize,
    }

    impl ProjectionKernel for SphericalKernel {
        fn dim(&self) -> usize {
            2
        }
        fn rank(&self) -> usize {
            self.n
        }
        fn eval(&self, x: &UnitPoint, y: &UnitPoint) -> Complex64 {
            let (z, w) = (stereographic(x), stereographic(y));
            let e = (self.n - 1) as i32;
            let scale = ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).powf(0.5 * e as f64);
            (1.0 + z * w.conj()).powi(e) * (self.n as f64 / scale)
        }
    }

    #[test]
    fn rank_one_gives_uniform_point() {
        let k = HarmonicKernel::new(2, 0).unwrap();
        let mut mean = 0.0;
        let reps = 20_000;
        for r in 0..reps {
            let (pts, stats) = chain_rule_with_stats(&k, &mut stream(1, r, 0)).unwrap();
            assert_eq!(pts.len(), 1);
            assert_eq!(stats.proposals, vec![1]);
            mean += pts[0].coords()[2] / reps as f64;
        }
        assert!(mean.abs() < 4.0 * (1.0 / 3.0 / reps as f64).sqrt());
    }

    #[test]
    fn harmonic_first_intensity() {
        let k = HarmonicKernel::new(2, 1).unwrap();
        assert_eq!(k.rank(), 4);
        let phi = 1.0;
        let cap = Cap::new(UnitPoint::north_pole(2), phi).unwrap();
        let reps = 10_000;
        let counts: Vec<f64> = (0..reps)
            .map(|r| cap.count(&chain_rule_projection_dpp(&k, &mut stream(5, r, 0)).unwrap()) as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let expected = 4.0 * cap_area(2, phi).unwrap();
        assert!((mean - expected).abs() <= 3.0 * (var / reps as f64).sqrt());
    }

    #[test]
    fn acceptance_rate_matches_envelope() {
        let k = HarmonicKernel::new(2, 3).unwrap();
        let n = k.rank();
        let runs = 2000;
        let mut totals = vec![0u64; n];
        for r in 0..runs {
            let (_, stats) = chain_rule_with_stats(&k, &mut stream(9, r, 0)).unwrap();
            for (t, p) in totals.iter_mut().zip(&stats.proposals) {
                *t += p;
            }
        }
        for (i, &t) in totals.iter().enumerate() {
            let rate = runs as f64 / t as f64;
            let expected = (n - i) as f64 / n as f64;
            assert!((rate / expected - 1.0).abs() < 0.05, "step {}: {rate} vs {expected}", i + 1);
        }
    }

    #[test]
    fn gram_matrix_is_positive_definite() {
        let k = HarmonicKernel::new(3, 2).unwrap();
        let pts = chain_rule_projection_dpp(&k, &mut stream(4, 0, 0)).unwrap();
        let n = pts.len();
        let g = nalgebra::DMatrix::from_fn(n, n, |i, j| k.eval(&pts[i], &pts[j]).re);
        assert!(g.cholesky().is_some());
    }

    #[test]
    fn jittered_kernel_places_one_point_per_cell() {
        let partition = ZonalPartition::new(8).unwrap();
        let k = JitteredKernel::new(&partition);
        let x = UnitPoint::from_spherical(0.3, 1.0);
        assert_eq!(k.eval(&x, &x).re, 8.0);
        let far = UnitPoint::from_spherical(2.8, 1.0);
        assert_eq!(k.eval(&x, &far).norm(), 0.0);
        for r in 0..500 {
            let pts = chain_rule_projection_dpp(&k, &mut stream(6, r, 0)).unwrap();
            let mut cells: Vec<usize> = pts.iter().map(|p| partition.locate(p)).collect();
            cells.sort_unstable();
            assert_eq!(cells, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn kernels_are_hermitian_with_constant_diagonal() {
        let partition = ZonalPartition::new(10).unwrap();
        let kernels: Vec<Box<dyn ProjectionKernel>> = vec![
            Box::new(HarmonicKernel::new(2, 4).unwrap()),
            Box::new(SphericalKernel { n: 5 }),
        ];
        let jk = JitteredKernel::new(&partition);
        let mut rng = stream(2, 0, 0);
        for _ in 0..200 {
            let x = uniform_on_sphere(2, &mut rng);
            let y = uniform_on_sphere(2, &mut rng);
            for k in kernels.iter().map(|b| b.as_ref()).chain([&jk as &dyn ProjectionKernel]) {
                assert!((k.eval(&x, &y) - k.eval(&y, &x).conj()).norm() < 1e-10);
                assert!((k.eval(&x, &x).re - k.diagonal()).abs() < 1e-10 * k.diagonal());
            }
        }
    }

    #[test]
    fn complex_kernel_matches_eigenvalue_sampler() {
        // the chain rule on the projected kernel and the eigenvalue route must
        // agree in law; compare the hemisphere count variance
        let n = 4;
        let cap = Cap::new(UnitPoint::north_pole(2), std::f64::consts::FRAC_PI_2).unwrap();
        let reps = 6000;
        let stat = |counts: Vec<f64>| {
            let m = counts.iter().sum::<f64>() / reps as f64;
            let sq: Vec<f64> = counts.iter().map(|c| (c - m).powi(2)).collect();
            let v = sq.iter().sum::<f64>() / reps as f64;
            let sd = (sq.iter().map(|s| (s - v).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
            (v, sd / (reps as f64).sqrt())
        };
        let kernel = SphericalKernel { n };
        let (v_chain, se_chain) = stat(
            (0..reps)
                .map(|r| cap.count(&chain_rule_projection_dpp(&kernel, &mut stream(3, r, 0)).unwrap()) as f64)
                .collect(),
        );
        let (v_eig, se_eig) = stat(
            (0..reps)
                .map(|r| cap.count(&sample_spherical_ensemble(n, &mut stream(3, r, 1)).unwrap()) as f64)
                .collect(),
        );
        let tol = 4.0 * (se_chain.powi(2) + se_eig.powi(2)).sqrt();
        assert!((v_chain - v_eig).abs() <= tol, "{v_chain} vs {v_eig} (tol {tol})");
        // both sit well below the i.i.d. value n/4
        assert!(v_eig < 0.8 * n as f64 / 4.0);
    }

    #[test]
    fn rank_deficient_kernel_hits_rejection_limit() {
        // constant kernel 2 claims rank 2 but has rank 1, so step two never accepts
        struct Constant;
        impl ProjectionKernel for Constant {
            fn dim(&self) -> usize {
                2
            }
            fn rank(&self) -> usize {
                2
            }
            fn eval(&self, _: &UnitPoint, _: &UnitPoint) -> Complex64 {
                Complex64::new(2.0, 0.0)
            }
        }
        let err = chain_rule_projection_dpp(&Constant, &mut stream(0, 0, 0)).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }

    #[test]
    fn rank_zero_is_rejected() {
        struct Empty;
        impl ProjectionKernel for Empty {
            fn dim(&self) -> usize {
                2
            }
            fn rank(&self) -> usize {
                0
            }
            fn eval(&self, _: &UnitPoint, _: &UnitPoint) -> Complex64 {
                Complex64::new(0.0, 0.0)
            }
        }
        assert!(chain_rule_projection_dpp(&Empty, &mut stream(0, 0, 0)).is_err());
    }
}
