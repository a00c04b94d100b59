//! Number variance of cap counts: Monte Carlo estimation, semi-analytic
//! formulas for each process, and scaling experiments across regimes.
//!
//! The number variance `V(X_N, phi)` is the variance of the number of points
//! in a cap of angle `phi` whose center is itself uniform on the sphere.

use crate::capgeom::{cap_area_unchecked, cap_diff_volume_unchecked};
use crate::error::{ensure_domain, Error, Result};
use crate::partition::ZonalPartition;
use crate::processes::{Process, ProcessSpec};
use crate::quadrature::{self, GaussLegendre};
use crate::rng::{self, uniform_on_sphere};
use crate::specfun::{gamma_d, harmonic_point_count, kernel_kl_unchecked};
use crate::sphere::{Cap, UnitPoint};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

/// Default number of random caps per replicate for processes that are not
/// rotation invariant.
pub const DEFAULT_CENTERS: usize = 4;
/// Default number of point pairs per cell in the jittered formula.
pub const DEFAULT_JITTERED_PAIRS: usize = 1000;

/// Stream lane for the point pairs of the jittered formula. Center lanes
/// start at 1 and the point lane is 0, so this never collides.
const PAIR_LANE: u64 = u64::MAX;

/// Cap size, either as an angle or as a threshold parameter `t` with
/// `phi = t N^{-1/d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapSize {
    Angle(f64),
    Threshold(f64),
}

impl From<f64> for CapSize {
    fn from(phi: f64) -> Self {
        CapSize::Angle(phi)
    }
}

impl CapSize {
    /// Cap angle for `n` points on S^d.
    pub fn resolve(self, d: usize, n: usize) -> Result<f64> {
        let phi = match self {
            CapSize::Angle(phi) => phi,
            CapSize::Threshold(t) => {
                ensure_domain!(t > 0.0 && t.is_finite(), "threshold parameter {t} must be positive");
                threshold_angle(t, d, n)
            }
        };
        ensure_domain!(phi > 0.0 && phi <= PI, "cap angle {phi} outside (0, pi]");
        Ok(phi)
    }

    pub fn threshold(self) -> Option<f64> {
        match self {
            CapSize::Threshold(t) => Some(t),
            CapSize::Angle(_) => None,
        }
    }
}

/// `t N^{-1/d}`.
pub fn threshold_angle(t: f64, d: usize, n: usize) -> f64 {
    t * (n as f64).powf(-1.0 / d as f64)
}

/// Outcome of a Monte Carlo number-variance run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub process: ProcessSpec,
    pub d: usize,
    pub n_points: usize,
    pub phi: f64,
    pub t: Option<f64>,
    pub replicates: usize,
    pub centers_per_replicate: usize,
    /// Whether every replicate used the north pole as its only center.
    pub fixed_center: bool,
    pub seed: u64,
    pub v_hat: f64,
    pub std_err: f64,
    /// Empirical mean cap count and its standard error, for checking the
    /// first intensity that the known-mean estimator relies on.
    pub mean_count: f64,
    pub mean_std_err: f64,
    pub v_semi: Option<f64>,
    /// Standard error of `v_semi` when the formula itself is sampled.
    pub v_semi_std_err: Option<f64>,
    pub v_reference: Option<f64>,
}

/// A formula value with its sampling error, zero for deterministic routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Neumaier summation in index order, so totals do not depend on how the
/// terms were scheduled.
fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean).powi(2)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

/// Monte Carlo number variance with the known-mean estimator
/// `mean((count - N sigma)^2)`.
///
/// Each of the `replicates` samples is tested against `centers` caps. With
/// one center and a rotation-invariant process the cap sits at the north
/// pole; otherwise centers are uniform and independent. The standard error
/// treats each replicate's mean over its centers as one observation, since
/// caps sharing a sample are correlated.
pub fn mc_number_variance(
    spec: ProcessSpec,
    cap: impl Into<CapSize>,
    replicates: usize,
    centers: usize,
    seed: u64,
) -> Result<VarianceReport> {
    let cap = cap.into();
    ensure_domain!(replicates >= 2, "at least two replicates are required, got {replicates}");
    ensure_domain!(centers >= 1, "at least one center per replicate is required");
    let process = Process::new(spec)?;
    let d = spec.dim();
    let n = spec.n_points()?;
    let phi = cap.resolve(d, n)?;
    let expected = n as f64 * cap_area_unchecked(d, phi);
    let fixed_center = centers == 1 && spec.is_rotation_invariant();

    let per_replicate: Vec<Result<(f64, f64)>> = map_indices(replicates, |r| {
        let sample = process.sample(seed, r as u64)?;
        let (mut sq, mut count_sum) = (0.0, 0.0);
        for j in 0..centers {
            let center = if fixed_center {
                UnitPoint::north_pole(d)
            } else {
                uniform_on_sphere(d, &mut rng::stream(seed, r as u64, 1 + j as u64))
            };
            let count = Cap::new(center, phi)?.count(&sample.points) as f64;
            sq += (count - expected).powi(2);
            count_sum += count;
        }
        Ok((sq / centers as f64, count_sum / centers as f64))
    });
    let per_replicate: Vec<(f64, f64)> = per_replicate.into_iter().collect::<Result<_>>()?;
    let squares: Vec<f64> = per_replicate.iter().map(|p| p.0).collect();
    let counts: Vec<f64> = per_replicate.iter().map(|p| p.1).collect();
    let (v_hat, std_err) = mean_and_se(&squares);
    let (mean_count, mean_std_err) = mean_and_se(&counts);
    let semi = semi_analytic_variance(spec, phi, DEFAULT_JITTERED_PAIRS, seed)?;
    Ok(VarianceReport {
        process: spec,
        d,
        n_points: n,
        phi,
        t: cap.threshold(),
        replicates,
        centers_per_replicate: centers,
        fixed_center,
        seed,
        v_hat,
        std_err,
        mean_count,
        mean_std_err,
        v_semi: Some(semi.value),
        v_semi_std_err: (semi.std_err > 0.0).then_some(semi.std_err),
        v_reference: reference_variance(spec, phi)?,
    })
}

/// Formula value of the number variance for any process. The jittered
/// formula is itself an average over `pairs` random point pairs per cell.
pub fn semi_analytic_variance(spec: ProcessSpec, phi: f64, pairs: usize, seed: u64) -> Result<Estimate> {
    spec.validate()?;
    ensure_domain!(phi > 0.0 && phi <= PI, "cap angle {phi} outside (0, pi]");
    let exact = |value| Estimate { value, std_err: 0.0 };
    Ok(match spec {
        ProcessSpec::Iid { d, n } => exact(variance_iid_exact(n, phi, d)?),
        ProcessSpec::Spherical { n } => exact(variance_spherical_semianalytic(n, phi)?),
        ProcessSpec::Harmonic { d, l } => exact(variance_harmonic_semianalytic(d, l, phi)?),
        ProcessSpec::Jittered { n } => {
            variance_jittered_semianalytic(&ZonalPartition::new(n)?, phi, pairs, seed)?
        }
    })
}

/// Leading-order prediction where one is known: the exact binomial value
/// for i.i.d. points and `sqrt(sigma (1 - sigma) N / pi)` for the spherical
/// ensemble.
pub fn reference_variance(spec: ProcessSpec, phi: f64) -> Result<Option<f64>> {
    Ok(match spec {
        ProcessSpec::Iid { d, n } => Some(variance_iid_exact(n, phi, d)?),
        ProcessSpec::Spherical { n } => Some(spherical_leading_term(n, phi)?),
        _ => None,
    })
}

/// `sqrt(sigma (1 - sigma) / pi) N^{1/2}` on S².
pub fn spherical_leading_term(n: usize, phi: f64) -> Result<f64> {
    ensure_domain!((0.0..=PI).contains(&phi), "cap angle {phi} outside [0, pi]");
    let s = cap_area_unchecked(2, phi);
    Ok((s * (1.0 - s) / PI).sqrt() * (n as f64).sqrt())
}

/// `n sigma (1 - sigma)`.
pub fn variance_iid_exact(n: usize, phi: f64, d: usize) -> Result<f64> {
    ensure_domain!(d >= 2, "sphere dimension must be >= 2, got {d}");
    ensure_domain!((0.0..=PI).contains(&phi), "cap angle {phi} outside [0, pi]");
    let s = cap_area_unchecked(d, phi);
    Ok(n as f64 * s * (1.0 - s))
}

/// Spherical ensemble variance as the one-dimensional integral
/// `(n sin^2 phi / pi) int_0^{pi/2} cos^2 u (1 - sin^2 u sin^2 phi)^{n-1} du`.
pub fn variance_spherical_semianalytic(n: usize, phi: f64) -> Result<f64> {
    ensure_domain!(n >= 1, "spherical ensemble requires n >= 1");
    ensure_domain!(phi > 0.0 && phi < PI, "cap angle {phi} outside (0, pi)");
    let s2 = phi.sin().powi(2);
    let prefactor = n as f64 * s2 / PI;
    let m = (n - 1) as f64;
    let f = |u: f64| {
        let (su, cu) = u.sin_cos();
        cu * cu * (m * (-su * su * s2).ln_1p()).exp()
    };
    let tol = (1e-10 * n as f64 / prefactor).min(1e-12);
    // break the range where the integrand has dropped by e^{-1}
    let knee = if n > 1 { (1.0 / (m * s2)).sqrt().min(1.0).asin() } else { FRAC_PI_2 };
    let breaks = [0.0, 0.5 * knee, knee, (4.0 * knee).min(FRAC_PI_2), FRAC_PI_2];
    Ok(prefactor * quadrature::adaptive_with_breaks(&breaks, tol, f))
}

fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

/// Panels per unit of polar angle for the degree-`l` harmonic integrand.
fn harmonic_panel_density(l: usize) -> usize {
    64.max(8 * l)
}

pub(crate) fn harmonic_integral(d: usize, l: usize, phi: f64, density: usize) -> f64 {
    // complementary caps have the same count variance
    let phi = if phi > FRAC_PI_2 { PI - phi } else { phi };
    let rule = panel_rule();
    let k = d as i32 - 1;
    let f = |theta: f64| {
        let kern = kernel_kl_unchecked(d, l, theta.cos());
        cap_diff_volume_unchecked(d, phi, theta) * kern * kern * theta.sin().powi(k)
    };
    let split = (2.0 * phi).min(PI);
    let panels = |len: f64| ((len * density as f64).ceil() as usize).max(1);
    let inner = rule.composite(0.0, split, panels(split), f);
    let outer = if split < PI { rule.composite(split, PI, panels(PI - split), f) } else { 0.0 };
    gamma_d(d) * (inner + outer)
}

/// Harmonic ensemble variance
/// `gamma_d int_0^pi sigma(C \ C_theta) K_L(cos theta)^2 sin^{d-1} theta dtheta`
/// by composite Gauss-Legendre split at the kink `theta = 2 phi`.
pub fn variance_harmonic_semianalytic(d: usize, l: usize, phi: f64) -> Result<f64> {
    harmonic_point_count(d, l)?;
    ensure_domain!(phi > 0.0 && phi <= PI, "cap angle {phi} outside (0, pi]");
    if phi == PI {
        return Ok(0.0);
    }
    Ok(harmonic_integral(d, l, phi, harmonic_panel_density(l)))
}

/// Jittered sampling variance `sum_i E[sigma(C(X) \ C(Y))]` over independent
/// uniform pairs `X, Y` in each cell, estimated by `pairs` pairs per cell.
pub fn variance_jittered_semianalytic(
    partition: &ZonalPartition,
    phi: f64,
    pairs: usize,
    seed: u64,
) -> Result<Estimate> {
    ensure_domain!(pairs >= 1, "at least one pair per cell is required");
    ensure_domain!(phi > 0.0 && phi <= PI, "cap angle {phi} outside (0, pi]");
    if phi == PI {
        return Ok(Estimate { value: 0.0, std_err: 0.0 });
    }
    let phi = if phi > FRAC_PI_2 { PI - phi } else { phi };
    let per_cell: Vec<(f64, f64)> = map_indices(partition.n_cells(), |i| {
        let mut rng = rng::stream(seed, i as u64, PAIR_LANE);
        let values: Vec<f64> = (0..pairs)
            .map(|_| {
                let x = partition.sample_in_cell(i, &mut rng);
                let y = partition.sample_in_cell(i, &mut rng);
                cap_diff_volume_unchecked(2, phi, x.angle_to(&y))
            })
            .collect();
        let (mean, se) = mean_and_se(&values);
        (mean, if pairs > 1 { se * se } else { 0.0 })
    });
    Ok(Estimate {
        value: compensated_sum(per_cell.iter().map(|c| c.0)),
        std_err: compensated_sum(per_cell.iter().map(|c| c.1)).sqrt(),
    })
}

/// Ordinary least-squares line with its fit quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    ensure_domain!(xs.len() == ys.len(), "x and y lengths differ");
    ensure_domain!(xs.len() >= 3, "a fit needs at least three points, got {}", xs.len());
    ensure_domain!(
        xs.iter().chain(ys).all(|v| v.is_finite()),
        "fit input contains non-finite values"
    );
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    ensure_domain!(sxx > 0.0, "fit abscissae are all equal");
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let scale = ys.iter().map(|y| y * y).sum::<f64>().max(f64::MIN_POSITIVE);
    let r_squared = if ss_tot <= 1e-24 * scale { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LinearFit { slope, intercept, residual: (ss_res / n).sqrt(), r_squared })
}

/// Least-squares fit of `log y` against `log x`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<LinearFit> {
    ensure_domain!(
        pairs.iter().all(|&(x, y)| x > 0.0 && y > 0.0),
        "exponent fits need positive data"
    );
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
}

/// A process family indexed by its size parameter (`N`, or `L` for the
/// harmonic ensemble).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Iid { d: usize },
    Spherical,
    Harmonic { d: usize },
    Jittered,
}

impl Family {
    pub fn spec(&self, size: usize) -> ProcessSpec {
        match *self {
            Family::Iid { d } => ProcessSpec::Iid { d, n: size },
            Family::Spherical => ProcessSpec::Spherical { n: size },
            Family::Harmonic { d } => ProcessSpec::Harmonic { d, l: size },
            Family::Jittered => ProcessSpec::Jittered { n: size },
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Family::Iid { d } | Family::Harmonic { d } => d,
            Family::Spherical | Family::Jittered => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Fixed cap angle, growing `N`.
    Large,
    /// `phi_N = c N^{-alpha}` with `0 < alpha < 1/d`.
    Small,
    /// Fixed `N`, cap angle `t N^{-1/d}` over a grid of `t`.
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    MonteCarlo,
    SemiAnalytic,
}

/// Parameters of a scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeConfig {
    pub family: Family,
    pub regime: Regime,
    /// Size parameters; a single entry for the threshold regime.
    pub sizes: Vec<usize>,
    /// Cap angle of the large-cap regime.
    pub phi: f64,
    /// Small-cap schedule `c N^{-alpha}`; `alpha` defaults to `1/(2d)`.
    pub c: f64,
    pub alpha: Option<f64>,
    /// Threshold parameters.
    pub ts: Vec<f64>,
    pub replicates: usize,
    pub centers: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub jittered_pairs: usize,
}

impl RegimeConfig {
    pub fn new(family: Family, regime: Regime, seed: u64) -> Self {
        Self {
            family,
            regime,
            sizes: Vec::new(),
            phi: FRAC_PI_2,
            c: 1.0,
            alpha: None,
            ts: Vec::new(),
            replicates: 1000,
            centers: if family == Family::Jittered { DEFAULT_CENTERS } else { 1 },
            seed,
            estimator: Estimator::SemiAnalytic,
            jittered_pairs: DEFAULT_JITTERED_PAIRS,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(0.5 / self.family.dim() as f64)
    }

    /// Checks the grid and schedule before any sampling starts.
    pub fn validate(&self) -> Result<()> {
        let d = self.family.dim();
        match self.regime {
            Regime::Threshold => {
                ensure_domain!(self.sizes.len() == 1, "the threshold regime takes exactly one size");
                ensure_domain!(self.ts.len() >= 3, "a regime grid needs at least 3 points, got {}", self.ts.len());
                ensure_domain!(self.ts.iter().all(|t| *t > 0.0), "threshold parameters must be positive");
            }
            Regime::Large | Regime::Small => {
                ensure_domain!(self.sizes.len() >= 3, "a regime grid needs at least 3 points, got {}", self.sizes.len());
            }
        }
        if self.regime == Regime::Large {
            ensure_domain!(self.phi > 0.0 && self.phi <= PI, "cap angle {} outside (0, pi]", self.phi);
        }
        if self.regime == Regime::Small {
            let a = self.alpha();
            ensure_domain!(a > 0.0 && a < 1.0 / d as f64, "small-cap exponent {a} must lie in (0, 1/{d})");
            ensure_domain!(self.c > 0.0, "small-cap constant must be positive");
        }
        if self.estimator == Estimator::MonteCarlo {
            ensure_domain!(self.replicates >= 2, "at least two replicates are required");
            ensure_domain!(self.centers >= 1, "at least one center per replicate is required");
        }
        ensure_domain!(self.jittered_pairs >= 1, "at least one pair per cell is required");
        for &s in &self.sizes {
            self.family.spec(s).validate()?;
        }
        Ok(())
    }
}

/// One grid point of a regime experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub process: ProcessSpec,
    pub n_points: usize,
    pub phi: f64,
    pub t: Option<f64>,
    /// Abscissa of the fit: `N`, or `t` in the threshold regime.
    pub x: f64,
    pub v_hat: Option<f64>,
    pub std_err: Option<f64>,
    pub v_semi: Option<f64>,
    pub v_reference: Option<f64>,
    /// The value that enters the fit.
    pub value: f64,
    /// `v / N`, `v / (N sigma)` or `v / t^{d-1}` for the large, small and
    /// threshold regimes.
    pub profile: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeResult {
    pub regime: Regime,
    pub config: RegimeConfig,
    /// Sorted by `x`.
    pub grid: Vec<GridPoint>,
    pub fitted_exponent: f64,
    pub fit_intercept: f64,
    pub fit_residual: f64,
}

/// Runs a scaling experiment and fits `log v` against `log N` (or `log t`).
pub fn regime_experiment(config: &RegimeConfig) -> Result<RegimeResult> {
    config.validate()?;
    let d = config.family.dim();
    let mut cases: Vec<(ProcessSpec, CapSize)> = match config.regime {
        Regime::Large => config.sizes.iter().map(|&s| (config.family.spec(s), CapSize::Angle(config.phi))).collect(),
        Regime::Small => config
            .sizes
            .iter()
            .map(|&s| {
                let spec = config.family.spec(s);
                let n = spec.n_points()? as f64;
                Ok((spec, CapSize::Angle(config.c * n.powf(-config.alpha()))))
            })
            .collect::<Result<_>>()?,
        Regime::Threshold => {
            let spec = config.family.spec(config.sizes[0]);
            config.ts.iter().map(|&t| (spec, CapSize::Threshold(t))).collect()
        }
    };
    cases.sort_by(|a, b| {
        let key = |c: &(ProcessSpec, CapSize)| match c.1 {
            CapSize::Threshold(t) => t,
            CapSize::Angle(_) => c.0.n_points().unwrap_or(0) as f64,
        };
        key(a).total_cmp(&key(b))
    });

    let mut grid = Vec::with_capacity(cases.len());
    for (spec, cap) in cases {
        let n = spec.n_points()?;
        let phi = cap.resolve(d, n)?;
        let (v_hat, std_err, v_semi) = match config.estimator {
            Estimator::MonteCarlo => {
                let r = mc_number_variance(spec, cap, config.replicates, config.centers, config.seed)?;
                (Some(r.v_hat), Some(r.std_err), r.v_semi)
            }
            Estimator::SemiAnalytic => {
                let semi = semi_analytic_variance(spec, phi, config.jittered_pairs, config.seed)?;
                (None, None, Some(semi.value))
            }
        };
        let value = match config.estimator {
            Estimator::MonteCarlo => v_hat,
            Estimator::SemiAnalytic => v_semi,
        }
        .ok_or_else(|| Error::Numerical("no variance value for grid point".into()))?;
        let x = cap.threshold().unwrap_or(n as f64);
        let profile = match config.regime {
            Regime::Large => value / n as f64,
            Regime::Small => value / (n as f64 * cap_area_unchecked(d, phi)),
            Regime::Threshold => value / x.powi(d as i32 - 1),
        };
        grid.push(GridPoint {
            process: spec,
            n_points: n,
            phi,
            t: cap.threshold(),
            x,
            v_hat,
            std_err,
            v_semi,
            v_reference: reference_variance(spec, phi)?,
            value,
            profile,
        });
    }
    let pairs: Vec<(f64, f64)> = grid.iter().map(|g| (g.x, g.value)).collect();
    let fit = fit_exponent(&pairs)?;
    Ok(RegimeResult {
        regime: config.regime,
        config: config.clone(),
        grid,
        fitted_exponent: fit.slope,
        fit_intercept: fit.intercept,
        fit_residual: fit.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capgeom::cap_area;
    use std::f64::consts::FRAC_PI_3;

    fn within(a: f64, b: f64, k_se: f64) -> bool {
        (a - b).abs() <= k_se
    }

    #[test]
    fn iid_exact_examples() {
        assert_eq!(variance_iid_exact(17, PI, 2).unwrap(), 0.0);
        assert!((variance_iid_exact(1, FRAC_PI_2, 2).unwrap() - 0.25).abs() < 1e-15);
        assert!((variance_iid_exact(100, FRAC_PI_3, 2).unwrap() - 18.75).abs() < 1e-12);
    }

    #[test]
    fn mc_iid_single_point_is_bernoulli() {
        let phi = 1.2;
        let r = mc_number_variance(ProcessSpec::Iid { d: 3, n: 1 }, phi, 20_000, 1, 11).unwrap();
        let s = cap_area(3, phi).unwrap();
        assert!(within(r.v_hat, s * (1.0 - s), 3.0 * r.std_err));
        assert!(r.fixed_center);
    }

    #[test]
    fn mc_iid_hundred_points() {
        let r = mc_number_variance(ProcessSpec::Iid { d: 2, n: 100 }, FRAC_PI_3, 20_000, 1, 7).unwrap();
        assert!(within(r.v_hat, 18.75, 3.0 * r.std_err), "{} +- {}", r.v_hat, r.std_err);
        assert_eq!(r.v_reference, Some(variance_iid_exact(100, FRAC_PI_3, 2).unwrap()));
    }

    #[test]
    fn mc_rejects_bad_input() {
        let spec = ProcessSpec::Iid { d: 2, n: 5 };
        assert!(mc_number_variance(spec, 1.0, 1, 1, 0).is_err());
        assert!(mc_number_variance(spec, 1.0, 10, 0, 0).is_err());
        assert!(mc_number_variance(spec, 0.0, 10, 1, 0).is_err());
        assert!(mc_number_variance(spec, 4.0, 10, 1, 0).is_err());
        assert!(mc_number_variance(spec, CapSize::Threshold(100.0), 10, 1, 0).is_err());
    }

    #[test]
    fn threshold_angle_is_recorded() {
        let r = mc_number_variance(ProcessSpec::Iid { d: 2, n: 100 }, CapSize::Threshold(3.0), 10, 1, 0).unwrap();
        assert_eq!(r.t, Some(3.0));
        assert!((r.phi - 0.3).abs() <= 1e-12);
    }

    #[test]
    fn mc_is_reproducible() {
        let spec = ProcessSpec::Jittered { n: 30 };
        let a = mc_number_variance(spec, 0.7, 50, 3, 5).unwrap();
        let b = mc_number_variance(spec, 0.7, 50, 3, 5).unwrap();
        assert_eq!(a, b);
        assert!(!a.fixed_center);
    }

    #[test]
    fn spherical_single_point_matches_iid() {
        for phi in [0.1, 0.7, FRAC_PI_2, 2.5] {
            let v = variance_spherical_semianalytic(1, phi).unwrap();
            assert!((v - phi.sin().powi(2) / 4.0).abs() < 1e-12);
            assert!((v - variance_iid_exact(1, phi, 2).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_semianalytic_against_leading_term() {
        let v = variance_spherical_semianalytic(400, FRAC_PI_2).unwrap();
        let lead = 20.0 / (2.0 * PI.sqrt());
        assert!((v / lead - 1.0).abs() < 0.01);
        let mut last = f64::INFINITY;
        for n in [100, 400, 1600] {
            let v = variance_spherical_semianalytic(n, FRAC_PI_2).unwrap();
            let rel = (v / spherical_leading_term(n, FRAC_PI_2).unwrap() - 1.0).abs();
            assert!(rel < last);
            last = rel;
        }
        let t = 4.0;
        let v = variance_spherical_semianalytic(10_000, t / 100.0).unwrap();
        assert!((v - t / (2.0 * PI.sqrt())).abs() <= 2.0 / t);
    }

    #[test]
    fn spherical_semianalytic_against_plain_quadrature() {
        // the original form in v = sin u, integrated with the square-root endpoint
        for (n, phi) in [(5, 0.4), (64, FRAC_PI_2), (300, 2.0)] {
            let s2 = f64::sin(phi).powi(2);
            let direct = n as f64 * s2 / PI
                * quadrature::adaptive(0.0, 1.0, 1e-13, |v| {
                    (1.0 - v * v).sqrt() * (1.0 - v * v * s2).powi(n as i32 - 1)
                });
            let v = variance_spherical_semianalytic(n, phi).unwrap();
            assert!((v - direct).abs() < 1e-8 * v, "{n} {phi}: {v} vs {direct}");
        }
    }

    #[test]
    fn spherical_mc_matches_formula() {
        let r = mc_number_variance(ProcessSpec::Spherical { n: 16 }, 1.0, 4000, 1, 3).unwrap();
        assert!(within(r.v_hat, r.v_semi.unwrap(), 3.0 * r.std_err));
    }

    #[test]
    fn harmonic_degree_zero_is_single_point() {
        for d in [2, 3, 4] {
            for phi in [0.3, 1.0, FRAC_PI_2, 2.2] {
                let v = variance_harmonic_semianalytic(d, 0, phi).unwrap();
                let s = cap_area(d, phi).unwrap();
                assert!((v - s * (1.0 - s)).abs() < 1e-9, "d={d} phi={phi}: {v}");
            }
        }
    }

    #[test]
    fn harmonic_quadrature_is_converged() {
        for (d, l, phi) in [(2, 8, 0.5), (2, 24, FRAC_PI_3), (3, 6, 0.9)] {
            let base = harmonic_integral(d, l, phi, harmonic_panel_density(l));
            let fine = harmonic_integral(d, l, phi, 4 * harmonic_panel_density(l));
            assert!((base - fine).abs() <= 1e-8 * fine, "{d} {l} {phi}: {base} vs {fine}");
        }
    }

    #[test]
    fn harmonic_kernel_mass_is_rank() {
        // a projection kernel of rank N carries total mass N
        let (d, l) = (2, 5);
        let n = harmonic_point_count(d, l).unwrap() as f64;
        let rule = GaussLegendre::new(64);
        let mass = gamma_d(d) * rule.composite(0.0, PI, 64, |t| kernel_kl_unchecked(d, l, t.cos()).powi(2) * t.sin());
        assert!((mass - n).abs() < 1e-10 * n);
    }

    #[test]
    fn harmonic_mc_matches_formula() {
        let r = mc_number_variance(ProcessSpec::Harmonic { d: 2, l: 3 }, 0.9, 3000, 1, 21).unwrap();
        assert!(within(r.v_hat, r.v_semi.unwrap(), 3.0 * r.std_err), "{} vs {:?}", r.v_hat, r.v_semi);
    }

    #[test]
    fn jittered_single_cell_is_single_point() {
        let p = ZonalPartition::new(1).unwrap();
        let phi = 1.1;
        let est = variance_jittered_semianalytic(&p, phi, 50_000, 4).unwrap();
        let s = cap_area(2, phi).unwrap();
        assert!(within(est.value, s * (1.0 - s), 3.0 * est.std_err));
    }

    #[test]
    fn jittered_vanishes_for_tiny_caps() {
        let p = ZonalPartition::new(10).unwrap();
        let est = variance_jittered_semianalytic(&p, 1e-9, 100, 1).unwrap();
        assert!(est.value < 1e-8);
    }

    #[test]
    fn jittered_mc_matches_formula() {
        let r = mc_number_variance(ProcessSpec::Jittered { n: 40 }, 0.6, 3000, 4, 2).unwrap();
        let se = r.std_err.hypot(r.v_semi_std_err.unwrap());
        assert!(within(r.v_hat, r.v_semi.unwrap(), 3.0 * se));
        assert!(within(r.mean_count, 40.0 * cap_area(2, 0.6).unwrap(), 3.0 * r.mean_std_err));
    }

    #[test]
    fn fit_examples() {
        let sq: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, (x * x) as f64)).collect();
        let f = fit_exponent(&sq).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.residual < 1e-12);
        let flat: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, 5.0)).collect();
        assert!(fit_exponent(&flat).unwrap().slope.abs() < 1e-12);
        let eps = [0.01, -0.01, 0.004, -0.007, 0.0, 0.01];
        let noisy: Vec<(f64, f64)> = eps
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let x = 2f64.powi(i as i32 + 2);
                (x, 3.0 * x.sqrt() * (1.0 + e))
            })
            .collect();
        assert!((fit_exponent(&noisy).unwrap().slope - 0.5).abs() < 0.03);
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn regime_validation() {
        let mut c = RegimeConfig::new(Family::Iid { d: 2 }, Regime::Large, 0);
        c.sizes = vec![10, 20];
        assert!(regime_experiment(&c).is_err());
        c.sizes = vec![40, 10, 20];
        let r = regime_experiment(&c).unwrap();
        assert!(r.grid.windows(2).all(|w| w[0].x < w[1].x));
        assert!((r.fitted_exponent - 1.0).abs() < 1e-9);
        let mut s = RegimeConfig::new(Family::Spherical, Regime::Small, 0);
        s.sizes = vec![10, 20, 40];
        s.alpha = Some(0.5);
        assert!(regime_experiment(&s).is_err());
        let mut t = RegimeConfig::new(Family::Spherical, Regime::Threshold, 0);
        t.sizes = vec![100];
        assert!(regime_experiment(&t).is_err());
    }

    #[test]
    fn spherical_regimes() {
        let mut large = RegimeConfig::new(Family::Spherical, Regime::Large, 0);
        large.phi = FRAC_PI_3;
        large.sizes = vec![64, 128, 256, 512, 1024];
        let r = regime_experiment(&large).unwrap();
        assert!((r.fitted_exponent - 0.5).abs() < 0.1);
        assert!(r.grid.windows(2).all(|w| w[1].profile < w[0].profile));

        let mut small = RegimeConfig::new(Family::Spherical, Regime::Small, 0);
        small.sizes = vec![100, 400, 1600, 6400];
        let r = regime_experiment(&small).unwrap();
        assert!(r.grid.windows(2).all(|w| w[1].profile < w[0].profile));

        let mut thr = RegimeConfig::new(Family::Spherical, Regime::Threshold, 0);
        thr.sizes = vec![10_000];
        thr.ts = vec![8.0, 2.0, 4.0];
        let r = regime_experiment(&thr).unwrap();
        assert_eq!(r.grid.iter().map(|g| g.x).collect::<Vec<_>>(), vec![2.0, 4.0, 8.0]);
        assert!((r.fitted_exponent - 1.0).abs() < 0.2);
    }

    #[test]
    fn iid_large_caps_are_not_hyperuniform() {
        let mut c = RegimeConfig::new(Family::Iid { d: 2 }, Regime::Large, 9);
        c.phi = 1.0;
        c.sizes = vec![16, 64, 256];
        c.estimator = Estimator::MonteCarlo;
        c.replicates = 2000;
        let r = regime_experiment(&c).unwrap();
        assert!((r.fitted_exponent - 1.0).abs() < 0.1);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }
}
