//! Point processes on the unit sphere and their cap-count number variance.
//!
//! The crate samples four processes (i.i.d. uniform points, the spherical
//! ensemble, the harmonic ensemble and jittered sampling on an equal-area
//! partition), estimates the number variance of spherical caps by Monte
//! Carlo, and evaluates semi-analytic reference values by quadrature.
//!
//! Module map:
//! - [`specfun`]: dimension counts, normalised Legendre and Jacobi recurrences.
//! - [`quadrature`]: Gauss-Legendre rules, adaptive and composite integration.
//! - [`capgeom`]: cap areas, Laplace coefficients, intersection volumes.
//! - [`partition`]: equal-area zonal partitions of S².
//! - [`processes`]: samplers, including a chain-rule projection DPP sampler.
//! - [`variance`]: Monte Carlo and semi-analytic number variance, regime fits.

pub mod capgeom;
pub mod error;
pub mod partition;
pub mod processes;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod sphere;
pub mod variance;

pub use error::{Error, Result};
pub use sphere::{Cap, UnitPoint};
