//! Samplers for the four point processes.
//!
//! [`Process`] prepares a [`ProcessSpec`] once (building the partition for
//! jittered sampling) and then draws independent replicates, each from its
//! own random stream, so replicate `r` of seed `s` is the same sample no
//! matter how replicates are scheduled.

mod dpp;
mod iid;
mod jittered;
mod spherical;

pub use dpp::{
    sample_harmonic_ensemble,
    chain_rule_projection_dpp, chain_rule_with_stats, ChainRuleStats, HarmonicKernel,
    JitteredKernel, ProjectionKernel, MAX_CONSECUTIVE_REJECTIONS,
};
pub use iid::sample_iid;
pub use jittered::sample_jittered;
pub use spherical::{inverse_stereographic, sample_spherical_ensemble, stereographic};

use crate::error::{ensure_domain, Result};
use crate::partition::ZonalPartition;
use crate::rng::{self, RandomStream};
use crate::specfun::harmonic_point_count;
use crate::sphere::UnitPoint;
use serde::{Deserialize, Serialize};

/// Random-stream lane used for point generation inside a replicate.
pub const POINT_LANE: u64 = 0;

/// Which process to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum ProcessSpec {
    /// `n` independent uniform points on S^d.
    Iid { d: usize, n: usize },
    /// Spherical ensemble of `n` points on S².
    Spherical { n: usize },
    /// Harmonic ensemble of degree `l` on S^d, `Z(d+1, l)` points.
    Harmonic { d: usize, l: usize },
    /// One uniform point per cell of the `n`-cell equal-area partition of S².
    Jittered { n: usize },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProcessSpec::Iid { d, n } => {
                ensure_domain!(d >= 2, "iid process requires d >= 2, got {d}");
                ensure_domain!(n >= 1, "iid process requires n >= 1");
            }
            ProcessSpec::Spherical { n } => {
                ensure_domain!(n >= 1, "spherical ensemble requires n >= 1")
            }
            ProcessSpec::Harmonic { d, l } => {
                harmonic_point_count(d, l)?;
            }
            ProcessSpec::Jittered { n } => {
                ensure_domain!(n >= 1, "jittered sampling requires n >= 1")
            }
        }
        Ok(())
    }

    /// Sphere dimension `d`.
    pub fn dim(&self) -> usize {
        match *self {
            ProcessSpec::Iid { d, .. } | ProcessSpec::Harmonic { d, .. } => d,
            ProcessSpec::Spherical { .. } | ProcessSpec::Jittered { .. } => 2,
        }
    }

    /// Number of points every sample contains.
    pub fn n_points(&self) -> Result<usize> {
        match *self {
            ProcessSpec::Iid { n, .. } | ProcessSpec::Spherical { n } | ProcessSpec::Jittered { n } => {
                Ok(n)
            }
            ProcessSpec::Harmonic { d, l } => harmonic_point_count(d, l),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        match *self {
            ProcessSpec::Harmonic { l, .. } => Some(l),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Iid { .. } => "iid",
            ProcessSpec::Spherical { .. } => "spherical",
            ProcessSpec::Harmonic { .. } => "harmonic",
            ProcessSpec::Jittered { .. } => "jittered",
        }
    }

    /// Whether the law of the process is invariant under rotations.
    pub fn is_rotation_invariant(&self) -> bool {
        !matches!(self, ProcessSpec::Jittered { .. })
    }
}

/// One realisation of a process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    pub d: usize,
    pub points: Vec<UnitPoint>,
    pub process: ProcessSpec,
    pub seed: u64,
    pub replicate: u64,
}

/// A process ready to be sampled repeatedly.
#[derive(Debug, Clone)]
pub struct Process {
    spec: ProcessSpec,
    partition: Option<ZonalPartition>,
}

impl Process {
    pub fn new(spec: ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let partition = match spec {
            ProcessSpec::Jittered { n } => Some(ZonalPartition::new(n)?),
            _ => None,
        };
        Ok(Self { spec, partition })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn partition(&self) -> Option<&ZonalPartition> {
        self.partition.as_ref()
    }

    /// Draws the points from an explicit stream.
    pub fn sample_points(&self, rng: &mut RandomStream) -> Result<Vec<UnitPoint>> {
        match self.spec {
            ProcessSpec::Iid { d, n } => Ok(sample_iid(d, n, rng)),
            ProcessSpec::Spherical { n } => sample_spherical_ensemble(n, rng),
            ProcessSpec::Harmonic { d, l } => {
                let kernel = HarmonicKernel::new(d, l)?;
                chain_rule_projection_dpp(&kernel, rng)
            }
            ProcessSpec::Jittered { .. } => {
                let partition = self.partition.as_ref().expect("partition built in new");
                Ok(sample_jittered(partition, rng))
            }
        }
    }

    /// Replicate `replicate` of experiment `seed`.
    pub fn sample(&self, seed: u64, replicate: u64) -> Result<PointSample> {
        let mut rng = rng::stream(seed, replicate, POINT_LANE);
        let points = self.sample_points(&mut rng)?;
        Ok(PointSample { d: self.spec.dim(), points, process: self.spec, seed, replicate })
    }
}
