//! Experiment configuration: a flat record that can come from a JSON file,
//! from command-line flags, or both (flags win).

use crate::CliError;
use clap::ValueEnum;
use hyperuniform::processes::ProcessSpec;
use hyperuniform::variance::{Estimator, Family, Regime, RegimeConfig, DEFAULT_CENTERS, DEFAULT_JITTERED_PAIRS};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Sample,
    Variance,
    Regime,
    Partition,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Iid,
    Spherical,
    Harmonic,
    Jittered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Large,
    Small,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    #[value(alias = "mc")]
    MonteCarlo,
    #[value(alias = "semi")]
    SemiAnalytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every setting any subcommand understands. Unset fields are omitted from
/// the JSON form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<CommandKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicate: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<RegimeKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:expr, $top:expr, $($f:ident),+) => {
        ExperimentConfig { $($f: $top.$f.or($base.$f)),+ }
    };
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: ExperimentConfig) -> Self {
        overlay_fields!(
            self, top, subcommand, process, d, n, l, phi, t, degrees, replicates, centers, seed,
            replicate, regime, sizes, ts, c, alpha, estimator, pairs, format, output
        )
    }

    fn set_fields(&self) -> Vec<String> {
        match serde_json::to_value(self).expect("config serialises") {
            serde_json::Value::Object(map) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Rejects settings the subcommand does not use.
    fn only(&self, allowed: &[&str]) -> Result<(), CliError> {
        let cmd = self.subcommand.map(|c| format!("{c:?}").to_lowercase()).unwrap_or_default();
        for key in self.set_fields() {
            if key != "subcommand" && !allowed.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("setting '{key}' is not used by '{cmd}'")));
            }
        }
        Ok(())
    }

    fn require<T: Copy>(value: Option<T>, name: &str, why: &str) -> Result<T, CliError> {
        value.ok_or_else(|| CliError::Usage(format!("--{name} is required {why}")))
    }

    /// Angles in radians, converting from degrees when asked.
    fn angle(&self, value: f64) -> f64 {
        if self.degrees.unwrap_or(false) {
            value.to_radians()
        } else {
            value
        }
    }

    /// Process specification from `process`, `d`, `n` and `L`.
    pub fn process_spec(&self) -> Result<ProcessSpec, CliError> {
        let process = Self::require(self.process, "process", "")?;
        let d = self.d.unwrap_or(2);
        let spec = match process {
            ProcessKind::Iid => {
                self.no_degree("iid")?;
                ProcessSpec::Iid { d, n: Self::require(self.n, "n", "for the iid process")? }
            }
            ProcessKind::Spherical => {
                self.only_s2("the spherical ensemble", d)?;
                self.no_degree("spherical")?;
                ProcessSpec::Spherical { n: Self::require(self.n, "n", "for the spherical ensemble")? }
            }
            ProcessKind::Harmonic => {
                if self.n.is_some() {
                    return Err(CliError::Usage(
                        "the harmonic ensemble size is set by --L, not --n".into(),
                    ));
                }
                ProcessSpec::Harmonic { d, l: Self::require(self.l, "L", "for the harmonic ensemble")? }
            }
            ProcessKind::Jittered => {
                self.only_s2("jittered sampling", d)?;
                self.no_degree("jittered")?;
                ProcessSpec::Jittered { n: Self::require(self.n, "n", "for jittered sampling")? }
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    fn only_s2(&self, what: &str, d: usize) -> Result<(), CliError> {
        if d != 2 {
            return Err(CliError::Usage(format!("{what} is defined on S^2 only (got --d {d})")));
        }
        Ok(())
    }

    fn no_degree(&self, what: &str) -> Result<(), CliError> {
        if self.l.is_some() {
            return Err(CliError::Usage(format!("--L applies to the harmonic ensemble, not {what}")));
        }
        Ok(())
    }

    fn family(&self) -> Result<Family, CliError> {
        let process = Self::require(self.process, "process", "")?;
        let d = self.d.unwrap_or(2);
        Ok(match process {
            ProcessKind::Iid => Family::Iid { d },
            ProcessKind::Harmonic => Family::Harmonic { d },
            ProcessKind::Spherical => {
                self.only_s2("the spherical ensemble", d)?;
                Family::Spherical
            }
            ProcessKind::Jittered => {
                self.only_s2("jittered sampling", d)?;
                Family::Jittered
            }
        })
    }

    /// Validated settings for `sample`, with defaults filled in.
    pub fn resolve_sample(&self) -> Result<(ProcessSpec, ExperimentConfig), CliError> {
        self.only(&["process", "d", "n", "L", "seed", "replicate", "format", "output"])?;
        let spec = self.process_spec()?;
        let mut resolved = self.clone();
        resolved.d = Some(spec.dim());
        resolved.seed = Some(self.seed.unwrap_or(0));
        resolved.replicate = Some(self.replicate.unwrap_or(0));
        resolved.format = Some(self.format.unwrap_or_default());
        Ok((spec, resolved))
    }

    /// Validated settings for `variance`, with angles in radians.
    pub fn resolve_variance(&self) -> Result<(VarianceJob, ExperimentConfig), CliError> {
        self.only(&[
            "process", "d", "n", "L", "phi", "t", "degrees", "replicates", "centers", "seed", "format",
            "output",
        ])?;
        let spec = self.process_spec()?;
        let seed = Self::require(self.seed, "seed", "for variance runs")?;
        let cap = match (self.phi, self.t) {
            (Some(phi), None) => hyperuniform::variance::CapSize::Angle(self.angle(phi)),
            (None, Some(t)) => hyperuniform::variance::CapSize::Threshold(t),
            (Some(_), Some(_)) => return Err(CliError::Usage("give either --phi or --t, not both".into())),
            (None, None) => return Err(CliError::Usage("one of --phi or --t is required".into())),
        };
        cap.resolve(spec.dim(), spec.n_points()?)?;
        let replicates = self.replicates.unwrap_or(1000);
        let centers = self.centers.unwrap_or(default_centers(self.process));
        if replicates < 2 {
            return Err(CliError::Usage(format!("--replicates must be at least 2, got {replicates}")));
        }
        if centers < 1 {
            return Err(CliError::Usage("--centers must be at least 1".into()));
        }
        let mut resolved = self.clone();
        resolved.d = Some(spec.dim());
        if let hyperuniform::variance::CapSize::Angle(phi) = cap {
            resolved.phi = Some(phi);
        }
        resolved.degrees = None;
        resolved.replicates = Some(replicates);
        resolved.centers = Some(centers);
        resolved.format = Some(self.format.unwrap_or_default());
        Ok((VarianceJob { spec, cap, replicates, centers, seed }, resolved))
    }

    /// Validated settings for `regime`.
    pub fn resolve_regime(&self) -> Result<(RegimeConfig, ExperimentConfig), CliError> {
        self.only(&[
            "process", "d", "regime", "sizes", "phi", "degrees", "c", "alpha", "ts", "estimator",
            "replicates", "centers", "pairs", "seed", "format", "output",
        ])?;
        let family = self.family()?;
        let seed = Self::require(self.seed, "seed", "for regime runs")?;
        let regime = Self::require(self.regime, "regime", "")?;
        let sizes = self.sizes.clone().unwrap_or_default();
        let mut rc = RegimeConfig::new(
            family,
            match regime {
                RegimeKind::Large => Regime::Large,
                RegimeKind::Small => Regime::Small,
                RegimeKind::Threshold => Regime::Threshold,
            },
            seed,
        );
        rc.sizes = sizes;
        if let Some(phi) = self.phi {
            rc.phi = self.angle(phi);
        } else if regime == RegimeKind::Large {
            return Err(CliError::Usage("--phi is required for the large-cap regime".into()));
        }
        rc.c = self.c.unwrap_or(1.0);
        rc.alpha = self.alpha;
        rc.ts = self.ts.clone().unwrap_or_default();
        rc.estimator = match self.estimator.unwrap_or(EstimatorKind::SemiAnalytic) {
            EstimatorKind::MonteCarlo => Estimator::MonteCarlo,
            EstimatorKind::SemiAnalytic => Estimator::SemiAnalytic,
        };
        rc.replicates = self.replicates.unwrap_or(rc.replicates);
        rc.centers = self.centers.unwrap_or(rc.centers);
        rc.jittered_pairs = self.pairs.unwrap_or(DEFAULT_JITTERED_PAIRS);
        rc.validate()?;
        let mut resolved = self.clone();
        resolved.d = Some(family.dim());
        resolved.phi = (regime == RegimeKind::Large).then_some(rc.phi);
        resolved.degrees = None;
        resolved.c = (regime == RegimeKind::Small).then_some(rc.c);
        resolved.alpha = (regime == RegimeKind::Small).then_some(rc.alpha());
        resolved.estimator = Some(self.estimator.unwrap_or(EstimatorKind::SemiAnalytic));
        resolved.replicates = Some(rc.replicates);
        resolved.centers = Some(rc.centers);
        resolved.pairs = Some(rc.jittered_pairs);
        resolved.format = Some(self.format.unwrap_or_default());
        Ok((rc, resolved))
    }

    /// Validated settings for `partition dump`.
    pub fn resolve_partition(&self) -> Result<(usize, ExperimentConfig), CliError> {
        self.only(&["n", "format", "output"])?;
        let n = Self::require(self.n, "n", "for the partition")?;
        let mut resolved = self.clone();
        resolved.format = Some(self.format.unwrap_or_default());
        Ok((n, resolved))
    }
}

fn default_centers(process: Option<ProcessKind>) -> usize {
    if process == Some(ProcessKind::Jittered) {
        DEFAULT_CENTERS
    } else {
        1
    }
}

/// A fully validated `variance` invocation.
#[derive(Debug, Clone, Copy)]
pub struct VarianceJob {
    pub spec: ProcessSpec,
    pub cap: hyperuniform::variance::CapSize,
    pub replicates: usize,
    pub centers: usize,
    pub seed: u64,
}
