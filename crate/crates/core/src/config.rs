//! JSON job configuration and job dispatch.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{mean_constellation, TheoryMode};
use crate::artifact::{
    constellation_rows, sweep_rows, write_constellation_csv, write_sweep_csv, ArtifactHeader,
};
use crate::channel::{equivalent_link, LinkConfig};
use crate::error::{config_err, Error, Result};
use crate::modulation::SchemeConfig;
use crate::montecarlo::{
    simulate_capacity, simulate_sep, sweep_channel_constellation, theory_sweep, SweepResult,
    SweepSpec,
};
use crate::quadrature::DEFAULT_GH_ORDER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Constellation,
    Capacity,
    Sep,
    Theory,
}

impl JobKind {
    pub fn name(&self) -> &'static str {
        match self {
            JobKind::Constellation => "constellation",
            JobKind::Capacity => "capacity",
            JobKind::Sep => "sep",
            JobKind::Theory => "theory",
        }
    }
}

/// Which constellation a constellation job writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationSource {
    /// Channel 0 of the seeded sweep.
    #[default]
    Drawn,
    /// Built from the mean block gains.
    Mean,
}

fn default_trials() -> u64 {
    10_000
}

fn default_channels() -> usize {
    100
}

fn default_gh_order() -> usize {
    DEFAULT_GH_ORDER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Must agree with the subcommand when given.
    #[serde(default)]
    pub job: Option<JobKind>,
    pub link: LinkConfig,
    pub scheme: SchemeConfig,
    /// Receive SNR grid in dB.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials_per_point: u64,
    #[serde(default = "default_channels")]
    pub channels_per_point: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theory_mode: TheoryMode,
    #[serde(default)]
    pub early_stop: bool,
    #[serde(default = "default_gh_order")]
    pub gh_order: usize,
    #[serde(default)]
    pub constellation: ConstellationSource,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            link: self.link,
            scheme: self.scheme,
            snr_grid_db: self.snr_db.clone(),
            trials_per_point: self.trials_per_point,
            channels_per_point: self.channels_per_point,
            master_seed: self.seed,
            early_stop: self.early_stop,
            theory_mode: self.theory_mode,
            gh_order: self.gh_order,
        }
    }

    /// The config as written into artifact headers: defaults filled in and the
    /// job kind set.
    pub fn resolved(&self, kind: JobKind) -> serde_json::Value {
        let mut c = self.clone();
        c.job = Some(kind);
        serde_json::to_value(&c).expect("config serializes")
    }

    pub fn validate(&self, kind: JobKind) -> Result<()> {
        if let Some(j) = self.job {
            if j != kind {
                return config_err(format!(
                    "config is for a {} job, not {}",
                    j.name(),
                    kind.name()
                ));
            }
        }
        match kind {
            JobKind::Constellation => {
                self.link.validate()?;
                self.scheme
                    .validate(self.link.elements, self.link.phase_bits)
            }
            _ => self.sweep_spec().validate(),
        }
    }
}

/// Runs one job and returns the CSV artifact text.
pub fn run_job(kind: JobKind, cfg: &JobConfig, workers: usize) -> Result<String> {
    cfg.validate(kind)?;
    let header = ArtifactHeader::new(kind.name(), cfg.resolved(kind));
    let spec = cfg.sweep_spec();
    let merge = |a: SweepResult, b: SweepResult| SweepResult {
        points: a
            .points
            .into_iter()
            .zip(b.points)
            .map(|(mut p, q)| {
                p.capacity_ub = q.capacity_ub;
                p
            })
            .collect(),
    };
    match kind {
        JobKind::Constellation => {
            let c = match cfg.constellation {
                ConstellationSource::Drawn => sweep_channel_constellation(&spec, 0)?,
                ConstellationSource::Mean => {
                    let kp = equivalent_link(&cfg.link)?.kappa_prime;
                    mean_constellation(&cfg.scheme, cfg.link.elements, cfg.link.phase_bits, kp)?
                }
            };
            write_constellation_csv(&header, &constellation_rows(&c))
        }
        JobKind::Sep => write_sweep_csv(&header, &sweep_rows(&simulate_sep(&spec, workers)?)),
        JobKind::Capacity => {
            let sim = simulate_capacity(&spec, workers)?;
            let mut ub_spec = spec.clone();
            ub_spec.theory_mode = TheoryMode::MeanGains;
            let theory = theory_sweep(&ub_spec, workers)?;
            write_sweep_csv(&header, &sweep_rows(&merge(sim, theory)))
        }
        JobKind::Theory => write_sweep_csv(&header, &sweep_rows(&theory_sweep(&spec, workers)?)),
    }
}
