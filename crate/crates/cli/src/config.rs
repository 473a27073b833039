use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use fpp_core::acceptance::Profile;
use fpp_core::mean_field::{default_candidates, DiameterMode, DEFAULT_EXACT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Candidate,
}

impl From<ModeArg> for DiameterMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => DiameterMode::Exact,
            ModeArg::Candidate => DiameterMode::Candidate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProfileArg {
    Quick,
    Smoke,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Quick => Profile::Quick,
            ProfileArg::Smoke => Profile::Smoke,
        }
    }
}

/// Every setting, each optional so that flags, the config file and the
/// defaults can be layered.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// JSON file with any of the settings below; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of vertices.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Intensity of the limiting point process.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Inner truncation level A of the Xi sampler.
    #[arg(long, allow_hyphen_values = true)]
    pub inner: Option<f64>,
    /// Extra depth B of the outer truncation level.
    #[arg(long)]
    pub outer: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Candidate sources in candidate mode (default ceil(4 log n)).
    #[arg(long)]
    pub candidates: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory for the samples and summary files.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Format of the samples file.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Tagged vertices in the joint experiment.
    #[arg(long)]
    pub m: Option<usize>,
    /// Thresholds for the tail of Q, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    /// Truncation probability of the Q sampler.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Largest n for exact diameters.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileArg>,
}

/// The resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// The seed came from a flag or the config file rather than the default.
    #[serde(skip)]
    pub seed_given: bool,
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub inner: f64,
    pub outer: f64,
    pub mode: ModeArg,
    pub candidates: usize,
    // scheduling and file placement do not affect results, so they stay out of the summary
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output: PathBuf,
    pub format: Format,
    pub m: usize,
    pub x: Vec<f64>,
    pub delta: f64,
    pub budget: usize,
    pub profile: ProfileArg,
}

macro_rules! layer {
    ($flags:expr, $file:expr, $field:ident, $default:expr) => {
        $flags
            .$field
            .clone()
            .or($file.$field.clone())
            .unwrap_or($default)
    };
}

impl ExperimentConfig {
    pub fn resolve(flags: &Overrides) -> Result<Self, String> {
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => Overrides::default(),
        };
        let n = layer!(flags, file, n, 1000);
        let config = ExperimentConfig {
            seed: layer!(flags, file, seed, 1),
            seed_given: flags.seed.is_some() || file.seed.is_some(),
            n,
            replicates: layer!(flags, file, replicates, 100),
            alpha: layer!(flags, file, alpha, 1.0),
            gamma: layer!(flags, file, gamma, 1.0),
            inner: layer!(flags, file, inner, fpp_core::limit::DEFAULT_INNER),
            outer: layer!(flags, file, outer, fpp_core::limit::DEFAULT_OUTER),
            mode: layer!(flags, file, mode, ModeArg::Candidate),
            candidates: layer!(flags, file, candidates, default_candidates(n).min(n)),
            workers: layer!(flags, file, workers, 0),
            output: layer!(flags, file, output, PathBuf::from(".")),
            format: layer!(flags, file, format, Format::Csv),
            m: layer!(flags, file, m, 3),
            x: layer!(flags, file, x, vec![0.5, 1.0, 2.0]),
            delta: layer!(flags, file, delta, fpp_core::limit::DEFAULT_DELTA),
            budget: layer!(flags, file, budget, DEFAULT_EXACT_BUDGET),
            profile: layer!(flags, file, profile, ProfileArg::Quick),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n < 2 {
            return Err(format!("n must be at least 2, got {}", self.n));
        }
        if self.replicates < 1 {
            return Err("replicates must be at least 1".into());
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(format!("gamma must be positive, got {}", self.gamma));
        }
        if !self.alpha.is_finite() || !self.inner.is_finite() {
            return Err("alpha and inner must be finite".into());
        }
        if !(self.outer > 0.0 && self.outer.is_finite()) {
            return Err(format!("outer must be positive, got {}", self.outer));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.x.is_empty() || self.x.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err("x must be a nonempty list of positive numbers".into());
        }
        Ok(())
    }
}

fn read_config(path: &Path) -> Result<Overrides, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}
