//! Experiment configuration files.
//!
//! Configs are TOML: a few top-level keys and one flat section per concern.
//!
//! ```toml
//! experiment = "noise_sweep"
//! seeds = [0, 1, 2]
//! output_dir = "out/noise_sweep"
//! losses = ["sigmoid", "logistic"]
//!
//! [gaussian]
//! mean_pos = [1.0, 1.0]
//! mean_neg = [-1.0, -1.0]
//! covariance = [1.0, 1.0]
//!
//! [noise]
//! grid = [[0.8, 0.3], [0.7, 0.4]]
//!
//! [train]
//! epochs = 40
//! ```
//!
//! Relative paths (`output_dir`, corpus and keyword files) are resolved
//! against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{GaussianPairConfig, McdParams};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::pipeline::{PipelineConfig, ThresholdChoice};
use crate::text::Scheme;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    VerifyIdentities,
    NoiseSweep,
    LossCompare,
    PuDemo,
    UuDemo,
    Keywords,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VerifyIdentities => "verify_identities",
            ExperimentKind::NoiseSweep => "noise_sweep",
            ExperimentKind::LossCompare => "loss_compare",
            ExperimentKind::PuDemo => "pu_demo",
            ExperimentKind::UuDemo => "uu_demo",
            ExperimentKind::Keywords => "keywords",
        }
    }
}

/// Gaussian class-conditionals plus sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    pub mean_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
    pub covariance: Vec<f64>,
    /// Size of each corrupted training set.
    #[serde(default = "default_n_train")]
    pub n_pos: usize,
    #[serde(default = "default_n_train")]
    pub n_neg: usize,
    /// Clean held-out points per class.
    #[serde(default = "default_n_test")]
    pub n_test: usize,
}

fn default_n_train() -> usize {
    2000
}

fn default_n_test() -> usize {
    2000
}

impl GaussianSection {
    pub fn pair(&self) -> Result<GaussianPairConfig> {
        GaussianPairConfig::new(self.mean_pos.clone(), self.mean_neg.clone(), self.covariance.clone())
    }
}

impl Default for GaussianSection {
    fn default() -> Self {
        GaussianSection {
            mean_pos: vec![1.0, 1.0],
            mean_neg: vec![-1.0, -1.0],
            covariance: vec![1.0, 1.0],
            n_pos: default_n_train(),
            n_neg: default_n_train(),
            n_test: default_n_test(),
        }
    }
}

/// `(pi_corr_pos, pi_corr_neg)` cells.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub grid: Vec<[f64; 2]>,
}

impl NoiseSection {
    pub fn params(&self) -> Result<Vec<McdParams>> {
        if self.grid.is_empty() {
            return Err(Error::config("noise.grid is empty"));
        }
        self.grid
            .iter()
            .enumerate()
            .map(|(i, &[p, n])| McdParams::new(p, n).map_err(|e| Error::config(format!("noise.grid[{i}]: {e}"))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitiesSection {
    /// Random finite-support instances per loss.
    pub instances: usize,
    /// Largest support size of a random instance.
    pub max_support: usize,
    /// Scores are drawn uniformly from `[-score_range, score_range]`.
    pub score_range: f64,
    /// Two-point instances for the minimizer comparison.
    pub minimizer_instances: usize,
}

impl Default for IdentitiesSection {
    fn default() -> Self {
        IdentitiesSection {
            instances: 100,
            max_support: 6,
            score_range: 4.0,
            minimizer_instances: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PuSection {
    /// Share of positives among the unlabeled points.
    pub class_prior_unlabeled: f64,
}

impl Default for PuSection {
    fn default() -> Self {
        PuSection {
            class_prior_unlabeled: 0.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UuSection {
    pub pi_u: f64,
    pub pi_u_prime: f64,
}

impl Default for UuSection {
    fn default() -> Self {
        UuSection {
            pi_u: 0.7,
            pi_u_prime: 0.3,
        }
    }
}

/// Keyword pipeline inputs. Missing paths fall back to the bundled assets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeywordsSection {
    pub corpus: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub tau: f64,
    pub scheme: Scheme,
    pub min_doc_freq: usize,
    pub threshold_method: ThresholdChoice,
    pub prior: Option<f64>,
}

impl Default for KeywordsSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        KeywordsSection {
            corpus: None,
            keywords: None,
            tau: p.tau,
            scheme: p.scheme,
            min_doc_freq: p.min_doc_freq,
            threshold_method: p.threshold_method,
            prior: p.prior,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_losses")]
    pub losses: Vec<LossKind>,
    #[serde(default)]
    pub gaussian: GaussianSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub identities: IdentitiesSection,
    #[serde(default)]
    pub pu: PuSection,
    #[serde(default)]
    pub uu: UuSection,
    #[serde(default)]
    pub keywords: KeywordsSection,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_losses() -> Vec<LossKind> {
    vec![LossKind::Sigmoid, LossKind::Logistic]
}

impl ExperimentConfig {
    /// Defaults for `kind`, as if the config file held only `experiment = ...`.
    pub fn for_experiment(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment: kind,
            seeds: default_seeds(),
            output_dir: default_output_dir(),
            losses: default_losses(),
            gaussian: GaussianSection::default(),
            noise: NoiseSection::default(),
            train: TrainConfig::default(),
            identities: IdentitiesSection::default(),
            pu: PuSection::default(),
            uu: UuSection::default(),
            keywords: KeywordsSection::default(),
        }
    }

    /// Parse TOML text; `origin` only labels error messages.
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a `.toml` config, or the `config` echo of a run manifest (`.json`).
    ///
    /// Relative paths inside the file are made relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            let echo = manifest.get("config").cloned().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: "manifest has no `config` field".into(),
            })?;
            let cfg: ExperimentConfig = serde_json::from_value(echo).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("config: {e}"),
            })?;
            cfg.validate()?;
            cfg
        } else {
            Self::from_toml(&text, path)?
        };
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(p) = self.keywords.corpus.as_mut() {
            fix(p);
        }
        if let Some(p) = self.keywords.keywords.as_mut() {
            fix(p);
        }
    }

    /// Replace the seed list with a single seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds = vec![seed];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must not be empty"));
        }
        if self.losses.is_empty() {
            return Err(Error::config("losses must not be empty"));
        }
        let trains = !matches!(self.experiment, ExperimentKind::VerifyIdentities);
        if trains {
            self.train
                .validate()
                .map_err(|e| Error::config(format!("train: {e}")))?;
            if let Some(l) = self.losses.iter().find(|l| !l.is_differentiable()) {
                return Err(Error::config(format!("losses: `{l}` cannot be trained (no gradient)")));
            }
        }
        match self.experiment {
            ExperimentKind::VerifyIdentities => {
                let s = &self.identities;
                if s.instances == 0 || s.max_support < 2 {
                    return Err(Error::config("identities: instances must be >= 1 and max_support >= 2"));
                }
                if !(s.score_range > 0.0 && s.score_range.is_finite()) {
                    return Err(Error::config("identities.score_range must be positive"));
                }
            }
            ExperimentKind::NoiseSweep | ExperimentKind::LossCompare => {
                self.gaussian_checked()?;
                self.noise.params()?;
            }
            ExperimentKind::PuDemo => {
                self.gaussian_checked()?;
                crate::distributions::pu_params(self.pu.class_prior_unlabeled)
                    .map_err(|e| Error::config(format!("pu: {e}")))?;
            }
            ExperimentKind::UuDemo => {
                self.gaussian_checked()?;
                crate::distributions::uu_params(self.uu.pi_u, self.uu.pi_u_prime)
                    .map_err(|e| Error::config(format!("uu: {e}")))?;
            }
            ExperimentKind::Keywords => {
                let k = &self.keywords;
                if !(0.0..=1.0).contains(&k.tau) {
                    return Err(Error::config(format!("keywords.tau must lie in [0, 1], got {}", k.tau)));
                }
                if let Some(p) = k.prior {
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::config(format!("keywords.prior must lie in (0, 1), got {p}")));
                    }
                }
                if k.threshold_method == ThresholdChoice::Breakeven && k.prior.is_none() {
                    return Err(Error::config(
                        "keywords.threshold_method = \"breakeven\" needs keywords.prior",
                    ));
                }
            }
        }
        Ok(())
    }

    fn gaussian_checked(&self) -> Result<GaussianPairConfig> {
        let g = &self.gaussian;
        if g.n_pos == 0 || g.n_neg == 0 || g.n_test == 0 {
            return Err(Error::config("gaussian: n_pos, n_neg and n_test must be positive"));
        }
        g.pair().map_err(|e| Error::config(format!("gaussian: {e}")))
    }

    /// The pipeline settings of a keywords run.
    pub fn pipeline(&self) -> PipelineConfig {
        let k = &self.keywords;
        PipelineConfig {
            tau: k.tau,
            scheme: k.scheme,
            min_doc_freq: k.min_doc_freq,
            threshold_method: k.threshold_method,
            prior: k.prior,
            train: self.train.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse("experiment = \"verify_identities\"").unwrap();
        assert_eq!(c.identities.instances, 100);
        assert_eq!(c.seeds, [0]);
    }

    #[test]
    fn bad_loss_name_points_at_field() {
        let err = parse("experiment = \"verify_identities\"\nlosses = [\"sigmoid\", \"sigmoidd\"]\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("losses"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("experiment = \"noise_sweep\"\n[train]\nepoch = 3\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("epoch"), "{err}");
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let err = parse("experiment = \"noise_sweep\"\n[noise]\ngrid = []\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn grid_cells_are_validated() {
        let err = parse("experiment = \"noise_sweep\"\n[noise]\ngrid = [[0.3, 0.7]]\n").unwrap_err();
        assert!(err.to_string().contains("noise.grid[0]"), "{err}");
    }

    #[test]
    fn seeds_must_be_non_empty() {
        assert!(parse("experiment = \"pu_demo\"\nseeds = []\n").is_err());
    }

    #[test]
    fn breakeven_needs_prior() {
        assert!(parse("experiment = \"keywords\"\n").is_ok());
        assert!(parse("experiment = \"keywords\"\n[keywords]\nthreshold_method = \"breakeven\"\n").is_err());
        let c = parse("experiment = \"keywords\"\n[keywords]\nprior = 0.3\n").unwrap();
        assert_eq!(c.pipeline().prior, Some(0.3));
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(
            &path,
            "experiment = \"keywords\"\noutput_dir = \"o\"\n[keywords]\nprior = 0.3\ncorpus = \"c.jsonl\"\n",
        )
        .unwrap();
        let c = ExperimentConfig::load(&path).unwrap();
        assert_eq!(c.output_dir, dir.path().join("o"));
        assert_eq!(c.keywords.corpus, Some(dir.path().join("c.jsonl")));
    }
}
