//! The mini-corpus, keyword list and default configs shipped with the crate.

use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::text::{Corpus, KeywordSet};

/// 400 documents on two synthetic topics; 30% of each split is positive.
pub const CORPUS_JSONL: &str = include_str!("../../../assets/mini_corpus.jsonl");
/// Ten keywords for the positive topic.
pub const KEYWORDS_TXT: &str = include_str!("../../../assets/keywords.txt");
/// Share of positives in every split of the bundled corpus.
pub const CORPUS_PRIOR: f64 = 0.3;

pub fn corpus() -> Result<Corpus> {
    Corpus::from_jsonl(CORPUS_JSONL, Path::new("<bundled>/mini_corpus.jsonl"))
}

pub fn keywords() -> Result<KeywordSet> {
    KeywordSet::from_text(KEYWORDS_TXT)
}

/// The default config file of `kind`, as TOML text.
pub fn config_text(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::VerifyIdentities => include_str!("../../../configs/verify_identities.toml"),
        ExperimentKind::NoiseSweep => include_str!("../../../configs/noise_sweep.toml"),
        ExperimentKind::LossCompare => include_str!("../../../configs/loss_compare.toml"),
        ExperimentKind::PuDemo => include_str!("../../../configs/pu_demo.toml"),
        ExperimentKind::UuDemo => include_str!("../../../configs/uu_demo.toml"),
        ExperimentKind::Keywords => include_str!("../../../configs/keywords.toml"),
    }
}

/// The three-purity AUC sweep used to check that the clean risk gap shrinks
/// as the pseudo-labels get cleaner.
pub const PURITY_TREND_TOML: &str = include_str!("../../../configs/purity_trend.toml");

/// Parsed default config of `kind`, writing to `out/<experiment>`.
pub fn default_config(kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_toml(config_text(kind), Path::new("<bundled>"))?;
    cfg.output_dir = PathBuf::from("out").join(kind.name());
    Ok(cfg)
}

pub fn purity_trend_config() -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_toml(PURITY_TREND_TOML, Path::new("<bundled>"))?;
    cfg.output_dir = PathBuf::from("out/purity_trend");
    Ok(cfg)
}
