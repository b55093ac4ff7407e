//! Learning from corrupted binary labels with symmetric losses.
//!
//! When the two observed classes are mixtures of the clean class-conditionals
//! (mutually contaminated data), the corrupted BER and AUC risks equal the
//! clean risks scaled by `pi_p - pi_n` plus an excess term. For a symmetric
//! loss, `l(z) + l(-z) = K`, that excess is the constant `K (1 - pi_p + pi_n) / 2`,
//! so the corrupted and clean risks share their minimizers. This crate provides
//!
//! * [`loss`]: the surrogate loss catalog with symmetry metadata,
//! * [`distributions`]: contamination models, PU/UU constructors and samplers,
//! * [`risk`]: empirical and exact risks, the decomposition checks and metrics,
//! * [`trainer`]: gradient training of linear and small perceptron scorers,
//! * [`threshold`]: cutoffs that turn a ranker into a classifier,
//! * [`text`] and [`pipeline`]: keyword pseudo-labeling of unlabeled documents,
//! * [`experiments`]: the config-driven experiment runners behind the CLI.

pub mod bundled;
pub mod config;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod loss;
pub mod output;
pub mod pipeline;
pub mod risk;
pub mod scorer;
pub mod text;
pub mod threshold;
pub mod trainer;

pub use distributions::{
    corrupt_distribution, pu_params, sample_clean, sample_mcd, uu_params, DiscreteBinaryDistribution,
    GaussianPairConfig, Label, McdParams, Origin, SampleSet,
};
pub use error::{Error, Result};
pub use loss::{check_symmetry, eval_grad, eval_loss, symmetry_gap, LossKind, LossSpec};
pub use risk::{
    auc_decomposition_check, auc_score, ber_decomposition_check, classification_metrics, empirical_auc_risk,
    empirical_ber_risk, exact_auc_risk, exact_ber_risk, exact_cer_risk, DecompositionCheck, RiskReport,
};
pub use scorer::{ModelSpec, Score, Scorer};
pub use threshold::{classify, heuristic_threshold, select_threshold, ThresholdMethod, ThresholdResult};
pub use trainer::{
    brute_force_minimizer, finite_difference_check, train, train_auc, train_ber, Objective, TrainConfig, TrainTrace,
    TrainingObjective,
};

/// The guide chapters under `book/src`, compiled as doc-tests so the
/// snippets stay in sync with the code.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/losses.md")]
    pub mod losses {}
    #[doc = include_str!("../../../book/src/contamination.md")]
    pub mod contamination {}
    #[doc = include_str!("../../../book/src/risks.md")]
    pub mod risks {}
    #[doc = include_str!("../../../book/src/training.md")]
    pub mod training {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    pub mod thresholds {}
    #[doc = include_str!("../../../book/src/keywords.md")]
    pub mod keywords {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    pub mod experiments {}
}
