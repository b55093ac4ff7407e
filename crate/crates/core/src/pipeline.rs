//! Classification from relevant keywords and unlabeled documents.
//!
//! Unlabeled training documents are split into pseudo-positive and
//! pseudo-negative sets by their cosine similarity to the keywords. A ranker
//! is then trained by pairwise (AUC) risk minimization on that noisy split,
//! and finally converted into a classifier by a threshold picked on unlabeled
//! validation scores.

use serde::{Deserialize, Serialize};

use crate::distributions::{Label, Origin, SampleSet};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::risk::{auc_score, classification_metrics, ClassificationMetrics};
use crate::scorer::{Score, Scorer};
use crate::text::{cosine, l2_normalize, Corpus, Document, KeywordSet, Scheme, Split, Vectorizer};
use crate::threshold::{classify_score, default_threshold, heuristic_threshold, select_threshold, ThresholdResult};
use crate::trainer::{train_auc, TrainConfig};

/// The two pseudo-labeled sets with the ids of their documents.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabels {
    pub positive: SampleSet,
    pub negative: SampleSet,
    pub positive_ids: Vec<String>,
    pub negative_ids: Vec<String>,
}

/// Unit-norm feature vector of a document.
pub fn document_features(vectorizer: &Vectorizer, doc: &Document) -> Vec<f64> {
    let mut v = vectorizer.transform(&doc.text);
    l2_normalize(&mut v);
    v
}

/// Documents whose cosine similarity to the keyword indicator exceeds `tau`
/// become pseudo-positive, the rest pseudo-negative.
///
/// Hidden labels are passed through only when every document carries one.
pub fn pseudo_label(
    keywords: &KeywordSet,
    unlabeled: &[&Document],
    vectorizer: &Vectorizer,
    tau: f64,
) -> Result<PseudoLabels> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::config(format!("tau must lie in [0, 1], got {tau}")));
    }
    let kw = vectorizer.keyword_vector(keywords)?;
    let with_labels = unlabeled.iter().all(|d| d.label.is_some());
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    let (mut pos_labels, mut neg_labels) = (Vec::new(), Vec::new());
    let (mut pos_ids, mut neg_ids) = (Vec::new(), Vec::new());
    for doc in unlabeled {
        let x = document_features(vectorizer, doc);
        if cosine(&x, &kw) > tau {
            pos.push(x);
            pos_labels.extend(doc.label);
            pos_ids.push(doc.id.clone());
        } else {
            neg.push(x);
            neg_labels.extend(doc.label);
            neg_ids.push(doc.id.clone());
        }
    }
    if pos.is_empty() {
        return Err(Error::DegenerateSplit {
            tau,
            side: "pseudo-positive",
        });
    }
    if neg.is_empty() {
        return Err(Error::DegenerateSplit {
            tau,
            side: "pseudo-negative",
        });
    }
    Ok(PseudoLabels {
        positive: SampleSet::new(pos, Origin::PseudoPos, with_labels.then_some(pos_labels))?,
        negative: SampleSet::new(neg, Origin::PseudoNeg, with_labels.then_some(neg_labels))?,
        positive_ids: pos_ids,
        negative_ids: neg_ids,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdChoice {
    Breakeven,
    Heuristic,
    Default,
}

impl std::str::FromStr for ThresholdChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "breakeven" => Ok(ThresholdChoice::Breakeven),
            "heuristic" => Ok(ThresholdChoice::Heuristic),
            "default" => Ok(ThresholdChoice::Default),
            other => Err(Error::config(format!(
                "unknown threshold method `{other}` (expected breakeven, heuristic or default)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub tau: f64,
    pub scheme: Scheme,
    pub min_doc_freq: usize,
    pub threshold_method: ThresholdChoice,
    /// Known share of positives among unlabeled documents.
    pub prior: Option<f64>,
    pub train: TrainConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tau: 0.15,
            scheme: Scheme::TfIdf,
            min_doc_freq: 2,
            threshold_method: ThresholdChoice::Heuristic,
            prior: None,
            train: TrainConfig {
                objective: crate::trainer::Objective::Auc,
                loss: LossKind::Sigmoid,
                step_size: 0.05,
                epochs: 60,
                batch_size: 32,
                pair_batch: 128,
                ..TrainConfig::default()
            },
        }
    }
}

/// Test-split metrics at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEvaluation {
    pub threshold: ThresholdResult,
    pub metrics: ClassificationMetrics,
}

/// Precision and recall when the cutoff is chosen on the test scores themselves
/// with the known prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakevenCheck {
    pub beta: f64,
    pub precision: f64,
    pub recall: f64,
    pub n_test_pos: usize,
}

impl BreakevenCheck {
    pub fn gap(&self) -> f64 {
        (self.precision - self.recall).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n_test: usize,
    pub n_test_pos: usize,
    pub auc: f64,
    pub chosen: ThresholdEvaluation,
    /// The same ranker under every threshold rule that could be applied.
    pub comparison: Vec<ThresholdEvaluation>,
    pub breakeven: Option<BreakevenCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub vocabulary_size: usize,
    pub n_pseudo_pos: usize,
    pub n_pseudo_neg: usize,
    /// Share of true positives in the pseudo-positive set, when labels exist.
    pub empirical_pi_corr_pos: Option<f64>,
    pub empirical_pi_corr_neg: Option<f64>,
    /// `empirical_pi_corr_pos > empirical_pi_corr_neg`.
    pub guarantee_holds: Option<bool>,
    pub loss: LossKind,
    pub threshold: ThresholdResult,
    pub test: Option<TestReport>,
    pub scorer: Scorer,
    pub final_objective: f64,
    pub warnings: Vec<String>,
}

fn test_evaluation(scores: &[f64], truth: &[Label], threshold: ThresholdResult) -> Result<ThresholdEvaluation> {
    let predicted: Vec<Label> = scores.iter().map(|&s| classify_score(s, threshold.beta)).collect();
    Ok(ThresholdEvaluation {
        metrics: classification_metrics(&predicted, truth)?,
        threshold,
    })
}

/// pseudo-label -> AUC training -> threshold on validation -> test metrics.
pub fn run_pipeline(corpus: &Corpus, keywords: &KeywordSet, config: &PipelineConfig) -> Result<PipelineReport> {
    if corpus.is_empty() {
        return Err(Error::config("corpus is empty"));
    }
    let mut warnings = Vec::new();
    if !config.train.loss.is_symmetric() {
        warnings.push(format!(
            "loss `{}` is not symmetric: the pseudo-label noise is not guaranteed to leave the ranking objective's minimizer unchanged",
            config.train.loss
        ));
    }
    if let Some(p) = config.prior {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::config(format!("prior must lie in (0, 1), got {p}")));
        }
    }

    let vectorizer = Vectorizer::build(corpus, config.scheme, config.min_doc_freq)?;
    let train_docs = corpus.split(Split::TrainUnlabeled);
    if train_docs.is_empty() {
        return Err(Error::config("corpus has no train_unlabeled documents"));
    }
    let pseudo = pseudo_label(keywords, &train_docs, &vectorizer, config.tau)?;
    let pi_pos = pseudo.positive.positive_fraction();
    let pi_neg = pseudo.negative.positive_fraction();
    let guarantee_holds = pi_pos.zip(pi_neg).map(|(p, n)| p > n);
    if guarantee_holds == Some(false) {
        warnings.push(format!(
            "pseudo-positive purity {:.3} does not exceed pseudo-negative contamination {:.3}; the ranking guarantee is void",
            pi_pos.unwrap_or(f64::NAN),
            pi_neg.unwrap_or(f64::NAN)
        ));
    }

    let trace = train_auc(&pseudo.positive, &pseudo.negative, &config.train)?;
    let g = &trace.scorer;
    let score_docs = |docs: &[&Document]| -> Vec<f64> {
        docs.iter()
            .map(|d| g.score(&document_features(&vectorizer, d)))
            .collect()
    };

    let mut validation_docs = corpus.split(Split::ValidationUnlabeled);
    if validation_docs.is_empty() {
        warnings.push("no validation_unlabeled documents; thresholds use the training documents".into());
        validation_docs = train_docs.clone();
    }
    let validation_scores = score_docs(&validation_docs);
    let n_train = train_docs.len();
    let breakeven = config
        .prior
        .map(|p| select_threshold(&validation_scores, p))
        .transpose()?;
    let heuristic = heuristic_threshold(pseudo.positive.len(), n_train, &validation_scores)?;
    let default = default_threshold(&validation_scores)?;
    let threshold = match config.threshold_method {
        ThresholdChoice::Breakeven => breakeven
            .clone()
            .ok_or_else(|| Error::config("threshold method `breakeven` needs a known prior"))?,
        ThresholdChoice::Heuristic => heuristic.clone(),
        ThresholdChoice::Default => default.clone(),
    };
    if let Some(p) = config.prior {
        let natural = default.achieved_positive_fraction;
        if (natural - p).abs() > 0.1 {
            warnings.push(format!(
                "scores above 0 cover {natural:.3} of validation documents against a prior of {p:.3}; the default threshold is likely miscalibrated"
            ));
        }
    }

    let test_docs = corpus.split(Split::TestLabeled);
    let test = if test_docs.is_empty() {
        None
    } else {
        let scores = score_docs(&test_docs);
        let truth: Vec<Label> = test_docs.iter().map(|d| d.label.expect("validated")).collect();
        let (sp, sn): (Vec<_>, Vec<_>) = scores.iter().zip(&truth).partition(|(_, l)| l.is_pos());
        let sp: Vec<f64> = sp.into_iter().map(|(s, _)| *s).collect();
        let sn: Vec<f64> = sn.into_iter().map(|(s, _)| *s).collect();
        if sp.is_empty() || sn.is_empty() {
            return Err(Error::config("the labeled test split needs both classes"));
        }
        let auc = auc_score(&sp, &sn)?;
        let chosen = test_evaluation(&scores, &truth, threshold.clone())?;
        let mut comparison = Vec::new();
        for t in breakeven.iter().chain([&heuristic, &default]) {
            comparison.push(test_evaluation(&scores, &truth, t.clone())?);
        }
        let breakeven_check = match config.prior {
            Some(p) => {
                let t = select_threshold(&scores, p)?;
                let m = test_evaluation(&scores, &truth, t.clone())?.metrics;
                Some(BreakevenCheck {
                    beta: t.beta,
                    precision: m.precision,
                    recall: m.recall.unwrap_or(0.0),
                    n_test_pos: sp.len(),
                })
            }
            None => None,
        };
        Some(TestReport {
            n_test: truth.len(),
            n_test_pos: sp.len(),
            auc,
            chosen,
            comparison,
            breakeven: breakeven_check,
        })
    };

    Ok(PipelineReport {
        vocabulary_size: vectorizer.len(),
        n_pseudo_pos: pseudo.positive.len(),
        n_pseudo_neg: pseudo.negative.len(),
        empirical_pi_corr_pos: pi_pos,
        empirical_pi_corr_neg: pi_neg,
        guarantee_holds,
        loss: config.train.loss,
        threshold,
        test,
        final_objective: *trace.objectives.last().expect("epochs > 0"),
        scorer: trace.scorer,
        warnings,
    })
}
