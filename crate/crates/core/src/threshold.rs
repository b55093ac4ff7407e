//! Turning a ranking function into a classifier by choosing a score cutoff.

use serde::{Deserialize, Serialize};

use crate::distributions::Label;
use crate::error::{Error, Result};
use crate::scorer::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// Match the positive rate on validation scores to a known class prior.
    BreakevenKnownPrior,
    /// Use the pseudo-positive share of the unlabeled data as the prior.
    HeuristicPseudoRatio,
    /// `beta = 0`.
    DefaultZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub beta: f64,
    /// Share of validation scores strictly above `beta`.
    pub achieved_positive_fraction: f64,
    pub method: ThresholdMethod,
    /// Tied scores straddle the cutoff, so the requested fraction is unreachable.
    pub degenerate: bool,
}

fn positive_fraction(scores: &[f64], beta: f64) -> f64 {
    scores.iter().filter(|&&s| s > beta).count() as f64 / scores.len() as f64
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::invalid("no validation scores"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("validation scores must be finite"));
    }
    Ok(())
}

/// Pick `beta` so that the top `round(target_prior * n)` validation scores
/// lie strictly above it.
///
/// `beta` is the midpoint between the k-th and (k+1)-th largest scores, one
/// unit above the maximum for `k = 0`, and one unit below the minimum for
/// `k = n`. When every score is equal the cutoff goes below the minimum and the
/// result is marked degenerate.
pub fn select_threshold(scores_validation: &[f64], target_prior: f64) -> Result<ThresholdResult> {
    check_scores(scores_validation)?;
    if !(target_prior > 0.0 && target_prior < 1.0) {
        return Err(Error::invalid(format!(
            "target prior must lie in (0, 1), got {target_prior}"
        )));
    }
    let n = scores_validation.len();
    let mut sorted = scores_validation.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = ((target_prior * n as f64 + 0.5).floor() as usize).min(n);
    let (max, min) = (sorted[0], sorted[n - 1]);
    let all_equal = max == min;
    let beta = if all_equal && k > 0 {
        min - 1.0
    } else if k == 0 {
        max + 1.0
    } else if k == n {
        min - 1.0
    } else {
        0.5 * (sorted[k - 1] + sorted[k])
    };
    let straddled = k > 0 && k < n && sorted[k - 1] == sorted[k];
    Ok(ThresholdResult {
        beta,
        achieved_positive_fraction: positive_fraction(scores_validation, beta),
        method: ThresholdMethod::BreakevenKnownPrior,
        degenerate: straddled,
    })
}

/// Threshold at the pseudo-positive share `n_pseudo_pos / n_unlabeled`.
pub fn heuristic_threshold(
    n_pseudo_pos: usize,
    n_unlabeled: usize,
    scores_validation: &[f64],
) -> Result<ThresholdResult> {
    if n_pseudo_pos == 0 || n_pseudo_pos >= n_unlabeled {
        return Err(Error::invalid(format!(
            "pseudo-positive ratio {n_pseudo_pos}/{n_unlabeled} must lie strictly between 0 and 1"
        )));
    }
    let mut r = select_threshold(scores_validation, n_pseudo_pos as f64 / n_unlabeled as f64)?;
    r.method = ThresholdMethod::HeuristicPseudoRatio;
    Ok(r)
}

/// The baseline cutoff `beta = 0`.
pub fn default_threshold(scores_validation: &[f64]) -> Result<ThresholdResult> {
    check_scores(scores_validation)?;
    Ok(ThresholdResult {
        beta: 0.0,
        achieved_positive_fraction: positive_fraction(scores_validation, 0.0),
        method: ThresholdMethod::DefaultZero,
        degenerate: false,
    })
}

/// `+1` iff `g(x) > beta`; a score equal to `beta` is negative.
pub fn classify(g: &impl Score, beta: f64, x: &[f64]) -> Label {
    classify_score(g.score(x), beta)
}

pub fn classify_score(score: f64, beta: f64) -> Label {
    if score > beta {
        Label::Pos
    } else {
        Label::Neg
    }
}
