//! Surrogate risks, their corrupted-label decompositions, and evaluation metrics.
//!
//! Exact risks take the scorer's values on the support of a
//! [`DiscreteBinaryDistribution`] (see [`DiscreteBinaryDistribution::scores_of`]),
//! so that expectations are finite sums and identities can be checked to
//! rounding error.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{corrupt_distribution, DiscreteBinaryDistribution, Label, McdParams, SampleSet};
use crate::error::{Error, Result};
use crate::loss::{LossKind, LossSpec};
use crate::scorer::Score;

/// Pair budget for exact pairwise sums; larger problems are subsampled.
pub const EXACT_PAIR_LIMIT: u64 = 10_000_000;

/// Fixed seed for pair subsampling so reports are reproducible.
const PAIR_SUBSAMPLE_SEED: u64 = 0x5eed_a0c0;

/// How a risk value was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    Exact,
    Samples {
        n_pos: usize,
        n_neg: usize,
        /// Number of (pos, neg) pairs actually evaluated, for pairwise risks.
        #[serde(skip_serializing_if = "Option::is_none")]
        pairs: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskMeta {
    pub loss: String,
    pub pi_corr_pos: Option<f64>,
    pub pi_corr_neg: Option<f64>,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub value: f64,
    pub components: BTreeMap<String, f64>,
    pub meta: RiskMeta,
}

/// Corrupted risk versus its decomposition into a scaled clean risk plus
/// excess terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub components: BTreeMap<String, f64>,
    pub meta: RiskMeta,
}

impl DecompositionCheck {
    /// Sum of the excess terms.
    pub fn excess(&self) -> f64 {
        self.components["excess"]
    }

    /// `K (1 - pi_p + pi_n) / 2` when the loss is symmetric.
    pub fn expected_symmetric_excess(&self) -> Option<f64> {
        self.components.get("expected_symmetric_excess").copied()
    }
}

fn components<const N: usize>(items: [(&str, f64); N]) -> BTreeMap<String, f64> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// `(1/2) [mean l(s_pos) + mean l(-s_neg)]` with its two terms.
pub fn ber_risk_from_scores(loss: LossKind, pos: &[f64], neg: &[f64]) -> Result<(f64, f64, f64)> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("both score sets must be non-empty"));
    }
    let pos_term = mean(pos.iter().map(|&s| loss.value(s)), pos.len());
    let neg_term = mean(neg.iter().map(|&s| loss.value(-s)), neg.len());
    Ok((0.5 * (pos_term + neg_term), pos_term, neg_term))
}

/// Mean pairwise loss `l(s_i - s_j)` over all (pos, neg) pairs, or over a
/// uniform subsample above [`EXACT_PAIR_LIMIT`]. Returns `(value, pairs)`.
pub fn auc_risk_from_scores(loss: LossKind, pos: &[f64], neg: &[f64]) -> Result<(f64, u64)> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("both score sets must be non-empty"));
    }
    let total = pos.len() as u64 * neg.len() as u64;
    if total <= EXACT_PAIR_LIMIT {
        let sum: f64 = pos
            .iter()
            .map(|&a| neg.iter().map(|&b| loss.value(a - b)).sum::<f64>())
            .sum();
        return Ok((sum / total as f64, total));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SUBSAMPLE_SEED);
    let mut sum = 0.0;
    for _ in 0..EXACT_PAIR_LIMIT {
        let i = rng.random_range(0..pos.len());
        let j = rng.random_range(0..neg.len());
        sum += loss.value(pos[i] - neg[j]);
    }
    Ok((sum / EXACT_PAIR_LIMIT as f64, EXACT_PAIR_LIMIT))
}

fn score_set(set: &SampleSet, g: &impl Score) -> Result<Vec<f64>> {
    if set.is_empty() {
        return Err(Error::invalid(format!("{} sample set is empty", set.origin.name())));
    }
    let scores: Vec<f64> = set.points.iter().map(|x| g.score(x)).collect();
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scorer produced a non-finite score"));
    }
    Ok(scores)
}

/// Empirical BER risk treating `set_pos` as positive and `set_neg` as negative.
/// Needs no knowledge of the contamination proportions.
pub fn empirical_ber_risk(
    loss: &LossSpec,
    set_pos: &SampleSet,
    set_neg: &SampleSet,
    g: &impl Score,
) -> Result<RiskReport> {
    let pos = score_set(set_pos, g)?;
    let neg = score_set(set_neg, g)?;
    let (value, pos_term, neg_term) = ber_risk_from_scores(loss.kind, &pos, &neg)?;
    Ok(RiskReport {
        value,
        components: components([("pos_term", pos_term), ("neg_term", neg_term)]),
        meta: RiskMeta {
            loss: loss.name.clone(),
            pi_corr_pos: None,
            pi_corr_neg: None,
            evaluation: Evaluation::Samples {
                n_pos: pos.len(),
                n_neg: neg.len(),
                pairs: None,
            },
        },
    })
}

/// Empirical pairwise (AUC) risk treating `set_pos` as positive.
pub fn empirical_auc_risk(
    loss: &LossSpec,
    set_pos: &SampleSet,
    set_neg: &SampleSet,
    g: &impl Score,
) -> Result<RiskReport> {
    let pos = score_set(set_pos, g)?;
    let neg = score_set(set_neg, g)?;
    let (value, pairs) = auc_risk_from_scores(loss.kind, &pos, &neg)?;
    Ok(RiskReport {
        value,
        components: components([("pairwise_term", value)]),
        meta: RiskMeta {
            loss: loss.name.clone(),
            pi_corr_pos: None,
            pi_corr_neg: None,
            evaluation: Evaluation::Samples {
                n_pos: pos.len(),
                n_neg: neg.len(),
                pairs: Some(pairs),
            },
        },
    })
}

fn check_scores(dist: &DiscreteBinaryDistribution, scores: &[f64]) -> Result<()> {
    if scores.len() != dist.len() {
        return Err(Error::invalid(format!(
            "{} scores for a support of size {}",
            scores.len(),
            dist.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores must be finite"));
    }
    Ok(())
}

/// `E_w[l(sign * g)]` under weights `w` over the support.
fn expect(weights: &[f64], scores: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    weights.iter().zip(scores).map(|(&w, &s)| w * f(s)).sum()
}

/// `E_a E_b [f(g(x_a) - g(x_b))]`.
fn expect_pairs(a: &[f64], b: &[f64], scores: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    a.iter()
        .zip(scores)
        .map(|(&wa, &sa)| wa * b.iter().zip(scores).map(|(&wb, &sb)| wb * f(sa - sb)).sum::<f64>())
        .sum()
}

fn exact_meta(loss: &LossSpec, params: Option<&McdParams>) -> RiskMeta {
    RiskMeta {
        loss: loss.name.clone(),
        pi_corr_pos: params.map(|p| p.pi_corr_pos()),
        pi_corr_neg: params.map(|p| p.pi_corr_neg()),
        evaluation: Evaluation::Exact,
    }
}

/// Clean BER risk `(1/2)(E_P[l(g)] + E_N[l(-g)])`.
pub fn exact_ber_risk(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
) -> Result<RiskReport> {
    check_scores(dist, scores_on_support)?;
    let k = loss.kind;
    let pos_term = expect(dist.p_pos(), scores_on_support, |s| k.value(s));
    let neg_term = expect(dist.p_neg(), scores_on_support, |s| k.value(-s));
    Ok(RiskReport {
        value: 0.5 * (pos_term + neg_term),
        components: components([("pos_term", pos_term), ("neg_term", neg_term)]),
        meta: exact_meta(loss, None),
    })
}

/// Clean classification risk `prior E_P[l(g)] + (1 - prior) E_N[l(-g)]`.
pub fn exact_cer_risk(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
) -> Result<RiskReport> {
    check_scores(dist, scores_on_support)?;
    let k = loss.kind;
    let prior = dist.class_prior();
    let pos_term = expect(dist.p_pos(), scores_on_support, |s| k.value(s));
    let neg_term = expect(dist.p_neg(), scores_on_support, |s| k.value(-s));
    Ok(RiskReport {
        value: prior * pos_term + (1.0 - prior) * neg_term,
        components: components([("pos_term", pos_term), ("neg_term", neg_term), ("class_prior", prior)]),
        meta: exact_meta(loss, None),
    })
}

/// Clean AUC risk `E_P E_N [l(g(x_P) - g(x_N))]`.
pub fn exact_auc_risk(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
) -> Result<RiskReport> {
    check_scores(dist, scores_on_support)?;
    let k = loss.kind;
    let value = expect_pairs(dist.p_pos(), dist.p_neg(), scores_on_support, |d| k.value(d));
    Ok(RiskReport {
        value,
        components: components([("pairwise_term", value)]),
        meta: exact_meta(loss, None),
    })
}

/// BER risk computed on the corrupted densities, treating corrupted labels as clean.
pub fn exact_corrupted_ber_risk(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
    params: &McdParams,
) -> Result<RiskReport> {
    check_scores(dist, scores_on_support)?;
    let (cp, cn) = corrupt_distribution(dist, params)?;
    let k = loss.kind;
    let pos_term = expect(&cp, scores_on_support, |s| k.value(s));
    let neg_term = expect(&cn, scores_on_support, |s| k.value(-s));
    Ok(RiskReport {
        value: 0.5 * (pos_term + neg_term),
        components: components([("pos_term", pos_term), ("neg_term", neg_term)]),
        meta: exact_meta(loss, Some(params)),
    })
}

/// AUC risk computed on the corrupted densities.
pub fn exact_corrupted_auc_risk(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
    params: &McdParams,
) -> Result<RiskReport> {
    check_scores(dist, scores_on_support)?;
    let (cp, cn) = corrupt_distribution(dist, params)?;
    let k = loss.kind;
    let value = expect_pairs(&cp, &cn, scores_on_support, |d| k.value(d));
    Ok(RiskReport {
        value,
        components: components([("pairwise_term", value)]),
        meta: exact_meta(loss, Some(params)),
    })
}

fn symmetric_excess(loss: &LossSpec, params: &McdParams) -> Option<f64> {
    loss.symmetry_constant
        .map(|k| k * (1.0 - params.pi_corr_pos() + params.pi_corr_neg()) / 2.0)
}

/// Corrupted BER risk against `(pi_p - pi_n) R_BER + (pi_n E_P[gamma] + (1 - pi_p) E_N[gamma]) / 2`.
pub fn ber_decomposition_check(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
    params: &McdParams,
) -> Result<DecompositionCheck> {
    let lhs = exact_corrupted_ber_risk(loss, dist, scores_on_support, params)?.value;
    let clean = exact_ber_risk(loss, dist, scores_on_support)?.value;
    let k = loss.kind;
    let (pp, pn) = (params.pi_corr_pos(), params.pi_corr_neg());
    let gamma_pos = expect(dist.p_pos(), scores_on_support, |s| k.gamma(s));
    let gamma_neg = expect(dist.p_neg(), scores_on_support, |s| k.gamma(s));
    let excess_pos = pn * gamma_pos / 2.0;
    let excess_neg = (1.0 - pp) * gamma_neg / 2.0;
    let excess = excess_pos + excess_neg;
    let slope = params.gap();
    let rhs = slope * clean + excess;
    let mut comps = components([
        ("clean_risk", clean),
        ("slope", slope),
        ("excess_pos", excess_pos),
        ("excess_neg", excess_neg),
        ("excess", excess),
    ]);
    if let Some(e) = symmetric_excess(loss, params) {
        comps.insert("expected_symmetric_excess".into(), e);
    }
    Ok(DecompositionCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        components: comps,
        meta: exact_meta(loss, Some(params)),
    })
}

/// Corrupted AUC risk against the scaled clean AUC risk plus three excess terms
/// built from `gamma(z, z') = l(z - z') + l(z' - z)`.
pub fn auc_decomposition_check(
    loss: &LossSpec,
    dist: &DiscreteBinaryDistribution,
    scores_on_support: &[f64],
    params: &McdParams,
) -> Result<DecompositionCheck> {
    let lhs = exact_corrupted_auc_risk(loss, dist, scores_on_support, params)?.value;
    let clean = exact_auc_risk(loss, dist, scores_on_support)?.value;
    let k = loss.kind;
    let (pp, pn) = (params.pi_corr_pos(), params.pi_corr_neg());
    let (p, n) = (dist.p_pos(), dist.p_neg());
    let gamma = |d: f64| k.gamma(d);
    let excess_pn = (1.0 - pp) * pn * expect_pairs(p, n, scores_on_support, gamma);
    let excess_pp = pp * pn / 2.0 * expect_pairs(p, p, scores_on_support, gamma);
    let excess_nn = (1.0 - pp) * (1.0 - pn) / 2.0 * expect_pairs(n, n, scores_on_support, gamma);
    let excess = excess_pn + excess_pp + excess_nn;
    let slope = params.gap();
    let rhs = slope * clean + excess;
    let mut comps = components([
        ("clean_risk", clean),
        ("slope", slope),
        ("excess_pos_neg", excess_pn),
        ("excess_pos_pos", excess_pp),
        ("excess_neg_neg", excess_nn),
        ("excess", excess),
    ]);
    if let Some(e) = symmetric_excess(loss, params) {
        comps.insert("expected_symmetric_excess".into(), e);
    }
    Ok(DecompositionCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        components: comps,
        meta: exact_meta(loss, Some(params)),
    })
}

/// Area under the ROC curve via the rank-sum statistic; ties count one half.
///
/// The rank sum is accumulated in integers (twice the mid-rank), so the
/// result is bit-identical to counting `2 * wins + ties` over all pairs and
/// dividing by `2 * n_pos * n_neg`.
pub fn auc_score(scores_pos: &[f64], scores_neg: &[f64]) -> Result<f64> {
    if scores_pos.is_empty() || scores_neg.is_empty() {
        return Err(Error::invalid("auc_score needs non-empty positive and negative scores"));
    }
    if scores_pos.iter().chain(scores_neg).any(|s| s.is_nan()) {
        return Err(Error::invalid("auc_score got a NaN score"));
    }
    let mut all: Vec<(f64, bool)> = scores_pos
        .iter()
        .map(|&s| (s, true))
        .chain(scores_neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (np, nn) = (scores_pos.len() as u128, scores_neg.len() as u128);
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i + 1;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        // ranks i+1..=j share the mid-rank (i + 1 + j) / 2
        let pos_in_group = all[i..j].iter().filter(|e| e.1).count() as u128;
        twice_rank_sum += pos_in_group * (i as u128 + 1 + j as u128);
        i = j;
    }
    let twice_u = twice_rank_sum - np * (np + 1);
    Ok(twice_u as f64 / (2 * np * nn) as f64)
}

/// Confusion-matrix metrics for +1/-1 predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub cer: f64,
    /// Undefined (None) unless the truth contains both classes.
    pub ber: Option<f64>,
    pub precision: f64,
    pub recall: Option<f64>,
    /// Undefined (None) unless the truth contains both classes.
    pub f1: Option<f64>,
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

pub fn classification_metrics(predicted: &[Label], truth: &[Label]) -> Result<ClassificationMetrics> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("no labels to evaluate"));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (Label::Pos, Label::Pos) => tp += 1,
            (Label::Pos, Label::Neg) => fp += 1,
            (Label::Neg, Label::Neg) => tn += 1,
            (Label::Neg, Label::Pos) => fn_ += 1,
        }
    }
    let n = truth.len() as f64;
    let positives = tp + fn_;
    let negatives = tn + fp;
    let cer = (fp + fn_) as f64 / n;
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = (positives > 0).then(|| tp as f64 / positives as f64);
    let both = positives > 0 && negatives > 0;
    let ber = both.then(|| 0.5 * (fn_ as f64 / positives as f64 + fp as f64 / negatives as f64));
    let f1 = match (both, recall) {
        (true, Some(r)) if precision + r > 0.0 => Some(2.0 * precision * r / (precision + r)),
        (true, Some(_)) => Some(0.0),
        _ => None,
    };
    Ok(ClassificationMetrics {
        cer,
        ber,
        precision,
        recall,
        f1,
        true_pos: tp,
        false_pos: fp,
        true_neg: tn,
        false_neg: fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_mcd, Origin};
    use crate::loss::LossKind::*;

    fn two_point() -> DiscreteBinaryDistribution {
        DiscreteBinaryDistribution::on_line(vec![0.8, 0.2], vec![0.3, 0.7], 0.5).unwrap()
    }

    fn set(scores: &[f64], origin: Origin) -> SampleSet {
        SampleSet::new(scores.iter().map(|&s| vec![s]).collect(), origin, None).unwrap()
    }

    fn identity(x: &[f64]) -> f64 {
        x[0]
    }

    fn sigmoid_loss(z: f64) -> f64 {
        1.0 / (1.0 + z.exp())
    }

    #[test]
    fn empirical_ber_examples() {
        let zo = ZeroOne.spec();
        let p = set(&[0.5, 2.0], Origin::CorrPos);
        let n = set(&[-1.0, -0.1], Origin::CorrNeg);
        assert_eq!(empirical_ber_risk(&zo, &p, &n, &identity).unwrap().value, 0.0);
        let constant = |_: &[f64]| 3.0;
        assert_eq!(empirical_ber_risk(&zo, &p, &n, &constant).unwrap().value, 0.5);
        let one = set(&[1.0], Origin::CorrPos);
        let r = empirical_ber_risk(&Sigmoid.spec(), &one, &set(&[1.0], Origin::CorrNeg), &identity).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
        assert!((r.components["pos_term"] - 0.26894).abs() < 1e-5);
        assert!((r.value - 0.5 * (r.components["pos_term"] + r.components["neg_term"])).abs() <= 1e-12);
        let empty = set(&[], Origin::CorrNeg);
        assert!(empirical_ber_risk(&zo, &p, &empty, &identity).is_err());
    }

    #[test]
    fn empirical_auc_examples() {
        let p = set(&[0.9, 0.4], Origin::CorrPos);
        let n = set(&[0.4, 0.1], Origin::CorrNeg);
        let r = empirical_auc_risk(&ZeroOne.spec(), &p, &n, &identity).unwrap();
        assert_eq!(r.value, 0.125);
        let constant = |_: &[f64]| -2.0;
        for k in [ZeroOne, Ramp, Sigmoid, Unhinged] {
            let r = empirical_auc_risk(&k.spec(), &p, &n, &constant).unwrap();
            assert!((r.value - k.symmetry_constant().unwrap() / 2.0).abs() < 1e-15);
        }
        let r = empirical_auc_risk(
            &Sigmoid.spec(),
            &set(&[1.0], Origin::CorrPos),
            &set(&[0.0], Origin::CorrNeg),
            &identity,
        )
        .unwrap();
        assert!((r.value - sigmoid_loss(1.0)).abs() < 1e-15);
        assert!((r.value - 0.26894).abs() < 1e-5);
    }

    #[test]
    fn exact_ber_examples() {
        let d = two_point();
        let g = [1.0, -1.0];
        let sig = exact_ber_risk(&Sigmoid.spec(), &d, &g).unwrap();
        // independent hand evaluation
        let pos = 0.8 * sigmoid_loss(1.0) + 0.2 * sigmoid_loss(-1.0);
        let neg = 0.3 * sigmoid_loss(-1.0) + 0.7 * sigmoid_loss(1.0);
        assert!((sig.value - 0.5 * (pos + neg)).abs() < 1e-15);
        assert!((sig.value - 0.38447).abs() < 1e-5);
        assert!((pos - 0.36136).abs() < 1e-5 && (neg - 0.40758).abs() < 1e-5);
        let zo = exact_ber_risk(&ZeroOne.spec(), &d, &g).unwrap();
        assert!((zo.value - 0.25).abs() < 1e-15);
        assert_eq!(exact_ber_risk(&ZeroOne.spec(), &d, &[0.0, 0.0]).unwrap().value, 0.5);
        assert!(exact_ber_risk(&ZeroOne.spec(), &d, &[0.0]).is_err());
    }

    #[test]
    fn exact_cer_examples() {
        let d = two_point();
        let g = [1.0, -1.0];
        for k in LossKind::ALL {
            let cer = exact_cer_risk(&k.spec(), &d, &g).unwrap().value;
            let ber = exact_ber_risk(&k.spec(), &d, &g).unwrap().value;
            assert!((cer - ber).abs() < 1e-15, "{k}");
        }
        assert!((exact_cer_risk(&ZeroOne.spec(), &d, &g).unwrap().value - 0.25).abs() < 1e-15);
        let skewed = DiscreteBinaryDistribution::on_line(vec![0.8, 0.2], vec![0.3, 0.7], 0.99).unwrap();
        let v = exact_cer_risk(&ZeroOne.spec(), &skewed, &[1.0, 1.0]).unwrap().value;
        assert!((v - 0.01).abs() < 1e-12);
    }

    #[test]
    fn ber_decomposition_examples() {
        let d = two_point();
        let g = [1.0, -1.0];
        let params = McdParams::new(0.9, 0.2).unwrap();
        let c = ber_decomposition_check(&Sigmoid.spec(), &d, &g, &params).unwrap();
        assert!((c.lhs - 0.41913).abs() < 1e-5);
        let clean = exact_ber_risk(&Sigmoid.spec(), &d, &g).unwrap().value;
        assert!((c.rhs - (0.7 * clean + 0.15)).abs() < 1e-12);
        assert!(c.residual <= 1e-12);
        assert!((c.excess() - 0.15).abs() <= 1e-12);
        assert!((c.expected_symmetric_excess().unwrap() - 0.15).abs() < 1e-15);

        let l = ber_decomposition_check(&Logistic.spec(), &d, &g, &params).unwrap();
        assert!(l.residual <= 1e-12);
        assert!(l.expected_symmetric_excess().is_none());
        // excess varies with the scorer for a non-symmetric loss
        let l2 = ber_decomposition_check(&Logistic.spec(), &d, &[0.3, 2.0], &params).unwrap();
        assert!((l.excess() - l2.excess()).abs() > 1e-3);

        let clean_params = McdParams::clean();
        let c = ber_decomposition_check(&Logistic.spec(), &d, &g, &clean_params).unwrap();
        let clean = exact_ber_risk(&Logistic.spec(), &d, &g).unwrap().value;
        assert_eq!(c.excess(), 0.0);
        assert!((c.lhs - clean).abs() < 1e-15 && (c.rhs - clean).abs() < 1e-15);
    }

    #[test]
    fn auc_decomposition_examples() {
        let d = two_point();
        let g = [1.0, -1.0];
        let params = McdParams::new(0.9, 0.2).unwrap();
        let c = auc_decomposition_check(&Sigmoid.spec(), &d, &g, &params).unwrap();
        assert!(c.residual <= 1e-12);
        assert!((c.excess() - 0.15).abs() <= 1e-12);
        let s = auc_decomposition_check(&Squared.spec(), &d, &g, &params).unwrap();
        assert!(s.residual <= 1e-12);
        let clean = auc_decomposition_check(&Squared.spec(), &d, &g, &McdParams::clean()).unwrap();
        let risk = exact_auc_risk(&Squared.spec(), &d, &g).unwrap().value;
        assert!((clean.lhs - risk).abs() < 1e-15);
    }

    fn enumerate_auc(pos: &[f64], neg: &[f64]) -> f64 {
        let mut twice = 0u64;
        for &a in pos {
            for &b in neg {
                twice += if a > b {
                    2
                } else if a == b {
                    1
                } else {
                    0
                };
            }
        }
        twice as f64 / (2 * pos.len() * neg.len()) as f64
    }

    #[test]
    fn auc_score_examples() {
        assert_eq!(auc_score(&[0.9, 0.4], &[0.4, 0.1]).unwrap(), 0.875);
        assert_eq!(auc_score(&[1.0; 5], &[1.0; 3]).unwrap(), 0.5);
        assert_eq!(auc_score(&[3.0, 4.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(auc_score(&[1.0, 2.0], &[3.0]).unwrap(), 0.0);
        assert!(auc_score(&[], &[1.0]).is_err());
        assert!(auc_score(&[f64::NAN], &[1.0]).is_err());
        assert_eq!(
            auc_score(&[0.9, 0.4], &[0.4, 0.1]).unwrap(),
            enumerate_auc(&[0.9, 0.4], &[0.4, 0.1])
        );
    }

    #[test]
    fn metrics_examples() {
        use Label::{Neg as N, Pos as P};
        let m = classification_metrics(&[P, N, N], &[P, P, N]).unwrap();
        assert_eq!(m.recall, Some(0.5));
        assert_eq!(m.precision, 1.0);
        assert!((m.f1.unwrap() - 2.0 / 3.0).abs() < 1e-15);

        let mut truth = vec![P; 99];
        truth.push(N);
        let m = classification_metrics(&[P; 100], &truth).unwrap();
        assert!((m.cer - 0.01).abs() < 1e-15);
        assert_eq!(m.ber, Some(0.5));

        let m = classification_metrics(&truth, &truth).unwrap();
        assert_eq!((m.cer, m.ber, m.f1), (0.0, Some(0.0), Some(1.0)));

        assert!(classification_metrics(&[P], &[P, N]).is_err());
        let single = classification_metrics(&[P, N], &[N, N]).unwrap();
        assert_eq!(single.ber, None);
        assert_eq!(single.f1, None);
        let none_predicted = classification_metrics(&[N, N], &[P, N]).unwrap();
        assert_eq!(none_predicted.f1, Some(0.0));
    }

    #[test]
    fn report_serializes_with_fixed_fields() {
        let d = two_point();
        let c = ber_decomposition_check(&Sigmoid.spec(), &d, &[1.0, -1.0], &McdParams::new(0.9, 0.2).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        for key in ["lhs", "rhs", "residual", "components", "meta"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["meta"]["evaluation"], "exact");
        let r = exact_ber_risk(&Sigmoid.spec(), &d, &[1.0, -1.0]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["value", "components", "meta"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn empirical_risk_converges_to_exact() {
        let d = DiscreteBinaryDistribution::on_line(vec![0.5, 0.3, 0.2], vec![0.1, 0.3, 0.6], 0.5).unwrap();
        let g = |x: &[f64]| 1.0 - 0.9 * x[0];
        let scores = d.scores_of(&g);
        let n = 100_000;
        let (p, q) = sample_mcd(&d, &McdParams::clean(), n, n, 99).unwrap();
        for k in [Sigmoid, Logistic, Squared] {
            let spec = k.spec();
            let exact = exact_ber_risk(&spec, &d, &scores).unwrap().value;
            let emp = empirical_ber_risk(&spec, &p, &q, &g).unwrap().value;
            // standard error of (1/2)(mean_a + mean_b)
            let var = |w: &[f64], sign: f64| {
                let m = expect(w, &scores, |s| k.value(sign * s));
                expect(w, &scores, |s| (k.value(sign * s) - m).powi(2))
            };
            let se = 0.5 * ((var(d.p_pos(), 1.0) + var(d.p_neg(), -1.0)) / n as f64).sqrt();
            assert!((emp - exact).abs() <= 5.0 * se, "{k}: {emp} vs {exact} (se {se})");
        }
    }
}
