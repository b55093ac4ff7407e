//! Mutually contaminated data: two observed "classes" that are each a
//! mixture of the clean positive and negative class-conditionals.
//!
//! Finite-support distributions give exact expectations for oracle checks;
//! the samplers produce corrupted training sets with the true labels kept on
//! the side for evaluation only.

use std::fmt;
use std::io::Write;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt_num;
use crate::scorer::Score;

const PROB_TOL: f64 = 1e-12;

/// A binary label, serialized as `+1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Pos,
    Neg,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn is_pos(self) -> bool {
        self == Label::Pos
    }
}

impl TryFrom<i8> for Label {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Label::Pos),
            -1 => Ok(Label::Neg),
            other => Err(format!("label must be +1 or -1, got {other}")),
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", i8::from(*self))
    }
}

/// Mixture proportions of the two corrupted classes.
///
/// The corrupted-positive density is `pi_corr_pos * p(x|+) + (1 - pi_corr_pos) * p(x|-)`
/// and likewise for the corrupted negative with `pi_corr_neg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMcdParams")]
pub struct McdParams {
    pi_corr_pos: f64,
    pi_corr_neg: f64,
}

#[derive(Deserialize)]
struct RawMcdParams {
    pi_corr_pos: f64,
    pi_corr_neg: f64,
}

impl TryFrom<RawMcdParams> for McdParams {
    type Error = Error;

    fn try_from(raw: RawMcdParams) -> Result<Self> {
        McdParams::new(raw.pi_corr_pos, raw.pi_corr_neg)
    }
}

impl McdParams {
    pub fn new(pi_corr_pos: f64, pi_corr_neg: f64) -> Result<Self> {
        if !(pi_corr_pos > 0.0 && pi_corr_pos <= 1.0) {
            return Err(Error::invalid(format!(
                "pi_corr_pos must lie in (0, 1], got {pi_corr_pos}"
            )));
        }
        if !(0.0..1.0).contains(&pi_corr_neg) {
            return Err(Error::invalid(format!(
                "pi_corr_neg must lie in [0, 1), got {pi_corr_neg}"
            )));
        }
        if pi_corr_pos <= pi_corr_neg {
            return Err(Error::invalid(format!(
                "need pi_corr_pos > pi_corr_neg, got {pi_corr_pos} <= {pi_corr_neg}"
            )));
        }
        Ok(McdParams {
            pi_corr_pos,
            pi_corr_neg,
        })
    }

    pub fn clean() -> Self {
        McdParams {
            pi_corr_pos: 1.0,
            pi_corr_neg: 0.0,
        }
    }

    pub fn pi_corr_pos(&self) -> f64 {
        self.pi_corr_pos
    }

    pub fn pi_corr_neg(&self) -> f64 {
        self.pi_corr_neg
    }

    /// `pi_corr_pos - pi_corr_neg`, the slope linking corrupted and clean risks.
    pub fn gap(&self) -> f64 {
        self.pi_corr_pos - self.pi_corr_neg
    }

    pub fn is_clean(&self) -> bool {
        self.pi_corr_pos == 1.0 && self.pi_corr_neg == 0.0
    }
}

/// Positive-unlabeled data: labeled positives are clean, the unlabeled set
/// contains positives at rate `class_prior_unlabeled`.
pub fn pu_params(class_prior_unlabeled: f64) -> Result<McdParams> {
    if !(class_prior_unlabeled > 0.0 && class_prior_unlabeled < 1.0) {
        return Err(Error::invalid(format!(
            "unlabeled class prior must lie in (0, 1), got {class_prior_unlabeled}"
        )));
    }
    McdParams::new(1.0, class_prior_unlabeled)
}

/// Two unlabeled sets with class priors `pi_u > pi_u_prime`.
pub fn uu_params(pi_u: f64, pi_u_prime: f64) -> Result<McdParams> {
    if !(pi_u < 1.0 && pi_u_prime > 0.0 && pi_u > pi_u_prime) {
        return Err(Error::invalid(format!(
            "need 1 > pi_u > pi_u' > 0, got pi_u = {pi_u}, pi_u' = {pi_u_prime}"
        )));
    }
    McdParams::new(pi_u, pi_u_prime)
}

/// Class-conditional distributions over a finite support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBinaryDistribution {
    support: Vec<Vec<f64>>,
    p_pos: Vec<f64>,
    p_neg: Vec<f64>,
    class_prior: f64,
}

type Points = Vec<Vec<f64>>;

fn check_probabilities(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::invalid(format!("{what} has a negative or non-finite entry")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::invalid(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

impl DiscreteBinaryDistribution {
    pub fn new(support: Vec<Vec<f64>>, p_pos: Vec<f64>, p_neg: Vec<f64>, class_prior: f64) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("support is empty"));
        }
        if p_pos.len() != support.len() || p_neg.len() != support.len() {
            return Err(Error::invalid("probability vectors must match the support size"));
        }
        let dim = support[0].len();
        if support.iter().any(|x| x.len() != dim) {
            return Err(Error::invalid("support points have mixed dimensions"));
        }
        for (i, a) in support.iter().enumerate() {
            if support[..i].contains(a) {
                return Err(Error::invalid(format!("support point {i} is a duplicate")));
            }
        }
        check_probabilities(&p_pos, "p_pos")?;
        check_probabilities(&p_neg, "p_neg")?;
        if !(class_prior > 0.0 && class_prior < 1.0) {
            return Err(Error::invalid(format!(
                "class prior must lie in (0, 1), got {class_prior}"
            )));
        }
        Ok(DiscreteBinaryDistribution {
            support,
            p_pos,
            p_neg,
            class_prior,
        })
    }

    /// One-dimensional support `{0, 1, ..., n-1}`.
    pub fn on_line(p_pos: Vec<f64>, p_neg: Vec<f64>, class_prior: f64) -> Result<Self> {
        let support = (0..p_pos.len()).map(|i| vec![i as f64]).collect();
        Self::new(support, p_pos, p_neg, class_prior)
    }

    pub fn support(&self) -> &[Vec<f64>] {
        &self.support
    }

    pub fn p_pos(&self) -> &[f64] {
        &self.p_pos
    }

    pub fn p_neg(&self) -> &[f64] {
        &self.p_neg
    }

    pub fn class_prior(&self) -> f64 {
        self.class_prior
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Scores of `g` on each support point, in support order.
    pub fn scores_of(&self, g: &impl Score) -> Vec<f64> {
        self.support.iter().map(|x| g.score(x)).collect()
    }
}

/// Mixture densities `(p_corr_pos, p_corr_neg)` over the support of `clean`.
pub fn corrupt_distribution(clean: &DiscreteBinaryDistribution, params: &McdParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let McdParams {
        pi_corr_pos,
        pi_corr_neg,
    } = McdParams::new(params.pi_corr_pos, params.pi_corr_neg)?;
    let mix = |w: f64| -> Vec<f64> {
        clean
            .p_pos
            .iter()
            .zip(&clean.p_neg)
            .map(|(&p, &n)| w * p + (1.0 - w) * n)
            .collect()
    };
    Ok((mix(pi_corr_pos), mix(pi_corr_neg)))
}

/// Where a sample set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    CorrPos,
    CorrNeg,
    Unlabeled,
    PseudoPos,
    PseudoNeg,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::CorrPos => "corr_pos",
            Origin::CorrNeg => "corr_neg",
            Origin::Unlabeled => "unlabeled",
            Origin::PseudoPos => "pseudo_pos",
            Origin::PseudoNeg => "pseudo_neg",
        }
    }
}

/// Feature vectors drawn from one observed class.
///
/// `hidden_labels` carries ground truth for evaluation; learners never read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<Vec<f64>>,
    pub origin: Origin,
    pub hidden_labels: Option<Vec<Label>>,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>, origin: Origin, hidden_labels: Option<Vec<Label>>) -> Result<Self> {
        if let Some(labels) = &hidden_labels {
            if labels.len() != points.len() {
                return Err(Error::invalid(format!(
                    "{} hidden labels for {} points",
                    labels.len(),
                    points.len()
                )));
            }
        }
        Ok(SampleSet {
            points,
            origin,
            hidden_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    /// Fraction of hidden labels that are positive.
    pub fn positive_fraction(&self) -> Option<f64> {
        let labels = self.hidden_labels.as_ref()?;
        if labels.is_empty() {
            return None;
        }
        let pos = labels.iter().filter(|l| l.is_pos()).count();
        Some(pos as f64 / labels.len() as f64)
    }

    /// Split into (positives, negatives) by hidden label.
    pub fn split_by_hidden_label(&self) -> Option<(Points, Points)> {
        let labels = self.hidden_labels.as_ref()?;
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (x, l) in self.points.iter().zip(labels) {
            if l.is_pos() {
                pos.push(x.clone());
            } else {
                neg.push(x.clone());
            }
        }
        Some((pos, neg))
    }
}

/// Something that can draw a point from `p(x | y)`.
pub trait ClassConditional {
    fn dimension(&self) -> usize;
    fn draw<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Vec<f64>;
}

/// Two Gaussians with a shared diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPairConfig {
    pub mean_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
    /// Per-coordinate variances.
    pub covariance: Vec<f64>,
}

impl GaussianPairConfig {
    pub fn new(mean_pos: Vec<f64>, mean_neg: Vec<f64>, covariance: Vec<f64>) -> Result<Self> {
        let cfg = GaussianPairConfig {
            mean_pos,
            mean_neg,
            covariance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.mean_pos.len();
        if d == 0 {
            return Err(Error::invalid("Gaussian dimension must be positive"));
        }
        if self.mean_neg.len() != d || self.covariance.len() != d {
            return Err(Error::invalid(format!(
                "mean_pos, mean_neg and covariance must all have length {d}"
            )));
        }
        if self.covariance.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("covariance entries must be positive"));
        }
        if self.mean_pos.iter().chain(&self.mean_neg).any(|m| !m.is_finite()) {
            return Err(Error::invalid("means must be finite"));
        }
        Ok(())
    }
}

impl ClassConditional for GaussianPairConfig {
    fn dimension(&self) -> usize {
        self.mean_pos.len()
    }

    fn draw<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Vec<f64> {
        let mean = match label {
            Label::Pos => &self.mean_pos,
            Label::Neg => &self.mean_neg,
        };
        mean.iter()
            .zip(&self.covariance)
            .map(|(&m, &v)| {
                let z: f64 = rng.sample(StandardNormal);
                m + v.sqrt() * z
            })
            .collect()
    }
}

impl ClassConditional for DiscreteBinaryDistribution {
    fn dimension(&self) -> usize {
        self.support[0].len()
    }

    fn draw<R: Rng + ?Sized>(&self, label: Label, rng: &mut R) -> Vec<f64> {
        let weights = match label {
            Label::Pos => &self.p_pos,
            Label::Neg => &self.p_neg,
        };
        // weights were validated on construction
        let idx = WeightedIndex::new(weights).expect("valid weights");
        self.support[idx.sample(rng)].clone()
    }
}

fn draw_mixture<S: ClassConditional, R: Rng + ?Sized>(
    sampler: &S,
    weight_pos: f64,
    n: usize,
    origin: Origin,
    rng: &mut R,
) -> SampleSet {
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let coin: f64 = rng.random();
        let label = if coin < weight_pos { Label::Pos } else { Label::Neg };
        points.push(sampler.draw(label, rng));
        labels.push(label);
    }
    SampleSet {
        points,
        origin,
        hidden_labels: Some(labels),
    }
}

/// Draw corrupted-positive and corrupted-negative sets.
///
/// Each point first flips a coin with the set's mixture weight to pick the
/// clean component, then draws from that component. The corrupted-positive set
/// is drawn first, then the corrupted-negative set, from a single generator
/// seeded with `seed`.
pub fn sample_mcd<S: ClassConditional>(
    sampler: &S,
    params: &McdParams,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<(SampleSet, SampleSet)> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::invalid("sample counts must be at least 1"));
    }
    let params = McdParams::new(params.pi_corr_pos, params.pi_corr_neg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pos = draw_mixture(sampler, params.pi_corr_pos, n_pos, Origin::CorrPos, &mut rng);
    let neg = draw_mixture(sampler, params.pi_corr_neg, n_neg, Origin::CorrNeg, &mut rng);
    Ok((pos, neg))
}

/// Clean positive and negative samples, e.g. for held-out evaluation.
pub fn sample_clean<S: ClassConditional>(
    sampler: &S,
    n_pos: usize,
    n_neg: usize,
    seed: u64,
) -> Result<(SampleSet, SampleSet)> {
    sample_mcd(sampler, &McdParams::clean(), n_pos, n_neg, seed)
}

/// Write sample sets as CSV: `x0..x{d-1}, origin, hidden_label`.
pub fn write_samples_csv<W: Write>(out: W, sets: &[&SampleSet]) -> Result<()> {
    let dim = sets.iter().find_map(|s| s.dimension()).unwrap_or(0);
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.push("origin".into());
    header.push("hidden_label".into());
    w.write_record(&header)?;
    for set in sets {
        for (i, x) in set.points.iter().enumerate() {
            let mut row: Vec<String> = x.iter().map(|&v| fmt_num(v)).collect();
            row.push(set.origin.name().into());
            row.push(set.hidden_labels.as_ref().map(|l| l[i].to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
