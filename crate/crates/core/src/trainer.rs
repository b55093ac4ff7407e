//! Mini-batch gradient training of scorers on the empirical BER or AUC risk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::SampleSet;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::output::{csv_string, fmt_num};
use crate::risk::{auc_risk_from_scores, ber_risk_from_scores};
use crate::scorer::{ModelSpec, Score, Scorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Ber,
    Auc,
}

/// Training hyper-parameters. Every field has a default so config files only
/// need to name what they change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub objective: Objective,
    pub loss: LossKind,
    pub model: ModelSpec,
    pub step_size: f64,
    /// Adam when true, plain gradient descent otherwise.
    pub adaptive: bool,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub pair_batch: usize,
    pub seed: u64,
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            objective: Objective::Ber,
            loss: LossKind::Sigmoid,
            model: ModelSpec::Linear,
            step_size: 0.05,
            adaptive: true,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 100,
            batch_size: 64,
            pair_batch: 256,
            seed: 0,
            weight_decay: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.loss.is_differentiable() {
            return Err(Error::Unsupported(format!(
                "cannot train with `{}`; it has no gradient",
                self.loss
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 || self.pair_batch == 0 {
            return Err(Error::invalid("epochs, batch_size and pair_batch must be positive"));
        }
        // zero is accepted: it freezes the parameters
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid(format!(
                "step_size must be >= 0, got {}",
                self.step_size
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight_decay must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || self.epsilon.is_nan()
            || self.epsilon <= 0.0
        {
            return Err(Error::invalid("Adam decay rates must lie in [0, 1) and epsilon > 0"));
        }
        Ok(())
    }
}

/// A full-data training objective: empirical risk plus `weight_decay * |params|^2`.
#[derive(Debug, Clone, Copy)]
pub struct TrainingObjective<'a> {
    pub objective: Objective,
    pub loss: LossKind,
    pub weight_decay: f64,
    pub pos: &'a [Vec<f64>],
    pub neg: &'a [Vec<f64>],
}

impl<'a> TrainingObjective<'a> {
    pub fn new(config: &TrainConfig, pos: &'a SampleSet, neg: &'a SampleSet) -> Self {
        TrainingObjective {
            objective: config.objective,
            loss: config.loss,
            weight_decay: config.weight_decay,
            pos: &pos.points,
            neg: &neg.points,
        }
    }

    pub fn value(&self, g: &Scorer) -> Result<f64> {
        let sp: Vec<f64> = self.pos.iter().map(|x| g.score(x)).collect();
        let sn: Vec<f64> = self.neg.iter().map(|x| g.score(x)).collect();
        let risk = match self.objective {
            Objective::Ber => ber_risk_from_scores(self.loss, &sp, &sn)?.0,
            Objective::Auc => auc_risk_from_scores(self.loss, &sp, &sn)?.0,
        };
        Ok(risk + self.weight_decay * g.squared_norm())
    }

    /// Exact gradient of [`Self::value`] over all points (all pairs for AUC).
    pub fn gradient(&self, g: &Scorer) -> Vec<f64> {
        let mut grad = vec![0.0; g.param_count()];
        match self.objective {
            Objective::Ber => {
                let pos: Vec<&[f64]> = self.pos.iter().map(Vec::as_slice).collect();
                let neg: Vec<&[f64]> = self.neg.iter().map(Vec::as_slice).collect();
                ber_batch_gradient(g, self.loss, &pos, &neg, &mut grad);
            }
            Objective::Auc => {
                let sp: Vec<f64> = self.pos.iter().map(|x| g.score(x)).collect();
                let sn: Vec<f64> = self.neg.iter().map(|x| g.score(x)).collect();
                let m = (sp.len() * sn.len()) as f64;
                let mut wp = vec![0.0; sp.len()];
                let mut wn = vec![0.0; sn.len()];
                for (i, &a) in sp.iter().enumerate() {
                    for (j, &b) in sn.iter().enumerate() {
                        let w = self.loss.derivative(a - b) / m;
                        wp[i] += w;
                        wn[j] -= w;
                    }
                }
                for (x, w) in self.pos.iter().zip(wp) {
                    g.score_with_grad(x, w, &mut grad);
                }
                for (x, w) in self.neg.iter().zip(wn) {
                    g.score_with_grad(x, w, &mut grad);
                }
            }
        }
        add_weight_decay(g, self.weight_decay, &mut grad);
        grad
    }
}

fn add_weight_decay(g: &Scorer, weight_decay: f64, grad: &mut [f64]) {
    if weight_decay > 0.0 {
        for (gr, p) in grad.iter_mut().zip(&g.params) {
            *gr += 2.0 * weight_decay * p;
        }
    }
}

fn ber_batch_gradient(g: &Scorer, loss: LossKind, pos: &[&[f64]], neg: &[&[f64]], grad: &mut [f64]) {
    let cp = 0.5 / pos.len() as f64;
    for x in pos {
        let s = g.score(x);
        g.score_with_grad(x, cp * loss.derivative(s), grad);
    }
    let cn = 0.5 / neg.len() as f64;
    for x in neg {
        let s = g.score(x);
        g.score_with_grad(x, -cn * loss.derivative(-s), grad);
    }
}

/// Per-epoch objective values and the final scorer of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub objectives: Vec<f64>,
    pub scorer: Scorer,
    pub seed: u64,
    pub config: TrainConfig,
}

impl TrainTrace {
    /// `epoch,objective` rows.
    pub fn to_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .objectives
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), fmt_num(*v)])
            .collect();
        csv_string(&["epoch", "objective"], &rows)
    }

    /// Least-squares slope of the objective over the last quarter of epochs.
    pub fn late_trend(&self) -> f64 {
        let n = self.objectives.len();
        let tail = &self.objectives[n - (n / 4).max(2).min(n)..];
        if tail.len() < 2 {
            return 0.0;
        }
        let m = tail.len() as f64;
        let mean_x = (m - 1.0) / 2.0;
        let mean_y = tail.iter().sum::<f64>() / m;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, y) in tail.iter().enumerate() {
            let dx = i as f64 - mean_x;
            sxy += dx * (y - mean_y);
            sxx += dx * dx;
        }
        sxy / sxx
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

fn check_training_sets(pos: &SampleSet, neg: &SampleSet) -> Result<usize> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("training sets must be non-empty"));
    }
    let dim = pos.points[0].len();
    if dim == 0 {
        return Err(Error::invalid("feature vectors are empty"));
    }
    if pos.points.iter().chain(&neg.points).any(|x| x.len() != dim) {
        return Err(Error::invalid("feature vectors have mixed dimensions"));
    }
    Ok(dim)
}

/// Train according to `config.objective`.
///
/// Every step draws `batch_size` points from each set (BER) or `pair_batch`
/// (pos, neg) pairs (AUC) uniformly with replacement. An epoch is
/// `ceil(max(n_pos, n_neg) / batch_size)` steps; the full-data objective is
/// recorded after each epoch.
pub fn train(set_pos: &SampleSet, set_neg: &SampleSet, config: &TrainConfig) -> Result<TrainTrace> {
    config.validate()?;
    let dim = check_training_sets(set_pos, set_neg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut scorer = Scorer::init(config.model, dim, &mut rng)?;
    let objective = TrainingObjective::new(config, set_pos, set_neg);
    let (np, nn) = (set_pos.len(), set_neg.len());
    let steps = np.max(nn).div_ceil(config.batch_size);
    let n_params = scorer.param_count();
    let mut adam = Adam {
        m: vec![0.0; n_params],
        v: vec![0.0; n_params],
        t: 0,
    };
    let mut grad = vec![0.0; n_params];
    let mut objectives = Vec::with_capacity(config.epochs);
    let mut pos_batch: Vec<&[f64]> = Vec::with_capacity(config.batch_size);
    let mut neg_batch: Vec<&[f64]> = Vec::with_capacity(config.batch_size);

    for _ in 0..config.epochs {
        for _ in 0..steps {
            grad.iter_mut().for_each(|g| *g = 0.0);
            match config.objective {
                Objective::Ber => {
                    pos_batch.clear();
                    neg_batch.clear();
                    for _ in 0..config.batch_size {
                        pos_batch.push(&set_pos.points[rng.random_range(0..np)]);
                    }
                    for _ in 0..config.batch_size {
                        neg_batch.push(&set_neg.points[rng.random_range(0..nn)]);
                    }
                    ber_batch_gradient(&scorer, config.loss, &pos_batch, &neg_batch, &mut grad);
                }
                Objective::Auc => {
                    let c = 1.0 / config.pair_batch as f64;
                    for _ in 0..config.pair_batch {
                        let xp = &set_pos.points[rng.random_range(0..np)];
                        let xn = &set_neg.points[rng.random_range(0..nn)];
                        let w = c * config.loss.derivative(scorer.score(xp) - scorer.score(xn));
                        scorer.score_with_grad(xp, w, &mut grad);
                        scorer.score_with_grad(xn, -w, &mut grad);
                    }
                }
            }
            add_weight_decay(&scorer, config.weight_decay, &mut grad);
            apply_step(&mut scorer.params, &grad, config, &mut adam);
        }
        objectives.push(objective.value(&scorer)?);
    }
    if scorer.params.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("training diverged to non-finite parameters"));
    }
    Ok(TrainTrace {
        objectives,
        scorer,
        seed: config.seed,
        config: config.clone(),
    })
}

fn apply_step(params: &mut [f64], grad: &[f64], config: &TrainConfig, adam: &mut Adam) {
    let lr = config.step_size;
    if !config.adaptive {
        for (p, g) in params.iter_mut().zip(grad) {
            *p -= lr * g;
        }
        return;
    }
    adam.t += 1;
    let bc1 = 1.0 - config.beta1.powi(adam.t);
    let bc2 = 1.0 - config.beta2.powi(adam.t);
    for i in 0..params.len() {
        adam.m[i] = config.beta1 * adam.m[i] + (1.0 - config.beta1) * grad[i];
        adam.v[i] = config.beta2 * adam.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        let m_hat = adam.m[i] / bc1;
        let v_hat = adam.v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

/// Minimize the empirical BER risk `(1/2)[mean l(g(x+)) + mean l(-g(x-))]`.
pub fn train_ber(set_pos: &SampleSet, set_neg: &SampleSet, config: &TrainConfig) -> Result<TrainTrace> {
    let config = TrainConfig {
        objective: Objective::Ber,
        ..config.clone()
    };
    train(set_pos, set_neg, &config)
}

/// Minimize the empirical pairwise risk `mean l(g(x+) - g(x-))`.
pub fn train_auc(set_pos: &SampleSet, set_neg: &SampleSet, config: &TrainConfig) -> Result<TrainTrace> {
    let config = TrainConfig {
        objective: Objective::Auc,
        ..config.clone()
    };
    train(set_pos, set_neg, &config)
}

/// Indices of every family member whose risk is within `1e-12` of the minimum.
pub fn brute_force_minimizer<T>(family: &[T], mut risk: impl FnMut(&T) -> Result<f64>) -> Result<Vec<usize>> {
    const TIE_TOL: f64 = 1e-12;
    if family.is_empty() {
        return Err(Error::invalid("scorer family is empty"));
    }
    let values = family.iter().map(&mut risk).collect::<Result<Vec<f64>>>()?;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= best + TIE_TOL)
        .map(|(i, _)| i)
        .collect())
}

/// Outcome of comparing analytic gradients against central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Compare [`TrainingObjective::gradient`] with central differences (step
/// `1e-5`) at `probes` random parameter vectors near `scorer`.
///
/// Relative error is `|analytic - numeric| / max(|analytic|, |numeric|, 1e-3)`.
pub fn finite_difference_check(
    scorer: &Scorer,
    objective: &TrainingObjective<'_>,
    probes: usize,
    tol: f64,
    seed: u64,
) -> Result<GradientCheck> {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let mut probe = scorer.clone();
        for p in &mut probe.params {
            *p += rng.random_range(-1.0..1.0);
        }
        let analytic = objective.gradient(&probe);
        for (i, &a) in analytic.iter().enumerate() {
            let mut up = probe.clone();
            up.params[i] += H;
            let mut dn = probe.clone();
            dn.params[i] -= H;
            let numeric = (objective.value(&up)? - objective.value(&dn)?) / (2.0 * H);
            let denom = a.abs().max(numeric.abs()).max(1e-3);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    Ok(GradientCheck {
        max_relative_error: worst,
        passed: worst <= tol,
    })
}
