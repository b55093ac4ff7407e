//! Config-driven experiment runners.
//!
//! Each runner returns the artifacts it produced (CSV and JSON text) together
//! with the pass/fail checks it asserted. [`RunOutput::write`] stores the
//! artifacts plus a `manifest.json` holding the config echo, the seeds and a
//! SHA-256 of every artifact.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bundled;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::distributions::{
    pu_params, sample_clean, sample_mcd, uu_params, DiscreteBinaryDistribution, GaussianPairConfig, McdParams,
    SampleSet,
};
use crate::error::Result;
use crate::loss::LossKind;
use crate::output::{csv_string, fmt_num, sha256_hex, to_json_pretty, write_file};
use crate::pipeline::{run_pipeline, PipelineReport};
use crate::risk::{
    auc_decomposition_check, auc_score, ber_decomposition_check, exact_auc_risk, exact_ber_risk,
    exact_corrupted_auc_risk, exact_corrupted_ber_risk,
};
use crate::scorer::Score;
use crate::text::{Corpus, KeywordSet};
use crate::trainer::{brute_force_minimizer, train, Objective, TrainConfig, TrainTrace};

/// Largest decomposition residual accepted by the identity suite.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Largest deviation of a symmetric loss's excess term from `K (1 - pi_p + pi_n) / 2`.
pub const EXCESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: ExperimentKind,
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'static str,
    seeds: &'a [u64],
    config: &'a ExperimentConfig,
    artifacts: Vec<ManifestEntry<'a>>,
    checks: &'a [Check],
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn artifact(&self, file: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.file == file)
            .map(|a| a.contents.as_str())
    }

    /// The manifest JSON for this run.
    pub fn manifest(&self, config: &ExperimentConfig) -> Result<String> {
        to_json_pretty(&Manifest {
            experiment: self.experiment.name(),
            seeds: &config.seeds,
            config,
            artifacts: self
                .artifacts
                .iter()
                .map(|a| ManifestEntry {
                    file: &a.file,
                    sha256: sha256_hex(a.contents.as_bytes()),
                })
                .collect(),
            checks: &self.checks,
        })
    }

    /// Write every artifact and `manifest.json` into `dir`; returns the manifest path.
    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<PathBuf> {
        for a in &self.artifacts {
            write_file(&dir.join(&a.file), &a.contents)?;
        }
        let path = dir.join("manifest.json");
        write_file(&path, &self.manifest(config)?)?;
        Ok(path)
    }
}

/// Run the experiment named in `config`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::VerifyIdentities => run_verify_identities(config),
        ExperimentKind::NoiseSweep => run_noise_sweep(config),
        ExperimentKind::LossCompare => run_loss_compare(config),
        ExperimentKind::PuDemo => run_pu_demo(config),
        ExperimentKind::UuDemo => run_uu_demo(config),
        ExperimentKind::Keywords => run_keywords(config),
    }
}

/// Independent stream for the clean held-out sample of a run.
fn test_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean; zero for a single value.
fn std_err(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

// ---------------------------------------------------------------------------
// identities

/// A random finite-support problem: 1-D support `0..m`, random class
/// densities and prior, random scores and random contamination levels.
#[derive(Debug, Clone)]
pub struct IdentityInstance {
    pub dist: DiscreteBinaryDistribution,
    pub scores: Vec<f64>,
    pub params: McdParams,
}

fn random_density<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn random_params<R: Rng>(rng: &mut R, min_gap: f64) -> McdParams {
    loop {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi - lo >= min_gap {
            if let Ok(p) = McdParams::new(hi, lo) {
                return p;
            }
        }
    }
}

pub fn random_instance<R: Rng>(rng: &mut R, max_support: usize, score_range: f64) -> IdentityInstance {
    let m = rng.random_range(2..=max_support.max(2));
    let prior = rng.random_range(0.1..0.9);
    let dist = DiscreteBinaryDistribution::on_line(random_density(rng, m), random_density(rng, m), prior)
        .expect("random densities are valid");
    let scores = (0..m).map(|_| rng.random_range(-score_range..=score_range)).collect();
    IdentityInstance {
        dist,
        scores,
        params: random_params(rng, 0.0),
    }
}

/// Residual of each decomposition for one loss and instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub seed: u64,
    pub instance: usize,
    pub loss: LossKind,
    pub objective: Objective,
    pub pi_corr_pos: f64,
    pub pi_corr_neg: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub excess: f64,
    pub expected_excess: Option<f64>,
}

impl IdentityRow {
    pub fn excess_error(&self) -> Option<f64> {
        self.expected_excess.map(|e| (self.excess - e).abs())
    }
}

/// Two rows per loss and instance, BER first.
pub fn identity_rows(
    losses: &[LossKind],
    seed: u64,
    instances: usize,
    max_support: usize,
    score_range: f64,
) -> Result<Vec<IdentityRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(losses.len() * instances * 2);
    for i in 0..instances {
        let inst = random_instance(&mut rng, max_support, score_range);
        for &loss in losses {
            let spec = loss.spec();
            for objective in [Objective::Ber, Objective::Auc] {
                let check = match objective {
                    Objective::Ber => ber_decomposition_check(&spec, &inst.dist, &inst.scores, &inst.params)?,
                    Objective::Auc => auc_decomposition_check(&spec, &inst.dist, &inst.scores, &inst.params)?,
                };
                rows.push(IdentityRow {
                    seed,
                    instance: i,
                    loss,
                    objective,
                    pi_corr_pos: inst.params.pi_corr_pos(),
                    pi_corr_neg: inst.params.pi_corr_neg(),
                    lhs: check.lhs,
                    rhs: check.rhs,
                    residual: check.residual,
                    excess: check.excess(),
                    expected_excess: check.expected_symmetric_excess(),
                });
            }
        }
    }
    Ok(rows)
}

/// Clean and corrupted argmin sets over an enumerated family of score vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerComparison {
    pub label: String,
    pub loss: LossKind,
    pub objective: Objective,
    pub clean: Vec<usize>,
    pub corrupted: Vec<usize>,
}

impl MinimizerComparison {
    pub fn identical(&self) -> bool {
        self.clean == self.corrupted
    }
}

pub fn compare_minimizers(
    label: &str,
    loss: LossKind,
    objective: Objective,
    dist: &DiscreteBinaryDistribution,
    params: &McdParams,
    family: &[Vec<f64>],
) -> Result<MinimizerComparison> {
    let spec = loss.spec();
    let (clean, corrupted) = match objective {
        Objective::Ber => (
            brute_force_minimizer(family, |s| Ok(exact_ber_risk(&spec, dist, s)?.value))?,
            brute_force_minimizer(family, |s| Ok(exact_corrupted_ber_risk(&spec, dist, s, params)?.value))?,
        ),
        Objective::Auc => (
            brute_force_minimizer(family, |s| Ok(exact_auc_risk(&spec, dist, s)?.value))?,
            brute_force_minimizer(family, |s| Ok(exact_corrupted_auc_risk(&spec, dist, s, params)?.value))?,
        ),
    };
    Ok(MinimizerComparison {
        label: label.into(),
        loss,
        objective,
        clean,
        corrupted,
    })
}

/// All 25 score assignments `(g(x1), g(x2))` with values in `{-1, -0.5, 0, 0.5, 1}`.
pub fn two_point_family() -> Vec<Vec<f64>> {
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    levels
        .iter()
        .flat_map(|&a| levels.iter().map(move |&b| vec![a, b]))
        .collect()
}

/// A problem where hinge-loss BER minimization over a linear family picks a
/// different scorer on corrupted data than on clean data.
///
/// Distribution, contamination, `(w, b)` per family member and the member score vectors.
pub type Counterexample = (DiscreteBinaryDistribution, McdParams, Vec<(f64, f64)>, Vec<Vec<f64>>);

/// Support `{-1, 0, 2}`, scorers `g(x) = w x + b` with `w, b` on a grid of
/// step 0.5 in `[-2, 2]`, contamination `(0.6, 0.4)`.
pub fn hinge_counterexample() -> Counterexample {
    let dist = DiscreteBinaryDistribution::new(
        vec![vec![-1.0], vec![0.0], vec![2.0]],
        vec![0.24, 0.68, 0.08],
        vec![0.89, 0.08, 0.03],
        0.5,
    )
    .expect("valid distribution");
    let params = McdParams::new(0.6, 0.4).expect("valid params");
    let grid: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
    let coefs: Vec<(f64, f64)> = grid.iter().flat_map(|&w| grid.iter().map(move |&b| (w, b))).collect();
    let family = coefs
        .iter()
        .map(|&(w, b)| dist.support().iter().map(|x| w * x[0] + b).collect())
        .collect();
    (dist, params, coefs, family)
}

pub fn minimizer_comparisons(losses: &[LossKind], seed: u64, instances: usize) -> Result<Vec<MinimizerComparison>> {
    // separate stream from the residual suite
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let family = two_point_family();
    let mut out = Vec::new();
    for i in 0..instances {
        let prior = rng.random_range(0.1..0.9);
        let dist =
            DiscreteBinaryDistribution::on_line(random_density(&mut rng, 2), random_density(&mut rng, 2), prior)?;
        let params = random_params(&mut rng, 0.1);
        for &loss in losses {
            for objective in [Objective::Ber, Objective::Auc] {
                out.push(compare_minimizers(
                    &format!("seed{seed}-{i}"),
                    loss,
                    objective,
                    &dist,
                    &params,
                    &family,
                )?);
            }
        }
    }
    Ok(out)
}

fn join_indices(ix: &[usize]) -> String {
    ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

pub fn run_verify_identities(config: &ExperimentConfig) -> Result<RunOutput> {
    let s = &config.identities;
    let mut rows = Vec::new();
    let mut minimizers = Vec::new();
    for &seed in &config.seeds {
        rows.extend(identity_rows(
            &config.losses,
            seed,
            s.instances,
            s.max_support,
            s.score_range,
        )?);
        let symmetric: Vec<LossKind> = config.losses.iter().copied().filter(|l| l.is_symmetric()).collect();
        minimizers.extend(minimizer_comparisons(&symmetric, seed, s.minimizer_instances)?);
    }
    let (dist, params, _, family) = hinge_counterexample();
    let hinge = compare_minimizers("hinge-linear", LossKind::Hinge, Objective::Ber, &dist, &params, &family)?;
    minimizers.push(hinge.clone());

    // rows come in (ber, auc) pairs; one CSV line per loss and instance
    let table: Vec<Vec<String>> = rows
        .chunks(2)
        .map(|pair| {
            let (b, a) = (&pair[0], &pair[1]);
            vec![
                b.seed.to_string(),
                b.instance.to_string(),
                b.loss.name().into(),
                fmt_num(b.pi_corr_pos),
                fmt_num(b.pi_corr_neg),
                fmt_num(b.lhs),
                fmt_num(b.rhs),
                fmt_num(b.residual),
                fmt_num(b.excess),
                fmt_num(a.lhs),
                fmt_num(a.rhs),
                fmt_num(a.residual),
                fmt_num(a.excess),
                b.expected_excess.map(fmt_num).unwrap_or_default(),
            ]
        })
        .collect();
    let residuals = csv_string(
        &[
            "seed",
            "instance",
            "loss",
            "pi_corr_pos",
            "pi_corr_neg",
            "ber_lhs",
            "ber_rhs",
            "ber_residual",
            "ber_excess",
            "auc_lhs",
            "auc_rhs",
            "auc_residual",
            "auc_excess",
            "expected_symmetric_excess",
        ],
        &table,
    )?;
    let min_table: Vec<Vec<String>> = minimizers
        .iter()
        .map(|m| {
            vec![
                m.label.clone(),
                m.loss.name().into(),
                objective_name(m.objective).into(),
                join_indices(&m.clean),
                join_indices(&m.corrupted),
                m.identical().to_string(),
            ]
        })
        .collect();
    let minimizer_csv = csv_string(
        &[
            "instance",
            "loss",
            "objective",
            "clean_argmin",
            "corrupted_argmin",
            "identical",
        ],
        &min_table,
    )?;

    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let worst_excess = rows.iter().filter_map(IdentityRow::excess_error).fold(0.0, f64::max);
    let symmetric_minimizers: Vec<&MinimizerComparison> = minimizers.iter().filter(|m| m.loss.is_symmetric()).collect();
    let mismatched = symmetric_minimizers.iter().filter(|m| !m.identical()).count();
    let checks = vec![
        Check::new(
            "decomposition_residuals",
            worst <= RESIDUAL_TOL,
            format!(
                "max residual {worst:e} over {} rows (tolerance {RESIDUAL_TOL:e})",
                rows.len()
            ),
        ),
        Check::new(
            "symmetric_excess_constant",
            worst_excess <= EXCESS_TOL,
            format!("max |excess - K(1 - pi_p + pi_n)/2| = {worst_excess:e} (tolerance {EXCESS_TOL:e})"),
        ),
        Check::new(
            "symmetric_minimizers_identical",
            mismatched == 0,
            format!("{mismatched} of {} comparisons differ", symmetric_minimizers.len()),
        ),
        Check::new(
            "hinge_minimizers_differ",
            !hinge.identical(),
            format!("clean argmin {:?}, corrupted argmin {:?}", hinge.clean, hinge.corrupted),
        ),
    ];
    Ok(RunOutput {
        experiment: ExperimentKind::VerifyIdentities,
        artifacts: vec![
            Artifact {
                file: "residuals.csv".into(),
                contents: residuals,
            },
            Artifact {
                file: "minimizers.csv".into(),
                contents: minimizer_csv,
            },
        ],
        checks,
    })
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::Ber => "ber",
        Objective::Auc => "auc",
    }
}

// ---------------------------------------------------------------------------
// Gaussian training runs

/// Clean held-out evaluation of one trained scorer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CleanEvaluation {
    /// Balanced error at threshold 0.
    pub ber: f64,
    pub auc: f64,
}

pub fn evaluate_clean(g: &impl Score, test_pos: &SampleSet, test_neg: &SampleSet) -> Result<CleanEvaluation> {
    let sp: Vec<f64> = test_pos.points.iter().map(|x| g.score(x)).collect();
    let sn: Vec<f64> = test_neg.points.iter().map(|x| g.score(x)).collect();
    let fnr = sp.iter().filter(|&&s| s <= 0.0).count() as f64 / sp.len() as f64;
    let fpr = sn.iter().filter(|&&s| s > 0.0).count() as f64 / sn.len() as f64;
    Ok(CleanEvaluation {
        ber: 0.5 * (fnr + fpr),
        auc: auc_score(&sp, &sn)?,
    })
}

/// One training run on corrupted Gaussians, scored on clean held-out data,
/// next to the same loss and seed trained on clean data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRun {
    pub loss: LossKind,
    pub pi_corr_pos: f64,
    pub pi_corr_neg: f64,
    pub seed: u64,
    pub corrupted: CleanEvaluation,
    pub reference: CleanEvaluation,
}

impl GridRun {
    /// Clean AUC risk `1 - AUC` above that of the clean-trained reference.
    pub fn auc_risk_gap(&self) -> f64 {
        self.reference.auc - self.corrupted.auc
    }

    pub fn ber_gap(&self) -> f64 {
        self.corrupted.ber - self.reference.ber
    }
}

fn gaussian_run(
    gauss: &GaussianPairConfig,
    params: &McdParams,
    n_pos: usize,
    n_neg: usize,
    test: &(SampleSet, SampleSet),
    train_config: &TrainConfig,
    seed: u64,
) -> Result<CleanEvaluation> {
    let (pos, neg) = sample_mcd(gauss, params, n_pos, n_neg, seed)?;
    let trace = train(
        &pos,
        &neg,
        &TrainConfig {
            seed,
            ..train_config.clone()
        },
    )?;
    evaluate_clean(&trace.scorer, &test.0, &test.1)
}

/// Train every `(cell, loss, seed)` combination. Runs execute in parallel and
/// come back in grid order: cell, then loss, then seed.
pub fn grid_runs(config: &ExperimentConfig) -> Result<Vec<GridRun>> {
    let gauss = config.gaussian.pair()?;
    let cells = config.noise.params()?;
    let g = &config.gaussian;
    let tests: BTreeMap<u64, (SampleSet, SampleSet)> = config
        .seeds
        .iter()
        .map(|&s| Ok((s, sample_clean(&gauss, g.n_test, g.n_test, test_seed(s))?)))
        .collect::<Result<_>>()?;
    let reference_jobs: Vec<(LossKind, u64)> = config
        .losses
        .iter()
        .flat_map(|&l| config.seeds.iter().map(move |&s| (l, s)))
        .collect();
    let references: BTreeMap<(LossKind, u64), CleanEvaluation> = reference_jobs
        .par_iter()
        .map(|&(loss, seed)| {
            let tc = TrainConfig {
                loss,
                ..config.train.clone()
            };
            let eval = gaussian_run(&gauss, &McdParams::clean(), g.n_pos, g.n_neg, &tests[&seed], &tc, seed)?;
            Ok(((loss, seed), eval))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(McdParams, LossKind, u64)> = cells
        .iter()
        .flat_map(|&c| {
            config
                .losses
                .iter()
                .flat_map(move |&l| config.seeds.iter().map(move |&s| (c, l, s)))
        })
        .collect();
    jobs.par_iter()
        .map(|(params, loss, seed)| {
            let tc = TrainConfig {
                loss: *loss,
                ..config.train.clone()
            };
            let corrupted = gaussian_run(&gauss, params, g.n_pos, g.n_neg, &tests[seed], &tc, *seed)?;
            Ok(GridRun {
                loss: *loss,
                pi_corr_pos: params.pi_corr_pos(),
                pi_corr_neg: params.pi_corr_neg(),
                seed: *seed,
                corrupted,
                reference: references[&(*loss, *seed)].clone(),
            })
        })
        .collect()
}

/// Seed-averaged results of one `(cell, loss)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub loss: LossKind,
    pub pi_corr_pos: f64,
    pub pi_corr_neg: f64,
    pub n_seeds: usize,
    pub mean_ber: f64,
    pub se_ber: f64,
    pub mean_auc: f64,
    pub se_auc: f64,
    pub mean_reference_ber: f64,
    pub mean_auc_risk_gap: f64,
    pub se_auc_risk_gap: f64,
}

pub fn summarize(runs: &[GridRun]) -> Vec<CellSummary> {
    type Group<'a> = ((f64, f64, LossKind), Vec<&'a GridRun>);
    let mut groups: Vec<Group> = Vec::new();
    for r in runs {
        let key = (r.pi_corr_pos, r.pi_corr_neg, r.loss);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|((pp, pn, loss), rs)| {
            let ber: Vec<f64> = rs.iter().map(|r| r.corrupted.ber).collect();
            let auc: Vec<f64> = rs.iter().map(|r| r.corrupted.auc).collect();
            let reference: Vec<f64> = rs.iter().map(|r| r.reference.ber).collect();
            let gap: Vec<f64> = rs.iter().map(|r| r.auc_risk_gap()).collect();
            CellSummary {
                loss,
                pi_corr_pos: pp,
                pi_corr_neg: pn,
                n_seeds: rs.len(),
                mean_ber: mean(&ber),
                se_ber: std_err(&ber),
                mean_auc: mean(&auc),
                se_auc: std_err(&auc),
                mean_reference_ber: mean(&reference),
                mean_auc_risk_gap: mean(&gap),
                se_auc_risk_gap: std_err(&gap),
            }
        })
        .collect()
}

fn runs_csv(runs: &[GridRun]) -> Result<String> {
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            vec![
                r.loss.name().into(),
                fmt_num(r.pi_corr_pos),
                fmt_num(r.pi_corr_neg),
                r.seed.to_string(),
                fmt_num(r.corrupted.ber),
                fmt_num(r.corrupted.auc),
                fmt_num(r.reference.ber),
                fmt_num(r.reference.auc),
                fmt_num(r.auc_risk_gap()),
            ]
        })
        .collect();
    csv_string(
        &[
            "loss",
            "pi_corr_pos",
            "pi_corr_neg",
            "seed",
            "clean_test_ber",
            "clean_test_auc",
            "reference_ber",
            "reference_auc",
            "auc_risk_gap",
        ],
        &rows,
    )
}

fn summary_csv(summary: &[CellSummary]) -> Result<String> {
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.loss.name().into(),
                fmt_num(s.pi_corr_pos),
                fmt_num(s.pi_corr_neg),
                s.n_seeds.to_string(),
                fmt_num(s.mean_ber),
                fmt_num(s.se_ber),
                fmt_num(s.mean_auc),
                fmt_num(s.se_auc),
                fmt_num(s.mean_reference_ber),
                fmt_num(s.mean_auc_risk_gap),
                fmt_num(s.se_auc_risk_gap),
            ]
        })
        .collect();
    csv_string(
        &[
            "loss",
            "pi_corr_pos",
            "pi_corr_neg",
            "seeds",
            "mean_ber",
            "se_ber",
            "mean_auc",
            "se_auc",
            "mean_reference_ber",
            "mean_auc_risk_gap",
            "se_auc_risk_gap",
        ],
        &rows,
    )
}

/// For every cell, each symmetric loss's mean clean BER against each
/// non-symmetric loss's.
fn symmetric_vs_other_checks(summary: &[CellSummary]) -> Vec<Check> {
    let mut checks = Vec::new();
    for s in summary.iter().filter(|s| s.loss.is_symmetric()) {
        for o in summary
            .iter()
            .filter(|o| !o.loss.is_symmetric() && o.pi_corr_pos == s.pi_corr_pos && o.pi_corr_neg == s.pi_corr_neg)
        {
            checks.push(Check::new(
                format!("{}_ber_le_{}@({}, {})", s.loss, o.loss, s.pi_corr_pos, s.pi_corr_neg),
                s.mean_ber <= o.mean_ber,
                format!("{:.4} vs {:.4}", s.mean_ber, o.mean_ber),
            ));
        }
    }
    checks
}

/// Symmetric losses' mean clean AUC risk gap, ordered by increasing
/// `pi_p - pi_n`, must not increase.
fn purity_trend_checks(summary: &[CellSummary]) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut losses: Vec<LossKind> = summary.iter().map(|s| s.loss).filter(|l| l.is_symmetric()).collect();
    losses.dedup();
    for loss in losses {
        let mut cells: Vec<&CellSummary> = summary.iter().filter(|s| s.loss == loss).collect();
        if cells.len() < 2 {
            continue;
        }
        cells.sort_by(|a, b| (a.pi_corr_pos - a.pi_corr_neg).total_cmp(&(b.pi_corr_pos - b.pi_corr_neg)));
        let gaps: Vec<f64> = cells.iter().map(|c| c.mean_auc_risk_gap).collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        checks.push(Check::new(
            format!("{loss}_auc_gap_non_increasing"),
            monotone,
            format!("{gaps:.5?}"),
        ));
    }
    checks
}

pub fn run_noise_sweep(config: &ExperimentConfig) -> Result<RunOutput> {
    let runs = grid_runs(config)?;
    let summary = summarize(&runs);
    let mut checks = symmetric_vs_other_checks(&summary);
    checks.extend(purity_trend_checks(&summary));
    Ok(RunOutput {
        experiment: ExperimentKind::NoiseSweep,
        artifacts: vec![
            Artifact {
                file: "runs.csv".into(),
                contents: runs_csv(&runs)?,
            },
            Artifact {
                file: "summary.csv".into(),
                contents: summary_csv(&summary)?,
            },
        ],
        checks,
    })
}

/// Largest accepted distance between a symmetric loss's mean clean BER and
/// that of the same loss trained on clean data.
pub const ROBUSTNESS_TOL: f64 = 0.05;

pub fn run_loss_compare(config: &ExperimentConfig) -> Result<RunOutput> {
    let runs = grid_runs(config)?;
    let summary = summarize(&runs);
    let mut checks = symmetric_vs_other_checks(&summary);
    for s in summary.iter().filter(|s| s.loss.is_symmetric()) {
        let d = (s.mean_ber - s.mean_reference_ber).abs();
        checks.push(Check::new(
            format!("{}_near_clean_baseline@({}, {})", s.loss, s.pi_corr_pos, s.pi_corr_neg),
            d <= ROBUSTNESS_TOL,
            format!("|{:.4} - {:.4}| = {d:.4}", s.mean_ber, s.mean_reference_ber),
        ));
    }
    Ok(RunOutput {
        experiment: ExperimentKind::LossCompare,
        artifacts: vec![
            Artifact {
                file: "runs.csv".into(),
                contents: runs_csv(&runs)?,
            },
            Artifact {
                file: "summary.csv".into(),
                contents: summary_csv(&summary)?,
            },
        ],
        checks,
    })
}

// ---------------------------------------------------------------------------
// PU / UU

/// Traces of the reduction path and the generic path for one loss and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceRun {
    pub loss: LossKind,
    pub seed: u64,
    pub reduced: TrainTrace,
    pub generic: TrainTrace,
    pub samples_identical: bool,
    pub evaluation: CleanEvaluation,
}

impl EquivalenceRun {
    pub fn identical(&self) -> bool {
        self.samples_identical && self.reduced == self.generic
    }
}

fn equivalence_runs(
    config: &ExperimentConfig,
    reduced: &McdParams,
    generic: &McdParams,
) -> Result<Vec<EquivalenceRun>> {
    let gauss = config.gaussian.pair()?;
    let g = &config.gaussian;
    let jobs: Vec<(LossKind, u64)> = config
        .losses
        .iter()
        .flat_map(|&l| config.seeds.iter().map(move |&s| (l, s)))
        .collect();
    jobs.par_iter()
        .map(|&(loss, seed)| {
            let tc = TrainConfig {
                loss,
                seed,
                ..config.train.clone()
            };
            let (rp, rn) = sample_mcd(&gauss, reduced, g.n_pos, g.n_neg, seed)?;
            let (gp, gn) = sample_mcd(&gauss, generic, g.n_pos, g.n_neg, seed)?;
            let reduced_trace = train(&rp, &rn, &tc)?;
            let generic_trace = train(&gp, &gn, &tc)?;
            let (tp, tn) = sample_clean(&gauss, g.n_test, g.n_test, test_seed(seed))?;
            Ok(EquivalenceRun {
                loss,
                seed,
                evaluation: evaluate_clean(&reduced_trace.scorer, &tp, &tn)?,
                samples_identical: rp == gp && rn == gn,
                reduced: reduced_trace,
                generic: generic_trace,
            })
        })
        .collect()
}

fn equivalence_output(kind: ExperimentKind, runs: &[EquivalenceRun]) -> Result<RunOutput> {
    let rows: Vec<Vec<String>> = runs
        .iter()
        .map(|r| {
            vec![
                r.loss.name().into(),
                r.seed.to_string(),
                r.identical().to_string(),
                fmt_num(*r.reduced.objectives.last().expect("epochs > 0")),
                fmt_num(r.evaluation.ber),
                fmt_num(r.evaluation.auc),
            ]
        })
        .collect();
    let table = csv_string(
        &[
            "loss",
            "seed",
            "traces_identical",
            "final_objective",
            "clean_test_ber",
            "clean_test_auc",
        ],
        &rows,
    )?;
    let mismatched = runs.iter().filter(|r| !r.identical()).count();
    let mut artifacts = vec![Artifact {
        file: "runs.csv".into(),
        contents: table,
    }];
    for r in runs {
        artifacts.push(Artifact {
            file: format!("trace_{}_seed{}.csv", r.loss, r.seed),
            contents: r.reduced.to_csv()?,
        });
    }
    Ok(RunOutput {
        experiment: kind,
        artifacts,
        checks: vec![Check::new(
            "reduction_matches_generic_path",
            mismatched == 0,
            format!("{mismatched} of {} runs differ", runs.len()),
        )],
    })
}

pub fn run_pu_demo(config: &ExperimentConfig) -> Result<RunOutput> {
    let pi_u = config.pu.class_prior_unlabeled;
    let reduced = pu_params(pi_u)?;
    let generic = McdParams::new(1.0, pi_u)?;
    equivalence_output(ExperimentKind::PuDemo, &equivalence_runs(config, &reduced, &generic)?)
}

pub fn run_uu_demo(config: &ExperimentConfig) -> Result<RunOutput> {
    let reduced = uu_params(config.uu.pi_u, config.uu.pi_u_prime)?;
    let generic = McdParams::new(config.uu.pi_u, config.uu.pi_u_prime)?;
    equivalence_output(ExperimentKind::UuDemo, &equivalence_runs(config, &reduced, &generic)?)
}

// ---------------------------------------------------------------------------
// keywords

/// Corpus and keywords named in the config, or the bundled ones.
pub fn keyword_inputs(config: &ExperimentConfig) -> Result<(Corpus, KeywordSet)> {
    let corpus = match &config.keywords.corpus {
        Some(p) => Corpus::load(p)?,
        None => bundled::corpus()?,
    };
    let keywords = match &config.keywords.keywords {
        Some(p) => KeywordSet::load(p)?,
        None => bundled::keywords()?,
    };
    Ok((corpus, keywords))
}

/// One pipeline run per `(loss, seed)`, in that order.
pub fn keyword_reports(config: &ExperimentConfig) -> Result<Vec<(LossKind, u64, PipelineReport)>> {
    let (corpus, keywords) = keyword_inputs(config)?;
    let base = config.pipeline();
    let jobs: Vec<(LossKind, u64)> = config
        .losses
        .iter()
        .flat_map(|&l| config.seeds.iter().map(move |&s| (l, s)))
        .collect();
    jobs.par_iter()
        .map(|&(loss, seed)| {
            let mut pc = base.clone();
            pc.train.loss = loss;
            pc.train.seed = seed;
            Ok((loss, seed, run_pipeline(&corpus, &keywords, &pc)?))
        })
        .collect()
}

fn method_name(m: crate::threshold::ThresholdMethod) -> &'static str {
    use crate::threshold::ThresholdMethod::*;
    match m {
        BreakevenKnownPrior => "breakeven",
        HeuristicPseudoRatio => "heuristic",
        DefaultZero => "default",
    }
}

pub fn run_keywords(config: &ExperimentConfig) -> Result<RunOutput> {
    let reports = keyword_reports(config)?;
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    let mut checks = Vec::new();
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for (loss, seed, report) in &reports {
        let run = format!("{loss}_seed{seed}");
        artifacts.push(Artifact {
            file: format!("report_{run}.json"),
            contents: to_json_pretty(report)?,
        });
        checks.push(Check::new(
            format!("{run}_purity_ordering"),
            report.guarantee_holds == Some(true),
            format!(
                "pi_p = {}, pi_n = {}",
                opt(report.empirical_pi_corr_pos),
                opt(report.empirical_pi_corr_neg)
            ),
        ));
        let Some(test) = &report.test else { continue };
        checks.push(Check::new(
            format!("{run}_test_auc_above_chance"),
            test.auc > 0.5,
            format!("auc = {:.4}", test.auc),
        ));
        let f1 = |m: &str| {
            test.comparison
                .iter()
                .find(|e| method_name(e.threshold.method) == m)
                .and_then(|e| e.metrics.f1)
        };
        if let (Some(b), Some(d)) = (f1("breakeven"), f1("default")) {
            checks.push(Check::new(
                format!("{run}_breakeven_f1_ge_default"),
                b >= d,
                format!("{b:.4} vs {d:.4}"),
            ));
        }
        if let Some(be) = &test.breakeven {
            let bound = 1.0 / be.n_test_pos as f64;
            checks.push(Check::new(
                format!("{run}_breakeven_precision_recall"),
                be.gap() <= bound,
                format!("|{:.4} - {:.4}| vs 1/{}", be.precision, be.recall, be.n_test_pos),
            ));
        }
        for e in &test.comparison {
            let m = &e.metrics;
            rows.push(vec![
                loss.name().into(),
                seed.to_string(),
                method_name(e.threshold.method).into(),
                fmt_num(e.threshold.beta),
                fmt_num(e.threshold.achieved_positive_fraction),
                fmt_num(m.precision),
                opt(m.recall),
                opt(m.f1),
                fmt_num(m.cer),
                opt(m.ber),
                fmt_num(test.auc),
            ]);
        }
    }
    artifacts.insert(
        0,
        Artifact {
            file: "metrics.csv".into(),
            contents: csv_string(
                &[
                    "loss",
                    "seed",
                    "threshold_method",
                    "beta",
                    "validation_positive_fraction",
                    "precision",
                    "recall",
                    "f1",
                    "cer",
                    "ber",
                    "auc",
                ],
                &rows,
            )?,
        },
    );
    Ok(RunOutput {
        experiment: ExperimentKind::Keywords,
        artifacts,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_valid_and_reproducible() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = random_instance(&mut a, 5, 2.0);
            let y = random_instance(&mut b, 5, 2.0);
            assert_eq!(x.scores, y.scores);
            assert!((2..=5).contains(&x.dist.len()));
            assert!(x.scores.iter().all(|s| s.abs() <= 2.0));
            assert!(x.params.pi_corr_pos() > x.params.pi_corr_neg());
        }
    }

    #[test]
    fn hinge_counterexample_differs() {
        let (dist, params, coefs, family) = hinge_counterexample();
        let c = compare_minimizers("h", LossKind::Hinge, Objective::Ber, &dist, &params, &family).unwrap();
        assert_eq!(c.clean.iter().map(|&i| coefs[i]).collect::<Vec<_>>(), [(2.0, 1.0)]);
        assert_eq!(c.corrupted.iter().map(|&i| coefs[i]).collect::<Vec<_>>(), [(1.0, 0.0)]);
    }

    #[test]
    fn symmetric_losses_keep_their_minimizers_on_the_hinge_problem() {
        let (dist, params, _, family) = hinge_counterexample();
        for loss in [LossKind::Sigmoid, LossKind::Ramp, LossKind::Unhinged, LossKind::ZeroOne] {
            for obj in [Objective::Ber, Objective::Auc] {
                let c = compare_minimizers("h", loss, obj, &dist, &params, &family).unwrap();
                assert!(c.identical(), "{loss} {obj:?}: {c:?}");
            }
        }
    }

    #[test]
    fn std_err_of_constant_is_zero() {
        assert_eq!(std_err(&[2.0, 2.0, 2.0]), 0.0);
        assert_eq!(std_err(&[1.0]), 0.0);
        assert!((std_err(&[1.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trend_check_orders_by_gap() {
        let cell = |pp: f64, pn: f64, gap: f64| CellSummary {
            loss: LossKind::Sigmoid,
            pi_corr_pos: pp,
            pi_corr_neg: pn,
            n_seeds: 1,
            mean_ber: 0.0,
            se_ber: 0.0,
            mean_auc: 0.0,
            se_auc: 0.0,
            mean_reference_ber: 0.0,
            mean_auc_risk_gap: gap,
            se_auc_risk_gap: 0.0,
        };
        let ok = [cell(0.9, 0.1, 0.01), cell(0.6, 0.4, 0.05), cell(0.75, 0.25, 0.02)];
        assert!(purity_trend_checks(&ok)[0].passed);
        let bad = [cell(0.9, 0.1, 0.03), cell(0.6, 0.4, 0.05), cell(0.75, 0.25, 0.02)];
        assert!(!purity_trend_checks(&bad)[0].passed);
    }
}
