//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Each criterion is checked against independent oracles written here where
//! the library's own answer could hide a shared mistake: mixture expectations
//! computed from the clean densities for the corrupted risks, and plain pair
//! enumeration for the AUC.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symloss::config::ExperimentKind;
use symloss::experiments::{
    compare_minimizers, hinge_counterexample, identity_rows, minimizer_comparisons, random_instance, run_loss_compare,
    run_noise_sweep, run_pu_demo, run_uu_demo, RunOutput,
};
use symloss::pipeline::{run_pipeline, ThresholdChoice};
use symloss::risk::{exact_corrupted_auc_risk, exact_corrupted_ber_risk};
use symloss::trainer::finite_difference_check;
use symloss::{
    auc_score, bundled, sample_clean, GaussianPairConfig, LossKind, ModelSpec, Objective, Scorer, TrainConfig,
    TrainingObjective,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Option<Duration>) -> bool {
    limit.is_none_or(|l| elapsed <= l)
}

fn failed_checks(out: &RunOutput) -> String {
    let failed: Vec<String> = out
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        format!("{} checks passed", out.checks.len())
    } else {
        failed.join("; ")
    }
}

fn expect(w: &[f64], s: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    w.iter().zip(s).map(|(w, s)| w * f(*s)).sum()
}

/// `E_{x ~ a, x' ~ b} f(s(x) - s(x'))` by double loop.
fn expect_pairs(a: &[f64], b: &[f64], s: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..s.len() {
        for j in 0..s.len() {
            acc += a[i] * b[j] * f(s[i] - s[j]);
        }
    }
    acc
}

fn criterion_identities() -> Outcome {
    let losses = LossKind::ALL;
    let rows = identity_rows(&losses, 11, 100, 6, 4.0).unwrap();
    let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let worst_excess = rows.iter().filter_map(|r| r.excess_error()).fold(0.0, f64::max);
    let symmetric_rows = rows.iter().filter(|r| r.expected_excess.is_some()).count();

    // the corrupted side again, as mixtures of clean expectations
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_oracle = 0.0f64;
    for _ in 0..100 {
        let inst = random_instance(&mut rng, 6, 4.0);
        let (p, n, s) = (inst.dist.p_pos(), inst.dist.p_neg(), &inst.scores);
        let (a, b) = (inst.params.pi_corr_pos(), inst.params.pi_corr_neg());
        for &loss in &losses {
            let l = |z: f64| loss.value(z);
            let ber = 0.5
                * (a * expect(p, s, l)
                    + (1.0 - a) * expect(n, s, l)
                    + b * expect(p, s, |z| l(-z))
                    + (1.0 - b) * expect(n, s, |z| l(-z)));
            let auc = a * b * expect_pairs(p, p, s, l)
                + a * (1.0 - b) * expect_pairs(p, n, s, l)
                + (1.0 - a) * b * expect_pairs(n, p, s, l)
                + (1.0 - a) * (1.0 - b) * expect_pairs(n, n, s, l);
            let spec = loss.spec();
            let lib_ber = exact_corrupted_ber_risk(&spec, &inst.dist, s, &inst.params)
                .unwrap()
                .value;
            let lib_auc = exact_corrupted_auc_risk(&spec, &inst.dist, s, &inst.params)
                .unwrap()
                .value;
            worst_oracle = worst_oracle.max((ber - lib_ber).abs()).max((auc - lib_auc).abs());
        }
    }
    outcome(
        worst <= 1e-10 && worst_excess <= 1e-12 && symmetric_rows == 4 * 100 * 2 && worst_oracle <= 1e-10,
        format!(
            "{} rows, max residual {worst:.1e}, max symmetric excess error {worst_excess:.1e}, \
             max deviation from mixture oracle {worst_oracle:.1e}",
            rows.len()
        ),
    )
}

fn criterion_minimizers() -> Outcome {
    let symmetric: Vec<LossKind> = LossKind::ALL.into_iter().filter(|l| l.is_symmetric()).collect();
    let comparisons = minimizer_comparisons(&symmetric, 5, 20).unwrap();
    let differing = comparisons.iter().filter(|c| !c.identical()).count();
    let (dist, params, coefs, family) = hinge_counterexample();
    let hinge = compare_minimizers("hinge", LossKind::Hinge, Objective::Ber, &dist, &params, &family).unwrap();
    let show = |ix: &[usize]| ix.iter().map(|&i| coefs[i]).collect::<Vec<_>>();
    outcome(
        comparisons.len() == 20 * 4 * 2 && differing == 0 && !hinge.identical(),
        format!(
            "{differing}/{} symmetric comparisons differ; hinge (w, b) argmin clean {:?} vs corrupted {:?}",
            comparisons.len(),
            show(&hinge.clean),
            show(&hinge.corrupted)
        ),
    )
}

fn criterion_gradients() -> Outcome {
    let gauss = GaussianPairConfig::new(vec![0.5, -0.5], vec![-0.5, 0.5], vec![1.0, 1.0]).unwrap();
    let (pos, neg) = sample_clean(&gauss, 15, 15, 21).unwrap();
    let mut worst_linear = 0.0f64;
    let mut worst_mlp = 0.0f64;
    let mut cases = 0;
    for loss in LossKind::ALL.into_iter().filter(|l| l.is_differentiable()) {
        for objective in [Objective::Ber, Objective::Auc] {
            for (model, tol) in [(ModelSpec::Linear, 1e-5), (ModelSpec::Mlp { hidden: 4 }, 1e-4)] {
                let cfg = TrainConfig {
                    loss,
                    objective,
                    weight_decay: 0.01,
                    ..TrainConfig::default()
                };
                let obj = TrainingObjective::new(&cfg, &pos, &neg);
                let mut rng = ChaCha8Rng::seed_from_u64(cases);
                let g = Scorer::init(model, 2, &mut rng).unwrap();
                let check = finite_difference_check(&g, &obj, 3, tol, cases).unwrap();
                match model {
                    ModelSpec::Linear => worst_linear = worst_linear.max(check.max_relative_error),
                    ModelSpec::Mlp { .. } => worst_mlp = worst_mlp.max(check.max_relative_error),
                }
                cases += 1;
            }
        }
    }
    outcome(
        worst_linear <= 1e-5 && worst_mlp <= 1e-4,
        format!("{cases} cases, max relative error linear {worst_linear:.1e}, mlp {worst_mlp:.1e}"),
    )
}

fn criterion_robustness() -> Outcome {
    let mut cfg = bundled::default_config(ExperimentKind::LossCompare).unwrap();
    cfg.losses = vec![LossKind::Sigmoid, LossKind::Logistic];
    cfg.noise.grid = vec![[0.8, 0.3]];
    cfg.seeds = (0..10).collect();
    cfg.gaussian.n_pos = 2000;
    cfg.gaussian.n_neg = 2000;
    let out = run_loss_compare(&cfg).unwrap();
    let summary = out.artifact("summary.csv").unwrap();
    let mean_ber = |loss: &str| -> (f64, f64) {
        let line = summary.lines().find(|l| l.starts_with(&format!("{loss},"))).unwrap();
        let f: Vec<&str> = line.split(',').collect();
        (f[4].parse().unwrap(), f[8].parse().unwrap())
    };
    let (sig, sig_clean) = mean_ber("sigmoid");
    let (logi, _) = mean_ber("logistic");
    outcome(
        sig <= logi && (sig - sig_clean).abs() <= 0.05 && out.passed(),
        format!("mean clean BER sigmoid {sig:.4} vs logistic {logi:.4}, sigmoid clean-trained {sig_clean:.4}"),
    )
}

fn criterion_reductions() -> Outcome {
    let pu = run_pu_demo(&bundled::default_config(ExperimentKind::PuDemo).unwrap()).unwrap();
    let uu = run_uu_demo(&bundled::default_config(ExperimentKind::UuDemo).unwrap()).unwrap();
    outcome(
        pu.passed() && uu.passed(),
        format!("PU: {}; UU: {}", failed_checks(&pu), failed_checks(&uu)),
    )
}

fn criterion_auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    let mut max_pairs = 0;
    for i in 0..1000 {
        let np = rng.random_range(1..=100);
        let nn = rng.random_range(1..=100);
        max_pairs = max_pairs.max(np * nn);
        // coarse grid on half the instances so ties are common
        let coarse = i % 2 == 0;
        let mut draw = || {
            if coarse {
                rng.random_range(-5i32..=5) as f64 * 0.5
            } else {
                rng.random_range(-3.0..3.0)
            }
        };
        let sp: Vec<f64> = (0..np).map(|_| draw()).collect();
        let sn: Vec<f64> = (0..nn).map(|_| draw()).collect();
        let mut twice = 0u64;
        for a in &sp {
            for b in &sn {
                twice += if a > b {
                    2
                } else if a == b {
                    1
                } else {
                    0
                };
            }
        }
        let oracle = twice as f64 / (2 * np * nn) as f64;
        if auc_score(&sp, &sn).unwrap() != oracle {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && max_pairs <= 10_000,
        format!("{mismatches}/1000 instances differ from pair enumeration (largest {max_pairs} pairs)"),
    )
}

fn criterion_breakeven() -> Outcome {
    let cfg = bundled::default_config(ExperimentKind::Keywords).unwrap();
    let report = run_pipeline(
        &bundled::corpus().unwrap(),
        &bundled::keywords().unwrap(),
        &cfg.pipeline(),
    )
    .unwrap();
    let be = report.test.as_ref().and_then(|t| t.breakeven.clone()).unwrap();
    let bound = 1.0 / be.n_test_pos as f64;
    outcome(
        be.gap() <= bound,
        format!(
            "precision {:.4}, recall {:.4}, |gap| {:.4} <= 1/{} = {bound:.4}",
            be.precision,
            be.recall,
            be.gap(),
            be.n_test_pos
        ),
    )
}

fn criterion_purity_trend() -> Outcome {
    let cfg = bundled::purity_trend_config().unwrap();
    let out = run_noise_sweep(&cfg).unwrap();
    let trend = out
        .checks
        .iter()
        .find(|c| c.name == "sigmoid_auc_gap_non_increasing")
        .unwrap();
    outcome(
        cfg.seeds.len() == 5 && cfg.noise.grid.len() == 3 && trend.passed,
        format!("mean gaps by increasing purity {}", trend.detail),
    )
}

fn criterion_keywords() -> Outcome {
    let cfg = bundled::default_config(ExperimentKind::Keywords).unwrap();
    assert_eq!(cfg.keywords.threshold_method, ThresholdChoice::Breakeven);
    let report = run_pipeline(
        &bundled::corpus().unwrap(),
        &bundled::keywords().unwrap(),
        &cfg.pipeline(),
    )
    .unwrap();
    let test = report.test.as_ref().unwrap();
    let f1_of = |beta: f64| {
        test.comparison
            .iter()
            .find(|e| e.threshold.beta == beta)
            .and_then(|e| e.metrics.f1)
            .unwrap()
    };
    let f1_breakeven = test.chosen.metrics.f1.unwrap();
    let f1_default = f1_of(0.0);
    let (pp, pn) = (
        report.empirical_pi_corr_pos.unwrap(),
        report.empirical_pi_corr_neg.unwrap(),
    );
    outcome(
        test.auc > 0.5 && pp > pn && report.guarantee_holds == Some(true) && f1_breakeven >= f1_default,
        format!(
            "test AUC {:.4}, pseudo-label purity {pp:.3} > {pn:.3}, F1 breakeven {f1_breakeven:.4} vs default {f1_default:.4}",
            test.auc
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 identity suite", criterion_identities, Some(Duration::from_secs(10))),
        (
            "2 minimizer identity",
            criterion_minimizers,
            Some(Duration::from_secs(5)),
        ),
        ("3 gradient checks", criterion_gradients, None),
        (
            "4 robustness experiment",
            criterion_robustness,
            Some(Duration::from_secs(120)),
        ),
        ("5 PU/UU equivalence", criterion_reductions, None),
        ("6 AUC oracle equivalence", criterion_auc_oracle, None),
        ("7 breakeven threshold", criterion_breakeven, None),
        ("8 purity trend", criterion_purity_trend, None),
        (
            "9 keyword pipeline regression",
            criterion_keywords,
            Some(Duration::from_secs(60)),
        ),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let passed = o.passed && within(elapsed, limit);
        if !passed {
            failures += 1;
        }
        let budget = limit.map(|l| format!(" / {}s", l.as_secs())).unwrap_or_default();
        println!(
            "{} criterion {name}: {} [{:.2}s{budget}]",
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
