//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any failed.
//!
//! Criteria 1-7 compare the library against the brute-force oracles in
//! `common`; 8 and 9 run the Monte-Carlo harness.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;

use batchreg::estimation::{mle_model, CountsTensor, EstimatedModel};
use batchreg::harness::{self, ResultRow};
use batchreg::mdp::TIE_TOL;
use batchreg::planning::{policy_iteration, PlanningProblem};
use batchreg::regularizers::{
    dirichlet_posterior_mean, discount_blend, eps_greedy_blend, implied_prior_magnitude, uniform_prior, Method,
};
use common::{brute_force, convert, gaps, Model};

const GAMMA: f64 = 0.95;
const EPS_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }

    fn ratio(good: usize, total: usize, extra: &str) -> Self {
        Self::new(good == total && total > 0, format!("{good}/{total} {extra}").trim_end().to_string())
    }
}

fn plan(p: &PlanningProblem) -> Vec<usize> {
    policy_iteration(p, TIE_TOL).unwrap().policy.actions().to_vec()
}

fn tie_free(q: &common::Matrix) -> bool {
    gaps(q).iter().all(|&g| g > TIE_TOL)
}

/// MLE model from random transitions; some pairs stay unvisited.
fn random_estimate(rng: &mut impl Rng, n: usize, na: usize) -> EstimatedModel {
    let truth = common::random_model(rng, n, na, GAMMA);
    let mut counts = CountsTensor::zeros(n, na);
    for s in 0..n {
        for a in 0..na {
            for _ in 0..rng.random_range(0..=8) {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let next = (0..n)
                    .find(|&j| {
                        acc += truth.t[a][s][j];
                        u < acc
                    })
                    .unwrap_or(n - 1);
                counts.record(s, a, truth.r[s][a] + rng.random_range(-0.5..0.5), next);
            }
        }
    }
    mle_model(&counts, &[])
}

/// Counts where every state has the same number of visits under each action.
fn uniform_visit_estimate(rng: &mut impl Rng, n: usize, na: usize) -> EstimatedModel {
    let mut counts = CountsTensor::zeros(n, na);
    for a in 0..na {
        let per_state = rng.random_range(1..=25);
        for s in 0..n {
            for _ in 0..per_state {
                counts.record(s, a, rng.random_range(-1.0..1.0), rng.random_range(0..n));
            }
        }
    }
    mle_model(&counts, &[])
}

fn criterion_1() -> Outcome {
    let mut rng = common::rng(101);
    let (mut good, mut total, mut compared, mut skipped) = (0, 0, 0, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let truth = common::random_model(&mut rng, n, na, GAMMA);
        for eps in EPS_GRID {
            let lowered = Model {
                gamma: (1.0 - eps) * GAMMA,
                ..truth.clone()
            };
            let blended = Model {
                t: truth
                    .t
                    .iter()
                    .map(|t| t.iter().map(|row| row.iter().map(|p| (1.0 - eps) * p + eps / n as f64).collect()).collect())
                    .collect(),
                ..truth.clone()
            };
            let (_, q1) = brute_force(&lowered);
            let (_, q2) = brute_force(&blended);
            let pi1 = plan(&convert::problem(&lowered));
            let pi2 = plan(&convert::problem(&blended));
            let (g1, g2) = (gaps(&q1), gaps(&q2));
            let mut ok = true;
            for s in 0..n {
                if g1[s] > TIE_TOL && g2[s] > TIE_TOL {
                    compared += 1;
                    ok &= pi1[s] == pi2[s] && pi1[s] == common::argmax(&q1[s]) && pi2[s] == common::argmax(&q2[s]);
                } else {
                    skipped += 1;
                }
            }
            total += 1;
            good += usize::from(ok);
        }
    }
    Outcome::ratio(good, total, &format!("instances ({compared} states compared, {skipped} tied)"))
}

fn criterion_2() -> Outcome {
    let mut rng = common::rng(202);
    let (mut good, mut total, mut tied) = (0, 0, 0);
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let model = random_estimate(&mut rng, n, na);
        for eps in EPS_GRID {
            let blended = discount_blend(&model, eps).unwrap().planning_problem(GAMMA).unwrap();
            let lowered = PlanningProblem::new(model.transition.clone(), model.reward.clone(), (1.0 - eps) * GAMMA).unwrap();
            let (_, q) = brute_force(&convert::model(&lowered));
            if !tie_free(&q) {
                tied += 1;
                continue;
            }
            let oracle: Vec<usize> = q.iter().map(|row| common::argmax(row)).collect();
            let (a, b) = (plan(&blended), plan(&lowered));
            total += 1;
            good += usize::from(a == b && a == oracle);
        }
    }
    Outcome::ratio(good, total, &format!("tie-free instances ({tied} tied skipped)"))
}

fn criterion_3() -> Outcome {
    let mut rng = common::rng(303);
    let (mut worst, mut cases) = (0.0f64, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(1..=3);
        let model = uniform_visit_estimate(&mut rng, n, na);
        for m in [1.0, 10.0, 100.0] {
            let post = dirichlet_posterior_mean(&model, &uniform_prior(m, n, na).unwrap()).unwrap();
            for a in 0..na {
                let visits = model.counts.visit_count[(0, a)] as f64;
                let eps = m / (visits + m);
                for s in 0..n {
                    for j in 0..n {
                        let expected = (1.0 - eps) * model.transition[a][(s, j)] + eps / n as f64;
                        worst = worst.max((post.transition[a][(s, j)] - expected).abs());
                    }
                }
            }
            cases += 1;
        }
    }
    Outcome::new(worst <= 1e-12, format!("{cases} cases, max entry error {worst:.2e} (tol 1e-12)"))
}

fn criterion_4() -> Outcome {
    let mut rng = common::rng(404);
    let (mut good, mut total, mut tied) = (0, 0, 0);
    while total < 100 {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let model = uniform_visit_estimate(&mut rng, n, na);
        let eps = EPS_GRID[rng.random_range(0..EPS_GRID.len())];
        let gamma_l = (1.0 - eps) * GAMMA;
        let discounted = discount_blend(&model, eps).unwrap().planning_problem(GAMMA).unwrap();
        // The uniform-visit count sum differs by action, so so does the prior.
        let mut prior = uniform_prior(0.0, n, na).unwrap();
        for a in 0..na {
            let count_sum = model.counts.visit_count[(0, a)] as f64;
            let alpha = implied_prior_magnitude(GAMMA, gamma_l, count_sum, n).unwrap();
            prior.alpha[a].fill(alpha);
        }
        let dirichlet = dirichlet_posterior_mean(&model, &prior).unwrap().planning_problem(GAMMA).unwrap();
        let (_, q1) = brute_force(&convert::model(&discounted));
        let (_, q2) = brute_force(&convert::model(&dirichlet));
        if !tie_free(&q1) || !tie_free(&q2) {
            tied += 1;
            continue;
        }
        total += 1;
        good += usize::from(plan(&discounted) == plan(&dirichlet));
    }
    Outcome::ratio(good, total, &format!("tie-free instances ({tied} tied skipped)"))
}

fn criterion_5() -> Outcome {
    let mut rng = common::rng(505);
    let (mut good, mut total, mut worst) = (0, 0, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(2..=4);
        let na = 2;
        let mut truth = common::random_model(&mut rng, n, na, GAMMA);
        for row in &mut truth.r {
            let r = rng.random_range(-1.0..1.0);
            row.fill(r);
        }
        let model = EstimatedModel {
            transition: truth.t.iter().map(convert::matrix).collect(),
            reward: convert::matrix(&truth.r),
            counts: CountsTensor::zeros(n, na),
        };
        for eps in [0.25, 0.5] {
            let blended = eps_greedy_blend(&model, eps).unwrap().planning_problem(GAMMA).unwrap();
            let pi = plan(&blended);
            // Executing pi epsilon-greedily: greedy action w.p. 1 - eps, else uniform.
            let executed = |pi: &[usize]| {
                let t = (0..n)
                    .map(|s| {
                        (0..n)
                            .map(|j| {
                                (1.0 - eps) * truth.t[pi[s]][s][j]
                                    + eps * (0..na).map(|a| truth.t[a][s][j]).sum::<f64>() / na as f64
                            })
                            .collect()
                    })
                    .collect();
                let single = Model {
                    t: vec![t],
                    r: truth.r.iter().map(|row| vec![row[0]]).collect(),
                    gamma: GAMMA,
                };
                common::evaluate(&single, &vec![0; n])
            };
            let mut best = vec![f64::NEG_INFINITY; n];
            for candidate in common::all_policies(n, na) {
                for (b, v) in best.iter_mut().zip(executed(&candidate)) {
                    *b = b.max(v);
                }
            }
            let err = common::max_abs_diff(&executed(&pi), &best);
            worst = worst.max(err);
            total += 1;
            good += usize::from(err <= 1e-9);
        }
    }
    Outcome::ratio(good, total, &format!("instances, max value gap {worst:.2e} (tol 1e-9)"))
}

fn criterion_6() -> Outcome {
    let mut rng = common::rng(606);
    let (mut good, mut total, mut worst) = (0, 0, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let mdp = convert::mdp(&common::random_model(&mut rng, n, na, GAMMA));
        let base = policy_iteration(&PlanningProblem::from_mdp(&mdp), TIE_TOL).unwrap();
        let tie_free = (0..n).all(|s| base.q.gap(s) > TIE_TOL);
        for x in [-5.0, 1.0, 100.0] {
            let shifted = policy_iteration(&PlanningProblem::from_mdp(&mdp.apply_reward_shift(x)), TIE_TOL).unwrap();
            let offset = x / (1.0 - GAMMA);
            let err = (&shifted.q.0 - base.q.0.add_scalar(offset)).amax();
            worst = worst.max(err);
            let same_policy = !tie_free || shifted.policy == base.policy;
            total += 1;
            good += usize::from(err <= 1e-9 && same_policy);
        }
    }
    Outcome::ratio(good, total, &format!("cases, max Q error {worst:.2e} (tol 1e-9)"))
}

fn criterion_7() -> Outcome {
    let mut rng = common::rng(707);
    let (mut good, mut worst) = (0, 0.0f64);
    for i in 0..500 {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let gamma = rng.random_range(0.5..0.99);
        let m = common::random_model(&mut rng, n, 2, gamma);
        let (best, _) = brute_force(&m);
        let values = policy_iteration(&convert::problem(&m), TIE_TOL).unwrap().values.0;
        let err = common::max_abs_diff(values.as_slice(), &best);
        worst = worst.max(err);
        good += usize::from(err <= 1e-9);
    }
    Outcome::ratio(good, 500, &format!("problems, max value error {worst:.2e} (tol 1e-9)"))
}

const MC_REPLICATIONS: usize = 1000;

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn loss_check(rows: &[ResultRow], method: Method) -> (f64, &ResultRow, &ResultRow) {
    let of_method: Vec<_> = rows.iter().filter(|r| r.method == method).collect();
    let zero = of_method.iter().find(|r| r.strength == 0.0).expect("strength 0 in grid");
    let min = of_method
        .iter()
        .min_by(|a, b| a.mean_loss.total_cmp(&b.mean_loss))
        .unwrap();
    (zero.mean_loss - min.mean_loss, zero, min)
}

fn criterion_8() -> Outcome {
    let mut passed = true;
    let mut notes = Vec::new();
    for name in ["cliff-random", "twogoals-random", "grid-random"] {
        let mut cfg = harness::preset(name).unwrap();
        cfg.replications = MC_REPLICATIONS;
        let rows = harness::run_experiment(&cfg, workers()).unwrap();
        for method in [Method::Dirichlet, Method::Discount, Method::EpsGreedy] {
            let (gain, zero, min) = loss_check(&rows, method);
            passed &= gain >= 0.0;
            if name == "cliff-random" && method == Method::EpsGreedy {
                // Standard error of the difference of two independent means;
                // conservative, since the cells share datasets.
                let se = (zero.stderr_loss.powi(2) + min.stderr_loss.powi(2)).sqrt();
                passed &= gain >= 3.0 * se;
                notes.push(format!(
                    "cliff eps_greedy {:.3} -> {:.3} at {} ({:.1} SE)",
                    zero.mean_loss,
                    min.mean_loss,
                    min.strength,
                    gain / se
                ));
            } else if gain < 0.0 {
                notes.push(format!("{name} {method}: minimum above strength 0"));
            }
        }
    }
    Outcome::new(passed, format!("3 MDPs x 3 methods, {MC_REPLICATIONS} replications; {}", notes.join("; ")))
}

fn cli_csv(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_batchreg"))
        .args(args)
        .output()
        .expect("spawn batchreg");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn criterion_9() -> Outcome {
    let base = ["preset", "cliff-random", "--replications", "200", "--seed", "11"];
    let with = |w: &str| {
        let mut args = base.to_vec();
        args.extend(["--workers", w]);
        cli_csv(&args)
    };
    let first = with("1");
    let again = with("1");
    let eight = with("8");
    let mut cfg = harness::preset("twogoals-random").unwrap();
    cfg.replications = 300;
    let lib_same = harness::run_experiment(&cfg, 1).unwrap() == harness::run_experiment(&cfg, 8).unwrap();
    Outcome::new(
        first == again && first == eight && lib_same && !first.is_empty(),
        format!(
            "repeat run identical: {}, workers 1 vs 8 identical: {} (CLI), {} (library)",
            first == again,
            first == eight,
            lib_same
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 uniform blend = lowered discount", criterion_1),
        ("2 discount blend = lowered discount", criterion_2),
        ("3 Dirichlet matrix form", criterion_3),
        ("4 implied Dirichlet prior", criterion_4),
        ("5 eps-greedy planning", criterion_5),
        ("6 reward-shift invariance", criterion_6),
        ("7 policy iteration oracle", criterion_7),
        ("8 regularization curves", criterion_8),
        ("9 determinism", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {name}: {} ({:.1}s)", outcome.detail, start.elapsed().as_secs_f64());
        failed += usize::from(!outcome.passed);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
