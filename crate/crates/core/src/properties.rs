//! Randomized equivalence checks over families of small MDPs, plus the
//! generators they use. `batchreg check` runs these; each returns a
//! [`CheckReport`] counting how many instances satisfied the property.

use std::fmt;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Exp1;

use crate::data::{child_seed, rng_from_seed};
use crate::error::Result;
use crate::estimation::{mle_model, CountsTensor};
use crate::mdp::{DeterministicPolicy, TabularMdp, TIE_TOL};
use crate::planning::{compare_plans, policy_evaluation, policy_iteration, theorem1_check, PlanningProblem};
use crate::regularizers::{
    dirichlet_posterior_mean, discount_blend, eps_greedy_blend, implied_prior_magnitude, lowered_gamma,
    uniform_prior,
};

pub const CHECK_GAMMA: f64 = 0.95;
pub const EPS_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// A row drawn uniformly from the probability simplex.
pub fn random_simplex_row(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn random_transitions(rng: &mut impl Rng, n: usize, na: usize) -> Vec<DMatrix<f64>> {
    (0..na)
        .map(|_| {
            let rows: Vec<f64> = (0..n).flat_map(|_| random_simplex_row(rng, n)).collect();
            DMatrix::from_row_slice(n, n, &rows)
        })
        .collect()
}

/// Dense random MDP with rewards uniform on `[-1, 1]` per state-action pair.
pub fn random_mdp(rng: &mut impl Rng, n: usize, na: usize, gamma: f64) -> TabularMdp {
    let transition = random_transitions(rng, n, na);
    let reward = DMatrix::from_fn(n, na, |_, _| rng.random_range(-1.0..1.0));
    TabularMdp::new(
        transition,
        reward,
        DMatrix::zeros(n, na),
        gamma,
        DVector::from_element(n, 1.0 / n as f64),
        vec![],
    )
    .expect("random MDP is valid")
}

/// Like [`random_mdp`] but the reward depends on the state only.
pub fn random_state_reward_mdp(rng: &mut impl Rng, n: usize, na: usize, gamma: f64) -> TabularMdp {
    let mut mdp = random_mdp(rng, n, na, gamma);
    for s in 0..n {
        let r = rng.random_range(-1.0..1.0);
        mdp.reward_mean.row_mut(s).fill(r);
    }
    mdp
}

/// Counts where every state-action pair has exactly `per_pair` transitions.
pub fn uniform_visit_counts(rng: &mut impl Rng, n: usize, na: usize, per_pair: u64) -> CountsTensor {
    let mut counts = CountsTensor::zeros(n, na);
    for a in 0..na {
        for s in 0..n {
            let row = random_simplex_row(rng, n);
            for _ in 0..per_pair {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut dest = n - 1;
                for (j, p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        dest = j;
                        break;
                    }
                }
                counts.record(s, a, 0.0, dest);
            }
        }
    }
    counts
}

/// Value of executing `pi` epsilon-greedily: the greedy action with
/// probability `1 - eps`, a uniformly random action otherwise.
pub fn eps_greedy_policy_values(p: &PlanningProblem, pi: &DeterministicPolicy, eps: f64) -> Result<DVector<f64>> {
    let n = p.n_states();
    let na = p.n_actions() as f64;
    let mut lhs = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::zeros(n);
    for s in 0..n {
        let greedy = pi.action(s);
        for (a, t) in p.transition.iter().enumerate() {
            let w = eps / na + if a == greedy { 1.0 - eps } else { 0.0 };
            rhs[s] += w * p.reward[(s, a)];
            for j in 0..n {
                lhs[(s, j)] -= p.gamma * w * t[(s, j)];
            }
        }
    }
    lhs.lu().solve(&rhs).ok_or(crate::error::Error::Singular)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub seconds: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {}/{} ({:.2}s){}",
            if self.ok() { "PASS" } else { "FAIL" },
            self.name,
            self.passed,
            self.total,
            self.seconds,
            if self.detail.is_empty() { String::new() } else { format!(" {}", self.detail) }
        )
    }
}

fn run_check(
    name: &'static str,
    seed: u64,
    instances: usize,
    mut one: impl FnMut(&mut rand_chacha::ChaCha8Rng, usize) -> Result<std::result::Result<(), String>>,
) -> Result<CheckReport> {
    let start = Instant::now();
    let mut passed = 0;
    let mut first_failure = String::new();
    for i in 0..instances {
        let mut rng = rng_from_seed(child_seed(seed, i as u64));
        match one(&mut rng, i)? {
            Ok(()) => passed += 1,
            Err(why) if first_failure.is_empty() => first_failure = format!("first failure #{i}: {why}"),
            Err(_) => {}
        }
    }
    Ok(CheckReport {
        name,
        passed,
        total: instances,
        seconds: start.elapsed().as_secs_f64(),
        detail: first_failure,
    })
}

/// `(T, (1 - eps) gamma)` and `((1 - eps) T + eps U, gamma)` share an optimal policy.
pub fn check_uniform_blend_equivalence(seed: u64, mdps: usize) -> Result<CheckReport> {
    run_check("uniform blend = lowered discount", seed, mdps, |rng, _| {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let mdp = random_mdp(rng, n, na, CHECK_GAMMA);
        for eps in EPS_GRID {
            let report = theorem1_check(&mdp, eps, TIE_TOL)?;
            if !report.agree {
                return Ok(Err(format!("eps {eps}, states {:?}", report.disagreements)));
            }
        }
        Ok(Ok(()))
    })
}

/// Planning on the discount blend under `gamma` equals planning on the MLE
/// matrix under the lowered discount.
pub fn check_discount_blend(seed: u64, instances: usize) -> Result<CheckReport> {
    run_check("discount blend = lowered discount", seed, instances, |rng, _| {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let per_pair = rng.random_range(1..=20);
        let mut counts = uniform_visit_counts(rng, n, na, per_pair);
        for s in 0..n {
            for a in 0..na {
                counts.reward_sum[(s, a)] = rng.random_range(-1.0..1.0) * counts.visit_count[(s, a)] as f64;
            }
        }
        let model = mle_model(&counts, &[]);
        for eps in EPS_GRID {
            let blended = policy_iteration(&discount_blend(&model, eps)?.planning_problem(CHECK_GAMMA)?, TIE_TOL)?;
            let lowered = PlanningProblem::new(
                model.transition.clone(),
                model.reward.clone(),
                lowered_gamma(CHECK_GAMMA, eps),
            )?;
            let lowered = policy_iteration(&lowered, TIE_TOL)?;
            let report = compare_plans(&blended, &lowered, TIE_TOL);
            if !report.agree {
                return Ok(Err(format!("eps {eps}, states {:?}", report.disagreements)));
            }
        }
        Ok(Ok(()))
    })
}

/// With equal visit totals, the per-pair posterior mean is the matrix blend
/// `(1 - eps) T_mle + eps U` to within 1e-12.
pub fn check_dirichlet_matrix_form(seed: u64, instances: usize) -> Result<CheckReport> {
    run_check("Dirichlet posterior = matrix blend", seed, instances, |rng, _| {
        let n = rng.random_range(2..=8);
        let na = rng.random_range(1..=3);
        let per_pair = rng.random_range(1..=40);
        let counts = uniform_visit_counts(rng, n, na, per_pair);
        let model = mle_model(&counts, &[]);
        for m in [1.0, 10.0, 100.0] {
            let post = dirichlet_posterior_mean(&model, &uniform_prior(m, n, na)?)?;
            let eps = m / (per_pair as f64 + m);
            for a in 0..na {
                let blend = model.transition[a].map(|p| (1.0 - eps) * p + eps / n as f64);
                let err = (&post.transition[a] - blend).amax();
                if err > 1e-12 {
                    return Ok(Err(format!("m {m}, action {a}, max error {err:e}")));
                }
            }
        }
        Ok(Ok(()))
    })
}

/// The discount blend and the uniform Dirichlet prior it implies yield the
/// same policy under uniform visits.
pub fn check_implied_prior(seed: u64, instances: usize) -> Result<CheckReport> {
    run_check("discount blend = implied Dirichlet prior", seed, instances, |rng, i| {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let per_pair = rng.random_range(1..=20);
        let mut counts = uniform_visit_counts(rng, n, na, per_pair);
        for s in 0..n {
            for a in 0..na {
                counts.reward_sum[(s, a)] = rng.random_range(-1.0..1.0) * per_pair as f64;
            }
        }
        let model = mle_model(&counts, &[]);
        let eps = EPS_GRID[i % EPS_GRID.len()];
        let alpha = implied_prior_magnitude(
            CHECK_GAMMA,
            lowered_gamma(CHECK_GAMMA, eps),
            per_pair as f64,
            n,
        )?;
        let prior = uniform_prior(alpha * n as f64, n, na)?;
        let dirichlet = policy_iteration(
            &dirichlet_posterior_mean(&model, &prior)?.planning_problem(CHECK_GAMMA)?,
            TIE_TOL,
        )?;
        let discount = policy_iteration(&discount_blend(&model, eps)?.planning_problem(CHECK_GAMMA)?, TIE_TOL)?;
        let report = compare_plans(&dirichlet, &discount, TIE_TOL);
        if report.agree {
            Ok(Ok(()))
        } else {
            Ok(Err(format!("eps {eps}, states {:?}", report.disagreements)))
        }
    })
}

/// For state-only rewards, planning on the epsilon-greedy blend finds the
/// deterministic policy with the best epsilon-greedy value.
pub fn check_eps_greedy_planning(seed: u64, mdps: usize) -> Result<CheckReport> {
    run_check("eps-greedy blend = best eps-greedy policy", seed, mdps, |rng, _| {
        let n = rng.random_range(2..=4);
        let mdp = random_state_reward_mdp(rng, n, 2, CHECK_GAMMA);
        let truth = PlanningProblem::from_mdp(&mdp);
        let model = crate::estimation::EstimatedModel {
            transition: mdp.transition.clone(),
            reward: mdp.reward_mean.clone(),
            counts: CountsTensor::zeros(n, 2),
        };
        for eps in [0.25, 0.5] {
            let plan = policy_iteration(&eps_greedy_blend(&model, eps)?.planning_problem(CHECK_GAMMA)?, TIE_TOL)?;
            let planned = eps_greedy_policy_values(&truth, &plan.policy, eps)?;
            let mut best = DVector::from_element(n, f64::NEG_INFINITY);
            for pi in DeterministicPolicy::enumerate(n, 2) {
                let v = eps_greedy_policy_values(&truth, &pi, eps)?;
                best = best.zip_map(&v, f64::max);
            }
            let gap = (&best - &planned).amax();
            if gap > 1e-9 {
                return Ok(Err(format!("eps {eps}, value gap {gap:e}")));
            }
            let blended_values = (&plan.values.0 - &planned).amax();
            if blended_values > 1e-9 {
                return Ok(Err(format!("eps {eps}, blend/explicit mismatch {blended_values:e}")));
            }
        }
        Ok(Ok(()))
    })
}

/// Adding `x` to every reward shifts Q by `x / (1 - gamma)` and keeps the policy.
pub fn check_reward_shift(seed: u64, mdps: usize) -> Result<CheckReport> {
    run_check("reward shift invariance", seed, mdps, |rng, _| {
        let n = rng.random_range(2..=6);
        let na = rng.random_range(2..=3);
        let mdp = random_mdp(rng, n, na, CHECK_GAMMA);
        let base = policy_iteration(&PlanningProblem::from_mdp(&mdp), TIE_TOL)?;
        for x in [-5.0, 1.0, 100.0] {
            let shifted = policy_iteration(&PlanningProblem::from_mdp(&mdp.apply_reward_shift(x)), TIE_TOL)?;
            let report = compare_plans(&base, &shifted, TIE_TOL);
            if !report.agree {
                return Ok(Err(format!("x {x}, states {:?}", report.disagreements)));
            }
            if report.excluded.is_empty() {
                let offset = x / (1.0 - CHECK_GAMMA);
                let err = (&shifted.q.0 - base.q.0.add_scalar(offset)).amax();
                if err > 1e-9 {
                    return Ok(Err(format!("x {x}, Q shift error {err:e}")));
                }
            }
        }
        Ok(Ok(()))
    })
}

/// Policy iteration reaches the best value found by enumerating every policy.
pub fn check_policy_iteration_oracle(seed: u64, problems: usize) -> Result<CheckReport> {
    run_check("policy iteration = exhaustive search", seed, problems, |rng, i| {
        let n = if i % 2 == 0 { 2 } else { 3 };
        let mdp = random_mdp(rng, n, 2, CHECK_GAMMA);
        let p = PlanningProblem::from_mdp(&mdp);
        let plan = policy_iteration(&p, TIE_TOL)?;
        let mut best = DVector::from_element(n, f64::NEG_INFINITY);
        for pi in DeterministicPolicy::enumerate(n, 2) {
            best = best.zip_map(&policy_evaluation(&p, &pi)?.0, f64::max);
        }
        let err = (&best - &plan.values.0).amax();
        if err > 1e-9 {
            Ok(Err(format!("value error {err:e}")))
        } else {
            Ok(Ok(()))
        }
    })
}

/// All checks at their default instance counts.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        check_uniform_blend_equivalence(seed, 200)?,
        check_discount_blend(seed, 200)?,
        check_dirichlet_matrix_form(seed, 100)?,
        check_implied_prior(seed, 100)?,
        check_eps_greedy_planning(seed, 100)?,
        check_reward_shift(seed, 100)?,
        check_policy_iteration_oracle(seed, 500)?,
    ])
}
