//! Exact policy evaluation and policy iteration over tabular models whose
//! transition rows may be substochastic (row sums at most one).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, QFunction, TabularMdp, ValueFunction, PROB_TOL};

const MAX_ITERATIONS: usize = 10_000;

/// Transition matrices, rewards and a discount factor, ready for planning.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningProblem {
    pub transition: Vec<DMatrix<f64>>,
    pub reward: DMatrix<f64>,
    pub gamma: f64,
}

impl PlanningProblem {
    pub fn new(transition: Vec<DMatrix<f64>>, reward: DMatrix<f64>, gamma: f64) -> Result<Self> {
        let p = Self {
            transition,
            reward,
            gamma,
        };
        p.check()?;
        Ok(p)
    }

    pub fn from_mdp(mdp: &TabularMdp) -> Self {
        Self {
            transition: mdp.transition.clone(),
            reward: mdp.reward_mean.clone(),
            gamma: mdp.gamma,
        }
    }

    pub fn n_states(&self) -> usize {
        self.reward.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.transition.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.n_states();
        if self.transition.is_empty() || self.reward.ncols() != self.transition.len() {
            return Err(Error::Argument(format!(
                "reward has {} columns for {} actions",
                self.reward.ncols(),
                self.transition.len()
            )));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Argument(format!("gamma {} outside [0, 1)", self.gamma)));
        }
        let mut max_row = 0.0f64;
        for (a, t) in self.transition.iter().enumerate() {
            if t.shape() != (n, n) {
                return Err(Error::Argument(format!(
                    "transition[{a}] has shape {:?}, expected ({n}, {n})",
                    t.shape()
                )));
            }
            if t.iter().any(|&p| !(p >= 0.0)) {
                return Err(Error::Argument(format!("transition[{a}] has a negative entry")));
            }
            for s in 0..n {
                let sum = t.row(s).sum();
                if sum > 1.0 + PROB_TOL {
                    return Err(Error::Argument(format!(
                        "transition[{a}] row {s} sums to {sum} > 1"
                    )));
                }
                max_row = max_row.max(sum);
            }
        }
        if self.gamma * max_row >= 1.0 {
            return Err(Error::Argument(
                "gamma times the largest row sum must be below one".into(),
            ));
        }
        Ok(())
    }

    /// `Q(s, a) = r(s, a) + gamma * sum_s' T(s' | s, a) v(s')`.
    pub fn q_from_values(&self, v: &ValueFunction) -> QFunction {
        let mut q = self.reward.clone();
        for (a, t) in self.transition.iter().enumerate() {
            let backup = t * &v.0;
            for s in 0..self.n_states() {
                q[(s, a)] += self.gamma * backup[s];
            }
        }
        QFunction(q)
    }

    /// `max_s |V(s) - (r_pi + gamma T_pi V)(s)|`.
    pub fn bellman_residual(&self, pi: &DeterministicPolicy, v: &ValueFunction) -> f64 {
        let q = self.q_from_values(v);
        (0..self.n_states())
            .map(|s| (v.0[s] - q.0[(s, pi.action(s))]).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves `V = r_pi + gamma T_pi V` by LU decomposition.
pub fn policy_evaluation(p: &PlanningProblem, pi: &DeterministicPolicy) -> Result<ValueFunction> {
    let n = p.n_states();
    if pi.len() != n {
        return Err(Error::Argument(format!(
            "policy covers {} states, problem has {n}",
            pi.len()
        )));
    }
    let mut lhs = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..n {
        let a = pi.action(s);
        let t = &p.transition[a];
        for j in 0..n {
            lhs[(s, j)] -= p.gamma * t[(s, j)];
        }
        rhs[s] = p.reward[(s, a)];
    }
    lhs.lu().solve(&rhs).map(ValueFunction).ok_or(Error::Singular)
}

/// Lowest-index action whose value is within `tie_tol` of the row maximum.
pub fn greedy_from_q(q: &QFunction, tie_tol: f64) -> DeterministicPolicy {
    let actions = (0..q.0.nrows())
        .map(|s| greedy_action(q, s, tie_tol))
        .collect();
    DeterministicPolicy::new(actions, q.0.ncols()).expect("argmax is always in range")
}

fn greedy_action(q: &QFunction, s: usize, tie_tol: f64) -> usize {
    let row = q.0.row(s);
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.iter()
        .position(|&v| v >= best - tie_tol)
        .unwrap_or(0)
}

/// One improvement step. The current action is kept whenever it is within
/// `tie_tol` of the best, which rules out cycling on numerical noise.
pub fn improve_policy(q: &QFunction, current: &DeterministicPolicy, tie_tol: f64) -> DeterministicPolicy {
    let actions = (0..q.0.nrows())
        .map(|s| {
            let row = q.0.row(s);
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cur = current.action(s);
            if row[cur] >= best - tie_tol {
                cur
            } else {
                greedy_action(q, s, tie_tol)
            }
        })
        .collect();
    DeterministicPolicy::new(actions, q.0.ncols()).expect("argmax is always in range")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub policy: DeterministicPolicy,
    pub values: ValueFunction,
    pub q: QFunction,
    pub iterations: usize,
}

/// Howard policy iteration from the all-zeros policy. The returned policy is
/// the lowest-index greedy policy of the converged Q-function.
pub fn policy_iteration(p: &PlanningProblem, tie_tol: f64) -> Result<Plan> {
    let n = p.n_states();
    let mut policy = DeterministicPolicy::uniform_action(n, 0);
    for iteration in 1..=MAX_ITERATIONS {
        let values = policy_evaluation(p, &policy)?;
        let q = p.q_from_values(&values);
        let next = improve_policy(&q, &policy, tie_tol);
        if next == policy {
            let canonical = greedy_from_q(&q, tie_tol);
            if canonical == policy {
                return Ok(Plan {
                    policy,
                    values,
                    q,
                    iterations: iteration,
                });
            }
            let values = policy_evaluation(p, &canonical)?;
            let q = p.q_from_values(&values);
            return Ok(Plan {
                policy: canonical,
                values,
                q,
                iterations: iteration,
            });
        }
        policy = next;
    }
    Err(Error::NoConvergence(MAX_ITERATIONS))
}

/// Outcome of comparing the optimal policies of a discounted model
/// `(T, (1 - eps) gamma)` and a uniform-blended model
/// `((1 - eps) T + eps U, gamma)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub lowered_discount: DeterministicPolicy,
    pub uniform_blend: DeterministicPolicy,
    /// States with a Q-tie in either model; not held to agreement.
    pub excluded: Vec<usize>,
    pub disagreements: Vec<usize>,
    pub agree: bool,
}

pub fn theorem1_check(mdp: &TabularMdp, eps: f64, tie_tol: f64) -> Result<EquivalenceReport> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Argument(format!("eps {eps} outside [0, 1)")));
    }
    let n = mdp.n_states;
    let lowered = PlanningProblem::new(
        mdp.transition.clone(),
        mdp.reward_mean.clone(),
        (1.0 - eps) * mdp.gamma,
    )?;
    let uniform = 1.0 / n as f64;
    let blended = mdp
        .transition
        .iter()
        .map(|t| t.map(|p| (1.0 - eps) * p + eps * uniform))
        .collect();
    let blended = PlanningProblem::new(blended, mdp.reward_mean.clone(), mdp.gamma)?;

    let first = policy_iteration(&lowered, tie_tol)?;
    let second = policy_iteration(&blended, tie_tol)?;
    Ok(compare_plans(&first, &second, tie_tol))
}

/// Compares two plans state by state, skipping states tied in either plan.
pub fn compare_plans(first: &Plan, second: &Plan, tie_tol: f64) -> EquivalenceReport {
    let n = first.policy.len();
    let mut excluded = Vec::new();
    let mut disagreements = Vec::new();
    for s in 0..n {
        if first.q.gap(s) <= tie_tol || second.q.gap(s) <= tie_tol {
            excluded.push(s);
        } else if first.policy.action(s) != second.policy.action(s) {
            disagreements.push(s);
        }
    }
    EquivalenceReport {
        lowered_discount: first.policy.clone(),
        uniform_blend: second.policy.clone(),
        agree: disagreements.is_empty(),
        excluded,
        disagreements,
    }
}
