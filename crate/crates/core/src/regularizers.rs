//! The three transition-matrix regularizers, each a weighted average of the
//! MLE matrix and a regularization matrix:
//!
//! * Dirichlet posterior mean: blend with the prior mean, weight
//!   `eps = sum(alpha) / (sum(c) + sum(alpha))` per state-action pair.
//! * Discount: blend with the zero matrix, `eps = (gamma - gamma_l) / gamma`.
//!   Rows become substochastic.
//! * Epsilon-greedy planning: blend each action's matrix with the average
//!   over all actions.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::EstimatedModel;
use crate::planning::PlanningProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    Dirichlet,
    Discount,
    EpsGreedy,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::None, Method::Dirichlet, Method::Discount, Method::EpsGreedy];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Dirichlet => "dirichlet",
            Method::Discount => "discount",
            Method::EpsGreedy => "eps_greedy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedModel {
    pub transition: Vec<DMatrix<f64>>,
    pub reward: DMatrix<f64>,
    pub method: Method,
    /// `eps` for discount and epsilon-greedy, prior magnitude for Dirichlet.
    pub strength: f64,
    /// Per state-action blend weight toward the regularization matrix.
    pub effective_eps: DMatrix<f64>,
}

impl RegularizedModel {
    /// The unregularized MLE model.
    pub fn unregularized(model: &EstimatedModel) -> Self {
        Self {
            transition: model.transition.clone(),
            reward: model.reward.clone(),
            method: Method::None,
            strength: 0.0,
            effective_eps: DMatrix::zeros(model.n_states(), model.n_actions()),
        }
    }

    /// Plans with the model's matrices as-is under `gamma`.
    pub fn planning_problem(&self, gamma: f64) -> Result<PlanningProblem> {
        PlanningProblem::new(self.transition.clone(), self.reward.clone(), gamma)
    }

    /// For the discount method, the lowered discount `(1 - eps) gamma` that
    /// the blend stands in for; otherwise `gamma`.
    pub fn equivalent_gamma(&self, gamma: f64) -> f64 {
        match self.method {
            Method::Discount => lowered_gamma(gamma, self.strength),
            _ => gamma,
        }
    }
}

/// Dirichlet parameters `alpha[a][(s, s')]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletPrior {
    pub alpha: Vec<DMatrix<f64>>,
}

/// Every entry `m / N`, so each row's parameters sum to `m` and the prior
/// mean is uniform.
pub fn uniform_prior(magnitude: f64, n_states: usize, n_actions: usize) -> Result<DirichletPrior> {
    if !(magnitude >= 0.0) || !magnitude.is_finite() {
        return Err(Error::Argument(format!(
            "prior magnitude {magnitude} must be a nonnegative number"
        )));
    }
    let per_entry = magnitude / n_states as f64;
    Ok(DirichletPrior {
        alpha: vec![DMatrix::from_element(n_states, n_states, per_entry); n_actions],
    })
}

/// Posterior mean `(c + alpha) / (sum c + sum alpha)` per state-action pair.
/// Pairs with no counts and no prior mass fall back to the uniform row.
pub fn dirichlet_posterior_mean(model: &EstimatedModel, prior: &DirichletPrior) -> Result<RegularizedModel> {
    let n = model.n_states();
    let na = model.n_actions();
    if prior.alpha.len() != na || prior.alpha.iter().any(|m| m.shape() != (n, n)) {
        return Err(Error::Argument("prior shape does not match the model".into()));
    }
    if prior.alpha.iter().any(|m| m.iter().any(|&x| !(x >= 0.0))) {
        return Err(Error::Argument("Dirichlet parameters must be nonnegative".into()));
    }
    let counts = &model.counts;
    let mut transition = vec![DMatrix::zeros(n, n); na];
    let mut effective_eps = DMatrix::zeros(n, na);
    let mut magnitude = 0.0f64;
    for a in 0..na {
        let alpha = &prior.alpha[a];
        for s in 0..n {
            let count_sum = counts.visit_count[(s, a)] as f64;
            let alpha_sum = alpha.row(s).sum();
            magnitude = magnitude.max(alpha_sum);
            let total = count_sum + alpha_sum;
            if total == 0.0 {
                transition[a].row_mut(s).fill(1.0 / n as f64);
                continue;
            }
            for j in 0..n {
                transition[a][(s, j)] = (counts.counts[a][(s, j)] as f64 + alpha[(s, j)]) / total;
            }
            effective_eps[(s, a)] = alpha_sum / total;
        }
    }
    Ok(RegularizedModel {
        transition,
        reward: model.reward.clone(),
        method: Method::Dirichlet,
        strength: magnitude,
        effective_eps,
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(Error::Argument(format!("eps {eps} outside [0, 1]")))
    }
}

/// `(1 - eps) T_hat(a)`: planning with these rows under `gamma` is planning
/// with `T_hat` under `(1 - eps) gamma`.
pub fn discount_blend(model: &EstimatedModel, eps: f64) -> Result<RegularizedModel> {
    check_eps(eps)?;
    let keep = 1.0 - eps;
    Ok(RegularizedModel {
        transition: model.transition.iter().map(|t| t * keep).collect(),
        reward: model.reward.clone(),
        method: Method::Discount,
        strength: eps,
        effective_eps: DMatrix::from_element(model.n_states(), model.n_actions(), eps),
    })
}

/// `(1 - eps) T_hat(a) + eps * mean_a' T_hat(a')`.
pub fn eps_greedy_blend(model: &EstimatedModel, eps: f64) -> Result<RegularizedModel> {
    check_eps(eps)?;
    let na = model.n_actions();
    let n = model.n_states();
    let mut mean = DMatrix::zeros(n, n);
    for t in &model.transition {
        mean += t;
    }
    mean /= na as f64;
    let transition = model
        .transition
        .iter()
        .map(|t| t * (1.0 - eps) + &mean * eps)
        .collect();
    Ok(RegularizedModel {
        transition,
        reward: model.reward.clone(),
        method: Method::EpsGreedy,
        strength: eps,
        effective_eps: DMatrix::from_element(n, na, eps),
    })
}

/// Per-entry uniform Dirichlet parameter that reproduces discount
/// regularization from `gamma` down to `gamma_l` at a pair with `count_sum`
/// observed transitions: `((gamma - gamma_l) / gamma_l) * count_sum / N`.
pub fn implied_prior_magnitude(gamma: f64, gamma_l: f64, count_sum: f64, n_states: usize) -> Result<f64> {
    if !(gamma_l > 0.0) {
        return Err(Error::Domain(format!(
            "lowered discount {gamma_l} must be positive"
        )));
    }
    if !(gamma_l <= gamma && gamma < 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < gamma_l <= gamma < 1, got gamma_l = {gamma_l}, gamma = {gamma}"
        )));
    }
    if !(count_sum >= 0.0) {
        return Err(Error::Domain(format!("count sum {count_sum} is negative")));
    }
    Ok((gamma - gamma_l) / gamma_l * count_sum / n_states as f64)
}

/// `eps = (gamma - gamma_l) / gamma`.
pub fn eps_from_discounts(gamma: f64, gamma_l: f64) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::Domain("gamma must be nonzero".into()));
    }
    Ok((gamma - gamma_l) / gamma)
}

/// `gamma_l = (1 - eps) gamma`; inverse of [`eps_from_discounts`].
pub fn lowered_gamma(gamma: f64, eps: f64) -> f64 {
    (1.0 - eps) * gamma
}

/// `eps = sum(alpha) / (sum(c) + sum(alpha))`.
pub fn eps_from_prior(alpha_sum: f64, count_sum: f64) -> Result<f64> {
    let total = alpha_sum + count_sum;
    if total == 0.0 {
        return Err(Error::Domain("alpha and count sums are both zero".into()));
    }
    Ok(alpha_sum / total)
}

/// `sum(alpha) = eps / (1 - eps) * sum(c)`; inverse of [`eps_from_prior`].
pub fn prior_sum_for_eps(eps: f64, count_sum: f64) -> Result<f64> {
    if eps >= 1.0 {
        return Err(Error::Domain("eps = 1 needs an infinite prior".into()));
    }
    Ok(eps / (1.0 - eps) * count_sum)
}
