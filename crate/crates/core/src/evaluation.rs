//! Policy loss in the true MDP and transition-matrix MSE.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, TabularMdp, ValueFunction};
use crate::planning::{policy_evaluation, PlanningProblem};
use crate::regularizers::{Method, RegularizedModel};

#[derive(Debug, Clone, PartialEq)]
pub struct LossResult {
    pub loss: f64,
    pub v_opt: ValueFunction,
    pub v_reg: ValueFunction,
}

/// `sum_s start(s) * (V^opt(s) - V^reg(s))`, both values computed in the true MDP.
pub fn policy_loss(
    true_mdp: &TabularMdp,
    pi_reg: &DeterministicPolicy,
    pi_opt: &DeterministicPolicy,
    start_dist: &DVector<f64>,
) -> Result<LossResult> {
    if start_dist.len() != true_mdp.n_states {
        return Err(Error::Argument(format!(
            "start distribution has {} entries for {} states",
            start_dist.len(),
            true_mdp.n_states
        )));
    }
    let problem = PlanningProblem::from_mdp(true_mdp);
    let v_opt = policy_evaluation(&problem, pi_opt)?;
    let v_reg = if pi_reg == pi_opt {
        v_opt.clone()
    } else {
        policy_evaluation(&problem, pi_reg)?
    };
    let loss = start_dist.dot(&(&v_opt.0 - &v_reg.0));
    Ok(LossResult { loss, v_opt, v_reg })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseResult {
    pub mse_plain: f64,
    /// With an explicit absorbing state for the mass the discount blend
    /// removes; equal to `mse_plain` for the other methods.
    pub mse_absorbing: f64,
}

/// Mean squared entrywise difference over all `(s, a, s')`. For the discount
/// method both models are also augmented with an absorbing state: regularized
/// rows send `eps` to it, true rows send nothing, and it loops to itself in
/// both. That variant averages over `|A| (N + 1)^2` entries.
pub fn transition_mse(t_true: &[DMatrix<f64>], reg: &RegularizedModel) -> Result<MseResult> {
    if t_true.len() != reg.transition.len()
        || t_true.iter().zip(&reg.transition).any(|(a, b)| a.shape() != b.shape())
    {
        return Err(Error::Argument("transition shapes do not match".into()));
    }
    let n = t_true.first().map_or(0, |t| t.nrows());
    let na = t_true.len();
    let squared: f64 = t_true
        .iter()
        .zip(&reg.transition)
        .map(|(a, b)| (a - b).norm_squared())
        .sum();
    let mse_plain = squared / (na * n * n) as f64;
    let mse_absorbing = if reg.method == Method::Discount {
        let eps = reg.strength;
        let exit_mass = (na * n) as f64 * eps * eps;
        (squared + exit_mass) / (na * (n + 1) * (n + 1)) as f64
    } else {
        mse_plain
    };
    Ok(MseResult {
        mse_plain,
        mse_absorbing,
    })
}
