//! Sufficient statistics and the maximum-likelihood model.

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Reward assumed for state-action pairs absent from the data.
pub const UNVISITED_REWARD: f64 = 0.50;

#[derive(Debug, Clone, PartialEq)]
pub struct CountsTensor {
    /// `counts[a][(s, s')]` is the number of observed `s -a-> s'` transitions.
    pub counts: Vec<DMatrix<u64>>,
    pub reward_sum: DMatrix<f64>,
    pub visit_count: DMatrix<u64>,
}

impl CountsTensor {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            counts: vec![DMatrix::zeros(n_states, n_states); n_actions],
            reward_sum: DMatrix::zeros(n_states, n_actions),
            visit_count: DMatrix::zeros(n_states, n_actions),
        }
    }

    pub fn n_states(&self) -> usize {
        self.visit_count.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.visit_count.ncols()
    }

    pub fn total(&self) -> u64 {
        self.visit_count.sum()
    }

    /// Records a single transition. Indices are assumed in range.
    pub fn record(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        self.counts[action][(state, next_state)] += 1;
        self.reward_sum[(state, action)] += reward;
        self.visit_count[(state, action)] += 1;
    }
}

pub fn count(dataset: &Dataset, n_states: usize, n_actions: usize) -> Result<CountsTensor> {
    let mut out = CountsTensor::zeros(n_states, n_actions);
    for (t, traj) in dataset.trajectories.iter().enumerate() {
        for (i, step) in traj.steps.iter().enumerate() {
            if step.state >= n_states || step.next_state >= n_states || step.action >= n_actions {
                return Err(Error::StepOutOfRange {
                    trajectory: t,
                    step: i,
                    detail: format!(
                        "({}, {}, {}) with {n_states} states and {n_actions} actions",
                        step.state, step.action, step.next_state
                    ),
                });
            }
            out.record(step.state, step.action, step.reward, step.next_state);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedModel {
    pub transition: Vec<DMatrix<f64>>,
    pub reward: DMatrix<f64>,
    pub counts: CountsTensor,
}

impl EstimatedModel {
    pub fn n_states(&self) -> usize {
        self.reward.nrows()
    }

    pub fn n_actions(&self) -> usize {
        self.reward.ncols()
    }
}

/// Empirical frequencies and mean rewards. Unvisited pairs get a uniform row
/// and reward [`UNVISITED_REWARD`]. States listed in `absorbing` are known to
/// pay nothing, so their reward estimate is pinned at zero.
pub fn mle_model(counts: &CountsTensor, absorbing: &[usize]) -> EstimatedModel {
    let n = counts.n_states();
    let na = counts.n_actions();
    let uniform = 1.0 / n as f64;
    let mut transition = vec![DMatrix::zeros(n, n); na];
    let mut reward = DMatrix::zeros(n, na);
    for a in 0..na {
        for s in 0..n {
            let visits = counts.visit_count[(s, a)];
            if visits == 0 {
                transition[a].row_mut(s).fill(uniform);
                reward[(s, a)] = UNVISITED_REWARD;
            } else {
                let total = visits as f64;
                for j in 0..n {
                    transition[a][(s, j)] = counts.counts[a][(s, j)] as f64 / total;
                }
                reward[(s, a)] = counts.reward_sum[(s, a)] / total;
            }
        }
    }
    for &s in absorbing {
        reward.row_mut(s).fill(0.0);
    }
    EstimatedModel {
        transition,
        reward,
        counts: counts.clone(),
    }
}
