//! Batch data collection from a known MDP.
//!
//! Each step's action comes from the true optimal policy with probability
//! `p_optimal` and is otherwise uniform over all actions. Trajectory `i` of a
//! dataset draws from its own generator seeded with [`child_seed`], so any
//! trajectory (or replication) can be regenerated independently.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, TabularMdp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn is_chained(&self) -> bool {
        self.steps.windows(2).all(|w| w[0].next_state == w[1].state)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub trajectories: Vec<Trajectory>,
}

impl Dataset {
    pub fn n_steps(&self) -> usize {
        self.trajectories.iter().map(|t| t.steps.len()).sum()
    }

    pub fn steps(&self) -> impl Iterator<Item = &Step> {
        self.trajectories.iter().flat_map(|t| t.steps.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StartMode {
    Uniform,
    Fixed { state: usize },
    Set { states: Vec<usize> },
}

impl StartMode {
    /// The distribution trajectories start from, as a probability vector.
    pub fn distribution(&self, n_states: usize) -> Vec<f64> {
        let mut d = vec![0.0; n_states];
        match self {
            StartMode::Uniform => d.fill(1.0 / n_states as f64),
            StartMode::Fixed { state } => d[*state] = 1.0,
            StartMode::Set { states } => {
                for &s in states {
                    d[s] += 1.0 / states.len() as f64;
                }
            }
        }
        d
    }

    fn sample(&self, n_states: usize, rng: &mut impl Rng) -> usize {
        match self {
            StartMode::Uniform => rng.random_range(0..n_states),
            StartMode::Fixed { state } => *state,
            StartMode::Set { states } => states[rng.random_range(0..states.len())],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionConfig {
    pub n_trajectories: usize,
    pub trajectory_length: usize,
    pub p_optimal: f64,
    pub start_mode: StartMode,
}

impl CollectionConfig {
    pub fn validate(&self, n_states: usize) -> Result<()> {
        if self.n_trajectories == 0 || self.trajectory_length == 0 {
            return Err(Error::Config(
                "n_trajectories and trajectory_length must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_optimal) {
            return Err(Error::Config(format!(
                "p_optimal {} outside [0, 1]",
                self.p_optimal
            )));
        }
        match &self.start_mode {
            StartMode::Uniform => {}
            StartMode::Fixed { state } if *state >= n_states => {
                return Err(Error::Config(format!("start state {state} out of range")));
            }
            StartMode::Fixed { .. } => {}
            StartMode::Set { states } => {
                if states.is_empty() {
                    return Err(Error::Config("start state set is empty".into()));
                }
                if let Some(s) = states.iter().find(|&&s| s >= n_states) {
                    return Err(Error::Config(format!("start state {s} out of range")));
                }
            }
        }
        Ok(())
    }
}

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`:
/// `mix64(master ^ mix64(index + 0x9e3779b97f4a7c15))`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample_row(row: impl Iterator<Item = f64>, u: f64) -> Option<usize> {
    let mut acc = 0.0;
    let mut last = None;
    for (j, p) in row.enumerate() {
        if p > 0.0 {
            acc += p;
            last = Some(j);
            if u < acc {
                return Some(j);
            }
        }
    }
    last
}

/// Samples one trajectory of `cfg.trajectory_length` steps.
pub fn sample_trajectory(
    mdp: &TabularMdp,
    optimal: &DeterministicPolicy,
    cfg: &CollectionConfig,
    rng: &mut impl Rng,
) -> Trajectory {
    let mut steps = Vec::with_capacity(cfg.trajectory_length);
    let mut state = cfg.start_mode.sample(mdp.n_states, rng);
    for _ in 0..cfg.trajectory_length {
        let action = if rng.random::<f64>() < cfg.p_optimal {
            optimal.action(state)
        } else {
            rng.random_range(0..mdp.n_actions)
        };
        let u: f64 = rng.random();
        let noise: f64 = rng.sample(StandardNormal);
        let (reward, next_state) = if mdp.is_absorbing(state) {
            (0.0, state)
        } else {
            let next = sample_row(mdp.transition[action].row(state).iter().copied(), u)
                .expect("validated rows carry mass");
            let reward = mdp.reward_mean[(state, action)] + mdp.reward_std[(state, action)] * noise;
            (reward, next)
        };
        steps.push(Step {
            state,
            action,
            reward,
            next_state,
        });
        state = next_state;
    }
    Trajectory { steps }
}

pub fn generate_dataset(
    mdp: &TabularMdp,
    optimal: &DeterministicPolicy,
    cfg: &CollectionConfig,
    master_seed: u64,
) -> Dataset {
    let trajectories = (0..cfg.n_trajectories)
        .map(|i| {
            let mut rng = rng_from_seed(child_seed(master_seed, i as u64));
            sample_trajectory(mdp, optimal, cfg, &mut rng)
        })
        .collect();
    Dataset { trajectories }
}

/// Appends one CSV row per step:
/// `replication,trajectory,step,state,action,reward,next_state`.
pub fn write_dataset_csv<W: Write>(
    writer: &mut csv::Writer<W>,
    replication: usize,
    dataset: &Dataset,
) -> Result<()> {
    for (t, traj) in dataset.trajectories.iter().enumerate() {
        for (i, step) in traj.steps.iter().enumerate() {
            writer.write_record([
                replication.to_string(),
                t.to_string(),
                i.to_string(),
                step.state.to_string(),
                step.action.to_string(),
                step.reward.to_string(),
                step.next_state.to_string(),
            ])?;
        }
    }
    Ok(())
}

pub const DATASET_CSV_HEADER: [&str; 7] = [
    "replication",
    "trajectory",
    "step",
    "state",
    "action",
    "reward",
    "next_state",
];
