//! The three benchmark MDPs and the JSON MDP spec file.
//!
//! Movement noise is modelled as a slip: with probability `slip_prob` the
//! intended move is replaced by a move drawn uniformly from the action set.
//! Reward means are stored per state-action pair as the expectation of the
//! transition reward under that noise.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

pub const DEFAULT_GAMMA: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridNoiseConfig {
    pub slip_prob: f64,
    pub reward_std: f64,
}

impl Default for GridNoiseConfig {
    fn default() -> Self {
        Self {
            slip_prob: 0.1,
            reward_std: 0.25,
        }
    }
}

impl GridNoiseConfig {
    pub fn noiseless() -> Self {
        Self {
            slip_prob: 0.0,
            reward_std: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.slip_prob) {
            return Err(Error::Argument(format!(
                "slip_prob {} outside [0, 1)",
                self.slip_prob
            )));
        }
        if !(self.reward_std >= 0.0) || !self.reward_std.is_finite() {
            return Err(Error::Argument(format!(
                "reward_std {} must be a nonnegative number",
                self.reward_std
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    CliffWalk,
    TwoGoals,
    InterconnectedGrid,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::CliffWalk, Builtin::TwoGoals, Builtin::InterconnectedGrid];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::CliffWalk => "cliff-walk",
            Builtin::TwoGoals => "two-goals",
            Builtin::InterconnectedGrid => "interconnected-grid",
        }
    }

    /// Builds the environment. The interconnected grid takes its reward
    /// noise from `noise` and ignores `slip_prob`; its randomness lives in
    /// the topology itself.
    pub fn build(self, noise: GridNoiseConfig) -> Result<TabularMdp> {
        match self {
            Builtin::CliffWalk => build_cliff_walk(noise),
            Builtin::TwoGoals => build_two_goals(noise),
            Builtin::InterconnectedGrid => {
                build_interconnected_grid(&TopologyConfig {
                    reward_std: noise.reward_std,
                    ..TopologyConfig::default()
                })
            }
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown builtin MDP `{s}`")))
    }
}

/// Accumulates a noisy move model into transition rows and expected rewards.
struct MoveModel {
    n_states: usize,
    n_actions: usize,
    transition: Vec<DMatrix<f64>>,
    reward: DMatrix<f64>,
}

impl MoveModel {
    fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            transition: vec![DMatrix::zeros(n_states, n_states); n_actions],
            reward: DMatrix::zeros(n_states, n_actions),
        }
    }

    /// `outcome(s, m)` gives the landing state and reward of executing move `m` from `s`.
    fn fill(&mut self, slip_prob: f64, absorbing: &[usize], outcome: impl Fn(usize, usize) -> (usize, f64)) {
        let moves = self.n_actions;
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                if absorbing.contains(&s) {
                    self.transition[a][(s, s)] = 1.0;
                    continue;
                }
                for m in 0..moves {
                    let mut p = slip_prob / moves as f64;
                    if m == a {
                        p += 1.0 - slip_prob;
                    }
                    if p == 0.0 {
                        continue;
                    }
                    let (next, r) = outcome(s, m);
                    self.transition[a][(s, next)] += p;
                    self.reward[(s, a)] += p * r;
                }
            }
        }
    }
}

pub mod cliff {
    //! Layout constants for the 4 x 12 Cliff Walk.
    pub const ROWS: usize = 4;
    pub const COLS: usize = 12;
    pub const START: usize = (ROWS - 1) * COLS;
    pub const GOAL: usize = ROWS * COLS - 1;
    pub const CLIFF_REWARD: f64 = -100.0;
    pub const STEP_REWARD: f64 = -1.0;

    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const UP: usize = 2;
    pub const DOWN: usize = 3;

    pub fn state(row: usize, col: usize) -> usize {
        row * COLS + col
    }

    pub fn coords(s: usize) -> (usize, usize) {
        (s / COLS, s % COLS)
    }

    pub fn is_cliff(s: usize) -> bool {
        s > START && s < GOAL
    }

    /// Non-cliff cells within Manhattan distance 2 of the goal.
    pub fn near_goal_states() -> Vec<usize> {
        let (gr, gc) = coords(GOAL);
        (0..ROWS * COLS)
            .filter(|&s| {
                let (r, c) = coords(s);
                r.abs_diff(gr) + c.abs_diff(gc) <= 2 && !is_cliff(s)
            })
            .collect()
    }
}

/// 4 x 12 Cliff Walk. Start bottom-left, goal bottom-right, cliff in between.
/// Falling off the cliff costs -100 and returns the agent to the start; every
/// other move costs -1; the goal is absorbing.
pub fn build_cliff_walk(noise: GridNoiseConfig) -> Result<TabularMdp> {
    use cliff::*;
    noise.validate()?;
    let n = ROWS * COLS;
    let mut model = MoveModel::new(n, 4);
    model.fill(noise.slip_prob, &[GOAL], |s, m| {
        let (r, c) = coords(s);
        let (r, c) = match m {
            LEFT => (r, c.saturating_sub(1)),
            RIGHT => (r, (c + 1).min(COLS - 1)),
            UP => (r.saturating_sub(1), c),
            _ => ((r + 1).min(ROWS - 1), c),
        };
        let next = state(r, c);
        if is_cliff(next) {
            (START, CLIFF_REWARD)
        } else {
            (next, STEP_REWARD)
        }
    });
    let mut start = DVector::zeros(n);
    start[START] = 1.0;
    TabularMdp::new(
        model.transition,
        model.reward,
        reward_std_table(n, 4, noise.reward_std, &[GOAL]),
        DEFAULT_GAMMA,
        start,
        vec![GOAL],
    )
}

pub mod two_goals {
    pub const N_STATES: usize = 12;
    pub const SMALL_GOAL: usize = 0;
    pub const LARGE_GOAL: usize = 11;
    pub const SMALL_REWARD: f64 = 0.10;
    pub const LARGE_REWARD: f64 = 1.0;

    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;
    pub const UP: usize = 2;
}

/// Twelve states in a line. Reaching state 0 pays 0.10, reaching state 11
/// pays 1; both ends absorb. "Up" leaves the position unchanged.
pub fn build_two_goals(noise: GridNoiseConfig) -> Result<TabularMdp> {
    use two_goals::*;
    noise.validate()?;
    let n = N_STATES;
    let mut model = MoveModel::new(n, 3);
    model.fill(noise.slip_prob, &[SMALL_GOAL, LARGE_GOAL], |s, m| {
        let next = match m {
            LEFT => s - 1,
            RIGHT => s + 1,
            _ => return (s, 0.0),
        };
        let r = match next {
            SMALL_GOAL => SMALL_REWARD,
            LARGE_GOAL => LARGE_REWARD,
            _ => 0.0,
        };
        (next, r)
    });
    let mut start = DVector::zeros(n);
    for s in 1..n - 1 {
        start[s] = 1.0 / (n - 2) as f64;
    }
    TabularMdp::new(
        model.transition,
        model.reward,
        reward_std_table(n, 3, noise.reward_std, &[SMALL_GOAL, LARGE_GOAL]),
        DEFAULT_GAMMA,
        start,
        vec![SMALL_GOAL, LARGE_GOAL],
    )
}

/// Arrows of a densely connected MDP: `neighbors[s][a]` lists the states
/// reachable from `s` under `a`, each taken with equal probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    pub neighbors: Vec<Vec<Vec<usize>>>,
    /// Mean reward collected in each state, identical across actions.
    pub state_reward: Vec<f64>,
    pub reward_std: f64,
}

impl Default for TopologyConfig {
    /// Ten states, three actions, three successors per state-action pair.
    /// Action `a` from `s` leads to `s + 1 + a`, `s + 4 + a` and `s + 7 + 2a`
    /// (mod 10).
    fn default() -> Self {
        let n = 10;
        let neighbors = (0..n)
            .map(|s| {
                (0..3)
                    .map(|a| vec![(s + 1 + a) % n, (s + 4 + a) % n, (s + 7 + 2 * a) % n])
                    .collect()
            })
            .collect();
        Self {
            neighbors,
            state_reward: vec![0.2, 0.0, 0.5, 0.1, 0.9, 0.3, 0.0, 0.7, 0.4, 1.0],
            reward_std: GridNoiseConfig::default().reward_std,
        }
    }
}

pub fn build_interconnected_grid(topology: &TopologyConfig) -> Result<TabularMdp> {
    let n = topology.neighbors.len();
    if n == 0 || topology.state_reward.len() != n {
        return Err(Error::Argument(format!(
            "topology has {n} states but {} reward means",
            topology.state_reward.len()
        )));
    }
    let na = topology.neighbors[0].len();
    if na == 0 {
        return Err(Error::Argument("topology has no actions".into()));
    }
    let mut transition = vec![DMatrix::zeros(n, n); na];
    for (s, per_action) in topology.neighbors.iter().enumerate() {
        if per_action.len() != na {
            return Err(Error::Argument(format!(
                "state {s} lists {} actions, expected {na}",
                per_action.len()
            )));
        }
        for (a, targets) in per_action.iter().enumerate() {
            if targets.is_empty() {
                return Err(Error::Argument(format!(
                    "state {s} action {a} has no successors"
                )));
            }
            if let Some(&bad) = targets.iter().find(|&&t| t >= n) {
                return Err(Error::Argument(format!(
                    "state {s} action {a} points at missing state {bad}"
                )));
            }
            let p = 1.0 / targets.len() as f64;
            for &t in targets {
                transition[a][(s, t)] += p;
            }
        }
    }
    let reward_mean = DMatrix::from_fn(n, na, |s, _| topology.state_reward[s]);
    TabularMdp::new(
        transition,
        reward_mean,
        DMatrix::from_element(n, na, topology.reward_std),
        DEFAULT_GAMMA,
        DVector::from_element(n, 1.0 / n as f64),
        vec![],
    )
}

fn reward_std_table(n: usize, na: usize, std: f64, absorbing: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(n, na, |s, _| if absorbing.contains(&s) { 0.0 } else { std })
}

/// On-disk JSON form of a [`TabularMdp`]. Matrices are nested row-major
/// arrays; `transition` is indexed `[action][state][next_state]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSpecFile {
    pub name: String,
    pub n_states: usize,
    pub n_actions: usize,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub reward_mean: Vec<Vec<f64>>,
    pub reward_std: Vec<Vec<f64>>,
    pub gamma: f64,
    pub start_dist: Vec<f64>,
    pub absorbing: Vec<usize>,
}

impl MdpSpecFile {
    pub fn from_mdp(name: &str, mdp: &TabularMdp) -> Self {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            m.row_iter().map(|r| r.iter().copied().collect()).collect()
        };
        Self {
            name: name.to_string(),
            n_states: mdp.n_states,
            n_actions: mdp.n_actions,
            transition: mdp.transition.iter().map(rows).collect(),
            reward_mean: rows(&mdp.reward_mean),
            reward_std: rows(&mdp.reward_std),
            gamma: mdp.gamma,
            start_dist: mdp.start_dist.iter().copied().collect(),
            absorbing: mdp.absorbing.clone(),
        }
    }

    pub fn to_mdp(&self) -> Result<TabularMdp> {
        let n = self.n_states;
        let na = self.n_actions;
        let matrix = |field: &str, rows: &[Vec<f64>], ncols: usize| -> Result<DMatrix<f64>> {
            if rows.len() != n || rows.iter().any(|r| r.len() != ncols) {
                return Err(Error::Argument(format!(
                    "field `{field}` must be {n} rows of {ncols} numbers"
                )));
            }
            Ok(DMatrix::from_fn(n, ncols, |i, j| rows[i][j]))
        };
        if self.transition.len() != na {
            return Err(Error::Argument(format!(
                "field `transition` has {} actions, n_actions is {na}",
                self.transition.len()
            )));
        }
        let transition = self
            .transition
            .iter()
            .enumerate()
            .map(|(a, rows)| matrix(&format!("transition[{a}]"), rows, n))
            .collect::<Result<Vec<_>>>()?;
        if self.start_dist.len() != n {
            return Err(Error::Argument(format!(
                "field `start_dist` has {} entries, n_states is {n}",
                self.start_dist.len()
            )));
        }
        TabularMdp::new(
            transition,
            matrix("reward_mean", &self.reward_mean, na)?,
            matrix("reward_std", &self.reward_std, na)?,
            self.gamma,
            DVector::from_column_slice(&self.start_dist),
            self.absorbing.clone(),
        )
    }
}

pub fn load_mdp_spec(path: impl AsRef<Path>) -> Result<(String, TabularMdp)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let spec: MdpSpecFile = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.display().to_string(),
        source,
    })?;
    let mdp = spec.to_mdp()?;
    Ok((spec.name, mdp))
}

pub fn save_mdp_spec(name: &str, mdp: &TabularMdp, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&MdpSpecFile::from_mdp(name, mdp))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
