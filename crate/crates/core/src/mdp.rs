//! Tabular MDP representation and the value objects shared across the crate.
//!
//! Transitions are stored as one `N x N` row-stochastic matrix per action,
//! rewards as `N x |A|` tables of Gaussian means and standard deviations.
//! Absorbing states are self-loops with zero reward.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on row sums and probability vectors.
pub const PROB_TOL: f64 = 1e-9;

/// Default tolerance for treating two Q-values as tied.
pub const TIE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `transition[a][(s, s')]` is `T(s' | s, a)`.
    pub transition: Vec<DMatrix<f64>>,
    pub reward_mean: DMatrix<f64>,
    pub reward_std: DMatrix<f64>,
    pub gamma: f64,
    pub start_dist: DVector<f64>,
    /// Sorted, deduplicated.
    pub absorbing: Vec<usize>,
}

/// One violated invariant, as reported by [`TabularMdp::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.detail)
    }
}

impl Violation {
    fn new(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            detail: detail.into(),
        }
    }
}

impl TabularMdp {
    /// Builds an MDP and rejects it if any invariant fails.
    pub fn new(
        transition: Vec<DMatrix<f64>>,
        reward_mean: DMatrix<f64>,
        reward_std: DMatrix<f64>,
        gamma: f64,
        start_dist: DVector<f64>,
        mut absorbing: Vec<usize>,
    ) -> Result<Self> {
        absorbing.sort_unstable();
        absorbing.dedup();
        let mdp = Self {
            n_states: start_dist.len(),
            n_actions: transition.len(),
            transition,
            reward_mean,
            reward_std,
            gamma,
            start_dist,
            absorbing,
        };
        let report = mdp.validate();
        if report.is_empty() {
            Ok(mdp)
        } else {
            Err(Error::InvalidMdp(report))
        }
    }

    /// Lists every violated invariant. An empty report means the MDP is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.n_states;
        let na = self.n_actions;
        let mut out = Vec::new();

        if n == 0 {
            out.push(Violation::new("n_states", "must be positive"));
        }
        if na == 0 || self.transition.len() != na {
            out.push(Violation::new(
                "n_actions",
                format!(
                    "must be positive and match {} transition matrices",
                    self.transition.len()
                ),
            ));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            out.push(Violation::new(
                "gamma",
                format!("gamma out of range [0, 1): {}", self.gamma),
            ));
        }

        for (a, t) in self.transition.iter().enumerate() {
            let field = format!("transition[{a}]");
            if t.shape() != (n, n) {
                out.push(Violation::new(
                    field,
                    format!("shape {:?}, expected ({n}, {n})", t.shape()),
                ));
                continue;
            }
            for s in 0..n {
                let row = t.row(s);
                if let Some(col) = row.iter().position(|&p| !(p >= 0.0) || !p.is_finite()) {
                    out.push(Violation::new(
                        field.clone(),
                        format!("row {s} has invalid entry {} at column {col}", row[col]),
                    ));
                }
                let sum = row.sum();
                if (sum - 1.0).abs() > PROB_TOL {
                    out.push(Violation::new(field.clone(), format!("row {s} sums to {sum}")));
                }
            }
        }

        for (name, table) in [("reward_mean", &self.reward_mean), ("reward_std", &self.reward_std)] {
            if table.shape() != (n, na) {
                out.push(Violation::new(
                    name,
                    format!("shape {:?}, expected ({n}, {na})", table.shape()),
                ));
            } else if let Some(i) = table.iter().position(|v| !v.is_finite()) {
                out.push(Violation::new(name, format!("non-finite entry at flat index {i}")));
            }
        }
        if self.reward_std.shape() == (n, na) {
            if let Some(i) = self.reward_std.iter().position(|&v| v < 0.0) {
                out.push(Violation::new("reward_std", format!("negative entry at flat index {i}")));
            }
        }

        if self.start_dist.iter().any(|&p| !(p >= 0.0)) {
            out.push(Violation::new("start_dist", "negative entry"));
        }
        let start_sum = self.start_dist.sum();
        if (start_sum - 1.0).abs() > PROB_TOL {
            out.push(Violation::new("start_dist", format!("sums to {start_sum}")));
        }

        for &s in &self.absorbing {
            if s >= n {
                out.push(Violation::new("absorbing", format!("state {s} out of range")));
                continue;
            }
            for (a, t) in self.transition.iter().enumerate() {
                if t.shape() != (n, n) {
                    continue;
                }
                let closed = (0..n).all(|j| {
                    let expect = if j == s { 1.0 } else { 0.0 };
                    (t[(s, j)] - expect).abs() <= PROB_TOL
                });
                if !closed {
                    out.push(Violation::new(
                        "absorbing",
                        format!("state {s} is not a self-loop under action {a}"),
                    ));
                }
            }
            if self.reward_mean.shape() == (n, na) && self.reward_mean.row(s).iter().any(|&r| r != 0.0) {
                out.push(Violation::new(
                    "absorbing",
                    format!("state {s} has nonzero reward mean"),
                ));
            }
        }
        out
    }

    pub fn is_absorbing(&self, s: usize) -> bool {
        self.absorbing.binary_search(&s).is_ok()
    }

    /// Adds `x` to every reward mean outside the absorbing set.
    pub fn apply_reward_shift(&self, x: f64) -> TabularMdp {
        let mut out = self.clone();
        for s in 0..self.n_states {
            if self.is_absorbing(s) {
                continue;
            }
            for a in 0..self.n_actions {
                out.reward_mean[(s, a)] += x;
            }
        }
        out
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<TabularMdp> {
        let mut out = self.clone();
        out.gamma = gamma;
        let report = out.validate();
        if report.is_empty() {
            Ok(out)
        } else {
            Err(Error::InvalidMdp(report))
        }
    }
}

/// A deterministic policy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicPolicy {
    action_of: Vec<usize>,
}

impl DeterministicPolicy {
    pub fn new(action_of: Vec<usize>, n_actions: usize) -> Result<Self> {
        if let Some(s) = action_of.iter().position(|&a| a >= n_actions) {
            return Err(Error::Argument(format!(
                "action {} at state {s} is out of range for {n_actions} actions",
                action_of[s]
            )));
        }
        Ok(Self { action_of })
    }

    pub fn uniform_action(n_states: usize, action: usize) -> Self {
        Self {
            action_of: vec![action; n_states],
        }
    }

    pub fn action(&self, s: usize) -> usize {
        self.action_of[s]
    }

    pub fn actions(&self) -> &[usize] {
        &self.action_of
    }

    pub fn len(&self) -> usize {
        self.action_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.action_of.is_empty()
    }

    /// Every deterministic policy over `n_states` states, in lexicographic order.
    /// Only sensible for tiny problems.
    pub fn enumerate(n_states: usize, n_actions: usize) -> impl Iterator<Item = DeterministicPolicy> {
        let total = n_actions.checked_pow(n_states as u32).expect("policy space too large");
        (0..total).map(move |mut code| {
            let mut action_of = vec![0; n_states];
            for slot in action_of.iter_mut().rev() {
                *slot = code % n_actions;
                code /= n_actions;
            }
            DeterministicPolicy { action_of }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction(pub DVector<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct QFunction(pub DMatrix<f64>);

impl QFunction {
    /// Difference between the best and second-best action value at `s`.
    /// Infinite when there is a single action.
    pub fn gap(&self, s: usize) -> f64 {
        let row = self.0.row(s);
        let mut best = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for &q in row.iter() {
            if q > best {
                second = best;
                best = q;
            } else if q > second {
                second = q;
            }
        }
        best - second
    }

    /// States whose best and second-best actions are within `tol`.
    pub fn tied_states(&self, tol: f64) -> Vec<usize> {
        (0..self.0.nrows()).filter(|&s| self.gap(s) <= tol).collect()
    }
}
