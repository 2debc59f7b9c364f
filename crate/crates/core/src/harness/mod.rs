//! Monte-Carlo sweeps: for every replication, generate a dataset, estimate
//! the MLE model, regularize it at every `(method, strength)` cell, plan, and
//! score the plan in the true MDP.
//!
//! Replication `i` draws from `child_seed(master_seed, i)` and results are
//! reduced in replication order, so aggregates do not depend on the number
//! of workers.

mod config;
mod output;
mod presets;

pub use config::{default_eps_grid, default_magnitude_grid, ExperimentConfig, MdpSource, DEFAULT_REPLICATIONS};
pub use output::{emit_csv, emit_summary, format_number, read_csv, write_csv, ResultRow, CSV_HEADER};
pub use presets::{builtin_presets, preset, PRESET_SEED};

use std::io::Write;

use nalgebra::DVector;

use crate::data::{child_seed, generate_dataset, write_dataset_csv, Dataset, DATASET_CSV_HEADER};
use crate::error::{Error, Result};
use crate::estimation::{count, mle_model, EstimatedModel};
use crate::evaluation::{policy_loss, transition_mse};
use crate::mdp::{DeterministicPolicy, TabularMdp, TIE_TOL};
use crate::planning::{policy_iteration, PlanningProblem};
use crate::regularizers::{
    dirichlet_posterior_mean, discount_blend, eps_greedy_blend, uniform_prior, Method, RegularizedModel,
};

/// Loss and MSE of one `(method, strength)` cell in one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOutcome {
    pub loss: f64,
    pub mse_plain: f64,
    pub mse_absorbing: f64,
}

/// Applies `method` at `strength` to an estimated model.
pub fn regularize(model: &EstimatedModel, method: Method, strength: f64) -> Result<RegularizedModel> {
    match method {
        Method::None => Ok(RegularizedModel::unregularized(model)),
        Method::Dirichlet => {
            let prior = uniform_prior(strength, model.n_states(), model.n_actions())?;
            let mut reg = dirichlet_posterior_mean(model, &prior)?;
            reg.strength = strength;
            Ok(reg)
        }
        Method::Discount => discount_blend(model, strength),
        Method::EpsGreedy => eps_greedy_blend(model, strength),
    }
}

/// Everything fixed across replications.
struct Setup {
    mdp: TabularMdp,
    optimal: DeterministicPolicy,
    weights: DVector<f64>,
    cells: Vec<(Method, f64)>,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let mdp = cfg.load_mdp()?;
        cfg.collection.validate(mdp.n_states)?;
        let optimal = policy_iteration(&PlanningProblem::from_mdp(&mdp), TIE_TOL)?.policy;
        Ok(Self {
            weights: cfg.loss_weights(mdp.n_states),
            cells: cfg.cells(),
            mdp,
            optimal,
        })
    }

    fn dataset(&self, cfg: &ExperimentConfig, index: usize) -> Dataset {
        generate_dataset(
            &self.mdp,
            &self.optimal,
            &cfg.collection,
            child_seed(cfg.master_seed, index as u64),
        )
    }

    fn replicate(&self, cfg: &ExperimentConfig, index: usize) -> Result<Vec<CellOutcome>> {
        let data = self.dataset(cfg, index);
        let counts = count(&data, self.mdp.n_states, self.mdp.n_actions)?;
        let model = mle_model(&counts, &self.mdp.absorbing);
        self.cells
            .iter()
            .map(|&(method, strength)| {
                let reg = regularize(&model, method, strength)?;
                let plan = policy_iteration(&reg.planning_problem(self.mdp.gamma)?, TIE_TOL)?;
                let loss = policy_loss(&self.mdp, &plan.policy, &self.optimal, &self.weights)?;
                let mse = transition_mse(&self.mdp.transition, &reg)?;
                Ok(CellOutcome {
                    loss: loss.loss,
                    mse_plain: mse.mse_plain,
                    mse_absorbing: mse.mse_absorbing,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Replication {
                index,
                source: Box::new(e),
            })
    }
}

/// Per-replication outcomes, indexed `[replication][cell]`.
pub fn run_replications(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<Vec<CellOutcome>>> {
    let setup = Setup::new(cfg)?;
    run_indices(&setup, cfg, workers.max(1))
}

#[cfg(feature = "parallel")]
fn run_indices(setup: &Setup, cfg: &ExperimentConfig, workers: usize) -> Result<Vec<Vec<CellOutcome>>> {
    use rayon::prelude::*;

    if workers == 1 {
        return (0..cfg.replications).map(|i| setup.replicate(cfg, i)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|i| setup.replicate(cfg, i))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn run_indices(setup: &Setup, cfg: &ExperimentConfig, _workers: usize) -> Result<Vec<Vec<CellOutcome>>> {
    (0..cfg.replications).map(|i| setup.replicate(cfg, i)).collect()
}

/// Runs the sweep and aggregates one row per `(method, strength)` cell.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>> {
    let outcomes = run_replications(cfg, workers)?;
    Ok(aggregate(cfg, &outcomes))
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Reduces outcomes in replication order.
pub fn aggregate(cfg: &ExperimentConfig, outcomes: &[Vec<CellOutcome>]) -> Vec<ResultRow> {
    let hash = cfg.config_hash();
    cfg.cells()
        .into_iter()
        .enumerate()
        .map(|(c, (method, strength))| {
            let column = outcomes.iter().map(move |rep| rep[c]);
            let (mean_loss, stderr_loss) = mean_and_stderr(column.clone().map(|o| o.loss));
            let (mean_mse_plain, _) = mean_and_stderr(column.clone().map(|o| o.mse_plain));
            let (mean_mse_absorbing, _) = mean_and_stderr(column.map(|o| o.mse_absorbing));
            ResultRow {
                method,
                strength,
                mean_loss,
                stderr_loss,
                mean_mse_plain,
                mean_mse_absorbing,
                replications: outcomes.len(),
                config_hash: hash.clone(),
            }
        })
        .collect()
}

/// Writes every replication's dataset as CSV, one row per step.
pub fn dump_datasets<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    let setup = Setup::new(cfg)?;
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(DATASET_CSV_HEADER)?;
    for i in 0..cfg.replications {
        write_dataset_csv(&mut writer, i, &setup.dataset(cfg, i))?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CollectionConfig, StartMode};
    use crate::environments::Builtin;

    fn small(builtin: Builtin) -> ExperimentConfig {
        ExperimentConfig {
            mdp: MdpSource::Builtin(builtin),
            noise: None,
            gamma: None,
            methods: vec![Method::None, Method::Dirichlet, Method::Discount, Method::EpsGreedy],
            eps_grid: vec![0.0, 0.5, 1.0],
            magnitude_grid: vec![0.0, 10.0],
            collection: CollectionConfig {
                n_trajectories: 5,
                trajectory_length: 8,
                p_optimal: 0.0,
                start_mode: StartMode::Uniform,
            },
            replications: 12,
            master_seed: 3,
            output: None,
        }
    }

    #[test]
    fn strength_zero_rows_agree_across_methods() {
        let rows = run_experiment(&small(Builtin::TwoGoals), 1).unwrap();
        let zero: Vec<_> = rows.iter().filter(|r| r.strength == 0.0).collect();
        assert_eq!(zero.len(), 4);
        for r in &zero {
            assert_eq!(r.mean_loss, zero[0].mean_loss, "{}", r.method);
            assert_eq!(r.mean_mse_plain, zero[0].mean_mse_plain);
        }
    }

    #[test]
    fn rows_are_deterministic() {
        let cfg = small(Builtin::CliffWalk);
        assert_eq!(run_experiment(&cfg, 1).unwrap(), run_experiment(&cfg, 1).unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = small(Builtin::TwoGoals);
        cfg.methods.push(Method::Discount);
        assert!(matches!(run_experiment(&cfg, 1), Err(Error::Config(_))));
        let mut cfg = small(Builtin::TwoGoals);
        cfg.eps_grid.push(1.5);
        assert!(matches!(run_experiment(&cfg, 1), Err(Error::Config(_))));
        let mut cfg = small(Builtin::TwoGoals);
        cfg.replications = 0;
        assert!(matches!(run_experiment(&cfg, 1), Err(Error::Config(_))));
        let mut cfg = small(Builtin::TwoGoals);
        cfg.collection.start_mode = StartMode::Fixed { state: 40 };
        assert!(matches!(run_experiment(&cfg, 1), Err(Error::Config(_))));
    }

    #[test]
    fn loss_is_nonnegative() {
        let rows = run_experiment(&small(Builtin::InterconnectedGrid), 1).unwrap();
        assert!(rows.iter().all(|r| r.mean_loss >= -1e-9 && r.stderr_loss >= 0.0));
    }

    #[test]
    fn dataset_dump_has_one_row_per_step() {
        let cfg = small(Builtin::TwoGoals);
        let mut buf = Vec::new();
        dump_datasets(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 12 * 5 * 8);
        assert!(text.starts_with("replication,trajectory,step,state,action,reward,next_state\n"));
    }
}
