//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and strings and returns a JSON string,
//! so the same functions are callable (and tested) natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use batchreg::data::{child_seed, generate_dataset, rng_from_seed, CollectionConfig, StartMode};
use batchreg::environments::{cliff, Builtin, GridNoiseConfig};
use batchreg::estimation::{count, mle_model};
use batchreg::evaluation::policy_loss;
use batchreg::harness::{self, default_eps_grid, default_magnitude_grid, ExperimentConfig, MdpSource};
use batchreg::mdp::TIE_TOL;
use batchreg::planning::{policy_iteration, theorem1_check, PlanningProblem};
use batchreg::properties::random_mdp;
use batchreg::regularizers::Method;

/// Upper bound on replications per call; keeps the page responsive.
pub const MAX_REPLICATIONS: u32 = 2000;

fn parse<T: std::str::FromStr>(s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn collection(n_trajectories: u32, trajectory_length: u32, p_optimal: f64) -> CollectionConfig {
    CollectionConfig {
        n_trajectories: n_trajectories as usize,
        trajectory_length: trajectory_length as usize,
        p_optimal,
        start_mode: StartMode::Uniform,
    }
}

/// Mean loss against regularization strength for one environment and method,
/// from uniform start states.
///
/// Returns `{"strengths": [..], "mean_loss": [..], "stderr_loss": [..], "mean_mse": [..]}`.
#[wasm_bindgen]
pub fn loss_curve(
    env: &str,
    method: &str,
    n_trajectories: u32,
    trajectory_length: u32,
    p_optimal: f64,
    replications: u32,
    seed: u32,
) -> Result<String, String> {
    let method: Method = parse(method)?;
    if replications == 0 || replications > MAX_REPLICATIONS {
        return Err(format!("replications must be between 1 and {MAX_REPLICATIONS}"));
    }
    let cfg = ExperimentConfig {
        mdp: MdpSource::Builtin(parse(env)?),
        noise: None,
        gamma: None,
        methods: vec![method],
        eps_grid: default_eps_grid(),
        magnitude_grid: default_magnitude_grid(),
        collection: collection(n_trajectories, trajectory_length, p_optimal),
        replications: replications as usize,
        master_seed: u64::from(seed),
        output: None,
    };
    let rows = harness::run_experiment(&cfg, 1).map_err(|e| e.to_string())?;
    Ok(json!({
        "strengths": rows.iter().map(|r| r.strength).collect::<Vec<_>>(),
        "mean_loss": rows.iter().map(|r| r.mean_loss).collect::<Vec<_>>(),
        "stderr_loss": rows.iter().map(|r| r.stderr_loss).collect::<Vec<_>>(),
        "mean_mse": rows.iter().map(|r| r.mean_mse_plain).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Plans on a single Cliff Walk dataset and reports the planned policy next
/// to the true optimal one.
///
/// Returns `{"rows", "cols", "start", "goal", "cliff": [..], "optimal": [..],
/// "planned": [..], "visits": [..], "loss"}`; actions are 0 left, 1 right,
/// 2 up, 3 down.
#[wasm_bindgen]
pub fn cliff_policies(
    method: &str,
    strength: f64,
    n_trajectories: u32,
    trajectory_length: u32,
    p_optimal: f64,
    seed: u32,
) -> Result<String, String> {
    let method: Method = parse(method)?;
    let err = |e: batchreg::Error| e.to_string();
    let mdp = Builtin::CliffWalk.build(GridNoiseConfig::default()).map_err(err)?;
    let cfg = collection(n_trajectories, trajectory_length, p_optimal);
    cfg.validate(mdp.n_states).map_err(err)?;
    let optimal = policy_iteration(&PlanningProblem::from_mdp(&mdp), TIE_TOL).map_err(err)?.policy;
    let data = generate_dataset(&mdp, &optimal, &cfg, child_seed(u64::from(seed), 0));
    let counts = count(&data, mdp.n_states, mdp.n_actions).map_err(err)?;
    let model = mle_model(&counts, &mdp.absorbing);
    let reg = harness::regularize(&model, method, strength).map_err(err)?;
    let planned = policy_iteration(&reg.planning_problem(mdp.gamma).map_err(err)?, TIE_TOL)
        .map_err(err)?
        .policy;
    let loss = policy_loss(&mdp, &planned, &optimal, &cfg.start_mode.distribution(mdp.n_states).into())
        .map_err(err)?
        .loss;
    let visits: Vec<u64> = (0..mdp.n_states).map(|s| counts.visit_count.row(s).sum()).collect();
    Ok(json!({
        "rows": cliff::ROWS,
        "cols": cliff::COLS,
        "start": cliff::START,
        "goal": cliff::GOAL,
        "cliff": (0..mdp.n_states).filter(|&s| cliff::is_cliff(s)).collect::<Vec<_>>(),
        "optimal": optimal.actions(),
        "planned": planned.actions(),
        "visits": visits,
        "loss": loss,
    })
    .to_string())
}

/// Draws a random MDP and compares the optimal policy under the discount
/// `(1 - eps) gamma` with the one under the uniform-blended transitions.
///
/// Returns `{"lowered_discount": [..], "uniform_blend": [..], "excluded": [..], "agree"}`.
#[wasm_bindgen]
pub fn equivalence_check(n_states: u32, n_actions: u32, eps: f64, seed: u32) -> Result<String, String> {
    if !(2..=12).contains(&n_states) || !(1..=6).contains(&n_actions) {
        return Err("need 2-12 states and 1-6 actions".into());
    }
    let mut rng = rng_from_seed(u64::from(seed));
    let mdp = random_mdp(&mut rng, n_states as usize, n_actions as usize, 0.95);
    let report = theorem1_check(&mdp, eps, TIE_TOL).map_err(|e| e.to_string())?;
    Ok(json!({
        "lowered_discount": report.lowered_discount.actions(),
        "uniform_blend": report.uniform_blend.actions(),
        "excluded": report.excluded,
        "agree": report.agree,
    })
    .to_string())
}
