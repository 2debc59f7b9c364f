//! Named experiment configurations.
//!
//! `*-random` presets collect data with a uniformly random behaviour policy
//! from uniform start states: 25 trajectories of length 20 on the Cliff Walk,
//! 15 of length 10 on the other two. Variants change the share of optimal
//! actions (`-opt50`, `-opt100`) or the start states.

use crate::data::{CollectionConfig, StartMode};
use crate::environments::{cliff, Builtin};
use crate::regularizers::Method;

use super::config::{default_eps_grid, default_magnitude_grid, ExperimentConfig, MdpSource, DEFAULT_REPLICATIONS};

pub const PRESET_SEED: u64 = 20_230_601;

fn base(builtin: Builtin) -> ExperimentConfig {
    let (n, l) = match builtin {
        Builtin::CliffWalk => (25, 20),
        Builtin::TwoGoals | Builtin::InterconnectedGrid => (15, 10),
    };
    ExperimentConfig {
        mdp: MdpSource::Builtin(builtin),
        noise: None,
        gamma: None,
        methods: vec![Method::Dirichlet, Method::Discount, Method::EpsGreedy],
        eps_grid: default_eps_grid(),
        magnitude_grid: default_magnitude_grid(),
        collection: CollectionConfig {
            n_trajectories: n,
            trajectory_length: l,
            p_optimal: 0.0,
            start_mode: StartMode::Uniform,
        },
        replications: DEFAULT_REPLICATIONS,
        master_seed: PRESET_SEED,
        output: None,
    }
}

fn with_p(mut cfg: ExperimentConfig, p: f64) -> ExperimentConfig {
    cfg.collection.p_optimal = p;
    cfg
}

fn with_start(mut cfg: ExperimentConfig, start_mode: StartMode) -> ExperimentConfig {
    cfg.collection.start_mode = start_mode;
    cfg
}

pub fn builtin_presets() -> Vec<(&'static str, ExperimentConfig)> {
    let mut out = Vec::new();
    for (b, names) in [
        (Builtin::InterconnectedGrid, ["grid-random", "grid-opt50", "grid-opt100"]),
        (Builtin::TwoGoals, ["twogoals-random", "twogoals-opt50", "twogoals-opt100"]),
        (Builtin::CliffWalk, ["cliff-random", "cliff-opt50", "cliff-opt100"]),
    ] {
        let random = base(b);
        out.push((names[0], random.clone()));
        out.push((names[1], with_p(random.clone(), 0.5)));
        out.push((names[2], with_p(random, 1.0)));
    }
    out.push((
        "grid-start5",
        with_start(base(Builtin::InterconnectedGrid), StartMode::Set { states: vec![0, 1, 2, 3, 4] }),
    ));
    out.push((
        "grid-start1",
        with_start(base(Builtin::InterconnectedGrid), StartMode::Fixed { state: 0 }),
    ));
    out.push((
        "twogoals-start1",
        with_start(base(Builtin::TwoGoals), StartMode::Fixed { state: 1 }),
    ));
    out.push((
        "twogoals-start10",
        with_start(base(Builtin::TwoGoals), StartMode::Fixed { state: 10 }),
    ));
    out.push((
        "cliff-start-s",
        with_start(base(Builtin::CliffWalk), StartMode::Fixed { state: cliff::START }),
    ));
    out.push((
        "cliff-near-goal",
        with_start(base(Builtin::CliffWalk), StartMode::Set { states: cliff::near_goal_states() }),
    ));
    out
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    builtin_presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, cfg)| cfg)
}
