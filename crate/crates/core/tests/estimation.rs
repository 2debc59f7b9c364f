use batchreg::data::{generate_dataset, CollectionConfig, StartMode};
use batchreg::estimation::{count, mle_model};
use batchreg::evaluation::transition_mse;
use batchreg::regularizers::{dirichlet_posterior_mean, uniform_prior, Method, RegularizedModel};
use batchreg::{DeterministicPolicy, TabularMdp};
use nalgebra::{DMatrix, DVector};

fn three_state() -> TabularMdp {
    TabularMdp::new(
        vec![
            DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.3, 0.0, 0.6, 0.4, 0.7, 0.0, 0.3]),
            DMatrix::from_row_slice(3, 3, &[0.9, 0.1, 0.0, 0.3, 0.3, 0.4, 0.25, 0.25, 0.5]),
        ],
        DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 0.5, -0.5, 2.0, 0.0]),
        DMatrix::from_element(3, 2, 0.5),
        0.9,
        DVector::from_element(3, 1.0 / 3.0),
        vec![],
    )
    .unwrap()
}

#[test]
fn mle_converges_on_large_random_datasets() {
    let mdp = three_state();
    let cfg = CollectionConfig {
        n_trajectories: 1000,
        trajectory_length: 100,
        p_optimal: 0.0,
        start_mode: StartMode::Uniform,
    };
    let data = generate_dataset(&mdp, &DeterministicPolicy::uniform_action(3, 0), &cfg, 99);
    assert_eq!(data.n_steps(), 100_000);
    let counts = count(&data, 3, 2).unwrap();
    assert_eq!(counts.total(), 100_000);
    let model = mle_model(&counts, &[]);
    let worst = (0..2)
        .map(|a| (&model.transition[a] - &mdp.transition[a]).amax())
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "max transition error {worst}");
    assert!((&model.reward - &mdp.reward_mean).amax() < 0.05);
}

#[test]
fn dirichlet_mse_tends_to_uniform_mse() {
    let mdp = three_state();
    let cfg = CollectionConfig {
        n_trajectories: 4,
        trajectory_length: 6,
        p_optimal: 0.0,
        start_mode: StartMode::Uniform,
    };
    let data = generate_dataset(&mdp, &DeterministicPolicy::uniform_action(3, 0), &cfg, 5);
    let model = mle_model(&count(&data, 3, 2).unwrap(), &[]);
    let uniform = RegularizedModel {
        transition: vec![DMatrix::from_element(3, 3, 1.0 / 3.0); 2],
        reward: model.reward.clone(),
        method: Method::None,
        strength: 0.0,
        effective_eps: DMatrix::from_element(3, 2, 1.0),
    };
    let target = transition_mse(&mdp.transition, &uniform).unwrap().mse_plain;
    let gap = |m: f64| {
        let post = dirichlet_posterior_mean(&model, &uniform_prior(m, 3, 2).unwrap()).unwrap();
        (transition_mse(&mdp.transition, &post).unwrap().mse_plain - target).abs()
    };
    let gaps: Vec<f64> = [10.0, 100.0, 1e3, 1e4, 1e6].into_iter().map(gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
    assert!(gaps[4] < 1e-6, "{gaps:?}");
}
