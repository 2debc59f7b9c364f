use batchreg_demo::{cliff_policies, equivalence_check, loss_curve};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn loss_curve_covers_the_eps_grid() {
    let v = parse(loss_curve("two-goals", "eps_greedy", 15, 10, 0.0, 20, 1).unwrap());
    assert_eq!(v["strengths"].as_array().unwrap().len(), 21);
    assert_eq!(v["mean_loss"].as_array().unwrap().len(), 21);
    assert!(v["stderr_loss"].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() >= 0.0));
}

#[test]
fn loss_curve_rejects_bad_input() {
    assert!(loss_curve("nowhere", "discount", 5, 5, 0.0, 5, 1).is_err());
    assert!(loss_curve("cliff-walk", "shrinkage", 5, 5, 0.0, 5, 1).is_err());
    assert!(loss_curve("cliff-walk", "discount", 5, 5, 0.0, 0, 1).is_err());
    assert!(loss_curve("cliff-walk", "discount", 5, 5, 1.5, 5, 1).is_err());
}

#[test]
fn cliff_policies_with_plenty_of_optimal_data_match() {
    let v = parse(cliff_policies("discount", 0.0, 50, 30, 1.0, 4).unwrap());
    assert_eq!(v["optimal"].as_array().unwrap().len(), 48);
    assert_eq!(v["cliff"].as_array().unwrap().len(), 10);
    assert!(v["loss"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn equivalence_check_agrees() {
    for seed in 0..20 {
        let v = parse(equivalence_check(6, 3, 0.4, seed).unwrap());
        assert_eq!(v["agree"], Value::Bool(true));
    }
    assert!(equivalence_check(1, 2, 0.4, 0).is_err());
    assert!(equivalence_check(4, 2, 1.0, 0).is_err());
}
