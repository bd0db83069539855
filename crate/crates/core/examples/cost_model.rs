//! Improvement factors and the scalarised cost of a candidate.
//!
//! cargo run --example cost_model

use repeater_opt::cost::{improve, improvement_factor, parameter_cost, penalized_cost, BaselineSet, CostConfig};
use repeater_opt::model::{normalize, RepeaterParams};

fn main() {
    let baseline = RepeaterParams::new(0.9, 1.5e-5, 0.8459, 36_000.0, 4.9e-3).unwrap();
    let candidate = RepeaterParams::new(0.97, 0.02, 0.95, 36_000.0, 1.0).unwrap();

    for k in [1.0, 2.0, 10.0] {
        println!("improve(0.9, {k:>4}) = {:.6}", improve(0.9, k).unwrap());
    }
    println!("k for 0.9 -> 0.97 = {}", improvement_factor(0.9, 0.97).unwrap());

    let baselines = BaselineSet::from_physical(&baseline, Default::default()).unwrap();
    let config = CostConfig::default();
    let genes = normalize(&candidate).unwrap();
    let c = parameter_cost(&baselines, &genes, config.aggregate).unwrap();
    println!("parameter cost        {c}");
    for (f, r) in [(0.72, 5.0), (0.69, 5.0), (0.72, 0.5)] {
        println!(
            "F = {f}, R = {r} Hz -> total {}",
            penalized_cost(c, f, r, &config).unwrap()
        );
    }
}
