//! Monte Carlo runs of a repeater chain under both noise models.
//!
//! cargo run --release --example chain_simulation

use repeater_opt::model::RepeaterParams;
use repeater_opt::sim::{simulate_batch, ChainTopology, Schedule, SimConfig};
use repeater_opt::werner::werner_e2e_fidelity;

fn main() {
    let topology = ChainTopology::uniform(5, 25.0, 0.95, 0.05).unwrap();
    let params = RepeaterParams::new(0.97, 0.05, 0.98, 10.0, 0.5).unwrap();

    let werner = simulate_batch(&topology, &params, &SimConfig::werner(), 2000, 7).unwrap();
    println!(
        "werner mode   F = {:.6}  (closed form {:.6})  rate = {:.2} Hz",
        werner.mean_fidelity,
        werner_e2e_fidelity(3, params.f_el, params.s_q).unwrap(),
        werner.rate
    );

    for schedule in [Schedule::Sequential, Schedule::Greedy] {
        let config = SimConfig {
            schedule,
            ..SimConfig::default()
        };
        let s = simulate_batch(&topology, &params, &config, 2000, 7).unwrap();
        println!(
            "full {:<10}  F = {:.4} +- {:.4}  T = {:.4} s  rate = {:.2} Hz",
            format!("{schedule:?}"),
            s.mean_fidelity,
            s.fidelity_stderr,
            s.mean_time,
            s.rate
        );
    }
}
