//! Runs the optimizer on the noisy quartic and on Rastrigin's function.
//!
//! cargo run --release --example benchmarks -- [seed]

use repeater_opt::benchmark::{quartic, rastrigin, QUARTIC_BOUND, QUARTIC_DIM, RASTRIGIN_BOUND, RASTRIGIN_DIM};
use repeater_opt::ga::{minimize, Bounds, GaConfig};
use repeater_opt::seed::{derive_seed, rng_from_seed, SimRng};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);

    let config = GaConfig {
        n_generations: 75,
        rng_seed: seed,
        ..GaConfig::new(Bounds::uniform(QUARTIC_DIM, -QUARTIC_BOUND, QUARTIC_BOUND).unwrap())
    };
    let history = minimize(config, |g, i, x| {
        let mut rng = rng_from_seed(derive_seed(derive_seed(seed, g as u64), i as u64));
        quartic(x, Some(&mut rng)).unwrap()
    })
    .unwrap();
    println!("quartic (noisy), 75 generations");
    for r in history.iter().step_by(15).chain(history.last()) {
        println!(
            "  gen {:>3}  best {:>10.3}  mean {:>10.3}",
            r.index, r.best_cost, r.mean_cost
        );
    }
    let best = history.last().unwrap().best();
    println!(
        "  final best re-evaluated without noise: {:.3}",
        quartic::<SimRng>(best, None).unwrap()
    );

    let config = GaConfig {
        n_generations: 400,
        rng_seed: seed,
        ..GaConfig::new(Bounds::uniform(RASTRIGIN_DIM, -RASTRIGIN_BOUND, RASTRIGIN_BOUND).unwrap())
    };
    let history = minimize(config, |_, _, x| rastrigin(x).unwrap()).unwrap();
    println!("rastrigin, 400 generations");
    for r in history.iter().step_by(80).chain(history.last()) {
        println!(
            "  gen {:>3}  best {:>10.3}  mean {:>10.3}",
            r.index, r.best_cost, r.mean_cost
        );
    }
}
