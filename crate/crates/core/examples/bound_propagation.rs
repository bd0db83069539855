//! Carries the success-probability floor from a short chain to a longer one
//! over the same span.
//!
//! cargo run --release --example bound_propagation

use std::path::Path;

use repeater_opt::model::Parameter;
use repeater_opt::orchestrator::{optimize, propagate_bounds, GeneLayout, RunManifest};
use repeater_opt::sim::ChainTopology;

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let mut first = RunManifest::load(data.join("configs/validate.ini")).unwrap();
    first.mode = repeater_opt::orchestrator::Mode::Optimize;
    first.ga.n_generations = 15;
    let history = optimize::run_optimization(&first).unwrap();
    let short = first.topology.clone().unwrap();

    let long = ChainTopology::uniform(5, 5.0, 0.5, 1e-10)
        .unwrap()
        .with_t_cycle(0.05)
        .unwrap();
    let mut second = first.clone();
    second.topology = Some(long.clone());
    let layout = GeneLayout::from_manifest(&second);
    let bounds = optimize::search_bounds(&second, &layout).unwrap();
    let narrowed = propagate_bounds(&history, &short, &long, &bounds, &layout).unwrap();
    let gene = layout.gene_of(Parameter::PSuc).unwrap();
    println!("p_suc box before [{:.4}, {:.4}]", bounds.lo()[gene], bounds.hi()[gene]);
    println!(
        "p_suc box after  [{:.4}, {:.4}]",
        narrowed.lo()[gene],
        narrowed.hi()[gene]
    );

    let fewer = ChainTopology::uniform(2, 20.0, 0.5, 1e-10).unwrap();
    println!(
        "to fewer repeaters: {}",
        propagate_bounds(&history, &short, &fewer, &bounds, &layout).unwrap_err()
    );
}
