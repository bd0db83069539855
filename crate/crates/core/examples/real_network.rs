//! Per-link baselines on a Delft to Amsterdam chain.
//!
//! cargo run --release --example real_network -- [generations]

use std::path::Path;

use repeater_opt::cost::propagate_link_baselines;
use repeater_opt::orchestrator::{run_optimization, RunManifest};

fn main() {
    let generations: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/configs/real_network.ini");
    let mut manifest = RunManifest::load(path).unwrap();
    manifest.ga.n_generations = generations;
    manifest.ga.population_size = 60;

    let history = run_optimization(&manifest).unwrap();
    let (g, i) = history.best().unwrap();
    let best = &history.evaluations[g][i];
    let params = best.params.unwrap();
    println!("best cost {} at generation {g}", best.cost);
    println!("network-wide: {params:?}");

    let reference = manifest.baselines.to_set(manifest.time_transform).unwrap();
    let links = manifest.link_baselines.as_ref().unwrap();
    for (link, p) in links
        .iter()
        .zip(propagate_link_baselines(&reference, &params, links).unwrap())
    {
        println!(
            "  {}: f_el {:.5} (baseline {:.4})  p_suc {:.5} (baseline {:.3e})",
            link.name, p.f_el, link.f_el, p.p_suc, link.p_suc
        );
    }
}
