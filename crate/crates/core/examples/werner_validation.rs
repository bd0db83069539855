//! Optimizer against the closed-form optimum of a one-repeater Werner chain.
//!
//! cargo run --release --example werner_validation -- [seed]

use std::path::Path;

use repeater_opt::orchestrator::{execute, RunManifest, RunResult};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/configs/validate.ini");
    let mut manifest = RunManifest::load(path).unwrap();
    manifest.seed = seed;
    let RunResult::Validation(history, report) = execute(&manifest).unwrap() else {
        unreachable!()
    };
    let r = &report.reference;
    println!(
        "closed-form optimum: cost {:.4}  f_el {:.4}  s_q {:.4}  p_suc {:.4}",
        r.cost, r.f_el, r.s_q, r.p_suc
    );
    println!("  fidelity {:.4}  rate {:.4} Hz", r.fidelity, r.rate);
    for g in history.generations.iter().step_by(10).chain(history.generations.last()) {
        println!("gen {:>3}  best {:.4}", g.index, g.best_cost);
    }
    println!("relative gap {:.2}%", 100.0 * report.relative_gap.unwrap());
}
