//! Bisection for the elementary-link fidelity needed over three repeaters.
//!
//! cargo run --release --example sensitivity_sweep

use std::path::Path;

use repeater_opt::orchestrator::{sensitivity_sweep, RunManifest};
use repeater_opt::werner::werner_e2e_fidelity;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/configs/sweep_f_el.ini");
    let manifest = RunManifest::load(path).unwrap();
    let result = sensitivity_sweep(&manifest).unwrap();
    for p in &result.probes {
        println!("f_el {:.6}  F {:.6}", p.value, p.response);
    }
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if werner_e2e_fidelity(3, mid, 1.0).unwrap() >= 0.7 {
            hi = mid
        } else {
            lo = mid
        }
    }
    println!(
        "bracket [{:.6}, {:.6}]  closed-form root {hi:.6}",
        result.interval.0, result.interval.1
    );
}
