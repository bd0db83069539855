//! Noise channels and entanglement swapping on two-qubit density matrices.
//!
//! cargo run --example channels

use repeater_opt::quantum::{
    amplitude_damp_qubit, decohere, depolarize_qubit, swap_bsm, BellState, Qubit, TwoQubitState,
};

fn main() {
    let bell = TwoQubitState::bell(BellState::PsiPlus);
    println!("|psi+> fidelity            {:.6}", bell.fidelity(BellState::PsiPlus));

    let depolarized = depolarize_qubit(&bell, Qubit::Left, 0.9).unwrap();
    println!(
        "after depolarizing (s=0.9) {:.6}",
        depolarized.fidelity(BellState::PsiPlus)
    );

    let damped = amplitude_damp_qubit(&bell, Qubit::Right, 0.2).unwrap();
    println!("after damping (p=0.2)      {:.6}", damped.fidelity(BellState::PsiPlus));

    let stored = decohere(&bell, Qubit::Left, 1e-3, 1.0, 5e-3).unwrap();
    println!(
        "1 ms in memory (T1=1 s, T2=5 ms) {:.6}",
        stored.fidelity(BellState::PsiPlus)
    );

    println!("\nswapping Werner links:");
    for (x1, x2) in [(0.9, 0.9), (0.8, 0.5), (1.0, 0.3)] {
        let out = swap_bsm(&TwoQubitState::werner(x1).unwrap(), &TwoQubitState::werner(x2).unwrap());
        let expected = TwoQubitState::werner(x1 * x2).unwrap();
        let diff = (out.matrix() - expected.matrix()).norm();
        println!(
            "  x1={x1} x2={x2}  F={:.6}  |rho - W(x1 x2)| = {diff:.1e}",
            out.fidelity(BellState::PsiPlus)
        );
    }
}
