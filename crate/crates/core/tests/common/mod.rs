//! Reference computations that share no code with the library.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;

pub type M4 = Matrix4<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn werner(x: f64) -> M4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [c(0.0), c(h), c(h), c(0.0)];
    M4::from_fn(|i, j| c(x) * psi[i] * psi[j].conj() + if i == j { c((1.0 - x) / 4.0) } else { c(0.0) })
}

pub fn psi_plus_fidelity(rho: &M4) -> f64 {
    0.5 * (rho[(1, 1)] + rho[(2, 2)] + rho[(1, 2)] + rho[(2, 1)]).re
}

/// Outcome-averaged swap of `left` (qubits A, B) and `right` (C, D) by
/// projecting B, C on each Bell state in the full 16-dimensional space,
/// tracing them out and correcting D back to |psi+>.
pub fn brute_force_swap(left: &M4, right: &M4) -> M4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    let bells: [([Complex64; 4], [[Complex64; 2]; 2]); 4] = [
        ([c(h), c(0.0), c(0.0), c(h)], [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]),
        ([c(h), c(0.0), c(0.0), c(-h)], [[c(0.0), -i], [i, c(0.0)]]),
        ([c(0.0), c(h), c(h), c(0.0)], [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]),
        ([c(0.0), c(h), c(-h), c(0.0)], [[c(1.0), c(0.0)], [c(0.0), c(-1.0)]]),
    ];
    let full = DMatrix::from_fn(16, 16, |r, s| left[(r >> 2, s >> 2)] * right[(r & 3, s & 3)]);
    let mut out = M4::zeros();
    for (bell, u) in bells {
        // <bell|_{BC} rho |bell>_{BC}, indices (a, d)
        let mut reduced = M4::zeros();
        for a in 0..2 {
            for d in 0..2 {
                for a2 in 0..2 {
                    for d2 in 0..2 {
                        let mut acc = c(0.0);
                        for bc in 0..4 {
                            for bc2 in 0..4 {
                                let r = a * 8 + bc * 2 + d;
                                let s = a2 * 8 + bc2 * 2 + d2;
                                acc += bell[bc].conj() * full[(r, s)] * bell[bc2];
                            }
                        }
                        reduced[(a * 2 + d, a2 * 2 + d2)] = acc;
                    }
                }
            }
        }
        let corr = M4::from_fn(|r, s| if r >> 1 == s >> 1 { u[r & 1][s & 1] } else { c(0.0) });
        out += corr * reduced * corr.adjoint();
    }
    out
}

/// Depolarizing one qubit of a pair: `s rho + (1 - s) I/2 (x) tr_q rho`.
pub fn depolarize_left(rho: &M4, s: f64) -> M4 {
    let mut traced = M4::zeros();
    for a in 0..2 {
        for b in 0..2 {
            for b2 in 0..2 {
                let v = (0..2).map(|k| rho[(k * 2 + b, k * 2 + b2)]).sum::<Complex64>();
                traced[(a * 2 + b, a * 2 + b2)] = v * 0.5;
            }
        }
    }
    rho * c(s) + traced * c(1.0 - s)
}

/// Closed-form end-to-end fidelity of `n` repeaters with Werner links,
/// written as the Werner weight `x^(n+1) s^n (2 + s^n) / 3`.
pub fn werner_chain_fidelity(n: u32, f: f64, s: f64) -> f64 {
    let x = (4.0 * f - 1.0) / 3.0;
    let sn = (0..n).fold(1.0, |acc, _| acc * s);
    let weight = (0..=n).fold(1.0, |acc, _| acc * x) * sn * (2.0 + sn) / 3.0;
    (1.0 + 3.0 * weight) / 4.0
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
