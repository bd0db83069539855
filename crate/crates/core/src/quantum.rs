//! Two-qubit density matrices and the noise channels used by the chain
//! simulator.
//!
//! Basis order is fixed as `|00>, |01>, |10>, |11>`, with the [`Qubit::Left`]
//! qubit as the most significant tensor factor. Every channel here is a
//! completely positive trace-preserving map acting on one qubit of the pair
//! (or, for [`depolarize_pair`], on the pair as a whole).

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use thiserror::Error;

pub type Matrix4c = Matrix4<Complex64>;
pub type Vector4c = Vector4<Complex64>;
type Matrix2c = Matrix2<Complex64>;

/// Tolerance for Hermiticity and unit trace.
pub const EXACT_TOL: f64 = 1e-12;
/// Slack allowed on the smallest eigenvalue.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("target vector has norm {0}, expected 1")]
    UnnormalizedTarget(f64),
    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("T2 = {t2} s exceeds 2*T1 = {} s", 2.0 * t1)]
    Unphysical { t1: f64, t2: f64 },
}

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), QuantumError> {
    if value.is_nan() || value < lo || value > hi {
        return Err(QuantumError::OutOfRange { name, value, lo, hi });
    }
    Ok(())
}

/// One of the four maximally entangled two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellState {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PhiMinus,
        BellState::PsiPlus,
        BellState::PsiMinus,
    ];

    pub fn amplitudes(self) -> Vector4c {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellState::PhiPlus => Vector4c::new(h, z, z, h),
            BellState::PhiMinus => Vector4c::new(h, z, z, -h),
            BellState::PsiPlus => Vector4c::new(z, h, h, z),
            BellState::PsiMinus => Vector4c::new(z, h, -h, z),
        }
    }
}

/// Selects one qubit of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Left,
    Right,
}

/// Werner parameter `x` together with the matching fidelity `(1 + 3x) / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParameter {
    x: f64,
}

impl WernerParameter {
    pub fn from_x(x: f64) -> Result<Self, QuantumError> {
        check_range("werner x", x, -1.0 / 3.0, 1.0)?;
        Ok(Self { x })
    }

    pub fn from_fidelity(f: f64) -> Result<Self, QuantumError> {
        check_range("werner fidelity", f, 0.0, 1.0)?;
        Ok(Self {
            x: ((4.0 * f - 1.0) / 3.0).clamp(-1.0 / 3.0, 1.0),
        })
    }

    pub fn x(self) -> f64 {
        self.x
    }

    pub fn fidelity(self) -> f64 {
        (1.0 + 3.0 * self.x) / 4.0
    }
}

/// Density matrix of one entangled pair.
///
/// Instances can only be obtained through validated constructors or through
/// the channels in this module, so every value satisfies the density-matrix
/// invariants up to floating-point rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: Matrix4c,
}

impl TwoQubitState {
    /// Validates `matrix` as a density matrix.
    pub fn new(matrix: Matrix4c) -> Result<Self, QuantumError> {
        let state = Self { matrix };
        state.check()?;
        Ok(state)
    }

    pub(crate) fn from_raw(matrix: Matrix4c) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.matrix
    }

    pub fn bell(kind: BellState) -> Self {
        let v = kind.amplitudes();
        Self::from_raw(v * v.adjoint())
    }

    /// Computational basis projector `|i><i|` for `index` in `0..4`.
    pub fn basis(index: usize) -> Self {
        assert!(index < 4, "basis index {index} out of range");
        let mut m = Matrix4c::zeros();
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Self::from_raw(m)
    }

    pub fn maximally_mixed() -> Self {
        Self::from_raw(Matrix4c::identity() * Complex64::new(0.25, 0.0))
    }

    /// `x |psi+><psi+| + (1 - x) I/4`.
    pub fn werner(x: f64) -> Result<Self, QuantumError> {
        let x = WernerParameter::from_x(x)?.x();
        Ok(mix(&Self::bell(BellState::PsiPlus), &Self::maximally_mixed(), x))
    }

    /// Hermiticity, unit trace and positive semidefiniteness.
    pub fn check(&self) -> Result<(), QuantumError> {
        let m = &self.matrix;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QuantumError::NotHermitian(f64::NAN));
        }
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > EXACT_TOL {
            return Err(QuantumError::NotHermitian(herm));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > EXACT_TOL || tr.im.abs() > EXACT_TOL {
            return Err(QuantumError::BadTrace(tr.re));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(QuantumError::NotPositive(min_eig));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // symmetrize first so rounding noise in the anti-Hermitian part is ignored
        let h = (self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `<b|rho|b>` for a Bell state `b`, evaluated from the four relevant
    /// matrix entries so that the common cases are exact in binary.
    pub fn fidelity(&self, target: BellState) -> f64 {
        let m = &self.matrix;
        let (i, j, sign) = match target {
            BellState::PhiPlus => (0, 3, 1.0),
            BellState::PhiMinus => (0, 3, -1.0),
            BellState::PsiPlus => (1, 2, 1.0),
            BellState::PsiMinus => (1, 2, -1.0),
        };
        0.5 * (m[(i, i)].re + m[(j, j)].re) + sign * m[(i, j)].re
    }

    /// `<psi|rho|psi>` for an arbitrary normalized pure state.
    pub fn overlap(&self, psi: &Vector4c) -> Result<f64, QuantumError> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QuantumError::UnnormalizedTarget(norm));
        }
        Ok((psi.adjoint() * self.matrix * psi)[(0, 0)].re)
    }
}

/// `p * a + (1 - p) * b`.
fn mix(a: &TwoQubitState, b: &TwoQubitState, p: f64) -> TwoQubitState {
    TwoQubitState::from_raw(a.matrix * Complex64::new(p, 0.0) + b.matrix * Complex64::new(1.0 - p, 0.0))
}

pub fn bell_state(kind: BellState) -> TwoQubitState {
    TwoQubitState::bell(kind)
}

pub fn fidelity(state: &TwoQubitState, target: BellState) -> f64 {
    state.fidelity(target)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli_x() -> Matrix2c {
    Matrix2c::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

fn pauli_y() -> Matrix2c {
    let i = Complex64::new(0.0, 1.0);
    Matrix2c::new(c(0.0), -i, i, c(0.0))
}

fn pauli_z() -> Matrix2c {
    Matrix2c::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

fn on_qubit(op: &Matrix2c, which: Qubit) -> Matrix4c {
    let id = Matrix2c::identity();
    let full = match which {
        Qubit::Left => op.kronecker(&id),
        Qubit::Right => id.kronecker(op),
    };
    Matrix4c::from_iterator(full.iter().copied())
}

/// `sum_k K_k rho K_k^dagger` over weighted unitaries / Kraus operators.
fn conjugate(rho: &Matrix4c, op: &Matrix4c) -> Matrix4c {
    op * rho * op.adjoint()
}

/// Single-qubit depolarizing channel parametrised by swap quality:
/// `((1 + 3s)/4) rho + ((1 - s)/4)(X rho X + Y rho Y + Z rho Z)`.
pub fn depolarize_qubit(state: &TwoQubitState, which: Qubit, s_q: f64) -> Result<TwoQubitState, QuantumError> {
    check_range("s_q", s_q, 0.0, 1.0)?;
    if s_q == 1.0 {
        return Ok(state.clone());
    }
    let rho = &state.matrix;
    let paulis = conjugate(rho, &on_qubit(&pauli_x(), which))
        + conjugate(rho, &on_qubit(&pauli_y(), which))
        + conjugate(rho, &on_qubit(&pauli_z(), which));
    Ok(TwoQubitState::from_raw(
        rho * c((1.0 + 3.0 * s_q) / 4.0) + paulis * c((1.0 - s_q) / 4.0),
    ))
}

/// Phase flip with probability `p`: `(1 - p) rho + p Z rho Z`.
pub fn dephase_qubit(state: &TwoQubitState, which: Qubit, p: f64) -> Result<TwoQubitState, QuantumError> {
    check_range("dephasing probability", p, 0.0, 0.5)?;
    if p == 0.0 {
        return Ok(state.clone());
    }
    let rho = &state.matrix;
    let flipped = conjugate(rho, &on_qubit(&pauli_z(), which));
    Ok(TwoQubitState::from_raw(rho * c(1.0 - p) + flipped * c(p)))
}

/// Amplitude damping toward `|0>` with decay probability `p_damp`.
pub fn amplitude_damp_qubit(state: &TwoQubitState, which: Qubit, p_damp: f64) -> Result<TwoQubitState, QuantumError> {
    check_range("damping probability", p_damp, 0.0, 1.0)?;
    if p_damp == 0.0 {
        return Ok(state.clone());
    }
    let k0 = Matrix2c::new(c(1.0), c(0.0), c(0.0), c((1.0 - p_damp).sqrt()));
    let k1 = Matrix2c::new(c(0.0), c(p_damp.sqrt()), c(0.0), c(0.0));
    let rho = &state.matrix;
    Ok(TwoQubitState::from_raw(
        conjugate(rho, &on_qubit(&k0, which)) + conjugate(rho, &on_qubit(&k1, which)),
    ))
}

fn check_times(t1: f64, t2: f64) -> Result<(), QuantumError> {
    if t1.is_nan() || t1 <= 0.0 {
        return Err(QuantumError::OutOfRange {
            name: "T1",
            value: t1,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if t2.is_nan() || t2 <= 0.0 {
        return Err(QuantumError::OutOfRange {
            name: "T2",
            value: t2,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    if t2 > 2.0 * t1 {
        return Err(QuantumError::Unphysical { t1, t2 });
    }
    Ok(())
}

/// Probability of energy relaxation over `t` seconds.
pub fn damping_probability(t: f64, t1: f64) -> f64 {
    -(-t / t1).exp_m1()
}

/// Phase-flip probability accumulated over `t` seconds,
/// `(1 - exp(-t (1/T2 - 1/(2 T1)))) / 2`.
pub fn dephasing_probability(t: f64, t1: f64, t2: f64) -> Result<f64, QuantumError> {
    check_times(t1, t2)?;
    check_range("t", t, 0.0, f64::INFINITY)?;
    let rate = 1.0 / t2 - 1.0 / (2.0 * t1);
    // rate can dip a hair below zero at T2 == 2 T1
    let rate = rate.max(0.0);
    if t == 0.0 || rate == 0.0 {
        return Ok(0.0);
    }
    Ok((-(-t * rate).exp_m1() / 2.0).min(0.5))
}

/// T1 relaxation over `t_damp` followed by T2 dephasing over `t_dephase`.
///
/// The two channels commute, so the order is immaterial. [`decohere`] is the
/// common case where both windows coincide.
pub fn decohere_split(
    state: &TwoQubitState,
    which: Qubit,
    t_damp: f64,
    t_dephase: f64,
    t1: f64,
    t2: f64,
) -> Result<TwoQubitState, QuantumError> {
    check_times(t1, t2)?;
    check_range("t", t_damp, 0.0, f64::INFINITY)?;
    let damped = amplitude_damp_qubit(state, which, damping_probability(t_damp, t1))?;
    dephase_qubit(&damped, which, dephasing_probability(t_dephase, t1, t2)?)
}

/// Memory decoherence of one stored qubit over `t` seconds.
pub fn decohere(state: &TwoQubitState, which: Qubit, t: f64, t1: f64, t2: f64) -> Result<TwoQubitState, QuantumError> {
    decohere_split(state, which, t, t, t1, t2)
}

/// `lambda rho + (1 - lambda) I/4`. Maps Werner(x) to Werner(lambda x).
pub fn depolarize_pair(state: &TwoQubitState, lambda: f64) -> Result<TwoQubitState, QuantumError> {
    check_range("pair depolarizing weight", lambda, 0.0, 1.0)?;
    if lambda == 1.0 {
        return Ok(state.clone());
    }
    Ok(mix(state, &TwoQubitState::maximally_mixed(), lambda))
}

/// Ideal Bell-state measurement on the inner qubits of two pairs.
///
/// `left` holds qubits (a, b) and `right` holds (c, d); b and c are measured.
/// Each outcome is followed by the Pauli correction on d that maps the ideal
/// `psi+ x psi+` input back to `psi+`, and the four branches are summed, so
/// the result is the deterministic outcome-averaged state on (a, d).
pub fn swap_bsm(left: &TwoQubitState, right: &TwoQubitState) -> TwoQubitState {
    let l = &left.matrix;
    let r = &right.matrix;
    let mut out = Matrix4c::zeros();
    for (bell, correction) in [
        (BellState::PhiPlus, Some(pauli_x())),
        (BellState::PhiMinus, Some(pauli_y())),
        (BellState::PsiPlus, None),
        (BellState::PsiMinus, Some(pauli_z())),
    ] {
        let beta = bell.amplitudes();
        let mut branch = Matrix4c::zeros();
        for a in 0..2 {
            for d in 0..2 {
                for a2 in 0..2 {
                    for d2 in 0..2 {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for bc in 0..4 {
                            let (b, cc) = (bc >> 1, bc & 1);
                            let wb = beta[bc].conj();
                            if wb == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            for bc2 in 0..4 {
                                let (b2, c2) = (bc2 >> 1, bc2 & 1);
                                let w = wb * beta[bc2];
                                if w == Complex64::new(0.0, 0.0) {
                                    continue;
                                }
                                acc += w * l[(2 * a + b, 2 * a2 + b2)] * r[(2 * cc + d, 2 * c2 + d2)];
                            }
                        }
                        branch[(2 * a + d, 2 * a2 + d2)] = acc;
                    }
                }
            }
        }
        out += match correction {
            Some(p) => conjugate(&branch, &on_qubit(&p, Qubit::Right)),
            None => branch,
        };
    }
    TwoQubitState::from_raw(out)
}
