mod common;

use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use repeater_opt::cost::{improve, improvement_factor, Cost};
use repeater_opt::ga::{crossover, mutate, roulette_probabilities, Bounds};
use repeater_opt::model::{denormalize, normalize, RepeaterParams};
use repeater_opt::quantum::{
    amplitude_damp_qubit, decohere, dephase_qubit, depolarize_pair, depolarize_qubit, swap_bsm, Qubit, TwoQubitState,
};
use repeater_opt::sim::{sample_attempt_count, simulate_batch, ChainTopology, SimConfig};
use repeater_opt::werner::werner_e2e_fidelity;

fn density(entries: &[f64]) -> TwoQubitState {
    let a = Matrix4::from_fn(|i, j| Complex64::new(entries[i * 4 + j], entries[16 + i * 4 + j]));
    let rho = a * a.adjoint();
    let tr = rho.trace();
    TwoQubitState::new(rho / tr).unwrap()
}

fn state() -> impl Strategy<Value = TwoQubitState> {
    prop::collection::vec(-1.0..1.0f64, 32)
        .prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(|v| density(&v))
}

fn qubit() -> impl Strategy<Value = Qubit> {
    prop_oneof![Just(Qubit::Left), Just(Qubit::Right)]
}

fn assert_physical(s: &TwoQubitState) {
    s.check().unwrap();
    let m = s.matrix();
    assert!((s.trace() - 1.0).abs() < 1e-12);
    assert!((m - m.adjoint()).norm() < 1e-12);
    assert!(s.min_eigenvalue() > -1e-10);
}

proptest! {
    #[test]
    fn channels_keep_states_physical(rho in state(), q in qubit(), s in 0.0..=1.0f64, p in 0.0..=0.5f64, d in 0.0..=1.0f64) {
        assert_physical(&depolarize_qubit(&rho, q, s).unwrap());
        assert_physical(&dephase_qubit(&rho, q, p).unwrap());
        assert_physical(&amplitude_damp_qubit(&rho, q, d).unwrap());
        assert_physical(&depolarize_pair(&rho, s).unwrap());
        assert_physical(&decohere(&rho, q, d, 1.0, 1.5).unwrap());
    }

    #[test]
    fn swap_matches_brute_force(a in state(), b in state()) {
        let ours = swap_bsm(&a, &b);
        let reference = common::brute_force_swap(a.matrix(), b.matrix());
        prop_assert!((ours.matrix() - reference).norm() < 1e-12);
        assert_physical(&ours);
    }

    #[test]
    fn werner_swap_multiplies_parameters(x1 in -1.0/3.0..=1.0f64, x2 in -1.0/3.0..=1.0f64) {
        let out = swap_bsm(&TwoQubitState::werner(x1).unwrap(), &TwoQubitState::werner(x2).unwrap());
        prop_assert!((out.matrix() - common::werner(x1 * x2)).norm() < 1e-12);
    }

    #[test]
    fn depolarizing_matches_reference(rho in state(), s in 0.0..=1.0f64) {
        let ours = depolarize_qubit(&rho, Qubit::Left, s).unwrap();
        prop_assert!((ours.matrix() - common::depolarize_left(rho.matrix(), s)).norm() < 1e-12);
    }

    #[test]
    fn improvement_round_trip(b in 0.01..0.99f64, k in 1.0..1e3f64) {
        let x = improve(b, k).unwrap();
        prop_assume!(x < 1.0);
        match improvement_factor(b, x).unwrap() {
            Cost::Finite(back) => prop_assert!((back - k).abs() <= 1e-8 * k),
            Cost::Infinite => prop_assert!(false),
        }
    }

    #[test]
    fn improvement_is_monotone(b in 0.01..0.99f64, k1 in 1.0..1e3f64, k2 in 1.0..1e3f64) {
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        prop_assert!(improve(b, lo).unwrap() <= improve(b, hi).unwrap());
    }

    #[test]
    fn normalization_round_trip(f in 0.0..=1.0f64, p in 1e-6..=1.0f64, s in 0.0..=1.0f64, t1 in 1e-3..1e5f64, r in 0.01..2.0f64) {
        let params = RepeaterParams::new(f, p, s, t1, t1 * r).unwrap();
        let back = denormalize(&normalize(&params).unwrap()).unwrap();
        prop_assert!((back.t1 - t1).abs() <= 1e-9 * t1);
        prop_assert!((back.t2 - t1 * r).abs() <= 1e-9 * t1 * r);
        prop_assert_eq!((back.f_el, back.p_suc, back.s_q), (f, p, s));
    }

    #[test]
    fn roulette_is_a_distribution(costs in prop::collection::vec(-50.0..1e4f64, 1..40)) {
        let probs = roulette_probabilities(&costs).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for i in 0..costs.len() {
            for j in 0..costs.len() {
                if costs[i] < costs[j] {
                    prop_assert!(probs[i] >= probs[j]);
                }
            }
        }
    }

    #[test]
    fn crossover_takes_head_and_tail(a in prop::collection::vec(0.0..1.0f64, 2..10), seed in any::<u64>()) {
        let b: Vec<f64> = a.iter().map(|x| x + 1.0).collect();
        let point = 1 + (seed as usize) % (a.len() - 1);
        let child = crossover(&a, &b, point).unwrap();
        prop_assert_eq!(&child[..point], &a[..point]);
        prop_assert_eq!(&child[point..], &b[point..]);
    }

    #[test]
    fn mutation_stays_in_box(genes in prop::collection::vec(0.0..=1.0f64, 5), width in 0.0..2.0f64, seed in any::<u64>()) {
        let bounds = Bounds::unit(5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out = mutate(&genes, 1.0, &bounds, width, &mut rng);
        prop_assert!(bounds.contains(&out));
        let same = mutate(&genes, 0.0, &bounds, width, &mut rng);
        prop_assert_eq!(same, genes);
    }

    #[test]
    fn attempts_are_positive(p in 1e-9..=1.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = sample_attempt_count(p, &mut rng).unwrap();
        prop_assert!(n >= 1);
        if p == 1.0 {
            prop_assert_eq!(n, 1);
        }
    }

    #[test]
    fn closed_form_matches_reference(n in 1u32..12, f in 0.25..=1.0f64, s in 0.0..=1.0f64) {
        let ours = werner_e2e_fidelity(n, f, s).unwrap();
        prop_assert!((ours - common::werner_chain_fidelity(n, f, s)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_runs_are_physical(nodes in 2usize..7, f in 0.6..=1.0f64, p in 0.05..=1.0f64, s in 0.5..=1.0f64, seed in any::<u64>()) {
        let topo = ChainTopology::uniform(nodes, 20.0, 0.9, 0.1).unwrap();
        let params = RepeaterParams::new(f, p, s, 5.0, 1.0).unwrap();
        let stats = simulate_batch(&topo, &params, &SimConfig::default(), 8, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&stats.mean_fidelity));
        prop_assert!(stats.mean_time > 0.0 && stats.rate > 0.0);
        let again = simulate_batch(&topo, &params, &SimConfig::default(), 8, seed).unwrap();
        prop_assert_eq!(stats, again);
    }

    #[test]
    fn werner_mode_fidelity_is_closed_form(nodes in 2usize..11, f in 0.5..=1.0f64, s in 0.5..=1.0f64, seed in any::<u64>()) {
        let topo = ChainTopology::uniform(nodes, 20.0, 0.9, 0.1).unwrap();
        let params = RepeaterParams::new(f, 0.3, s, f64::INFINITY, f64::INFINITY).unwrap();
        let stats = simulate_batch(&topo, &params, &SimConfig::werner(), 4, seed).unwrap();
        if nodes > 2 {
            let expected = common::werner_chain_fidelity(nodes as u32 - 2, f, s);
            prop_assert!((stats.mean_fidelity - expected).abs() < 1e-10);
        } else {
            prop_assert!((stats.mean_fidelity - f).abs() < 1e-10);
        }
    }
}
