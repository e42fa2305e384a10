mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use common::*;
use hyperbell::hbsa::{hbsa, label_probabilities, pol_parity_qnd, spatial_bsa};
use hyperbell::hilbert::{
    decompose_in_bell_basis, fidelity, two_photon_state, BellKind, PhotonBasis, PureState,
};
use hyperbell::kerr::{couple, enumerate_outcomes, ProbeRegister, Signature};
use hyperbell::protocols::{teleport, TeleportInput};

fn arb_ket() -> impl Strategy<Value = [Complex64; 4]> {
    prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0))
        .prop_map(|a| a.map(|(re, im)| Complex64::new(re, im)))
        .prop_filter("nonzero", |k| k.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-3)
}

fn arb_kind() -> impl Strategy<Value = BellKind> {
    (0usize..4).prop_map(|k| BellKind::ALL[k])
}

proptest! {
    #[test]
    fn element_constructors_are_unitary(u in arb_unitary()) {
        check_unitary(&u)?;
    }

    #[test]
    fn apply_preserves_norm((state, photon) in arb_state_photon(4), u in arb_unitary()) {
        check_norm(&state, &u, photon)?;
    }

    #[test]
    fn pol_and_spatial_ops_commute(
        state in arb_state(1, 4),
        p in 0usize..4,
        s in 0usize..4,
        seed in any::<u64>(),
    ) {
        let n = state.n_photons();
        check_commutation(&state, p % n, s % n, seed)?;
    }

    #[test]
    fn xquadrature_ignores_phase_sign(state in arb_state(1, 3), couplings in arb_couplings()) {
        check_xquad_symmetry(&state, &couplings)?;
    }

    #[test]
    fn couple_is_additive_and_commutative(
        (state, photon) in arb_state_photon(3),
        basis in 0usize..4,
        other in 0usize..4,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let fresh = ProbeRegister::for_state(&state);
        let on = |k: usize| move |pb: PhotonBasis| pb.index() == k;
        let step = couple(&state, &fresh, photon, on(basis), a).unwrap();
        let step = couple(&state, &step, photon, on(basis), b).unwrap();
        let once = couple(&state, &fresh, photon, on(basis), a + b).unwrap();
        for (x, y) in step.phases().iter().zip(once.phases()) {
            prop_assert!((x - y).abs() < 1e-12);
        }

        let ab = couple(&state, &couple(&state, &fresh, photon, on(basis), a).unwrap(), photon, on(other), b).unwrap();
        let ba = couple(&state, &couple(&state, &fresh, photon, on(other), b).unwrap(), photon, on(basis), a).unwrap();
        for (x, y) in ab.phases().iter().zip(ba.phases()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn outcomes_are_nondemolition(
        state in arb_state(1, 3),
        couplings in arb_couplings(),
        full in any::<bool>(),
    ) {
        let sig = if full { Signature::FullPhase } else { Signature::XQuadrature };
        let reg = register_for(&state, &couplings);
        let outcomes = enumerate_outcomes(&state, &reg, sig).unwrap();
        let total: f64 = outcomes.iter().map(|o| o.prob).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for o in &outcomes {
            prop_assert_eq!(o.post.n_photons(), state.n_photons());
            prop_assert!((o.post.norm() - 1.0).abs() < 1e-12);
            let scale = o.prob.sqrt();
            for (post, input) in o.post.amplitudes().iter().zip(state.amplitudes()) {
                if post.norm() > 0.0 {
                    // surviving branches keep their input amplitude, rescaled
                    prop_assert!((post * scale - input).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bell_decomposition_recombines((state, pair) in arb_state_pair(4)) {
        let dec = decompose_in_bell_basis(&state, pair).unwrap();
        prop_assert!(max_diff(&dec.recombine(), state.amplitudes()) < 1e-12);
    }

    #[test]
    fn analyzer_reproduces_bell_weights((state, pair) in arb_state_pair(3), theta in 0.05f64..1.5) {
        let cfg = hbsa_cfg(theta);
        prop_assume!(cfg.validate().is_ok());
        let probs = label_probabilities(&hbsa(&state, pair, &cfg).unwrap());
        let dec = decompose_in_bell_basis(&state, pair).unwrap();
        for t in &dec.terms {
            prop_assert!((probs[t.label.index()] - t.weight()).abs() < 1e-9);
        }
    }

    #[test]
    fn analyzer_stage_order_is_irrelevant((state, pair) in arb_state_pair(3), theta in 0.05f64..1.5) {
        check_stage_order(&state, pair, theta)?;
    }

    #[test]
    fn spatial_stages_keep_polarization(pol in arb_ket(), kind in arb_kind(), theta in 0.05f64..1.5) {
        let cfg = hbsa_cfg(theta);
        prop_assume!(cfg.validate().is_ok());
        let state = two_photon_state(&pol, &kind.two_qubit_amplitudes());
        for b in spatial_bsa(&state, (0, 1), &cfg).unwrap() {
            prop_assert_eq!(b.kind, kind);
            // after readout the photons sit on the reported ports
            let mut port = [Complex64::new(0.0, 0.0); 4];
            port[2 * b.ports.first.bit() + b.ports.second.bit()] = Complex64::new(1.0, 0.0);
            let expected = two_photon_state(&pol, &port);
            prop_assert!(fidelity(&b.post, &expected).unwrap() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn pol_parity_keeps_spatial(spat in arb_ket(), kind in arb_kind(), theta in 0.05f64..1.5) {
        let cfg = hbsa_cfg(theta);
        let state = two_photon_state(&kind.two_qubit_amplitudes(), &spat);
        let branches = pol_parity_qnd(&state, (0, 1), &cfg).unwrap();
        prop_assert_eq!(branches.len(), 1);
        prop_assert_eq!(branches[0].parity, kind.parity());
        prop_assert!(fidelity(&branches[0].post, &state).unwrap() > 1.0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn teleport_restores_any_input(seed in any::<u64>()) {
        let input = TeleportInput::random(&mut rng(seed));
        let branches = teleport(&input, &hbsa_cfg(0.4)).unwrap();
        prop_assert_eq!(branches.len(), 16);
        for b in &branches {
            prop_assert!(b.fidelity > 1.0 - 1e-9);
            prop_assert!((b.prob - 1.0 / 16.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_states_are_normalized(state in arb_state(1, 4)) {
        prop_assert!((state.norm() - 1.0).abs() < 1e-12);
        prop_assert!(PureState::new(state.n_photons(), state.amplitudes().to_vec()).is_ok());
    }
}
