#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hyperbell::elements::{
    apply, beam_splitter, identity, minus_i_sigma_y, mode_swap, pbs, phase_on_path, r45_waveplate,
    sigma_x, sigma_z, unitarity_error, LocalUnitary,
};
use hyperbell::hbsa::{hbsa_ordered, label_probabilities, HbsaConfig, StageOrder};
use hyperbell::hilbert::{inner, PureState, SpatialPath};
use hyperbell::kerr::{couple, enumerate_outcomes, KerrConfig, ProbeRegister, Signature};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hbsa_cfg(theta: f64) -> HbsaConfig {
    HbsaConfig::new(KerrConfig::new(theta, 2.0).unwrap())
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Largest amplitude gap between `actual` and `expected` after removing the
/// global phase.
pub fn phase_aligned_diff(actual: &PureState, expected: &PureState) -> f64 {
    let ip = inner(expected, actual).unwrap();
    if ip.norm() == 0.0 {
        return f64::INFINITY;
    }
    let phase = ip / ip.norm();
    let shifted: Vec<Complex64> = expected.amplitudes().iter().map(|a| a * phase).collect();
    max_diff(actual.amplitudes(), &shifted)
}

/// Every fixed element constructor plus a phase plate at `phase`.
pub fn constructors(phase: f64) -> Vec<LocalUnitary> {
    vec![
        identity(),
        beam_splitter(),
        r45_waveplate(),
        pbs(),
        phase_on_path(SpatialPath::Path1, phase),
        phase_on_path(SpatialPath::Path2, phase),
        mode_swap(),
        sigma_x(),
        sigma_z(),
        minus_i_sigma_y(),
    ]
}

pub fn arb_state(min_photons: usize, max_photons: usize) -> impl Strategy<Value = PureState> {
    (min_photons..=max_photons, any::<u64>())
        .prop_map(|(n, seed)| PureState::random(n, &mut rng(seed)).unwrap())
}

/// A random state together with a valid photon index.
pub fn arb_state_photon(max_photons: usize) -> impl Strategy<Value = (PureState, usize)> {
    arb_state(1, max_photons).prop_flat_map(|s| {
        let n = s.n_photons();
        (Just(s), 0..n)
    })
}

/// A random state of at least two photons with a distinct ordered pair.
pub fn arb_state_pair(max_photons: usize) -> impl Strategy<Value = (PureState, (usize, usize))> {
    arb_state(2, max_photons).prop_flat_map(|s| {
        let n = s.n_photons();
        (Just(s), (0..n, 0..n))
            .prop_filter("distinct photons", |(_, (a, b))| a != b)
    })
}

pub fn arb_unitary() -> impl Strategy<Value = LocalUnitary> {
    prop_oneof![
        (0usize..10, -10.0f64..10.0).prop_map(|(k, phase)| constructors(phase).swap_remove(k)),
        any::<u64>().prop_map(|s| LocalUnitary::random(&mut rng(s))),
        any::<u64>().prop_map(|s| LocalUnitary::random_polarization(&mut rng(s))),
        any::<u64>().prop_map(|s| LocalUnitary::random_spatial(&mut rng(s))),
    ]
}

/// `(photon, basis index, shift)` couplings; photons are reduced mod n.
pub fn arb_couplings() -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    prop::collection::vec((0usize..4, 0usize..4, -3.0f64..3.0), 1..6)
}

pub fn register_for(state: &PureState, couplings: &[(usize, usize, f64)]) -> ProbeRegister {
    let n = state.n_photons();
    couplings
        .iter()
        .fold(ProbeRegister::for_state(state), |reg, &(photon, basis, shift)| {
            couple(state, &reg, photon % n, |b| b.index() == basis, shift).unwrap()
        })
}

pub fn check_unitary(u: &LocalUnitary) -> Result<(), TestCaseError> {
    let err = unitarity_error(u.matrix());
    prop_assert!(err < 1e-12, "{} has unitarity error {err}", u.name());
    Ok(())
}

pub fn check_norm(state: &PureState, u: &LocalUnitary, photon: usize) -> Result<(), TestCaseError> {
    let out = apply(state, u, photon).unwrap();
    prop_assert!((out.norm() - 1.0).abs() < 1e-12, "norm {} after {}", out.norm(), u.name());
    Ok(())
}

pub fn check_commutation(
    state: &PureState,
    photon_p: usize,
    photon_s: usize,
    seed: u64,
) -> Result<(), TestCaseError> {
    let mut r = rng(seed);
    let p = LocalUnitary::random_polarization(&mut r);
    let s = LocalUnitary::random_spatial(&mut r);
    let ps = apply(&apply(state, &p, photon_p).unwrap(), &s, photon_s).unwrap();
    let sp = apply(&apply(state, &s, photon_s).unwrap(), &p, photon_p).unwrap();
    let d = max_diff(ps.amplitudes(), sp.amplitudes());
    prop_assert!(d < 1e-12, "orderings differ by {d}");
    Ok(())
}

pub fn check_xquad_symmetry(
    state: &PureState,
    couplings: &[(usize, usize, f64)],
) -> Result<(), TestCaseError> {
    let reg = register_for(state, couplings);
    let plus = enumerate_outcomes(state, &reg, Signature::XQuadrature).unwrap();
    let minus = enumerate_outcomes(state, &reg.negated(), Signature::XQuadrature).unwrap();
    prop_assert_eq!(plus.len(), minus.len());
    for (a, b) in plus.iter().zip(&minus) {
        prop_assert!((a.class - b.class).abs() < 1e-12);
        prop_assert!((a.prob - b.prob).abs() < 1e-12);
        prop_assert!(max_diff(a.post.amplitudes(), b.post.amplitudes()) < 1e-12);
    }
    Ok(())
}

pub fn check_stage_order(
    state: &PureState,
    pair: (usize, usize),
    theta: f64,
) -> Result<(), TestCaseError> {
    let cfg = hbsa_cfg(theta);
    if cfg.validate().is_err() {
        return Ok(());
    }
    let a = label_probabilities(&hbsa_ordered(state, pair, &cfg, StageOrder::SpatialFirst).unwrap());
    let b = label_probabilities(
        &hbsa_ordered(state, pair, &cfg, StageOrder::PolarizationFirst).unwrap(),
    );
    for k in 0..16 {
        prop_assert!((a[k] - b[k]).abs() < 1e-9, "label {k}: {} vs {}", a[k], b[k]);
    }
    Ok(())
}
