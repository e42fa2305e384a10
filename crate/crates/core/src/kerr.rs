//! Cross-Kerr coupling to a coherent probe and the probe readout.
//!
//! The probe is tracked per amplitude: every basis index of the photonic
//! state carries the total phase its branch has imprinted on the probe.
//! Measuring the probe groups indices whose phases are indistinguishable
//! under the chosen [`Signature`] and collapses onto one group. After an
//! outcome the branch phases are reset and no phase is imprinted on the
//! surviving amplitudes.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{PhotonBasis, PureState};

/// Phases closer than this are one measurement class.
pub const PHASE_TOL: f64 = 1e-9;

/// Classes with less weight than this are dropped as numerical residue.
pub const NEGLIGIBLE_PROB: f64 = 1e-24;

/// X-quadrature mean is `QUADRATURE_GAIN * alpha * cos(phase)`.
pub const QUADRATURE_GAIN: f64 = 2.0;

/// X-quadrature variance in vacuum-noise units.
pub const QUADRATURE_VARIANCE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KerrConfig {
    /// Phase imprinted on the probe per coupled photon.
    pub theta: f64,
    /// Coherent probe amplitude, only used by the noisy readout model.
    pub alpha: f64,
}

impl KerrConfig {
    pub fn new(theta: f64, alpha: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0 && theta <= PI / 2.0) {
            return Err(Error::InvalidConfig(format!(
                "theta must lie in (0, π/2], got {theta}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        Ok(Self { theta, alpha })
    }
}

/// Probe readout model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    /// Sensitive to `cos(phase)` only, so `phase` and `-phase` coincide.
    XQuadrature,
    /// Resolves the phase modulo 2π.
    FullPhase,
}

impl Signature {
    /// Canonical class representative of a probe phase.
    pub fn class_of(self, phase: f64) -> f64 {
        let mut wrapped = phase.rem_euclid(TAU);
        if TAU - wrapped < PHASE_TOL {
            wrapped = 0.0;
        }
        match self {
            Signature::FullPhase => wrapped,
            Signature::XQuadrature => {
                if wrapped > PI {
                    TAU - wrapped
                } else {
                    wrapped
                }
            }
        }
    }

    pub fn same_class(self, a: f64, b: f64) -> bool {
        let (a, b) = (self.class_of(a), self.class_of(b));
        let d = (a - b).abs();
        match self {
            Signature::XQuadrature => d < PHASE_TOL,
            Signature::FullPhase => d < PHASE_TOL || TAU - d < PHASE_TOL,
        }
    }
}

/// Probe phase carried by each basis branch of an attached state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRegister {
    branch_phase: Vec<f64>,
}

impl ProbeRegister {
    /// Fresh probe with zero phase on every branch.
    pub fn for_state(state: &PureState) -> Self {
        Self {
            branch_phase: vec![0.0; state.dim()],
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.branch_phase
    }

    pub fn phase(&self, index: usize) -> f64 {
        self.branch_phase[index]
    }

    fn check(&self, state: &PureState) -> Result<()> {
        if self.branch_phase.len() == state.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.branch_phase.len(),
                right: state.dim(),
            })
        }
    }

    pub fn negated(&self) -> Self {
        Self {
            branch_phase: self.branch_phase.iter().map(|p| -p).collect(),
        }
    }
}

/// Couples the mode of `photon` selected by `mode` to the probe. Every
/// branch in which that photon occupies the mode gains `shift`. Amplitudes
/// are not touched.
pub fn couple(
    state: &PureState,
    reg: &ProbeRegister,
    photon: usize,
    mode: impl Fn(PhotonBasis) -> bool,
    shift: f64,
) -> Result<ProbeRegister> {
    reg.check(state)?;
    state.check_photon(photon)?;
    let branch_phase = reg
        .branch_phase
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if mode(state.local_basis(i, photon)) {
                p + shift
            } else {
                p
            }
        })
        .collect();
    Ok(ProbeRegister { branch_phase })
}

/// One probe measurement result.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    /// Canonical phase of the observed class.
    pub class: f64,
    pub prob: f64,
    pub post: PureState,
}

/// Lists every probe outcome with nonzero probability, ordered by class.
pub fn enumerate_outcomes(
    state: &PureState,
    reg: &ProbeRegister,
    sig: Signature,
) -> Result<Vec<OutcomeRecord>> {
    reg.check(state)?;
    let mut reps: Vec<f64> = Vec::new();
    let mut class_of_index = Vec::with_capacity(state.dim());
    for &phase in &reg.branch_phase {
        let slot = match reps.iter().position(|&r| sig.same_class(r, phase)) {
            Some(k) => k,
            None => {
                reps.push(sig.class_of(phase));
                reps.len() - 1
            }
        };
        class_of_index.push(slot);
    }

    let mut outcomes = Vec::new();
    for (k, &class) in reps.iter().enumerate() {
        let (prob, post) = state.project(|i| class_of_index[i] == k);
        if prob <= NEGLIGIBLE_PROB {
            continue;
        }
        if let Some(post) = post {
            outcomes.push(OutcomeRecord { class, prob, post });
        }
    }
    outcomes.sort_by(|a, b| a.class.total_cmp(&b.class));
    let total: f64 = outcomes.iter().map(|o| o.prob).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    Ok(outcomes)
}

/// Draws one outcome with the probabilities of [`enumerate_outcomes`].
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &PureState,
    reg: &ProbeRegister,
    sig: Signature,
    rng: &mut R,
) -> Result<OutcomeRecord> {
    let mut outcomes = enumerate_outcomes(state, reg, sig)?;
    let index = pick_weighted(outcomes.iter().map(|o| o.prob), rng);
    Ok(outcomes.swap_remove(index))
}

/// Index drawn proportionally to `weights`.
pub fn pick_weighted<R: Rng + ?Sized>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let total: f64 = weights.clone().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        last = i;
        if w > 0.0 && u < w {
            return i;
        }
        u -= w;
    }
    last
}

/// Mean X-quadrature reading for a probe rotated by `phase`.
pub fn quadrature_mean(phase: f64, alpha: f64) -> f64 {
    QUADRATURE_GAIN * alpha * phase.cos()
}

/// Reads a probe carrying `true_phase` with Gaussian homodyne noise and
/// returns the candidate with the nearest mean (maximum likelihood under
/// equal priors). Ties go to the earlier candidate.
pub fn noisy_homodyne_classify<R: Rng + ?Sized>(
    true_phase: f64,
    candidates: &[f64],
    config: &KerrConfig,
    rng: &mut R,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let noise = Normal::new(
        quadrature_mean(true_phase, config.alpha),
        QUADRATURE_VARIANCE.sqrt(),
    )
    .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let x = noise.sample(rng);
    let best = candidates
        .iter()
        .copied()
        .min_by(|a, b| {
            let da = (x - quadrature_mean(*a, config.alpha)).abs();
            let db = (x - quadrature_mean(*b, config.alpha)).abs();
            da.total_cmp(&db)
        })
        .expect("non-empty");
    Ok(best)
}

/// Generator for trial `stream` of a run seeded with `seed`. Each trial owns
/// its stream, so results do not depend on execution order.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRate {
    pub trials: u64,
    pub errors: u64,
    pub rate: f64,
    pub std_error: f64,
}

impl ErrorRate {
    fn from_counts(trials: u64, errors: u64) -> Self {
        let rate = errors as f64 / trials as f64;
        Self {
            trials,
            errors,
            rate,
            std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }
}

/// Monte-Carlo misclassification rate of [`noisy_homodyne_classify`] when
/// the true phase alternates over `candidates` trial by trial.
/// Trial `t` draws from `trial_rng(seed, stream_base + t)`.
pub fn homodyne_error_rate(
    candidates: &[f64],
    config: &KerrConfig,
    trials: u64,
    seed: u64,
    stream_base: u64,
) -> Result<ErrorRate> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut errors = 0;
    for t in 0..trials {
        let truth = candidates[(t % candidates.len() as u64) as usize];
        let mut rng = trial_rng(seed, stream_base + t);
        let guess = noisy_homodyne_classify(truth, candidates, config, &mut rng)?;
        // Equal quadrature means are indistinguishable, so compare means.
        let same = (quadrature_mean(guess, config.alpha) - quadrature_mean(truth, config.alpha)).abs()
            < PHASE_TOL;
        if !same {
            errors += 1;
        }
    }
    Ok(ErrorRate::from_counts(trials, errors))
}

/// Closed-form two-Gaussian ML error for mean separation `separation`.
pub fn analytic_two_gaussian_error(separation: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(separation.abs() / (2.0 * (2.0 * QUADRATURE_VARIANCE).sqrt()))
}
