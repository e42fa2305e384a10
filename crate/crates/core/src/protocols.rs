//! Teleportation of a photon's polarization and spatial state through a
//! hyperentangled channel, and swapping of two hyperentangled pairs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::elements::{
    apply_all, identity, minus_i_sigma_y, mode_swap, phase_on_path, sigma_x, sigma_z, LocalUnitary,
};
use crate::error::{Error, Result};
use crate::hbsa::{hbsa, HbsaConfig};
use crate::hilbert::{fidelity, tensor, BellKind, HyperBellLabel, PureState, SpatialPath};
use crate::kerr::pick_weighted;

/// Fidelity threshold for "same state up to global phase" checks inside
/// the protocols.
const SAME_STATE_TOL: f64 = 1e-9;

/// Amplitudes of `(alpha|H> + beta|V>) ⊗ (gamma|1> + delta|2>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TeleportInput {
    #[serde(serialize_with = "ser_complex")]
    pub alpha: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub beta: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub gamma: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub delta: Complex64,
}

fn ser_complex<S: Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [c.re, c.im].serialize(s)
}

impl TeleportInput {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<Self> {
        let pol = alpha.norm_sqr() + beta.norm_sqr();
        let spat = gamma.norm_sqr() + delta.norm_sqr();
        for norm in [pol, spat] {
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized(norm));
            }
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// Haar-uniform qubit in each degree of freedom.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut qubit = || {
            let mut a = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let mut b = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            a /= n;
            b /= n;
            (a, b)
        };
        let (alpha, beta) = qubit();
        let (gamma, delta) = qubit();
        Self {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// The single-photon state carrying these amplitudes.
    pub fn state(&self) -> PureState {
        PureState::single_photon([self.alpha, self.beta], [self.gamma, self.delta])
            .expect("validated amplitudes")
    }
}

/// Local operations restoring the target state after an analyzer outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionRule {
    pub pol_ops: Vec<LocalUnitary>,
    pub spat_ops: Vec<LocalUnitary>,
}

impl CorrectionRule {
    pub fn ops(&self) -> impl Iterator<Item = &LocalUnitary> {
        self.pol_ops.iter().chain(&self.spat_ops)
    }

    /// Polarization operations first, then spatial ones.
    pub fn apply(&self, state: &PureState, photon: usize) -> Result<PureState> {
        apply_all(state, self.ops(), photon)
    }

    /// The composed single-photon unitary.
    pub fn unitary(&self) -> LocalUnitary {
        self.ops().fold(identity(), |acc, u| acc.then(u))
    }
}

impl Serialize for CorrectionRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Names<'a> {
            pol_ops: Vec<&'a str>,
            spat_ops: Vec<&'a str>,
        }
        Names {
            pol_ops: self.pol_ops.iter().map(LocalUnitary::name).collect(),
            spat_ops: self.spat_ops.iter().map(LocalUnitary::name).collect(),
        }
        .serialize(s)
    }
}

/// Correction for the receiving photon given the announced label.
pub fn correction_for(label: HyperBellLabel) -> CorrectionRule {
    let pol_ops = match label.pol {
        BellKind::PhiPlus => vec![identity()],
        BellKind::PhiMinus => vec![sigma_z()],
        BellKind::PsiPlus => vec![sigma_x()],
        BellKind::PsiMinus => vec![minus_i_sigma_y()],
    };
    let flip = || phase_on_path(SpatialPath::Path1, PI);
    let spat_ops = match label.spat {
        BellKind::PhiPlus => vec![identity()],
        BellKind::PhiMinus => vec![flip()],
        BellKind::PsiPlus => vec![mode_swap()],
        BellKind::PsiMinus => vec![flip(), mode_swap()],
    };
    CorrectionRule { pol_ops, spat_ops }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportBranch {
    pub label: HyperBellLabel,
    pub prob: f64,
    pub correction: CorrectionRule,
    pub bob_before: PureState,
    pub bob_after: PureState,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwapBranch {
    pub bc_label: HyperBellLabel,
    pub prob: f64,
    pub correction: CorrectionRule,
    pub ad_before: PureState,
    pub ad_after: PureState,
    pub fidelity_to_phi_plus: f64,
}

/// Collapsed state of the unmeasured photons for each announced label,
/// with the label's total probability. Every analyzer branch sharing a
/// label must leave the same residual state.
fn residual_by_label(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
) -> Result<Vec<(HyperBellLabel, f64, PureState)>> {
    let mut groups: Vec<(HyperBellLabel, f64, f64, PureState)> = Vec::new();
    for branch in hbsa(state, pair, cfg)? {
        let residual = branch
            .result
            .residual
            .ok_or_else(|| Error::Inconsistent("analyzer consumed every photon".into()))?;
        let label = branch.result.label;
        match groups.iter_mut().find(|g| g.0 == label) {
            Some(group) => {
                if fidelity(&group.3, &residual)? < 1.0 - SAME_STATE_TOL {
                    return Err(Error::Inconsistent(format!(
                        "branches announcing {label} left different states"
                    )));
                }
                group.1 += branch.prob;
                if branch.prob > group.2 {
                    group.2 = branch.prob;
                    group.3 = residual;
                }
            }
            None => groups.push((label, branch.prob, branch.prob, residual)),
        }
    }
    groups.sort_by_key(|g| g.0.index());
    Ok(groups.into_iter().map(|(l, p, _, s)| (l, p, s)).collect())
}

/// Every outcome of teleporting `input` through `|Φ+>_BC`, analyzing photons
/// A and B and correcting photon C.
pub fn teleport(input: &TeleportInput, cfg: &HbsaConfig) -> Result<Vec<TeleportBranch>> {
    let target = input.state();
    let channel = HyperBellLabel::new(BellKind::PhiPlus, BellKind::PhiPlus).state();
    let whole = tensor(&target, &channel)?;
    residual_by_label(&whole, (0, 1), cfg)?
        .into_iter()
        .map(|(label, prob, bob_before)| {
            let correction = correction_for(label);
            let bob_after = correction.apply(&bob_before, 0)?;
            let fidelity = fidelity(&bob_after, &target)?;
            Ok(TeleportBranch {
                label,
                prob,
                correction,
                bob_before,
                bob_after,
                fidelity,
            })
        })
        .collect()
}

/// One teleportation outcome drawn with its Born probability.
pub fn teleport_sampled<R: Rng + ?Sized>(
    input: &TeleportInput,
    cfg: &HbsaConfig,
    rng: &mut R,
) -> Result<TeleportBranch> {
    let mut all = teleport(input, cfg)?;
    let k = pick_weighted(all.iter().map(|b| b.prob), rng);
    Ok(all.swap_remove(k))
}

/// Every outcome of swapping `|Φ+>_AB ⊗ |Φ+>_CD` by analyzing B and C and
/// correcting D.
pub fn swap(cfg: &HbsaConfig) -> Result<Vec<SwapBranch>> {
    let phi = HyperBellLabel::new(BellKind::PhiPlus, BellKind::PhiPlus).state();
    let whole = tensor(&phi, &phi)?;
    residual_by_label(&whole, (1, 2), cfg)?
        .into_iter()
        .map(|(bc_label, prob, ad_before)| {
            let correction = correction_for(bc_label);
            let ad_after = correction.apply(&ad_before, 1)?;
            let fidelity_to_phi_plus = fidelity(&ad_after, &phi)?;
            Ok(SwapBranch {
                bc_label,
                prob,
                correction,
                ad_before,
                ad_after,
                fidelity_to_phi_plus,
            })
        })
        .collect()
}

pub fn swap_sampled<R: Rng + ?Sized>(cfg: &HbsaConfig, rng: &mut R) -> Result<SwapBranch> {
    let mut all = swap(cfg)?;
    let k = pick_weighted(all.iter().map(|b| b.prob), rng);
    Ok(all.swap_remove(k))
}
