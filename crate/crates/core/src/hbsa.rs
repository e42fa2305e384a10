//! Complete hyperentangled Bell-state analysis.
//!
//! The spatial analyzer runs two nondemolition stages: a parity check
//! (`+θ` on rail 1 of the first photon, `-θ` on rail 2 of the second,
//! X-quadrature readout) and a phase check (beam splitter on each photon,
//! four couplings on the `c1, d1, c2, d2` output rails, full phase readout
//! that fixes the output ports). The polarization analyzer then runs a
//! parity check on the H/V components followed by a destructive R45 + PBS
//! detection whose click pattern fixes the relative sign.
//!
//! Every stage returns all branches with nonzero probability so the whole
//! analysis is an exact enumeration.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::elements::{apply, beam_splitter, pbs, r45_waveplate};
use crate::error::{Error, Result};
use crate::hilbert::{
    BellKind, HyperBellLabel, Parity, PhotonBasis, Polarization, PureState, Sign, SpatialPath,
};
use crate::kerr::{
    couple, enumerate_outcomes, KerrConfig, ProbeRegister, Signature, NEGLIGIBLE_PROB, PHASE_TOL,
};

/// Default multipliers of `theta` for the couplings on `c1, d1, c2, d2`.
/// The port sums come out as `5θ, 10θ, 9θ, 6θ`.
pub const DEFAULT_PORT_WEIGHTS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HbsaConfig {
    pub kerr: KerrConfig,
    /// Multipliers of `theta` giving θ1..θ4 on rails `c1, d1, c2, d2`.
    pub port_weights: [f64; 4],
}

impl HbsaConfig {
    pub fn new(kerr: KerrConfig) -> Self {
        Self {
            kerr,
            port_weights: DEFAULT_PORT_WEIGHTS,
        }
    }

    /// θ1..θ4 in radians.
    pub fn port_shifts(&self) -> [f64; 4] {
        self.port_weights.map(|w| w * self.kerr.theta)
    }

    /// Probe phase expected for each port pair.
    pub fn port_sum(&self, ports: PortRecord) -> f64 {
        let [t1, t2, t3, t4] = self.port_shifts();
        let first = match ports.first {
            SpatialPath::Path1 => t1,
            SpatialPath::Path2 => t2,
        };
        let second = match ports.second {
            SpatialPath::Path1 => t3,
            SpatialPath::Path2 => t4,
        };
        first + second
    }

    /// Fails when two port pairs would give the same probe phase modulo 2π.
    pub fn validate(&self) -> Result<()> {
        let sums: Vec<f64> = PortRecord::ALL.iter().map(|&p| self.port_sum(p)).collect();
        for i in 0..sums.len() {
            for j in i + 1..sums.len() {
                if Signature::FullPhase.same_class(sums[i], sums[j]) {
                    return Err(Error::DegeneratePortPhases(self.kerr.theta));
                }
            }
        }
        Ok(())
    }
}

/// Output rails of the two analyzed photons after the beam splitters.
/// Rail 1 is the `c` port and rail 2 the `d` port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PortRecord {
    pub first: SpatialPath,
    pub second: SpatialPath,
}

impl PortRecord {
    /// `c1c2, d1d2, c1d2, d1c2`.
    pub const ALL: [PortRecord; 4] = [
        PortRecord::new(SpatialPath::Path1, SpatialPath::Path1),
        PortRecord::new(SpatialPath::Path2, SpatialPath::Path2),
        PortRecord::new(SpatialPath::Path1, SpatialPath::Path2),
        PortRecord::new(SpatialPath::Path2, SpatialPath::Path1),
    ];

    pub const fn new(first: SpatialPath, second: SpatialPath) -> Self {
        Self { first, second }
    }

    /// `c1c2` and `d1d2` mark the plus state of the parity group.
    pub fn sign(self) -> Sign {
        if self.first == self.second {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for PortRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = |p: SpatialPath| match p {
            SpatialPath::Path1 => 'c',
            SpatialPath::Path2 => 'd',
        };
        write!(f, "{}1{}2", letter(self.first), letter(self.second))
    }
}

impl Serialize for PortRecord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Detectors behind the PBSs: D1/D2 take photon one's H/V output,
/// D3/D4 photon two's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClickPattern {
    pub first: Polarization,
    pub second: Polarization,
}

impl ClickPattern {
    pub fn detectors(self) -> (u8, u8) {
        let d1 = match self.first {
            Polarization::H => 1,
            Polarization::V => 2,
        };
        let d2 = match self.second {
            Polarization::H => 3,
            Polarization::V => 4,
        };
        (d1, d2)
    }

    /// `D1D3` and `D2D4` mark the plus state after the rotations.
    pub fn sign(self) -> Sign {
        if self.first == self.second {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.detectors();
        write!(f, "D{a}D{b}")
    }
}

impl Serialize for ClickPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    SpatialParity,
    SpatialPhase,
    PolParity,
    PolDetect,
}

/// One entry of the classical record produced by the analyzer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptEntry {
    pub stage: Stage,
    /// Probe phase class for the nondemolition stages, absent for detection.
    pub outcome_class: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ports: Option<PortRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clicks: Option<ClickPattern>,
}

/// A parity-check branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityBranch {
    pub parity: Parity,
    pub class: f64,
    pub prob: f64,
    pub post: PureState,
}

/// A spatial phase-check branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PortBranch {
    pub sign: Sign,
    pub ports: PortRecord,
    pub class: f64,
    pub prob: f64,
    pub post: PureState,
}

/// A spatial Bell analysis branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialBranch {
    pub kind: BellKind,
    pub ports: PortRecord,
    pub parity_class: f64,
    pub port_class: f64,
    pub prob: f64,
    pub post: PureState,
}

/// A destructive detection branch. `residual` holds the photons outside the
/// measured pair, or `None` when nothing is left.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectBranch {
    pub sign: Sign,
    pub clicks: ClickPattern,
    pub prob: f64,
    pub residual: Option<PureState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HbsaResult {
    pub label: HyperBellLabel,
    pub ports: PortRecord,
    /// State of the unmeasured photons; the analyzed pair is consumed.
    pub residual: Option<PureState>,
    pub transcript: Vec<TranscriptEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HbsaBranch {
    pub prob: f64,
    pub result: HbsaResult,
}

/// Order of the two nondemolition analyzers. Detection always comes last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOrder {
    SpatialFirst,
    PolarizationFirst,
}

fn parity_from_class(class: f64) -> Parity {
    if class.abs() < PHASE_TOL {
        Parity::Odd
    } else {
        Parity::Even
    }
}

fn parity_branches(
    state: &PureState,
    reg: &ProbeRegister,
    theta: f64,
) -> Result<Vec<ParityBranch>> {
    enumerate_outcomes(state, reg, Signature::XQuadrature)?
        .into_iter()
        .map(|o| {
            let parity = parity_from_class(o.class);
            if parity == Parity::Even && !Signature::XQuadrature.same_class(o.class, theta) {
                return Err(Error::Inconsistent(format!(
                    "parity probe class {} is neither 0 nor |θ|",
                    o.class
                )));
            }
            Ok(ParityBranch {
                parity,
                class: o.class,
                prob: o.prob,
                post: o.post,
            })
        })
        .collect()
}

/// Spatial parity check: even for `|φ±>_S`, odd for `|ψ±>_S`.
pub fn spatial_parity_qnd(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
) -> Result<Vec<ParityBranch>> {
    state.check_pair(pair)?;
    let theta = cfg.kerr.theta;
    let reg = ProbeRegister::for_state(state);
    let reg = couple(state, &reg, pair.0, |b| b.path == SpatialPath::Path1, theta)?;
    let reg = couple(state, &reg, pair.1, |b| b.path == SpatialPath::Path2, -theta)?;
    parity_branches(state, &reg, theta)
}

/// Polarization parity check: `|HH>` gains `+θ`, `|VV>` gains `-θ`.
pub fn pol_parity_qnd(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
) -> Result<Vec<ParityBranch>> {
    state.check_pair(pair)?;
    let theta = cfg.kerr.theta;
    let reg = ProbeRegister::for_state(state);
    let reg = couple(state, &reg, pair.0, |b| b.pol == Polarization::H, theta)?;
    let reg = couple(state, &reg, pair.1, |b| b.pol == Polarization::V, -theta)?;
    parity_branches(state, &reg, theta)
}

/// Probe register after the beam splitters and the four port couplings.
/// `state` must already be in the output-port basis.
pub fn port_register(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
) -> Result<ProbeRegister> {
    let [t1, t2, t3, t4] = cfg.port_shifts();
    let reg = ProbeRegister::for_state(state);
    let reg = couple(state, &reg, pair.0, |b| b.path == SpatialPath::Path1, t1)?;
    let reg = couple(state, &reg, pair.0, |b| b.path == SpatialPath::Path2, t2)?;
    let reg = couple(state, &reg, pair.1, |b| b.path == SpatialPath::Path1, t3)?;
    couple(state, &reg, pair.1, |b| b.path == SpatialPath::Path2, t4)
}

/// Spatial phase check: beam splitters, then port readout. Returns states in
/// the output-port basis.
pub fn spatial_phase_qnd(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
) -> Result<Vec<PortBranch>> {
    state.check_pair(pair)?;
    cfg.validate()?;
    let bs = beam_splitter();
    let mixed = apply(&apply(state, &bs, pair.0)?, &bs, pair.1)?;
    let reg = port_register(&mixed, pair, cfg)?;
    enumerate_outcomes(&mixed, &reg, Signature::FullPhase)?
        .into_iter()
        .map(|o| {
            let ports = PortRecord::ALL
                .into_iter()
                .find(|&p| Signature::FullPhase.same_class(o.class, cfg.port_sum(p)))
                .ok_or_else(|| {
                    Error::Inconsistent(format!(
                        "port probe class {} matches no port pair",
                        o.class
                    ))
                })?;
            Ok(PortBranch {
                sign: ports.sign(),
                ports,
                class: o.class,
                prob: o.prob,
                post: o.post,
            })
        })
        .collect()
}

/// Both spatial stages; the parity and sign select the Bell kind.
pub fn spatial_bsa(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
) -> Result<Vec<SpatialBranch>> {
    let mut out = Vec::new();
    for parity in spatial_parity_qnd(state, pair, cfg)? {
        for port in spatial_phase_qnd(&parity.post, pair, cfg)? {
            out.push(SpatialBranch {
                kind: BellKind::from_parity_sign(parity.parity, port.sign),
                ports: port.ports,
                parity_class: parity.class,
                port_class: port.class,
                prob: parity.prob * port.prob,
                post: port.post,
            });
        }
    }
    Ok(out)
}

/// R45 on both photons, PBS routing, then photodetection of the pair.
/// Same-polarization clicks (`D1D3`, `D2D4`) mean plus, mixed clicks minus.
pub fn pol_phase_detect(state: &PureState, pair: (usize, usize)) -> Result<Vec<DetectBranch>> {
    state.check_pair(pair)?;
    let r45 = r45_waveplate();
    let rotated = apply(&apply(state, &r45, pair.0)?, &r45, pair.1)?;
    let splitter = pbs();
    let routed = apply(&apply(&rotated, &splitter, pair.0)?, &splitter, pair.1)?;

    let mut branches: Vec<DetectBranch> = Vec::new();
    for first in PhotonBasis::all() {
        for second in PhotonBasis::all() {
            let (prob, residual) = routed.measure_pair(pair, first, second);
            if prob <= NEGLIGIBLE_PROB {
                continue;
            }
            let clicks = ClickPattern {
                first: first.pol,
                second: second.pol,
            };
            branches.push(DetectBranch {
                sign: clicks.sign(),
                clicks,
                prob,
                residual,
            });
        }
    }
    let total: f64 = branches.iter().map(|b| b.prob).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Inconsistent(format!(
            "detection probabilities sum to {total}"
        )));
    }
    Ok(branches)
}

/// Full analysis of `pair` with the spatial analyzer first.
pub fn hbsa(state: &PureState, pair: (usize, usize), cfg: &HbsaConfig) -> Result<Vec<HbsaBranch>> {
    hbsa_ordered(state, pair, cfg, StageOrder::SpatialFirst)
}

pub fn hbsa_ordered(
    state: &PureState,
    pair: (usize, usize),
    cfg: &HbsaConfig,
    order: StageOrder,
) -> Result<Vec<HbsaBranch>> {
    state.check_pair(pair)?;
    cfg.validate()?;

    // (pol parity, spatial branch) pairs before detection
    let mut staged: Vec<(ParityBranch, SpatialBranch, f64)> = Vec::new();
    match order {
        StageOrder::SpatialFirst => {
            for sp in spatial_bsa(state, pair, cfg)? {
                for pp in pol_parity_qnd(&sp.post, pair, cfg)? {
                    let prob = sp.prob * pp.prob;
                    staged.push((pp, sp.clone(), prob));
                }
            }
        }
        StageOrder::PolarizationFirst => {
            for pp in pol_parity_qnd(state, pair, cfg)? {
                for sp in spatial_bsa(&pp.post, pair, cfg)? {
                    let prob = sp.prob * pp.prob;
                    staged.push((pp.clone(), sp, prob));
                }
            }
        }
    }

    let mut out = Vec::new();
    for (pp, sp, prob) in staged {
        let before_detect = match order {
            StageOrder::SpatialFirst => &pp.post,
            StageOrder::PolarizationFirst => &sp.post,
        };
        for det in pol_phase_detect(before_detect, pair)? {
            let label = HyperBellLabel::new(BellKind::from_parity_sign(pp.parity, det.sign), sp.kind);
            let spatial_entries = [
                TranscriptEntry {
                    stage: Stage::SpatialParity,
                    outcome_class: Some(sp.parity_class),
                    ports: None,
                    clicks: None,
                },
                TranscriptEntry {
                    stage: Stage::SpatialPhase,
                    outcome_class: Some(sp.port_class),
                    ports: Some(sp.ports),
                    clicks: None,
                },
            ];
            let pol_entry = TranscriptEntry {
                stage: Stage::PolParity,
                outcome_class: Some(pp.class),
                ports: None,
                clicks: None,
            };
            let mut transcript = Vec::with_capacity(4);
            match order {
                StageOrder::SpatialFirst => {
                    transcript.extend(spatial_entries);
                    transcript.push(pol_entry);
                }
                StageOrder::PolarizationFirst => {
                    transcript.push(pol_entry);
                    transcript.extend(spatial_entries);
                }
            }
            transcript.push(TranscriptEntry {
                stage: Stage::PolDetect,
                outcome_class: None,
                ports: None,
                clicks: Some(det.clicks),
            });
            out.push(HbsaBranch {
                prob: prob * det.prob,
                result: HbsaResult {
                    label,
                    ports: sp.ports,
                    residual: det.residual,
                    transcript,
                },
            });
        }
    }
    Ok(out)
}

/// Probability of each of the sixteen labels, indexed by [`HyperBellLabel::index`].
pub fn label_probabilities(branches: &[HbsaBranch]) -> [f64; 16] {
    let mut probs = [0.0; 16];
    for b in branches {
        probs[b.result.label.index()] += b.prob;
    }
    probs.map(|p| p.min(1.0))
}

/// Runs the analysis and requires every branch to agree on the label.
/// Returns the most probable branch.
pub fn classify(state: &PureState, pair: (usize, usize), cfg: &HbsaConfig) -> Result<HbsaResult> {
    let branches = hbsa(state, pair, cfg)?;
    let first = branches
        .first()
        .ok_or_else(|| Error::Inconsistent("no branches".into()))?
        .result
        .label;
    if branches.iter().any(|b| b.result.label != first) {
        return Err(Error::NotDeterministic);
    }
    branches
        .into_iter()
        .max_by(|a, b| a.prob.total_cmp(&b.prob))
        .map(|b| b.result)
        .ok_or(Error::NotDeterministic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fidelity, make_bell, tensor, two_photon_state, Dof};
    use num_complex::Complex64;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn cfg() -> HbsaConfig {
        HbsaConfig::new(KerrConfig::new(0.3, 2.0).unwrap())
    }

    fn spat(kind: BellKind) -> PureState {
        make_bell(Dof::Spatial, kind, None)
    }

    fn pol(kind: BellKind) -> PureState {
        make_bell(Dof::Polarization, kind, None)
    }

    #[test]
    fn spatial_parity_examples() {
        let out = spatial_parity_qnd(&spat(BellKind::PhiMinus), (0, 1), &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].parity, Parity::Even);
        assert!(fidelity(&out[0].post, &spat(BellKind::PhiMinus)).unwrap() > 1.0 - 1e-12);

        let out = spatial_parity_qnd(&spat(BellKind::PsiPlus), (0, 1), &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].parity, Parity::Odd);
        assert_eq!(out[0].post, spat(BellKind::PsiPlus));

        let st = HyperBellLabel::new(BellKind::PhiPlus, BellKind::PsiMinus).state();
        let out = spatial_parity_qnd(&st, (0, 1), &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].parity, Parity::Odd);
        assert_eq!(out[0].post, st);
    }

    #[test]
    fn phase_check_ports() {
        let c = cfg();
        let out = spatial_phase_qnd(&spat(BellKind::PhiPlus), (0, 1), &c).unwrap();
        let ports: Vec<String> = out.iter().map(|b| b.ports.to_string()).collect();
        assert_eq!(out.len(), 2);
        assert!(ports.contains(&"c1c2".to_string()) && ports.contains(&"d1d2".to_string()));
        for b in &out {
            assert!((b.prob - 0.5).abs() < 1e-12);
            assert_eq!(b.sign, Sign::Plus);
        }

        let out = spatial_phase_qnd(&spat(BellKind::PsiMinus), (0, 1), &c).unwrap();
        for b in &out {
            assert_eq!(b.sign, Sign::Minus);
            assert!(["c1d2", "d1c2"].contains(&b.ports.to_string().as_str()));
        }
    }

    #[test]
    fn beam_splitters_map_phi_minus_to_crossed_ports() {
        let bs = beam_splitter();
        let st = spat(BellKind::PhiMinus);
        let mixed = apply(&apply(&st, &bs, 0).unwrap(), &bs, 1).unwrap();
        // (|c1d2> + |d1c2>)/√2 in the spatial factor, |φ+>_P unchanged
        let crossed = [
            Complex64::new(0.0, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let expect = two_photon_state(&BellKind::PhiPlus.two_qubit_amplitudes(), &crossed);
        assert!(fidelity(&mixed, &expect).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn spatial_bsa_identifies_each_kind() {
        for kind in BellKind::ALL {
            let st = spat(kind);
            let out = spatial_bsa(&st, (0, 1), &cfg()).unwrap();
            let total: f64 = out.iter().map(|b| b.prob).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(out.iter().all(|b| b.kind == kind), "{kind}");
        }
        let out = spatial_bsa(&spat(BellKind::PsiPlus), (0, 1), &cfg()).unwrap();
        for b in out {
            assert!(["c1c2", "d1d2"].contains(&b.ports.to_string().as_str()));
        }
    }

    #[test]
    fn pol_parity_examples() {
        let out = pol_parity_qnd(&pol(BellKind::PhiPlus), (0, 1), &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].parity, Parity::Even);
        assert!(fidelity(&out[0].post, &pol(BellKind::PhiPlus)).unwrap() > 1.0 - 1e-12);

        let out = pol_parity_qnd(&pol(BellKind::PsiMinus), (0, 1), &cfg()).unwrap();
        assert_eq!(out[0].parity, Parity::Odd);
        assert_eq!(out[0].post, pol(BellKind::PsiMinus));

        let amps: Vec<Complex64> = pol(BellKind::PhiPlus)
            .amplitudes()
            .iter()
            .zip(pol(BellKind::PsiPlus).amplitudes())
            .map(|(a, b)| a + b)
            .collect();
        let mix = PureState::normalized(2, amps).unwrap();
        let out = pol_parity_qnd(&mix, (0, 1), &cfg()).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|b| (b.prob - 0.5).abs() < 1e-12));
    }

    #[test]
    fn detection_click_patterns() {
        let patterns = |kind| {
            let mut v: Vec<String> = pol_phase_detect(&pol(kind), (0, 1))
                .unwrap()
                .iter()
                .map(|b| b.clicks.to_string())
                .collect();
            v.sort();
            v.dedup();
            v
        };
        assert_eq!(patterns(BellKind::PhiPlus), ["D1D3", "D2D4"]);
        assert_eq!(patterns(BellKind::PhiMinus), ["D1D4", "D2D3"]);
        assert_eq!(patterns(BellKind::PsiMinus), ["D1D4", "D2D3"]);
        assert_eq!(patterns(BellKind::PsiPlus), ["D1D3", "D2D4"]);

        let out = pol_phase_detect(&pol(BellKind::PhiPlus), (0, 1)).unwrap();
        let mut by_click = std::collections::HashMap::new();
        for b in out {
            *by_click.entry(b.clicks.to_string()).or_insert(0.0) += b.prob;
        }
        assert!((by_click["D1D3"] - 0.5).abs() < 1e-12);
        assert!((by_click["D2D4"] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn all_sixteen_are_classified() {
        for label in HyperBellLabel::all() {
            let result = classify(&label.state(), (0, 1), &cfg()).unwrap();
            assert_eq!(result.label, label);
            assert!(result.residual.is_none());
            assert_eq!(result.transcript.len(), 4);
        }
    }

    #[test]
    fn stage_order_does_not_change_labels() {
        for label in HyperBellLabel::all() {
            let branches =
                hbsa_ordered(&label.state(), (0, 1), &cfg(), StageOrder::PolarizationFirst).unwrap();
            assert!(branches.iter().all(|b| b.result.label == label));
            assert_eq!(branches[0].result.transcript[0].stage, Stage::PolParity);
        }
    }

    #[test]
    fn ports_match_support_of_post_state() {
        for label in HyperBellLabel::all() {
            for sp in spatial_bsa(&label.state(), (0, 1), &cfg()).unwrap() {
                for (i, a) in sp.post.amplitudes().iter().enumerate() {
                    if a.norm() > 1e-12 {
                        assert_eq!(sp.post.local_basis(i, 0).path, sp.ports.first);
                        assert_eq!(sp.post.local_basis(i, 1).path, sp.ports.second);
                    }
                }
            }
        }
    }

    #[test]
    fn residual_photon_is_returned() {
        let extra = PureState::basis(&[PhotonBasis::new(Polarization::V, SpatialPath::Path2)]).unwrap();
        let label = HyperBellLabel::new(BellKind::PsiMinus, BellKind::PhiMinus);
        let st = tensor(&label.state(), &extra).unwrap();
        let result = classify(&st, (0, 1), &cfg()).unwrap();
        assert_eq!(result.label, label);
        let residual = result.residual.unwrap();
        assert!(fidelity(&residual, &extra).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn degenerate_port_phases_rejected() {
        let c = HbsaConfig::new(KerrConfig::new(PI / 2.0, 1.0).unwrap());
        assert_eq!(c.validate(), Err(Error::DegeneratePortPhases(PI / 2.0)));
        assert!(cfg().validate().is_ok());
        let st = HyperBellLabel::new(BellKind::PhiPlus, BellKind::PhiPlus).state();
        assert!(hbsa(&st, (0, 1), &c).is_err());
    }

    #[test]
    fn port_sums_follow_the_decision_table() {
        let c = cfg();
        let [t1, t2, t3, t4] = c.port_shifts();
        let sums: Vec<f64> = PortRecord::ALL.iter().map(|&p| c.port_sum(p)).collect();
        assert_eq!(sums, vec![t1 + t3, t2 + t4, t1 + t4, t2 + t3]);
    }

    #[test]
    fn transcript_json_shape() {
        let st = HyperBellLabel::new(BellKind::PhiPlus, BellKind::PhiPlus).state();
        let r = classify(&st, (0, 1), &cfg()).unwrap();
        let json = serde_json::to_value(&r.transcript).unwrap();
        assert_eq!(json[0]["stage"], "spatial_parity");
        assert!(json[0].get("ports").is_none());
        assert!(json[1]["ports"].is_string());
        assert!(json[3]["clicks"].is_string());
        assert!(json[3]["outcome_class"].is_null());
    }
}
