//! Multi-photon pure states over polarization and spatial-mode qubits.
//!
//! Every photon carries a four-dimensional local space spanned by
//! `PhotonBasis { pol, path }`. The local index is `2 * path + pol` with
//! `H = 0`, `V = 1`, `path1 = 0`, `path2 = 1`. Photon 0 is the most
//! significant digit of the global index, so an `n`-photon state has
//! `4^n` amplitudes in lexicographic photon order.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of photons a state may carry.
pub const MAX_PHOTONS: usize = 4;

/// Tolerance on the squared norm of a state handed in from outside.
pub const NORM_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn bit(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit & 1 == 0 {
            Polarization::H
        } else {
            Polarization::V
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpatialPath {
    Path1,
    Path2,
}

impl SpatialPath {
    pub const ALL: [SpatialPath; 2] = [SpatialPath::Path1, SpatialPath::Path2];

    pub fn bit(self) -> usize {
        match self {
            SpatialPath::Path1 => 0,
            SpatialPath::Path2 => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Self {
        if bit & 1 == 0 {
            SpatialPath::Path1
        } else {
            SpatialPath::Path2
        }
    }

    /// The rail number as printed in mode names (`a1`, `c2`, ...).
    pub fn number(self) -> usize {
        self.bit() + 1
    }
}

/// One of the four basis labels of a single photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhotonBasis {
    pub pol: Polarization,
    pub path: SpatialPath,
}

impl PhotonBasis {
    pub const fn new(pol: Polarization, path: SpatialPath) -> Self {
        Self { pol, path }
    }

    /// Local index `2 * path + pol`.
    pub fn index(self) -> usize {
        2 * self.path.bit() + self.pol.bit()
    }

    pub fn from_index(index: usize) -> Self {
        debug_assert!(index < 4);
        Self {
            pol: Polarization::from_bit(index & 1),
            path: SpatialPath::from_bit(index >> 1),
        }
    }

    pub fn all() -> impl Iterator<Item = PhotonBasis> {
        (0..4).map(PhotonBasis::from_index)
    }
}

/// Which degree of freedom a Bell state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dof {
    Polarization,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    pub fn index(self) -> usize {
        match self {
            BellKind::PhiPlus => 0,
            BellKind::PhiMinus => 1,
            BellKind::PsiPlus => 2,
            BellKind::PsiMinus => 3,
        }
    }

    pub fn parity(self) -> Parity {
        match self {
            BellKind::PhiPlus | BellKind::PhiMinus => Parity::Even,
            BellKind::PsiPlus | BellKind::PsiMinus => Parity::Odd,
        }
    }

    pub fn sign(self) -> Sign {
        match self {
            BellKind::PhiPlus | BellKind::PsiPlus => Sign::Plus,
            BellKind::PhiMinus | BellKind::PsiMinus => Sign::Minus,
        }
    }

    pub fn from_parity_sign(parity: Parity, sign: Sign) -> Self {
        match (parity, sign) {
            (Parity::Even, Sign::Plus) => BellKind::PhiPlus,
            (Parity::Even, Sign::Minus) => BellKind::PhiMinus,
            (Parity::Odd, Sign::Plus) => BellKind::PsiPlus,
            (Parity::Odd, Sign::Minus) => BellKind::PsiMinus,
        }
    }

    /// Two-qubit amplitudes indexed by `2 * q_first + q_second`.
    pub fn two_qubit_amplitudes(self) -> [Complex64; 4] {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        match self {
            BellKind::PhiPlus => [s, z, z, s],
            BellKind::PhiMinus => [s, z, z, -s],
            BellKind::PsiPlus => [z, s, s, z],
            BellKind::PsiMinus => [z, s, -s, z],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellLabel {
    pub dof: Dof,
    pub kind: BellKind,
}

/// Product of a polarization Bell state and a spatial Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HyperBellLabel {
    pub pol: BellKind,
    pub spat: BellKind,
}

impl HyperBellLabel {
    pub const fn new(pol: BellKind, spat: BellKind) -> Self {
        Self { pol, spat }
    }

    /// All sixteen labels, polarization-major.
    pub fn all() -> impl Iterator<Item = HyperBellLabel> {
        BellKind::ALL
            .into_iter()
            .flat_map(|pol| BellKind::ALL.into_iter().map(move |spat| Self { pol, spat }))
    }

    pub fn index(self) -> usize {
        4 * self.pol.index() + self.spat.index()
    }

    pub fn from_index(index: usize) -> Self {
        Self {
            pol: BellKind::ALL[index / 4],
            spat: BellKind::ALL[index % 4],
        }
    }

    /// The normalized two-photon state.
    pub fn state(self) -> PureState {
        two_photon_state(
            &self.pol.two_qubit_amplitudes(),
            &self.spat.two_qubit_amplitudes(),
        )
    }
}

impl fmt::Display for HyperBellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.pol, self.spat)
    }
}

/// Immutable normalized amplitude vector over `n_photons` photons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct PureState {
    n_photons: usize,
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    n_photons: usize,
    amps: Vec<[f64; 2]>,
}

impl From<PureState> for RawState {
    fn from(s: PureState) -> Self {
        RawState {
            n_photons: s.n_photons,
            amps: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<RawState> for PureState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        let amps = raw.amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        PureState::new(raw.n_photons, amps)
    }
}

pub fn dimension(n_photons: usize) -> usize {
    1 << (2 * n_photons)
}

fn check_photon_count(n_photons: usize) -> Result<()> {
    if (1..=MAX_PHOTONS).contains(&n_photons) {
        Ok(())
    } else {
        Err(Error::PhotonCount(n_photons))
    }
}

fn squared_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

impl PureState {
    /// Wraps an amplitude vector that is already normalized.
    pub fn new(n_photons: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_photon_count(n_photons)?;
        if amps.len() != dimension(n_photons) {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: dimension(n_photons),
            });
        }
        let norm = squared_norm(&amps);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n_photons, amps })
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(n_photons: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        check_photon_count(n_photons)?;
        if amps.len() != dimension(n_photons) {
            return Err(Error::DimensionMismatch {
                left: amps.len(),
                right: dimension(n_photons),
            });
        }
        let norm = squared_norm(&amps);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let scale = 1.0 / norm.sqrt();
        amps.iter_mut().for_each(|a| *a *= scale);
        Ok(Self { n_photons, amps })
    }

    /// Crate-internal constructor for vectors known to be normalized.
    pub(crate) fn from_raw(n_photons: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), dimension(n_photons));
        debug_assert!((squared_norm(&amps) - 1.0).abs() < 1e-9);
        Self { n_photons, amps }
    }

    /// Product of single-photon basis kets.
    pub fn basis(photons: &[PhotonBasis]) -> Result<Self> {
        check_photon_count(photons.len())?;
        let mut amps = vec![Complex64::new(0.0, 0.0); dimension(photons.len())];
        let index = photons.iter().fold(0, |acc, b| 4 * acc + b.index());
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_photons: photons.len(),
            amps,
        })
    }

    /// Single photon in `(pol[0] |H> + pol[1] |V>) ⊗ (path[0] |1> + path[1] |2>)`.
    pub fn single_photon(pol: [Complex64; 2], path: [Complex64; 2]) -> Result<Self> {
        let amps = (0..4)
            .map(|i| {
                let b = PhotonBasis::from_index(i);
                pol[b.pol.bit()] * path[b.path.bit()]
            })
            .collect();
        Self::new(1, amps)
    }

    /// Haar-random state from normalized complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(n_photons: usize, rng: &mut R) -> Result<Self> {
        check_photon_count(n_photons)?;
        let amps = (0..dimension(n_photons))
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::normalized(n_photons, amps)
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, photons: &[PhotonBasis]) -> Complex64 {
        assert_eq!(photons.len(), self.n_photons);
        let index = photons.iter().fold(0, |acc, b| 4 * acc + b.index());
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        squared_norm(&self.amps).sqrt()
    }

    /// Basis label of `photon` inside global index `index`.
    pub fn local_basis(&self, index: usize, photon: usize) -> PhotonBasis {
        PhotonBasis::from_index(local_digit(index, self.n_photons, photon))
    }

    pub(crate) fn check_photon(&self, photon: usize) -> Result<()> {
        if photon < self.n_photons {
            Ok(())
        } else {
            Err(Error::PhotonOutOfRange {
                index: photon,
                n_photons: self.n_photons,
            })
        }
    }

    pub(crate) fn check_pair(&self, pair: (usize, usize)) -> Result<()> {
        if pair.0 == pair.1 || pair.0 >= self.n_photons || pair.1 >= self.n_photons {
            Err(Error::InvalidPair(pair.0, pair.1))
        } else {
            Ok(())
        }
    }

    /// Renormalized restriction onto the indices accepted by `keep`.
    /// Returns the probability of the kept subspace and the post-state,
    /// or `None` when that probability vanishes.
    pub(crate) fn project(&self, keep: impl Fn(usize) -> bool) -> (f64, Option<PureState>) {
        let mut amps = self.amps.clone();
        for (i, a) in amps.iter_mut().enumerate() {
            if !keep(i) {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        let prob = squared_norm(&amps) / squared_norm(&self.amps);
        if prob <= 0.0 {
            return (0.0, None);
        }
        (prob, PureState::normalized(self.n_photons, amps).ok())
    }

    /// Projects `pair` onto the basis outcome `(first, second)` and traces
    /// those two photons out. The remaining photons keep their order.
    pub(crate) fn measure_pair(
        &self,
        pair: (usize, usize),
        first: PhotonBasis,
        second: PhotonBasis,
    ) -> (f64, Option<PureState>) {
        let rest = rest_photons(self.n_photons, pair);
        let mut out = vec![Complex64::new(0.0, 0.0); dimension(rest.len())];
        for (i, a) in self.amps.iter().enumerate() {
            if local_digit(i, self.n_photons, pair.0) == first.index()
                && local_digit(i, self.n_photons, pair.1) == second.index()
            {
                out[sub_index(i, self.n_photons, &rest)] += *a;
            }
        }
        let prob = squared_norm(&out) / squared_norm(&self.amps);
        if rest.is_empty() || prob <= 0.0 {
            return (prob, None);
        }
        (prob, PureState::normalized(rest.len(), out).ok())
    }
}

/// Local digit (0..4) of `photon` inside a global index.
pub(crate) fn local_digit(index: usize, n_photons: usize, photon: usize) -> usize {
    (index >> (2 * (n_photons - 1 - photon))) & 3
}

/// Photons other than the pair, in ascending order.
pub(crate) fn rest_photons(n_photons: usize, pair: (usize, usize)) -> Vec<usize> {
    (0..n_photons).filter(|&p| p != pair.0 && p != pair.1).collect()
}

/// Index into the reduced space spanned by `photons`.
pub(crate) fn sub_index(index: usize, n_photons: usize, photons: &[usize]) -> usize {
    photons
        .iter()
        .fold(0, |acc, &p| 4 * acc + local_digit(index, n_photons, p))
}

/// Two-photon state from a polarization two-qubit ket and a spatial two-qubit ket.
/// Both kets are indexed by `2 * q_first + q_second`.
pub fn two_photon_state(pol: &[Complex64; 4], spat: &[Complex64; 4]) -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 16];
    for (i, a) in amps.iter_mut().enumerate() {
        let first = PhotonBasis::from_index(i >> 2);
        let second = PhotonBasis::from_index(i & 3);
        *a = pol[2 * first.pol.bit() + second.pol.bit()]
            * spat[2 * first.path.bit() + second.path.bit()];
    }
    PureState::normalized(2, amps).expect("product of nonzero kets")
}

/// Bell state `kind` in `dof`, tensored with `partner` (a two-qubit ket for
/// the other degree of freedom, `|phi+>` when absent).
pub fn make_bell(dof: Dof, kind: BellKind, partner: Option<[Complex64; 4]>) -> PureState {
    let bell = kind.two_qubit_amplitudes();
    let other = partner.unwrap_or_else(|| BellKind::PhiPlus.two_qubit_amplitudes());
    match dof {
        Dof::Polarization => two_photon_state(&bell, &other),
        Dof::Spatial => two_photon_state(&other, &bell),
    }
}

pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let n = a.n_photons + b.n_photons;
    check_photon_count(n)?;
    let amps = a
        .amps
        .iter()
        .flat_map(|x| b.amps.iter().map(move |y| x * y))
        .collect();
    Ok(PureState::from_raw(n, amps))
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

pub fn fidelity(a: &PureState, b: &PureState) -> Result<f64> {
    Ok(inner(a, b)?.norm_sqr().min(1.0))
}

/// One term of a Bell-basis expansion over a photon pair: the (unnormalized)
/// state of the remaining photons that accompanies `label`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellTerm {
    pub label: HyperBellLabel,
    pub rest: Vec<Complex64>,
}

impl BellTerm {
    /// Squared norm of the accompanying vector, i.e. the Born weight of `label`.
    pub fn weight(&self) -> f64 {
        squared_norm(&self.rest)
    }

    /// Scalar coefficient when the pair makes up the whole state.
    pub fn coefficient(&self) -> Option<Complex64> {
        (self.rest.len() == 1).then(|| self.rest[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellDecomposition {
    pub n_photons: usize,
    pub pair: (usize, usize),
    pub terms: Vec<BellTerm>,
}

impl BellDecomposition {
    pub fn term(&self, label: HyperBellLabel) -> &BellTerm {
        &self.terms[label.index()]
    }

    /// Label with the largest weight.
    pub fn dominant(&self) -> HyperBellLabel {
        self.terms
            .iter()
            .max_by(|a, b| a.weight().total_cmp(&b.weight()))
            .map(|t| t.label)
            .expect("sixteen terms")
    }

    /// Rebuilds the full amplitude vector from the terms.
    pub fn recombine(&self) -> Vec<Complex64> {
        let n = self.n_photons;
        let rest = rest_photons(n, self.pair);
        let mut amps = vec![Complex64::new(0.0, 0.0); dimension(n)];
        for term in &self.terms {
            let bell = term.label.state();
            for (i, a) in amps.iter_mut().enumerate() {
                let d0 = local_digit(i, n, self.pair.0);
                let d1 = local_digit(i, n, self.pair.1);
                *a += bell.amps[4 * d0 + d1] * term.rest[sub_index(i, n, &rest)];
            }
        }
        amps
    }
}

/// Expands `state` over the sixteen hyper-Bell states of `pair`.
pub fn decompose_in_bell_basis(state: &PureState, pair: (usize, usize)) -> Result<BellDecomposition> {
    state.check_pair(pair)?;
    let n = state.n_photons;
    let rest = rest_photons(n, pair);
    let terms = HyperBellLabel::all()
        .map(|label| {
            let bell = label.state();
            let mut out = vec![Complex64::new(0.0, 0.0); dimension(rest.len())];
            for (i, a) in state.amps.iter().enumerate() {
                let d0 = local_digit(i, n, pair.0);
                let d1 = local_digit(i, n, pair.1);
                out[sub_index(i, n, &rest)] += bell.amps[4 * d0 + d1].conj() * a;
            }
            BellTerm { label, rest: out }
        })
        .collect();
    Ok(BellDecomposition {
        n_photons: n,
        pair,
        terms,
    })
}
