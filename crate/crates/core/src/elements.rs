//! Single-photon linear-optical elements acting on the four-dimensional
//! polarization ⊗ path space of one photon.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::{local_digit, PureState, SpatialPath};

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

/// Unitarity tolerance for every constructor.
pub const UNITARY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

fn hadamard2() -> Mat2 {
    let s = re(FRAC_1_SQRT_2);
    [[s, s], [s, -s]]
}

/// `path ⊗ pol` Kronecker product in the `2 * path + pol` index layout.
fn kron(path: &Mat2, pol: &Mat2) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = path[r >> 1][c >> 1] * pol[r & 1][c & 1];
        }
    }
    m
}

fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = (0..4).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    m
}

fn adjoint(a: &Mat4) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = a[c][r].conj();
        }
    }
    m
}

/// Largest entry of `|U†U - I|`.
pub fn unitarity_error(m: &Mat4) -> f64 {
    let p = matmul(&adjoint(m), m);
    let mut worst: f64 = 0.0;
    for (r, row) in p.iter().enumerate() {
        for (c, x) in row.iter().enumerate() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((x - target).norm());
        }
    }
    worst
}

/// A named 4×4 unitary on one photon.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    name: String,
    matrix: Mat4,
}

impl fmt::Display for LocalUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl LocalUnitary {
    /// Validates unitarity before wrapping.
    pub fn from_matrix(name: impl Into<String>, matrix: Mat4) -> Result<Self> {
        let name = name.into();
        if unitarity_error(&matrix) > UNITARY_TOL {
            return Err(Error::NotUnitary(name));
        }
        Ok(Self { name, matrix })
    }

    fn known(name: &str, matrix: Mat4) -> Self {
        debug_assert!(unitarity_error(&matrix) <= UNITARY_TOL, "{name}");
        Self {
            name: name.to_string(),
            matrix,
        }
    }

    /// Acts on polarization, identity on path.
    pub fn polarization(name: impl Into<String>, op: Mat2) -> Result<Self> {
        Self::from_matrix(name, kron(&IDENTITY2, &op))
    }

    /// Acts on path, identity on polarization.
    pub fn spatial(name: impl Into<String>, op: Mat2) -> Result<Self> {
        Self::from_matrix(name, kron(&op, &IDENTITY2))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &LocalUnitary) -> LocalUnitary {
        LocalUnitary {
            name: format!("{} ; {}", self.name, other.name),
            matrix: matmul(&other.matrix, &self.matrix),
        }
    }

    pub fn adjoint(&self) -> LocalUnitary {
        LocalUnitary {
            name: format!("({})†", self.name),
            matrix: adjoint(&self.matrix),
        }
    }

    /// Haar-random 4×4 unitary (Gram-Schmidt on Gaussian columns).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::known("random", random_unitary::<4, R>(rng))
    }

    pub fn random_polarization<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::known("random_pol", kron(&IDENTITY2, &random_unitary::<2, R>(rng)))
    }

    pub fn random_spatial<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::known("random_spat", kron(&random_unitary::<2, R>(rng), &IDENTITY2))
    }
}

fn random_unitary<const N: usize, R: Rng + ?Sized>(rng: &mut R) -> [[Complex64; N]; N] {
    let mut cols = [[ZERO; N]; N];
    for c in 0..N {
        let mut v = [ZERO; N];
        for x in v.iter_mut() {
            *x = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
        for prev in cols.iter().take(c) {
            let proj: Complex64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= proj * p;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols[c] = v;
    }
    let mut m = [[ZERO; N]; N];
    for (c, col) in cols.iter().enumerate() {
        for (r, x) in col.iter().enumerate() {
            m[r][c] = *x;
        }
    }
    m
}

pub fn identity() -> LocalUnitary {
    LocalUnitary::known("identity", kron(&IDENTITY2, &IDENTITY2))
}

/// 50:50 beam splitter on the two rails: `path1 -> (path1 + path2)/√2`,
/// `path2 -> (path1 - path2)/√2`. Output rail 1 is the `c` port, rail 2 the `d` port.
pub fn beam_splitter() -> LocalUnitary {
    LocalUnitary::known("beam_splitter", kron(&hadamard2(), &IDENTITY2))
}

/// 45° rotation: `H -> (H + V)/√2`, `V -> (H - V)/√2`.
pub fn r45_waveplate() -> LocalUnitary {
    LocalUnitary::known("r45", kron(&IDENTITY2, &hadamard2()))
}

/// Polarizing beam splitter: H keeps its rail, V switches rails.
pub fn pbs() -> LocalUnitary {
    let mut m = [[ZERO; 4]; 4];
    for col in 0..4 {
        let pol = col & 1;
        let path = col >> 1;
        let out_path = path ^ pol;
        m[2 * out_path + pol][col] = ONE;
    }
    LocalUnitary::known("pbs", m)
}

/// Multiplies amplitudes on `target` by `e^{i phase}`.
pub fn phase_on_path(target: SpatialPath, phase: f64) -> LocalUnitary {
    let mut op = IDENTITY2;
    op[target.bit()][target.bit()] = Complex64::from_polar(1.0, phase);
    LocalUnitary::known(
        &format!("phase_path{}({phase:.6})", target.number()),
        kron(&op, &IDENTITY2),
    )
}

/// Exchanges the two rails.
pub fn mode_swap() -> LocalUnitary {
    LocalUnitary::known("mode_swap", kron(&[[ZERO, ONE], [ONE, ZERO]], &IDENTITY2))
}

pub fn sigma_x() -> LocalUnitary {
    LocalUnitary::known("sigma_x", kron(&IDENTITY2, &[[ZERO, ONE], [ONE, ZERO]]))
}

pub fn sigma_z() -> LocalUnitary {
    LocalUnitary::known("sigma_z", kron(&IDENTITY2, &[[ONE, ZERO], [ZERO, -ONE]]))
}

/// `|H><V| - |V><H|`: `V -> H`, `H -> -V`.
pub fn minus_i_sigma_y() -> LocalUnitary {
    LocalUnitary::known(
        "minus_i_sigma_y",
        kron(&IDENTITY2, &[[ZERO, ONE], [-ONE, ZERO]]),
    )
}

/// Applies `u` to the tensor factor of `photon`.
pub fn apply(state: &PureState, u: &LocalUnitary, photon: usize) -> Result<PureState> {
    state.check_photon(photon)?;
    let n = state.n_photons();
    let stride = 1usize << (2 * (n - 1 - photon));
    let src = state.amplitudes();
    let mut out = vec![ZERO; src.len()];
    for base in (0..src.len()).filter(|&i| local_digit(i, n, photon) == 0) {
        let local: [Complex64; 4] = std::array::from_fn(|k| src[base + k * stride]);
        for (r, row) in u.matrix.iter().enumerate() {
            out[base + r * stride] = row.iter().zip(&local).map(|(m, a)| m * a).sum();
        }
    }
    Ok(PureState::from_raw(n, out))
}

/// Applies a sequence of unitaries to one photon, in order.
pub fn apply_all<'a>(
    state: &PureState,
    ops: impl IntoIterator<Item = &'a LocalUnitary>,
    photon: usize,
) -> Result<PureState> {
    let mut current = state.clone();
    for u in ops {
        current = apply(&current, u, photon)?;
    }
    Ok(current)
}
