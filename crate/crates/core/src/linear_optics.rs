//! Passive (photon-number conserving) mode transformations and single-mode
//! squeezing of vacuum on Fock-space states.
//!
//! A passive unitary `U` acts on creation operators as
//! `a_k^dagger -> sum_j U[j][k] a_j^dagger`, so a coherent state `|z>` is
//! mapped to `|U z>`. The Fock action is realised by decomposing `U` into
//! two-mode mixers and single-mode phases; every mixer is applied shell by
//! shell with closed-form binomial amplitudes, so nothing is truncated.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockBasis, OccupationState};
use crate::policy::NumericalPolicy;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Element of U(n).
#[derive(Debug, Clone, PartialEq)]
pub struct PassiveUnitary {
    matrix: DMatrix<Complex64>,
}

impl PassiveUnitary {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::with_policy(matrix, &NumericalPolicy::default())
    }

    pub fn with_policy(matrix: DMatrix<Complex64>, policy: &NumericalPolicy) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter(format!(
                "unitary must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= policy.unitary_tol) {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n, n),
        }
    }

    /// Real rotation on the mode pair `(i, j)`: `z'_i = cos(theta) z_i - sin(theta) z_j`,
    /// `z'_j = sin(theta) z_i + cos(theta) z_j`. Mode `i` afterwards carries the
    /// field component passed by a polarizer at `theta`.
    pub fn polarizer_rotation(theta: f64, modes: (usize, usize), n: usize) -> Result<Self> {
        let (i, j) = modes;
        if i == j {
            return Err(Error::InvalidParameter("rotation needs two distinct modes".into()));
        }
        for m in [i, j] {
            if m >= n {
                return Err(Error::ModeOutOfRange { mode: m, modes: n });
            }
        }
        let (s, c) = theta.sin_cos();
        let mut m = DMatrix::identity(n, n);
        m[(i, i)] = Complex64::new(c, 0.0);
        m[(i, j)] = Complex64::new(-s, 0.0);
        m[(j, i)] = Complex64::new(s, 0.0);
        m[(j, j)] = Complex64::new(c, 0.0);
        Ok(Self { matrix: m })
    }

    /// Polarizer rotations of both beams of a four-mode field: `theta1` on
    /// modes (0, 1) and `theta2` on modes (2, 3).
    pub fn polarizer_pair(theta1: f64, theta2: f64) -> Self {
        let a = Self::polarizer_rotation(theta1, (0, 1), 4).expect("valid modes");
        let b = Self::polarizer_rotation(theta2, (2, 3), 4).expect("valid modes");
        a.compose(&b).expect("same size")
    }

    /// `exp(i h)` for a hermitian mode-coupling matrix `h`; this is the mode
    /// matrix of the Fock-space unitary `exp(i sum_jk h_jk a_j^dagger a_k)`.
    pub fn from_generator(h: &DMatrix<Complex64>) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::InvalidParameter("generator must be square".into()));
        }
        let herm = (h - h.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::InvalidParameter(format!("generator not hermitian ({herm:.3e})")));
        }
        let eig = h.clone().symmetric_eigen();
        let phases = DMatrix::from_diagonal(
            &eig.eigenvalues.map(|lambda| Complex64::new(0.0, lambda).exp()),
        );
        let m = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
        Self::new(m)
    }

    /// The real orthogonal four-mode mixer `X / 2` with
    /// `X = [[Y, Y], [-Y, Y]]`, `Y = [[1, 1], [-1, 1]]`.
    pub fn entangling_four_mode() -> Self {
        let x: [[f64; 4]; 4] = [
            [1.0, 1.0, 1.0, 1.0],
            [-1.0, 1.0, -1.0, 1.0],
            [-1.0, -1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0, 1.0],
        ];
        Self {
            matrix: DMatrix::from_fn(4, 4, |i, j| Complex64::new(0.5 * x[i][j], 0.0)),
        }
    }

    /// Haar-random element of U(n) (QR of a complex Ginibre matrix with the
    /// phases of `R` divided out).
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = DMatrix::from_fn(n, n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let qr = g.qr();
        let (mut q, r) = qr.unpack();
        for k in 0..n {
            let d = r[(k, k)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
            let mut col = q.column_mut(k);
            col *= phase;
        }
        Self { matrix: q }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `U z` for a coherent amplitude vector.
    pub fn apply_to_amplitudes(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: z.len(),
            });
        }
        Ok((0..self.dim())
            .map(|i| (0..self.dim()).map(|k| self.matrix[(i, k)] * z[k]).sum())
            .collect())
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Building block of a decomposed passive unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    /// Mode matrix on `(i, j)`: `[[e^{i phi} cos t, -sin t], [e^{i phi} sin t, cos t]]`.
    Mixer {
        modes: (usize, usize),
        theta: f64,
        phi: f64,
    },
    /// `a_mode^dagger -> e^{i phi} a_mode^dagger`.
    Phase { mode: usize, phi: f64 },
}

impl OpticalElement {
    /// The 2x2 (or 1x1) block and the modes it touches.
    fn block(&self) -> ([[Complex64; 2]; 2], (usize, usize)) {
        match *self {
            OpticalElement::Mixer { modes, theta, phi } => {
                let (s, c) = theta.sin_cos();
                let e = Complex64::from_polar(1.0, phi);
                ([[e * c, Complex64::new(-s, 0.0)], [e * s, Complex64::new(c, 0.0)]], modes)
            }
            OpticalElement::Phase { mode, phi } => {
                ([[Complex64::from_polar(1.0, phi), ZERO], [ZERO, ONE]], (mode, mode))
            }
        }
    }

    fn embed(&self, n: usize) -> DMatrix<Complex64> {
        let (b, (i, j)) = self.block();
        let mut m = DMatrix::identity(n, n);
        m[(i, i)] = b[0][0];
        if i != j {
            m[(i, j)] = b[0][1];
            m[(j, i)] = b[1][0];
            m[(j, j)] = b[1][1];
        }
        m
    }
}

/// `U` as an ordered list of elements; the first element acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub modes: usize,
    pub elements: Vec<OpticalElement>,
}

impl Decomposition {
    pub fn recompose(&self) -> DMatrix<Complex64> {
        self.elements
            .iter()
            .fold(DMatrix::identity(self.modes, self.modes), |acc, e| e.embed(self.modes) * acc)
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi % (2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    } else if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

const NEGLIGIBLE: f64 = 1e-15;

/// Triangular decomposition into nearest-neighbour mixers and trailing phases.
///
/// Mixers `G_1..G_k` are chosen so that `G_k ... G_1 U^dagger = D` is
/// diagonal, hence `U = D^dagger G_k ... G_1`.
pub fn decompose_passive(u: &PassiveUnitary) -> Decomposition {
    let n = u.dim();
    let mut w = u.matrix.adjoint();
    let mut elements = Vec::new();
    for col in 0..n {
        for row in (col + 1..n).rev() {
            let xa = w[(row - 1, col)];
            let xb = w[(row, col)];
            if xb.norm() <= NEGLIGIBLE {
                continue;
            }
            let theta = xb.norm().atan2(xa.norm());
            let phi = if xa.norm() <= NEGLIGIBLE {
                0.0
            } else {
                wrap_phase(PI + xb.arg() - xa.arg())
            };
            let mixer = OpticalElement::Mixer {
                modes: (row - 1, row),
                theta,
                phi,
            };
            let (b, _) = mixer.block();
            for k in 0..n {
                let (top, bottom) = (w[(row - 1, k)], w[(row, k)]);
                w[(row - 1, k)] = b[0][0] * top + b[0][1] * bottom;
                w[(row, k)] = b[1][0] * top + b[1][1] * bottom;
            }
            w[(row, col)] = ZERO;
            elements.push(mixer);
        }
    }
    for mode in 0..n {
        let phi = wrap_phase(-w[(mode, mode)].arg());
        if phi.abs() > NEGLIGIBLE {
            elements.push(OpticalElement::Phase { mode, phi });
        }
    }
    Decomposition { modes: n, elements }
}

/// Per-shell transfer matrices of a two-mode block, `shells[N][out][in]`
/// where `in`/`out` is the photon number in the first mode of the pair.
fn mixer_shells(b: &[[Complex64; 2]; 2], cutoff: usize) -> Vec<Vec<Vec<Complex64>>> {
    let binom = |n: usize, k: usize| -> f64 {
        (crate::fock::ln_factorial(n) - crate::fock::ln_factorial(k) - crate::fock::ln_factorial(n - k))
            .exp()
            .round()
    };
    let pow = |z: Complex64, k: usize| -> Complex64 { (0..k).fold(ONE, |acc, _| acc * z) };
    let ln_fact = crate::fock::ln_factorial;
    (0..=cutoff)
        .map(|total| {
            let mut m = vec![vec![ZERO; total + 1]; total + 1];
            for a in 0..=total {
                let rest = total - a;
                // (b00 x + b10 y)^a (b01 x + b11 y)^rest, collecting x^out
                for k in 0..=a {
                    let left = pow(b[0][0], k) * pow(b[1][0], a - k) * binom(a, k);
                    for l in 0..=rest {
                        let right = pow(b[0][1], l) * pow(b[1][1], rest - l) * binom(rest, l);
                        let out = k + l;
                        let norm = (0.5
                            * (ln_fact(out) + ln_fact(total - out) - ln_fact(a) - ln_fact(rest)))
                            .exp();
                        m[out][a] += left * right * norm;
                    }
                }
            }
            m
        })
        .collect()
}

fn apply_element(
    basis: &FockBasis,
    amps: &[Complex64],
    element: &OpticalElement,
    shells: &[Vec<Vec<Complex64>>],
) -> Vec<Complex64> {
    match *element {
        OpticalElement::Phase { mode, phi } => amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, phi * basis.occupation(k)[mode] as f64))
            .collect(),
        OpticalElement::Mixer { modes: (i, j), .. } => {
            let mut out = vec![ZERO; amps.len()];
            let mut scratch = vec![0u16; basis.modes()];
            for (k, a) in amps.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                scratch.copy_from_slice(basis.occupation(k));
                let (ni, nj) = (scratch[i] as usize, scratch[j] as usize);
                let total = ni + nj;
                let column = &shells[total];
                for (o, row) in column.iter().enumerate() {
                    let coeff = row[ni];
                    if coeff == ZERO {
                        continue;
                    }
                    scratch[i] = o as u16;
                    scratch[j] = (total - o) as u16;
                    let target = basis.index_of(&scratch).expect("shell preserved");
                    out[target] += coeff * a;
                }
            }
            out
        }
    }
}

/// Compiled Fock-space action of a passive unitary on a fixed basis.
struct FockAction<'a> {
    basis: &'a FockBasis,
    steps: Vec<(OpticalElement, Vec<Vec<Vec<Complex64>>>)>,
}

impl<'a> FockAction<'a> {
    fn new(basis: &'a FockBasis, u: &PassiveUnitary) -> Result<Self> {
        if u.dim() != basis.modes() {
            return Err(Error::DimensionMismatch {
                expected: basis.modes(),
                actual: u.dim(),
            });
        }
        let steps = decompose_passive(u)
            .elements
            .into_iter()
            .map(|e| {
                let shells = match e {
                    OpticalElement::Mixer { .. } => mixer_shells(&e.block().0, basis.cutoff()),
                    OpticalElement::Phase { .. } => Vec::new(),
                };
                (e, shells)
            })
            .collect();
        Ok(Self { basis, steps })
    }

    fn apply(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut current = amps.to_vec();
        for (e, shells) in &self.steps {
            current = apply_element(self.basis, &current, e, shells);
        }
        current
    }
}

/// Validates `u` against the default policy and applies it to a pure state.
pub fn apply_passive(state: &OccupationState, u: &PassiveUnitary) -> Result<OccupationState> {
    PassiveUnitary::new(u.matrix.clone())?;
    let action = FockAction::new(state.basis(), u)?;
    if action.steps.is_empty() {
        return Ok(state.clone());
    }
    let amps = action.apply(state.amplitudes());
    Ok(OccupationState::from_amplitudes(state.basis().clone(), amps)?.with_tail(state.tail_weight()))
}

/// `U rho U^dagger`.
pub fn apply_passive_density(rho: &DensityOperator, u: &PassiveUnitary) -> Result<DensityOperator> {
    PassiveUnitary::new(u.matrix.clone())?;
    let action = FockAction::new(rho.basis(), u)?;
    if action.steps.is_empty() {
        return Ok(rho.clone());
    }
    let d = rho.basis().dimension();
    let apply_columns = |m: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        let cols: Vec<Vec<Complex64>> = (0..d)
            .into_par_iter()
            .map(|c| action.apply(m.column(c).as_slice()))
            .collect();
        DMatrix::from_fn(d, d, |r, c| cols[c][r])
    };
    // U rho, then U (U rho)^dagger = (U rho U^dagger)^dagger
    let left = apply_columns(rho.matrix());
    let both = apply_columns(&left.adjoint()).adjoint();
    Ok(DensityOperator::from_parts(rho.basis().clone(), both, rho.tail_weight()))
}

/// Squeezing parameters for single-mode squeezing of vacuum.
///
/// Positive `u` squeezes the `q` quadrature: `q -> e^{-u} q`, `p -> e^{u} p`,
/// giving `Var(q) = e^{-2u}/2`. The Fock amplitudes are
/// `c_{2m} = (-tanh u)^m sqrt((2m)!) / (2^m m!) / sqrt(cosh u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeSpec {
    pub parameters: Vec<f64>,
}

impl SqueezeSpec {
    pub const MAX_ABS: f64 = 5.0;

    pub fn new(parameters: Vec<f64>) -> Result<Self> {
        if let Some(u) = parameters.iter().find(|u| !u.is_finite() || u.abs() > Self::MAX_ABS) {
            return Err(Error::InvalidParameter(format!(
                "squeeze parameter {u} outside [-{0}, {0}]",
                Self::MAX_ABS
            )));
        }
        Ok(Self { parameters })
    }

    /// Product of squeezed vacua, one parameter per mode.
    pub fn squeezed_vacuum(&self, cutoff: usize) -> Result<OccupationState> {
        let basis = FockBasis::shared(self.parameters.len(), cutoff)?;
        let mut state = OccupationState::vacuum(basis);
        for (mode, &u) in self.parameters.iter().enumerate() {
            if u != 0.0 {
                state = apply_single_mode_squeeze(&state, mode, u)?;
            }
        }
        Ok(state)
    }
}

/// Squeezed-vacuum amplitude on `2m` photons.
pub fn squeezed_vacuum_amplitude(u: f64, m: usize) -> f64 {
    let t = -u.tanh();
    // sqrt((2m)!) / (2^m m!)
    let ln_ratio = 0.5 * crate::fock::ln_factorial(2 * m)
        - m as f64 * std::f64::consts::LN_2
        - crate::fock::ln_factorial(m);
    t.powi(m as i32) * ln_ratio.exp() / u.cosh().sqrt()
}

/// Squeezes `mode`, which must be in vacuum in every component of `state`.
pub fn apply_single_mode_squeeze(state: &OccupationState, mode: usize, u: f64) -> Result<OccupationState> {
    apply_single_mode_squeeze_with_policy(state, mode, u, &NumericalPolicy::default())
}

pub fn apply_single_mode_squeeze_with_policy(
    state: &OccupationState,
    mode: usize,
    u: f64,
    policy: &NumericalPolicy,
) -> Result<OccupationState> {
    SqueezeSpec::new(vec![u])?;
    let basis = state.basis();
    basis.check_mode(mode)?;
    if u == 0.0 {
        return Ok(state.clone());
    }
    let cutoff = basis.cutoff();
    let coeffs: Vec<f64> = (0..=cutoff / 2).map(|m| squeezed_vacuum_amplitude(u, m)).collect();

    let mut out = vec![ZERO; basis.dimension()];
    let mut scratch = vec![0u16; basis.modes()];
    let mut input_weight = 0.0;
    for (k, a) in state.amplitudes().iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        let occ = basis.occupation(k);
        if occ[mode] != 0 {
            return Err(Error::ModeNotVacuum);
        }
        input_weight += a.norm_sqr();
        let room = cutoff - basis.total(k);
        scratch.copy_from_slice(occ);
        for (m, c) in coeffs.iter().enumerate().take(room / 2 + 1) {
            scratch[mode] = (2 * m) as u16;
            out[basis.index_of(&scratch).expect("within cutoff")] += a * *c;
        }
    }
    let kept: f64 = out.iter().map(|a| a.norm_sqr()).sum();
    let dropped = (input_weight - kept).max(0.0);
    let tail = state.tail_weight() + dropped;
    if tail > policy.max_tail {
        return Err(Error::TruncationTail {
            tail,
            allowed: policy.max_tail,
            suggested_cutoff: squeeze_cutoff_hint(u, policy.max_tail),
        });
    }
    Ok(OccupationState::from_amplitudes(basis.clone(), out)?.with_tail(tail))
}

fn squeeze_cutoff_hint(u: f64, max_tail: f64) -> usize {
    let mut kept = 0.0;
    let mut m = 0;
    loop {
        kept += squeezed_vacuum_amplitude(u, m).powi(2);
        if 1.0 - kept <= max_tail || m > 10_000 {
            return 2 * m + 1;
        }
        m += 1;
    }
}
