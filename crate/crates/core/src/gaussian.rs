//! Centered Gaussian states described by the quadratic form `G` of the
//! Wigner function `W(xi) ~ exp(-xi^T G xi)`.
//!
//! Quadratures are `q = (a^dagger + a)/sqrt 2`, `p = i(a^dagger - a)/sqrt 2`,
//! ordered as `(q1..qn, p1..pn)`. The variance matrix is `V = G^{-1}/2`, so
//! vacuum has `G = I` and `V = I/2`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::detection::{ch_functional_with_policy, AngleSettings, CoincidenceRates, CoincidenceReport, DetectorVacua, RateSource};
use crate::error::{Error, Result};
use crate::fock::OccupationState;
use crate::linear_optics::{apply_passive, PassiveUnitary, SqueezeSpec};
use crate::policy::NumericalPolicy;

/// The symplectic form `[[0, I], [-I, 0]]`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -1.0
        } else {
            0.0
        }
    })
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

/// Real `2n x 2n` matrix preserving the symplectic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    matrix: DMatrix<f64>,
}

impl SymplecticMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::with_policy(matrix, &NumericalPolicy::default())
    }

    pub fn with_policy(matrix: DMatrix<f64>, policy: &NumericalPolicy) -> Result<Self> {
        if !matrix.is_square() || !matrix.nrows().is_multiple_of(2) || matrix.nrows() == 0 {
            return Err(Error::InvalidGaussian(format!(
                "symplectic matrix must be 2n x 2n, got {} x {}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let beta = symplectic_form(matrix.nrows() / 2);
        let deviation = max_abs(&(&matrix * &beta * matrix.transpose() - &beta));
        if !(deviation <= policy.symplectic_tol) {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Diagonal single-mode squeezers: `q_j -> e^{-r_j} q_j`, `p_j -> e^{r_j} p_j`.
    pub fn squeezer(r: &[f64]) -> Self {
        let n = r.len();
        Self {
            matrix: DMatrix::from_fn(2 * n, 2 * n, |i, j| {
                if i != j {
                    0.0
                } else if i < n {
                    (-r[i]).exp()
                } else {
                    r[i - n].exp()
                }
            }),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn mode_count(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `M^{-1} = beta M^T beta^{-1}`.
    pub fn inverse(&self) -> Self {
        let beta = symplectic_form(self.mode_count());
        Self {
            matrix: -(&beta * self.matrix.transpose() * &beta),
        }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.mode_count() != other.mode_count() {
            return Err(Error::DimensionMismatch {
                expected: self.mode_count(),
                actual: other.mode_count(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }
}

/// `[[Re U, -Im U], [Im U, Re U]]`, the quadrature action of a passive unitary.
pub fn embed_passive(u: &PassiveUnitary) -> SymplecticMatrix {
    let n = u.dim();
    let m = u.matrix();
    SymplecticMatrix {
        matrix: DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = m[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        }),
    }
}

/// Centered Gaussian state on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    g: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        Self::with_policy(g, &NumericalPolicy::default())
    }

    pub fn with_policy(g: DMatrix<f64>, policy: &NumericalPolicy) -> Result<Self> {
        if !g.is_square() || !g.nrows().is_multiple_of(2) || g.nrows() == 0 {
            return Err(Error::InvalidGaussian(format!("G must be 2n x 2n, got {} x {}", g.nrows(), g.ncols())));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGaussian("G has non-finite entries".into()));
        }
        let asym = max_abs(&(&g - g.transpose()));
        if asym > policy.hermitian_tol * max_abs(&g).max(1.0) {
            return Err(Error::InvalidGaussian(format!("G is not symmetric (deviation {asym:e})")));
        }
        let g = symmetrize(&g);
        let inv = g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidGaussian("G is not positive definite".into()))?
            .inverse();
        let state = Self {
            v: symmetrize(&(inv * 0.5)),
            g,
        };
        let m = state.uncertainty_min_eigenvalue();
        if m < -policy.psd_tol {
            return Err(Error::InvalidGaussian(format!(
                "uncertainty relation violated: min eigenvalue of G^-1 + i beta is {m:e}"
            )));
        }
        Ok(state)
    }

    /// State with variance matrix `v`.
    pub fn from_variance(v: DMatrix<f64>) -> Result<Self> {
        let inv = v
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidGaussian("variance matrix is not positive definite".into()))?
            .inverse();
        Self::new(inv * 0.5)
    }

    pub fn vacuum(n: usize) -> Self {
        Self::thermal(n, 1.0).expect("vacuum is valid")
    }

    /// `G = kappa I`.
    pub fn thermal(n: usize, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa} outside (0, 1]")));
        }
        Self::new(DMatrix::identity(2 * n, 2 * n) * kappa)
    }

    /// Product of squeezed vacua; positive `r_j` squeezes `q_j`.
    pub fn squeezed_vacuum(r: &[f64]) -> Result<Self> {
        Self::vacuum(r.len()).apply_symplectic(&SymplecticMatrix::squeezer(r))
    }

    pub fn mode_count(&self) -> usize {
        self.g.nrows() / 2
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn variance_matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Smallest eigenvalue of the hermitian matrix `G^{-1} + i beta`.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let beta = symplectic_form(self.mode_count());
        let h = DMatrix::from_fn(self.g.nrows(), self.g.ncols(), |i, j| {
            Complex64::new(2.0 * self.v[(i, j)], beta[(i, j)])
        });
        h.symmetric_eigenvalues().min()
    }

    pub fn min_variance_eigenvalue(&self) -> f64 {
        min_symmetric_eigenvalue(&self.v)
    }

    /// Whether some quadrature variance lies below the vacuum value 1/2,
    /// together with the smallest eigenvalue of `V`.
    pub fn is_squeezed(&self) -> (bool, f64) {
        let m = self.min_variance_eigenvalue();
        (m < 0.5 - 1e-12, m)
    }

    /// `V -> M V M^T`, equivalently `G -> M^{-T} G M^{-1}`.
    pub fn apply_symplectic(&self, m: &SymplecticMatrix) -> Result<Self> {
        if m.mode_count() != self.mode_count() {
            return Err(Error::DimensionMismatch {
                expected: self.mode_count(),
                actual: m.mode_count(),
            });
        }
        let inv = m.inverse();
        let g = symmetrize(&(inv.matrix.transpose() * &self.g * &inv.matrix));
        let v = symmetrize(&(&m.matrix * &self.v * m.matrix.transpose()));
        Ok(Self { g, v })
    }

    pub fn apply_passive(&self, u: &PassiveUnitary) -> Result<Self> {
        self.apply_symplectic(&embed_passive(u))
    }

    fn reduced_variance(&self, modes: &[usize]) -> Result<DMatrix<f64>> {
        let n = self.mode_count();
        if modes.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        if let Some(&mode) = modes.iter().find(|&&m| m >= n) {
            return Err(Error::ModeOutOfRange { mode, modes: n });
        }
        let rows: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|m| m + n)).collect();
        Ok(DMatrix::from_fn(rows.len(), rows.len(), |i, j| self.v[(rows[i], rows[j])]))
    }

    /// Probability that every mode in `modes` is empty: `1/sqrt(det(V_s + I/2))`.
    pub fn vacuum_probability(&self, modes: &[usize]) -> Result<f64> {
        let vs = self.reduced_variance(modes)?;
        let k = vs.nrows();
        let det = (vs + DMatrix::identity(k, k) * 0.5).determinant();
        if !(det > 0.0) {
            return Err(Error::InvalidGaussian(format!("non-positive determinant {det:e}")));
        }
        Ok(1.0 / det.sqrt())
    }

    /// The same probability written with `G' = (2 V_s)^{-1}`:
    /// `2^k sqrt(det G' / det(G' + I))`, `k` the number of modes.
    pub fn vacuum_probability_from_g(&self, modes: &[usize]) -> Result<f64> {
        let vs = self.reduced_variance(modes)?;
        let dim = vs.nrows();
        let gs = (vs * 2.0)
            .try_inverse()
            .ok_or_else(|| Error::InvalidGaussian("singular reduced variance".into()))?;
        let num = gs.determinant();
        let den = (&gs + DMatrix::identity(dim, dim)).determinant();
        if !(num > 0.0 && den > 0.0) {
            return Err(Error::InvalidGaussian("non-positive determinant".into()));
        }
        Ok(2f64.powi(modes.len() as i32) * (num / den).sqrt())
    }
}

impl RateSource for GaussianState {
    fn mode_count(&self) -> usize {
        self.mode_count()
    }

    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        if self.mode_count() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: self.mode_count(),
            });
        }
        let r = self.apply_passive(&PassiveUnitary::polarizer_pair(theta1, theta2))?;
        let q = |m: &[usize]| r.vacuum_probability(m);
        let vacua = DetectorVacua {
            d1: q(&[0])?,
            b1: q(&[0, 1])?,
            d2: q(&[2])?,
            b2: q(&[2, 3])?,
            d1_d2: q(&[0, 2])?,
            d1_b2: q(&[0, 2, 3])?,
            b1_d2: q(&[0, 1, 2])?,
            b1_b2: q(&[0, 1, 2, 3])?,
        };
        Ok(vacua.rates())
    }
}

/// Clauser-Horne report for a four-mode Gaussian state.
pub fn gaussian_ch(g: &GaussianState, angles: &AngleSettings, policy: &NumericalPolicy) -> Result<CoincidenceReport> {
    ch_functional_with_policy(g, angles, policy)
}

/// Squeezed thermal state `G = U^{-1} S^T (kappa I) S U` with
/// `S = diag(e^{-u}, e^{v}, e^{-v}, e^{u}, e^{u}, e^{-v}, e^{v}, e^{-u})` and
/// `U` the embedding of the real four-mode mixer `X/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezedThermalSpec {
    pub u: f64,
    pub v: f64,
    pub kappa: f64,
}

impl SqueezedThermalSpec {
    pub fn new(u: f64, v: f64, kappa: f64) -> Result<Self> {
        let spec = Self { u, v, kappa };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.u.is_finite() || !self.v.is_finite() {
            return Err(Error::InvalidParameter("squeeze parameters must be finite".into()));
        }
        if self.u.abs() > SqueezeSpec::MAX_ABS || self.v.abs() > SqueezeSpec::MAX_ABS {
            return Err(Error::InvalidParameter(format!(
                "squeeze parameters must lie in [-{0}, {0}]",
                SqueezeSpec::MAX_ABS
            )));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa = {} outside (0, 1]", self.kappa)));
        }
        Ok(())
    }

    fn s_diagonal(&self) -> [f64; 8] {
        let (u, v) = (self.u, self.v);
        [(-u).exp(), v.exp(), (-v).exp(), u.exp(), u.exp(), (-v).exp(), v.exp(), (-u).exp()]
    }

    /// Per-mode squeeze parameters of the unmixed state (positive squeezes `q`).
    pub fn mode_squeezing(&self) -> [f64; 4] {
        [-self.u, self.v, -self.v, self.u]
    }
}

pub fn build_squeezed_thermal(spec: &SqueezedThermalSpec) -> Result<GaussianState> {
    spec.validate()?;
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&spec.s_diagonal()));
    let u = embed_passive(&PassiveUnitary::entangling_four_mode());
    let u_inv = u.inverse();
    let g = u_inv.matrix() * s.transpose() * (&s * spec.kappa) * u.matrix();
    GaussianState::new(g)
}

/// Fock-space pure state with the same Wigner function (requires `kappa = 1`):
/// squeezed vacua with [`SqueezedThermalSpec::mode_squeezing`], then the
/// passive unitary `(X/2)^T`.
pub fn squeezed_vacuum_fock(spec: &SqueezedThermalSpec, cutoff: usize) -> Result<OccupationState> {
    spec.validate()?;
    if spec.kappa != 1.0 {
        return Err(Error::InvalidParameter(
            "the Fock engine represents only pure squeezed states (kappa = 1)".into(),
        ));
    }
    let squeezed = SqueezeSpec::new(spec.mode_squeezing().to_vec())?.squeezed_vacuum(cutoff)?;
    let x = PassiveUnitary::entangling_four_mode();
    let xt = PassiveUnitary::new(x.matrix().transpose())?;
    apply_passive(&squeezed, &xt)
}
