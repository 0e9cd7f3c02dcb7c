use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::FockBasis;
use super::state::OccupationState;
use crate::error::{Error, Result};
use crate::policy::NumericalPolicy;

/// Mixed state on a truncated Fock space, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<Complex64>,
    tail: f64,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(basis: Arc<FockBasis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::with_policy(basis, matrix, &NumericalPolicy::default())
    }

    pub fn with_policy(
        basis: Arc<FockBasis>,
        matrix: DMatrix<Complex64>,
        policy: &NumericalPolicy,
    ) -> Result<Self> {
        let d = basis.dimension();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: matrix.nrows(),
            });
        }
        let asym = hermitian_deviation(&matrix);
        if asym > policy.hermitian_tol {
            return Err(Error::InvalidState(format!("density matrix not hermitian ({asym:.3e})")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > policy.hermitian_tol || trace.im.abs() > policy.hermitian_tol {
            return Err(Error::InvalidState(format!("density matrix trace {trace} != 1")));
        }
        let rho = Self {
            basis,
            matrix,
            tail: 0.0,
        };
        let min_eig = rho.min_eigenvalue();
        if min_eig < -policy.psd_tol {
            return Err(Error::InvalidState(format!(
                "density matrix not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts(basis: Arc<FockBasis>, matrix: DMatrix<Complex64>, tail: f64) -> Self {
        Self {
            basis,
            matrix,
            tail,
        }
    }

    /// `|psi><psi|`. The state is expected to be normalized.
    pub fn from_pure(psi: &OccupationState) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Self {
            basis: psi.basis().clone(),
            matrix: &v * v.adjoint(),
            tail: psi.tail_weight(),
        }
    }

    /// Convex combination of pure states with the given weights.
    pub fn from_ensemble(components: &[(f64, OccupationState)]) -> Result<Self> {
        let (_, first) = components.first().ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
        let basis = first.basis().clone();
        let d = basis.dimension();
        let mut matrix = DMatrix::zeros(d, d);
        let mut tail = 0.0;
        for (w, psi) in components {
            first.check_same_space(psi)?;
            let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
            matrix += (&v * v.adjoint()) * Complex64::new(*w, 0.0);
            tail += w * psi.tail_weight();
        }
        Ok(Self { basis, matrix, tail })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn tail_weight(&self) -> f64 {
        self.tail
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    /// Element `<occ_row| rho |occ_col>`; zero outside the truncated space.
    pub fn element(&self, row: &[u16], col: &[u16]) -> Complex64 {
        match (self.basis.index_of(row), self.basis.index_of(col)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Reduced state on `keep` (in the given order); the other modes are
    /// traced out.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        for (k, &m) in keep.iter().enumerate() {
            self.basis.check_mode(m)?;
            if keep[..k].contains(&m) {
                return Err(Error::InvalidParameter(format!("mode {m} listed twice")));
            }
        }
        let modes = self.modes();
        if keep.len() == modes && keep.iter().enumerate().all(|(k, &m)| k == m) {
            return Ok(self.clone());
        }
        let env: Vec<usize> = (0..modes).filter(|m| !keep.contains(m)).collect();
        let reduced = Arc::new(FockBasis::new(keep.len(), self.basis.cutoff())?);

        // group full indices by environment occupation
        let mut groups: HashMap<Vec<u16>, Vec<(usize, usize)>> = HashMap::new();
        let mut kept_occ = vec![0u16; keep.len()];
        for (i, occ) in self.basis.iter().enumerate() {
            for (slot, &m) in keep.iter().enumerate() {
                kept_occ[slot] = occ[m];
            }
            let r = reduced.index_of(&kept_occ).expect("kept part below cutoff");
            let e: Vec<u16> = env.iter().map(|&m| occ[m]).collect();
            groups.entry(e).or_default().push((i, r));
        }

        let d = reduced.dimension();
        let mut out = DMatrix::zeros(d, d);
        for members in groups.values() {
            for &(i, ri) in members {
                for &(j, rj) in members {
                    out[(ri, rj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Self {
            basis: reduced,
            matrix: out,
            tail: self.tail,
        })
    }

    /// Probability that every mode in `modes` is empty (diagonal sum only).
    pub fn vacuum_probability(&self, modes: &[usize]) -> Result<f64> {
        if modes.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        for &m in modes {
            self.basis.check_mode(m)?;
        }
        Ok(self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, occ)| modes.iter().all(|&m| occ[m] == 0))
            .map(|(i, _)| self.matrix[(i, i)].re)
            .sum())
    }
}

fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `Tr(rho op)` for a hermitian `op` in the same basis.
pub fn expectation(rho: &DensityOperator, op: &DMatrix<Complex64>) -> Result<f64> {
    let d = rho.basis.dimension();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: op.nrows(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho.matrix[(i, j)] * op[(j, i)];
        }
    }
    if acc.im.abs() > 1e-10 * acc.re.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "expectation has imaginary part {:.3e}; operator not hermitian",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Diagonal matrix of `a^dagger_mode a_mode`.
pub fn number_operator(basis: &FockBasis, mode: usize) -> Result<DMatrix<Complex64>> {
    basis.check_mode(mode)?;
    let d = basis.dimension();
    let mut m = DMatrix::zeros(d, d);
    for (i, occ) in basis.iter().enumerate() {
        m[(i, i)] = Complex64::new(occ[mode] as f64, 0.0);
    }
    Ok(m)
}
