//! Numerical tolerances shared by every engine.

use serde::{Deserialize, Serialize};

/// All tolerances and size limits in one place. The defaults are the
/// values the test suites are pinned against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericalPolicy {
    /// Allowed deviation of a pure state's norm from one.
    pub norm_tol: f64,
    /// Max elementwise deviation from hermiticity and trace one.
    pub hermitian_tol: f64,
    /// Most negative eigenvalue still accepted as positive semidefinite.
    pub psd_tol: f64,
    /// Max elementwise deviation of `U^dagger U` from the identity.
    pub unitary_tol: f64,
    /// Max elementwise deviation of `M beta M^T` from `beta`.
    pub symplectic_tol: f64,
    /// Base tolerance of the violation verdict; truncation tails are added on top.
    pub verdict_tol: f64,
    /// Largest truncation tail accepted when synthesizing coherent or squeezed states.
    pub max_tail: f64,
    /// Largest Fock-space dimension that may be allocated.
    pub max_dimension: usize,
}

impl Default for NumericalPolicy {
    fn default() -> Self {
        Self {
            norm_tol: 1e-10,
            hermitian_tol: 1e-10,
            psd_tol: 1e-9,
            unitary_tol: 1e-10,
            symplectic_tol: 1e-10,
            verdict_tol: 1e-9,
            max_tail: 1e-8,
            max_dimension: 2_000_000,
        }
    }
}
