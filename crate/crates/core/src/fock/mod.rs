//! Truncated multimode Fock space: basis, pure and mixed states.

mod basis;
mod density;
mod ensemble;
mod state;

pub use basis::{basis_dimension, enumerate_basis, FockBasis};
pub use density::{expectation, number_operator, DensityOperator};
pub use ensemble::StateEnsemble;
pub use state::{poisson_tail, synthesize_coherent, synthesize_coherent_with_policy, OccupationState};

pub(crate) use state::ln_factorial;

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::Result;

/// `(a1^dagger - a3^dagger)(a4^dagger - a2^dagger)|0> / 2` on four modes.
pub fn two_photon_state(cutoff: usize) -> Result<OccupationState> {
    let basis = Arc::new(FockBasis::new(4, cutoff.max(2))?);
    let vac = OccupationState::vacuum(basis);
    let right = combine(&vac.apply_creation(3)?, &vac.apply_creation(1)?, -1.0);
    let left = combine(&right.apply_creation(0)?, &right.apply_creation(2)?, -1.0);
    let amplitudes = left.amplitudes().iter().map(|a| a * 0.5).collect();
    OccupationState::from_amplitudes(left.basis().clone(), amplitudes)
}

fn combine(a: &OccupationState, b: &OccupationState, sign: f64) -> OccupationState {
    let amplitudes: Vec<Complex64> = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x + y * sign)
        .collect();
    OccupationState::from_amplitudes(a.basis().clone(), amplitudes).expect("same basis")
}
