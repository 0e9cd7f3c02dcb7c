use crate::error::{Error, Result};

use super::state::OccupationState;

/// Finite convex mixture of pure states on a common basis. Rates are linear
/// in the state, so mixtures are evaluated component by component instead of
/// building a dense density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    components: Vec<(f64, OccupationState)>,
}

impl StateEnsemble {
    pub fn new(components: Vec<(f64, OccupationState)>) -> Result<Self> {
        let (_, first) = components
            .first()
            .ok_or_else(|| Error::InvalidState("empty ensemble".into()))?;
        for (w, psi) in &components {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidState(format!("ensemble weight {w} is not positive")));
            }
            first.check_same_space(psi)?;
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, OccupationState)] {
        &self.components
    }

    pub fn modes(&self) -> usize {
        self.components[0].1.modes()
    }

    pub fn tail_weight(&self) -> f64 {
        self.components.iter().map(|(w, psi)| w * psi.tail_weight()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockBasis;

    #[test]
    fn validation() {
        let basis = FockBasis::shared(2, 2).unwrap();
        let vac = OccupationState::vacuum(basis.clone());
        let one = OccupationState::number_state(basis, &[1, 0]).unwrap();
        assert!(StateEnsemble::new(vec![(0.25, vac.clone()), (0.75, one.clone())]).is_ok());
        assert!(StateEnsemble::new(vec![(0.5, vac.clone()), (0.6, one.clone())]).is_err());
        assert!(StateEnsemble::new(vec![(1.5, vac.clone()), (-0.5, one)]).is_err());
        assert!(StateEnsemble::new(vec![]).is_err());
        let other = OccupationState::vacuum(FockBasis::shared(2, 3).unwrap());
        assert!(StateEnsemble::new(vec![(0.5, vac), (0.5, other)]).is_err());
    }
}
