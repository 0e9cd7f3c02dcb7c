use std::sync::Arc;

use num_complex::Complex64;

use super::basis::FockBasis;
use crate::error::{Error, Result};
use crate::policy::NumericalPolicy;

/// Pure state of a truncated multimode Fock space.
///
/// `tail` accumulates the squared weight discarded by truncating operations
/// (coherent synthesis, squeezing, creation at the cutoff shell).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationState {
    basis: Arc<FockBasis>,
    amplitudes: Vec<Complex64>,
    tail: f64,
}

impl OccupationState {
    pub fn vacuum(basis: Arc<FockBasis>) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            basis,
            amplitudes,
            tail: 0.0,
        }
    }

    pub fn from_amplitudes(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                expected: basis.dimension(),
                actual: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        Ok(Self {
            basis,
            amplitudes,
            tail: 0.0,
        })
    }

    /// Single basis state `|n_1, ..., n_m>`.
    pub fn number_state(basis: Arc<FockBasis>, occupation: &[u16]) -> Result<Self> {
        if occupation.len() != basis.modes() {
            return Err(Error::DimensionMismatch {
                expected: basis.modes(),
                actual: occupation.len(),
            });
        }
        let i = basis.index_of(occupation).ok_or_else(|| {
            Error::InvalidState(format!("{occupation:?} lies above the cutoff {}", basis.cutoff()))
        })?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self {
            basis,
            amplitudes,
            tail: 0.0,
        })
    }

    pub(crate) fn from_parts(basis: Arc<FockBasis>, amplitudes: Vec<Complex64>, tail: f64) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dimension());
        Self {
            basis,
            amplitudes,
            tail,
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[u16]) -> Complex64 {
        self.basis
            .index_of(occupation)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    /// Squared weight lost to truncation so far.
    pub fn tail_weight(&self) -> f64 {
        self.tail
    }

    pub fn with_tail(mut self, tail: f64) -> Self {
        self.tail = tail;
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm. The tail estimate is kept as is.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(self)
    }

    pub fn is_normalized(&self, policy: &NumericalPolicy) -> bool {
        (self.norm_sqr() - 1.0).abs() <= policy.norm_tol
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_space(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`, which ignores global phases.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub(crate) fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dimension(),
                actual: other.basis.dimension(),
            });
        }
        Ok(())
    }

    /// `a^dagger_mode |psi>` (unnormalized). Weight pushed above the cutoff is
    /// dropped and added to the tail.
    pub fn apply_creation(&self, mode: usize) -> Result<Self> {
        self.basis.check_mode(mode)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut dropped = 0.0;
        let mut scratch = vec![0u16; self.modes()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            if *amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            scratch.copy_from_slice(self.basis.occupation(i));
            let n = scratch[mode] as f64;
            let value = amp * (n + 1.0).sqrt();
            if self.basis.total(i) == self.basis.cutoff() {
                dropped += value.norm_sqr();
                continue;
            }
            scratch[mode] += 1;
            let j = self.basis.index_of(&scratch).expect("state below cutoff");
            out[j] += value;
        }
        Ok(Self::from_parts(self.basis.clone(), out, self.tail + dropped))
    }

    /// `a_mode |psi>` (unnormalized). Exact: lowering never leaves the space.
    pub fn apply_annihilation(&self, mode: usize) -> Result<Self> {
        self.basis.check_mode(mode)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        let mut scratch = vec![0u16; self.modes()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            scratch.copy_from_slice(self.basis.occupation(i));
            let n = scratch[mode];
            if n == 0 {
                continue;
            }
            scratch[mode] -= 1;
            let j = self.basis.index_of(&scratch).expect("lowered state in basis");
            out[j] += amp * (n as f64).sqrt();
        }
        Ok(Self::from_parts(self.basis.clone(), out, self.tail))
    }

    /// Probability that every mode in `modes` is empty.
    pub fn vacuum_probability(&self, modes: &[usize]) -> Result<f64> {
        if modes.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        for &m in modes {
            self.basis.check_mode(m)?;
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let occ = self.basis.occupation(*i);
                modes.iter().all(|&m| occ[m] == 0)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Probability of each total photon number `0..=cutoff`.
    pub fn shell_probabilities(&self) -> Vec<f64> {
        (0..=self.basis.cutoff())
            .map(|n| {
                self.amplitudes[self.basis.shell(n)]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// `<n_mode>`.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        self.basis.check_mode(mode)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * self.basis.occupation(i)[mode] as f64)
            .sum())
    }
}

/// `P(N > cutoff)` for a Poisson distribution with mean `mean`, summed from
/// the tail side so that tiny tails keep their relative accuracy.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    // log of the first omitted term, k = cutoff + 1
    let k0 = cutoff as f64 + 1.0;
    let mut log_term = -mean + k0 * mean.ln() - ln_factorial(cutoff + 1);
    let mut tail = 0.0;
    let mut k = k0;
    loop {
        let term = log_term.exp();
        tail += term;
        if term < 1e-300 || (k > mean && term < tail * 1e-17) {
            break;
        }
        k += 1.0;
        log_term += mean.ln() - k.ln();
    }
    tail.min(1.0)
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Multimode coherent state `|z>` truncated at `cutoff`.
pub fn synthesize_coherent(z: &[Complex64], cutoff: usize) -> Result<OccupationState> {
    synthesize_coherent_with_policy(z, cutoff, &NumericalPolicy::default())
}

pub fn synthesize_coherent_with_policy(
    z: &[Complex64],
    cutoff: usize,
    policy: &NumericalPolicy,
) -> Result<OccupationState> {
    if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite coherent amplitude".into()));
    }
    let mean: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let tail = poisson_tail(mean, cutoff);
    if tail > policy.max_tail {
        let mut suggested = cutoff + 1;
        while poisson_tail(mean, suggested) > policy.max_tail {
            suggested += 1;
        }
        return Err(Error::TruncationTail {
            tail,
            allowed: policy.max_tail,
            suggested_cutoff: suggested,
        });
    }
    let basis = Arc::new(FockBasis::with_policy(z.len(), cutoff, policy)?);

    // powers[j][n] = z_j^n / sqrt(n!)
    let powers: Vec<Vec<Complex64>> = z
        .iter()
        .map(|&zj| {
            let mut p = Vec::with_capacity(cutoff + 1);
            p.push(Complex64::new(1.0, 0.0));
            for n in 1..=cutoff {
                let prev = p[n - 1];
                p.push(prev * zj / (n as f64).sqrt());
            }
            p
        })
        .collect();
    let prefactor = (-mean / 2.0).exp();
    let amplitudes = basis
        .iter()
        .map(|occ| {
            occ.iter()
                .zip(&powers)
                .fold(Complex64::new(prefactor, 0.0), |acc, (&n, p)| acc * p[n as usize])
        })
        .collect();
    Ok(OccupationState::from_parts(basis, amplitudes, tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn creation_ladder() {
        let basis = FockBasis::shared(4, 3).unwrap();
        let vac = OccupationState::vacuum(basis.clone());
        let one = vac.apply_creation(0).unwrap();
        assert_eq!(one.amplitude(&[1, 0, 0, 0]), c(1.0, 0.0));
        let two = one.apply_creation(0).unwrap();
        assert!((two.amplitude(&[2, 0, 0, 0]) - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((two.norm_sqr() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn creation_at_cutoff_goes_to_tail() {
        let basis = FockBasis::shared(2, 1).unwrap();
        let one = OccupationState::number_state(basis, &[1, 0]).unwrap();
        let out = one.apply_creation(1).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
        assert!((out.tail_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn creation_bad_mode() {
        let basis = FockBasis::shared(2, 1).unwrap();
        let vac = OccupationState::vacuum(basis);
        assert!(matches!(vac.apply_creation(2), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn annihilation_after_creation_counts_photons() {
        // a a^dagger |n> = (n + 1) |n>
        let basis = FockBasis::shared(2, 5).unwrap();
        let psi = OccupationState::number_state(basis, &[2, 1]).unwrap();
        for mode in 0..2 {
            let n = psi.basis().occupation(psi.basis().index_of(&[2, 1]).unwrap())[mode] as f64;
            let back = psi.apply_creation(mode).unwrap().apply_annihilation(mode).unwrap();
            for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
                assert!((a - b * (n + 1.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn coherent_vacuum() {
        let psi = synthesize_coherent(&[c(0.0, 0.0); 4], 4).unwrap();
        assert_eq!(psi.amplitude(&[0, 0, 0, 0]), c(1.0, 0.0));
        assert_eq!(psi.norm_sqr(), 1.0);
        assert_eq!(psi.tail_weight(), 0.0);
    }

    #[test]
    fn coherent_single_mode_expansion() {
        let psi = synthesize_coherent(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 16).unwrap();
        let mut fact = 1.0f64;
        for k in 0..=16u16 {
            if k > 0 {
                fact *= k as f64;
            }
            let expected = (-0.5f64).exp() / fact.sqrt();
            assert!((psi.amplitude(&[k, 0, 0, 0]) - c(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_mean_photon_number() {
        let z = [c(0.6, 0.8), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let psi = synthesize_coherent(&z, 16).unwrap();
        let n: f64 = (0..4).map(|m| psi.mean_photon_number(m).unwrap()).sum();
        assert!((n - 1.0).abs() < 1e-8);
    }

    #[test]
    fn coherent_overlap_matches_closed_form() {
        let z = [c(0.3, -0.2), c(0.1, 0.5), c(-0.4, 0.0), c(0.2, 0.2)];
        let w = [c(-0.1, 0.3), c(0.6, 0.1), c(0.0, -0.3), c(0.25, 0.0)];
        let a = synthesize_coherent(&z, 16).unwrap();
        let b = synthesize_coherent(&w, 16).unwrap();
        let nz: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        let nw: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        let cross: Complex64 = z.iter().zip(&w).map(|(zi, wi)| zi.conj() * wi).sum();
        let expected = (c(-(nz + nw) / 2.0, 0.0) + cross).exp();
        assert!((a.inner(&b).unwrap() - expected).norm() < 1e-8);
    }

    #[test]
    fn coherent_tail_bound_enforced() {
        let z = [c(2.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        match synthesize_coherent(&z, 8) {
            Err(Error::TruncationTail { suggested_cutoff, .. }) => {
                assert!(suggested_cutoff > 8);
                assert!(synthesize_coherent(&z, suggested_cutoff).is_ok());
            }
            other => panic!("expected a tail error, got {other:?}"),
        }
    }

    #[test]
    fn poisson_tail_agrees_with_direct_sum() {
        for &(mean, cutoff) in &[(1.0, 3usize), (2.5, 10), (0.3, 2), (9.0, 16)] {
            let head: f64 = (0..=cutoff)
                .map(|k| (-mean + k as f64 * f64::ln(mean) - ln_factorial(k)).exp())
                .sum();
            assert!((poisson_tail(mean, cutoff) - (1.0 - head)).abs() < 1e-14);
        }
    }

    #[test]
    fn reported_tail_equals_missing_norm() {
        let z = [c(1.2, 0.0), c(0.0, 0.7), c(0.0, 0.0), c(0.5, 0.0)];
        let psi = synthesize_coherent_with_policy(&z, 12, &NumericalPolicy { max_tail: 1e-3, ..Default::default() }).unwrap();
        assert!(psi.tail_weight() > 1e-8);
        assert!((psi.norm_sqr() + psi.tail_weight() - 1.0).abs() < 1e-14);
    }
}
