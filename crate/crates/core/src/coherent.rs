//! Closed-form coincidence rates for four-mode coherent states, and
//! classical states as finite positive mixtures of coherent states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{ch_functional_with_policy, AngleSettings, CoincidenceRates, CoincidenceReport, RateSource};
use crate::error::{Error, Result};
use crate::fock::{synthesize_coherent_with_policy, StateEnsemble};
use crate::linear_optics::{apply_passive, PassiveUnitary};
use crate::policy::NumericalPolicy;

/// Amplitudes `(z1, z2, z3, z4)` of a four-mode coherent state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitudes {
    pub z: [Complex64; 4],
}

impl CoherentAmplitudes {
    pub fn new(z: [Complex64; 4]) -> Result<Self> {
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coherent amplitude".into()));
        }
        Ok(Self { z })
    }

    pub fn from_real(z: [f64; 4]) -> Self {
        Self {
            z: z.map(|x| Complex64::new(x, 0.0)),
        }
    }

    pub fn transformed(&self, u: &PassiveUnitary) -> Result<Self> {
        let moved = u.apply_to_amplitudes(&self.z)?;
        Ok(Self {
            z: [moved[0], moved[1], moved[2], moved[3]],
        })
    }
}

/// Rates of a coherent state:
///
/// ```text
/// P(t1,t2) = (1 - e^{-|z1'|^2}) (1 - e^{-|z3'|^2})
/// P(t1,.)  = (1 - e^{-|z1'|^2}) (1 - e^{-|z3|^2 - |z4|^2})
/// P(.,t2)  = (1 - e^{-|z1|^2 - |z2|^2}) (1 - e^{-|z3'|^2})
/// P(.,.)   = (1 - e^{-|z1|^2 - |z2|^2}) (1 - e^{-|z3|^2 - |z4|^2})
/// ```
///
/// with `z1' = cos t1 z1 - sin t1 z2` and `z3' = cos t2 z3 - sin t2 z4`.
pub fn coherent_rates(z: &CoherentAmplitudes, theta1: f64, theta2: f64) -> CoincidenceRates {
    let [z1, z2, z3, z4] = z.z;
    let z1p = z1 * theta1.cos() - z2 * theta1.sin();
    let z3p = z3 * theta2.cos() - z4 * theta2.sin();
    // 1 - e^{-x}, accurate for small x
    let click = |x: f64| -(-x).exp_m1();
    let d1 = click(z1p.norm_sqr());
    let d2 = click(z3p.norm_sqr());
    let b1 = click(z1.norm_sqr() + z2.norm_sqr());
    let b2 = click(z3.norm_sqr() + z4.norm_sqr());
    CoincidenceRates {
        p_ab: d1 * d2,
        p_a: d1 * b2,
        p_b: b1 * d2,
        p_none: b1 * b2,
    }
}

impl RateSource for CoherentAmplitudes {
    fn mode_count(&self) -> usize {
        4
    }

    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        Ok(coherent_rates(self, theta1, theta2))
    }
}

/// Positive, normalised mixture of coherent states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMixture {
    components: Vec<(f64, CoherentAmplitudes)>,
}

impl ClassicalMixture {
    pub fn new(components: Vec<(f64, CoherentAmplitudes)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidState("mixture needs at least one component".into()));
        }
        if let Some((w, _)) = components.iter().find(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidState(format!("mixture weight {w} is not positive")));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    /// Rescales positive weights to sum to one.
    pub fn normalized(components: Vec<(f64, CoherentAmplitudes)>) -> Result<Self> {
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidState("mixture weights must be positive".into()));
        }
        Self::new(components.into_iter().map(|(w, z)| (w / total, z)).collect())
    }

    pub fn single(z: CoherentAmplitudes) -> Self {
        Self {
            components: vec![(1.0, z)],
        }
    }

    pub fn components(&self) -> &[(f64, CoherentAmplitudes)] {
        &self.components
    }

    /// Passive transformation: every component moves by `z -> U z`, weights unchanged.
    pub fn transformed(&self, u: &PassiveUnitary) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|(w, z)| Ok((*w, z.transformed(u)?)))
            .collect::<Result<_>>()?;
        Ok(Self { components })
    }

    /// Random mixture: 1 to 5 components, `Re z_j` and `Im z_j` uniform in
    /// `[-bound, bound]`, weights uniform on the simplex.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> Self {
        let count = rng.random_range(1..=5);
        let raw: Vec<(f64, CoherentAmplitudes)> = (0..count)
            .map(|_| {
                let w: f64 = Exp1.sample(rng);
                let z = [(); 4].map(|_| {
                    Complex64::new(rng.random_range(-bound..=bound), rng.random_range(-bound..=bound))
                });
                (w, CoherentAmplitudes { z })
            })
            .collect();
        let total: f64 = raw.iter().map(|(w, _)| w).sum();
        Self {
            components: raw.into_iter().map(|(w, z)| (w / total, z)).collect(),
        }
    }

    /// The same mixture on the Fock engine.
    pub fn to_fock(&self, cutoff: usize, policy: &NumericalPolicy) -> Result<StateEnsemble> {
        let components = self
            .components
            .iter()
            .map(|(w, z)| Ok((*w, synthesize_coherent_with_policy(&z.z, cutoff, policy)?)))
            .collect::<Result<_>>()?;
        StateEnsemble::new(components)
    }
}

/// Weight-averaged coherent rates.
pub fn mixture_rates(m: &ClassicalMixture, theta1: f64, theta2: f64) -> CoincidenceRates {
    let mut acc = CoincidenceRates::zero();
    for (w, z) in &m.components {
        let r = coherent_rates(z, theta1, theta2);
        acc.p_ab += w * r.p_ab;
        acc.p_a += w * r.p_a;
        acc.p_b += w * r.p_b;
        acc.p_none += w * r.p_none;
    }
    acc
}

impl RateSource for ClassicalMixture {
    fn mode_count(&self) -> usize {
        4
    }

    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        Ok(mixture_rates(self, theta1, theta2))
    }
}

/// One randomly drawn trial of the classical suite.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTrial {
    pub trial: u64,
    pub mixture: ClassicalMixture,
    pub unitary: PassiveUnitary,
    pub angles: AngleSettings,
}

impl ClassicalTrial {
    /// Deterministic in `(seed, trial)`, independent of evaluation order.
    pub fn draw(seed: u64, trial: u64, bound: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let mixture = ClassicalMixture::sample(&mut rng, bound);
        let unitary = PassiveUnitary::haar_random(4, &mut rng);
        let angles = [(); 4].map(|_| rng.random_range(0.0..std::f64::consts::PI));
        Self {
            trial,
            mixture,
            unitary,
            angles: AngleSettings::from_array(angles).expect("finite angles"),
        }
    }

    pub fn transformed_mixture(&self) -> ClassicalMixture {
        self.mixture.transformed(&self.unitary).expect("4x4 unitary")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: u64,
    /// Bound on `|Re z_j|` and `|Im z_j|`.
    pub amplitude_bound: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            amplitude_bound: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteFailure {
    pub seed: u64,
    pub trial: u64,
    pub report: CoincidenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub trials: u64,
    /// Largest `f` seen (must stay at or below the tolerance).
    pub worst_f: f64,
    /// Smallest `f + P(., .)` seen (must stay at or above minus the tolerance).
    pub worst_lower_margin: f64,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random classical mixtures, random passive transforms and random angles;
/// every trial must satisfy `-P(., .) <= f <= 0` within the verdict tolerance.
pub fn classical_nonviolation_suite(options: &SuiteOptions, policy: &NumericalPolicy) -> SuiteReport {
    let reports: Vec<CoincidenceReport> = (0..options.trials)
        .into_par_iter()
        .map(|t| {
            let trial = ClassicalTrial::draw(options.seed, t, options.amplitude_bound);
            ch_functional_with_policy(&trial.transformed_mixture(), &trial.angles, policy)
                .expect("analytic rates never fail")
        })
        .collect();
    let failures = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.f > policy.verdict_tol || r.lower_margin < -policy.verdict_tol)
        .map(|(t, r)| SuiteFailure {
            seed: options.seed,
            trial: t as u64,
            report: *r,
        })
        .collect();
    SuiteReport {
        trials: options.trials,
        worst_f: reports.iter().map(|r| r.f).fold(f64::NEG_INFINITY, f64::max),
        worst_lower_margin: reports.iter().map(|r| r.lower_margin).fold(f64::INFINITY, f64::min),
        failures,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaReport {
    pub trials: u64,
    /// Largest |analytic - Fock| over all rates and `f`.
    pub max_deviation: f64,
    pub worst_trial: u64,
}

/// Re-runs suite trials on the Fock engine: each coherent component is
/// synthesised in Fock space and moved with the Fock action of `U`, then the
/// rates are compared with the closed forms applied to `U z`.
pub fn fock_replica(
    options: &SuiteOptions,
    cutoff: usize,
    policy: &NumericalPolicy,
) -> Result<ReplicaReport> {
    let deviations: Vec<f64> = (0..options.trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let trial = ClassicalTrial::draw(options.seed, t, options.amplitude_bound);
            let analytic = ch_functional_with_policy(&trial.transformed_mixture(), &trial.angles, policy)?;
            let components = trial
                .mixture
                .components()
                .iter()
                .map(|(w, z)| {
                    let psi = synthesize_coherent_with_policy(&z.z, cutoff, policy)?;
                    Ok((*w, apply_passive(&psi, &trial.unitary)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let fock = ch_functional_with_policy(&StateEnsemble::new(components)?, &trial.angles, policy)?;
            let pairs = [
                (analytic.rates, fock.rates),
                (analytic.rates_theta1_theta2p, fock.rates_theta1_theta2p),
                (analytic.rates_theta1p_theta2, fock.rates_theta1p_theta2),
                (analytic.rates_theta1p_theta2p, fock.rates_theta1p_theta2p),
            ];
            let mut dev = (analytic.f - fock.f).abs();
            for (a, b) in pairs {
                for (x, y) in a.as_array().iter().zip(b.as_array()) {
                    dev = dev.max((x - y).abs());
                }
            }
            Ok(dev)
        })
        .collect::<Result<_>>()?;
    let (worst_trial, max_deviation) = deviations
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (t, &d)| if d > acc.1 { (t, d) } else { acc });
    Ok(ReplicaReport {
        trials: options.trials,
        max_deviation,
        worst_trial: worst_trial as u64,
    })
}
