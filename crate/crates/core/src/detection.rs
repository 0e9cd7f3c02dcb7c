//! Polarizer action, "at least one photon" detection probabilities,
//! coincidence rates and the Clauser-Horne functional.
//!
//! Beam `k` is modes (0, 1) and beam `k'` is modes (2, 3). A polarizer at
//! `theta` is modelled by rotating its beam with
//! [`PassiveUnitary::polarizer_rotation`] and detecting the first mode of the
//! pair. Every detection operator is `I - |vac><vac|` on the detected modes,
//! so each coincidence rate follows from vacuum probabilities by
//! inclusion-exclusion:
//!
//! `<A(S) A(T)> = 1 - q(S) - q(T) + q(S u T)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, OccupationState, StateEnsemble};
use crate::linear_optics::{apply_passive, apply_passive_density, PassiveUnitary};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::policy::NumericalPolicy;

/// Maps an angle onto `[0, pi)`; polarizer axes are lines, not directions.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Parses `"0.39"`, `"pi/8"`, `"3pi/8"`, `"3*pi/8"`, `"-pi/4"` or `"pi"`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || Error::InvalidParameter(format!("cannot parse angle {text:?}"));
    if let Ok(v) = s.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let coeff = num
        .strip_suffix("pi")
        .or_else(|| num.strip_suffix('π'))
        .ok_or_else(bad)?;
    let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
    let k = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(k * PI / den)
}

/// Polarizer settings `(theta1, theta2, theta1', theta2')`, canonicalised to `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSettings {
    pub theta1: f64,
    pub theta2: f64,
    pub theta1p: f64,
    pub theta2p: f64,
}

impl AngleSettings {
    pub fn new(theta1: f64, theta2: f64, theta1p: f64, theta2p: f64) -> Result<Self> {
        let all = [theta1, theta2, theta1p, theta2p];
        if all.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite angle in {all:?}")));
        }
        Ok(Self {
            theta1: canonical_angle(theta1),
            theta2: canonical_angle(theta2),
            theta1p: canonical_angle(theta1p),
            theta2p: canonical_angle(theta2p),
        })
    }

    /// `(pi/8, pi/4, 3 pi/8, 0)`.
    pub fn reference() -> Self {
        Self::new(PI / 8.0, PI / 4.0, 3.0 * PI / 8.0, 0.0).expect("finite")
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta1p, self.theta2p]
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// The four count rates for one pair of polarizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRates {
    /// `P(theta1, theta2)`: both polarizers in place.
    pub p_ab: f64,
    /// `P(theta1, .)`: second polarizer removed.
    pub p_a: f64,
    /// `P(., theta2)`: first polarizer removed.
    pub p_b: f64,
    /// `P(., .)`: both removed.
    pub p_none: f64,
}

impl CoincidenceRates {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_ab, self.p_a, self.p_b, self.p_none]
    }

    fn scaled_add(&mut self, w: f64, other: &Self) {
        self.p_ab += w * other.p_ab;
        self.p_a += w * other.p_a;
        self.p_b += w * other.p_b;
        self.p_none += w * other.p_none;
    }

    pub(crate) fn zero() -> Self {
        Self {
            p_ab: 0.0,
            p_a: 0.0,
            p_b: 0.0,
            p_none: 0.0,
        }
    }
}

/// Vacuum probabilities of the detected mode sets after the polarizer
/// rotations. `d1` is the mode passed by the first polarizer, `b1` the whole
/// first beam; likewise `d2`, `b2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DetectorVacua {
    pub d1: f64,
    pub b1: f64,
    pub d2: f64,
    pub b2: f64,
    pub d1_d2: f64,
    pub d1_b2: f64,
    pub b1_d2: f64,
    pub b1_b2: f64,
}

impl DetectorVacua {
    /// Accumulates from per-basis-state probabilities of the rotated state.
    pub fn from_diagonal<'a, I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (&'a [u16], f64)>,
    {
        let mut q = Self::default();
        for (occ, p) in entries {
            let d1 = occ[0] == 0;
            let b1 = d1 && occ[1] == 0;
            let d2 = occ[2] == 0;
            let b2 = d2 && occ[3] == 0;
            if d1 {
                q.d1 += p;
                if d2 {
                    q.d1_d2 += p;
                }
                if b2 {
                    q.d1_b2 += p;
                }
            }
            if b1 {
                q.b1 += p;
                if d2 {
                    q.b1_d2 += p;
                }
                if b2 {
                    q.b1_b2 += p;
                }
            }
            if d2 {
                q.d2 += p;
            }
            if b2 {
                q.b2 += p;
            }
        }
        q
    }

    pub fn rates(&self) -> CoincidenceRates {
        CoincidenceRates {
            p_ab: 1.0 - self.d1 - self.d2 + self.d1_d2,
            p_a: 1.0 - self.d1 - self.b2 + self.d1_b2,
            p_b: 1.0 - self.b1 - self.d2 + self.b1_d2,
            p_none: 1.0 - self.b1 - self.b2 + self.b1_b2,
        }
    }
}

/// Anything that can produce the four coincidence rates of a four-mode field.
pub trait RateSource {
    fn mode_count(&self) -> usize;

    /// Rates with the first polarizer at `theta1` and the second at `theta2`.
    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates>;

    /// Truncation error carried by the rates.
    fn tail_error(&self) -> f64 {
        0.0
    }
}

fn require_four_modes(modes: usize) -> Result<()> {
    if modes != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: modes,
        });
    }
    Ok(())
}

impl RateSource for OccupationState {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        require_four_modes(self.modes())?;
        let rotated = apply_passive(self, &PassiveUnitary::polarizer_pair(theta1, theta2))?;
        let basis = rotated.basis();
        let q = DetectorVacua::from_diagonal(
            basis
                .iter()
                .zip(rotated.amplitudes())
                .map(|(occ, a)| (occ, a.norm_sqr())),
        );
        Ok(q.rates())
    }

    fn tail_error(&self) -> f64 {
        self.tail_weight()
    }
}

impl RateSource for DensityOperator {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        require_four_modes(self.modes())?;
        let rotated = apply_passive_density(self, &PassiveUnitary::polarizer_pair(theta1, theta2))?;
        let m = rotated.matrix();
        let q = DetectorVacua::from_diagonal(
            rotated
                .basis()
                .iter()
                .enumerate()
                .map(|(i, occ)| (occ, m[(i, i)].re)),
        );
        Ok(q.rates())
    }

    fn tail_error(&self) -> f64 {
        self.tail_weight()
    }
}

impl RateSource for StateEnsemble {
    fn mode_count(&self) -> usize {
        self.modes()
    }

    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        let mut acc = CoincidenceRates::zero();
        for (w, psi) in self.components() {
            acc.scaled_add(*w, &psi.rates(theta1, theta2)?);
        }
        Ok(acc)
    }

    fn tail_error(&self) -> f64 {
        self.tail_weight()
    }
}

impl<T: RateSource + ?Sized> RateSource for &T {
    fn mode_count(&self) -> usize {
        (**self).mode_count()
    }
    fn rates(&self, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
        (**self).rates(theta1, theta2)
    }
    fn tail_error(&self) -> f64 {
        (**self).tail_error()
    }
}

/// Coincidence rates `(a)`-`(d)` for one pair of settings.
pub fn coincidence_rates<S: RateSource + ?Sized>(state: &S, theta1: f64, theta2: f64) -> Result<CoincidenceRates> {
    require_four_modes(state.mode_count())?;
    state.rates(theta1, theta2)
}

/// Output of a polarizer at `theta` on a two-mode state: rotate, then trace
/// out the orthogonal mode.
pub fn polarizer_apply(rho: &DensityOperator, theta: f64) -> Result<DensityOperator> {
    if rho.modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho.modes(),
        });
    }
    let u = PassiveUnitary::polarizer_rotation(theta, (0, 1), 2)?;
    apply_passive_density(rho, &u)?.partial_trace(&[0])
}

/// Probability of registering at least one photon in `modes`.
pub fn prob_at_least_one(rho: &DensityOperator, modes: &[usize]) -> Result<f64> {
    Ok(1.0 - rho.vacuum_probability(modes)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NotViolated,
    /// `f > 0`.
    ViolatedUpper,
    /// `f < -P(., .)`.
    ViolatedLower,
    /// An apparent violation smaller than the truncation error.
    Inconclusive,
}

impl Verdict {
    pub fn is_violated(self) -> bool {
        matches!(self, Verdict::ViolatedUpper | Verdict::ViolatedLower)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NotViolated => "not violated",
            Verdict::ViolatedUpper => "violated",
            Verdict::ViolatedLower => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Classifies `f` against `-P(., .) <= f <= 0`.
pub fn verdict(f: f64, p_both_removed: f64, tail_error: f64, policy: &NumericalPolicy) -> Verdict {
    let upper_excess = f;
    let lower_excess = -(f + p_both_removed);
    let excess = upper_excess.max(lower_excess);
    let tol = policy.verdict_tol + tail_error;
    if excess > tol {
        if upper_excess >= lower_excess {
            Verdict::ViolatedUpper
        } else {
            Verdict::ViolatedLower
        }
    } else if excess > policy.verdict_tol {
        Verdict::Inconclusive
    } else {
        Verdict::NotViolated
    }
}

/// Everything needed to evaluate the Clauser-Horne inequality at one set of
/// angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceReport {
    pub angles: AngleSettings,
    /// Rates at `(theta1, theta2)`; `p_a`, `p_b` and `p_none` come from here.
    pub rates: CoincidenceRates,
    pub rates_theta1_theta2p: CoincidenceRates,
    pub rates_theta1p_theta2: CoincidenceRates,
    pub rates_theta1p_theta2p: CoincidenceRates,
    /// `P(t1,t2) - P(t1,t2') + P(t1',t2) + P(t1',t2') - P(t1',.) - P(.,t2)`.
    pub f: f64,
    /// `P(., .)`.
    pub p_both_removed: f64,
    /// `f + P(., .)`, non-negative when the lower bound holds.
    pub lower_margin: f64,
    /// `-f`, non-negative when the upper bound holds.
    pub upper_margin: f64,
    pub tail_error: f64,
    pub verdict: Verdict,
}

impl CoincidenceReport {
    pub fn from_rates(
        angles: AngleSettings,
        rates: [CoincidenceRates; 4],
        tail_error: f64,
        policy: &NumericalPolicy,
    ) -> Self {
        let [tt, tt2p, t1pt, t1pt2p] = rates;
        let f = tt.p_ab - tt2p.p_ab + t1pt.p_ab + t1pt2p.p_ab - t1pt.p_a - tt.p_b;
        let p_both_removed = tt.p_none;
        Self {
            angles,
            rates: tt,
            rates_theta1_theta2p: tt2p,
            rates_theta1p_theta2: t1pt,
            rates_theta1p_theta2p: t1pt2p,
            f,
            p_both_removed,
            lower_margin: f + p_both_removed,
            upper_margin: -f,
            tail_error,
            verdict: verdict(f, p_both_removed, tail_error, policy),
        }
    }

    /// `P(theta1', .)`.
    pub fn p_theta1p_removed(&self) -> f64 {
        self.rates_theta1p_theta2.p_a
    }

    /// `P(., theta2)`.
    pub fn p_removed_theta2(&self) -> f64 {
        self.rates.p_b
    }
}

pub fn ch_functional<S: RateSource + ?Sized>(state: &S, angles: &AngleSettings) -> Result<CoincidenceReport> {
    ch_functional_with_policy(state, angles, &NumericalPolicy::default())
}

pub fn ch_functional_with_policy<S: RateSource + ?Sized>(
    state: &S,
    angles: &AngleSettings,
    policy: &NumericalPolicy,
) -> Result<CoincidenceReport> {
    require_four_modes(state.mode_count())?;
    let a = angles;
    let rates = [
        state.rates(a.theta1, a.theta2)?,
        state.rates(a.theta1, a.theta2p)?,
        state.rates(a.theta1p, a.theta2)?,
        state.rates(a.theta1p, a.theta2p)?,
    ];
    Ok(CoincidenceReport::from_rates(*a, rates, state.tail_error(), policy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Number of grid points per angle over `[0, pi)`.
    pub grid_density: usize,
    /// Refine the best grid points with Nelder-Mead.
    pub refine: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_density: 16,
            refine: true,
        }
    }
}

/// Best settings found by [`angle_scan`] for each side of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Settings maximising `f`.
    pub max_f: CoincidenceReport,
    /// Settings minimising `f + P(., .)`.
    pub min_lower_margin: CoincidenceReport,
    pub evaluations: usize,
}

/// Exhaustive grid over `[0, pi)^4`, optionally refined by Nelder-Mead.
///
/// Rates depend on one `(theta1, theta2)` pair at a time, so the grid only
/// needs `density^2` rate evaluations; these run in parallel and the
/// reduction over quadruples is sequential in lexicographic order, which
/// makes ties resolve to the smallest grid index.
pub fn angle_scan<S: RateSource + Sync + ?Sized>(
    state: &S,
    options: &ScanOptions,
    policy: &NumericalPolicy,
) -> Result<ScanResult> {
    require_four_modes(state.mode_count())?;
    let g = options.grid_density;
    if g < 2 {
        return Err(Error::InvalidParameter("grid density must be at least 2".into()));
    }
    let grid: Vec<f64> = (0..g).map(|k| k as f64 * PI / g as f64).collect();
    let table: Vec<CoincidenceRates> = (0..g * g)
        .into_par_iter()
        .map(|k| state.rates(grid[k / g], grid[k % g]))
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| &table[i * g + j];

    let mut best_max = (f64::NEG_INFINITY, [0usize; 4]);
    let mut best_min = (f64::INFINITY, [0usize; 4]);
    for i in 0..g {
        for j in 0..g {
            for ip in 0..g {
                for jp in 0..g {
                    let f = at(i, j).p_ab - at(i, jp).p_ab + at(ip, j).p_ab + at(ip, jp).p_ab
                        - at(ip, j).p_a
                        - at(i, j).p_b;
                    if f > best_max.0 {
                        best_max = (f, [i, j, ip, jp]);
                    }
                    let lower = f + at(i, j).p_none;
                    if lower < best_min.0 {
                        best_min = (lower, [i, j, ip, jp]);
                    }
                }
            }
        }
    }
    let mut evaluations = g * g;
    let angles_of = |idx: [usize; 4]| AngleSettings::from_array(idx.map(|k| grid[k]));
    let mut max_report = ch_functional_with_policy(state, &angles_of(best_max.1)?, policy)?;
    let mut min_report = ch_functional_with_policy(state, &angles_of(best_min.1)?, policy)?;

    if options.refine {
        let nm = NelderMeadOptions {
            initial_step: PI / (2.0 * g as f64),
            max_evaluations: 2000,
            f_tolerance: 1e-15,
            x_tolerance: 1e-12,
        };
        let objective = |x: &[f64], sign: f64| -> f64 {
            let angles = match AngleSettings::new(x[0], x[1], x[2], x[3]) {
                Ok(a) => a,
                Err(_) => return f64::INFINITY,
            };
            match ch_functional_with_policy(state, &angles, policy) {
                Ok(r) => sign * if sign > 0.0 { r.lower_margin } else { r.f },
                Err(_) => f64::INFINITY,
            }
        };
        let up = nelder_mead(|x| objective(x, -1.0), &max_report.angles.as_array(), &nm);
        let down = nelder_mead(|x| objective(x, 1.0), &min_report.angles.as_array(), &nm);
        evaluations += 4 * (up.evaluations + down.evaluations);
        let refined_max = ch_functional_with_policy(state, &AngleSettings::from_array(array4(&up.x))?, policy)?;
        if refined_max.f > max_report.f {
            max_report = refined_max;
        }
        let refined_min = ch_functional_with_policy(state, &AngleSettings::from_array(array4(&down.x))?, policy)?;
        if refined_min.lower_margin < min_report.lower_margin {
            min_report = refined_min;
        }
    }

    Ok(ScanResult {
        max_f: max_report,
        min_lower_margin: min_report,
        evaluations,
    })
}

fn array4(x: &[f64]) -> [f64; 4] {
    [x[0], x[1], x[2], x[3]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{synthesize_coherent, two_photon_state, FockBasis};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn angle_parsing() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert!((parse_angle("pi/8").unwrap() - PI / 8.0).abs() < 1e-15);
        assert!((parse_angle("3pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((parse_angle("3*pi/8").unwrap() - 3.0 * PI / 8.0).abs() < 1e-15);
        assert!((parse_angle(" -pi / 4 ").unwrap() + PI / 4.0).abs() < 1e-15);
        assert!((parse_angle("pi").unwrap() - PI).abs() < 1e-15);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("nan").is_err());
    }

    #[test]
    fn angles_are_canonical() {
        let a = AngleSettings::new(PI, -PI / 4.0, 5.0 * PI / 2.0, 0.3).unwrap();
        assert_eq!(a.theta1, 0.0);
        assert!((a.theta2 - 3.0 * PI / 4.0).abs() < 1e-15);
        assert!((a.theta1p - PI / 2.0).abs() < 1e-14);
        assert!(canonical_angle(-1e-18) < PI);
        assert!(AngleSettings::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    fn split_photon() -> DensityOperator {
        let basis = FockBasis::shared(2, 1).unwrap();
        let s = 0.5f64.sqrt();
        let mut amps = vec![c(0.0, 0.0); 3];
        amps[basis.index_of(&[1, 0]).unwrap()] = c(s, 0.0);
        amps[basis.index_of(&[0, 1]).unwrap()] = c(s, 0.0);
        DensityOperator::from_pure(&OccupationState::from_amplitudes(basis, amps).unwrap())
    }

    #[test]
    fn polarizer_on_split_photon() {
        let out = polarizer_apply(&split_photon(), 0.0).unwrap();
        let expected = [[0.5, 0.0], [0.0, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((out.matrix()[(i, j)] - c(expected[i][j], 0.0)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn polarizer_passes_coherent_component() {
        let (z1, z2, theta) = (c(0.6, 0.2), c(-0.3, 0.5), 0.7);
        let rho = DensityOperator::from_pure(&synthesize_coherent(&[z1, z2], 14).unwrap());
        let out = polarizer_apply(&rho, theta).unwrap();
        let passed = z1 * theta.cos() - z2 * theta.sin();
        let target = synthesize_coherent(&[passed], 14).unwrap();
        let v = nalgebra::DVector::from_column_slice(target.amplitudes());
        let fidelity = (v.adjoint() * out.matrix() * &v)[(0, 0)].re;
        assert!((fidelity - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn polarizer_vacuum_and_mode_count() {
        let vac = DensityOperator::from_pure(&OccupationState::vacuum(FockBasis::shared(2, 3).unwrap()));
        let out = polarizer_apply(&vac, 1.1).unwrap();
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        let three = DensityOperator::from_pure(&OccupationState::vacuum(FockBasis::shared(3, 1).unwrap()));
        assert!(polarizer_apply(&three, 0.0).is_err());
    }

    #[test]
    fn at_least_one_photon() {
        let basis = FockBasis::shared(4, 2).unwrap();
        let vac = DensityOperator::from_pure(&OccupationState::vacuum(basis.clone()));
        assert_eq!(prob_at_least_one(&vac, &[0, 1]).unwrap(), 0.0);
        let one = DensityOperator::from_pure(&OccupationState::number_state(basis, &[1, 0, 0, 0]).unwrap());
        assert_eq!(prob_at_least_one(&one, &[0, 1]).unwrap(), 1.0);
        let coh = DensityOperator::from_pure(
            &synthesize_coherent(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], 14).unwrap(),
        );
        assert!((prob_at_least_one(&coh, &[0, 1]).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-10);
        assert!(prob_at_least_one(&coh, &[]).is_err());
    }

    #[test]
    fn vacuum_rates_vanish() {
        let vac = OccupationState::vacuum(FockBasis::shared(4, 2).unwrap());
        let r = coincidence_rates(&vac, 0.3, 1.2).unwrap();
        assert_eq!(r.as_array(), [0.0; 4]);
        let report = ch_functional(&vac, &AngleSettings::reference()).unwrap();
        assert_eq!(report.f, 0.0);
        assert_eq!(report.verdict, Verdict::NotViolated);
    }

    #[test]
    fn wrong_mode_count() {
        let vac = OccupationState::vacuum(FockBasis::shared(3, 2).unwrap());
        assert!(coincidence_rates(&vac, 0.0, 0.0).is_err());
        assert!(ch_functional(&vac, &AngleSettings::reference()).is_err());
    }

    #[test]
    fn density_and_pure_rates_agree() {
        let psi = two_photon_state(2).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        for &(a, b) in &[(0.0, 0.0), (0.4, 1.3), (2.0, 0.7)] {
            let x = psi.rates(a, b).unwrap().as_array();
            let y = rho.rates(a, b).unwrap().as_array();
            for k in 0..4 {
                assert!((x[k] - y[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn verdict_bands() {
        let p = NumericalPolicy::default();
        assert_eq!(verdict(0.0, 0.5, 0.0, &p), Verdict::NotViolated);
        assert_eq!(verdict(1e-3, 0.5, 0.0, &p), Verdict::ViolatedUpper);
        assert_eq!(verdict(-0.6, 0.5, 0.0, &p), Verdict::ViolatedLower);
        assert_eq!(verdict(1e-6, 0.5, 1e-5, &p), Verdict::Inconclusive);
        assert_eq!(verdict(5e-10, 0.5, 0.0, &p), Verdict::NotViolated);
    }

    #[test]
    fn scan_rejects_small_grid() {
        let vac = OccupationState::vacuum(FockBasis::shared(4, 1).unwrap());
        let opts = ScanOptions {
            grid_density: 1,
            refine: false,
        };
        assert!(angle_scan(&vac, &opts, &NumericalPolicy::default()).is_err());
    }

    #[test]
    fn vacuum_scan() {
        let vac = OccupationState::vacuum(FockBasis::shared(4, 1).unwrap());
        let r = angle_scan(&vac, &ScanOptions::default(), &NumericalPolicy::default()).unwrap();
        assert_eq!(r.max_f.f, 0.0);
        assert_eq!(r.min_lower_margin.lower_margin, 0.0);
    }
}
