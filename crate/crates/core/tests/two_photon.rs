use std::f64::consts::PI;

use bellsim_core::coherent::{coherent_rates, CoherentAmplitudes};
use bellsim_core::detection::{angle_scan, ch_functional, AngleSettings, RateSource, ScanOptions, Verdict};
use bellsim_core::fock::{two_photon_state, OccupationState};
use bellsim_core::linear_optics::{apply_passive, PassiveUnitary};
use bellsim_core::NumericalPolicy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// The state is a^dagger(x) a^dagger(y)|0>/2 with x = e1 - e3, y = e4 - e2.
// A coincidence needs one photon per beam; the amplitude for one photon in
// orthonormal modes e and f is (<e|x><f|y> + <f|x><e|y>)/2.
const X: [f64; 4] = [1.0, 0.0, -1.0, 0.0];
const Y: [f64; 4] = [0.0, -1.0, 0.0, 1.0];

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn pair_probability(e: &[f64; 4], f: &[f64; 4]) -> f64 {
    (0.5 * (dot(e, &X) * dot(f, &Y) + dot(f, &X) * dot(e, &Y))).powi(2)
}

fn passed(theta: f64, beam: usize) -> [f64; 4] {
    let mut e = [0.0; 4];
    e[2 * beam] = theta.cos();
    e[2 * beam + 1] = -theta.sin();
    e
}

fn beam_basis(beam: usize) -> [[f64; 4]; 2] {
    let mut a = [0.0; 4];
    let mut b = [0.0; 4];
    a[2 * beam] = 1.0;
    b[2 * beam + 1] = 1.0;
    [a, b]
}

/// `[P(t1,t2), P(t1,.), P(.,t2), P(.,.)]`
fn oracle(theta1: f64, theta2: f64) -> [f64; 4] {
    let e = passed(theta1, 0);
    let f = passed(theta2, 1);
    let p_ab = pair_probability(&e, &f);
    let p_a: f64 = beam_basis(1).iter().map(|f| pair_probability(&e, f)).sum();
    let p_b: f64 = beam_basis(0).iter().map(|e| pair_probability(e, &f)).sum();
    let p_none: f64 = beam_basis(0)
        .iter()
        .flat_map(|e| beam_basis(1).map(|f| pair_probability(e, &f)))
        .sum();
    [p_ab, p_a, p_b, p_none]
}

fn oracle_f(a: &AngleSettings) -> f64 {
    let r = |t1, t2| oracle(t1, t2);
    r(a.theta1, a.theta2)[0] - r(a.theta1, a.theta2p)[0] + r(a.theta1p, a.theta2)[0] + r(a.theta1p, a.theta2p)[0]
        - r(a.theta1p, a.theta2)[1]
        - r(a.theta1, a.theta2)[2]
}

#[test]
fn rates_match_first_quantized_oracle() {
    let psi = two_photon_state(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let (a, b) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        let got = psi.rates(a, b).unwrap().as_array();
        let want = oracle(a, b);
        for k in 0..4 {
            assert!((got[k] - want[k]).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn larger_cutoff_changes_nothing() {
    let small = two_photon_state(2).unwrap();
    let large = two_photon_state(8).unwrap();
    for (a, b) in [(0.2, 0.9), (PI / 8.0, PI / 4.0)] {
        let x = small.rates(a, b).unwrap().as_array();
        let y = large.rates(a, b).unwrap().as_array();
        for k in 0..4 {
            assert!((x[k] - y[k]).abs() < 1e-13);
        }
    }
}

#[test]
fn aligned_polarizers() {
    let r = oracle(0.0, 0.0);
    assert!(r[0].abs() < 1e-15);
    assert!((r[1] - 0.25).abs() < 1e-15);
    assert!((r[2] - 0.25).abs() < 1e-15);
    assert!((r[3] - 0.5).abs() < 1e-15);
    let got = two_photon_state(2).unwrap().rates(0.0, 0.0).unwrap().as_array();
    for k in 0..4 {
        assert!((got[k] - r[k]).abs() < 1e-14);
    }
}

#[test]
fn reference_angles_violate() {
    let psi = two_photon_state(2).unwrap();
    let a = AngleSettings::reference();
    let r = ch_functional(&psi, &a).unwrap();
    assert_eq!(r.verdict, Verdict::ViolatedUpper);
    assert!((r.f - oracle_f(&a)).abs() < 1e-12);
    assert!((r.f - (2f64.sqrt() - 1.0) / 4.0).abs() < 1e-12);
}

#[test]
fn scan_reaches_oracle_optimum() {
    let psi = two_photon_state(2).unwrap();
    let scan = angle_scan(&psi, &ScanOptions::default(), &NumericalPolicy::default()).unwrap();
    let best = (2f64.sqrt() - 1.0) / 4.0;
    assert!((scan.max_f.f - best).abs() < 1e-6, "{}", scan.max_f.f);
    assert!((oracle_f(&scan.max_f.angles) - scan.max_f.f).abs() < 1e-12);
    // the lower bound is broken by the same amount
    assert!((scan.min_lower_margin.lower_margin + best).abs() < 1e-6);
}

#[test]
fn half_turn_periodicity() {
    let psi = two_photon_state(2).unwrap();
    for (a, b) in [(0.3, 1.2), (2.0, 0.1)] {
        let x = psi.rates(a, b).unwrap().as_array();
        let y = psi.rates(a + PI, b - PI).unwrap().as_array();
        for k in 0..4 {
            assert!((x[k] - y[k]).abs() < 1e-12);
        }
    }
}

fn number_correlation(psi: &OccupationState, theta1: f64, theta2: f64) -> f64 {
    let rotated = apply_passive(psi, &PassiveUnitary::polarizer_pair(theta1, theta2)).unwrap();
    rotated
        .basis()
        .iter()
        .zip(rotated.amplitudes())
        .map(|(occ, a)| occ[0] as f64 * occ[2] as f64 * a.norm_sqr())
        .sum()
}

#[test]
fn click_operators_act_as_number_operators() {
    let psi = two_photon_state(2).unwrap();
    let z = CoherentAmplitudes::from_real([1.0, 0.0, 1.0, 0.0]);
    let coherent = bellsim_core::fock::synthesize_coherent(&z.z, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut coherent_gap: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        let r = psi.rates(a, b).unwrap();
        assert!((r.p_ab - number_correlation(&psi, a, b)).abs() < 1e-12);
        let c = coherent_rates(&z, a, b);
        coherent_gap = coherent_gap.max((c.p_ab - number_correlation(&coherent, a, b)).abs());
    }
    assert!(coherent_gap >= 0.01);
}

#[test]
fn removed_polarizer_is_sum_of_orthogonal_settings() {
    let psi = two_photon_state(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (a, b) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        let r = psi.rates(a, b).unwrap();
        let r_perp = psi.rates(a, b + PI / 2.0).unwrap();
        assert!((r.p_a - (r.p_ab + r_perp.p_ab)).abs() < 1e-12);
    }
}
