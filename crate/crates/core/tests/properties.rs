use std::f64::consts::PI;

use bellsim_core::coherent::{coherent_rates, CoherentAmplitudes};
use bellsim_core::detection::{ch_functional, AngleSettings, RateSource};
use bellsim_core::fock::synthesize_coherent;
use bellsim_core::gaussian::{build_squeezed_thermal, GaussianState, SqueezedThermalSpec};
use bellsim_core::linear_optics::{apply_passive, decompose_passive, PassiveUnitary};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn amplitudes(bound: f64) -> impl Strategy<Value = [Complex64; 4]> {
    prop::array::uniform4((-bound..bound, -bound..bound).prop_map(|(re, im)| Complex64::new(re, im)))
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherent_rates_factorize(z in amplitudes(2.0), a in angle(), b in angle()) {
        let r = coherent_rates(&CoherentAmplitudes::new(z).unwrap(), a, b);
        prop_assert!((r.p_ab * r.p_none - r.p_a * r.p_b).abs() <= 1e-12);
    }

    #[test]
    fn removing_a_polarizer_never_lowers_counts(
        u in -0.8f64..0.8, v in -0.8f64..0.8, kappa in 0.3f64..=1.0, a in angle(), b in angle()
    ) {
        let g = build_squeezed_thermal(&SqueezedThermalSpec::new(u, v, kappa).unwrap()).unwrap();
        let r = g.rates(a, b).unwrap();
        prop_assert!(r.p_ab >= -1e-12);
        prop_assert!(r.p_ab <= r.p_a + 1e-12 && r.p_ab <= r.p_b + 1e-12);
        prop_assert!(r.p_a <= r.p_none + 1e-12 && r.p_b <= r.p_none + 1e-12);
        prop_assert!(r.p_none <= 1.0);
    }

    #[test]
    fn coherent_states_respect_both_bounds(z in amplitudes(2.0), t in prop::array::uniform4(angle())) {
        let r = ch_functional(&CoherentAmplitudes::new(z).unwrap(), &AngleSettings::from_array(t).unwrap()).unwrap();
        prop_assert!(!r.verdict.is_violated());
        prop_assert!(r.f <= 1e-12 && r.lower_margin >= -1e-12);
    }

    #[test]
    fn beam_local_gaussians_factorize(r in prop::array::uniform4(-1.0f64..1.0), phi in angle(), a in angle(), b in angle()) {
        let local = PassiveUnitary::polarizer_pair(phi, 2.0 * phi);
        let g = GaussianState::squeezed_vacuum(&r).unwrap().apply_passive(&local).unwrap();
        let rates = g.rates(a, b).unwrap();
        prop_assert!((rates.p_ab * rates.p_none - rates.p_a * rates.p_b).abs() <= 1e-12);
    }

    #[test]
    fn decomposition_recomposes(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = PassiveUnitary::haar_random(n, &mut rng);
        let d = decompose_passive(&u);
        let err = (d.recompose() - u.matrix()).iter().fold(0.0f64, |m, x| m.max(x.norm()));
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn passive_action_on_coherent_states(z in amplitudes(0.5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = PassiveUnitary::haar_random(4, &mut rng);
        let psi = synthesize_coherent(&z, 12).unwrap();
        let moved = apply_passive(&psi, &u).unwrap();
        let direct = synthesize_coherent(&u.apply_to_amplitudes(&z).unwrap(), 12).unwrap();
        prop_assert!((moved.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
        // both are exact truncations of the same state
        prop_assert!((moved.inner(&direct).unwrap() - psi.norm_sqr()).norm() < 1e-12);
    }
}
