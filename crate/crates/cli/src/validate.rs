//! The `validate` subcommand.

use std::f64::consts::PI;
use std::process::ExitCode;

use anyhow::Result;
use bellsim_core::coherent::{classical_nonviolation_suite, fock_replica, SuiteOptions};
use bellsim_core::detection::{ch_functional_with_policy, AngleSettings};
use bellsim_core::fock::two_photon_state;
use bellsim_core::gaussian::{build_squeezed_thermal, gaussian_ch, squeezed_vacuum_fock, GaussianState, SqueezedThermalSpec};
use bellsim_core::NumericalPolicy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ExperimentConfig;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn classical(seed: u64, trials: u64, policy: &NumericalPolicy) -> Check {
    let suite = classical_nonviolation_suite(
        &SuiteOptions {
            seed,
            trials,
            amplitude_bound: 2.0,
        },
        policy,
    );
    let mut detail = format!(
        "{trials} trials, worst f {:.3e}, worst f + P(.,.) {:.3e}",
        suite.worst_f, suite.worst_lower_margin
    );
    if let Some(f) = suite.failures.first() {
        detail.push_str(&format!(
            "; {} failing trials, first at seed {} trial {} (f {:.3e}, f + P(.,.) {:.3e})",
            suite.failures.len(),
            f.seed,
            f.trial,
            f.report.f,
            f.report.lower_margin
        ));
    }
    Check {
        name: "classical mixtures",
        pass: suite.passed(),
        detail,
    }
}

fn replica(seed: u64, trials: u64, cutoff: usize, policy: &NumericalPolicy) -> Check {
    let result = fock_replica(
        &SuiteOptions {
            seed,
            trials,
            amplitude_bound: 0.5,
        },
        cutoff,
        policy,
    );
    match result {
        Ok(r) => Check {
            name: "fock replica",
            pass: r.max_deviation <= 1e-6,
            detail: format!(
                "{trials} trials at cutoff {cutoff}, max deviation {:.3e} (trial {})",
                r.max_deviation, r.worst_trial
            ),
        },
        Err(e) => Check {
            name: "fock replica",
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn cross_engine(seed: u64, cutoff: usize, policy: &NumericalPolicy) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for u in [0.1, 0.2, 0.3] {
        for v in [0.1, 0.2, 0.3] {
            let spec = SqueezedThermalSpec::new(u, v, 1.0)?;
            let g = build_squeezed_thermal(&spec)?;
            let psi = squeezed_vacuum_fock(&spec, cutoff)?;
            for _ in 0..10 {
                let a = AngleSettings::from_array([(); 4].map(|_| rng.random_range(0.0..PI)))?;
                let x = gaussian_ch(&g, &a, policy)?;
                let y = ch_functional_with_policy(&psi, &a, policy)?;
                let pairs = [
                    (x.rates, y.rates),
                    (x.rates_theta1_theta2p, y.rates_theta1_theta2p),
                    (x.rates_theta1p_theta2, y.rates_theta1p_theta2),
                    (x.rates_theta1p_theta2p, y.rates_theta1p_theta2p),
                ];
                for (p, q) in pairs {
                    for (s, t) in p.as_array().iter().zip(q.as_array()) {
                        worst = worst.max((s - t).abs());
                    }
                }
            }
        }
    }
    Ok(Check {
        name: "gaussian vs fock",
        pass: worst <= 1e-6,
        detail: format!("cutoff {cutoff}, max rate difference {worst:.3e}"),
    })
}

fn golden(policy: &NumericalPolicy) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for u in [0.25, 0.5, 1.0] {
        let p = GaussianState::squeezed_vacuum(&[u])?.vacuum_probability(&[0])?;
        worst = worst.max((p - 1.0 / u.cosh()).abs());
        let g = build_squeezed_thermal(&SqueezedThermalSpec::new(u, 0.0, 1.0)?)?;
        worst = worst.max((g.min_variance_eigenvalue() - (-2.0 * u).exp() / 2.0).abs());
    }
    for kappa in [0.5, 0.8, 1.0] {
        let p = GaussianState::thermal(1, kappa)?.vacuum_probability(&[0])?;
        worst = worst.max((p - 2.0 * kappa / (1.0 + kappa)).abs());
    }
    // P(t1,t2) = sin^2(t1 + t2)/4 for the two-photon state
    let f = ch_functional_with_policy(&two_photon_state(2)?, &AngleSettings::reference(), policy)?.f;
    worst = worst.max((f - (2f64.sqrt() - 1.0) / 4.0).abs());
    Ok(Check {
        name: "closed forms",
        pass: worst <= 1e-10,
        detail: format!("max deviation {worst:.3e}"),
    })
}

pub fn cmd_validate(
    config: ExperimentConfig,
    seed: u64,
    mut policy: NumericalPolicy,
    trials: Option<u64>,
    verdict_tol: Option<f64>,
) -> Result<ExitCode> {
    if let Some(t) = verdict_tol {
        policy.verdict_tol = t;
    }
    let file = config.validate;
    let trials = trials.or(file.and_then(|v| v.trials)).unwrap_or(1000);
    if trials == 0 {
        eprintln!("warning: zero trials requested, nothing validated");
        return Ok(ExitCode::SUCCESS);
    }
    let replica_trials = file.and_then(|v| v.replica_trials).unwrap_or(50).min(trials);
    let checks = [
        classical(seed, trials, &policy),
        replica(seed, replica_trials, config.cutoff.unwrap_or(16), &policy),
        cross_engine(seed, config.cutoff.unwrap_or(20), &policy)?,
        golden(&policy)?,
    ];
    let mut failed = 0;
    for c in &checks {
        if !c.pass {
            failed += 1;
        }
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if failed > 0 {
        eprintln!("validation failed: {failed} of {} checks (seed {seed})", checks.len());
        return Ok(ExitCode::FAILURE);
    }
    println!("all {} checks passed (seed {seed})", checks.len());
    Ok(ExitCode::SUCCESS)
}
