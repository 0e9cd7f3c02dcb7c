//! Turns a state specification into something that yields coincidence rates.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use bellsim_core::coherent::{ClassicalMixture, CoherentAmplitudes};
use bellsim_core::detection::RateSource;
use bellsim_core::fock::{synthesize_coherent_with_policy, two_photon_state, FockBasis, OccupationState};
use bellsim_core::gaussian::{build_squeezed_thermal, squeezed_vacuum_fock, GaussianState, SqueezedThermalSpec};
use bellsim_core::NumericalPolicy;
use num_complex::Complex64;
use serde::Deserialize;

use crate::config::{ComplexValue, Engine, StateSpec};

pub type Source = Box<dyn RateSource + Sync>;

/// Pure Fock state stored as JSON.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub modes: usize,
    pub cutoff: usize,
    pub amplitudes: Vec<StateFileEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFileEntry {
    pub occupation: Vec<u16>,
    pub amplitude: ComplexValue,
}

pub fn load_state_file(path: &Path, policy: &NumericalPolicy) -> Result<OccupationState> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read state file {}", path.display()))?;
    let file: StateFile =
        serde_json::from_str(&text).with_context(|| format!("invalid state file {}", path.display()))?;
    let basis = Arc::new(FockBasis::with_policy(file.modes, file.cutoff, policy)?);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dimension()];
    for entry in &file.amplitudes {
        let i = basis
            .index_of(&entry.occupation)
            .with_context(|| format!("occupation {:?} is outside the basis", entry.occupation))?;
        amplitudes[i] += entry.amplitude.value();
    }
    let state = OccupationState::from_amplitudes(basis, amplitudes)?;
    if !state.is_normalized(policy) {
        bail!("state in {} has norm squared {}, expected 1", path.display(), state.norm_sqr());
    }
    Ok(state)
}

fn amplitudes(z: &[ComplexValue; 4]) -> [Complex64; 4] {
    z.map(ComplexValue::value)
}

fn mixture(spec: &StateSpec) -> Result<ClassicalMixture> {
    Ok(match spec {
        StateSpec::Vacuum {} => ClassicalMixture::single(CoherentAmplitudes::from_real([0.0; 4])),
        StateSpec::Coherent { z } => ClassicalMixture::single(CoherentAmplitudes::new(amplitudes(z))?),
        StateSpec::Mixture { components } => ClassicalMixture::new(
            components
                .iter()
                .map(|c| Ok((c.weight, CoherentAmplitudes::new(amplitudes(&c.z))?)))
                .collect::<Result<_>>()?,
        )?,
        other => bail!("the analytic engine handles coherent states and their mixtures, not {}", other.name()),
    })
}

pub fn default_cutoff(spec: &StateSpec) -> usize {
    match spec {
        StateSpec::TwoPhoton {} => 2,
        StateSpec::Vacuum {} => 1,
        StateSpec::Coherent { .. } | StateSpec::Mixture { .. } => 16,
        StateSpec::SqueezedThermal { .. } => 20,
        StateSpec::File { .. } => 0,
    }
}

fn fock(spec: &StateSpec, cutoff: Option<usize>, policy: &NumericalPolicy) -> Result<Source> {
    let cutoff = cutoff.unwrap_or_else(|| default_cutoff(spec));
    Ok(match spec {
        StateSpec::TwoPhoton {} => {
            if cutoff < 2 {
                bail!("the two-photon state needs cutoff >= 2");
            }
            Box::new(two_photon_state(cutoff)?)
        }
        StateSpec::Vacuum {} => Box::new(OccupationState::vacuum(Arc::new(FockBasis::with_policy(4, cutoff, policy)?))),
        StateSpec::Coherent { z } => Box::new(synthesize_coherent_with_policy(&amplitudes(z), cutoff, policy)?),
        StateSpec::Mixture { .. } => Box::new(mixture(spec)?.to_fock(cutoff, policy)?),
        StateSpec::SqueezedThermal { u, v, kappa } => {
            Box::new(squeezed_vacuum_fock(&SqueezedThermalSpec::new(*u, *v, *kappa)?, cutoff)?)
        }
        StateSpec::File { path } => Box::new(load_state_file(path, policy)?),
    })
}

fn gaussian(spec: &StateSpec) -> Result<Source> {
    Ok(match spec {
        StateSpec::Vacuum {} => Box::new(GaussianState::vacuum(4)),
        StateSpec::SqueezedThermal { u, v, kappa } => {
            Box::new(build_squeezed_thermal(&SqueezedThermalSpec::new(*u, *v, *kappa)?)?)
        }
        other => bail!("the gaussian engine handles centered Gaussian states, not {}", other.name()),
    })
}

/// One rate source per engine, labelled by engine name.
pub fn prepare(
    spec: &StateSpec,
    engine: Engine,
    cutoff: Option<usize>,
    policy: &NumericalPolicy,
) -> Result<Vec<(&'static str, Source)>> {
    let single = |e: Engine| -> Result<(&'static str, Source)> {
        Ok(match e {
            Engine::Fock => ("fock", fock(spec, cutoff, policy)?),
            Engine::Gaussian => ("gaussian", gaussian(spec)?),
            Engine::Analytic => ("analytic", Box::new(mixture(spec)?)),
            Engine::Both => unreachable!(),
        })
    };
    match engine {
        Engine::Both => {
            let native = spec.native_engine();
            if native == Engine::Fock {
                bail!("{} has no representation outside the Fock engine", spec.name());
            }
            Ok(vec![single(native)?, single(Engine::Fock)?])
        }
        e => Ok(vec![single(e)?]),
    }
}
