//! Python bindings: `import bellsim`.

use bellsim_core::coherent::{
    classical_nonviolation_suite as run_suite, ClassicalMixture, CoherentAmplitudes, SuiteOptions,
};
use bellsim_core::detection::{
    angle_scan, ch_functional_with_policy, parse_angle as parse, AngleSettings, CoincidenceReport, RateSource,
    ScanOptions,
};
use bellsim_core::fock::{synthesize_coherent, two_photon_state, FockBasis, OccupationState};
use bellsim_core::gaussian::{build_squeezed_thermal, squeezed_vacuum_fock, GaussianState, SqueezedThermalSpec};
use bellsim_core::sweep::{run_sweep, Scenario, SweepSpec};
use bellsim_core::NumericalPolicy;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::sync::Arc;

fn err(e: bellsim_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn angles_from(a: Option<(f64, f64, f64, f64)>) -> PyResult<AngleSettings> {
    match a {
        None => Ok(AngleSettings::reference()),
        Some((t1, t2, t1p, t2p)) => AngleSettings::new(t1, t2, t1p, t2p).map_err(err),
    }
}

type Rates = (f64, f64, f64, f64);

/// `(u, v, kappa, f, neg_p_both, violated)`
type SweepRow = (f64, f64, f64, f64, f64, bool);

/// Clauser-Horne report at one set of angles.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Report {
    /// `(theta1, theta2, theta1', theta2')`
    angles: (f64, f64, f64, f64),
    /// `(P(t1,t2), P(t1,.), P(.,t2), P(.,.))` at `(theta1, theta2)`.
    rates: Rates,
    rates_theta1_theta2p: Rates,
    rates_theta1p_theta2: Rates,
    rates_theta1p_theta2p: Rates,
    f: f64,
    p_both_removed: f64,
    lower_margin: f64,
    tail_error: f64,
    verdict: String,
    violated: bool,
}

impl From<&CoincidenceReport> for Report {
    fn from(r: &CoincidenceReport) -> Self {
        let t = |x: &bellsim_core::detection::CoincidenceRates| (x.p_ab, x.p_a, x.p_b, x.p_none);
        let a = r.angles;
        Self {
            angles: (a.theta1, a.theta2, a.theta1p, a.theta2p),
            rates: t(&r.rates),
            rates_theta1_theta2p: t(&r.rates_theta1_theta2p),
            rates_theta1p_theta2: t(&r.rates_theta1p_theta2),
            rates_theta1p_theta2p: t(&r.rates_theta1p_theta2p),
            f: r.f,
            p_both_removed: r.p_both_removed,
            lower_margin: r.lower_margin,
            tail_error: r.tail_error,
            verdict: r.verdict.as_str().to_string(),
            violated: r.verdict.is_violated(),
        }
    }
}

#[pymethods]
impl Report {
    fn __repr__(&self) -> String {
        format!("Report(f={:.6e}, p_both_removed={:.6e}, verdict={:?})", self.f, self.p_both_removed, self.verdict)
    }
}

enum Inner {
    Fock(OccupationState),
    Gaussian(GaussianState),
    Analytic(ClassicalMixture),
}

impl Inner {
    fn source(&self) -> &(dyn RateSource + Sync) {
        match self {
            Inner::Fock(s) => s,
            Inner::Gaussian(s) => s,
            Inner::Analytic(s) => s,
        }
    }
}

/// A four-mode state on one of the three engines.
#[pyclass(frozen)]
pub struct State {
    inner: Inner,
}

fn amplitudes4(z: Vec<Complex64>) -> PyResult<[Complex64; 4]> {
    z.try_into()
        .map_err(|v: Vec<Complex64>| PyValueError::new_err(format!("expected 4 amplitudes, got {}", v.len())))
}

#[pymethods]
impl State {
    /// `(a1+ - a3+)(a4+ - a2+)|0>/2` on the Fock engine.
    #[staticmethod]
    #[pyo3(signature = (cutoff = 2))]
    fn two_photon(cutoff: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Inner::Fock(two_photon_state(cutoff).map_err(err)?),
        })
    }

    /// Coherent state; closed forms unless a Fock `cutoff` is given.
    #[staticmethod]
    #[pyo3(signature = (z, cutoff = None))]
    fn coherent(z: Vec<Complex64>, cutoff: Option<usize>) -> PyResult<Self> {
        let z = amplitudes4(z)?;
        let inner = match cutoff {
            Some(c) => Inner::Fock(synthesize_coherent(&z, c).map_err(err)?),
            None => Inner::Analytic(ClassicalMixture::single(CoherentAmplitudes::new(z).map_err(err)?)),
        };
        Ok(Self { inner })
    }

    /// Positive mixture of coherent states given as `[(weight, z), ...]`.
    #[staticmethod]
    fn mixture(components: Vec<(f64, Vec<Complex64>)>) -> PyResult<Self> {
        let components = components
            .into_iter()
            .map(|(w, z)| Ok((w, CoherentAmplitudes::new(amplitudes4(z)?).map_err(err)?)))
            .collect::<PyResult<_>>()?;
        Ok(Self {
            inner: Inner::Analytic(ClassicalMixture::new(components).map_err(err)?),
        })
    }

    /// Squeezed thermal state on the Gaussian engine.
    #[staticmethod]
    fn squeezed_thermal(u: f64, v: f64, kappa: f64) -> PyResult<Self> {
        let spec = SqueezedThermalSpec::new(u, v, kappa).map_err(err)?;
        Ok(Self {
            inner: Inner::Gaussian(build_squeezed_thermal(&spec).map_err(err)?),
        })
    }

    /// The `kappa = 1` squeezed state on the Fock engine.
    #[staticmethod]
    #[pyo3(signature = (u, v, cutoff = 20))]
    fn squeezed_vacuum_fock(u: f64, v: f64, cutoff: usize) -> PyResult<Self> {
        let spec = SqueezedThermalSpec::new(u, v, 1.0).map_err(err)?;
        Ok(Self {
            inner: Inner::Fock(squeezed_vacuum_fock(&spec, cutoff).map_err(err)?),
        })
    }

    /// Four-mode vacuum on the Gaussian engine.
    #[staticmethod]
    fn vacuum() -> Self {
        Self {
            inner: Inner::Gaussian(GaussianState::vacuum(4)),
        }
    }

    /// Pure Fock state from `[(occupation, amplitude), ...]`.
    #[staticmethod]
    fn from_amplitudes(modes: usize, cutoff: usize, entries: Vec<(Vec<u16>, Complex64)>) -> PyResult<Self> {
        let basis = Arc::new(FockBasis::new(modes, cutoff).map_err(err)?);
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        for (occ, a) in entries {
            let i = basis
                .index_of(&occ)
                .ok_or_else(|| PyValueError::new_err(format!("occupation {occ:?} outside the basis")))?;
            amps[i] += a;
        }
        let state = OccupationState::from_amplitudes(basis, amps).map_err(err)?;
        if !state.is_normalized(&NumericalPolicy::default()) {
            return Err(PyValueError::new_err(format!("norm squared is {}", state.norm_sqr())));
        }
        Ok(Self {
            inner: Inner::Fock(state),
        })
    }

    /// `"fock"`, `"gaussian"` or `"analytic"`.
    #[getter]
    fn engine(&self) -> &'static str {
        match self.inner {
            Inner::Fock(_) => "fock",
            Inner::Gaussian(_) => "gaussian",
            Inner::Analytic(_) => "analytic",
        }
    }

    /// Fock-space dimension, `None` off the Fock engine.
    #[getter]
    fn dimension(&self) -> Option<usize> {
        match &self.inner {
            Inner::Fock(s) => Some(s.basis().dimension()),
            _ => None,
        }
    }

    #[getter]
    fn tail_weight(&self) -> f64 {
        self.inner.source().tail_error()
    }

    /// `(P(t1,t2), P(t1,.), P(.,t2), P(.,.))`.
    fn rates(&self, theta1: f64, theta2: f64) -> PyResult<Rates> {
        let r = self.inner.source().rates(theta1, theta2).map_err(err)?;
        Ok((r.p_ab, r.p_a, r.p_b, r.p_none))
    }

    /// Report at `angles`, by default `(pi/8, pi/4, 3pi/8, 0)`.
    #[pyo3(signature = (angles = None))]
    fn ch(&self, angles: Option<(f64, f64, f64, f64)>) -> PyResult<Report> {
        let a = angles_from(angles)?;
        let r = ch_functional_with_policy(self.inner.source(), &a, &NumericalPolicy::default()).map_err(err)?;
        Ok(Report::from(&r))
    }

    /// Reports maximising `f` and minimising `f + P(.,.)` over all angles.
    #[pyo3(signature = (grid = 16, refine = true))]
    fn scan(&self, py: Python<'_>, grid: usize, refine: bool) -> PyResult<(Report, Report)> {
        let options = ScanOptions {
            grid_density: grid,
            refine,
        };
        let source = self.inner.source();
        let r = py
            .detach(|| angle_scan(source, &options, &NumericalPolicy::default()))
            .map_err(err)?;
        Ok((Report::from(&r.max_f), Report::from(&r.min_lower_margin)))
    }

    /// Probability that every listed mode is empty.
    fn vacuum_probability(&self, modes: Vec<usize>) -> PyResult<f64> {
        match &self.inner {
            Inner::Fock(s) => s.vacuum_probability(&modes).map_err(err),
            Inner::Gaussian(g) => g.vacuum_probability(&modes).map_err(err),
            Inner::Analytic(_) => Err(PyValueError::new_err("not available for analytic mixtures")),
        }
    }

    /// Variance matrix in `(q1..q4, p1..p4)` order (Gaussian engine only).
    fn variance_matrix(&self) -> PyResult<Vec<Vec<f64>>> {
        match &self.inner {
            Inner::Gaussian(g) => {
                let v = g.variance_matrix();
                Ok((0..v.nrows()).map(|i| v.row(i).iter().copied().collect()).collect())
            }
            _ => Err(PyValueError::new_err("variance matrices exist on the gaussian engine only")),
        }
    }

    /// `(squeezed, smallest eigenvalue of V)` (Gaussian engine only).
    fn is_squeezed(&self) -> PyResult<(bool, f64)> {
        match &self.inner {
            Inner::Gaussian(g) => Ok(g.is_squeezed()),
            _ => Err(PyValueError::new_err("squeezing is checked on the gaussian engine only")),
        }
    }

    fn __repr__(&self) -> String {
        format!("State(engine={:?})", self.engine())
    }
}

/// Radians from text such as `"3pi/8"`.
#[pyfunction]
fn parse_angle(text: &str) -> PyResult<f64> {
    parse(text).map_err(err)
}

#[pyfunction]
fn reference_angles() -> (f64, f64, f64, f64) {
    let a = AngleSettings::reference();
    (a.theta1, a.theta2, a.theta1p, a.theta2p)
}

/// Returns `(passed, worst_f, worst_lower_margin, failing_trials)`.
#[pyfunction]
#[pyo3(signature = (seed = 0, trials = 1000, amplitude_bound = 2.0))]
fn classical_nonviolation_suite(
    py: Python<'_>,
    seed: u64,
    trials: u64,
    amplitude_bound: f64,
) -> (bool, f64, f64, Vec<u64>) {
    let options = SuiteOptions {
        seed,
        trials,
        amplitude_bound,
    };
    let r = py.detach(|| run_suite(&options, &NumericalPolicy::default()));
    (
        r.passed(),
        r.worst_f,
        r.worst_lower_margin,
        r.failures.iter().map(|f| f.trial).collect(),
    )
}

/// Rows `(u, v, kappa, f, neg_p_both, violated)` of a squeezed thermal sweep.
#[pyfunction]
#[pyo3(signature = (u_start = 0.0, u_stop = 1.2, u_step = 0.02, scenarios = None, kappas = None, angles = None))]
fn sweep(
    py: Python<'_>,
    u_start: f64,
    u_stop: f64,
    u_step: f64,
    scenarios: Option<Vec<String>>,
    kappas: Option<Vec<f64>>,
    angles: Option<(f64, f64, f64, f64)>,
) -> PyResult<Vec<SweepRow>> {
    let defaults = SweepSpec::default();
    let scenarios = match scenarios {
        None => defaults.scenarios,
        Some(names) => names
            .iter()
            .map(|n| match n.as_str() {
                "equal" => Ok(Scenario::Equal),
                "zero" => Ok(Scenario::Zero),
                "opposite" => Ok(Scenario::Opposite),
                other => Err(PyValueError::new_err(format!("unknown scenario {other:?}"))),
            })
            .collect::<PyResult<_>>()?,
    };
    let spec = SweepSpec {
        u_start,
        u_stop,
        u_step,
        scenarios,
        kappas: kappas.unwrap_or(defaults.kappas),
    };
    let a = angles_from(angles)?;
    let rows = py
        .detach(|| run_sweep(&spec, &a, &NumericalPolicy::default()))
        .map_err(err)?;
    Ok(rows
        .iter()
        .map(|r| (r.u, r.v, r.kappa, r.f, r.neg_p_both, r.violated()))
        .collect())
}

#[pymodule]
pub fn bellsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<State>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(parse_angle, m)?)?;
    m.add_function(wrap_pyfunction!(reference_angles, m)?)?;
    m.add_function(wrap_pyfunction!(classical_nonviolation_suite, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
