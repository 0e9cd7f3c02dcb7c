use pyo3::ffi::c_str;
use bellsim::bellsim as bellsim_module;
use pyo3::prelude::*;

#[test]
fn module_runs_inside_an_embedded_interpreter() {
    pyo3::append_to_inittab!(bellsim_module);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import math
import bellsim

r = bellsim.State.two_photon().ch()
assert r.violated and r.verdict == "violated"
assert abs(r.f - (math.sqrt(2) - 1) / 4) < 1e-12

c = bellsim.State.coherent([1, 0, 1, 0])
assert not c.ch(bellsim.reference_angles()).violated
assert c.engine == "analytic" and c.dimension is None

v = bellsim.State.vacuum()
assert v.vacuum_probability([0, 1, 2, 3]) == 1.0
assert v.variance_matrix()[0][0] == 0.5

try:
    bellsim.State.squeezed_thermal(0.1, 0.1, 0.0)
    raise AssertionError("kappa = 0 accepted")
except ValueError:
    pass
try:
    bellsim.State.coherent([1, 0, 1])
    raise AssertionError("three amplitudes accepted")
except ValueError:
    pass
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
