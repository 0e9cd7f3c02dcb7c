"""Smoke test for the bellsim Python module.

Build and install first:  pip install ./crates/python
"""

import math

import bellsim


def main():
    ref = bellsim.reference_angles()
    assert math.isclose(ref[0], math.pi / 8)
    assert math.isclose(bellsim.parse_angle("3pi/8"), 3 * math.pi / 8)

    two = bellsim.State.two_photon()
    report = two.ch()
    assert report.violated, report
    assert math.isclose(report.f, (math.sqrt(2) - 1) / 4, abs_tol=1e-12)
    best, lowest = two.scan(grid=16, refine=True)
    assert best.f >= report.f - 1e-12
    print("two-photon:", report, "scan:", best)

    coherent = bellsim.State.coherent([1, 0, 1, 0])
    fock = bellsim.State.coherent([1, 0, 1, 0], cutoff=16)
    for a, b in [(0.0, 0.0), (0.3, 1.2)]:
        for x, y in zip(coherent.rates(a, b), fock.rates(a, b)):
            assert abs(x - y) < 1e-6
    assert not coherent.ch().violated

    g = bellsim.State.squeezed_thermal(0.2, 0.1, 1.0)
    f = bellsim.State.squeezed_vacuum_fock(0.2, 0.1, cutoff=16)
    for x, y in zip(g.rates(0.4, 2.0), f.rates(0.4, 2.0)):
        assert abs(x - y) < 1e-6
    squeezed, m = g.is_squeezed()
    assert squeezed and m < 0.5

    sq = bellsim.State.squeezed_thermal(0.5, 0.0, 1.0)
    assert math.isclose(sq.is_squeezed()[1], math.exp(-1) / 2, rel_tol=1e-10)

    passed, worst_f, worst_lower, failing = bellsim.classical_nonviolation_suite(seed=1, trials=200)
    assert passed and not failing, (worst_f, worst_lower)

    rows = bellsim.sweep(u_start=0.0, u_stop=0.2, u_step=0.1, kappas=[1.0])
    assert len(rows) == 9
    print(f"classical suite worst f {worst_f:.3e}; sweep rows {len(rows)}")
    print("smoke test passed")


if __name__ == "__main__":
    main()
