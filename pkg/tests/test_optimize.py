import math

import numpy as np
import pytest

from qkdrate import families, optimize


def test_golden_section_parabola():
    x, fx, iters = optimize.golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0)
    assert abs(x - 0.3) < 1e-9
    assert fx < 1e-17
    assert iters <= 500


def test_golden_section_handles_two_valleys():
    # the coarse pre-scan must find the deeper left valley
    def f(x):
        return min((x - 0.1) ** 2, (x - 0.9) ** 2 + 0.01)

    x, fx, _ = optimize.golden_section(f, 0.0, 1.0)
    assert abs(x - 0.1) < 1e-6


def test_golden_section_tie_breaks_left():
    x, fx, iters = optimize.golden_section(lambda x: 1.0, 0.0, 1.0)
    assert x <= 1.0 / 63 + 1e-12  # first pre-scan point wins
    assert fx == 1.0


def test_golden_section_degenerate_interval():
    x, fx, iters = optimize.golden_section(lambda x: x * x, 0.25, 0.25)
    assert (x, fx, iters) == (0.25, 0.0625, 0)


def test_minimize_rate_fully_constrained():
    fam = families.family_d1mubs(3, 0.1)
    res = optimize.minimize_rate(fam)
    assert res.status == "converged"
    assert res.iterations == 1  # single direct evaluation
    assert res.theta_star is None
    assert res.r_min == pytest.approx(families.optimal_d1mubs(3, 0.1).r_min, abs=1e-14)


def test_minimize_rate_matches_closed_form_2mubs():
    res = optimize.minimize_rate(families.family_2mubs(2, 0.1))
    opt = families.optimal_2mubs(2, 0.1)
    assert res.status == "converged"
    assert res.r_min == pytest.approx(opt.r_min, abs=1e-9)
    assert res.params["a"] == pytest.approx(0.81, abs=1e-6)
    assert res.params["b"] == pytest.approx(0.09, abs=1e-6)
    assert res.params["c"] == pytest.approx(0.01, abs=1e-6)
    assert res.state is not None
    assert res.state.sum() == pytest.approx(1.0)


def test_optimizer_soundness_random_probes(rng):
    # converged minima are never beaten by random feasible probes
    runs = [
        families.scheme_family(2, "2", 0.1),
        families.scheme_family(3, "d", 0.05),
        families.symmetrized_family(families.qubit_protocol("bb84"), 0.1),
        families.symmetrized_family(
            families.qubit_protocol("cuboid", theta=np.pi / 6), 0.05),
    ]
    for fam in runs:
        res = optimize.minimize_rate(fam)
        assert res.status == "converged"
        for c in rng.uniform(fam.lo, fam.hi, size=1000):
            assert fam.rate(float(c)) >= res.r_min - 1e-9


def test_optimize_scheme_methods_agree():
    for d, scheme, q in ((2, "2", 0.1), (3, "d+1", 0.05), (5, "2", 0.12)):
        analytic = optimize.optimize_scheme(d, scheme, q, method="analytic")
        numeric = optimize.optimize_scheme(d, scheme, q, method="numeric")
        engine = optimize.optimize_scheme(d, scheme, q, method="engine")
        assert numeric.r_min == pytest.approx(analytic.r_min, abs=1e-7)
        assert engine.r_min == pytest.approx(numeric.r_min, abs=1e-9)
    with pytest.raises(ValueError):
        optimize.optimize_scheme(3, "d", 0.05, method="analytic")


def test_optimize_scheme_infeasible():
    res = optimize.optimize_scheme(2, "d+1", 0.8)
    assert res.status == "infeasible"
    assert math.isnan(res.r_min)
    assert res.params == {}
    assert res.state is None


def test_zero_error_rate_is_boundary_run():
    res = optimize.optimize_scheme(2, "2", 0.0)
    assert res.r_min == pytest.approx(1.0)
    assert res.status == "boundary"  # the free interval collapses to a point


def test_dmubs_interior_optimum():
    # the d=3 free-parameter optimum is strictly inside the interval
    fam = families.scheme_family(3, "d", 0.05)
    res = optimize.minimize_rate(fam)
    assert res.status == "converged"
    assert res.r_min == pytest.approx(1.0027587377299771, abs=1e-9)
    assert res.r_min < fam.rate(fam.lo) - 1e-3
    assert res.r_min < fam.rate(fam.hi) - 1e-3


def test_threshold_q_bisection():
    def curve(q):
        if q == 0:
            return 1.0
        h = -q * math.log2(q) - (1 - q) * math.log2(1 - q)
        return 1.0 - 2.0 * h

    assert optimize.threshold_q(curve) == pytest.approx(0.11002786443835955, abs=1e-7)
    with pytest.raises(ValueError):
        optimize.threshold_q(lambda q: 1.0)  # no sign change


def test_scheme_thresholds_pinned():
    assert optimize.scheme_threshold(2, "2") == pytest.approx(0.110028, abs=1e-5)
    assert optimize.scheme_threshold(2, "d+1") == pytest.approx(0.126193, abs=1e-5)
    t3 = optimize.scheme_threshold(3, "d+1", method="analytic")
    t13 = optimize.scheme_threshold(13, "d+1", method="analytic")
    assert t3 == pytest.approx(0.191391, abs=1e-5)
    assert t13 > t3 > optimize.scheme_threshold(2, "d+1")


def test_protocol_thresholds_match_scheme_twins():
    ngon3 = optimize.protocol_threshold(families.qubit_protocol("ngon", n=3))
    assert ngon3 == pytest.approx(optimize.scheme_threshold(2, "2"), abs=1e-6)
    six = optimize.protocol_threshold(families.qubit_protocol("sixstate"))
    assert six == pytest.approx(optimize.scheme_threshold(2, "d+1"), abs=1e-6)


def test_scheme_q_limit():
    assert optimize.scheme_q_limit(2, "2") == pytest.approx(0.5)
    assert optimize.scheme_q_limit(3, "d") == pytest.approx(2.0 / 3.0)
    assert optimize.scheme_q_limit(2, "d+1") == pytest.approx(2.0 / 3.0, abs=1e-8)


def test_sweep_rows_ordering_and_infeasible_points():
    rows = optimize.sweep_rows({"scheme": "d+1", "d": 2}, [0.7, 0.0, 0.05])
    assert [r["Q"] for r in rows] == [0.0, 0.05, 0.7]
    assert rows[0]["rate"] == pytest.approx(1.0)
    assert rows[1]["status"] in ("converged", "boundary")
    assert rows[2]["status"] == "infeasible"
    assert math.isnan(rows[2]["rate"])
    assert rows[2]["a"] is None


def test_sweep_rows_protocol_selector():
    proto = families.qubit_protocol("ngon", n=4)
    rows = optimize.sweep_rows({"protocol": proto}, [0.02, 0.06])
    assert all(r["scheme"] == "ngon4" and r["d"] == 2 for r in rows)
    assert rows[0]["rate"] > rows[1]["rate"]
