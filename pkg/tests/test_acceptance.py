"""Acceptance gate: one test per numbered criterion, pinned tolerances.

Each test prints as its own pass/fail line under ``pytest -v``.  Frozen
numeric anchors are first-run regression constants produced by this
implementation (see the repository README for how to regenerate them).
"""

import math
import time

import numpy as np
import pytest

from qkdrate import families, gpauli, keyrate, optimize, states, symmetry, verify


def _h2(q: float) -> float:
    return -q * math.log2(q) - (1 - q) * math.log2(1 - q)


def test_criterion_01_two_mub_closed_form():
    """Numeric minimization over the two-basis family matches the closed form.

    d in {2,3,5,7,11,13} x Q in {0.01..0.15}; tolerance 1e-7; < 10 s.
    """
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 5, 7, 11, 13):
        for k in range(1, 16):
            q = k / 100.0
            res = optimize.minimize_rate(families.family_2mubs(d, q))
            ref = (math.log2(d) + 2 * (1 - q) * math.log2(1 - q)
                   + 2 * q * math.log2(q / (d - 1)))
            worst = max(worst, abs(res.r_min - ref))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-7, f"worst closed-form gap {worst:.3e}"
    assert elapsed < 10.0, f"runtime {elapsed:.1f}s exceeds 10s"


def test_criterion_02_d_plus_1_mub_closed_form():
    """Direct evaluation of the all-bases family matches its closed form.

    Same grid; tolerance 1e-12; the d = 2 point equals the six-state rate;
    < 1 s.
    """
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 5, 7, 11, 13):
        for k in range(1, 16):
            q = k / 100.0
            res = optimize.minimize_rate(families.family_d1mubs(d, q))
            a = (d + 1) * q / d
            b = q / (d * (d - 1))
            ref = math.log2(d) + a * math.log2(b)
            if a < 1.0:
                ref += (1 - a) * math.log2(1 - a)
            worst = max(worst, abs(res.r_min - ref))
    # six-state anchor at d = 2
    for q in (0.01, 0.05, 0.1):
        six = 1 + (1 - 1.5 * q) * math.log2(1 - 1.5 * q) + 1.5 * q * math.log2(q / 2)
        worst = max(worst, abs(families.optimal_d1mubs(2, q).r_min - six))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-12, f"worst closed-form gap {worst:.3e}"
    assert elapsed < 1.0, f"runtime {elapsed:.2f}s exceeds 1s"


def test_criterion_03_engine_oracle_equivalence(rng):
    """Full density-matrix engine equals the spectrum closed form.

    100 random Bell-diagonal states per (d, basis set), d in {2,3,5};
    tolerance 1e-9; < 60 s.
    """
    t0 = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 5):
        for scheme in families.SCHEMES:
            proto = families.mub_protocol(d, scheme)
            for _ in range(100):
                u = states.random_bell_table(rng, d)
                cf = families.mub_rate_closed_form(u, proto.labels)
                rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
                worst = max(worst, abs(cf.r_bar - rep.r_bar))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-9, f"worst engine/closed-form gap {worst:.3e}"
    assert elapsed < 60.0, f"runtime {elapsed:.1f}s exceeds 60s"


def test_criterion_04_conditional_spectrum_oracle(rng):
    """Table-derived conditional spectra equal direct-projection spectra.

    All bases, all outcomes, d in {2,3,5,7}, 50 states each; 1e-10;
    outcome probabilities are 1/d (outcome independence).
    """
    worst = 0.0
    for d in (2, 3, 5, 7):
        labels = gpauli.mub_labels(d)
        for _ in range(50):
            u = states.random_bell_table(rng, d)
            rho = states.bell_diag_to_density(u)
            for label in labels:
                lam = np.sort(families.conditional_spectrum(u, label))[::-1]
                for k in range(d):
                    v = gpauli.mub_vector(d, label, k).conj()
                    p, rho_b = states.conditional_state(rho, v)
                    assert abs(p - 1.0 / d) < 1e-12
                    spec = np.sort(np.linalg.eigvalsh(rho_b))[::-1]
                    worst = max(worst, float(np.max(np.abs(lam - spec))))
    assert worst < 1e-10, f"worst spectrum gap {worst:.3e}"


def test_criterion_05_zero_rate_thresholds():
    """Bisection thresholds: 0.110028 (two-basis) and 0.126193 (all-bases)."""
    q2 = optimize.scheme_threshold(2, "2")
    q6 = optimize.scheme_threshold(2, "d+1")
    assert q2 == pytest.approx(0.110028, abs=1e-5)
    assert q6 == pytest.approx(0.126193, abs=1e-5)


def test_criterion_06_d_mub_family_consistency_at_d2():
    """family_dmubs(2, Q) optimum equals the two-basis closed form (1e-8)."""
    worst = 0.0
    for k in range(1, 15):
        q = k / 100.0
        res = optimize.minimize_rate(families.family_dmubs(2, q))
        ref = 1 + 2 * (1 - q) * math.log2(1 - q) + 2 * q * math.log2(q)
        worst = max(worst, abs(res.r_min - ref))
    assert worst < 1e-8, f"worst gap {worst:.3e}"


def test_criterion_07_same_attack_equivalences():
    """Signal sets sharing a symmetrized attack give equal optimized rates.

    Checks (all at equal Q, tolerance 1e-7): cube/icosahedron/dodecahedron
    vs the six-state closed form; ngon(3) and cuboid(pi/2) vs the two-basis
    closed form; cuboid(pi/4) vs the cube result.  All sub-checks are
    evaluated; failures are reported together.
    """
    failures = []
    qs = (0.05, 0.1)

    def check(label, got, want, tol=1e-7):
        if abs(got - want) > tol:
            failures.append(f"{label}: |{got:.10f} - {want:.10f}| = {abs(got - want):.3e}")

    for q in qs:
        six = families.optimal_d1mubs(2, q).r_min
        bb84 = families.optimal_2mubs(2, q).r_min
        for name in ("cube", "icosahedron", "dodecahedron"):
            res = optimize.optimize_protocol(families.qubit_protocol(name), q)
            check(f"{name} vs six-state form at Q={q}", res.r_min, six)
        res = optimize.optimize_protocol(families.qubit_protocol("ngon", n=3), q)
        check(f"ngon(3) vs two-basis form at Q={q}", res.r_min, bb84)
        res = optimize.optimize_protocol(
            families.qubit_protocol("cuboid", theta=math.pi / 2), q)
        check(f"cuboid(pi/2) vs two-basis form at Q={q}", res.r_min, bb84)
        cube = optimize.optimize_protocol(families.qubit_protocol("cube"), q)
        c4 = optimize.optimize_protocol(
            families.qubit_protocol("cuboid", theta=math.pi / 4), q)
        check(f"cuboid(pi/4) vs cube at Q={q}", c4.r_min, cube.r_min)

    assert not failures, "equivalence failures:\n" + "\n".join(failures)


def test_criterion_08_cuboid_distinct_optimal_attack():
    """cuboid(pi/6) at Q=0.05: optimum differs from the two-basis optimum.

    Parameter distance > 1e-4 and rate gap > 1e-6; the first-run optimizer
    output is frozen as a regression constant.
    """
    q = 0.05
    proto = families.qubit_protocol("cuboid", theta=math.pi / 6)
    res = optimize.optimize_protocol(proto, q)
    assert res.status == "converged"

    opt2 = families.optimal_2mubs(2, q)
    dist = math.dist((res.params["a"], res.params["b"], res.params["c"]),
                     (opt2.a, opt2.b, opt2.c))
    assert dist > 1e-4, f"parameter distance {dist:.3e}"
    assert abs(res.r_min - opt2.r_min) > 1e-6

    # frozen first-run values
    assert res.r_min == pytest.approx(0.23601338823386786, abs=1e-9)
    assert res.theta_star == pytest.approx(0.18693109537065805, abs=1e-8)
    assert res.params["a"] == pytest.approx(0.80933493187810146, abs=1e-8)
    assert res.params["b"] == pytest.approx(0.0018669863756202827, abs=1e-8)
    assert res.params["c"] == pytest.approx(0.18693109537065805, abs=1e-8)


def test_criterion_09_theorem_property_suites():
    """Randomized theorem suites: >= 200 seeded instances, zero violations."""
    results = verify.run_suite("theorems")
    for check in results:
        assert check.instances >= 200, f"{check.name}: only {check.instances} instances"
        assert check.violations == 0, (
            f"{check.name}: {check.violations} violations (worst {check.worst:.3e})")


def test_criterion_10_commutant_dimensions_and_projectors():
    """Commutant dimensions and projector equalities across groups."""
    for d in (2, 3, 5):
        assert len(symmetry.commutant_basis(symmetry.pauli_group(d))) == d * d
    o = symmetry.point_group("octahedral")
    i = symmetry.point_group("icosahedral")
    d2 = symmetry.point_group("dihedral", 2)
    d3 = symmetry.point_group("dihedral", 3)
    assert len(symmetry.commutant_basis(o)) == 2
    assert len(symmetry.commutant_basis(d2)) == 3
    assert len(symmetry.commutant_basis(d3)) == 3
    for ga, gb in ((d2, d3), (o, i)):
        assert symmetry.commutant_equal(ga, gb)
        pa = symmetry.commutant_projectors(ga)
        pb = symmetry.commutant_projectors(gb)
        assert len(pa) == len(pb)
        for x, y in zip(pa, pb):
            assert np.max(np.abs(x - y)) < 1e-8
