import math

import numpy as np
import pytest

from qkdrate import families, gpauli, keyrate, states


def _z_povm(d=2):
    return [np.outer(np.eye(d)[:, i], np.eye(d)[:, i]) for i in range(d)]


def test_joint_distribution_bell_state():
    phi = gpauli.bell_vector(2, 0, 0)
    rho = np.outer(phi, phi.conj())
    j = keyrate.joint_distribution(rho, _z_povm(), _z_povm())
    assert np.max(np.abs(j - np.diag([0.5, 0.5]))) < 1e-12


def test_joint_distribution_product_state():
    j = keyrate.joint_distribution(np.eye(4) / 4, _z_povm(), _z_povm())
    assert np.max(np.abs(j - 0.25)) < 1e-12


def test_mutual_information_values():
    assert keyrate.mutual_information(np.diag([0.5, 0.5])) == pytest.approx(1.0)
    assert keyrate.mutual_information(np.full((3, 3), 1 / 9)) == pytest.approx(0.0, abs=1e-12)
    h2 = -0.2 * math.log2(0.2) - 0.8 * math.log2(0.8)
    bsc = np.array([[0.4, 0.1], [0.1, 0.4]])
    assert keyrate.mutual_information(bsc) == pytest.approx(1.0 - h2)
    for d in (3, 5):
        assert keyrate.mutual_information(np.eye(d) / d) == pytest.approx(math.log2(d))


def test_holevo_values():
    # pure product state leaks nothing
    psi = np.kron(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    assert keyrate.holevo_AB(np.outer(psi, psi.conj()), _z_povm()) == pytest.approx(0.0, abs=1e-12)
    # maximally mixed two-qubit state: S(AB) = 2, each conditional has S = 1
    assert keyrate.holevo_AB(np.eye(4) / 4, _z_povm()) == pytest.approx(1.0)


def test_holevo_rejects_higher_rank_elements():
    rho = np.eye(4) / 4
    with pytest.raises(keyrate.UnsupportedMeasurementError):
        keyrate.holevo_AB(rho, [np.eye(2) * 0.5, np.eye(2) * 0.5])


def test_rate_report_identities_and_validate(rng):
    for d, scheme in ((2, "2"), (3, "d+1"), (5, "d")):
        proto = families.mub_protocol(d, scheme)
        u = states.random_bell_table(rng, d)
        rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
        rep.validate()
        assert rep.r_bar == pytest.approx(rep.i_bar - rep.chi_bar, abs=1e-12)
        assert rep.f_b == pytest.approx(1.0 - rep.q, abs=1e-12)
        assert len(rep.branches) == len(proto.labels)
        assert sum(row[1] for row in rep.branches) == pytest.approx(1.0)


def test_engine_matches_closed_form_spot(rng):
    # the dedicated acceptance test covers the full grid; spot-check here
    for d in (2, 3):
        for scheme in families.SCHEMES:
            proto = families.mub_protocol(d, scheme)
            u = states.random_bell_table(rng, d)
            cf = families.mub_rate_closed_form(u, proto.labels)
            rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
            assert rep.r_bar == pytest.approx(cf.r_bar, abs=1e-10)
            assert rep.q == pytest.approx(cf.q, abs=1e-12)
            assert rep.i_bar == pytest.approx(cf.i_bar, abs=1e-10)
            assert rep.chi_bar == pytest.approx(cf.chi_bar, abs=1e-10)


def test_frozen_bb84_point():
    # r_bar of the canonical 2-basis qubit table (0.81, 0.09; 0.09, 0.01)
    u = np.array([[0.81, 0.09], [0.09, 0.01]])
    proto = families.mub_protocol(2, "2")
    rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
    assert rep.q == pytest.approx(0.1, abs=1e-12)
    assert rep.r_bar == pytest.approx(0.06200881282143789, abs=1e-11)
    # closed form at the same point
    cf = families.mub_rate_closed_form(u, proto.labels)
    assert cf.r_bar == pytest.approx(rep.r_bar, abs=1e-12)


def test_perfect_state_gives_log2d_rate():
    for d in (2, 3, 5):
        u = np.zeros((d, d))
        u[0, 0] = 1.0
        for scheme in families.SCHEMES:
            proto = families.mub_protocol(d, scheme)
            rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
            assert rep.q == pytest.approx(0.0, abs=1e-12)
            assert rep.r_bar == pytest.approx(math.log2(d), abs=1e-10)


def test_sifted_rate_discards_mismatched_bases():
    proto = families.mub_protocol(2, "d+1")
    u = np.array([[0.85, 0.05], [0.05, 0.05]])
    rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
    # three bases: 2/3 of rounds use different bases
    assert rep.discarded == pytest.approx(2.0 / 3.0, abs=1e-12)
