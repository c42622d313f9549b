import io
import json

import numpy as np
import pytest

from qkdrate import families, gpauli, source, states


def _bb84_ensemble():
    proto = families.qubit_protocol("bb84")
    return source.uniform_basis_ensemble(proto.bases)


def test_uniform_basis_ensemble_counts():
    ens = _bb84_ensemble()
    assert len(ens.states) == 4
    assert np.allclose(ens.probs, 0.25)
    assert ens.d == 2


def test_signal_ensemble_validation():
    with pytest.raises(ValueError):
        source.SignalEnsemble(states=[np.array([1.0, 0.0])], probs=[0.5, 0.5])
    with pytest.raises(ValueError):
        source.SignalEnsemble(states=[np.array([2.0, 0.0])], probs=[1.0])
    with pytest.raises(ValueError):
        source.SignalEnsemble(
            states=[np.array([1.0, 0.0]), np.array([0.0, 1.0])], probs=[0.9, 0.2])


def test_build_source_maximally_mixed():
    ens = _bb84_ensemble()
    src = source.build_source(ens)
    assert src.full_rank
    assert np.max(np.abs(src.rho_a - np.eye(2) / 2)) < 1e-12
    # the compressed source state is the maximally entangled state
    phi = gpauli.bell_vector(2, 0, 0)
    assert np.max(np.abs(src.phi - phi)) < 1e-12


def test_alice_povm_naimark_identity(rng):
    # Tr_A[(A_x (x) 1) |phi><phi|] = p(x) |phi_x><phi_x| for random ensembles
    for d in (2, 3):
        vecs = []
        for _ in range(2):
            q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
            vecs.extend(q[:, k] for k in range(d))
        probs = rng.uniform(0.5, 1.5, size=len(vecs))
        probs = probs / probs.sum()
        ens = source.SignalEnsemble(states=vecs, probs=probs)
        src = source.build_source(ens)
        povm = source.alice_povm(ens, src)
        source.check_povm(povm, d, tol=1e-9)
        rho = np.outer(src.phi, src.phi.conj())
        for a, v, p in zip(povm, ens.states, ens.probs):
            joint = np.kron(a, np.eye(d)) @ rho
            marg = states.partial_trace(joint, (d, d), keep=1)
            target = p * np.outer(v, v.conj())
            assert np.max(np.abs(marg - target)) < 1e-9


def test_basis_sifting_plan_layout():
    plan = source.basis_sifting_plan(3, 2)
    assert plan.labels_a == [0, 0, 1, 1, 2, 2]
    assert plan.labels_b == plan.labels_a
    assert plan.kept == [0, 1, 2]


def test_sift_on_bell_diagonal_state():
    proto = families.mub_protocol(2, "2")
    u = np.array([[0.7, 0.1], [0.1, 0.1]])
    rho = states.bell_diag_to_density(u)
    ens = source.uniform_basis_ensemble(proto.bases)
    src = source.build_source(ens)
    povm_a = source.alice_povm(ens, src)
    povm_b = [np.outer(b[:, k], b[:, k].conj()) / 2
              for b in proto.bases for k in range(2)]
    plan = source.basis_sifting_plan(2, 2)
    branches, discarded = source.sift(rho, povm_a, povm_b, plan)
    assert len(branches) == 2
    assert discarded == pytest.approx(0.5)  # half the rounds disagree on basis
    for br in branches:
        assert br.p == pytest.approx(0.5)
        assert np.real(np.trace(br.rho)) == pytest.approx(1.0)
        # per-branch measurements are complete rank-one projectors
        source.check_povm(br.povm_a, 2, tol=1e-9)
        source.check_povm(br.povm_b, 2, tol=1e-9)


def test_gstar_invariance_positive_and_negative():
    proto = families.qubit_protocol("bb84")
    ens = source.uniform_basis_ensemble(proto.bases)
    rep = source.check_gstar_invariance(ens, proto.group)
    assert rep.ok
    assert rep.max_povm_mismatch < 1e-10

    # biased basis choice breaks the invariance
    vecs = [proto.bases[i][:, k] for i in range(2) for k in range(2)]
    biased = source.SignalEnsemble(states=vecs, probs=[0.4, 0.4, 0.1, 0.1])
    rep = source.check_gstar_invariance(biased, proto.group)
    assert not rep.ok
    assert rep.violations


def test_gstar_invariance_six_state():
    proto = families.qubit_protocol("sixstate")
    ens = source.uniform_basis_ensemble(proto.bases)
    assert source.check_gstar_invariance(ens, proto.group).ok


def _bb84_json_dict():
    s = 1.0 / np.sqrt(2.0)
    return {
        "d": 2,
        "bases": [
            [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
            [[[s, 0], [s, 0]], [[s, 0], [-s, 0]]],
        ],
        "sifting": "basis",
    }


def test_load_protocol_json_paths(tmp_path):
    data = _bb84_json_dict()
    # dict, file object, and path inputs all work
    for src_obj in (data, io.StringIO(json.dumps(data)),
                    _write(tmp_path / "p.json", data)):
        d, bases, probs, sifting = source.load_protocol_json(src_obj)
        assert d == 2 and sifting == "basis" and probs is None
        assert len(bases) == 2
        assert np.max(np.abs(bases[0] - np.eye(2))) < 1e-12


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_load_protocol_json_validation():
    bad = _bb84_json_dict()
    bad["bases"][1][1] = [[1, 0], [0, 0]]  # duplicate vector: not orthonormal
    with pytest.raises(ValueError):
        source.load_protocol_json(bad)
    other = _bb84_json_dict()
    other["sifting"] = "key-map"
    with pytest.raises(ValueError):
        source.load_protocol_json(other)
