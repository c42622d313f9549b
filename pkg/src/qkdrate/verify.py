"""Seeded property suites behind the ``verify`` CLI command.

Each suite runs deterministic randomized checks (seed from the QKD_SEED
environment variable, default 0xC0FFEE) and reports instance/violation
counts; suites cover the operator toolbox, the rate engine against its
closed forms, the group/commutant machinery, and the theorem-level
properties (convexity, concavity, invariances, twirling, covariance).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import families, gpauli, keyrate, source, states, symmetry

DEFAULT_SEED = 0xC0FFEE


def env_seed() -> int:
    """Property-test seed from QKD_SEED (decimal or 0x-prefixed)."""
    raw = os.environ.get("QKD_SEED", "")
    if not raw:
        return DEFAULT_SEED
    return int(raw, 0)


@dataclass
class CheckResult:
    name: str
    instances: int
    violations: int
    worst: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def _haar_unitary(rng, n: int) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# gpauli suite
# ---------------------------------------------------------------------------

def _check_pauli_unitarity(rng) -> CheckResult:
    worst, n = 0.0, 0
    for d in (2, 3, 5, 7):
        for r in range(d):
            for s in range(d):
                u = gpauli.pauli_matrix(d, r, s)
                worst = max(worst, float(np.max(np.abs(u @ u.conj().T - np.eye(d)))))
                n += 1
    return CheckResult("pauli-unitarity", n, int(worst > 1e-12), worst)


def _check_mub_unbiasedness(rng) -> CheckResult:
    worst, n = 0.0, 0
    for d in (2, 3, 5, 7):
        labels = gpauli.mub_labels(d)
        mats = {lab: gpauli.mub_basis(d, lab) for lab in labels}
        for i, la in enumerate(labels):
            for lb in labels[i + 1:]:
                ov = np.abs(mats[la].conj().T @ mats[lb]) ** 2
                worst = max(worst, float(np.max(np.abs(ov - 1.0 / d))))
                n += 1
    return CheckResult("mub-unbiasedness", n, int(worst > 1e-10), worst)


def _check_mub_eigenbasis(rng) -> CheckResult:
    # Phase basis beta diagonalizes the unitary X Z^beta.
    worst, n = 0.0, 0
    for d in (2, 3, 5, 7):
        for beta in range(d):
            b = gpauli.mub_basis(d, beta)
            op = gpauli.pauli_matrix(d, 1, beta)
            for k in range(d):
                v = b[:, k]
                worst = max(worst, abs(1.0 - abs(v.conj() @ op @ v)))
                n += 1
    return CheckResult("mub-eigenbasis", n, int(worst > 1e-10), worst)


def _check_bell_basis(rng) -> CheckResult:
    worst, n = 0.0, 0
    for d in (2, 3, 5):
        vecs = [gpauli.bell_vector(d, r, s) for r in range(d) for s in range(d)]
        g = np.array([[vi.conj() @ vj for vj in vecs] for vi in vecs])
        worst = max(worst, float(np.max(np.abs(g - np.eye(d * d)))))
        n += 1
    return CheckResult("bell-orthonormality", n, int(worst > 1e-12), worst)


# ---------------------------------------------------------------------------
# rates suite
# ---------------------------------------------------------------------------

def _check_joint_examples(rng) -> CheckResult:
    worst = 0.0
    phi = np.outer(gpauli.bell_vector(2, 0, 0), gpauli.bell_vector(2, 0, 0).conj())
    z = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    j = keyrate.joint_distribution(phi, z, z)
    worst = max(worst, float(np.max(np.abs(j - np.diag([0.5, 0.5])))))
    j = keyrate.joint_distribution(np.eye(4) / 4.0, z, z)
    worst = max(worst, float(np.max(np.abs(j - 0.25))))
    u = np.array([[0.7, 0.1], [0.1, 0.1]])
    lam = families.conditional_spectrum(u, "Z")
    worst = max(worst, abs(lam[1] - 0.2))
    return CheckResult("joint-distribution-examples", 3, int(worst > 1e-10), worst)


def _check_information_examples(rng) -> CheckResult:
    worst = 0.0
    for d in (2, 3, 5):
        p = np.eye(d) / d
        worst = max(worst, abs(keyrate.mutual_information(p) - math.log2(d)))
        q = np.full((d, d), 1.0 / d ** 2)
        worst = max(worst, abs(keyrate.mutual_information(q)))
    bsc = np.array([[0.4, 0.1], [0.1, 0.4]])
    h2 = -0.2 * math.log2(0.2) - 0.8 * math.log2(0.8)
    worst = max(worst, abs(keyrate.mutual_information(bsc) - (1.0 - h2)))
    return CheckResult("mutual-information-examples", 7, int(worst > 1e-10), worst)


def _check_holevo_examples(rng) -> CheckResult:
    worst = 0.0
    z = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    psi = np.kron(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    worst = max(worst, abs(keyrate.holevo_AB(np.outer(psi, psi.conj()), z)))
    worst = max(worst, abs(keyrate.holevo_AB(np.eye(4) / 4.0, z) - 1.0))
    u = families.family_d1mubs(2, 0.0).table()
    proto = families.mub_protocol(2, "d+1")
    rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
    worst = max(worst, abs(rep.chi_bar))
    return CheckResult("holevo-examples", 3, int(worst > 1e-10), worst)


def _check_engine_closed_form(rng) -> CheckResult:
    worst, n = 0.0, 0
    for d in (2, 3, 5):
        for scheme in families.SCHEMES:
            proto = families.mub_protocol(d, scheme)
            for _ in range(10):
                u = states.random_bell_table(rng, d)
                cf = families.mub_rate_closed_form(u, proto.labels)
                rep = keyrate.sifted_rate(states.bell_diag_to_density(u), proto)
                worst = max(worst, abs(cf.r_bar - rep.r_bar), abs(cf.q - rep.q))
                n += 1
    return CheckResult("engine-equals-closed-form", n, int(worst > 1e-9), worst)


def _check_report_identities(rng) -> CheckResult:
    worst, n = 0.0, 0
    for _ in range(25):
        d = int(rng.choice([2, 3]))
        scheme = str(rng.choice(list(families.SCHEMES)))
        proto = families.mub_protocol(d, scheme)
        rep = keyrate.sifted_rate(
            states.bell_diag_to_density(states.random_bell_table(rng, d)), proto)
        worst = max(worst, abs(rep.r_bar - (rep.i_bar - rep.chi_bar)),
                    abs(rep.f_b - (1.0 - rep.q)))
        n += 1
    return CheckResult("rate-report-identities", n, int(worst > 1e-12), worst)


# ---------------------------------------------------------------------------
# symmetry suite
# ---------------------------------------------------------------------------

def _check_commutant_dimensions(rng) -> CheckResult:
    expected = {
        ("pauli", 2): 4, ("pauli", 3): 9, ("pauli", 5): 25,
        ("octahedral", None): 2, ("icosahedral", None): 2,
        ("dihedral", 2): 3, ("dihedral", 3): 3,
    }
    bad, n = 0, 0
    for (name, p), dim in expected.items():
        g = symmetry.pauli_group(p) if name == "pauli" else symmetry.point_group(name, p)
        got = len(symmetry.commutant_basis(g))
        bad += int(got != dim)
        n += 1
    return CheckResult("commutant-dimensions", n, bad, float(bad))


def _check_commutant_equalities(rng) -> CheckResult:
    o = symmetry.point_group("octahedral")
    i = symmetry.point_group("icosahedral")
    d2 = symmetry.point_group("dihedral", 2)
    d3 = symmetry.point_group("dihedral", 3)
    p2 = symmetry.pauli_group(2)
    bad = 0
    bad += int(not symmetry.commutant_equal(o, i))
    bad += int(not symmetry.commutant_equal(d2, d3))
    bad += int(symmetry.commutant_equal(p2, o))
    # projector-level equality for the equal pairs
    for ga, gb in ((o, i), (d2, d3)):
        pa = symmetry.commutant_projectors(ga)
        pb = symmetry.commutant_projectors(gb)
        if len(pa) != len(pb) or any(
                float(np.max(np.abs(x - y))) > 1e-8 for x, y in zip(pa, pb)):
            bad += 1
    return CheckResult("commutant-equalities", 5, bad, float(bad))


def _check_group_closure(rng) -> CheckResult:
    worst, n = 0.0, 0
    groups = [symmetry.pauli_group(2), symmetry.pauli_group(3),
              symmetry.point_group("octahedral"), symmetry.point_group("dihedral", 4)]
    for g in groups:
        canon = [symmetry._canonical_phase(np.asarray(u)) for u in g.elements]

        def dist_to_group(mat):
            cm = symmetry._canonical_phase(mat)
            return min(float(np.max(np.abs(cm - c))) for c in canon)

        worst = max(worst, dist_to_group(np.eye(g.dim, dtype=complex)))
        n += 1
        for _ in range(40):
            a = g.elements[int(rng.integers(len(g.elements)))]
            b = g.elements[int(rng.integers(len(g.elements)))]
            worst = max(worst, dist_to_group(np.asarray(a) @ np.asarray(b)))
            n += 1
    return CheckResult("group-closure", n, int(worst > 1e-8), worst)


def _check_twirl_projection(rng) -> CheckResult:
    worst, n = 0.0, 0
    groups = [symmetry.pauli_group(2), symmetry.pauli_group(3),
              symmetry.point_group("octahedral"), symmetry.point_group("dihedral", 3)]
    for g in groups:
        for _ in range(5):
            rho = states.random_density(rng, g.dim ** 2)
            t1 = symmetry.twirl(rho, g)
            worst = max(worst, float(np.max(np.abs(symmetry.twirl(t1, g) - t1))))
            n += 1
    return CheckResult("twirl-idempotence", n, int(worst > 1e-12), worst)


# ---------------------------------------------------------------------------
# theorems suite
# ---------------------------------------------------------------------------

def _check_weak_convexity(rng, instances: int = 200) -> CheckResult:
    worst, bad = -math.inf, 0
    for k in range(instances):
        d = (2, 3)[k % 2]
        a_povm = [np.outer(np.eye(d)[:, i], np.eye(d)[:, i]) for i in range(d)]
        b_povm = a_povm
        rho = states.random_density(rng, d * d)
        v = _haar_unitary(rng, d)
        iv = np.kron(np.eye(d), v)
        sig = iv @ rho @ iv.conj().T
        lam = float(rng.uniform())
        mix = lam * rho + (1.0 - lam) * sig
        i_mix = keyrate.mutual_information(keyrate.joint_distribution(mix, a_povm, b_povm))
        i_sum = (lam * keyrate.mutual_information(keyrate.joint_distribution(rho, a_povm, b_povm))
                 + (1.0 - lam) * keyrate.mutual_information(keyrate.joint_distribution(sig, a_povm, b_povm)))
        gap = i_mix - i_sum
        worst = max(worst, gap)
        bad += int(gap > 1e-10)
    return CheckResult("mutual-information-convexity", instances, bad, worst)


def _check_concavity(rng, instances: int = 200) -> CheckResult:
    worst, bad = -math.inf, 0
    for k in range(instances):
        d = (2, 3)[k % 2]
        a_povm = [np.outer(np.eye(d)[:, i], np.eye(d)[:, i]) for i in range(d)]
        rho = states.random_density(rng, d * d)
        v = _haar_unitary(rng, d)
        iv = np.kron(np.eye(d), v)
        sig = iv @ rho @ iv.conj().T
        lam = float(rng.uniform())
        mix = lam * rho + (1.0 - lam) * sig
        gap = (lam * keyrate.holevo_AB(rho, a_povm)
               + (1.0 - lam) * keyrate.holevo_AB(sig, a_povm)
               - keyrate.holevo_AB(mix, a_povm))
        worst = max(worst, gap)
        bad += int(gap > 1e-10)
    return CheckResult("holevo-concavity", instances, bad, worst)


def _check_unitary_invariance(rng, instances: int = 200) -> CheckResult:
    worst, bad = 0.0, 0
    for k in range(instances):
        d = (2, 3)[k % 2]
        ua, ub = _haar_unitary(rng, d), _haar_unitary(rng, d)
        wa, wb = _haar_unitary(rng, d), _haar_unitary(rng, d)
        a_povm = [np.outer(wa[:, i], wa[:, i].conj()) for i in range(d)]
        b_povm = [np.outer(wb[:, i], wb[:, i].conj()) for i in range(d)]
        rho = states.random_density(rng, d * d)
        big = np.kron(ua, ub)
        rho2 = big @ rho @ big.conj().T
        a2 = [ua @ x @ ua.conj().T for x in a_povm]
        b2 = [ub @ x @ ub.conj().T for x in b_povm]
        gap_i = abs(keyrate.mutual_information(keyrate.joint_distribution(rho2, a2, b2))
                    - keyrate.mutual_information(keyrate.joint_distribution(rho, a_povm, b_povm)))
        gap_chi = abs(keyrate.holevo_AB(rho2, a2) - keyrate.holevo_AB(rho, a_povm))
        worst = max(worst, gap_i, gap_chi)
        bad += int(gap_i > 1e-10 or gap_chi > 1e-10)
    return CheckResult("unitary-invariance", instances, bad, worst)


def _catalog_for_invariance(k: int) -> families.ProtocolSpec:
    builders = (
        lambda: families.qubit_protocol("bb84"),
        lambda: families.qubit_protocol("sixstate"),
        lambda: families.qubit_protocol("ngon", n=3),
        lambda: families.qubit_protocol("ngon", n=4),
        lambda: families.qubit_protocol("cube"),
        lambda: families.qubit_protocol("icosahedron"),
    )
    return builders[k % len(builders)]()


def _check_gstar_invariance(rng, instances: int = 200) -> CheckResult:
    worst, bad, n = 0.0, 0, 0
    for k in range(instances):
        proto = _catalog_for_invariance(k)
        w = _haar_unitary(rng, 2)
        bases = [w @ b for b in proto.bases]
        ensemble = source.uniform_basis_ensemble(bases)
        group = symmetry.GroupRep(
            dim=2, elements=[w @ g @ w.conj().T for g in proto.group.elements],
            name=proto.group.name)
        rep = source.check_gstar_invariance(ensemble, group)
        bad += int(not rep.ok)
        worst = max(worst, rep.max_povm_mismatch, rep.max_rho_mismatch)
        n += 1
    # negative control: biased basis choice must break the invariance
    proto = families.qubit_protocol("bb84")
    strs = [proto.bases[i][:, k] for i in range(2) for k in range(2)]
    probs = [0.4, 0.4, 0.1, 0.1]
    ens = source.SignalEnsemble(states=strs, probs=probs)
    rep = source.check_gstar_invariance(ens, proto.group)
    bad += int(rep.ok)
    n += 1
    return CheckResult("gstar-invariance", n, bad, worst)


def _check_twirl_properties(rng, instances: int = 200) -> CheckResult:
    worst, bad = 0.0, 0
    groups = [symmetry.pauli_group(2), symmetry.pauli_group(3),
              symmetry.point_group("octahedral"), symmetry.point_group("dihedral", 2),
              symmetry.point_group("dihedral", 3)]
    for k in range(instances):
        g = groups[k % len(groups)]
        rho = states.random_density(rng, g.dim ** 2)
        t = symmetry.twirl(rho, g)
        gap = float(np.max(np.abs(symmetry.twirl(t, g) - t)))
        comm = 0.0
        for u in g.elements[:8]:
            a = symmetry.conj_pair_action(np.asarray(u))
            comm = max(comm, float(np.max(np.abs(a @ t - t @ a))))
        gap = max(gap, comm)
        if g.name.startswith("pauli"):
            u_direct = np.array([[np.real(gpauli.bell_vector(g.dim, r, s).conj() @ rho
                                          @ gpauli.bell_vector(g.dim, r, s))
                                  for s in range(g.dim)] for r in range(g.dim)])
            gap = max(gap, float(np.max(np.abs(
                states.density_to_bell_diag(t, g.dim, tol=1e-8) - u_direct))))
        worst = max(worst, gap)
        bad += int(gap > 1e-10)
    return CheckResult("twirl-properties", instances, bad, worst)


def _check_strong_covariance(rng, instances: int = 200) -> CheckResult:
    worst, bad, n = 0.0, 0, 0
    for k in range(instances):
        d = (2, 3, 5)[k % 3]
        u = states.random_bell_table(rng, d)
        psi = states.purify_bell_diagonal(u)
        rep = symmetry.check_strong_covariance(psi, symmetry.pauli_group(d))
        bad += int(not rep.ok)
        worst = max(worst, rep.max_deviation)
        n += 1
    # negative control: a random product vector is not invariant
    vec = rng.normal(size=16) + 1j * rng.normal(size=16)
    vec = vec / np.linalg.norm(vec)
    rep = symmetry.check_strong_covariance(vec, symmetry.pauli_group(2))
    bad += int(rep.ok)
    n += 1
    return CheckResult("strong-covariance", n, bad, worst)


SUITES = {
    "gpauli": (_check_pauli_unitarity, _check_mub_unbiasedness,
               _check_mub_eigenbasis, _check_bell_basis),
    "rates": (_check_joint_examples, _check_information_examples,
              _check_holevo_examples, _check_engine_closed_form,
              _check_report_identities),
    "symmetry": (_check_commutant_dimensions, _check_commutant_equalities,
                 _check_group_closure, _check_twirl_projection),
    "theorems": (_check_weak_convexity, _check_concavity,
                 _check_unitary_invariance, _check_gstar_invariance,
                 _check_twirl_properties, _check_strong_covariance),
}


def run_suite(name: str, seed: int | None = None) -> list:
    """Run one named suite; returns its CheckResult list."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)} or 'all'")
    seed = env_seed() if seed is None else seed
    results = []
    for fn in SUITES[name]:
        rng = np.random.default_rng(seed)
        results.append(fn(rng))
    return results


def run(names, seed: int | None = None):
    """Run several suites; returns ({suite: [CheckResult]}, all_ok)."""
    out = {}
    ok = True
    for name in names:
        res = run_suite(name, seed=seed)
        out[name] = res
        ok = ok and all(r.ok for r in res)
    return out, ok
