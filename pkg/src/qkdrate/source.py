"""Source-replacement construction, Alice's measurement, and basis sifting.

A prepare-and-measure protocol that sends pure signals ``|phi_x>`` with
probabilities ``p(x)`` is replaced by an entangled source

    ``|Phi>_AS = (1 x sqrt(rho_S)) sum_i |i>|i>``,   rho_S = sum_x p(x) |phi_x><phi_x|,

whose S half goes through the channel while Alice measures the A half with
the POVM ``A_x = p(x) sqrt(rho_A)^-1 |phi_x*><phi_x*| sqrt(rho_A)^-1``
(componentwise complex conjugation; ``rho_A = conj(rho_S)`` is Alice's
marginal).  Measuring A_x steers the transmitted half to exactly
``p(x) |phi_x><phi_x|``, which the Naimark property test pins down.

Sifting keeps the rounds where Alice's and Bob's announced labels agree and
renormalizes per-branch states and measurements.  For protocols built from
complete orthonormal bases the filter operators are proportional to the
identity, so each kept branch carries the *unchanged* joint state together
with projective per-branch measurements.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import states


@dataclass
class SignalEnsemble:
    """Pure signal states with their emission probabilities."""

    states: list
    probs: np.ndarray

    def __post_init__(self):
        self.states = [np.asarray(v, dtype=complex).reshape(-1) for v in self.states]
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.states) != self.probs.size:
            raise ValueError("state/probability count mismatch")
        if self.probs.min() < 0:
            raise ValueError("negative probability")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {self.probs.sum()!r}")
        for i, v in enumerate(self.states):
            n = np.linalg.norm(v)
            if abs(n - 1.0) > 1e-12:
                raise ValueError(f"signal {i} has norm {n!r}")

    @property
    def d(self) -> int:
        return self.states[0].size


def uniform_basis_ensemble(bases) -> SignalEnsemble:
    """Ensemble of all vectors of the given orthonormal bases, equal weights.

    ``bases`` is a list of (d, d) column-matrices.  Signal order is
    basis-major: signal index ``x = basis_index * d + k``.
    """
    vecs = [np.ascontiguousarray(b[:, k]) for b in bases for k in range(b.shape[1])]
    n = len(vecs)
    return SignalEnsemble(vecs, np.full(n, 1.0 / n))


@dataclass
class SourceState:
    """Schmidt data of the compressed source state |Phi>_AS."""

    kappa: np.ndarray          # eigenvalues of rho_S (= those of rho_A)
    basis_s: np.ndarray        # columns: eigenbasis of rho_S
    basis_a: np.ndarray        # columns: conjugate basis (Alice side)
    rho_s: np.ndarray
    rho_a: np.ndarray
    phi: np.ndarray            # |Phi> on A x S, length d^2
    full_rank: bool


def build_source(ensemble: SignalEnsemble) -> SourceState:
    """Compressed source state for a signal ensemble.

    ``rho_S`` is the ensemble average; its eigendecomposition supplies the
    Schmidt coefficients.  When ``rho_S`` is (numerically) the maximally
    mixed state the standard basis is used as the Schmidt basis — the
    conjugation convention under which complete-basis measurements reduce
    to scaled projectors.  For other degenerate spectra the eigensolver's
    basis is used; that choice is convention-dependent and documented.
    """
    d = ensemble.d
    rho_s = np.zeros((d, d), dtype=complex)
    for v, p in zip(ensemble.states, ensemble.probs):
        rho_s += p * np.outer(v, v.conj())
    rho_s = 0.5 * (rho_s + rho_s.conj().T)
    if np.max(np.abs(rho_s - np.eye(d) / d)) < 1e-12:
        kappa = np.full(d, 1.0 / d)
        basis_s = np.eye(d, dtype=complex)
    else:
        kappa, basis_s = np.linalg.eigh(rho_s)
    keep = kappa > 1e-12
    full_rank = bool(keep.all())
    phi = np.zeros(d * d, dtype=complex)
    for i in np.nonzero(keep)[0]:
        w = basis_s[:, i]
        phi += np.sqrt(kappa[i]) * np.kron(w.conj(), w)
    return SourceState(
        kappa=kappa,
        basis_s=basis_s,
        basis_a=basis_s.conj(),
        rho_s=rho_s,
        rho_a=rho_s.conj(),
        phi=phi,
        full_rank=full_rank,
    )


def alice_povm(ensemble: SignalEnsemble, source: SourceState) -> list:
    """Alice's POVM ``{A_x}`` on the source's A half.

    ``A_x = p(x) sqrt(rho_A)^-1 |phi_x*><phi_x*| sqrt(rho_A)^-1``; the
    elements are rank one and sum to the identity.  Requires full-rank
    ``rho_A`` (rank deficiency would leave the inverse square root undefined
    off the support).
    """
    if not source.full_rank:
        raise ValueError("rho_A is rank deficient; POVM defined on support only")
    m = states.invsqrtm_psd(source.rho_a)
    elements = []
    for v, p in zip(ensemble.states, ensemble.probs):
        w = m @ v.conj()
        a = p * np.outer(w, w.conj())
        elements.append(0.5 * (a + a.conj().T))
    return elements


def check_povm(elements, dim: int, tol: float = 1e-12) -> None:
    """Assert completeness (sum = identity within tol) and PSD-ness."""
    total = np.zeros((dim, dim), dtype=complex)
    for a in elements:
        lo = float(np.linalg.eigvalsh(a)[0])
        if lo < -1e-10:
            raise ValueError(f"POVM element has eigenvalue {lo:.3e}")
        total += a
    dev = np.max(np.abs(total - np.eye(dim)))
    if dev > tol:
        raise ValueError(f"POVM completeness violated by {dev:.3e}")


@dataclass
class SiftingPlan:
    """Announcement labels per POVM element and the set of kept labels.

    ``labels_a[x]`` / ``labels_b[y]`` assign each element one announcement;
    a round is kept when both sides announce the same label and that label
    is in ``kept`` (order of ``kept`` fixes the branch output order).
    """

    labels_a: list
    labels_b: list
    kept: list


def basis_sifting_plan(num_bases: int, d: int) -> SiftingPlan:
    """Plan for complete-basis protocols: element ``beta*d + k`` -> label beta."""
    labels = [beta for beta in range(num_bases) for _ in range(d)]
    return SiftingPlan(labels_a=list(labels), labels_b=list(labels),
                       kept=list(range(num_bases)))


@dataclass
class SiftBranch:
    """One kept announcement branch after sifting."""

    label: object
    p_tilde: float             # raw branch probability
    p: float                   # probability conditioned on keeping
    rho: np.ndarray            # renormalized post-sift joint state
    povm_a: list               # per-branch measurement on A
    povm_b: list
    index_a: list              # original element indices (same order as povm_a)
    index_b: list


def sift(rho_ab: np.ndarray, povm_a, povm_b, plan: SiftingPlan):
    """Filter the joint state on matching announcements.

    Per kept label u the filters are ``K_u = sqrt(sum_{x in u} A_x)`` and
    ``L_u`` likewise for Bob; the branch state is
    ``(K_u x L_u) rho (K_u x L_u)^dagger / p~(u)`` and the per-branch POVMs
    are ``K_u^-1 A_x K_u^-1`` (projectors ``|L| A_x`` in the complete-basis
    case).  Returns ``(branches, discarded_weight)``; branches with raw
    probability below 1e-14 are dropped with a warning.
    """
    dim = rho_ab.shape[0]
    d_a = povm_a[0].shape[0]
    d_b = povm_b[0].shape[0]
    if d_a * d_b != dim:
        raise ValueError("POVM dimensions incompatible with rho")
    branches = []
    kept_weight = 0.0
    for u in plan.kept:
        idx_a = [x for x, lab in enumerate(plan.labels_a) if lab == u]
        idx_b = [y for y, lab in enumerate(plan.labels_b) if lab == u]
        ka2 = sum(povm_a[x] for x in idx_a)
        lb2 = sum(povm_b[y] for y in idx_b)
        ka = states.sqrtm_psd(ka2)
        lb = states.sqrtm_psd(lb2)
        filt = np.kron(ka, lb)
        raw = filt @ rho_ab @ filt.conj().T
        p_tilde = float(np.real(raw.trace()))
        if p_tilde < 1e-14:
            warnings.warn(f"sifting branch {u!r} has probability {p_tilde:.3e}; dropped")
            continue
        ka_inv = states.invsqrtm_psd(ka2)
        lb_inv = states.invsqrtm_psd(lb2)
        ma = [_hermitize(ka_inv @ povm_a[x] @ ka_inv.conj().T) for x in idx_a]
        mb = [_hermitize(lb_inv @ povm_b[y] @ lb_inv.conj().T) for y in idx_b]
        branches.append(SiftBranch(
            label=u, p_tilde=p_tilde, p=0.0, rho=raw / p_tilde,
            povm_a=ma, povm_b=mb, index_a=idx_a, index_b=idx_b))
        kept_weight += p_tilde
    if not branches:
        raise ValueError("all sifting branches have zero probability")
    for br in branches:
        br.p = br.p_tilde / kept_weight
    return branches, 1.0 - kept_weight


def _hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


@dataclass
class InvarianceReport:
    """Outcome of a conjugate-representation invariance check."""

    ok: bool
    violations: list = field(default_factory=list)
    max_povm_mismatch: float = 0.0
    max_rho_mismatch: float = 0.0


def check_gstar_invariance(ensemble: SignalEnsemble, group, tol: float = 1e-10) -> InvarianceReport:
    """Check that Alice's POVM set and marginal are invariant under U* . U^T.

    For every group element U the map ``A -> U* A U^T`` must permute the
    POVM elements (as a set, within ``tol``) and fix ``rho_A``.  Holds for
    uniform ensembles invariant under the group; the report lists every
    violating (element, POVM index) pair instead of raising.
    """
    source = build_source(ensemble)
    povm = alice_povm(ensemble, source)
    report = InvarianceReport(ok=True)
    for gi, ug in enumerate(group.elements):
        u_conj = ug.conj()
        rho_dev = np.max(np.abs(u_conj @ source.rho_a @ ug.T - source.rho_a))
        report.max_rho_mismatch = max(report.max_rho_mismatch, float(rho_dev))
        if rho_dev > tol:
            report.ok = False
            report.violations.append(f"element {gi}: rho_A moved by {rho_dev:.3e}")
        for xi, a in enumerate(povm):
            img = u_conj @ a @ ug.T
            best = min(np.max(np.abs(img - b)) for b in povm)
            report.max_povm_mismatch = max(report.max_povm_mismatch, float(best))
            if best > tol:
                report.ok = False
                report.violations.append(
                    f"element {gi}: image of A_{xi} missing (gap {best:.3e})")
    return report


def load_protocol_json(source_obj):
    """Read a protocol definition from JSON (path, file object, or dict).

    Schema::

        {
          "d": int,
          "bases": [ [ [re, im], ... d entries ], ... ],   # vectors grouped per basis
          "probs": optional per-signal probabilities (basis-major order),
          "sifting": "basis"
        }

    Each basis is a list of d vectors; each vector a list of d [re, im]
    pairs.  Returns ``(d, bases, probs, sifting)`` where bases are (d, d)
    column-matrices validated for orthonormality.
    """
    if isinstance(source_obj, dict):
        data = source_obj
    elif hasattr(source_obj, "read"):
        data = json.load(source_obj)
    else:
        with open(source_obj, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    d = int(data["d"])
    sifting = data.get("sifting", "basis")
    if sifting != "basis":
        raise ValueError(f"unsupported sifting mode {sifting!r}")
    bases = []
    for bi, vecs in enumerate(data["bases"]):
        if len(vecs) != d:
            raise ValueError(f"basis {bi} has {len(vecs)} vectors, expected {d}")
        cols = []
        for vec in vecs:
            col = np.array([complex(re, im) for re, im in vec])
            cols.append(col)
        b = np.column_stack(cols)
        gram = b.conj().T @ b
        if np.max(np.abs(gram - np.eye(d))) > 1e-12:
            raise ValueError(f"basis {bi} is not orthonormal")
        bases.append(b)
    probs = data.get("probs")
    if probs is not None:
        probs = np.asarray(probs, dtype=float)
    return d, bases, probs, sifting
