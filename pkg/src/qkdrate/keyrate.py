"""Joint distributions, mutual information, Holevo bound, and sifted key rate.

The security figure computed throughout is the one-way direct-reconciliation
rate ``r = I(X:Y) - chi(X:E)`` for a collective attack, with Eve holding a
purification of the distributed joint state.  For rank-one measurements on
Alice's side the Holevo quantity collapses to

    ``chi = S(rho_AB) - sum_x p(x) S(rho_B^x)``,

which is the only path implemented (every protocol in scope measures Alice
with rank-one elements).  :func:`sifted_rate` is the full density-matrix
engine: it rebuilds the source, sifts on basis announcements, and evaluates
the per-branch mutual informations and Holevo quantities — the brute-force
oracle against which every closed form in :mod:`qkdrate.families` is tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import source as source_mod
from . import states


class UnsupportedMeasurementError(ValueError):
    """Raised when a POVM element required to be rank one is not."""


def joint_distribution(rho_ab: np.ndarray, povm_a, povm_b) -> np.ndarray:
    """Outcome table ``p(x, y) = tr{(A_x x B_y) rho}``.

    Entries in [-1e-12, 0) are clipped to zero and the table renormalized;
    anything below -1e-10 raises.
    """
    d_a = povm_a[0].shape[0]
    d_b = povm_b[0].shape[0]
    t = np.asarray(rho_ab).reshape(d_a, d_b, d_a, d_b)
    p = np.empty((len(povm_a), len(povm_b)))
    for x, a in enumerate(povm_a):
        # Contract Alice's element once, reuse for every Bob element.
        ta = np.einsum("ki,ijkl->jl", a, t)
        for y, b in enumerate(povm_b):
            p[x, y] = np.real(np.einsum("lj,jl->", b, ta))
    if p.min() < -1e-10:
        raise ValueError(f"joint probability {p.min():.3e} below -1e-10")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def mutual_information(p: np.ndarray) -> float:
    """Shannon mutual information (bits) of a joint probability table."""
    p = np.asarray(p, dtype=float)
    hx = states.shannon_entropy(p.sum(axis=1))
    hy = states.shannon_entropy(p.sum(axis=0))
    return hx + hy - states.shannon_entropy(p)


def _rank_one_vector(a: np.ndarray):
    """Decompose a PSD rank-one POVM element as (weight, unit vector)."""
    vals, vecs = np.linalg.eigh(a)
    w = vals[-1]
    if w <= 0 or np.abs(vals[:-1]).max(initial=0.0) > 1e-10 * max(1.0, w):
        raise UnsupportedMeasurementError(
            f"POVM element is not rank one (spectrum {vals})")
    return float(w), vecs[:, -1]


def holevo_AB(rho_ab: np.ndarray, povm_a) -> float:
    """Holevo quantity between Alice's outcome and the purifying system.

    ``chi = S(rho_AB) - sum_x p(x) S(rho_B^x)`` — valid when every A element
    is rank one (checked; the general path with an explicit Eve system is
    out of scope).  Zero-probability outcomes contribute nothing.
    """
    chi = states.von_neumann_entropy(rho_ab)
    for a in povm_a:
        w, v = _rank_one_vector(a)
        try:
            p_cond, rho_b = states.conditional_state(rho_ab, v)
        except states.ZeroProbabilityError:
            continue
        chi -= w * p_cond * states.von_neumann_entropy(rho_b)
    return chi


@dataclass
class RateReport:
    """Per-branch and aggregated rate data for one protocol run.

    ``branches`` rows are (label, p(u), I_u, chi_u, r_u); the totals satisfy
    ``r_bar = I_bar - chi_bar`` and ``F_B = 1 - Q`` to 1e-12 by construction
    (violations indicate an engine bug and are caught by :meth:`validate`).
    """

    branches: list
    i_bar: float
    chi_bar: float
    r_bar: float
    q: float
    f_b: float
    discarded: float

    def validate(self, tol: float = 1e-12) -> "RateReport":
        gap1 = abs(self.r_bar - (self.i_bar - self.chi_bar))
        gap2 = abs(self.f_b - (1.0 - self.q))
        if gap1 > tol or gap2 > tol:
            raise AssertionError(f"rate report identities violated: {gap1:.3e}, {gap2:.3e}")
        return self


def sifted_rate(rho_ab: np.ndarray, protocol) -> RateReport:
    """Run the full engine for a complete-basis protocol on a joint state.

    ``protocol`` needs attributes ``d``, ``bases`` (list of (d, d)
    column-matrices) and ``labels``.  Pipeline: uniform signal ensemble ->
    source replacement -> Alice POVM -> Bob's basis projectors -> sifting on
    matching announcements -> per-branch I_u and chi_u, aggregated with
    p(u).  Also evaluates the average error rate Q (probability the sifted
    outcomes disagree) and the matched-signal fidelity F_B.
    """
    d = protocol.d
    bases = protocol.bases
    m = len(bases)
    ensemble = source_mod.uniform_basis_ensemble(bases)
    src = source_mod.build_source(ensemble)
    povm_a = source_mod.alice_povm(ensemble, src)
    povm_b = [np.outer(b[:, k], b[:, k].conj()) / m for b in bases for k in range(d)]
    plan = source_mod.basis_sifting_plan(m, d)
    branches, discarded = source_mod.sift(rho_ab, povm_a, povm_b, plan)
    rows = []
    i_bar = chi_bar = q = f_b = 0.0
    for br in branches:
        label = protocol.labels[br.label]
        joint = joint_distribution(br.rho, br.povm_a, br.povm_b)
        i_u = mutual_information(joint)
        chi_u = holevo_AB(br.rho, br.povm_a)
        r_u = i_u - chi_u
        rows.append((label, br.p, i_u, chi_u, r_u))
        i_bar += br.p * i_u
        chi_bar += br.p * chi_u
        match = float(np.trace(joint))
        f_b += br.p * match
        q += br.p * (1.0 - match)
    return RateReport(
        branches=rows,
        i_bar=i_bar,
        chi_bar=chi_bar,
        r_bar=i_bar - chi_bar,
        q=q,
        f_b=f_b,
        discarded=discarded,
    ).validate()
