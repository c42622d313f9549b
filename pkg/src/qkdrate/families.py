"""Protocol catalog and symmetrized attack families.

Provides the measurement-basis protocols (MUB schemes in prime dimension
plus the qubit polyhedron/polygon catalog), the conditional error spectra
of Bell-diagonal states, closed-form average rates for MUB protocols, and
the constrained eigenvalue families describing the worst collective attack
at a fixed average error rate Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import gpauli, keyrate, source, states, symmetry

SCHEMES = ("2", "d", "d+1")
QUBIT_PROTOCOLS = ("sixstate", "bb84", "ngon", "cube", "icosahedron",
                   "dodecahedron", "cuboid")

# Members of the qubit catalog whose symmetrized attack has a single
# eigenvalue class besides the ideal one (error functional Q = 2b).
_SIXSTATE_CLASS = ("sixstate", "cube", "icosahedron", "dodecahedron")

_FEAS_TOL = 1e-12


class InfeasibleError(ValueError):
    """No attack state is compatible with the requested error rate."""


def scheme_labels(d: int, scheme: str) -> list:
    """Basis label set for one of the MUB schemes ("2", "d" or "d+1")."""
    if scheme == "2":
        return ["Z", 0]
    if scheme == "d":
        return list(range(d))
    if scheme == "d+1":
        return ["Z"] + list(range(d))
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


@dataclass
class ProtocolSpec:
    """A complete-basis prepare-and-measure protocol.

    ``bases`` holds one (d, d) column-matrix per basis, ordered canonically
    (Z first, then phase bases ascending; polyhedra in documented vertex
    order) so downstream CSV output is reproducible.  ``axes`` carries the
    Bloch axes for qubit catalog entries, ``group`` the symmetry used to
    build symmetrized families.
    """

    name: str
    d: int
    bases: list
    labels: list
    sifting: str = "basis"
    axes: list | None = None
    group: symmetry.GroupRep | None = None
    theta: float | None = None

    def __post_init__(self):
        if len(self.bases) != len(self.labels) or len(self.bases) < 2:
            raise ValueError("need at least two labeled bases")
        for b in self.bases:
            gram = b.conj().T @ b
            if np.max(np.abs(gram - np.eye(self.d))) > 1e-10:
                raise ValueError(f"basis of {self.name} is not orthonormal")


def mub_protocol(d: int, scheme: str) -> ProtocolSpec:
    """MUB protocol in prime dimension d using the given label scheme."""
    gpauli.check_dimension(d)
    labels = scheme_labels(d, scheme)
    bases = [gpauli.mub_basis(d, lab) for lab in labels]
    return ProtocolSpec(
        name=f"mub-{scheme}-d{d}",
        d=d,
        bases=bases,
        labels=labels,
        group=symmetry.pauli_group(d),
    )


# ---------------------------------------------------------------------------
# Conditional spectra and closed-form MUB rates
# ---------------------------------------------------------------------------

def conditional_spectrum(u: np.ndarray, label) -> np.ndarray:
    """Spectrum of Bob's state conditioned on Alice's outcome, by basis.

    For the computational basis the conditional eigenvalues are the row
    sums lambda_y = sum_s u[y][s]; for phase basis beta they are
    lambda_y = sum_r u[r][(y - beta*r) mod d].  Both are independent of
    Alice's outcome index.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    if label == "Z":
        return u.sum(axis=1)
    beta = int(label)
    lam = np.zeros(d)
    for y in range(d):
        for r in range(d):
            lam[y] += u[r, (y - beta * r) % d]
    return lam


@dataclass
class ClosedFormRate:
    """Average error rate and rate components of a MUB protocol."""

    q: float
    i_bar: float
    chi_bar: float
    r_bar: float


def mub_error_rate(u: np.ndarray, labels) -> float:
    """Average probability that sifted outcomes disagree, over the labels."""
    return 1.0 - float(np.mean([conditional_spectrum(u, lab)[0] for lab in labels]))


def mub_rate_closed_form(u: np.ndarray, labels) -> ClosedFormRate:
    """Closed-form Q, I-bar, chi-bar and r-bar of a Bell-diagonal attack.

    The branch entropies H(Lambda^alpha) cancel between the mutual
    information and the Holevo term, leaving r_bar = log2(d) - S(u) with
    S(u) the Shannon entropy of the full eigenvalue table.
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    spectra = [conditional_spectrum(u, lab) for lab in labels]
    h_mean = float(np.mean([states.shannon_entropy(lam) for lam in spectra]))
    s_u = states.shannon_entropy(u.reshape(-1))
    logd = math.log2(d)
    return ClosedFormRate(
        q=1.0 - float(np.mean([lam[0] for lam in spectra])),
        i_bar=logd - h_mean,
        chi_bar=s_u - h_mean,
        r_bar=logd - s_u,
    )


# ---------------------------------------------------------------------------
# Attack families at fixed error rate
# ---------------------------------------------------------------------------

@dataclass
class AttackFamily:
    """Affine family of Bell-diagonal attacks at a fixed error rate.

    After the normalization and error-rate constraints at most one free
    parameter remains (``n_free`` is 0 or 1).  ``table(c)`` returns the full
    eigenvalue table, ``params(c)`` the class values (a, b, c), ``rate(c)``
    the effective key rate in bits.  The free parameter ranges over the
    closed interval [lo, hi] derived from nonnegativity.
    """

    name: str
    d: int
    q: float
    n_free: int
    lo: float | None
    hi: float | None
    table_fn: Callable
    params_fn: Callable
    rate_fn: Callable
    labels: list | None = None
    protocol: ProtocolSpec | None = None

    def _check(self, c):
        if self.n_free == 0:
            return None
        if c is None:
            raise TypeError(f"{self.name} has a free parameter; pass c")
        if c < self.lo - 1e-9 or c > self.hi + 1e-9:
            raise InfeasibleError(
                f"{self.name}: c={c:.6g} outside [{self.lo:.6g}, {self.hi:.6g}]")
        return min(max(float(c), self.lo), self.hi)

    def table(self, c=None) -> np.ndarray:
        u = self.table_fn(self._check(c))
        u = np.where(np.abs(u) < _FEAS_TOL, np.maximum(u, 0.0), u)
        if np.min(u) < -_FEAS_TOL:
            raise InfeasibleError(f"{self.name}: negative eigenvalue at c={c}")
        return u

    def params(self, c=None) -> dict:
        return self.params_fn(self._check(c))

    def rate(self, c=None) -> float:
        return self.rate_fn(self._check(c))


def _closed_rate_fn(family_table: Callable, d: int) -> Callable:
    logd = math.log2(d)
    return lambda c: logd - states.shannon_entropy(family_table(c).reshape(-1))


def family_2mubs(d: int, q: float) -> AttackFamily:
    """Symmetrized attack family for the two-MUB protocol.

    Classes: a on the (0,0) cell, b on the 2(d-1) single-error cells
    (r,0)/(0,s), c on the (d-1)^2 double-error cells, constrained by
    a + 2(d-1)b + (d-1)^2 c = 1 and Q = (d-1)b + (d-1)^2 c.  One free
    parameter (taken to be c) remains.
    """
    gpauli.check_dimension(d)
    if not 0.0 <= q <= 1.0:
        raise InfeasibleError(f"error rate {q} outside [0, 1]")
    k = d - 1
    lo = max(0.0, (2.0 * q - 1.0) / k ** 2)
    hi = q / k ** 2

    def tab(c):
        a = 1.0 - 2.0 * q + k ** 2 * c
        b = q / k - k * c
        u = np.full((d, d), c, dtype=float)
        u[0, :] = b
        u[:, 0] = b
        u[0, 0] = a
        return u

    def par(c):
        return {"a": 1.0 - 2.0 * q + k ** 2 * c, "b": q / k - k * c, "c": c}

    return AttackFamily(
        name=f"2-mubs(d={d}, Q={q:g})", d=d, q=q, n_free=1, lo=lo, hi=hi,
        table_fn=tab, params_fn=par, rate_fn=_closed_rate_fn(tab, d),
        labels=scheme_labels(d, "2"),
    )


def family_d1mubs(d: int, q: float) -> AttackFamily:
    """Fully constrained attack family for the (d+1)-MUB protocol.

    The error rate pins every class: a = 1 - (d+1)Q/d on (0,0) and
    b = Q/(d(d-1)) on all other cells, so no free parameter remains.
    Feasible for Q <= d/(d+1).
    """
    gpauli.check_dimension(d)
    a = 1.0 - (d + 1) * q / d
    b = q / (d * (d - 1))
    if q < 0.0 or a < -_FEAS_TOL:
        raise InfeasibleError(
            f"error rate {q} outside [0, {d / (d + 1):.6g}] for d+1 MUBs")

    def tab(_c=None):
        u = np.full((d, d), b, dtype=float)
        u[0, 0] = max(a, 0.0)
        return u

    return AttackFamily(
        name=f"d+1-mubs(d={d}, Q={q:g})", d=d, q=q, n_free=0, lo=None, hi=None,
        table_fn=tab, params_fn=lambda _c=None: {"a": max(a, 0.0), "b": b, "c": None},
        rate_fn=_closed_rate_fn(tab, d),
        labels=scheme_labels(d, "d+1"),
    )


def family_dmubs(d: int, q: float) -> AttackFamily:
    """Symmetrized attack family for the d-MUB (all phase bases) protocol.

    Classes: a on (0,0), b on the d(d-1) shifted cells (r>=1, any s), c on
    the d-1 phase-only cells (0, s>=1), constrained by
    a + d(d-1)b + (d-1)c = 1 and Q = (d-1)^2 b + (d-1)c, leaving c free in
    [max(0, dQ/(d-1) - 1), Q/(d-1)].
    """
    gpauli.check_dimension(d)
    if not 0.0 <= q <= 1.0:
        raise InfeasibleError(f"error rate {q} outside [0, 1]")
    k = d - 1
    lo = max(0.0, d * q / k - 1.0)
    hi = q / k

    def tab(c):
        a = 1.0 + c - d * q / k
        b = (q - k * c) / k ** 2
        u = np.full((d, d), b, dtype=float)
        u[0, :] = c
        u[0, 0] = a
        return u

    def par(c):
        return {"a": 1.0 + c - d * q / k, "b": (q - k * c) / k ** 2, "c": c}

    return AttackFamily(
        name=f"d-mubs(d={d}, Q={q:g})", d=d, q=q, n_free=1, lo=lo, hi=hi,
        table_fn=tab, params_fn=par, rate_fn=_closed_rate_fn(tab, d),
        labels=scheme_labels(d, "d"),
    )


def scheme_family(d: int, scheme: str, q: float) -> AttackFamily:
    """Attack family for a MUB scheme selected by name."""
    builder = {"2": family_2mubs, "d": family_dmubs, "d+1": family_d1mubs}
    if scheme not in builder:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return builder[scheme](d, q)


def _xlog2(x: float) -> float:
    return x * math.log2(x) if x > 0.0 else 0.0


@dataclass
class MubOptimum:
    """Closed-form optimal attack parameters and minimal rate."""

    a: float
    b: float
    c: float | None
    r_min: float


def optimal_2mubs(d: int, q: float) -> MubOptimum:
    """Analytic worst-case attack for two MUBs.

    a = (1-Q)^2, b = Q(1-Q)/(d-1) and c = Q^2/(d-1)^2.  The quoted source
    prints c with a single power of (d-1) in the denominator, which is
    inconsistent with its own normalization and minimal-rate expressions;
    the squared denominator (used here) reproduces both exactly and
    coincides with the printed value at d = 2.
    """
    gpauli.check_dimension(d)
    if not 0.0 <= q <= (d - 1) / d:
        raise InfeasibleError(f"error rate {q} outside [0, {(d - 1) / d:.6g}]")
    a = (1.0 - q) ** 2
    b = q * (1.0 - q) / (d - 1)
    c = q ** 2 / (d - 1) ** 2
    r = (math.log2(d) + 2.0 * _xlog2(1.0 - q) + 2.0 * _xlog2(q)
         - 2.0 * q * math.log2(d - 1))
    return MubOptimum(a=a, b=b, c=c, r_min=r)


def optimal_d1mubs(d: int, q: float) -> MubOptimum:
    """Analytic worst-case attack for d+1 MUBs (fully constrained)."""
    gpauli.check_dimension(d)
    if not 0.0 <= q <= d / (d + 1):
        raise InfeasibleError(f"error rate {q} outside [0, {d / (d + 1):.6g}]")
    frac = (d + 1) * q / d
    b = q / (d * (d - 1))
    r = math.log2(d) + _xlog2(1.0 - frac)
    if frac > 0.0:
        r += frac * math.log2(b)
    return MubOptimum(a=1.0 - frac, b=b, c=None, r_min=r)


# ---------------------------------------------------------------------------
# Qubit protocol catalog
# ---------------------------------------------------------------------------

def qubit_axes(name: str, n: int | None = None, theta: float | None = None) -> list:
    """Measurement axes (one per antipodal pair) of a catalog protocol."""
    if name == "sixstate":
        return [np.array(v, dtype=float) for v in
                [(0, 0, 1), (1, 0, 0), (0, 1, 0)]]
    if name == "bb84":
        return qubit_axes("ngon", n=2)
    if name == "ngon":
        if n is None or int(n) < 2:
            raise ValueError("ngon needs n >= 2")
        n = int(n)
        return [np.array([math.sin(math.pi * x / n), 0.0, math.cos(math.pi * x / n)])
                for x in range(n)]
    if name == "cube":
        raw = [(1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)]
        return [np.array(v, dtype=float) / math.sqrt(3.0) for v in raw]
    if name == "icosahedron":
        p = symmetry.GOLDEN
        raw = [(0, 1, p), (0, 1, -p), (1, p, 0), (1, -p, 0), (p, 0, 1), (p, 0, -1)]
        return [np.array(v, dtype=float) / math.sqrt(1.0 + p ** 2) for v in raw]
    if name == "dodecahedron":
        # Face centers of the icosahedron orientation used above: the four
        # cube diagonals plus the (0, phi, 1/phi) coordinate family.
        p = symmetry.GOLDEN
        raw = [(1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1),
               (0, p, 1 / p), (0, p, -1 / p), (1 / p, 0, p), (1 / p, 0, -p),
               (p, 1 / p, 0), (p, -1 / p, 0)]
        return [np.array(v, dtype=float) / math.sqrt(3.0) for v in raw]
    if name == "cuboid":
        if theta is None or not 0.0 < theta <= math.pi / 2:
            raise ValueError("cuboid needs theta in (0, pi/2]")
        s, co = math.sin(theta), math.cos(theta)
        return [np.array(v) for v in
                [(s, co, 0.0), (s, -co, 0.0), (0.0, co, s), (0.0, -co, s)]]
    raise ValueError(f"unknown qubit protocol {name!r}")


def axis_basis(axis) -> np.ndarray:
    """Orthonormal qubit basis measuring along the given Bloch axis."""
    return np.column_stack([symmetry.bloch_state(axis),
                            symmetry.bloch_state(-np.asarray(axis, dtype=float))])


def _protocol_group(name: str, n: int | None) -> symmetry.GroupRep:
    if name in ("sixstate", "cube"):
        return symmetry.point_group("octahedral")
    if name in ("icosahedron", "dodecahedron"):
        return symmetry.point_group("icosahedral")
    if name == "cuboid":
        return symmetry.point_group("cuboid")
    if name == "bb84":
        return symmetry.point_group("dihedral", 2)
    if name == "ngon":
        return symmetry.point_group("dihedral", int(n))
    raise ValueError(f"unknown qubit protocol {name!r}")


def qubit_protocol(name: str, n: int | None = None,
                   theta: float | None = None) -> ProtocolSpec:
    """Build a qubit catalog protocol (antipodal-pair bases from vertices)."""
    axes = qubit_axes(name, n=n, theta=theta)
    if name == "ngon":
        display = f"ngon{int(n)}"
    elif name == "cuboid":
        display = f"cuboid({theta:.12g})"
    else:
        display = name
    return ProtocolSpec(
        name=display,
        d=2,
        bases=[axis_basis(a) for a in axes],
        labels=list(range(len(axes))),
        axes=axes,
        group=_protocol_group(name, n),
        theta=theta,
    )


def qubit_error_functional(protocol: ProtocolSpec, params) -> float:
    """Printed error-rate functional Q(a, b, c) of a catalog protocol.

    Cross-validated elsewhere against the engine's Q on the corresponding
    density operator; the a value never enters.
    """
    if isinstance(params, dict):
        a, b, c = params.get("a"), params.get("b"), params.get("c")
    else:
        a, b, c = params
    name = protocol.name
    if name in _SIXSTATE_CLASS:
        return 2.0 * b
    if name == "bb84" or name.startswith("ngon"):
        return b + c
    if name.startswith("cuboid"):
        return 0.5 * (3.0 * b + c + (b - c) * math.cos(2.0 * protocol.theta))
    raise ValueError(f"no printed error functional for {name!r}")


# ---------------------------------------------------------------------------
# Commutant-derived (symmetrized) families and attack-transfer checks
# ---------------------------------------------------------------------------

def block_error_rates(protocol: ProtocolSpec, projectors: list) -> np.ndarray:
    """Engine error rate of each normalized commutant block state."""
    out = []
    for proj in projectors:
        rank = int(round(float(np.real(np.trace(proj)))))
        rho = 0.5 * (proj + proj.conj().T) / rank
        out.append(keyrate.sifted_rate(rho, protocol).q)
    return np.array(out)


def symmetrized_family(protocol: ProtocolSpec, q: float,
                       group: symmetry.GroupRep | None = None) -> AttackFamily:
    """Attack family derived from the protocol's own symmetry group.

    The commutant of {U* x U} is decomposed into minimal orthogonal
    projectors; the attack is a convex mixture over the normalized blocks,
    constrained by normalization and by the engine-computed error rate of
    each block.  Two blocks pin the attack completely; three leave one free
    parameter (the weight of the last block's cells).
    """
    group = group if group is not None else protocol.group
    if group is None:
        raise ValueError("protocol has no symmetry group attached")
    projs = symmetry.commutant_projectors(group)
    m = len(projs)
    d = protocol.d
    ranks = np.array([int(round(float(np.real(np.trace(p))))) for p in projs])
    qs = block_error_rates(protocol, projs)
    # Bell-diagonal pattern of each block (cells holding that class).
    patterns = [states.density_to_bell_diag(p, d, tol=1e-7) for p in projs]

    def mix(weights):
        u = np.zeros((d, d))
        for w, r, pat in zip(weights, ranks, patterns):
            u = u + (w / r) * np.round(pat)
        return u

    if m == 2:
        mat = np.array([[1.0, 1.0], qs])
        try:
            w = np.linalg.solve(mat, np.array([1.0, q]))
        except np.linalg.LinAlgError:
            raise InfeasibleError(f"{protocol.name}: degenerate block system")
        if np.min(w) < -1e-10:
            raise InfeasibleError(
                f"{protocol.name}: error rate {q} infeasible (needs Q <= {qs[1]:.6g})")
        w = np.maximum(w, 0.0)

        def par2(_c=None):
            return {"a": w[0] / ranks[0], "b": w[1] / ranks[1], "c": None}

        fam_table = lambda _c=None: mix(w)
        return AttackFamily(
            name=f"sym[{protocol.name}](Q={q:g})", d=d, q=q, n_free=0,
            lo=None, hi=None, table_fn=fam_table, params_fn=par2,
            rate_fn=lambda _c=None: keyrate.sifted_rate(
                states.bell_diag_to_density(mix(w)), protocol).r_bar,
            protocol=protocol,
        )
    if m != 3:
        raise ValueError(
            f"{protocol.name}: {m} commutant blocks; only <= 1 free parameter supported")

    mat2 = np.array([[1.0, 1.0], [qs[0], qs[1]]])
    if abs(np.linalg.det(mat2)) < 1e-12:
        raise InfeasibleError(f"{protocol.name}: degenerate block system")

    def weights_of(c):
        w2 = ranks[2] * c
        w01 = np.linalg.solve(mat2, np.array([1.0 - w2, q - qs[2] * w2]))
        return np.array([w01[0], w01[1], w2])

    # The two pinned weights are affine in c; intersect their nonnegativity
    # intervals to get the feasible range.
    w_at0 = weights_of(0.0)
    w_at1 = weights_of(1.0)
    lo, hi = 0.0, math.inf
    for i in range(2):
        alpha, beta = w_at0[i], w_at1[i] - w_at0[i]
        if abs(beta) < 1e-14:
            if alpha < -1e-12:
                raise InfeasibleError(f"{protocol.name}: error rate {q} infeasible")
            continue
        bound = -alpha / beta
        if beta > 0:
            lo = max(lo, bound)
        else:
            hi = min(hi, bound)
    hi = min(hi, 1.0 / ranks[2])
    if lo > hi + 1e-12:
        raise InfeasibleError(f"{protocol.name}: error rate {q} infeasible")
    lo, hi = max(lo, 0.0), max(hi, 0.0)

    def tab(c):
        return mix(weights_of(c))

    def par(c):
        w = weights_of(c)
        return {"a": w[0] / ranks[0], "b": w[1] / ranks[1], "c": c}

    return AttackFamily(
        name=f"sym[{protocol.name}](Q={q:g})", d=d, q=q, n_free=1, lo=lo, hi=hi,
        table_fn=tab, params_fn=par,
        rate_fn=lambda c: keyrate.sifted_rate(
            states.bell_diag_to_density(tab(c)), protocol).r_bar,
        protocol=protocol,
    )


@dataclass
class AttackTransferReport:
    """Outcome of the shared-optimal-attack conditions for two protocols.

    The conditions: (I) equal commutants of the two symmetry groups,
    (II) equal engine error rates on each commutant block, (III.a) the
    witness rotations together with both groups leave the commutant
    unchanged, and (III.b) each witness transports one protocol's sifted
    POVM elements onto the other's.
    """

    commutants_equal: bool
    block_rates_equal: bool
    witnesses_preserve_commutant: bool
    witnesses_transport_povms: bool
    max_block_gap: float
    max_witness_residual: float

    @property
    def ok(self) -> bool:
        return (self.commutants_equal and self.block_rates_equal
                and self.witnesses_preserve_commutant
                and self.witnesses_transport_povms)


def _sifted_alice_elements(protocol: ProtocolSpec) -> list:
    ensemble = source.uniform_basis_ensemble(protocol.bases)
    src = source.build_source(ensemble)
    povm = source.alice_povm(ensemble, src)
    m = len(protocol.bases)
    return [m * a for a in povm]


def attack_transfer_report(proto_a: ProtocolSpec, proto_b: ProtocolSpec,
                           tol: float = 1e-9) -> AttackTransferReport:
    """Check whether two qubit protocols admit the same symmetrized attack.

    Witness rotations map basis axes of the first protocol onto those of
    the second (basis j of the second is paired with basis j mod |L| of the
    first).  All four conditions must hold for the optimal attacks to
    coincide.
    """
    ga, gb = proto_a.group, proto_b.group
    if ga is None or gb is None:
        raise ValueError("both protocols need symmetry groups")
    if not symmetry.commutant_equal(ga, gb):
        return AttackTransferReport(False, False, False, False,
                                    math.inf, math.inf)
    projs = symmetry.commutant_projectors(ga)
    qa = block_error_rates(proto_a, projs)
    qb = block_error_rates(proto_b, projs)
    gap = float(np.max(np.abs(qa - qb)))

    witnesses = []
    pairing = []
    na = len(proto_a.axes)
    for j, axis_b in enumerate(proto_b.axes):
        axis_a = proto_a.axes[j % na]
        witnesses.append(symmetry.rotation_between(axis_a, axis_b))
        pairing.append(j % na)

    base = symmetry.commutant_basis(ga)
    joined = list(ga.elements) + list(gb.elements) + witnesses
    joined_comm = symmetry.commutant_from_elements(proto_a.d, joined)
    comm_kept = (len(joined_comm) == len(base)
                 and symmetry.span_projection_residual(base, joined_comm) < 1e-8
                 and symmetry.span_projection_residual(joined_comm, base) < 1e-8)

    elems_a = _sifted_alice_elements(proto_a)
    elems_b = _sifted_alice_elements(proto_b)
    d = proto_a.d
    worst = 0.0
    for j, w in enumerate(witnesses):
        i = pairing[j]
        for k in range(d):
            lhs = w.conj() @ elems_a[i * d + k] @ w.T
            worst = max(worst, float(np.max(np.abs(lhs - elems_b[j * d + k]))))
    return AttackTransferReport(
        commutants_equal=True,
        block_rates_equal=gap <= max(tol, 1e-9),
        witnesses_preserve_commutant=comm_kept,
        witnesses_transport_povms=worst <= 1e-8,
        max_block_gap=gap,
        max_witness_residual=worst,
    )
