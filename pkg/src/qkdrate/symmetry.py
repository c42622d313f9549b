"""Finite unitary groups, twirling, and numerical commutant extraction.

Groups are finite lists of unitaries closed under multiplication up to a
global phase.  The central objects are the conjugate-pair representation
``U* x U`` acting on two-qudit operators, its twirl (group average), and
the commutant ``{M : [M, U* x U] = 0 for all g}`` whose dimension counts
the free parameters of a symmetrized attack.

Two independent routes compute commutants:

* :func:`commutant_basis` — twirl the Hermitian matrix units and
  orthonormalize (the route used everywhere downstream);
* :func:`commutant_from_elements` — the nullspace of stacked commutator
  equations, which needs no group structure at all and therefore also
  serves witness checks over non-closed element lists.

Their agreement on actual groups is asserted in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gpauli

SQRT5 = np.sqrt(5.0)
GOLDEN = (1.0 + SQRT5) / 2.0

PAULI_SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class GroupRep:
    """A finite list of unitaries closed under multiplication up to phase."""

    dim: int
    elements: list
    name: str = ""

    def __len__(self):
        return len(self.elements)


def pauli_group(d: int) -> GroupRep:
    """The d^2 generalized Pauli unitaries U(r, s)."""
    d = int(d)
    els = [gpauli.pauli_matrix(d, r, s) for r in range(d) for s in range(d)]
    return GroupRep(dim=d, elements=els, name=f"pauli({d})")


def spin_rotation(axis, angle: float) -> np.ndarray:
    """Spin-1/2 rotation ``cos(a/2) 1 - i sin(a/2) (n . sigma)``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    nsigma = sum(n[i] * PAULI_SIGMA[c] for i, c in enumerate("xyz"))
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * nsigma


def bloch_vector(state: np.ndarray) -> np.ndarray:
    """Bloch vector of a qubit pure state or density operator."""
    v = np.asarray(state, dtype=complex)
    rho = np.outer(v, v.conj()) if v.ndim == 1 else v
    return np.real(np.array([np.trace(rho @ PAULI_SIGMA[c]) for c in "xyz"]))


def bloch_state(axis) -> np.ndarray:
    """Qubit pure state with the given Bloch vector (deterministic phase).

    The global phase is fixed by making the first component with modulus
    above 1e-9 real positive, so catalog protocols serialize reproducibly.
    """
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    nsigma = sum(n[i] * PAULI_SIGMA[c] for i, c in enumerate("xyz"))
    vals, vecs = np.linalg.eigh(nsigma)
    v = vecs[:, int(np.argmax(vals))]
    return _fix_phase(v)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v) > 1e-9))
    ph = v[idx] / abs(v[idx])
    return v / ph


def rotation_between(a, b) -> np.ndarray:
    """Spin-1/2 unitary whose Bloch rotation maps unit vector a onto b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    c = float(np.dot(a, b))
    if c > 1.0 - 1e-12:
        return np.eye(2, dtype=complex)
    if c < -1.0 + 1e-12:
        # Antipodal: rotate by pi about any axis orthogonal to a.
        helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = np.cross(a, helper)
        return spin_rotation(axis, np.pi)
    axis = np.cross(a, b)
    return spin_rotation(axis, float(np.arccos(np.clip(c, -1.0, 1.0))))


def bloch_rotation(u: np.ndarray) -> np.ndarray:
    """SO(3) rotation induced on Bloch vectors by a qubit unitary."""
    sig = [PAULI_SIGMA[c] for c in "xyz"]
    r = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            r[i, j] = 0.5 * np.real(np.trace(sig[i] @ u @ sig[j] @ u.conj().T))
    return r


def find_axis_rotation(axes_a, axes_b, tol: float = 1e-9):
    """Rotation matching two sets of measurement axes up to signs, or None.

    Searches frame-aligning candidates built from one non-collinear pair of
    ``axes_a`` against every signed pair of ``axes_b`` and returns the first
    proper rotation R with ``{R a} == {±b}`` as sets.
    """
    aa = [np.asarray(a, dtype=float) / np.linalg.norm(a) for a in axes_a]
    bb = [np.asarray(b, dtype=float) / np.linalg.norm(b) for b in axes_b]
    if len(aa) != len(bb):
        return None

    def frame(u, v):
        e1 = u
        e2 = v - np.dot(v, u) * u
        n2 = np.linalg.norm(e2)
        if n2 < 1e-9:
            return None
        e2 = e2 / n2
        return np.column_stack([e1, e2, np.cross(e1, e2)])

    j = next((k for k in range(1, len(aa)) if abs(np.dot(aa[0], aa[k])) < 1 - 1e-9), None)
    if j is None:
        return None
    fa = frame(aa[0], aa[j])
    for p in range(len(bb)):
        for qq in range(len(bb)):
            if p == qq:
                continue
            for sp in (1.0, -1.0):
                for sq in (1.0, -1.0):
                    fb = frame(sp * bb[p], sq * bb[qq])
                    if fb is None:
                        continue
                    r = fb @ fa.T
                    mapped = [r @ a for a in aa]
                    if all(any(min(np.max(np.abs(m - b)), np.max(np.abs(m + b))) < tol
                               for b in bb) for m in mapped):
                        return r
    return None


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    idx = int(np.argmax(np.abs(flat) > 1e-8))
    ph = flat[idx] / abs(flat[idx])
    return u / ph


def close_group(generators, cap: int = 10000, name: str = "") -> GroupRep:
    """Close a generator list under multiplication, pruning global phases.

    Elements are deduplicated after canonicalizing the phase (first entry
    with modulus above 1e-8 made real positive) and rounding to 10 decimal
    places.  Raises if the closure exceeds ``cap`` — every group in scope
    is tiny.
    """
    dim = generators[0].shape[0]
    def key(u):
        cu = _canonical_phase(u)
        r = np.round(cu, 10)
        # "+ 0.0" folds -0.0 into +0.0 so byte keys are phase-stable.
        r = (r.real + 0.0) + 1j * (r.imag + 0.0)
        return r.tobytes(), cu
    seen = {}
    k0, e0 = key(np.eye(dim, dtype=complex))
    seen[k0] = e0
    frontier = [e0]
    gens = [_canonical_phase(np.asarray(g, dtype=complex)) for g in generators]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                k, c = key(g @ a)
                if k not in seen:
                    seen[k] = c
                    nxt.append(c)
                    if len(seen) > cap:
                        raise RuntimeError(f"group closure exceeded cap {cap}")
        frontier = nxt
    return GroupRep(dim=dim, elements=list(seen.values()), name=name)


def _octahedral_generators():
    return [spin_rotation([0, 0, 1], np.pi / 2), spin_rotation([1, 0, 0], np.pi / 2)]


def _icosahedral_generators():
    # Five-fold axis through the vertex (0, 1, golden) and two-fold about z.
    return [spin_rotation([0.0, 1.0, GOLDEN], 2 * np.pi / 5),
            spin_rotation([0, 0, 1], np.pi)]


def _dihedral_generators(n: int):
    # Main axis (0,1,0): the 2n-gon signal states live in the x-z plane.
    return [spin_rotation([0, 1, 0], np.pi / n), spin_rotation([0, 0, 1], np.pi)]


def point_group(name: str, n: int | None = None) -> GroupRep:
    """Spin-1/2 representation of a named rotation group.

    ``octahedral`` (24 elements up to phase), ``icosahedral`` (60),
    ``dihedral`` with parameter n (4n: rotations about (0,1,0) by pi*k/n
    plus the in-plane two-fold axes), and ``cuboid`` — the symmetry group
    of the cuboid signal set, which is the dihedral(2) group for every
    aperture angle, so it is returned as such.
    """
    if name == "octahedral":
        return close_group(_octahedral_generators(), name="octahedral")
    if name == "icosahedral":
        return close_group(_icosahedral_generators(), name="icosahedral")
    if name == "dihedral":
        if n is None or int(n) < 1:
            raise ValueError("dihedral group needs n >= 1")
        return close_group(_dihedral_generators(int(n)), name=f"dihedral({int(n)})")
    if name == "cuboid":
        g = close_group(_dihedral_generators(2), name="cuboid")
        return g
    raise ValueError(f"unknown point group {name!r}")


def conj_pair_action(u: np.ndarray) -> np.ndarray:
    """The two-qudit action ``U* x U`` of a single-qudit unitary."""
    return np.kron(u.conj(), u)


def twirl(rho: np.ndarray, group: GroupRep) -> np.ndarray:
    """Group average ``(1/|G|) sum_g (U* x U) rho (U* x U)^dagger``.

    The output commutes with every ``U* x U`` and twirling is idempotent;
    both facts are exercised by randomized tests.
    """
    dim2 = rho.shape[0]
    if group.dim ** 2 != dim2:
        raise ValueError("group dimension incompatible with state")
    out = np.zeros_like(rho, dtype=complex)
    for u in group.elements:
        w = conj_pair_action(u)
        out += w @ rho @ w.conj().T
    return out / len(group.elements)


def _hermitian_units(dim: int):
    """Real basis of Hermitian dim x dim matrices (diagonal + sym + antisym)."""
    units = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1.0
        units.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            units.append(e)
            f = np.zeros((dim, dim), dtype=complex)
            f[i, j] = -1j * inv_sqrt2
            f[j, i] = 1j * inv_sqrt2
            units.append(f)
    return units


def _herm_to_real(h: np.ndarray) -> np.ndarray:
    """Isometry from Hermitian matrices to real vectors (HS inner product)."""
    dim = h.shape[0]
    iu = np.triu_indices(dim, k=1)
    return np.concatenate([
        np.real(np.diag(h)),
        np.sqrt(2.0) * np.real(h[iu]),
        np.sqrt(2.0) * np.imag(h[iu]),
    ])


def _real_to_herm(x: np.ndarray, dim: int) -> np.ndarray:
    h = np.zeros((dim, dim), dtype=complex)
    h[np.diag_indices(dim)] = x[:dim]
    iu = np.triu_indices(dim, k=1)
    n_off = iu[0].size
    re = x[dim:dim + n_off] / np.sqrt(2.0)
    im = x[dim + n_off:] / np.sqrt(2.0)
    h[iu] = re + 1j * im
    h[(iu[1], iu[0])] = re - 1j * im
    return h


def commutant_basis(group: GroupRep, tol: float = 1e-8) -> list:
    """Hermitian orthonormal basis of the commutant of ``{U* x U}``.

    Twirls every Hermitian matrix unit of the two-qudit operator space and
    extracts an orthonormal spanning set of the results via SVD over the
    real Hermitian coordinates.  The returned list length is the commutant
    dimension (d^2 for the full Pauli group, smaller for richer symmetry).
    """
    dim2 = group.dim ** 2
    actions = [conj_pair_action(u) for u in group.elements]
    rows = []
    for unit in _hermitian_units(dim2):
        tw = np.zeros_like(unit)
        for w in actions:
            tw += w @ unit @ w.conj().T
        tw /= len(actions)
        rows.append(_herm_to_real(tw))
    mat = np.array(rows)
    u_svd, svals, vt = np.linalg.svd(mat, full_matrices=False)
    rank = int((svals > tol * svals[0]).sum())
    return [_real_to_herm(vt[i], dim2) for i in range(rank)]


def commutant_from_elements(dim: int, elements, tol: float = 1e-8) -> list:
    """Commutant of ``{U* x U : U in elements}`` by commutator nullspace.

    Needs no closure: the commutant of a generating set equals the
    commutant of the generated group.  Returns a Hermitian orthonormal
    basis like :func:`commutant_basis`.
    """
    dim2 = dim ** 2
    eye = np.eye(dim2)
    blocks = []
    for u in elements:
        a = conj_pair_action(np.asarray(u, dtype=complex))
        op = np.kron(a.T, eye) - np.kron(eye, a)
        blocks.append(op)
    stack = np.vstack(blocks)
    _, svals, vt = np.linalg.svd(stack, full_matrices=True)
    null_dim = int((svals < tol * max(1.0, svals[0])).sum()) + (vt.shape[0] - svals.size)
    basis_vecs = vt[vt.shape[0] - null_dim:]
    mats = [basis_vecs[i].reshape(dim2, dim2) for i in range(null_dim)]
    # Hermitize and re-orthonormalize over the reals.
    rows = []
    for m in mats:
        for h in (m + m.conj().T, 1j * (m - m.conj().T)):
            rows.append(_herm_to_real(0.5 * h))
    mat = np.array(rows)
    u_svd, svals2, vt2 = np.linalg.svd(mat, full_matrices=False)
    rank = int((svals2 > 1e-8 * svals2[0]).sum())
    return [_real_to_herm(vt2[i], dim2) for i in range(rank)]


def span_projection_residual(basis_a: list, basis_b: list) -> float:
    """Max residual of basis_b ops after projection onto span(basis_a)."""
    va = np.array([_herm_to_real(h) for h in basis_a])
    worst = 0.0
    for h in basis_b:
        x = _herm_to_real(h)
        resid = x - va.T @ (va @ x)
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


def commutant_equal(g1: GroupRep, g2: GroupRep, tol: float = 1e-9) -> bool:
    """True when the two conjugate-pair commutants span the same space."""
    b1 = commutant_basis(g1)
    b2 = commutant_basis(g2)
    if len(b1) != len(b2):
        return False
    return (span_projection_residual(b1, b2) < tol
            and span_projection_residual(b2, b1) < tol)


def commutant_projectors(group: GroupRep, seed: int = 0xC0FFEE) -> list:
    """Minimal orthogonal projectors of an *abelian* commutant.

    Forms a random Hermitian combination of the commutant basis, clusters
    its eigenvalues, and returns the spectral projectors.  If the number of
    clusters differs from the commutant dimension the commutant is not
    abelian (not in scope) and a ``ValueError`` is raised.  Projectors are
    ordered by descending overlap with the maximally entangled state
    ``|U(0,0)>``, then by descending rank, then by diagonal pattern, which
    makes downstream parameterizations deterministic.
    """
    basis = commutant_basis(group)
    rng = np.random.default_rng(seed)
    combo = np.zeros_like(basis[0])
    for h in basis:
        combo += rng.normal() * h
    vals, vecs = np.linalg.eigh(combo)
    clusters = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or vals[i] - vals[i - 1] > 1e-6:
            clusters.append((start, i))
            start = i
    if len(clusters) != len(basis):
        raise ValueError(
            f"commutant is not abelian (dimension {len(basis)}, "
            f"{len(clusters)} spectral blocks)")
    d = group.dim
    phi = gpauli.bell_vector(d, 0, 0)
    projs = []
    for a, b in clusters:
        block = vecs[:, a:b]
        p = block @ block.conj().T
        overlap = float(np.real(phi.conj() @ p @ phi))
        diag_key = tuple(np.round(np.real(np.diag(p)), 9))
        projs.append((overlap, b - a, diag_key, p))
    # Maximally-entangled block first, then larger blocks, then by diagonal.
    projs.sort(key=lambda t: (-round(t[0], 9), -t[1], t[2]))
    return [p for _, _, _, p in projs]


@dataclass
class CovarianceReport:
    ok: bool
    max_deviation: float
    violations: list = field(default_factory=list)


def check_strong_covariance(psi: np.ndarray, group: GroupRep, tol: float = 1e-10) -> CovarianceReport:
    """Check ``(U* x U x U x U*)|psi> = |psi>`` for every group element.

    ``psi`` lives on four d-dimensional factors (attacked pair AB, then the
    purifying pair CD).  Exact invariance — not merely up to phase — is
    what the Bell-paired purification provides for the Pauli group.
    """
    d = group.dim
    t = np.asarray(psi, dtype=complex).reshape(d, d, d, d)
    report = CovarianceReport(ok=True, max_deviation=0.0)
    for gi, u in enumerate(group.elements):
        uc = u.conj()
        out = np.einsum("ai,bj,ck,dl,ijkl->abcd", uc, u, u, uc, t)
        dev = float(np.max(np.abs(out - t)))
        report.max_deviation = max(report.max_deviation, dev)
        if dev > tol:
            report.ok = False
            report.violations.append(f"element {gi}: deviation {dev:.3e}")
    return report
