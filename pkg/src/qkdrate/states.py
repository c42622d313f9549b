"""Density operators, Bell-diagonal states, entropies, and conditional states.

Density operators are plain complex NumPy arrays (Hermitian, PSD, trace 1);
Bell-diagonal states are real ``(d, d)`` probability tables ``u[r, s]`` over
the Bell basis of :func:`qkdrate.gpauli.bell_vector`.  All entropies are in
bits (log base 2).

Validation helpers raise ``ValueError`` with the offending quantity in the
message; numerical tolerances follow the module-wide policy of 1e-12 for
structural identities and 1e-10 for eigenvalue-derived quantities.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import gpauli


class ZeroProbabilityError(ValueError):
    """Conditioning on an outcome whose probability is below cutoff (1e-14)."""


PROB_CUTOFF = 1e-14

# Eigenvalues in [-NEG_EIGVAL_FLOOR, 0) are clipped to 0 before entropies;
# anything more negative is treated as an invalid (non-PSD) input.
NEG_EIGVAL_FLOOR = 1e-10


def check_density(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    """Validate Hermiticity (1e-12), unit trace (1e-12), PSD (>= -1e-10)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-12:
        raise ValueError(f"{name} not Hermitian (deviation {herm:.3e})")
    tr = rho.trace()
    if abs(tr - 1.0) > 1e-12:
        raise ValueError(f"{name} trace {tr} != 1")
    lo = float(np.linalg.eigvalsh(rho)[0])
    if lo < -NEG_EIGVAL_FLOOR:
        raise ValueError(f"{name} has negative eigenvalue {lo:.3e}")
    return rho


def check_bell_table(u: np.ndarray) -> np.ndarray:
    """Validate a Bell-diagonal probability table: u >= 0, sum = 1 (1e-12)."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"Bell table must be square, got shape {u.shape}")
    if u.min() < -1e-12:
        raise ValueError(f"Bell table has negative weight {u.min():.3e}")
    if abs(u.sum() - 1.0) > 1e-12:
        raise ValueError(f"Bell table sums to {u.sum()!r} != 1")
    return np.clip(u, 0.0, None)


@lru_cache(maxsize=None)
def _bell_basis(d: int) -> np.ndarray:
    """(d^2, d^2) matrix whose column r*d+s is the Bell vector |U(r,s)>."""
    cols = [gpauli.bell_vector(d, r, s) for r in range(d) for s in range(d)]
    b = np.column_stack(cols)
    b.setflags(write=False)
    return b


def bell_diag_to_density(u: np.ndarray) -> np.ndarray:
    """Density operator ``sum_{r,s} u[r,s] |U(r,s)><U(r,s)|`` on dimension d^2.

    The reduced state on either qudit factor is maximally mixed.
    """
    u = check_bell_table(u)
    d = u.shape[0]
    b = _bell_basis(d)
    return (b * u.reshape(-1)) @ b.conj().T


def density_to_bell_diag(rho: np.ndarray, d: int, tol: float = 1e-10):
    """Bell-basis diagonal of ``rho``; raises if off-diagonals exceed ``tol``.

    Returns the (d, d) table of diagonal weights.
    """
    b = _bell_basis(d)
    m = b.conj().T @ rho @ b
    diag = np.real(np.diag(m)).copy()
    off = m - np.diag(np.diag(m))
    worst = np.max(np.abs(off))
    if worst > tol:
        raise ValueError(f"state is not Bell-diagonal (off-diagonal {worst:.3e})")
    return diag.reshape(d, d)


def purify_bell_diagonal(u: np.ndarray) -> np.ndarray:
    """Purification ``sum sqrt(u[r,s]) |U(r,s)>_AB |U(r, d-s)>_CD``.

    Returns a unit vector on (AB) x (CD), each factor d^2-dimensional, with
    the AB marginal equal to :func:`bell_diag_to_density`.  The flipped
    clock index on the CD pair is what makes the purification invariant
    under ``U* x U x U x U*`` for every generalized Pauli ``U``.
    """
    u = check_bell_table(u)
    d = u.shape[0]
    psi = np.zeros(d ** 4, dtype=complex)
    for r in range(d):
        for s in range(d):
            if u[r, s] == 0.0:
                continue
            pair = np.kron(gpauli.bell_vector(d, r, s),
                           gpauli.bell_vector(d, r, (d - s) % d))
            psi += np.sqrt(u[r, s]) * pair
    return psi


def shannon_entropy(p) -> float:
    """Shannon entropy in bits of a probability vector/table; 0*log 0 := 0."""
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.min() < -1e-10:
        raise ValueError(f"probability {p.min():.3e} below -1e-10")
    p = np.clip(p, 0.0, None)
    nz = p[p > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-sum lambda_i log2 lambda_i`` over eigenvalues clipped to [0, 1]."""
    vals = np.linalg.eigvalsh(np.asarray(rho))
    if vals.min() < -NEG_EIGVAL_FLOOR:
        raise ValueError(f"negative eigenvalue {vals.min():.3e} below floor")
    return shannon_entropy(np.clip(vals, 0.0, 1.0))


def partial_trace(rho: np.ndarray, dims, keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    Parameters
    ----------
    rho : (m*n, m*n) array
    dims : (m, n) factor dimensions
    keep : 0 to keep the first factor, 1 the second.
    """
    m, n = int(dims[0]), int(dims[1])
    rho = np.asarray(rho)
    if rho.shape != (m * n, m * n):
        raise ValueError(f"shape {rho.shape} incompatible with dims {dims}")
    t = rho.reshape(m, n, m, n)
    if keep == 0:
        return np.einsum("injn->ij", t)
    if keep == 1:
        return np.einsum("iaib->ab", t)
    raise ValueError("keep must be 0 or 1")


def conditional_state(rho_ab: np.ndarray, alice_vector: np.ndarray):
    """Project Alice's factor onto a unit vector; return (probability, rho_B).

    ``p = tr{(|v><v| x 1) rho}`` and ``rho_B = Tr_A{(|v><v| x 1) rho} / p``.
    This is the brute-force oracle behind all conditional-spectrum formulas.

    Raises
    ------
    ZeroProbabilityError
        when p < 1e-14 (caller must skip the branch).
    """
    v = np.asarray(alice_vector, dtype=complex).reshape(-1)
    d_a = v.size
    dim = rho_ab.shape[0]
    d_b = dim // d_a
    if d_a * d_b != dim:
        raise ValueError("alice_vector length does not divide rho dimension")
    t = np.asarray(rho_ab).reshape(d_a, d_b, d_a, d_b)
    # <v| rho |v> on the A slots only.
    sub = np.einsum("i,ijkl,k->jl", v.conj(), t, v)
    p = float(np.real(np.trace(sub)))
    if p < PROB_CUTOFF:
        raise ZeroProbabilityError(f"branch probability {p:.3e} below cutoff")
    return p, sub / p


def sqrtm_psd(mat: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Hermitian PSD square root via eigendecomposition (eigvals clipped)."""
    vals, vecs = np.linalg.eigh(np.asarray(mat))
    vals = np.clip(vals, floor, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def invsqrtm_psd(mat: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Inverse square root of a Hermitian positive operator.

    Eigenvalues below ``floor`` signal rank deficiency and raise, because the
    construction that needs this (measurement dilution) is undefined off the
    support.
    """
    vals, vecs = np.linalg.eigh(np.asarray(mat))
    if vals.min() < floor:
        raise ValueError(
            f"operator is rank deficient (eigenvalue {vals.min():.3e} < {floor:g})")
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def _project_first_factor(psi: np.ndarray, dims, v: np.ndarray):
    """Contract <v| into the first tensor factor of a pure state vector."""
    t = psi.reshape(dims)
    return np.tensordot(v.conj(), t, axes=(0, 0)).reshape(-1)


def clone_fidelities(psi: np.ndarray, signal_states, probs):
    """Average fidelities of the two clones held by Bob (B) and Eve (C).

    ``psi`` is a four-factor pure state on A x B x C x D with equal local
    dimensions, as produced by :func:`purify_bell_diagonal` (AB = the
    attacked pair, CD = the purifying pair).  Alice measures her factor with
    the measurement induced by the signal ensemble; conditioned on outcome
    x, Bob's and Eve's single-system states are the B and C marginals.

    Returns ``(F_B, F_C)`` where ``F_B = sum_x p(x) <phi_x|rho_B^x|phi_x>``
    and F_C is the same expression on the C factor.  F_B equals 1 - Q of the
    corresponding protocol.  Identifying the *C* factor as "Eve's clone" is
    a convention (the purifying pair CD is symmetric in role); F_C values
    are convention-dependent in exactly that sense.
    """
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    d4 = psi.size
    d = round(d4 ** 0.25)
    if d ** 4 != d4:
        raise ValueError("psi must live on four equal-dimensional factors")
    probs = np.asarray(probs, dtype=float)
    rho_a = partial_trace(np.outer(psi, psi.conj()), (d, d ** 3), keep=0)
    m_inv_sqrt = invsqrtm_psd(rho_a)
    f_b = 0.0
    f_c = 0.0
    total = 0.0
    for phi, p in zip(signal_states, probs):
        phi = np.asarray(phi, dtype=complex).reshape(-1)
        # Rank-one element A_x = p(x) * Minv |phi*><phi*| Minv.
        a_vec = m_inv_sqrt @ phi.conj()
        amp = np.sqrt(p) * _project_first_factor(psi, (d, d, d, d), a_vec)
        p_x = float(np.real(np.vdot(amp, amp)))
        if p_x < PROB_CUTOFF:
            continue
        rho_bcd = np.outer(amp, amp.conj()) / p_x
        rho_b = partial_trace(rho_bcd, (d, d * d), keep=0)
        rho_cd = partial_trace(rho_bcd, (d, d * d), keep=1)
        rho_c = partial_trace(rho_cd, (d, d), keep=0)
        f_b += p_x * float(np.real(phi.conj() @ rho_b @ phi))
        f_c += p_x * float(np.real(phi.conj() @ rho_c @ phi))
        total += p_x
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {total!r} != 1")
    return f_b, f_c


def random_bell_table(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random Bell-diagonal probability table (flat Dirichlet-ish sample)."""
    w = rng.random((d, d))
    return w / w.sum()


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    """Random density operator: normalized G G^dagger with Ginibre G."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.real(rho.trace())
