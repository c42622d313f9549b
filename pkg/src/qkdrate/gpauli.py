"""Generalized Pauli operators, Bell vectors, and mutually unbiased bases.

Everything here is a pure function of small integers returning complex
NumPy arrays.  Dimensions ``d`` are prime throughout (the MUB construction
requires primality); basis labels are either the string ``"Z"`` for the
standard basis or an integer ``beta`` in ``[0, d)`` selecting the eigenbasis
of the unitary ``X Z^beta``.

Conventions
-----------
* ``omega = exp(2*pi*i/d)``.
* The shift operator is ``X = U(1, 0)``, the clock operator ``Z = U(0, 1)``,
  and the general element ``U(r, s) = X^r Z^s`` maps
  ``|k> -> omega^(k s) |k + r mod d>``.
* Basis matrices are ``(d, d)`` arrays whose *columns* are the basis
  vectors, i.e. ``basis[:, k]`` is the k-th state.
* Phase exponents are reduced mod d before exponentiation so entries are
  exact roots of unity to machine precision.
"""

from __future__ import annotations

import numpy as np

# Tolerance policy: structural identities vs eigen-derived quantities.
TOL_STRUCTURAL = 1e-12
TOL_EIGEN = 1e-10


def is_prime(n: int) -> bool:
    """True when ``n`` is a prime integer (trial division; inputs are tiny)."""
    n = int(n)
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def check_dimension(d: int) -> int:
    """Validate a basis dimension: prime and >= 2. Returns ``d`` as int."""
    d = int(d)
    if d < 2 or not is_prime(d):
        raise ValueError(f"dimension must be a prime >= 2, got {d}")
    return d


def _root_phase(d, exponent):
    """exp(2*pi*i*exponent/d) with the exponent reduced mod d first."""
    return np.exp(2j * np.pi * (int(exponent) % d) / d)


def pauli_matrix(d: int, r: int, s: int) -> np.ndarray:
    """Generalized Pauli unitary ``U(r, s) = sum_k omega^(k s) |k+r><k|``.

    Parameters
    ----------
    d : int
        Dimension (any integer >= 2 works for the operator itself).
    r, s : int
        Shift and clock powers; reduced mod d.

    Returns
    -------
    (d, d) complex ndarray, unitary, satisfying ``U(r, s) = X^r Z^s``.
    """
    d = int(d)
    r, s = int(r) % d, int(s) % d
    m = np.zeros((d, d), dtype=complex)
    for k in range(d):
        m[(k + r) % d, k] = _root_phase(d, k * s)
    return m


def bell_vector(d: int, r: int, s: int) -> np.ndarray:
    """Maximally entangled state ``(1/sqrt d) sum_k omega^(k s) |k+r>|k>``.

    The d**2 vectors obtained for all (r, s) form an orthonormal basis of
    the two-qudit space.  Index convention: component ``(i, j)`` of the
    two-qudit vector sits at flat position ``i*d + j``.
    """
    d = int(d)
    r, s = int(r) % d, int(s) % d
    v = np.zeros(d * d, dtype=complex)
    for k in range(d):
        v[((k + r) % d) * d + k] = _root_phase(d, k * s)
    return v / np.sqrt(d)


# Hardcoded qubit eigenbases: the odd-prime formula degenerates at d = 2
# (the phase exponents s_j collide), while X Z has eigenvalues +/- i that
# integer powers of omega = -1 cannot reach.  Columns are basis vectors.
_QUBIT_X_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_QUBIT_Y_BASIS = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)


def mub_labels(d: int) -> list:
    """The d+1 basis labels: ``"Z"`` plus beta = 0 .. d-1."""
    d = check_dimension(d)
    return ["Z"] + list(range(d))


def mub_basis(d: int, label) -> np.ndarray:
    """One of the d+1 mutually unbiased bases of prime dimension ``d``.

    ``label == "Z"`` returns the standard basis.  An integer label ``beta``
    returns the eigenbasis of ``X Z^beta``:

        ``|psi_k^beta> = (1/sqrt d) sum_j omega^(-k j) omega^(-beta s_j) |j>``

    with ``s_j = (d - j)(d + j - 1)/2`` (an integer).  For d = 2 the X and Y
    eigenbases are returned for beta = 0 and 1 respectively; they are
    validated by the same eigenbasis property in the test suite.

    Returns a ``(d, d)`` array whose columns are the basis vectors.
    """
    d = check_dimension(d)
    if isinstance(label, str):
        if label.upper() == "Z":
            return np.eye(d, dtype=complex)
        raise ValueError(f"unknown basis label {label!r}")
    beta = int(label) % d
    if d == 2:
        return (_QUBIT_X_BASIS if beta == 0 else _QUBIT_Y_BASIS).copy()
    basis = np.zeros((d, d), dtype=complex)
    for j in range(d):
        s_j = (d - j) * (d + j - 1) // 2
        for k in range(d):
            basis[j, k] = _root_phase(d, -(k * j) - beta * s_j)
    return basis / np.sqrt(d)


def mub_vector(d: int, label, k: int) -> np.ndarray:
    """Single MUB state ``|psi_k^label>`` (column k of :func:`mub_basis`)."""
    return mub_basis(d, label)[:, int(k)].copy()
