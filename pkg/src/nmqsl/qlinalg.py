"""Closed-form linear algebra for qubit operators.

Every function accepts a single 2x2 matrix or a stack of shape ``(..., 2, 2)``
and broadcasts over the leading axes.  hbar = 1 throughout.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import InvalidState, NotHermitian

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
# sigma_- = (sigma_x - i sigma_y)/2 takes |0> (sigma_z = +1) to |1>
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()

HERMITIAN_TOL = 1e-9
STATE_TOL = 1e-10


class Spectrum(NamedTuple):
    """Eigenpairs in descending eigenvalue order.

    ``vectors[..., :, a]`` is the eigenvector belonging to ``values[..., a]``.
    """

    values: np.ndarray
    vectors: np.ndarray


# name, rho00, rho01, printed purity, printed l1 norm
TABLE1 = (
    (1, 0.3, 0.45, 0.985, 0.90),
    (2, 0.3, 0.005, 0.580, 0.01),
    (3, 0.5, 0.45, 0.905, 0.90),
    (4, 0.5, 0.005, 0.500, 0.01),
    (5, 1 / 3, 0.25 + 0.3j, 0.861, 0.781),
    (6, 0.5, 0.25 * (1 + 1j), 0.75, 0.707),
)


def dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


def rho_from_entries(rho00, rho01):
    """Density matrix from its sigma_z-basis entries rho00 and rho01."""
    return np.array([[rho00, rho01], [np.conj(rho01), 1.0 - rho00]], dtype=complex)


def table1_state(index: int) -> np.ndarray:
    for row in TABLE1:
        if row[0] == index:
            return rho_from_entries(row[1], row[2])
    raise KeyError(f"no initial state {index}; valid states are 1-6")


def _check_hermitian(m, tol=HERMITIAN_TOL):
    if np.max(np.abs(m - dagger(m)), initial=0.0) > tol:
        raise NotHermitian("matrix is not Hermitian")


def eig_hermitian(m) -> Spectrum:
    """Closed-form eigendecomposition of Hermitian 2x2 matrices.

    Eigenvalues come out descending.  Each eigenvector is scaled so that its
    largest-magnitude component is real and positive (first component on ties).
    """
    m = np.asarray(m, dtype=complex)
    _check_hermitian(m)
    a = m[..., 0, 0].real
    d = m[..., 1, 1].real
    c = 0.5 * (m[..., 0, 1] + np.conj(m[..., 1, 0]))
    half_diff = 0.5 * (a - d)
    r = np.hypot(half_diff, np.abs(c))
    mean = 0.5 * (a + d)
    values = np.stack([mean + r, mean - r], axis=-1)

    # stable choice of the unnormalised top eigenvector
    upper = half_diff >= 0
    v0 = np.where(upper, r + half_diff, c)
    v1 = np.where(upper, np.conj(c), r - half_diff)
    norm = np.sqrt(np.abs(v0) ** 2 + np.abs(v1) ** 2)
    degenerate = norm == 0
    safe = np.where(degenerate, 1.0, norm)
    v0 = np.where(degenerate, 1.0, v0 / safe)
    v1 = np.where(degenerate, 0.0, v1 / safe)

    top = _fix_phase(np.stack([v0, v1], axis=-1))
    bottom = _fix_phase(np.stack([-np.conj(v1), np.conj(v0)], axis=-1))
    vectors = np.stack([top, bottom], axis=-1)
    return Spectrum(values, vectors)


def _fix_phase(v):
    # v has shape (..., 2)
    first = np.abs(v[..., 0]) >= np.abs(v[..., 1])
    lead = np.where(first, v[..., 0], v[..., 1])
    phase = lead / np.abs(lead)
    return v / phase[..., None]


def trace_norm(m):
    """Half the sum of singular values, ``0.5 * Tr sqrt(X^dag X)``.

    For a 2x2 matrix s1 + s2 = sqrt(|X|_F^2 + 2 |det X|).
    """
    m = np.asarray(m, dtype=complex)
    frob2 = np.sum(np.abs(m) ** 2, axis=(-2, -1))
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return 0.5 * np.sqrt(frob2 + 2.0 * np.abs(det))


def validate_density_matrix(rho, tol=STATE_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array, raising InvalidState if it is not a state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape[-2:] != (2, 2):
        raise InvalidState(f"expected 2x2 matrices, got shape {rho.shape}")
    if np.max(np.abs(rho - dagger(rho)), initial=0.0) >= tol:
        raise InvalidState("density matrix is not Hermitian")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.max(np.abs(tr - 1.0), initial=0.0) >= tol:
        raise InvalidState("density matrix does not have unit trace")
    if np.min(eig_hermitian(rho).values, initial=np.inf) < -tol:
        raise InvalidState("density matrix has a negative eigenvalue")
    return rho


def purity(rho):
    rho = np.asarray(rho, dtype=complex)
    return np.real(np.einsum("...ij,...ji->...", rho, rho))


def l1_coherence(rho):
    """Sum of off-diagonal magnitudes in the sigma_z basis."""
    rho = np.asarray(rho, dtype=complex)
    return np.abs(rho[..., 0, 1]) + np.abs(rho[..., 1, 0])


def log_of_base(log_base) -> float:
    """Natural log of an entropy base; accepts a number or "e"."""
    if log_base == "e":
        return 1.0
    base = float(log_base)
    if not (base > 0 and base != 1):
        raise ValueError(f"invalid log base {log_base!r}")
    return math.log(base)


def entropy_terms(p, log_base=2.0):
    """-p log p elementwise with the 0 log 0 = 0 convention."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    safe = np.where(p > 0, p, 1.0)
    return -p * np.log(safe) / log_of_base(log_base)


def von_neumann_entropy(rho, log_base=2.0):
    values = eig_hermitian(rho).values
    return np.sum(entropy_terms(values, log_base), axis=-1)


def bloch_from_rho(rho):
    rho = np.asarray(rho, dtype=complex)
    x1 = 2.0 * rho[..., 0, 1].real
    x2 = -2.0 * rho[..., 0, 1].imag
    x3 = (rho[..., 0, 0] - rho[..., 1, 1]).real
    return np.stack([x1, x2, x3], axis=-1)


def rho_from_bloch(x):
    x = np.asarray(x, dtype=float)
    if np.max(np.linalg.norm(x, axis=-1), initial=0.0) > 1.0 + STATE_TOL:
        raise InvalidState("Bloch vector lies outside the unit ball")
    pauli = np.stack(PAULIS)
    return 0.5 * (IDENTITY + np.einsum("...k,kij->...ij", x, pauli))
