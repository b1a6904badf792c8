"""Pure-Python/numpy implementations of the sequential hot loops.

Used when the compiled ``_ckernels`` extension is unavailable.  Both modules
expose the same two functions with identical semantics.
"""

import numpy as np

from ..qlinalg import eig_hermitian

TRACE_DRIFT_TOL = 1e-12


def rk4_propagate(liou, rho0, dt):
    """Classical RK4 on vec(rho) with a tabulated Liouvillian.

    ``liou`` has shape (2n+1, 4, 4): entry 2j is the superoperator at t_j and
    entry 2j+1 at t_j + dt/2.  States are row-major vectorised 2x2 matrices.
    Returns an (n+1, 4) array.
    """
    liou = np.ascontiguousarray(liou, dtype=complex)
    nsteps = (liou.shape[0] - 1) // 2
    out = np.empty((nsteps + 1, 4), dtype=complex)
    r = np.array(rho0, dtype=complex)
    out[0] = r
    h = 0.5 * dt
    for j in range(nsteps):
        l0 = liou[2 * j]
        lh = liou[2 * j + 1]
        l1 = liou[2 * j + 2]
        k1 = l0 @ r
        k2 = lh @ (r + h * k1)
        k3 = lh @ (r + h * k2)
        k4 = l1 @ (r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        off = 0.5 * (r[1] + np.conj(r[2]))
        r = np.array([r[0].real, off, np.conj(off), r[3].real], dtype=complex)
        tr = r[0].real + r[3].real
        if abs(tr - 1.0) > TRACE_DRIFT_TOL:
            r = r / tr
        out[j + 1] = r
    return out


def track_spectrum(states, degenerate_tol):
    """Eigendecompose a sequence of states, keeping eigenbranch labels continuous.

    Between consecutive points the labelling (identity or swap) with the larger
    total squared overlap is kept.  Where the spectrum is degenerate the
    previous eigenvectors are reused.  Returns ``(values, vectors, lost)`` with
    ``lost`` the first index whose best assignment has a diagonal overlap
    <= 0.5, or -1.
    """
    states = np.asarray(states, dtype=complex)
    spec = eig_hermitian(states)
    values = spec.values.copy()
    vectors = spec.vectors.copy()
    gaps = values[:, 0] - values[:, 1]
    for i in range(1, len(states)):
        prev = vectors[i - 1]
        if gaps[i] <= degenerate_tol:
            vectors[i] = prev
            continue
        ov = np.abs(prev.conj().T @ vectors[i]) ** 2
        if ov[0, 1] + ov[1, 0] > ov[0, 0] + ov[1, 1]:
            values[i] = values[i, ::-1]
            vectors[i] = vectors[i][:, ::-1]
            ov = ov[:, ::-1]
        if min(ov[0, 0], ov[1, 1]) <= 0.5:
            return values, vectors, i
    return values, vectors, -1
