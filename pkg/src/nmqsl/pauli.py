"""Pauli rate equation for the instantaneous eigenvalues of rho(t).

Rates follow the convention dp_a/dt = sum_b [R_ab p_b - R_ba p_a], so R_ab
is the rate of jumps b -> a.  Rate functions take arrays with trailing
``(n, n)`` / ``(n,)`` axes and broadcast over any leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import PopulationUnderflow, TrackingLost
from .generator import GeneratorSpec, Trajectory, _dissipator_batch, operators_at, rates_at
from .qlinalg import dagger

P_FLOOR = 1e-12
# below this eigenvalue gap the eigenbasis is arbitrary and the previous one is kept
TRACK_DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class SpectralTrack:
    times: np.ndarray
    populations: np.ndarray  # (n_times, 2)
    vectors: np.ndarray  # (n_times, 2, 2), columns are eigenvectors
    pdot: np.ndarray  # (n_times, 2)


@dataclass(frozen=True)
class RateTable:
    R: np.ndarray
    R_M: np.ndarray
    R_NM: np.ndarray
    T: np.ndarray

    def at(self, i: int) -> "RateTable":
        return RateTable(self.R[i], self.R_M[i], self.R_NM[i], self.T[i])


def build_spectral_track(traj: Trajectory, g: GeneratorSpec) -> SpectralTrack:
    """Continuity-resolved eigendecomposition along a trajectory.

    dp/dt is the diagonal of D_t[rho] in the eigenbasis, not a finite difference.
    """
    values, vectors, lost = _kernels.track_spectrum(traj.states, TRACK_DEGENERATE_TOL)
    if lost >= 0:
        raise TrackingLost(
            f"eigenbranches cannot be matched at t={traj.times[lost]:.6g}; reduce dt"
        )
    d = _dissipator_batch(rates_at(g, traj.times), operators_at(g, traj.times), traj.states)
    pdot = np.real(np.einsum("nia,nij,nja->na", np.conj(vectors), d, vectors))
    return SpectralTrack(traj.times, values, vectors, pdot)


def rate_matrix(rates, ops, vectors) -> np.ndarray:
    """R_ab = sum_i gamma_i |<a|A_i|b>|^2.

    rates (m, n_times), ops (m, n_times, 2, 2), vectors (n_times, 2, 2).
    Diagonal entries are zeroed; they cancel in the rate equation.
    """
    elems = dagger(vectors)[None] @ ops @ vectors[None]
    r = np.einsum("mn,mnab->nab", rates, np.abs(elems) ** 2)
    idx = np.arange(r.shape[-1])
    r[..., idx, idx] = 0.0
    return r


def markov_split(R):
    """Positive and negative parts: R = R_M - R_NM with R_M, R_NM >= 0."""
    R = np.asarray(R, dtype=float)
    absr = np.abs(R)
    return 0.5 * (absr + R), 0.5 * (absr - R)


def renormalize(R, p, p_floor: float = P_FLOOR, on_underflow: str = "raise"):
    """T_ab = R^M_ab + (p_a / p_b) R^NM_ba.

    Needs p_b above ``p_floor`` wherever R^NM_ba > 0.  With
    ``on_underflow="nan"`` such entries become NaN instead of raising
    PopulationUnderflow.
    """
    R = np.asarray(R, dtype=float)
    p = np.asarray(p, dtype=float)
    r_m, r_nm = markov_split(R)
    back = np.swapaxes(r_nm, -1, -2)  # back[a, b] = R^NM_ba
    p_a = p[..., :, None]
    p_b = p[..., None, :]
    need = back > 0
    bad = need & (p_b < p_floor)
    if np.any(bad) and on_underflow == "raise":
        raise PopulationUnderflow(
            "renormalised rate needs a population below the floor (near-pure state)"
        )
    ratio = np.where(need & ~bad, p_a / np.where(bad | ~need, 1.0, p_b), 0.0)
    T = r_m + ratio * back
    return np.where(bad, np.nan, T)


def transition_rates(g: GeneratorSpec, track: SpectralTrack) -> RateTable:
    """Raw, split and renormalised rates at every point of ``track``.

    Points whose renormalisation would divide by an underflowed population get
    NaN entries in T.
    """
    R = rate_matrix(rates_at(g, track.times), operators_at(g, track.times), track.vectors)
    r_m, r_nm = markov_split(R)
    T = renormalize(R, track.populations, on_underflow="nan")
    return RateTable(R, r_m, r_nm, T)


def pauli_rhs(rates, p):
    """sum_b [W_ab p_b - W_ba p_a] for a rate matrix W (raw or renormalised)."""
    rates = np.asarray(rates, dtype=float)
    p = np.asarray(p, dtype=float)
    gain = np.einsum("...ab,...b->...a", rates, p)
    loss = np.sum(rates, axis=-2) * p
    return gain - loss


def pauli_fluxes(rates, p):
    """Termwise net flux W_ab p_b - W_ba p_a, shape (..., n, n)."""
    rates = np.asarray(rates, dtype=float)
    p = np.asarray(p, dtype=float)
    forward = rates * p[..., None, :]
    return forward - np.swapaxes(forward, -1, -2)
