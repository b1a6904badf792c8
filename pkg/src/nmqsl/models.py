"""Amplitude damping, pure dephasing and the eternally non-Markovian qubit.

Each model provides a canonical-form GeneratorSpec and a closed-form
solution used as an oracle for the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import RatePole, ZeroBlochVector
from .generator import Channel, GeneratorSpec, Trajectory, time_grid
from .qlinalg import (
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    bloch_from_rho,
    rho_from_bloch,
    validate_density_matrix,
)

POLE_TOL = 1e-12
REALNESS_TOL = 1e-10
QUAD_TOL = 1e-10


@dataclass(frozen=True)
class AmplitudeDampingParams:
    """Coupling ``gamma0`` to a Lorentzian bath of spectral width ``lam``."""

    gamma0: float
    lam: float = 1.0

    def __post_init__(self):
        if not (self.gamma0 > 0 and self.lam > 0):
            raise ValueError("gamma0 and lambda must be positive")

    @property
    def d(self) -> complex:
        return complex(np.sqrt(complex(self.lam**2 - 2 * self.gamma0 * self.lam)))


@dataclass(frozen=True)
class DephasingParams:
    k: float
    omega_c: float = 1.0

    def __post_init__(self):
        if not (self.k > 0 and self.omega_c > 0):
            raise ValueError("k and omega_c must be positive")


@dataclass(frozen=True)
class EternalParams:
    pass


# --- amplitude damping -----------------------------------------------------

def _ad_pieces(p: AmplitudeDampingParams, t):
    """cosh(d t/2) and sinh(d t/2)/d, the latter by series when d t is tiny."""
    t = np.asarray(t, dtype=float)
    d = p.d
    x = d * t / 2
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    series = (t / 2) * (1 + x**2 / 6 + x**4 / 120)
    shc = np.where(small, series, np.sinh(xs) / (d if d != 0 else 1.0))
    return np.cosh(x), shc


def _real(z, what):
    z = np.asarray(z)
    if np.max(np.abs(z.imag), initial=0.0) > REALNESS_TOL * max(1.0, np.max(np.abs(z), initial=0.0)):
        raise ArithmeticError(f"{what} came out complex")
    return z.real


def ad_rate(p: AmplitudeDampingParams, t):
    """gamma(t) = 2 gamma0 lam sinh(dt/2) / (d cosh(dt/2) + lam sinh(dt/2)).

    Written with sinh(x)/d so that d = 0 and imaginary d (strong coupling) go
    through the same expression.  Raises RatePole at zeros of the denominator.
    """
    ch, shc = _ad_pieces(p, t)
    denom = _real(ch + p.lam * shc, "amplitude-damping denominator")
    if np.min(np.abs(denom), initial=np.inf) < POLE_TOL:
        raise RatePole("amplitude-damping rate diverges (zero of b_t)")
    rate = 2 * p.gamma0 * p.lam * _real(shc, "amplitude-damping rate") / denom
    return float(rate) if rate.ndim == 0 else rate


def ad_b(p: AmplitudeDampingParams, t):
    ch, shc = _ad_pieces(p, t)
    b = np.exp(-p.lam * np.asarray(t, dtype=float) / 2) * _real(ch + p.lam * shc, "b_t")
    return float(b) if b.ndim == 0 else b


def ad_generator(p: AmplitudeDampingParams) -> GeneratorSpec:
    return GeneratorSpec(None, (Channel(partial(ad_rate, p), SIGMA_MINUS),))


def ad_analytic_state(p: AmplitudeDampingParams, rho0, t) -> np.ndarray:
    rho0 = validate_density_matrix(rho0)
    b = np.asarray(ad_b(p, t))
    out = np.empty(b.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = rho0[0, 0] * b**2
    out[..., 0, 1] = rho0[0, 1] * b
    out[..., 1, 0] = rho0[1, 0] * b
    out[..., 1, 1] = 1 - rho0[0, 0].real * b**2
    return out


# --- pure dephasing --------------------------------------------------------

def deph_rate_zero_T(p: DephasingParams, t):
    """gamma(k, t) = w_c [1 + (w_c t)^2]^(-k/2) Gamma(k) sin(k arctan(w_c t))."""
    u = p.omega_c * np.asarray(t, dtype=float)
    rate = p.omega_c * (1 + u**2) ** (-p.k / 2) * math.gamma(p.k) * np.sin(p.k * np.arctan(u))
    return float(rate) if rate.ndim == 0 else rate


def adaptive_simpson(f, a: float, b: float, tol: float = QUAD_TOL, max_depth: int = 50) -> float:
    """Integrate ``f`` over [a, b] by recursive Simpson with Richardson correction."""

    def simpson(fa, fm, fb, lo, hi):
        return (hi - lo) / 6 * (fa + 4 * fm + fb)

    def recurse(lo, hi, fa, fm, fb, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, lo, mid)
        right = simpson(fm, frm, fb, mid, hi)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15 * eps:
            return left + right + delta / 15
        return (recurse(lo, mid, fa, flm, fm, left, eps / 2, depth - 1)
                + recurse(mid, hi, fm, frm, fb, right, eps / 2, depth - 1))

    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def dephasing_factor(p: DephasingParams, t: float, tol: float = QUAD_TOL) -> float:
    """Gamma(t) = 2 * integral_0^t gamma(k, s) ds."""
    return 2.0 * adaptive_simpson(lambda s: deph_rate_zero_T(p, s), 0.0, float(t), tol / 2)


def dephasing_factors(p: DephasingParams, times, tol: float = QUAD_TOL) -> np.ndarray:
    """Gamma on an increasing grid starting at 0, accumulated interval by interval."""
    times = np.asarray(times, dtype=float)
    n = max(len(times) - 1, 1)
    f = lambda s: deph_rate_zero_T(p, s)  # noqa: E731
    pieces = [adaptive_simpson(f, a, b, tol / (2 * n)) for a, b in zip(times[:-1], times[1:])]
    return 2.0 * np.concatenate([[0.0], np.cumsum(pieces)])


def deph_generator(p: DephasingParams) -> GeneratorSpec:
    # rate 2 gamma with A = sigma_z / sqrt(2) reproduces gamma (sz rho sz - rho)
    return GeneratorSpec(
        None, (Channel(lambda t: 2.0 * deph_rate_zero_T(p, t), SIGMA_Z / math.sqrt(2)),)
    )


def _dephased(rho0, factor):
    factor = np.asarray(factor, dtype=float)
    out = np.broadcast_to(rho0, factor.shape + (2, 2)).copy()
    damp = np.exp(-factor)
    out[..., 0, 1] *= damp
    out[..., 1, 0] *= damp
    return out


def deph_analytic_state(p: DephasingParams, rho0, t) -> np.ndarray:
    rho0 = validate_density_matrix(rho0)
    return _dephased(rho0, dephasing_factor(p, t))


# --- eternally non-Markovian ------------------------------------------------

def eternal_rates(t):
    t = np.asarray(t, dtype=float)
    return np.ones_like(t), np.ones_like(t), -np.tanh(t)


def eternal_generator(params: EternalParams | None = None) -> GeneratorSpec:
    """L(rho) = 1/2 sum_k gamma_k (s_k rho s_k - rho), gamma = (1, 1, -tanh t)."""
    s2 = math.sqrt(2)
    return GeneratorSpec(None, (
        Channel(lambda t: np.ones_like(np.asarray(t, dtype=float)), SIGMA_X / s2),
        Channel(lambda t: np.ones_like(np.asarray(t, dtype=float)), SIGMA_Y / s2),
        Channel(lambda t: -np.tanh(t), SIGMA_Z / s2),
    ))


def eternal_analytic_bloch(x0, t) -> np.ndarray:
    x0 = np.asarray(x0, dtype=float)
    t = np.asarray(t, dtype=float)[..., None]
    transverse = 0.5 * (1 + np.exp(-2 * t))
    scale = np.concatenate(
        [transverse, transverse, np.exp(-2 * t)], axis=-1
    )
    return scale * x0


def eternal_analytic_state(rho0, t) -> np.ndarray:
    rho0 = validate_density_matrix(rho0)
    return rho_from_bloch(eternal_analytic_bloch(bloch_from_rho(rho0), t))


def eternal_transition_rate(x, t):
    """R_12 = R_21 between the eigenvectors of the state with Bloch vector ``x``.

    Equals 1/2 [(1 + n3^2) - (1 - n3^2) tanh t] with n3 = x3/|x|; this is the
    normalisation for which the Pauli equation reproduces dp/dt of the
    generator above.
    """
    x = np.asarray(x, dtype=float)
    norm2 = np.sum(x**2, axis=-1)
    if np.min(norm2, initial=np.inf) < 1e-24:
        raise ZeroBlochVector("transition rate undefined at the maximally mixed state")
    n3 = x[..., 2] ** 2 / norm2
    rate = 0.5 * ((1 + n3) - (1 - n3) * np.tanh(t))
    return float(rate) if np.ndim(rate) == 0 else rate


# --- analytic trajectories -------------------------------------------------

def analytic_trajectory(model: str, params, rho0, tau: float, dt: float) -> Trajectory:
    times = time_grid(tau, dt)
    if model == "amplitude_damping":
        states = ad_analytic_state(params, rho0, times)
    elif model == "dephasing":
        states = _dephased(validate_density_matrix(rho0), dephasing_factors(params, times))
    elif model == "eternal":
        states = eternal_analytic_state(rho0, times)
    else:
        raise ValueError(f"unknown model {model!r}")
    return Trajectory(times, states, "analytic")


def build_generator(model: str, params) -> GeneratorSpec:
    if model == "amplitude_damping":
        return ad_generator(params)
    if model == "dephasing":
        return deph_generator(params)
    if model == "eternal":
        return eternal_generator(params)
    raise ValueError(f"unknown model {model!r}")
