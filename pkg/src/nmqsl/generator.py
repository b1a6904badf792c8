"""Time-local generators in canonical form and their numerical integration.

A generator acts as

    L_t[rho] = -i[H(t), rho] + sum_i gamma_i(t) (A_i rho A_i^dag - 1/2 {A_i^dag A_i, rho})

with traceless, Hilbert-Schmidt orthonormal noise operators A_i and real
(possibly negative) rates gamma_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import _kernels
from .errors import DegenerateSpectrum, PositivityLoss
from .qlinalg import dagger, eig_hermitian, validate_density_matrix

Operator = Union[np.ndarray, Callable[[float], np.ndarray]]

OPERATOR_TOL = 1e-9
POSITIVITY_TOL = 1e-6
DEGENERACY_TOL = 1e-8
REMOVABLE_TOL = 1e-10


@dataclass(frozen=True)
class Channel:
    rate: Callable[[float], float]
    operator: Operator

    def __post_init__(self):
        if not callable(self.operator):
            op = np.asarray(self.operator, dtype=complex)
            _check_noise_operator(op)
            object.__setattr__(self, "operator", op)


@dataclass(frozen=True)
class GeneratorSpec:
    """Hamiltonian (or None for H = 0) plus a tuple of dissipative channels."""

    hamiltonian: Callable[[float], np.ndarray] | None = None
    channels: tuple[Channel, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        fixed = [c.operator for c in self.channels if not callable(c.operator)]
        for i, a in enumerate(fixed):
            for b in fixed[i + 1:]:
                if abs(np.trace(dagger(a) @ b)) > OPERATOR_TOL:
                    raise ValueError("noise operators are not Hilbert-Schmidt orthogonal")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    source: str = "integrated"

    @property
    def tau(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _check_noise_operator(op):
    if op.shape != (2, 2):
        raise ValueError(f"noise operator must be 2x2, got {op.shape}")
    if abs(np.trace(op)) > OPERATOR_TOL:
        raise ValueError("noise operator must be traceless")
    if abs(np.trace(dagger(op) @ op) - 1.0) > OPERATOR_TOL:
        raise ValueError("noise operator must have unit Hilbert-Schmidt norm")


def _eval_scalar_fn(fn, times):
    times = np.asarray(times, dtype=float)
    try:
        values = np.asarray(fn(times), dtype=float)
        if values.shape == times.shape:
            return values
    except (TypeError, ValueError):
        pass
    return np.array([fn(float(t)) for t in times.ravel()], dtype=float).reshape(times.shape)


def rates_at(g: GeneratorSpec, times) -> np.ndarray:
    """Rates on a grid, shape (n_channels, n_times)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if not g.channels:
        return np.zeros((0, times.size))
    return np.stack([_eval_scalar_fn(c.rate, times) for c in g.channels])


def operators_at(g: GeneratorSpec, times) -> np.ndarray:
    """Noise operators on a grid, shape (n_channels, n_times, 2, 2)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    ops = np.empty((len(g.channels), times.size, 2, 2), dtype=complex)
    for i, c in enumerate(g.channels):
        if callable(c.operator):
            for j, t in enumerate(times):
                op = np.asarray(c.operator(float(t)), dtype=complex)
                _check_noise_operator(op)
                ops[i, j] = op
        else:
            ops[i] = c.operator
    return ops


def hamiltonians_at(g: GeneratorSpec, times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if g.hamiltonian is None:
        return np.zeros((times.size, 2, 2), dtype=complex)
    return np.stack([np.asarray(g.hamiltonian(float(t)), dtype=complex) for t in times])


def _dissipator_batch(rates, ops, rho):
    # rates (m, n), ops (m, n, 2, 2), rho (n, 2, 2)
    out = np.zeros(rho.shape, dtype=complex)
    for gam, a in zip(rates, ops):
        ad = dagger(a)
        ada = ad @ a
        out += gam[:, None, None] * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
    return out


def dissipator(g: GeneratorSpec, t: float, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return _dissipator_batch(rates_at(g, [t]), operators_at(g, [t]), rho[None])[0]


def apply_generator(g: GeneratorSpec, t: float, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    h = hamiltonians_at(g, [t])[0]
    return -1j * (h @ rho - rho @ h) + dissipator(g, t, rho)


def generator_on_trajectory(g: GeneratorSpec, times, states):
    """Hamiltonians, dissipator actions and L_t[rho] at every grid point."""
    h = hamiltonians_at(g, times)
    d = _dissipator_batch(rates_at(g, times), operators_at(g, times), states)
    lt = -1j * (h @ states - states @ h) + d
    return h, d, lt


def liouvillian_table(g: GeneratorSpec, times) -> np.ndarray:
    """Row-major superoperators of L_t, shape (n_times, 4, 4).

    With row-major vectorisation vec(A X B) = (A kron B^T) vec(X).
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    eye = np.eye(2)
    h = hamiltonians_at(g, times)
    table = -1j * (np.einsum("nij,kl->nikjl", h, eye) - np.einsum("ij,nlk->nikjl", eye, h))
    table = table.reshape(times.size, 4, 4)
    rates = rates_at(g, times)
    ops = operators_at(g, times)
    for gam, a in zip(rates, ops):
        ada = dagger(a) @ a
        sup = (
            np.einsum("nij,nkl->nikjl", a, np.conj(a))
            - 0.5 * np.einsum("nij,kl->nikjl", ada, eye)
            - 0.5 * np.einsum("ij,nlk->nikjl", eye, ada)
        ).reshape(times.size, 4, 4)
        table += gam[:, None, None] * sup
    return table


def time_grid(tau: float, dt: float) -> np.ndarray:
    """Uniform grid on [0, tau]; the step is shrunk so that it divides tau."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not tau >= dt * (1 - 1e-9):
        raise ValueError("tau must be at least dt")
    n = max(1, math.ceil(tau / dt - 1e-9))
    return np.linspace(0.0, tau, n + 1)


def integrate(g: GeneratorSpec, rho0, tau: float, dt: float) -> Trajectory:
    """Fixed-step RK4 solution of the master equation on [0, tau].

    Each step is Hermitised and, if the trace drifted by more than 1e-12,
    renormalised.  Raises PositivityLoss if any state acquires an eigenvalue
    below -1e-6.
    """
    rho0 = validate_density_matrix(rho0)
    times = time_grid(tau, dt)
    step = times[1] - times[0]
    stages = np.linspace(0.0, tau, 2 * (times.size - 1) + 1)
    table = liouvillian_table(g, stages)
    vec = _kernels.rk4_propagate(table, rho0.reshape(4), step)
    states = vec.reshape(-1, 2, 2)
    lowest = eig_hermitian(states).values[:, 1]
    bad = np.flatnonzero(lowest < -POSITIVITY_TOL)
    if bad.size:
        i = bad[0]
        raise PositivityLoss(
            f"state at t={times[i]:.6g} has eigenvalue {lowest[i]:.3g}; "
            "the step size is too coarse or the generator is singular there"
        )
    return Trajectory(times, states, "integrated")


def split_dissipator(g: GeneratorSpec, t: float, rho):
    """Diagonal and non-diagonal parts of D_t[rho] in the eigenbasis of rho."""
    rho = np.asarray(rho, dtype=complex)
    d = dissipator(g, t, rho)
    return split_in_basis(d, eig_hermitian(rho).vectors)


def split_in_basis(d, vectors):
    dt_ = dagger(vectors) @ d @ vectors
    diag = np.zeros_like(dt_)
    idx = np.arange(dt_.shape[-1])
    diag[..., idx, idx] = dt_[..., idx, idx]
    diag_part = vectors @ diag @ dagger(vectors)
    return diag_part, d - diag_part


def effective_hamiltonian_in_basis(d, values, vectors):
    """H_D from dissipator actions ``d`` and spectra of the states, batched.

    Pairs closer than DEGENERACY_TOL contribute nothing if their coupling is
    below REMOVABLE_TOL and raise DegenerateSpectrum otherwise.
    """
    dt_ = dagger(vectors) @ d @ vectors
    gap = values[..., None, :] - values[..., :, None]  # p_beta - p_alpha
    off = ~np.eye(values.shape[-1], dtype=bool)
    small = (np.abs(gap) <= DEGENERACY_TOL) & off
    if np.any(small & (np.abs(dt_) > REMOVABLE_TOL)):
        raise DegenerateSpectrum(
            "dissipator couples eigenvectors of a (nearly) degenerate spectrum; H_D is singular"
        )
    safe_gap = np.where(small | ~off, 1.0, gap)
    h_tilde = np.where(off & ~small, 1j * dt_ / safe_gap, 0.0)
    return vectors @ h_tilde @ dagger(vectors), h_tilde


def effective_hamiltonian_HD(g: GeneratorSpec, t: float, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    spec = eig_hermitian(rho)
    h_d, _ = effective_hamiltonian_in_basis(dissipator(g, t, rho), spec.values, spec.vectors)
    return h_d


def energy_fluctuation(h, rho):
    """Standard deviation of ``h`` in state ``rho`` (clamped at zero)."""
    h = np.asarray(h, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    mean = np.real(np.einsum("...ij,...ji->...", h, rho))
    second = np.real(np.einsum("...ij,...jk,...ki->...", h, h, rho))
    return np.sqrt(np.maximum(second - mean**2, 0.0))


def effective_energy_fluctuation(h_tilde, values):
    """Delta E_D = sqrt(Tr[H_D^2 rho]) from H_D written in the eigenbasis of rho."""
    mean = np.einsum("...a,...aa->...", values, h_tilde)
    if np.max(np.abs(mean), initial=0.0) > 1e-8:
        raise ArithmeticError("H_D has a nonzero mean in the state; expected zero diagonal")
    var = np.einsum("...a,...ab->...", values, np.abs(h_tilde) ** 2)
    return np.sqrt(np.maximum(var, 0.0))

