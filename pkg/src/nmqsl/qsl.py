"""Geometric and thermodynamic speed-limit bounds along a trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroSpeed
from .generator import (
    GeneratorSpec,
    Trajectory,
    effective_energy_fluctuation,
    effective_hamiltonian_in_basis,
    energy_fluctuation,
    generator_on_trajectory,
)
from .pauli import RateTable, SpectralTrack, build_spectral_track, transition_rates
from .qlinalg import trace_norm
from .thermo import ThermoSample, tau_q2_denominator_pointwise, thermo_samples

ZERO_SPEED = 1e-14
ZERO_DISTANCE = 1e-12


@dataclass(frozen=True)
class QslReport:
    tau: float
    distance: float
    mean_speed: float
    mean_dE: float
    mean_dED: float
    mean_s_tot_M: float
    mean_activity: float
    tau_q1: float
    tau_q2: float
    trivial_q2: bool
    stationary: bool = False

    @property
    def ratio_q1(self) -> float:
        return self.tau_q1 / self.tau

    @property
    def ratio_q2(self) -> float:
        return self.tau_q2 / self.tau

    @property
    def ratio_q2_q1(self) -> float:
        return self.tau_q2 / self.tau_q1 if self.tau_q1 > 0 else 0.0

    def chain_holds(self, rtol: float = 1e-9) -> bool:
        """tau >= tau_q1 >= tau_q2 up to ``rtol * tau``."""
        slack = rtol * self.tau
        return self.tau >= self.tau_q1 - slack and self.tau_q1 >= self.tau_q2 - slack


@dataclass(frozen=True)
class QslAnalysis:
    trajectory: Trajectory
    track: SpectralTrack
    rates: RateTable
    thermo: ThermoSample
    speed: np.ndarray
    report: QslReport


def average_weights(n_points: int) -> np.ndarray:
    """Positive quadrature weights for the time average over a uniform grid.

    Composite Simpson, closing with a 3/8 panel when the interval count is odd
    and with the trapezoid for a single interval.  Weights sum to one.
    """
    n = n_points - 1
    if n < 1:
        raise ValueError("time average needs at least two grid points")
    w = np.zeros(n_points)
    if n == 1:
        w[:] = 0.5
    else:
        m = n if n % 2 == 0 else n - 3
        if m > 0:
            w[0:m + 1:2] += 2 / 3
            w[1:m:2] += 4 / 3
            w[0] -= 1 / 3
            w[m] -= 1 / 3
        if m < n:
            w[m:m + 4] += np.array([3, 9, 9, 3]) / 8
    return w / n


def time_average(values, weights) -> float:
    return float(np.dot(weights, values))


def analyze(traj: Trajectory, g: GeneratorSpec, log_base=2.0) -> QslAnalysis:
    """Per-point thermodynamic quantities and both bounds for ``traj`` under ``g``."""
    if len(traj.times) < 2:
        raise ValueError("trajectory needs at least two points")
    h, d, lt = generator_on_trajectory(g, traj.times, traj.states)
    track = build_spectral_track(traj, g)
    rates = transition_rates(g, track)
    _, h_tilde = effective_hamiltonian_in_basis(d, track.populations, track.vectors)
    d_e = energy_fluctuation(h, traj.states)
    d_ed = effective_energy_fluctuation(h_tilde, track.populations)
    thermo = thermo_samples(traj.times, rates.R, rates.T, track.populations, d_e, d_ed, log_base)
    speed = trace_norm(lt)
    report = _assemble(traj, thermo, speed)
    return QslAnalysis(traj, track, rates, thermo, speed, report)


def _assemble(traj: Trajectory, thermo: ThermoSample, speed) -> QslReport:
    w = average_weights(len(traj.times))
    tau = traj.tau
    distance = float(trace_norm(traj.states[-1] - traj.states[0]))
    mean_speed = time_average(speed, w)
    q1, stationary = _ratio(distance, mean_speed)

    trivial = bool(np.any(thermo.divergent))
    mean_de = time_average(thermo.delta_E, w)
    mean_ded = time_average(thermo.delta_E_D, w)
    if trivial:
        mean_s = float("inf")
        mean_a = float(np.nan) if np.any(np.isnan(thermo.activity)) else time_average(thermo.activity, w)
        q2 = 0.0
    else:
        mean_s = time_average(thermo.s_tot_M, w)
        mean_a = time_average(thermo.activity, w)
        denom = mean_de + mean_ded + np.sqrt(max(mean_s, 0.0) * mean_a / 2)
        q2 = distance / denom if denom >= ZERO_SPEED else 0.0
    return QslReport(
        tau=tau,
        distance=distance,
        mean_speed=mean_speed,
        mean_dE=mean_de,
        mean_dED=mean_ded,
        mean_s_tot_M=mean_s,
        mean_activity=mean_a,
        tau_q1=q1,
        tau_q2=q2,
        trivial_q2=trivial,
        stationary=stationary,
    )


def _ratio(distance, mean_speed):
    if mean_speed < ZERO_SPEED:
        if distance > ZERO_DISTANCE:
            raise ZeroSpeed("state moved but the averaged speed vanishes")
        return 0.0, True
    return distance / mean_speed, False


def tau_q1(traj: Trajectory, g: GeneratorSpec):
    """Geometric bound ||rho(tau) - rho(0)|| / <||L_t[rho]||>; returns (bound, report)."""
    _, _, lt = generator_on_trajectory(g, traj.times, traj.states)
    w = average_weights(len(traj.times))
    distance = float(trace_norm(traj.states[-1] - traj.states[0]))
    mean_speed = time_average(trace_norm(lt), w)
    bound, stationary = _ratio(distance, mean_speed)
    return bound, {"distance": distance, "mean_speed": mean_speed, "stationary": stationary}


def tau_q2(traj: Trajectory, g: GeneratorSpec, log_base=2.0):
    """Thermodynamic bound; returns (bound, report).  Divergent entropy gives 0."""
    report = analyze(traj, g, log_base).report
    return report.tau_q2, report


def pointwise_denominator(analysis: QslAnalysis):
    return tau_q2_denominator_pointwise(analysis.thermo)
