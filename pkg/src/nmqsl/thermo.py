"""Entropy rates and dynamical activity of the (renormalised) Pauli equation.

Sums run over ordered pairs a != b.  A term whose prefactor (p_a R_ba or
p_a T_ba) vanishes contributes zero; a vanishing reverse rate under a
nonzero prefactor makes the term infinite.  Entropies are in units of the
chosen log base per unit time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import LogDomain
from .pauli import P_FLOOR
from .qlinalg import log_of_base


class EntropyRates(NamedTuple):
    s_dot: np.ndarray
    s_e_redef: np.ndarray
    s_tot_redef: np.ndarray
    s_e_M: np.ndarray
    s_tot_M: np.ndarray
    s_tot_NM: np.ndarray
    divergent: np.ndarray


@dataclass(frozen=True)
class ThermoSample:
    """Thermodynamic quantities at one time or, with array fields, along a grid."""

    t: np.ndarray
    s_dot: np.ndarray
    s_e_redef: np.ndarray
    s_tot_redef: np.ndarray
    s_e_M: np.ndarray
    s_tot_M: np.ndarray
    s_tot_NM: np.ndarray
    activity: np.ndarray
    delta_E: np.ndarray
    delta_E_D: np.ndarray
    divergent: np.ndarray


def _log_ratio(num, den):
    """log(num / den), exactly antisymmetric in its arguments.

    Evaluated as +-log1p(|num - den| / min(num, den)), so the two ordered-pair
    terms of a nearly balanced pair cancel exactly instead of leaving a
    rounding residue as large as their true sum.
    """
    big = np.maximum(num, den)
    small = np.minimum(num, den)
    with np.errstate(divide="ignore", invalid="ignore"):
        mag = np.log1p((big - small) / small)
    return np.where(num >= den, mag, -mag)


def _weighted_log(coef, num, den):
    """coef * log(num / den) with 0 * log(.) = 0 and x / 0 = +inf."""
    active = coef != 0
    if np.any(active & ~(num > 0)):
        raise LogDomain("log of a non-positive argument under a nonzero weight")
    safe_num = np.where(active, num, 1.0)
    safe_den = np.where(active, den, 1.0)
    with np.errstate(invalid="ignore"):
        return np.where(active, coef * _log_ratio(safe_num, safe_den), 0.0)


def _offdiag_sum(m):
    n = m.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sum(np.where(mask, m, 0.0), axis=(-2, -1))


def entropy_rate_ledger(R, T, p, log_base=2.0) -> EntropyRates:
    """Entropy change, redefined flow/production and their Markovian counterparts.

    Points with a population below the floor (or NaN renormalised rates) are
    marked divergent: s_tot_M = +inf and the other fields NaN.
    """
    R = np.asarray(R, dtype=float)
    T = np.asarray(T, dtype=float)
    p = np.asarray(p, dtype=float)
    scale = 1.0 / log_of_base(log_base)
    under = (np.min(p, axis=-1) < P_FLOOR) | np.any(np.isnan(T), axis=(-2, -1))
    ps = np.where(under[..., None], 0.5, p)
    Rs = np.where(under[..., None, None], 0.0, R)
    Ts = np.where(under[..., None, None], 0.0, T)

    p_a = ps[..., :, None]
    p_b = ps[..., None, :]
    Rt = np.swapaxes(Rs, -1, -2)  # Rt[a, b] = R_ba
    Tt = np.swapaxes(Ts, -1, -2)
    mask = ~np.eye(ps.shape[-1], dtype=bool)
    flow_r = np.where(mask, p_a * Rt, 0.0)
    flow_t = np.where(mask, p_a * Tt, 0.0)

    s_dot = -_offdiag_sum(_weighted_log(flow_r, p_b, p_a)) * scale
    s_e = -_offdiag_sum(_weighted_log(flow_r, np.abs(Rt), np.abs(Rs))) * scale
    s_tot = _offdiag_sum(_weighted_log(flow_r, p_a * np.abs(Rt), p_b * np.abs(Rs))) * scale
    s_tot_m = _offdiag_sum(_weighted_log(flow_t, p_a * Tt, p_b * Ts)) * scale
    s_e_m = -_offdiag_sum(_weighted_log(flow_t, Tt, Ts)) * scale
    with np.errstate(invalid="ignore"):
        s_nm = s_tot_m - s_tot

    nan = np.full(np.shape(s_dot), np.nan)
    fields = [np.where(under, nan, f) for f in (s_dot, s_e, s_tot, s_e_m)]
    s_tot_m = np.where(under, np.inf, s_tot_m)
    s_nm = np.where(under, nan, s_nm)
    divergent = under | ~np.isfinite(s_tot_m)
    return EntropyRates(*fields, s_tot_m, s_nm, divergent)


def s_tot_M_symmetrized(T, p, log_base=2.0):
    """1/2 sum (T_ab p_b - T_ba p_a) log(T_ab p_b / (T_ba p_a)); each pair term is >= 0."""
    T = np.asarray(T, dtype=float)
    p = np.asarray(p, dtype=float)
    fwd = T * p[..., None, :]
    bwd = np.swapaxes(fwd, -1, -2)
    diff = fwd - bwd
    with np.errstate(invalid="ignore"):
        terms = np.where(diff != 0, diff * _log_ratio(fwd, bwd), 0.0)
    return 0.5 * _offdiag_sum(terms) / log_of_base(log_base)


def s_tot_NM_direct(R, T, p, log_base=2.0):
    """sum p_a T_ba log(T_ba |R_ab| / (|R_ba| T_ab))."""
    R = np.asarray(R, dtype=float)
    T = np.asarray(T, dtype=float)
    p = np.asarray(p, dtype=float)
    Rt = np.swapaxes(R, -1, -2)
    Tt = np.swapaxes(T, -1, -2)
    mask = ~np.eye(p.shape[-1], dtype=bool)
    flow = np.where(mask, p[..., :, None] * Tt, 0.0)
    terms = _weighted_log(flow, Tt * np.abs(R), np.abs(Rt) * T)
    return _offdiag_sum(terms) / log_of_base(log_base)


def dynamical_activity(T, p):
    """A = 1/2 sum_{a != c} [T_ac p_c + T_ca p_a]."""
    T = np.asarray(T, dtype=float)
    p = np.asarray(p, dtype=float)
    inflow = T * p[..., None, :]
    return 0.5 * _offdiag_sum(inflow + np.swapaxes(inflow, -1, -2))


def tau_q2_denominator_pointwise(sample: ThermoSample):
    """Delta E + Delta E_D + sqrt(S_tot^M A / 2); infinities propagate."""
    s = np.maximum(sample.s_tot_M, 0.0)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(s * sample.activity / 2)
    root = np.where(np.isinf(s), np.inf, root)
    return sample.delta_E + sample.delta_E_D + root


def thermo_samples(t, R, T, p, delta_E, delta_E_D, log_base=2.0) -> ThermoSample:
    led = entropy_rate_ledger(R, T, p, log_base)
    act = np.where(np.any(np.isnan(T), axis=(-2, -1)), np.nan,
                   dynamical_activity(np.nan_to_num(T), p))
    return ThermoSample(
        t=np.asarray(t, dtype=float),
        s_dot=led.s_dot,
        s_e_redef=led.s_e_redef,
        s_tot_redef=led.s_tot_redef,
        s_e_M=led.s_e_M,
        s_tot_M=led.s_tot_M,
        s_tot_NM=led.s_tot_NM,
        activity=act,
        delta_E=np.asarray(delta_E, dtype=float),
        delta_E_D=np.asarray(delta_E_D, dtype=float),
        divergent=led.divergent,
    )
