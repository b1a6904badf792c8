import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from nmqsl import models
from nmqsl.errors import RatePole, ZeroBlochVector
from nmqsl.generator import integrate
from nmqsl.pauli import build_spectral_track, transition_rates
from nmqsl.qlinalg import bloch_from_rho, table1_state, trace_norm

AD_WEAK = models.AmplitudeDampingParams(0.3, 1.0)
GRID = np.arange(1, 10001) * 1e-3  # (0, 10]


# --- amplitude damping ---------------------------------------------------------

def test_ad_rate_zero_at_origin():
    for g0 in (0.1, 0.5, 1.0, 3.0):
        assert models.ad_rate(models.AmplitudeDampingParams(g0), 0.0) == 0


def test_ad_rate_nonnegative_in_weak_coupling():
    assert np.all(models.ad_rate(AD_WEAK, GRID) >= 0)


def test_ad_rate_critical_coupling_series_limit():
    p = models.AmplitudeDampingParams(0.5, 1.0)
    assert p.d == 0
    t = np.array([0.1, 0.7, 2.0, 5.0])
    limit = 2 * 0.5 * 1.0 * (t / 2) / (1 + t / 2)
    assert np.allclose(models.ad_rate(p, t), limit, rtol=1e-12)
    near = models.AmplitudeDampingParams(0.5 * (1 - 1e-12), 1.0)  # d = 1e-6
    assert np.allclose(models.ad_rate(near, t), limit, rtol=1e-9)


def test_ad_rate_matches_hyperbolic_form_in_weak_coupling():
    t = np.linspace(0.01, 5, 50)
    d = math.sqrt(1 - 0.6)
    ref = 2 * 0.3 * np.sinh(d * t / 2) / (d * np.cosh(d * t / 2) + np.sinh(d * t / 2))
    assert np.allclose(models.ad_rate(AD_WEAK, t), ref, rtol=1e-12)


def test_ad_rate_strong_coupling_trig_branch():
    p = models.AmplitudeDampingParams(3.0, 1.0)
    w = math.sqrt(2 * 3.0 - 1)
    t = np.linspace(0.01, 1.7, 40)
    ref = 2 * 3.0 * np.sin(w * t / 2) / (w * np.cos(w * t / 2) + np.sin(w * t / 2))
    assert np.allclose(models.ad_rate(p, t), ref, rtol=1e-10)


def test_ad_rate_pole_raises():
    p = models.AmplitudeDampingParams(3.0, 1.0)
    w = math.sqrt(5.0)
    pole = brentq(lambda t: w * math.cos(w * t / 2) + math.sin(w * t / 2), 1.0, 2.5, xtol=1e-15)
    with pytest.raises(RatePole):
        models.ad_rate(p, pole)


def test_ad_analytic_state_limits():
    rho0 = table1_state(1)
    assert np.allclose(models.ad_analytic_state(AD_WEAK, rho0, 0.0), rho0)
    # approach to the ground state is governed by b_t ~ exp(-(lam - d) t / 2)
    d = math.sqrt(0.4)
    b50 = math.exp(-25) * (math.cosh(25 * d) + math.sinh(25 * d) / d)
    late = models.ad_analytic_state(AD_WEAK, rho0, 50.0)
    assert late[0, 0].real == pytest.approx(0.3 * b50**2, rel=1e-10)
    assert late[0, 1].real == pytest.approx(0.45 * b50, rel=1e-10)
    for state in range(1, 7):
        rho = models.ad_analytic_state(AD_WEAK, table1_state(state), 200.0)
        assert np.allclose(rho, np.diag([0, 1]), atol=1e-8)


def test_ad_excited_population_monotone_in_weak_coupling():
    rho = models.ad_analytic_state(AD_WEAK, table1_state(3), np.linspace(0, 10, 2001))
    assert np.all(np.diff(rho[:, 0, 0].real) <= 0)


def test_ad_b_matches_ode():
    # b' = -gamma b / 2 is the defining equation of the decay amplitude
    p = models.AmplitudeDampingParams(1.3)
    t, h = 0.8, 1e-5
    deriv = (models.ad_b(p, t + h) - models.ad_b(p, t - h)) / (2 * h)
    assert deriv == pytest.approx(-0.5 * models.ad_rate(p, t) * models.ad_b(p, t), rel=1e-8)


# --- dephasing -----------------------------------------------------------------

def test_dephasing_rate_ohmic_value():
    p = models.DephasingParams(1.0)
    assert models.deph_rate_zero_T(p, 1.0) == pytest.approx(0.5, abs=1e-15)
    u = GRID
    assert np.allclose(models.deph_rate_zero_T(p, u), u / (1 + u**2), rtol=1e-13)


@pytest.mark.parametrize("k,negative", [(1, False), (2, False), (2.5, True), (3, True), (4, True)])
def test_dephasing_rate_sign_iff_k_above_two(k, negative):
    rate = models.deph_rate_zero_T(models.DephasingParams(k), GRID)
    assert bool(np.any(rate < 0)) == negative


def test_dephasing_factor_closed_form_ohmic():
    p = models.DephasingParams(1.0)
    for t in (0.3, 1.0, 4.0):
        assert models.dephasing_factor(p, t) == pytest.approx(math.log(1 + t * t), abs=1e-10)


@pytest.mark.parametrize("k", [0.1, 0.5, 2.5, 3.0, 5.0])
def test_dephasing_factor_against_quad(k):
    p = models.DephasingParams(k, 1.3)
    times = np.linspace(0, 3, 31)
    ref = [2 * quad(lambda s: models.deph_rate_zero_T(p, s), 0, t, epsabs=1e-13)[0] for t in times]
    assert np.allclose(models.dephasing_factors(p, times), ref, atol=1e-10, rtol=0)
    assert models.dephasing_factor(p, 3.0) == pytest.approx(ref[-1], abs=1e-10)


def test_dephasing_analytic_state():
    p = models.DephasingParams(3.0)
    rho0 = table1_state(5)
    assert np.allclose(models.deph_analytic_state(p, rho0, 0.0), rho0)
    diag = np.diag([0.3, 0.7]).astype(complex)
    assert np.allclose(models.deph_analytic_state(p, diag, 2.0), diag)
    rho = models.deph_analytic_state(p, rho0, 1.5)
    assert np.allclose(np.diag(rho), np.diag(rho0))


def test_dephasing_generator_reproduces_sigma_z_form():
    from nmqsl.generator import apply_generator
    from nmqsl.qlinalg import SIGMA_Z
    p = models.DephasingParams(3.0)
    rho = table1_state(6)
    t = 2.2
    ref = models.deph_rate_zero_T(p, t) * (SIGMA_Z @ rho @ SIGMA_Z - rho)
    assert np.allclose(apply_generator(models.deph_generator(p), t, rho), ref, atol=1e-15)


# --- eternal -------------------------------------------------------------------

def test_eternal_bloch_examples():
    assert np.allclose(models.eternal_analytic_bloch([0.1, 0.2, 0.3], 0.0), [0.1, 0.2, 0.3])
    assert np.allclose(models.eternal_analytic_bloch([0, 0, 1], 1.0), [0, 0, math.exp(-2)])
    assert math.exp(-2) == pytest.approx(0.13534, abs=1e-5)


def test_eternal_transition_rate_examples():
    x = np.array([0.3, -0.2, 0.5])
    n3 = x[2] ** 2 / np.dot(x, x)
    assert models.eternal_transition_rate(x, 0.0) == pytest.approx(0.5 * (1 + n3))
    assert models.eternal_transition_rate([0, 0, 0.4], 0.0) == pytest.approx(1.0)
    with pytest.raises(ZeroBlochVector):
        models.eternal_transition_rate([0, 0, 0], 0.3)


def test_eternal_transition_rate_matches_bloch_length_decay():
    # p1 - p2 = |x|, so d|x|/dt = -2 R |x| fixes R from the closed-form Bloch motion
    x0 = bloch_from_rho(table1_state(5))
    t = np.linspace(0, 3, 61)
    x = models.eternal_analytic_bloch(x0, t)
    e = np.exp(-2 * t)[:, None]
    dx = np.concatenate([-e, -e, -2 * e], axis=1) * x0
    oracle = -np.sum(x * dx, axis=1) / (2 * np.sum(x * x, axis=1))
    assert np.allclose(models.eternal_transition_rate(x, t), oracle, atol=1e-13)


@pytest.mark.parametrize("state", [2, 4])
def test_eternal_transition_rate_matches_generic_rates(state):
    g = models.eternal_generator()
    traj = integrate(g, table1_state(state), 1.0, 1e-3)
    rates = transition_rates(g, build_spectral_track(traj, g))
    closed = models.eternal_transition_rate(bloch_from_rho(traj.states), traj.times)
    assert np.max(np.abs(rates.R[:, 0, 1] - closed)) < 1e-8
    assert np.max(np.abs(rates.R[:, 1, 0] - closed)) < 1e-8


@pytest.mark.parametrize("state", range(1, 7))
def test_eternal_rates_nonnegative_and_renormalisation_trivial(state):
    g = models.eternal_generator()
    traj = integrate(g, table1_state(state), 3.0, 1e-3)
    rates = transition_rates(g, build_spectral_track(traj, g))
    assert np.all(rates.R >= 0)
    assert np.array_equal(rates.T, rates.R)


# --- oracle consistency ----------------------------------------------------------

@pytest.mark.parametrize("model,params", [
    ("amplitude_damping", AD_WEAK),
    ("amplitude_damping", models.AmplitudeDampingParams(2.5)),
    ("dephasing", models.DephasingParams(0.5)),
    ("dephasing", models.DephasingParams(4.0)),
    ("eternal", models.EternalParams()),
])
@pytest.mark.parametrize("state", range(1, 7))
def test_integrator_matches_closed_form(model, params, state):
    g = models.build_generator(model, params)
    num = integrate(g, table1_state(state), 1.0, 1e-3)
    exact = models.analytic_trajectory(model, params, table1_state(state), 1.0, 1e-3)
    assert np.max(trace_norm(num.states - exact.states)) < 1e-6


def test_build_generator_rejects_unknown_model():
    with pytest.raises(ValueError):
        models.build_generator("spin_boson", None)
    with pytest.raises(ValueError):
        models.AmplitudeDampingParams(-1.0)
