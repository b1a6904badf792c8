import numpy as np
import pytest

from nmqsl import models
from nmqsl.generator import integrate
from nmqsl.qlinalg import rho_from_bloch, table1_state
from nmqsl.qsl import analyze

ACCEPTANCE_LINES = []


def random_states(rng, n, min_gap=0.0):
    """Uniform-ish random qubit states with eigenvalue gap above ``min_gap``."""
    out = []
    while len(out) < n:
        x = rng.normal(size=3)
        x *= rng.uniform() ** (1 / 3) / np.linalg.norm(x)
        if np.linalg.norm(x) > min_gap:
            out.append(rho_from_bloch(x))
    return np.array(out)


def run_model(model, params, state, tau=1.0, dt=1e-3, log_base=2.0):
    rho0 = table1_state(state) if isinstance(state, int) else state
    g = models.build_generator(model, params)
    traj = integrate(g, rho0, tau, dt)
    return g, traj, analyze(traj, g, log_base)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
