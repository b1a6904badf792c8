"""Time the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py [--steps 1000 10000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from nmqsl import models
from nmqsl._kernels import _pykernels
from nmqsl.generator import liouvillian_table
from nmqsl.qlinalg import table1_state

try:
    from nmqsl._kernels import _ckernels
except ImportError:
    _ckernels = None


def inputs(steps):
    g = models.ad_generator(models.AmplitudeDampingParams(1.0))
    tau = 1.0
    table = liouvillian_table(g, np.linspace(0, tau, 2 * steps + 1))
    rho0 = table1_state(1).reshape(4)
    states = _pykernels.rk4_propagate(table, rho0, tau / steps).reshape(-1, 2, 2)
    return table, rho0, tau / steps, states


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, nargs="+", default=[1000, 10000])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled kernels not built; timing the Python fallback only")
    print(f"{'kernel':<15}{'steps':>8}" + "".join(f"{name + ' [ms]':>15}" for name, _ in backends)
          + ("   speedup" if len(backends) == 2 else ""))
    for steps in args.steps:
        table, rho0, dt, states = inputs(steps)
        for kernel in ("rk4_propagate", "track_spectrum"):
            times = []
            for _, mod in backends:
                if kernel == "rk4_propagate":
                    fn = lambda mod=mod: mod.rk4_propagate(table, rho0, dt)  # noqa: E731
                else:
                    fn = lambda mod=mod: mod.track_spectrum(states, 1e-14)  # noqa: E731
                times.append(best_of(fn, args.repeat) * 1e3)
            line = f"{kernel:<15}{steps:>8}" + "".join(f"{t:>15.3f}" for t in times)
            if len(times) == 2:
                line += f"{times[0] / times[1]:>9.1f}x"
            print(line)
    if _ckernels is not None:
        table, rho0, dt, states = inputs(args.steps[0])
        diff = np.max(np.abs(_pykernels.rk4_propagate(table, rho0, dt)
                             - _ckernels.rk4_propagate(table, rho0, dt)))
        print(f"max |python - cython| on the RK4 output: {diff:.1e}")


if __name__ == "__main__":
    main()
