"""Compiled-kernel benchmark: stable transform and implicit integration.

Times the two inner loops that the optional C extension accelerates, on
identical inputs for both backends, and checks that the results agree.

Usage:
    python3 benchmarks/bench_kernels.py                # default sizes
    python3 benchmarks/bench_kernels.py --draws 2000000 --steps 20000
"""

import argparse
import math
import time

import numpy as np

from tcsde import backend, make_builtin
from tcsde._kernels_py import stable_transform as py_stable_transform
from tcsde.clock import simulate_subordinator_steps, brownian_increments
from tcsde.rng import CLOCK_STREAM, NOISE_STREAM, substream
from tcsde.theta import SchemeConfig, _integrate_python, integrate

SEED = 123456789


def _time(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_stable_transform(n_draws, repeat):
    rng = substream(SEED, 0, CLOCK_STREAM)
    u = rng.uniform(0.0, math.pi, n_draws)
    w = rng.exponential(1.0, n_draws)
    alpha, scale = 0.9, 1.0e-3 ** (1.0 / 0.9)

    ref = py_stable_transform(alpha, scale, u, w)
    t_py = _time(lambda: py_stable_transform(alpha, scale, u, w), repeat)
    t_c = None
    if backend.compiled_available():
        got = backend.stable_transform(alpha, scale, u, w)
        rel = np.max(np.abs(got - ref) / np.maximum(np.abs(ref), 1e-300))
        assert rel <= 1e-12, f"backend disagreement {rel}"
        t_c = _time(lambda: backend.stable_transform(alpha, scale, u, w),
                    repeat)
    return t_py, t_c


def bench_integrate(n_steps, repeat):
    model = make_builtin("stability_cubic")
    delta = 1.0e-3
    clock = simulate_subordinator_steps(0.9, delta, n_steps,
                                        substream(SEED, 1, CLOCK_STREAM))
    db = brownian_increments(n_steps, delta, substream(SEED, 1, NOISE_STREAM))
    tau = clock.values[:n_steps + 1]
    config = SchemeConfig(theta=1.0, delta=delta, horizon=float(tau[-1]))

    def run_py():
        return _integrate_python(model, 1.0, delta, tau, db,
                                 config.solver_tol, config.solver_max_iter,
                                 config.bracket_cap, with_fbem=False)

    ref = run_py()[0]
    t_py = _time(run_py, repeat)
    t_c = None
    if backend.compiled_available():
        out = backend.integrate_builtin(
            model.kernel_kind, model.kernel_params, model.x0, 1.0, delta,
            tau, db, config.solver_tol, config.solver_max_iter,
            config.bracket_cap, False)
        assert not isinstance(out, int), f"solver failed at step {out}"
        rel = np.max(np.abs(out[0] - ref) / np.maximum(np.abs(ref), 1.0))
        assert rel <= 1e-10, f"backend disagreement {rel}"
        t_c = _time(lambda: backend.integrate_builtin(
            model.kernel_kind, model.kernel_params, model.x0, 1.0, delta,
            tau, db, config.solver_tol, config.solver_max_iter,
            config.bracket_cap, False), repeat)
    return t_py, t_c


def _row(name, size, t_py, t_c):
    speedup = "-" if t_c is None else f"{t_py / t_c:7.1f}x"
    tc = "-" if t_c is None else f"{1e3 * t_c:9.2f}"
    print(f"{name:<18} {size:>9} {1e3 * t_py:9.2f} {tc:>9} {speedup:>9}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=1_000_000,
                    help="stable-transform batch size")
    ap.add_argument("--steps", type=int, default=10_000,
                    help="integration steps per trajectory")
    ap.add_argument("--repeat", type=int, default=5,
                    help="repetitions (best time reported)")
    args = ap.parse_args()

    print(f"backend: {backend.backend_name()}")
    if not backend.compiled_available():
        print("compiled extension not built; timing the Python kernels only")
    print(f"{'kernel':<18} {'size':>9} {'py [ms]':>9} {'c [ms]':>9} "
          f"{'speedup':>9}")
    t_py, t_c = bench_stable_transform(args.draws, args.repeat)
    _row("stable_transform", args.draws, t_py, t_c)
    t_py, t_c = bench_integrate(args.steps, args.repeat)
    _row("integrate_theta", args.steps, t_py, t_c)


if __name__ == "__main__":
    main()
