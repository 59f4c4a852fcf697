"""Backend selection and compiled-vs-fallback agreement."""

import os
import subprocess
import sys

import numpy as np
import pytest

from tcsde import backend
from tcsde._kernels_py import stable_transform as py_stable_transform
from tcsde.clock import BrownianDriver, simulate_subordinator
from tcsde.models import catalog, make_builtin
from tcsde.rng import CLOCK_STREAM, NOISE_STREAM, substream
from tcsde.theta import SchemeConfig, _integrate_python, integrate

SEED = 123456789

needs_c = pytest.mark.skipif(not backend.compiled_available(),
                             reason="compiled extension not importable")


def test_backend_name_consistent():
    if backend.compiled_available():
        assert backend.backend_name() == "c"
    else:
        assert backend.backend_name() == "python"


def test_integrate_builtin_declines_unknown_kind():
    out = backend.integrate_builtin(-1, (), 1.0, 1.0, 0.1,
                                    np.asarray([0.0, 0.1]),
                                    np.asarray([0.05]),
                                    1e-12, 100, 60, False)
    assert out is None


@needs_c
def test_stable_transform_backends_agree():
    rng = np.random.default_rng(SEED)
    u = rng.uniform(1e-9, np.pi - 1e-9, size=5000)
    w = rng.exponential(size=5000)
    for alpha in (0.3, 0.55, 0.9):
        a = backend.stable_transform(alpha, 2.0, u, w)
        b = py_stable_transform(alpha, 2.0, u, w)
        np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_c
@pytest.mark.parametrize("name", [n for n in catalog()])
def test_integration_backends_agree(name):
    model = make_builtin(name)
    if model.kernel_kind < 0:
        pytest.skip("no compiled kernel for this model")
    delta = 0.01
    path = simulate_subordinator(0.9, delta, 0.5,
                                 substream(SEED, 21, CLOCK_STREAM))
    driver = BrownianDriver.sample(path.n_complete, delta,
                                   substream(SEED, 21, NOISE_STREAM))
    n = int(np.searchsorted(path.values, 0.5, side="right")) - 1
    tau = path.values[: n + 1]
    db = driver.increments[:n]
    out = backend.integrate_builtin(model.kernel_kind, model.kernel_params,
                                    model.x0, 0.5, delta, tau, db,
                                    1e-12, 100, 60, True)
    assert out is not None and not isinstance(out, int)
    x_c, comp_c, iters_c = out
    x_p, comp_p, iters_p = _integrate_python(model, 0.5, delta, tau, db,
                                             1e-12, 100, 60, True)
    np.testing.assert_allclose(x_c, x_p, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(comp_c, comp_p, rtol=1e-10, atol=1e-12)
    assert iters_c.shape == iters_p.shape


@needs_c
def test_integrate_wrapper_uses_same_semantics_either_backend():
    # full wrapper comparison: compiled dispatch vs forced python fallback
    model = make_builtin("stability_cubic")
    delta = 0.01
    path = simulate_subordinator(0.9, delta, 1.0,
                                 substream(SEED, 22, CLOCK_STREAM))
    driver = BrownianDriver.sample(path.n_complete, delta,
                                   substream(SEED, 22, NOISE_STREAM))
    cfg = SchemeConfig(theta=1.0, delta=delta, horizon=1.0)
    rec = integrate(model, cfg, path, driver, with_fbem=True)
    x_p, comp_p, _ = _integrate_python(model, 1.0, delta, rec.tau,
                                       driver.increments[: rec.n_steps],
                                       1e-12, 100, 60, True)
    np.testing.assert_allclose(rec.x_st, x_p, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(rec.x_fbem, comp_p, rtol=1e-10, atol=1e-12)


def _run_subprocess(env_value):
    env = dict(os.environ)
    env["TCSDE_BACKEND"] = env_value
    return subprocess.run(
        [sys.executable, "-c",
         "from tcsde import backend; print(backend.backend_name())"],
        capture_output=True, text=True, env=env)


def test_env_forces_python_fallback():
    proc = _run_subprocess("py")
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "python"


def test_env_rejects_unknown_backend():
    proc = _run_subprocess("fortran")
    assert proc.returncode != 0
    assert "TCSDE_BACKEND" in proc.stderr
