import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouvillekit import kernels
from liouvillekit.da import DAParams, a_polynomial, deformed_contact_density

py = kernels.python_backend
cy = kernels.compiled_backend
needs_compiled = pytest.mark.skipif(cy is None, reason="compiled kernels not built")

da_params = st.builds(
    lambda mu, nu, frac, eta: (mu, nu, nu + frac * (mu - nu), eta),
    st.floats(0.2, 3.0), st.floats(-3.0, -0.2), st.floats(0.0, 0.95), st.floats(0.1, 0.9))


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    assert (kernels.BACKEND == "cython") == (cy is not None)


@pytest.mark.parametrize("n", [3, 21, 201])
def test_python_a_poly_matches_direct_evaluation(n):
    g = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    vals = a_polynomial(X, Y)
    mx, i, j, count = py.a_poly_grid(n)
    assert mx == vals.max() and (i, j) == np.unravel_index(np.argmax(vals), vals.shape)
    assert count == int(np.sum(vals >= vals.max() - 1e-12))


def test_python_contact_grid_matches_forms():
    p = DAParams()
    n = 41
    g = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    plus = deformed_contact_density(p, 1, pts)
    minus = deformed_contact_density(p, -1, pts)
    mn, imin, mx, imax = py.da_contact_grid(p.mu, p.nu, p.nubar, p.eta, n)
    assert mn == pytest.approx(plus.min(), abs=1e-14)
    assert mx == pytest.approx(minus.max(), abs=1e-14)
    assert plus[imin] == pytest.approx(mn, abs=1e-14)


@needs_compiled
@pytest.mark.parametrize("n", [3, 21, 201, 2001])
def test_a_poly_backends_agree(n):
    a, b = py.a_poly_grid(n), cy.a_poly_grid(n)
    assert a[1:] == b[1:]
    assert a[0] == pytest.approx(b[0], abs=1e-15)


@needs_compiled
@settings(max_examples=30)
@given(da_params, st.integers(8, 120))
def test_contact_grid_backends_agree(params, n):
    a = py.da_contact_grid(*params, n)
    b = cy.da_contact_grid(*params, n)
    assert a[0] == pytest.approx(b[0], rel=1e-13, abs=1e-13)
    assert a[2] == pytest.approx(b[2], rel=1e-13, abs=1e-13)


@needs_compiled
@settings(max_examples=15)
@given(da_params, st.integers(0, 2**31))
def test_birkhoff_backends_agree(params, seed):
    rng = np.random.default_rng(seed)
    starts = np.vstack([[0.0, 0.0, 0.0], rng.uniform(-1, 1, (6, 3))])
    steps = np.array([10, 50, 100], dtype=np.int64)
    a = py.da_sync_birkhoff(*params, starts, 1e-2, steps)
    b = cy.da_sync_birkhoff(*params, starts, 1e-2, steps)
    assert a.shape == b.shape == (7, 3)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-13)


def test_birkhoff_fixed_point():
    mu, nu, nubar, eta = 1.0, -1.0, 0.5, 0.5
    out = kernels.da_sync_birkhoff(mu, nu, nubar, eta, np.zeros((1, 3)), 1e-2,
                                   np.array([100, 6400], dtype=np.int64))
    assert np.allclose(out, nubar / mu, rtol=1e-14)


def test_pure_backend_env():
    env = dict(os.environ, LIOUVILLEKIT_PURE="1")
    res = subprocess.run([sys.executable, "-c",
                          "from liouvillekit import kernels; print(kernels.BACKEND)"],
                         capture_output=True, text=True, env=env)
    assert res.stdout.strip() == "python"
