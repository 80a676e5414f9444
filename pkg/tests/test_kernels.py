import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from gicreg import kernels
from gicreg.model import ChannelParams
from gicreg.quadrature import QuadratureConfig, half_grid
from gicreg.schemes import _hk_terms, _two_mode_terms, evaluate_points, get_scheme
from gicreg.spectra import unit_shape_table

HAVE_COMPILED = "compiled" in kernels.available_backends()


def _case(num, den, n_pts, rng, n_nodes=256):
    s = num.shape[1]
    nodes, wt = half_grid(n_nodes)
    ar = rng.uniform(-0.8, 0.8, size=(n_pts * s, 1))
    ma = rng.uniform(-0.8, 0.8, size=(n_pts * s, 1))
    shapes = np.ascontiguousarray(unit_shape_table(ar, ma, nodes))
    gains = rng.uniform(0, 10, size=(n_pts, s))
    gains[rng.random(gains.shape) < 0.2] = 0.0
    idx = np.arange(n_pts * s, dtype=np.int64).reshape(n_pts, s)
    return gains, idx, shapes, wt, np.ascontiguousarray(num), np.ascontiguousarray(den)


def _reference(gains, idx, shapes, wt, num, den):
    g = gains[:, :, None] * shapes[idx]  # (N, S, K)
    a = np.einsum("ts,nsk->ntk", num, g)
    b = 1.0 + np.einsum("ts,nsk->ntk", den, g)
    return np.sum(wt * np.log2(1.0 + a / b), axis=-1)


@pytest.mark.parametrize("layout", ["two", "hk"])
def test_python_backend_matches_reference(layout, rng):
    ch = ChannelParams(6, 1, 3, 0.1)
    num, den = _two_mode_terms(ch) if layout == "two" else _hk_terms(ch)
    case = _case(num, den, 40, rng)
    np.testing.assert_allclose(kernels.get_backend("python")(*case), _reference(*case), rtol=0, atol=1e-13)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled extension not built")
@pytest.mark.parametrize("layout", ["two", "hk"])
def test_backends_agree(layout, rng):
    ch = ChannelParams(2, 5, 0.3, 1.7)
    num, den = _two_mode_terms(ch) if layout == "two" else _hk_terms(ch)
    case = _case(num, den, 60, rng)
    a = kernels.get_backend("compiled")(*case)
    b = kernels.get_backend("python")(*case)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled extension not built")
def test_compiled_rejects_bad_shapes(rng):
    num, den = _two_mode_terms(ChannelParams(1, 1, 1, 1))
    gains, idx, shapes, wt, num, den = _case(num, den, 3, rng)
    with pytest.raises(ValueError):
        kernels.get_backend("compiled")(gains, idx, shapes, wt[:-1].copy(), num, den)


@pytest.mark.parametrize("scheme", ["arma", "arma-split", "theorem2", "hk-corollary"])
def test_schemes_agree_across_backends_and_with_adaptive(scheme, rng):
    ch = ChannelParams(6, 1, 2, 0.3)
    sd = get_scheme(scheme)
    lo = np.where(sd.open_, -0.9, sd.lower)
    hi = np.where(sd.open_, 0.9, sd.upper)
    P = lo + rng.random((12, sd.dim)) * (hi - lo)
    ref = evaluate_points(ch, scheme, P, QuadratureConfig(method="adaptive", tol=1e-12)).pts
    for be in kernels.available_backends():
        got = evaluate_points(ch, scheme, P, backend=be).pts
        m = ~np.isnan(ref)
        np.testing.assert_allclose(got[m], ref[m], rtol=0, atol=1e-10)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


def test_env_forces_fallback():
    code = "import gicreg.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, GICREG_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
