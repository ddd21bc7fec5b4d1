import math

import numpy as np
import pytest
from scipy.special import lambertw

from toklink.numerics import bisect_root, lambert_w0


def test_bisect_root_quadratic():
    root = bisect_root(lambda x: x * x - 4.0, 0.0, 10.0)
    assert abs(root - 2.0) < 1e-9


def test_bisect_root_returns_exact_endpoint_zero():
    assert bisect_root(lambda x: x - 1.0, 1.0, 5.0) == 1.0
    assert bisect_root(lambda x: x - 5.0, 1.0, 5.0) == 5.0


def test_bisect_root_requires_sign_change():
    with pytest.raises(ValueError):
        bisect_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_bisect_root_decreasing_function():
    root = bisect_root(lambda x: 10.0 - x, 0.0, 100.0)
    assert abs(root - 10.0) < 1e-8


def test_lambert_w0_matches_scipy_on_dense_grid():
    xs = np.concatenate([
        np.linspace(-math.exp(-1.0) + 1e-12, -0.2, 60),
        np.linspace(-0.2, 5.0, 120),
        np.geomspace(5.0, 1e12, 60),
    ])
    for x in xs:
        mine = lambert_w0(float(x))
        ref = float(lambertw(float(x)).real)
        assert abs(mine - ref) <= 1e-9 * max(1.0, abs(ref))


def test_lambert_w0_identity_property():
    rng = np.random.default_rng(42)
    for _ in range(200):
        x = float(rng.uniform(-math.exp(-1.0) + 1e-9, 50.0))
        w = lambert_w0(x)
        assert abs(w * math.exp(w) - x) <= 1e-12 * max(1.0, abs(x))


def test_lambert_w0_special_points():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(-math.exp(-1.0)) == -1.0
    assert abs(lambert_w0(math.e) - 1.0) < 1e-12


def test_lambert_w0_rejects_below_branch_point():
    with pytest.raises(ValueError):
        lambert_w0(-0.5)
