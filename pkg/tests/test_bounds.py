import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nncondense.bounds import (
    bound_consistent,
    bound_eps_consistent,
    corollary_bound,
    estimate_ddim,
    gkk10_bound,
    gkk10_dimension,
    packing_bound,
    srm_grid_search,
)
from nncondense.errors import EllExceedsN, InvalidRange, NoFeasiblePoint, SubsetTooLarge, TooFewLevels, VacuousBound
from nncondense.metric import load, scaled_margin
from nncondense.nets import build_hierarchy


def test_packing_bound_examples():
    assert packing_bound(2, 1, 1) == 4
    assert packing_bound(1 + 1e-9, 1, 3) == 2**4
    assert packing_bound(1, 0.1, 2) == 1000
    with pytest.raises(InvalidRange):
        packing_bound(1, 1, 2)


def test_bound_consistent_value():
    n, k, d = 1000, 10, 0.05
    want = (k * np.log(n) + np.log(n) + np.log(1 / d)) / (n - k)
    assert bound_consistent(n, k, d) == pytest.approx(want, rel=1e-14)
    assert bound_consistent(n, n - 1, d) > 1
    with pytest.raises(SubsetTooLarge):
        bound_consistent(n, n, d)


def test_bound_eps_consistent_value():
    n, k, e, d = 1000, 10, 0.01, 0.05
    want = e * n / (n - k) + np.sqrt((k * np.log(n) + 2 * np.log(n) - np.log(d)) / (2 * (n - k)))
    assert bound_eps_consistent(n, k, e, d) == pytest.approx(want, rel=1e-14)
    sqrt_only = np.sqrt((k * np.log(n) + 2 * np.log(n) - np.log(d)) / (2 * (n - k)))
    assert bound_eps_consistent(n, k, 0.0, d) == pytest.approx(sqrt_only, rel=1e-14)


def test_corollary_cases():
    assert corollary_bound(100, 0.1, 0.05, 1.0, 3) == bound_eps_consistent(100, 1, 0.1, 0.05)
    v = corollary_bound(10**6, 0.0, 0.05, 0.1, 2)
    assert v == bound_eps_consistent(10**6, 1000, 0.0, 0.05) and math.isfinite(v)
    with pytest.raises(EllExceedsN):
        corollary_bound(500, 0.0, 0.05, 0.1, 2)


def test_gkk10_cases():
    assert gkk10_dimension(16, 3) == 1
    a = gkk10_bound(10**5, 0.0, 0.05, 0.5, 1)
    b = gkk10_bound(10**6, 0.0, 0.05, 0.5, 1)
    assert b < a
    with pytest.raises(VacuousBound):
        gkk10_bound(100, 0.0, 0.05, 0.1, 2)


@settings(max_examples=200, deadline=None)
@given(
    st.integers(100, 10**7),
    st.sampled_from([0.5, 0.25, 0.125, 0.1, 0.05]),
    st.integers(0, 3),
    st.floats(0, 0.5),
    st.floats(0.001, 0.5),
)
def test_corollary_beats_gkk10(n, gamma, ddim, eps, delta):
    try:
        ours = corollary_bound(n, eps, delta, gamma, ddim)
        theirs = gkk10_bound(n, eps, delta, gamma, ddim)
    except (EllExceedsN, VacuousBound):
        return
    assert ours < theirs


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 10**6), st.integers(1, 100), st.floats(0.001, 0.99))
def test_doubling_n_decreases_bounds(n, k, delta):
    if k >= n:
        return
    assert bound_consistent(2 * n, k, delta) < bound_consistent(n, k, delta)
    assert bound_eps_consistent(2 * n, k, 0.0, delta) < bound_eps_consistent(n, k, 0.0, delta)


def _grid(shape, spacing=1.0):
    axes = [np.arange(s) * spacing for s in shape]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(shape))
    return load(pts, np.ones(len(pts)), "l1")


def test_ddim_estimates_on_grids():
    e1 = estimate_ddim(build_hierarchy(_grid((64,)), min_level=-6)).value
    assert abs(e1 - 1) <= 0.5
    e2 = estimate_ddim(build_hierarchy(_grid((24, 24)), min_level=-6)).value
    assert abs(e2 - 2) <= 0.7


def test_ddim_two_points_and_too_few_levels():
    ps = load([[0.0], [1.0]], [1, -1])
    assert estimate_ddim(build_hierarchy(ps)).value == 1.0
    with pytest.raises(TooFewLevels):
        estimate_ddim(build_hierarchy(load([[0.0]], [1])))


def _separated(rng, n=400):
    X = np.r_[rng.uniform(0, 0.3, n // 2), rng.uniform(0.7, 1.0, n // 2)]
    y = np.r_[np.ones(n // 2), -np.ones(n // 2)]
    return X, y


def test_srm_separated_set(rng):
    X, y = _separated(rng)
    ps = load(X[:, None], y, "l1")
    g = scaled_margin(ps).gamma
    r = srm_grid_search(ps, [(0.0, g)], ddim=1)
    assert r.epsilon == 0.0 and r.gamma == g and len(r.members) == ps.n


def test_srm_drops_outlier(rng):
    X, y = _separated(rng)
    ps = load(np.r_[X, 0.75][:, None], np.r_[y, 1], "l1")
    g = scaled_margin(ps).gamma
    r = srm_grid_search(ps, [(0.0, g), (0.01, 0.35)], ddim=1)
    assert r.gamma == 0.35 and r.epsilon == pytest.approx(1 / ps.n)
    assert ps.n - 1 not in set(r.members.tolist())
    with pytest.raises(NoFeasiblePoint):
        srm_grid_search(ps, [(0.0, g)], ddim=1)
