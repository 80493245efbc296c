from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pclab.geometry import egg, expflat, unit_ball
from pclab.levi import weak_set_sample
from pclab.minkowski import (
    DimensionError,
    beta_from_dimension,
    best_slice,
    boundary_coords,
    box_count,
    dim_estimate,
    holder_exponent,
    real_root,
    root_samples,
    slice_dimension,
    slice_weak_set,
)


def segment(count=20001):
    x = np.linspace(0, 1, count)
    return np.column_stack([x, np.zeros_like(x)])


def test_box_count_examples():
    assert box_count([[0.3, 0.7]], 0.01) == 1
    assert box_count(np.zeros((0, 2)), 0.1) == 0
    for k in (3, 10, 40):
        assert box_count(segment(), 1 / k) in (k, k + 1)
    g = np.linspace(0, 1, 401)[:-1] + 1 / 800
    X, Y = np.meshgrid(g, g)
    square = np.column_stack([X.ravel(), Y.ravel()])
    for k in (4, 10, 20):
        assert box_count(square, 1 / k) == pytest.approx(k * k, rel=0.1)


@given(st.floats(1e-3, 0.5), st.integers(0, 1000))
def test_box_count_monotone_in_set(eps, seed):
    rng = np.random.default_rng(seed)
    B = rng.random((200, 2))
    A = B[: rng.integers(1, 200)]
    assert box_count(A, eps) <= box_count(B, eps)


def test_box_count_grows_as_eps_shrinks():
    rep = dim_estimate(segment(), 0.5, 0.002, 8)
    assert np.all(np.diff(rep.counts) >= 0)


def test_segment_dimension():
    rep = dim_estimate(segment(), 0.5, 0.002, 8)
    assert rep.dimension == pytest.approx(1.0, abs=0.1)
    assert 0 <= rep.dimension <= 2


def test_grid_shift_stability():
    x = np.linspace(0, 1, 20001)
    pts = np.column_stack([x, x ** (1 / 3)])
    a = dim_estimate(pts, 0.25, 0.002, 8).dimension
    b = dim_estimate(pts, 0.25, 0.002, 8, offset=0.5).dimension
    assert abs(a - b) < 0.1


def test_union_bound():
    x = np.linspace(0, 1, 20001)
    A = np.column_stack([x, np.zeros_like(x)])
    B = np.column_stack([np.zeros_like(x), x])
    parts = max(dim_estimate(P, 0.5, 0.002, 8).dimension for P in (A, B))
    assert dim_estimate(np.vstack([A, B]), 0.5, 0.002, 8).dimension <= parts + 0.1


def test_sample_starved_ladder_raises():
    sparse = np.column_stack([np.linspace(0, 1, 11), np.zeros(11)])
    with pytest.raises(DimensionError):
        dim_estimate(sparse, 0.5, 0.001, 8)
    with pytest.raises(ValueError):
        dim_estimate(segment(), 0.5, 0.01, 4)


def test_flat_weak_set_dimension_is_one():
    W = weak_set_sample(expflat(), 128)
    rep = dim_estimate(boundary_coords(W.points), 1.0, 0.1, 8)
    assert 0.8 <= rep.dimension <= 1.2


def test_root_graph_dimension():
    x = np.linspace(0, 1, 200001)
    pts = np.column_stack([x, x ** (1 / 3)])
    dim = dim_estimate(pts, 0.25, 0.001, 8).dimension
    assert 0.9 <= dim <= 2 - 1 / 3 + 0.15


@pytest.mark.parametrize("domain,tol", [(egg((1, 2)), None), (expflat(), 0.0)])
def test_slice_at_weak_point_is_a_point(domain, tol):
    # the flat model's determinant is below any relative tolerance on a whole
    # neighbourhood of z_2 = 0, so only exact zeros count there
    res = slice_weak_set(domain, np.array([1, 0], dtype=complex), 2, res=61, tol=tol)
    weak = res.weak_points
    assert 0 < len(weak) <= 9
    assert np.all(np.abs(weak) <= 2 * res.spacing)
    info = best_slice(domain, np.array([1, 0], dtype=complex), res=61, tol=tol)
    assert info["beta"] >= 1.7


def test_ball_slice_empty():
    res = slice_weak_set(unit_ball(2), np.array([1, 0], dtype=complex), 2, res=31)
    assert len(res.weak_points) == 0
    with pytest.raises(ValueError):
        slice_weak_set(unit_ball(2), np.array([1, 0], dtype=complex), 1)


def test_slice_dimension_of_weak_line():
    # Egg(3, (1, 1, 2)): W = {z_3 = 0}; the z_2 slice at a weak point is a full disc
    dom = egg((1, 1, 2))
    alpha = np.array([1, 0, 0], dtype=complex)
    res = slice_weak_set(dom, alpha, 2, [0.0], res=91, window=0.75)
    assert res.weak_mask.mean() > 0.9
    assert slice_dimension(res, 0.3).dimension > 1.7


def test_beta_floor():
    assert beta_from_dimension(0.0) == 2.0
    assert beta_from_dimension(2.4) == 0.0


@pytest.mark.parametrize("d", [2, 3])
def test_root_holder_exponents(d):
    x, y = root_samples(d)
    assert holder_exponent(x, y) == pytest.approx(1 / d, abs=0.05)


def test_holder_examples():
    x = np.linspace(0, 1, 4097)
    assert holder_exponent(x, x) == pytest.approx(1.0, abs=1e-6)
    assert holder_exponent(x, np.ones_like(x)) == 1.0
    with pytest.raises(ValueError):
        holder_exponent(x[:100], x[:100])


@given(st.integers(2, 6), st.floats(-2, 2))
def test_real_root_solves(d, c):
    if d % 2 == 0:
        c = abs(c)
    y = real_root(d, c)
    assert y ** d == pytest.approx(c, abs=1e-9)
    assert math.copysign(1, y) == math.copysign(1, c) or abs(c) < 1e-12
