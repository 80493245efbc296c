from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pclab.geometry import boundary_grid, egg, expflat, tangent_frame, unit_ball
from pclab.levi import (
    analytic_weak_mask,
    classify_point,
    classify_points,
    default_weak_tol,
    levi_determinant,
    levi_determinants,
    levi_matrix,
    min_levi_eigenvalue,
    nonflatness_order,
    weak_set_sample,
)

from oracles import levi_oracle


def egg_point(share, phase1=0.0, phase2=0.0):
    # |z1|^2 = 1 - share, |z2|^4 = share
    return np.array([math.sqrt(1 - share) * np.exp(1j * phase1), share ** 0.25 * np.exp(1j * phase2)])


def flat_point(s, phase=0.0):
    # |z2|^2 = s, |z1|^2 = 1 - exp(1 - 1/s)
    return np.array([math.sqrt(1 - math.exp(1 - 1 / s)), math.sqrt(s) * np.exp(1j * phase)])


@pytest.mark.parametrize("domain,alpha,want", [
    (unit_ball(2), [1.0, 0.0], 1.0),
    (egg((1, 2)), [1.0, 0.0], 0.0),
    (egg((1, 2)), [0.0, 1.0], 1.0),
])
def test_levi_matrix_examples(domain, alpha, want):
    M = levi_matrix(domain, tangent_frame(domain, np.array(alpha, dtype=complex))).entries
    assert M.shape == (1, 1)
    assert abs(M[0, 0] - want) < 1e-12


def test_levi_determinant_examples(ball3, egg12, flat):
    for alpha in boundary_grid(ball3, 8)[::37]:
        assert math.isclose(levi_determinant(ball3, alpha), 1.0, rel_tol=1e-10)
    assert levi_determinant(egg12, [1.0, 0.0]) == pytest.approx(0.0, abs=1e-14)
    assert levi_determinant(flat, [1.0, 0.0]) == pytest.approx(0.0, abs=1e-14)


@given(st.floats(0.02, 0.98), st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
def test_egg_determinant_matches_symbolic(share, p1, p2):
    dom = egg((1, 2))
    alpha = egg_point(share, p1, p2)
    want = levi_oracle(dom, alpha)
    assert levi_determinant(dom, alpha) == pytest.approx(want, rel=1e-9, abs=1e-13)
    assert levi_determinants(dom, alpha)[0] == pytest.approx(want, rel=1e-9, abs=1e-13)


@given(st.floats(0.15, 0.95), st.floats(0, 2 * np.pi))
def test_flat_determinant_matches_symbolic(s, phase):
    dom = expflat()
    alpha = flat_point(s, phase)
    assert levi_determinant(dom, alpha) == pytest.approx(levi_oracle(dom, alpha), rel=1e-9, abs=1e-13)


def test_frame_independence(ball3):
    # a unitary change of tangent basis leaves the determinant unchanged
    dom = egg((1, 2, 3))
    pts = boundary_grid(dom, 8)[::23]
    frame_free = levi_determinants(dom, pts)
    framed = np.array([levi_determinant(dom, p) for p in pts])
    assert np.max(np.abs(frame_free - framed)) < 1e-8
    pts = boundary_grid(ball3, 8)
    assert np.allclose(levi_determinants(ball3, pts), 1.0, atol=1e-10)


def test_classify_examples(ball2, egg12, flat):
    assert classify_point(ball2, [0.0, 1.0]) == "Strict"
    assert classify_point(egg12, [np.exp(0.7j), 0.0]) == "Weak"
    assert classify_point(flat, flat_point(0.5)) == "Strict"


def test_weak_tol_is_scale_relative(egg12):
    dets = levi_determinants(egg12, boundary_grid(egg12, 16))
    assert default_weak_tol(egg12) == pytest.approx(1e-8 * np.max(np.abs(dets)))


def test_weak_set_sample_examples(ball2, egg12, flat):
    assert len(weak_set_sample(ball2, 64)) == 0
    for dom in (egg12, flat):
        S = weak_set_sample(dom, 64)
        assert len(S) > 0
        assert np.all(np.abs(S.points[:, 1]) <= S.spacing)
        assert np.allclose(np.abs(S.points[:, 0]), 1.0, atol=S.spacing)
        assert np.all(np.abs(levi_determinants(dom, S.points)) <= S.tol)


def test_weak_set_agrees_with_analytic(egg12, flat):
    for dom in (egg12, flat):
        grid = boundary_grid(dom, 48)
        agree = np.mean(classify_points(dom, grid) == analytic_weak_mask(dom, grid))
        assert agree >= 0.99


def test_pseudoconvexity_on_models(ball3, egg12, flat):
    for dom in (ball3, egg12, flat, egg((1, 2, 3))):
        assert min_levi_eigenvalue(dom, boundary_grid(dom, 8)[::3]) >= -1e-8


def test_nonflatness_examples(ball2, egg12, flat):
    e1 = np.array([1.0, 0.0], dtype=complex)
    e2 = np.array([0.0, 1.0], dtype=complex)
    assert nonflatness_order(egg12, e1, e2, 8) == 2
    assert nonflatness_order(flat, e1, e2, 12) == "Flat"
    assert nonflatness_order(flat, e1, 1j * e2, 12) == "Flat"
    assert nonflatness_order(ball2, e1, e2, 2) == 0


def test_nonflatness_rejects_normal_direction(egg12):
    with pytest.raises(ValueError):
        nonflatness_order(egg12, np.array([1.0, 0.0]), np.array([1.0, 0.0]), 4)
