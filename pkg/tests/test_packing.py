from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pclab.geometry import boundary_grid, egg, expflat, unit_ball
from pclab.levi import weak_set_sample
from pclab.packing import (
    Packer,
    greedy_pack,
    layered_pack,
    nu_ratio,
    on_weak_set,
    packing_lemma_check,
    theorem_sum,
)
from pclab.polydisc import fixed_family, minimal_family

complex_pair = st.tuples(st.floats(-1, 1), st.floats(-1, 1)).map(lambda t: complex(*t))


def coordinate_separated(c1, r1, c2, r2):
    # axis-aligned polydiscs are disjoint iff one coordinate disc pair is
    return any(abs(a - b) >= s + t - 1e-12 for a, b, s, t in zip(c1, c2, r1, r2))


def sampled_overlap(c1, r1, B1, c2, r2, B2, rng, count=4000):
    """Monte Carlo search for a point of the first polydisc inside the second."""
    w = np.sqrt(rng.random((count, len(r1)))) * np.exp(2j * np.pi * rng.random((count, len(r1))))
    pts = c1 + (w * r1) @ B1
    coords = (pts - c2) @ B2.conj().T
    return bool(np.any(np.all(np.abs(coords) < r2 * (1 - 1e-9), axis=1)))


@given(st.lists(complex_pair, min_size=4, max_size=4),
       st.lists(st.floats(0.01, 0.5), min_size=4, max_size=4))
def test_support_acceptance_implies_disjoint(c, r):
    c1, c2 = np.array(c[:2]), np.array(c[2:])
    r1, r2 = np.array(r[:2]), np.array(r[2:])
    P = Packer(2)
    P.add(c1, r1, np.eye(2, dtype=complex))
    if P.fits(c2, r2, np.eye(2, dtype=complex)):
        assert coordinate_separated(c1, r1, c2, r2)


@given(st.integers(0, 10_000))
def test_support_acceptance_rotated_frames(seed):
    rng = np.random.default_rng(seed)
    B1 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    B2 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    c1 = rng.normal(size=2) + 1j * rng.normal(size=2)
    c2 = c1 + 0.4 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    r1, r2 = rng.uniform(0.05, 0.3, 2), rng.uniform(0.05, 0.3, 2)
    P = Packer(2)
    P.add(c1, r1, B1)
    if P.fits(c2, r2, B2):
        assert not sampled_overlap(c1, r1, B1, c2, r2, B2, rng)


def test_same_center_rejected():
    P = Packer(2)
    assert P.offer(np.zeros(2, dtype=complex), np.array([0.1, 0.1]), np.eye(2, dtype=complex))
    assert not P.offer(np.zeros(2, dtype=complex), np.array([1e-6, 1e-6]), np.eye(2, dtype=complex))


def test_touching_polydiscs_accepted():
    P = Packer(2)
    P.add(np.zeros(2, dtype=complex), np.array([0.1, 0.1]), np.eye(2, dtype=complex))
    assert P.fits(np.array([0.2, 0.0], dtype=complex), np.array([0.1, 0.1]), np.eye(2, dtype=complex))


def test_nu_ratio():
    assert nu_ratio(1 / 3) == pytest.approx(0.5)
    assert nu_ratio(0.2) == pytest.approx(2 / 3)


def test_collar_packing_is_disjoint():
    dom = unit_ball(2)
    fam = minimal_family(dom, boundary_grid(dom, 8))
    P = greedy_pack(dom, fam, 0.3, "collar", budget=1500, seed=1)
    assert len(P) > 0
    assert P.verify_disjoint()
    assert np.all(P.r > 0)
    again = greedy_pack(dom, fam, 0.3, "collar", budget=1500, seed=1)
    assert np.array_equal(P.centers, again.centers)


def test_layered_packing_depths_and_feet():
    dom = expflat()
    W = weak_set_sample(dom, 32)
    fam = minimal_family(dom, boundary_grid(dom, 8))
    P = greedy_pack(dom, fam, 0.2, "weak", W_points=W.points, gamma0=0.25, layers=6)
    assert len(P) > 0 and P.verify_disjoint()
    assert on_weak_set(P, dom, W.points, 1e-9)
    assert np.allclose(P.r, 0.25 * nu_ratio(0.2) ** P.layer)
    assert np.all(np.abs(P.feet[:, 1]) <= W.spacing)


def test_layer_depths_halve_at_one_third():
    dom = egg((1, 2))
    W = weak_set_sample(dom, 32)
    fam = minimal_family(dom, boundary_grid(dom, 8))
    P = layered_pack(dom, fam, 1 / 3, W.points, 0.2, 4)
    assert sorted(set(np.round(P.r, 12))) == pytest.approx([0.025, 0.05, 0.1, 0.2])


def test_empty_cases():
    dom = egg((1, 2))
    fam = minimal_family(dom, boundary_grid(dom, 8))
    P = layered_pack(dom, fam, 0.2, np.zeros((0, 2)), 0.2, 0)
    assert len(P) == 0 and theorem_sum(P).total == 0.0
    with pytest.raises(ValueError):
        greedy_pack(dom, fam, 0.2, "weak", W_points=np.zeros((0, 2)))
    with pytest.raises(ValueError):
        greedy_pack(dom, fam, 0.2, "nowhere")


def test_layer_counts_match_direct_count():
    # on the weak circle the circle direction is i times the normal, so neighbours
    # need chord 2 (1 - gamma) sin(pi j / N) >= 2 delta gamma
    dom = egg((1, 2))
    W = weak_set_sample(dom, 128)
    N = len(W.points)
    fam = fixed_family(dom, boundary_grid(dom, 8), lambda p: (1, 4) if abs(p[1]) < 1e-9 else (1, 2))
    P = layered_pack(dom, fam, 0.2, W.points, 0.2, 8)
    counts = np.bincount(P.layer)
    for k, gamma in enumerate(0.2 * nu_ratio(0.2) ** np.arange(8)):
        chord = 2 * (1 - gamma) * np.sin(np.pi * np.arange(1, N) / N)
        j = 1 + int(np.argmax(chord >= 2 * 0.2 * gamma * (1 - 1e-12)))
        assert abs(counts[k] - N / j) <= 1


def test_theorem_sum_rules_agree_on_minimal_family():
    dom = unit_ball(2)
    fam = minimal_family(dom, boundary_grid(dom, 8))
    P = greedy_pack(dom, fam, 0.3, "collar", budget=400, seed=0)
    a = theorem_sum(P, "one_plus_two_mu")
    b = theorem_sum(P, "power_n")
    assert a.total == pytest.approx(b.total, rel=1e-14)
    assert a.total == pytest.approx(float(np.sum(P.r ** 2)))


def test_theorem_sum_monotone_in_layers():
    dom = egg((1, 2))
    W = weak_set_sample(dom, 64)
    fam = fixed_family(dom, boundary_grid(dom, 8), lambda p: (1, 4) if abs(p[1]) < 1e-9 else (1, 2))
    totals = [theorem_sum(layered_pack(dom, fam, 0.2, W.points, 0.2, K)).total for K in (4, 8, 12)]
    assert totals[0] <= totals[1] <= totals[2]
    s = theorem_sum(layered_pack(dom, fam, 0.2, W.points, 0.2, 8))
    assert np.all(np.diff(s.partial_sums) >= 0)
    assert s.ratio is not None and s.ratio < 1


def test_packing_lemma_examples():
    seg = np.stack([np.linspace(0, 1, 4001), np.zeros(4001)], axis=1).astype(complex)
    r = 2.0 ** -np.arange(3, 9)
    rep = packing_lemma_check(seg, [1.0], r, 0.9)
    # counting oracle: centers 2r apart on the 1/4000 grid along a unit segment
    step = np.ceil(2 * r * 4000 - 1e-9)
    assert np.all(rep.counts == np.floor(4000 / step) + 1)
    assert rep.passed
    one = packing_lemma_check(np.zeros((1, 2), dtype=complex), [1.0], r, 0.9)
    assert np.allclose(one.areas, math.pi ** 2 * r ** 4)
    assert one.slope == pytest.approx(4.0)
    empty = packing_lemma_check(np.zeros((0, 2)), [1.0], r, 0.9)
    assert np.all(empty.areas == 0)
