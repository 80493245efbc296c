from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from pclab.geometry import boundary_grid, egg, expflat, polynomial, tangent_frame, unit_ball
from pclab.levi import classify_point
from pclab.multitype import (
    check_mu_bounds,
    contact_order,
    linear_multitype,
    minimal_weight,
    mu,
    mu_j,
    weight_valid,
)

from oracles import symbolic_rho


def contact_oracle(domain, alpha, L, kmax):
    """Lowest total degree in (t, tbar) of rho(alpha + t L) - rho(alpha), by sympy expansion."""
    expr, z, w = symbolic_rho(domain)
    t, s = sp.symbols("t s")
    sub = {z[j]: complex(alpha[j]) + t * complex(L[j]) for j in range(domain.n)}
    sub.update({w[j]: complex(np.conj(alpha[j])) + s * complex(np.conj(L[j])) for j in range(domain.n)})
    poly = sp.Poly(sp.expand(expr.subs(sub)), t, s)
    for k in range(1, kmax + 1):
        for (a, b), c in poly.terms():
            if a + b == k and abs(complex(c)) > 1e-10:
                return k
    return math.inf


def brute_valid(w):
    # positive a_j <= m_j per prefix, plain enumeration
    if any(b < a for a, b in zip(w, w[1:])) or w[0] != 1:
        return False
    for k in range(1, len(w) + 1):
        m = w[:k]
        ranges = [range(0, x + 1) for x in m[:-1]] + [range(1, m[-1] + 1)]
        if not any(sum(Fraction(a, x) for a, x in zip(c, m)) == 1 for c in product(*ranges)):
            return False
    return True


@pytest.mark.parametrize("domain,alpha,L,kmax,want", [
    (unit_ball(2), [1, 0], [0, 1], 12, 2),
    (egg((1, 2)), [1, 0], [0, 1], 12, 4),
    (expflat(), [1, 0], [0, 1], 16, math.inf),
])
def test_contact_order_examples(domain, alpha, L, kmax, want):
    assert contact_order(domain, np.array(alpha, dtype=complex), np.array(L, dtype=complex), kmax) == want


@pytest.mark.parametrize("domain,alpha", [
    (egg((1, 2)), [0.8, 0.6 ** 0.5]),
    (egg((1, 3)), [1.0, 0.0]),
    (egg((1, 2, 3)), [0.0, 0.0, 1.0]),
    (egg((1, 2, 3)), [1.0, 0.0, 0.0]),
])
def test_contact_order_matches_expansion(domain, alpha):
    alpha = np.array(alpha, dtype=complex)
    for L in tangent_frame(domain, alpha).tangent:
        assert contact_order(domain, alpha, L, 8) == contact_oracle(domain, alpha, L, 8)


def test_contact_order_rejects_normal(egg12):
    with pytest.raises(ValueError):
        contact_order(egg12, np.array([1, 0], dtype=complex), np.array([1, 0], dtype=complex))


@given(st.floats(0, 2 * np.pi))
def test_contact_order_phase_invariant(theta):
    dom = egg((1, 2))
    a = np.array([1, 0], dtype=complex)
    L = np.array([0, 1], dtype=complex)
    assert contact_order(dom, a, np.exp(1j * theta) * L) == contact_order(dom, a, L)


def test_multitype_examples(ball3, egg12):
    for alpha in boundary_grid(ball3, 8)[::41]:
        mt = linear_multitype(ball3, alpha, samples=32)
        assert mt.weight == (1, 2, 2) and mt.converged
    mt = linear_multitype(egg12, np.array([1, 0], dtype=complex), samples=32)
    assert mt.weight == (1, 4) and mt.converged and mt.valid
    assert linear_multitype(egg12, np.array([0, 1], dtype=complex), samples=32).weight == (1, 2)


def test_multitype_frame_is_adapted(egg12):
    mt = linear_multitype(egg12, np.array([np.exp(0.4j), 0], dtype=complex), samples=32)
    B = mt.frame.basis
    assert np.allclose(B @ B.conj().T, np.eye(2), atol=1e-10)
    assert contact_order(egg12, mt.frame.alpha, B[1]) == 4


def test_multitype_infinite_flag(flat):
    mt = linear_multitype(flat, np.array([1, 0], dtype=complex), samples=16)
    assert mt.infinite and not mt.valid


def test_strict_points_have_minimal_weight(egg12):
    for alpha in boundary_grid(egg12, 8)[::9]:
        if classify_point(egg12, alpha) == "Strict":
            assert linear_multitype(egg12, alpha, samples=16).weight == minimal_weight(2)


def test_kmax_monotone(egg12):
    a = np.array([1, 0], dtype=complex)
    small = linear_multitype(egg12, a, kmax=3, samples=16)
    big = linear_multitype(egg12, a, kmax=8, samples=16)
    assert math.isinf(small.weight[1]) and big.weight[1] == 4


def test_odd_order_flag_and_repair():
    dom = egg((1, 3))
    a = np.array([1, 0], dtype=complex)
    mt = linear_multitype(dom, a, samples=16)
    assert mt.weight == (1, 6) and not mt.parity_flag
    # rho = |z1|^2 - 1 + Re(z2^2 zbar2) has odd contact 3 along z2
    odd = polynomial(2, [
        {"alpha": [1, 0], "beta": [1, 0], "coeff": 1.0},
        {"alpha": [0, 0], "beta": [0, 0], "coeff": -1.0},
        {"alpha": [0, 2], "beta": [0, 1], "coeff": 0.5},
        {"alpha": [0, 1], "beta": [0, 2], "coeff": 0.5},
    ])
    mt = linear_multitype(odd, a, samples=16)
    # odd orders are flagged; (1, 3) itself is a lattice weight (a = (0, 3))
    assert mt.weight[1] == 3 and mt.parity_flag and mt.valid
    fixed = linear_multitype(odd, a, samples=16, repair=True)
    assert fixed.weight[1] == 4 and fixed.repaired


@pytest.mark.parametrize("w,want", [((1, 2, 2), True), ((1, 4), True), ((2, 3), False), ((1, 3, 2), False)])
def test_weight_valid_examples(w, want):
    assert weight_valid(w) is want


@given(st.lists(st.integers(1, 6), min_size=1, max_size=3))
def test_weight_valid_matches_enumeration(tail):
    w = (1, *sorted(tail))
    assert weight_valid(w) == brute_valid(list(w))


@given(st.lists(st.sampled_from([2, 4, 6, 8]), min_size=1, max_size=4))
def test_mu_bounds(tail):
    w = (1.0, *sorted(float(m) for m in tail))
    n = len(w)
    assert check_mu_bounds(w)
    assert mu(w) == pytest.approx(sum(1 / m for m in w[1:]))
    assert mu_j(w, 1) == pytest.approx(mu(w))
    assert all(mu_j(w, j) <= n / 2 for j in range(2, n + 1))
