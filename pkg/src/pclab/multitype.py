"""Contact orders of complex tangent lines and the greedy linear multitype."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .geometry import (
    BoundaryFrame,
    DomainSpec,
    dz_rho,
    gram_schmidt,
    line_series,
    tangent_frame,
)

INFINITE = math.inf
KMAX_DEFAULT = 12
DIRECTION_SAMPLES = 256
TANGENT_TOL = 1e-8
COEFF_TOL = 1e-10


def contact_order(domain: DomainSpec, alpha, L, kmax: int = KMAX_DEFAULT) -> float:
    """Order of contact of the complex line alpha + t L with the boundary.

    Smallest a + b >= 1 with a nonzero coefficient of t^a tbar^b in rho(alpha + t L);
    ``math.inf`` when none appears up to ``kmax``.
    """
    alpha = np.asarray(alpha, dtype=complex)
    L = np.asarray(L, dtype=complex)
    L = L / np.linalg.norm(L)
    d = dz_rho(domain, alpha)
    if abs(np.sum(d * L)) > TANGENT_TOL * max(1.0, np.linalg.norm(d)):
        raise ValueError("direction is not complex-tangent at alpha")
    c = np.abs(line_series(domain, alpha, L, kmax))
    c[0, 0] = 0.0
    tol = COEFF_TOL * max(1.0, float(c.max()))
    for k in range(1, kmax + 1):
        if any(c[a, k - a] > tol for a in range(k + 1)):
            return float(k)
    return INFINITE


def _direction_samples(basis: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors in span(basis): the basis itself, pairwise sums, then random combinations."""
    d = len(basis)
    dirs = [b for b in basis]
    for i, j in itertools.combinations(range(d), 2):
        dirs.append((basis[i] + basis[j]) / np.sqrt(2))
    while len(dirs) < count:
        c = rng.normal(size=d) + 1j * rng.normal(size=d)
        v = c @ basis
        dirs.append(v / np.linalg.norm(v))
    return np.array(dirs[:max(count, d)])


@dataclass
class MultiType:
    weight: tuple
    frame: BoundaryFrame
    kmax: int
    converged: bool = False
    infinite: bool = False
    parity_flag: bool = False
    repaired: bool = False
    valid: bool = True
    meta: dict = field(default_factory=lambda: {"method": "heuristic greedy maximal contact"})

    def to_json(self) -> dict:
        def enc(m):
            return "inf" if math.isinf(m) else int(m)

        return {
            "weight": [enc(m) for m in self.weight],
            "kmax": self.kmax,
            "converged": self.converged,
            "infinite_type": self.infinite,
            "odd_order_flag": self.parity_flag,
            "repaired": self.repaired,
            "weight_valid": self.valid,
            "frame": [[[float(v.real), float(v.imag)] for v in row] for row in self.frame.basis],
            "meta": self.meta,
        }


def _greedy(domain, alpha, kmax, samples, seed):
    rng = np.random.default_rng(seed)
    base = tangent_frame(domain, alpha)
    span = base.tangent
    chosen, orders = [], []
    while len(span):
        dirs = _direction_samples(span, samples, rng)
        cont = [contact_order(domain, alpha, v, kmax) for v in dirs]
        best = int(np.argmax(cont))
        e = dirs[best]
        chosen.append(e)
        orders.append(cont[best])
        rest = span - np.outer(span @ e.conj(), e)
        span = gram_schmidt(rest)
        span = span[: len(base.tangent) - len(chosen)]
    chosen.reverse()
    orders.reverse()
    frame = BoundaryFrame(alpha=base.alpha, basis=np.vstack([base.normal] + chosen))
    return tuple([1.0] + orders), frame


def linear_multitype(domain: DomainSpec, alpha, kmax: int = KMAX_DEFAULT,
                     samples: int = DIRECTION_SAMPLES, *, seed: int = 0,
                     repair: bool = False) -> MultiType:
    """Greedy linear multitype (1, m_2, ..., m_n) at a boundary point.

    The direction of largest contact is chosen among sampled tangent directions
    and removed; the process repeats on the orthogonal complement.  The result
    is a heuristic upper-level estimate, exact for the diagonal model domains.
    """
    weight, frame = _greedy(domain, alpha, kmax, samples, seed)
    weight2, _ = _greedy(domain, alpha, kmax + 2, samples, seed)
    infinite = any(math.isinf(m) for m in weight)
    odd = any(not math.isinf(m) and m > 1 and int(m) % 2 for m in weight[1:])
    repaired = False
    if repair and odd:
        weight = tuple(m if math.isinf(m) or m == 1 else float(m + (int(m) % 2)) for m in weight)
        repaired = True
    return MultiType(
        weight=weight,
        frame=frame,
        kmax=kmax,
        converged=weight2 == tuple(weight) if not repaired else False,
        infinite=infinite,
        parity_flag=odd,
        repaired=repaired,
        valid=(not infinite) and weight_valid(weight),
    )


def _prefix_solvable(m: list[int]) -> bool:
    # nonnegative a_1..a_{k-1}, positive a_k, sum a_j / m_j = 1
    k = len(m)
    reach = {Fraction(0)}
    for j in range(k - 1):
        nxt = set()
        for s in reach:
            for a in range(m[j] + 1):
                v = s + Fraction(a, m[j])
                if v <= 1:
                    nxt.add(v)
        reach = nxt
    return any(s + Fraction(a, m[-1]) == 1 for s in reach for a in range(1, m[-1] + 1))


def weight_valid(w, *, boundary: bool = True) -> bool:
    """Membership in the weight lattice.

    (i) entries nondecreasing; (ii) every finite prefix m_1..m_k admits
    integers a_j >= 0 with a_k > 0 and sum a_j / m_j = 1 (found by exhaustive
    search, a_j <= m_j).  With ``boundary`` the first entry must be 1, as for
    any smooth boundary point.
    """
    w = list(w)
    if not w or any(m <= 0 for m in w):
        return False
    if any(b < a for a, b in zip(w, w[1:])):
        return False
    if boundary and w[0] != 1:
        return False
    finite = [int(m) for m in w if not math.isinf(m)]
    if any(m != int(m) for m in w if not math.isinf(m)):
        return False
    return all(_prefix_solvable(finite[: k + 1]) for k in range(len(finite)))


def minimal_weight(n: int) -> tuple:
    return (1.0,) + (2.0,) * (n - 1)


def mu(weight) -> float:
    """mu = sum_{j >= 2} 1/m_j."""
    return float(sum(1.0 / m for m in weight[1:]))


def mu_j(weight, j: int) -> float:
    """mu_j = sum_{k != j} 1/m_k, with j counted from 1."""
    return float(sum(1.0 / m for k, m in enumerate(weight, start=1) if k != j))


def check_mu_bounds(weight) -> bool:
    """mu_1 <= (n-1)/2 and mu_j <= n/2 for j >= 2 (valid when m_j >= 2 for j >= 2)."""
    n = len(weight)
    if mu_j(weight, 1) > (n - 1) / 2 + 1e-12:
        return False
    return all(mu_j(weight, j) <= n / 2 + 1e-12 for j in range(2, n + 1))
