"""Graph divisors in C^2: projection areas, Wirtinger bound, chart scaling, Malliavin-type sums."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, dblquad
from scipy.optimize import brentq

from .geometry import (
    DomainSpec,
    GeometryError,
    boundary_grid,
    eval_rho,
    hermitian,
    project_to_boundary,
    real_gradient,
)
from .multitype import mu_j
from .polydisc import GoodFamily, minimal_family

QUAD_REL = 1e-10
C1 = math.pi  # volume of the unit ball of C^1


@dataclass(frozen=True)
class DivisorGraph:
    """X = {z_dep = g(z_free)} with g(z) = sum_k coeffs[k] z^k.

    ``dependent = 0`` is the graph z_1 = g(z_2); ``dependent = 1`` is z_2 = g(z_1).
    """

    coeffs: tuple
    dependent: int = 0

    def g(self, z):
        return np.polynomial.polynomial.polyval(z, np.asarray(self.coeffs, dtype=complex))

    def dg(self, z):
        c = np.asarray(self.coeffs, dtype=complex)
        if len(c) < 2:
            return np.zeros_like(np.asarray(z, dtype=complex))
        return np.polynomial.polynomial.polyval(z, c[1:] * np.arange(1, len(c)))

    def point(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.empty(zeta.shape + (2,), dtype=complex)
        out[..., self.dependent] = self.g(zeta)
        out[..., 1 - self.dependent] = zeta
        return out

    def inside_unit_polydisc(self, R: float = 1.0, samples: int = 512) -> bool:
        theta = 2 * np.pi * np.arange(samples) / samples
        return bool(np.max(np.abs(self.g(R * np.exp(1j * theta)))) <= 1.0 + 1e-12)

    def to_json(self) -> dict:
        return {"coeffs": [[float(c.real), float(c.imag)] for c in np.asarray(self.coeffs, dtype=complex)],
                "dependent": self.dependent}


def graph_from_json(doc) -> DivisorGraph:
    coeffs = doc["coeffs"] if isinstance(doc, dict) else doc
    out = []
    for c in coeffs:
        out.append(complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c))
    dep = int(doc.get("dependent", 0)) if isinstance(doc, dict) else 0
    return DivisorGraph(tuple(out), dep)


@dataclass
class ProjectionAreas:
    A1: float
    A2: float

    @property
    def total(self) -> float:
        return self.A1 + self.A2

    def __getitem__(self, j: int) -> float:
        return {1: self.A1, 2: self.A2}[j]


def _disc_integral(f, R: float, rel: float = QUAD_REL) -> float:
    # quadpack flags roundoff on near-zero integrands; results are compared downstream
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = dblquad(lambda r, t: f(r * np.exp(1j * t)) * r, 0.0, 2 * np.pi, 0.0, R,
                         epsabs=0.0, epsrel=rel)
    return float(val)


def graph_areas(X: DivisorGraph, R: float = 1.0) -> ProjectionAreas:
    """Areas (with multiplicity) of the projections onto the coordinate lines.

    A_j is the projection onto the subspace orthogonal to e_j: the free
    coordinate's plane contributes pi R^2 and the other one int |g'|^2 dm.
    """
    if R <= 0:
        raise ValueError("disc radius must be positive")
    flat = math.pi * R * R
    bent = _disc_integral(lambda z: abs(X.dg(z)) ** 2, R)
    if X.dependent == 0:
        return ProjectionAreas(A1=flat, A2=bent)
    return ProjectionAreas(A1=bent, A2=flat)


def surface_area(X: DivisorGraph, R: float = 1.0, h: float = 1e-6) -> float:
    """Area of the real surface (x, y) -> graph point, from the Gram determinant of finite differences."""

    def element(z):
        def emb(w):
            p = X.point(w)
            return np.array([p[0].real, p[0].imag, p[1].real, p[1].imag])

        dx = (emb(z + h) - emb(z - h)) / (2 * h)
        dy = (emb(z + 1j * h) - emb(z - 1j * h)) / (2 * h)
        gram = np.array([[dx @ dx, dx @ dy], [dy @ dx, dy @ dy]])
        return math.sqrt(max(np.linalg.det(gram), 0.0))

    return _disc_integral(element, R, rel=1e-9)


@dataclass
class WirtingerResult:
    total: float
    passed: bool
    equality: bool
    inside: bool


def wirtinger_check(X: DivisorGraph, R: float = 1.0, tol: float = 1e-6) -> WirtingerResult:
    """Area of a divisor through the center of the unit bidisc is at least pi."""
    areas = graph_areas(X, R)
    through_center = abs(X.g(0.0)) < 1e-12
    total = areas.total
    return WirtingerResult(total=total, passed=total >= math.pi - tol and through_center,
                           equality=abs(total - math.pi) < tol, inside=X.inside_unit_polydisc(R))


@dataclass
class ScalingResult:
    lhs: dict
    rhs: dict
    passed: bool
    r: float
    weight: tuple


def chart_point(a, basis, radii, z):
    """Phi_a(z) = a + sum_j radii_j z_j L_j."""
    z = np.asarray(z, dtype=complex)
    return a + (z * radii) @ basis


def chart_scaling_check(family: GoodFamily, a, delta: float, Y: DivisorGraph, *, alpha=None,
                        r: float | None = None, rel_tol: float = 1e-4) -> ScalingResult:
    """Compare A_j(Phi_a(Y)) computed in ambient coordinates with delta^2 r^(2 mu_j) A_j(Y)."""
    a = np.asarray(a, dtype=complex)
    if alpha is None:
        alpha = project_to_boundary(family.domain, a)
    if r is None:
        r = float(np.linalg.norm(a - alpha))
    if r <= 0:
        raise GeometryError("degenerate chart: r(a) = 0")
    weight = family.weight_at(alpha)
    basis = family.frame_at(alpha).basis
    radii = np.array([delta * r ** (1.0 / m) for m in weight])
    h = 1e-6

    def jac(j):
        k = 1 - (j - 1)  # the coordinate spanning the complement of L_j (n = 2)

        def f(zeta):
            up = chart_point(a, basis, radii, Y.point(zeta + h))
            dn = chart_point(a, basis, radii, Y.point(zeta - h))
            return abs(hermitian((up - dn) / (2 * h), basis[k])) ** 2

        return f

    ref = graph_areas(Y, 1.0)
    lhs, rhs = {}, {}
    for j in (1, 2):
        lhs[j] = _disc_integral(jac(j), 1.0, rel=1e-9)
        rhs[j] = delta ** 2 * r ** (2 * mu_j(weight, j)) * ref[j]
    # projections far below the total area are quadrature noise either way
    floor = 1e-12 * max(abs(rhs[1]), abs(rhs[2]))
    ok = all(abs(lhs[j] - rhs[j]) <= rel_tol * abs(rhs[j]) + floor for j in (1, 2))
    return ScalingResult(lhs=lhs, rhs=rhs, passed=bool(ok), r=r, weight=weight)


def _exit_radius(domain: DomainSpec, X: DivisorGraph, theta: float, smax: float = 4.0) -> float:
    f = lambda s: eval_rho(domain, X.point(s * np.exp(1j * theta)))
    if f(0.0) >= 0:
        raise ValueError("divisor does not pass through the domain at the free origin")
    hi = smax
    while f(hi) < 0:
        hi *= 2
        if hi > 1e6:
            raise ValueError("divisor does not leave the domain")
    return brentq(f, 0.0, hi, xtol=1e-14)


def area_budget(domain: DomainSpec, X: DivisorGraph) -> float:
    """Area of X inside the domain: int (1 + |g'|^2) over {zeta : graph point in Omega}."""
    val, _ = dblquad(lambda s, t: (1.0 + abs(X.dg(s * np.exp(1j * t))) ** 2) * s,
                     0.0, 2 * np.pi, 0.0, lambda t: _exit_radius(domain, X, t),
                     epsabs=0.0, epsrel=1e-9)
    return float(val)


def divisor_stream(domain: DomainSpec, X: DivisorGraph, delta: float, *, seed: int = 0, r0: float = 0.5,
                   r_min: float = 1e-6):
    """Candidates on X in layers of decreasing depth r_k = r0 nu^k (finely spaced in angle).

    Depth along each ray of the free coordinate is located with the
    first-order distance -rho/|grad rho|; the recorded r(a) is the exact
    distance to the boundary.
    """
    rng = np.random.default_rng(seed)
    nu = (1 - delta) / (1 + delta)
    k = 0
    while r0 * nu ** k > r_min:
        target = r0 * nu ** k
        count = int(math.ceil(2 * math.pi / (delta * target)))
        theta = 2 * np.pi * (np.arange(count) + rng.random()) / count
        lo = np.zeros(count)
        hi = np.array([_exit_radius(domain, X, t) for t in theta]) if k == 0 or len(theta) < 64 else None
        if hi is None:
            hi = np.array([_exit_radius(domain, X, t) for t in theta[:: max(1, count // 64)]])
            hi = np.interp(theta, theta[:: max(1, count // 64)], hi, period=2 * np.pi)
            hi = hi * 1.05
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            pts = X.point(mid * np.exp(1j * theta))
            rho = eval_rho(domain, pts)
            g = np.linalg.norm(real_gradient(domain, pts), axis=1)
            depth = np.where(rho < 0, -rho / np.maximum(g, 1e-300), -1.0)
            deeper = depth > target
            lo = np.where(deeper, mid, lo)
            hi = np.where(deeper, hi, mid)
        pts = X.point(lo * np.exp(1j * theta))
        for a in pts:
            if eval_rho(domain, a) >= 0:
                continue
            try:
                foot = project_to_boundary(domain, a)
            except GeometryError:
                continue
            yield a, foot, float(np.linalg.norm(a - foot)), k
        k += 1


@dataclass
class MalliavinResult:
    lhs: float
    budget: float
    count: int
    passed: bool
    on_divisor: bool


def malliavin_sum_check(domain: DomainSpec, X: DivisorGraph, delta: float, budget: int, *, seed: int = 0,
                        family: GoodFamily | None = None, r0: float = 0.5, slack: float = 0.05) -> MalliavinResult:
    """c_1 delta^2 sum r(a)^2 over a greedy packing on X against the area of X in the domain."""
    from .packing import greedy_pack

    if domain.n != 2:
        raise ValueError("graph divisors are implemented in C^2")
    family = family or minimal_family(domain, boundary_grid(domain, 16))
    P = greedy_pack(domain, family, delta, "divisor", budget=budget, seed=seed, divisor=X, gamma0=r0)
    lhs = C1 * delta ** 2 * float(np.sum(P.r ** 2)) if len(P) else 0.0
    area = area_budget(domain, X)
    on = True
    if len(P):
        free = P.centers[:, 1 - X.dependent]
        on = bool(np.all(np.abs(P.centers[:, X.dependent] - X.g(free)) < 1e-9))
    if not on:
        raise ValueError("packing centers are not on the divisor")
    return MalliavinResult(lhs=lhs, budget=area, count=len(P), passed=lhs <= area * (1 + slack), on_divisor=on)
