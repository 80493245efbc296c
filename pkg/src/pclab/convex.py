"""Convex-type machinery: extremal radii, pseudo-balls, surrogate kernel norms and Carleson windows.

Kernel norms are surrogates, ||k_a||_q := sigma(B(pi(a), r(a)))^(-1/q'), so the
structural-hypothesis checks test exponent arithmetic rather than any actual
reproducing kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import (
    DomainSpec,
    GeometryError,
    boundary_grid,
    eval_rho,
    hermitian,
    project_to_boundary,
    real_gradient,
    solve_along_normal,
    tangent_frame,
)
from .multitype import mu
from .polydisc import GoodFamily

TAU_TOL = 1e-8
TAU_PHASES = 32
SH_TOL = 1e-10
CP_SERIES_TERMS = 64
CP_SERIES_TOL = 1e-9
WINDOW_REL_TOL = 1e-4
COLLAR_WIDTH = 0.25


@lru_cache(maxsize=None)
def _diameter(domain: DomainSpec) -> float:
    pts = boundary_grid(domain, 16)
    return float(2 * np.max(np.linalg.norm(pts, axis=1)))


def tau(domain: DomainSpec, x, e, delta: float, *, phases: int = TAU_PHASES, tol: float = TAU_TOL) -> float:
    """Largest t with max_{|lambda| = t} |rho(x + lambda e)| <= delta, by bisection.

    The search is capped at the domain diameter.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=complex)
    e = np.asarray(e, dtype=complex)
    e = e / np.linalg.norm(e)
    ph = np.exp(2j * np.pi * np.arange(phases) / phases)

    def ok(t):
        return np.max(np.abs(eval_rho(domain, x[None, :] + (t * ph)[:, None] * e[None, :]))) <= delta

    hi = _diameter(domain)
    if ok(hi):
        return hi
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class PseudoBall:
    center: np.ndarray
    delta: float
    taus: np.ndarray

    @property
    def sigma(self) -> float:
        return float(self.delta * np.prod(self.taus[1:] ** 2))

    @property
    def tent_volume(self) -> float:
        return float(self.delta ** 2 * np.prod(self.taus[1:] ** 2))


def pseudo_ball(domain: DomainSpec, x, delta: float, frame=None) -> PseudoBall:
    x = np.asarray(x, dtype=complex)
    frame = frame or tangent_frame(domain, x)
    taus = np.array([tau(domain, x, e, delta) for e in frame.basis])
    return PseudoBall(center=x, delta=delta, taus=taus)


def doubling_check(domain: DomainSpec, x, delta: float, N: float) -> bool:
    """sigma(B(x, delta)) <= sigma(B(x, N delta)) / 2."""
    frame = tangent_frame(domain, np.asarray(x, dtype=complex))
    small = pseudo_ball(domain, x, delta, frame).sigma
    big = pseudo_ball(domain, x, N * delta, frame).sigma
    return small <= 0.5 * big


def doubling_constant(domain: DomainSpec, points, deltas, n_max: int = 4) -> int | None:
    """Smallest integer N <= n_max for which doubling holds at every (x, delta); None if none does."""
    for N in range(2, n_max + 1):
        if all(doubling_check(domain, x, d, N) for x in points for d in deltas):
            return N
    return None


def tau_exponent(domain: DomainSpec, x, direction: int, deltas) -> float:
    """Slope of log tau_j(x, delta) against log delta."""
    x = np.asarray(x, dtype=complex)
    e = tangent_frame(domain, x).basis[direction - 1]
    t = [tau(domain, x, e, d) for d in deltas]
    return float(np.polyfit(np.log(deltas), np.log(t), 1)[0])


def conjugate(p: float) -> float:
    if p < 1:
        raise ValueError("exponent must be >= 1")
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def kernel_norm(sigma: float, q: float) -> float:
    """Surrogate ||k||_q = sigma^(-1/q'); q = 1 gives 1."""
    qp = conjugate(q)
    return 1.0 if math.isinf(qp) else sigma ** (-1.0 / qp)


def sigma_at(domain: DomainSpec, a) -> float:
    a = np.asarray(a, dtype=complex)
    alpha = project_to_boundary(domain, a)
    r = float(np.linalg.norm(a - alpha))
    if r <= 0:
        raise GeometryError("a lies on the boundary")
    return pseudo_ball(domain, alpha, r).sigma


def surrogate_kernel_norm(domain: DomainSpec, a, p: float) -> float:
    """sigma(B(pi(a), r(a)))^(-1/p') with 1/p + 1/p' = 1."""
    if p == 1:
        return 1.0
    return kernel_norm(sigma_at(domain, a), p)


def _rel_equal(x: float, y: float, tol: float = SH_TOL) -> bool:
    return abs(x - y) <= tol * max(abs(x), abs(y))


def sh_identity(sigma: float, q: float) -> bool:
    """||k||_q ||k||_q' = ||k||_2^2 on surrogates."""
    return _rel_equal(kernel_norm(sigma, q) * kernel_norm(sigma, conjugate(q)), kernel_norm(sigma, 2.0) ** 2)


def sh_identity2(sigma: float, p: float, q: float, s: float) -> bool:
    """||k||_s' = ||k||_p' ||k||_q' on surrogates, for 1/s = 1/p + 1/q."""
    if min(p, q, s) < 1 or abs(1 / s - 1 / p - 1 / q) > 1e-12:
        raise ValueError("need p, q, s >= 1 with 1/s = 1/p + 1/q")
    lhs = kernel_norm(sigma, conjugate(s))
    rhs = kernel_norm(sigma, conjugate(p)) * kernel_norm(sigma, conjugate(q))
    return _rel_equal(lhs, rhs)


def sh_check(domain: DomainSpec, a, q: float) -> bool:
    return sh_identity(sigma_at(domain, a), q)


def sh_check2(domain: DomainSpec, a, p: float, q: float, s: float) -> bool:
    return sh_identity2(sigma_at(domain, a), p, q, s)


def exponent_grid(count: int = 20) -> np.ndarray:
    return np.geomspace(1.05, 40.0, count)


def cp_power(p: float) -> float:
    """C_p^p = 1 + sum_{k>=0} 2^((1-p)k) = 1 + 1/(1 - 2^(1-p)), p > 1."""
    if p <= 1:
        raise ValueError("C_p diverges for p <= 1")
    return 1.0 + 1.0 / (1.0 - 2.0 ** (1.0 - p))


def cp_constant(p: float) -> float:
    """C_p = (C_p^p)^(1/p)."""
    return cp_power(p) ** (1.0 / p)


def cp_series_check(p: float, terms: int = CP_SERIES_TERMS) -> bool:
    """Partial series 1 + sum_{k<terms} 2^((1-p)k) against the closed form of C_p^p.

    The omitted geometric tail is added to the tolerance, so slowly
    converging cases near p = 1 are judged fairly.
    """
    if p <= 1:
        raise ValueError("C_p diverges for p <= 1")
    q = 2.0 ** (1.0 - p)
    partial = 1.0 + sum(q ** k for k in range(terms))
    tail = q ** terms / (1.0 - q)
    return abs(partial - cp_power(p)) <= CP_SERIES_TOL + tail


@dataclass
class WindowData:
    r: float
    area: float
    kernel_inverse: float
    ratio: float
    nu_mass: float
    nu_ratio: float
    order: int
    out_of_collar: bool
    meta: dict = field(default_factory=dict)


def _window_graph(domain, alpha, normal, tangents, t, w2):
    """Boundary points over alpha + t (i nu) + w2 L_2 along the normal, and the area element."""
    base = alpha[None, :] + (1j * t)[:, None] * normal[None, :] + w2[:, None] * tangents[0][None, :]
    pts, ok = solve_along_normal(domain, base, normal)
    g = real_gradient(domain, pts)
    num = np.linalg.norm(g, axis=1)
    den = np.abs(np.real(np.sum(g * np.conj(normal)[None, :], axis=1)))
    return pts, ok, num / np.maximum(den, 1e-300)


def _t_endpoint(domain, alpha, normal, tangents, a, R1, w2, sign, iters=50):
    """Bisection for the t where the normal coordinate of the boundary point reaches |.| = R1."""
    lo = np.zeros(len(w2))
    hi = np.full(len(w2), R1)

    def inside(t):
        pts, ok, _ = _window_graph(domain, alpha, normal, tangents, sign * t, w2)
        c = hermitian(pts - a[None, :], normal)
        return ok & (np.abs(c) < R1)

    alive = inside(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inn = inside(mid)
        lo = np.where(inn, mid, lo)
        hi = np.where(inn, hi, mid)
    return np.where(alive, lo, 0.0), alive


def _radial_cutoff(domain, alpha, normal, tangents, a, R1, R2, phi, iters=50):
    """Per phase, the |w2| (<= R2) beyond which the window has no t-extent."""
    lo = np.zeros(len(phi))
    hi = np.full(len(phi), R2)
    zero = np.zeros(len(phi))

    def inside(rad):
        pts, ok, _ = _window_graph(domain, alpha, normal, tangents, zero, rad * np.exp(1j * phi))
        return ok & (np.abs(hermitian(pts - a[None, :], normal)) < R1)

    full = inside(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inn = inside(mid)
        lo = np.where(inn, mid, lo)
        hi = np.where(inn, hi, mid)
    return np.where(full, R2, lo)


def _window_area(domain, alpha, normal, tangents, a, R1, R2, order):
    # radial substitution |w2| = cut (1 - u^2) absorbs the square-root closing of the t-interval
    xg, wg = np.polynomial.legendre.leggauss(order)
    phi = 2 * np.pi * np.arange(2 * order) / (2 * order)
    cut = _radial_cutoff(domain, alpha, normal, tangents, a, R1, R2, phi)
    u = 0.5 * (xg + 1)
    wu = 0.5 * wg
    RR = cut[None, :] * (1 - u[:, None] ** 2)
    WR = 2 * cut[None, :] * u[:, None] * wu[:, None]
    PP = np.broadcast_to(phi[None, :], RR.shape)
    w2 = (RR * np.exp(1j * PP)).reshape(-1)
    base_w = (WR * RR * (2 * np.pi / (2 * order))).reshape(-1)
    tp, alive = _t_endpoint(domain, alpha, normal, tangents, a, R1, w2, 1.0)
    tm, _ = _t_endpoint(domain, alpha, normal, tangents, a, R1, w2, -1.0)
    lo, hi = -tm, tp
    T = 0.5 * (hi - lo)[:, None] * (xg[None, :] + 1) + lo[:, None]
    WT = 0.5 * (hi - lo)[:, None] * wg[None, :]
    W2 = np.repeat(w2, order)
    _, ok, elem = _window_graph(domain, alpha, normal, tangents, T.reshape(-1), W2)
    vals = np.where(ok, elem, 0.0).reshape(T.shape)
    area = float(np.sum(base_w[:, None] * WT * vals * alive[:, None]))
    return area, bool(np.all(ok))


def carleson_window_data(domain: DomainSpec, family: GoodFamily, a, p: float = math.inf, *, packing=None,
                         max_order: int = 64) -> WindowData:
    """Boundary area of the window bd(Omega) cap P_a(2) against the inverse surrogate norm.

    The boundary is parametrized as a graph over the real tangent hyperplane
    at pi(a); Gauss-Legendre order doubles until the area changes by less
    than 1e-4 relative.  With a packing, nu = sum r^(1 + 2 mu) over packing
    centers inside P_a(2) is reported too.  Implemented for n = 2.
    """
    if domain.n != 2:
        raise ValueError("windows are implemented in C^2")
    a = np.asarray(a, dtype=complex)
    alpha = project_to_boundary(domain, a)
    r = float(np.linalg.norm(a - alpha))
    weight = family.weight_at(alpha)
    frame = family.frame_at(alpha)
    normal, tangents = frame.normal, frame.tangent
    R1 = 2.0 * r
    R2 = 2.0 * r ** (1.0 / weight[1])
    order = 8
    area, ok = _window_area(domain, alpha, normal, tangents, a, R1, R2, order)
    converged = False
    while order < max_order:
        order *= 2
        nxt, ok = _window_area(domain, alpha, normal, tangents, a, R1, R2, order)
        done = abs(nxt - area) <= WINDOW_REL_TOL * max(abs(nxt), 1e-300)
        area = nxt
        if done:
            converged = True
            break
    out = (not ok) or r > COLLAR_WIDTH
    if not converged and not out:
        raise GeometryError("window quadrature did not converge")
    inv = 1.0 / surrogate_kernel_norm(domain, a, p)
    nu_mass = 0.0
    if packing is not None and len(packing):
        d = packing.centers - a[None, :]
        c1 = np.abs(hermitian(d, frame.basis[0]))
        c2 = np.abs(hermitian(d, frame.basis[1]))
        inside = (c1 < R1) & (c2 < R2)
        mus = np.array([mu(w) for w in packing.weights]) if len(packing.weights) else np.zeros(len(packing))
        nu_mass = float(np.sum(packing.r[inside] ** (1 + 2 * mus[inside])))
    return WindowData(r=r, area=area, kernel_inverse=inv, ratio=area / inv, nu_mass=nu_mass,
                      nu_ratio=nu_mass / area if area > 0 else math.inf, order=order,
                      out_of_collar=out, meta={"p": p, "weight": list(weight), "converged": converged})


def window_ladder(domain: DomainSpec, family: GoodFamily, alpha, ks=range(3, 10), p: float = math.inf,
                  packing=None) -> list[WindowData]:
    """Windows at a = alpha - 2^-k nu(alpha)."""
    alpha = np.asarray(alpha, dtype=complex)
    nu = tangent_frame(domain, alpha).normal
    return [carleson_window_data(domain, family, alpha - 2.0 ** -k * nu, p, packing=packing) for k in ks]


def pseudo_distance(domain: DomainSpec, x, y, *, tol: float = 1e-6) -> float:
    """Smallest delta with y - x inside the tau-polydisc of B(x, delta) (bisection in log delta)."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    frame = tangent_frame(domain, x)
    c = np.abs(frame.basis.conj() @ (y - x))
    if np.all(c == 0):
        return 0.0

    def inside(d):
        return bool(np.all(c < [tau(domain, x, e, d) for e in frame.basis]))

    lo, hi = 1e-12, 1.0
    while not inside(hi):
        hi *= 2
        if hi > 1e6:
            return math.inf
    while hi / lo > 1 + tol:
        mid = math.sqrt(lo * hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


def rho_star(domain: DomainSpec, z, w) -> float:
    """|r(z)| + |r(w)| + pseudo-distance of the projections (report field only)."""
    pz = project_to_boundary(domain, z)
    pw = project_to_boundary(domain, w)
    return float(np.linalg.norm(np.asarray(z) - pz) + np.linalg.norm(np.asarray(w) - pw)
                 + pseudo_distance(domain, pz, pw))


__all__ = [
    "PseudoBall", "WindowData", "carleson_window_data", "conjugate", "cp_constant", "cp_power", "cp_series_check",
    "doubling_check", "doubling_constant", "exponent_grid", "kernel_norm", "pseudo_ball", "pseudo_distance",
    "rho_star", "sh_check", "sh_check2", "sh_identity", "sh_identity2", "surrogate_kernel_norm", "tau",
    "tau_exponent", "window_ladder",
]
