"""Greedy delta-separated sequences, layered packings over W, and the theorem sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .geometry import (
    DomainSpec,
    GeometryError,
    eval_rho,
    hermitian,
    project_to_boundary,
    ray_boundary,
    solve_along_normal,
    to_real,
    unit_normal,
)
from .multitype import mu
from .polydisc import GoodFamily, polydisc_radii

TOUCH_TOL = 1e-12


def nu_ratio(delta: float) -> float:
    """Layer ratio nu = (1 - delta)/(1 + delta)."""
    return (1.0 - delta) / (1.0 + delta)


def support_radius(radii: np.ndarray, basis: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Support function of the polydisc sum_j radii_j w_j L_j (|w_j| <= 1) in real direction(s) u."""
    # h(u) = sum_j radius_j |<L_j, u>|
    return np.abs(np.asarray(u) @ basis.conj().T) @ radii


def _paired_support(radii: np.ndarray, bases: np.ndarray, u: np.ndarray) -> np.ndarray:
    # row k: support of polydisc k in direction u[k]
    return np.sum(np.abs(np.einsum("kp,kjp->kj", u, bases.conj())) * radii, axis=1)


class Packer:
    """Greedy acceptance of polydiscs; open polydiscs, so tangency counts as disjoint."""

    def __init__(self, n: int):
        self.n = n
        self.centers: list[np.ndarray] = []
        self.radii: list[np.ndarray] = []
        self.bases: list[np.ndarray] = []
        self._c = np.zeros((0, n), dtype=complex)
        self._R = np.zeros(0)

    def fits(self, center, radii, basis) -> bool:
        if not len(self._c):
            return True
        diff = self._c - center
        dist = np.linalg.norm(diff, axis=1)
        R = np.linalg.norm(radii)
        near = np.nonzero(dist < R + self._R)[0]
        if not len(near):
            return True
        if np.any(dist[near] == 0):
            return False
        u = diff[near] / dist[near, None]
        h_new = support_radius(radii, basis, u)
        h_old = _paired_support(np.array([self.radii[i] for i in near]),
                                np.array([self.bases[i] for i in near]), u)
        return bool(np.all(dist[near] >= (h_new + h_old) * (1 - TOUCH_TOL)))

    def add(self, center, radii, basis):
        self.centers.append(center)
        self.radii.append(radii)
        self.bases.append(basis)
        self._c = np.vstack([self._c, center[None, :]])
        self._R = np.append(self._R, np.linalg.norm(radii))

    def offer(self, center, radii, basis) -> bool:
        if self.fits(center, radii, basis):
            self.add(center, radii, basis)
            return True
        return False


@dataclass
class PackingResult:
    centers: np.ndarray
    r: np.ndarray
    mu: np.ndarray
    layer: np.ndarray
    delta: float
    radii: np.ndarray
    bases: np.ndarray
    feet: np.ndarray
    weights: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def nu(self) -> float:
        return nu_ratio(self.delta)

    def __len__(self):
        return len(self.centers)

    def verify_disjoint(self) -> bool:
        """O(N^2) certification pass with the support-radius test."""
        for i in range(len(self)):
            if i + 1 >= len(self):
                break
            diff = self.centers[i + 1:] - self.centers[i]
            dist = np.linalg.norm(diff, axis=1)
            if np.any(dist == 0):
                return False
            u = diff / dist[:, None]
            hi = support_radius(self.radii[i], self.bases[i], u)
            hj = _paired_support(self.radii[i + 1:], self.bases[i + 1:], u)
            if np.any(dist < (hi + hj) * (1 - TOUCH_TOL)):
                return False
        return True


def _empty(n: int, delta: float, meta=None) -> PackingResult:
    return PackingResult(np.zeros((0, n), dtype=complex), np.zeros(0), np.zeros(0), np.zeros(0, dtype=int),
                         delta, np.zeros((0, n)), np.zeros((0, n, n), dtype=complex),
                         np.zeros((0, n), dtype=complex), [], meta or {})


def _collect(packer: Packer, rows: list, n: int, delta: float, meta: dict) -> PackingResult:
    if not rows:
        return _empty(n, delta, meta)
    return PackingResult(
        centers=np.array(packer.centers),
        r=np.array([row["r"] for row in rows]),
        mu=np.array([mu(row["w"]) for row in rows]),
        layer=np.array([row["layer"] for row in rows], dtype=int),
        delta=delta,
        radii=np.array(packer.radii),
        bases=np.array(packer.bases),
        feet=np.array([row["alpha"] for row in rows]),
        weights=[row["w"] for row in rows],
        meta=meta,
    )


def _pack_stream(family: GoodFamily, delta: float, stream, budget: int, meta: dict) -> PackingResult:
    """Greedily accept candidates (a, alpha, r, layer) from ``stream``; ``budget`` caps candidates."""
    n = family.domain.n
    packer = Packer(n)
    rows = []
    seen = 0
    for a, alpha, r, layer in stream:
        if seen >= budget:
            break
        seen += 1
        w = family.weight_at(alpha)
        frame = family.frame_at(alpha)
        radii = polydisc_radii(r, w, delta)
        if packer.offer(a, radii, frame.basis):
            rows.append({"r": r, "w": w, "layer": layer, "alpha": alpha})
    meta = dict(meta, candidates=seen, budget=budget)
    return _collect(packer, rows, n, delta, meta)


def layered_stream(domain: DomainSpec, W_points, gamma0: float, layers: int, delta: float):
    W_points = np.asarray(W_points, dtype=complex)
    if len(W_points) == 0:
        return
    nu_vec = unit_normal(domain, W_points)
    nu = nu_ratio(delta)
    for k in range(layers):
        gamma = gamma0 * nu ** k
        for alpha, nv in zip(W_points, nu_vec):
            yield alpha - gamma * nv, alpha, gamma, k


def layered_pack(domain: DomainSpec, family: GoodFamily, delta: float, W_points, gamma0: float,
                 layers: int, *, budget: int | None = None) -> PackingResult:
    """Layers at depths gamma_k = nu^k gamma0 above the weak-set sample, greedily separated."""
    if layers == 0:
        return _empty(domain.n, delta, {"target": "weak", "layers": 0})
    W_points = np.asarray(W_points, dtype=complex)
    if len(W_points) == 0:
        raise ValueError("empty weak-set sample")
    budget = budget or layers * len(W_points)
    stream = layered_stream(domain, W_points, gamma0, layers, delta)
    return _pack_stream(family, delta, stream, budget,
                        {"target": "weak", "layers": layers, "gamma0": gamma0, "nu": nu_ratio(delta)})


def collar_stream(domain: DomainSpec, t_max: float, seed: int, *, t_min: float = 1e-3):
    """Boundary points from scrambled Sobol directions, depths log-uniform in [t_min, t_max]."""
    n = domain.n
    sob = qmc.Sobol(2 * n + 1, scramble=True, seed=seed)
    while True:
        u = sob.random(256)
        g = ndtri(np.clip(u[:, : 2 * n], 1e-12, 1 - 1e-12))
        d = g[:, :n] + 1j * g[:, n:]
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        hits = ray_boundary(domain, np.zeros(n, dtype=complex), d)
        alphas, ok = solve_along_normal(domain, hits, unit_normal(domain, hits))
        depth = t_min * (t_max / t_min) ** u[:, -1]
        nus = unit_normal(domain, alphas)
        for alpha, t, nv, good in zip(alphas, depth, nus, ok):
            if not good:
                continue
            a = alpha - t * nv
            try:
                foot = project_to_boundary(domain, a)
            except GeometryError:
                continue
            yield a, foot, float(np.linalg.norm(a - foot)), -1


def greedy_pack(domain: DomainSpec, family: GoodFamily, delta: float, target: str, *, budget: int = 10_000,
                seed: int = 0, W_points=None, divisor=None, gamma0: float = 0.25, layers: int = 12,
                t_max: float = 0.5) -> PackingResult:
    """Greedy delta-separated sequence for target ``"collar"``, ``"weak"`` or ``"divisor"``."""
    if target == "collar":
        stream = collar_stream(domain, t_max, seed)
        return _pack_stream(family, delta, stream, budget, {"target": "collar", "seed": seed})
    if target == "weak":
        if W_points is None or len(W_points) == 0:
            raise ValueError("empty weak-set sample")
        return layered_pack(domain, family, delta, W_points, gamma0, layers, budget=budget)
    if target == "divisor":
        if divisor is None:
            raise ValueError("divisor target needs a graph")
        from .divisor import divisor_stream

        stream = divisor_stream(domain, divisor, delta, seed=seed, r0=gamma0)
        return _pack_stream(family, delta, stream, budget, {"target": "divisor", "seed": seed})
    raise ValueError(f"unknown target {target!r}")


@dataclass
class TheoremSum:
    rule: str
    layer_sums: np.ndarray
    partial_sums: np.ndarray
    total: float
    ratio: float | None
    predicted_ratio: float | None = None


def exponents(P: PackingResult, rule: str, n: int) -> np.ndarray:
    if rule == "one_plus_two_mu":
        return 1.0 + 2.0 * P.mu
    if rule == "power_n":
        return np.full(len(P), float(n))
    raise ValueError(f"unknown exponent rule {rule!r}")


def theorem_sum(P: PackingResult, rule: str = "one_plus_two_mu", *, n: int | None = None,
                beta: float | None = None, m_n: float | None = None) -> TheoremSum:
    """sum r(a)^e with e = 1 + 2 mu(a) or e = n, per-layer partials and decay-ratio fit.

    With ``beta`` and ``m_n`` the fitted ratio is compared with nu^(beta/m_n).
    """
    n = n if n is not None else (P.centers.shape[1] if len(P) else 2)
    if len(P) == 0:
        return TheoremSum(rule, np.zeros(0), np.zeros(0), 0.0, None)
    terms = P.r ** exponents(P, rule, n)
    if np.all(P.layer < 0):
        sums = np.array([terms.sum()])
    else:
        K = int(P.layer.max()) + 1
        sums = np.array([terms[P.layer == k].sum() for k in range(K)])
    ratio = decay_ratio(sums)
    pred = P.nu ** (beta / m_n) if beta is not None and m_n is not None else None
    return TheoremSum(rule, sums, np.cumsum(sums), float(terms.sum()), ratio, pred)


def decay_ratio(layer_sums) -> float | None:
    """exp of the least-squares slope of log(layer sum) against the layer index."""
    s = np.asarray(layer_sums, dtype=float)
    k = np.nonzero(s > 0)[0]
    if len(k) < 2:
        return None
    slope = np.polyfit(k, np.log(s[k]), 1)[0]
    return float(np.exp(slope))


@dataclass
class PackingLemmaReport:
    radii: np.ndarray
    areas: np.ndarray
    counts: np.ndarray
    slope: float
    alpha_prime: float
    passed: bool


def packing_lemma_check(W_points, l_factors, r_values, alpha_prime: float) -> PackingLemmaReport:
    """Sum of polydisc areas pi^n prod radii^2 for greedy disjoint polydiscs on W.

    Polydiscs are axis-aligned with radii (r, l_2 r, ..., l_n r) and centered on
    the sample ``W_points`` (in the unit polydisc).  The slope of log(total
    area) against log r is compared with ``alpha_prime``.
    """
    W = np.asarray(W_points, dtype=complex)
    r_values = np.asarray(r_values, dtype=float)
    if len(W) == 0:
        return PackingLemmaReport(r_values, np.zeros(len(r_values)), np.zeros(len(r_values), dtype=int),
                                  math.nan, alpha_prime, True)
    n = W.shape[1]
    factors = np.concatenate([[1.0], np.asarray(l_factors, dtype=float)])
    areas, counts = [], []
    for r in r_values:
        packer = Packer(n)
        radii = factors * r
        for p in W:
            packer.offer(p, radii, np.eye(n, dtype=complex))
        counts.append(len(packer.centers))
        areas.append(len(packer.centers) * math.pi ** n * float(np.prod(radii ** 2)))
    areas = np.array(areas)
    slope = float(np.polyfit(np.log(r_values), np.log(areas), 1)[0])
    return PackingLemmaReport(r_values, areas, np.array(counts), slope, alpha_prime, slope >= alpha_prime)


def in_window(P: PackingResult, frame_basis, center, radii) -> np.ndarray:
    """Mask of packing centers inside the polydisc center + sum radii_j w_j L_j."""
    if len(P) == 0:
        return np.zeros(0, dtype=bool)
    coords = hermitian(P.centers[:, None, :] - center[None, None, :], frame_basis[None, :, :])
    return np.all(np.abs(coords) < radii[None, :], axis=1)


def packing_rows(P: PackingResult):
    for a, r, m, k in zip(P.centers, P.r, P.mu, P.layer):
        yield a, r, m, k


def on_weak_set(P: PackingResult, domain: DomainSpec, W_points, tol: float) -> bool:
    if len(P) == 0:
        return True
    W = to_real(np.asarray(W_points, dtype=complex))
    from scipy.spatial import cKDTree

    d, _ = cKDTree(W).query(to_real(P.feet))
    return bool(np.all(d <= tol)) and bool(np.all(np.abs(eval_rho(domain, P.feet)) < 1e-10))
