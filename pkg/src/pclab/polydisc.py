"""Anisotropic polydiscs P_a(delta), containment sampling and the uniform constant delta_0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import (
    BoundaryFrame,
    DomainSpec,
    boundary_grid,
    eval_rho,
    frame_from_tangents,
    project_to_boundary,
    tangent_frame,
    to_real,
    unit_normal,
)
from .multitype import linear_multitype, minimal_weight, mu, mu_j

DELTA_CAP = 2.0
DELTA_RESOLUTION = 1e-3
UNIFORM_SLOPE_MAX = 0.03


class FamilyError(RuntimeError):
    pass


@dataclass
class Polydisc:
    center: np.ndarray
    frame: BoundaryFrame
    radii: np.ndarray
    delta: float
    weight: tuple
    r: float

    @property
    def mu(self) -> float:
        return mu(self.weight)


def polydisc_radii(r: float, weight, delta: float) -> np.ndarray:
    """radius_j = delta * r^(1/m_j)."""
    return np.array([delta * r ** (1.0 / m) for m in weight])


@dataclass
class GoodFamily:
    """A multitype field sampled on the boundary.

    ``weights[i]`` and ``frames[i]`` belong to ``samples[i]``; lookups go to the
    nearest sample.
    """

    domain: DomainSpec
    samples: np.ndarray
    weights: list
    frames: list
    delta0: float | None = None
    kind: str = "minimal"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._tree = cKDTree(to_real(self.samples))

    def nearest(self, alpha) -> int:
        return int(self._tree.query(to_real(np.asarray(alpha, dtype=complex)))[1])

    def weight_at(self, alpha) -> tuple:
        return self.weights[self.nearest(alpha)]

    def frame_at(self, alpha) -> BoundaryFrame:
        i = self.nearest(alpha)
        if np.allclose(self.samples[i], alpha, atol=1e-13, rtol=0):
            return self.frames[i]
        return frame_from_tangents(self.domain, alpha, self.frames[i].tangent)

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "kind": self.kind,
            "delta0": self.delta0,
            "samples": [[[float(v.real), float(v.imag)] for v in p] for p in self.samples],
            "weights": [[("inf" if math.isinf(m) else int(m)) for m in w] for w in self.weights],
            "frames": [[[[float(v.real), float(v.imag)] for v in row] for row in f.basis] for f in self.frames],
        }


def _cvec(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def family_from_json(doc: dict) -> GoodFamily:
    """Inverse of ``GoodFamily.to_json``; frames are rebuilt when absent."""
    from .geometry import domain_from_json

    try:
        domain = domain_from_json(doc["domain"])
        samples = _cvec(doc["samples"])
        weights = [tuple(math.inf if m == "inf" else float(m) for m in w) for w in doc["weights"]]
        if len(weights) != len(samples) or samples.ndim != 2 or samples.shape[1] != domain.n:
            raise ValueError("samples and weights disagree")
        if doc.get("frames"):
            frames = [BoundaryFrame(alpha=p, basis=_cvec(f)) for p, f in zip(samples, doc["frames"])]
        else:
            frames = [tangent_frame(domain, p) for p in samples]
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed family document: {exc}") from None
    return GoodFamily(domain, samples, weights, frames, delta0=doc.get("delta0"), kind=doc.get("kind", "fixed"))


def minimal_family(domain: DomainSpec, samples) -> GoodFamily:
    samples = np.asarray(samples, dtype=complex)
    w = minimal_weight(domain.n)
    frames = [tangent_frame(domain, p) for p in samples]
    return GoodFamily(domain, samples, [w] * len(samples), frames, kind="minimal")


def computed_family(domain: DomainSpec, samples, *, kmax: int = 12, directions: int = 256,
                    seed: int = 0) -> GoodFamily:
    """Family whose weights come from the greedy linear multitype at every sample."""
    samples = np.asarray(samples, dtype=complex)
    weights, frames = [], []
    cache: dict = {}
    for p in samples:
        key = _orbit_key(domain, p)
        if key is not None and key in cache:
            w, tangents = cache[key]
            frames.append(frame_from_tangents(domain, p, _rotate(domain, p, key, tangents)))
            weights.append(w)
            continue
        mt = linear_multitype(domain, p, kmax, directions, seed=seed)
        if mt.infinite:
            raise FamilyError(f"infinite type at sample {p}")
        weights.append(tuple(mt.weight))
        frames.append(mt.frame)
        if key is not None:
            cache[key] = (tuple(mt.weight), (p, mt.frame.tangent))
    return GoodFamily(domain, samples, weights, frames, kind="computed")


def _orbit_key(domain: DomainSpec, p):
    # separable models are invariant under coordinate rotations, so the
    # multitype only depends on the moduli
    if not domain.separable:
        return None
    return tuple(np.round(np.abs(p), 12))


def _rotate(domain, p, key, tangents):
    p0, tan = tangents
    phase = np.ones(len(p), dtype=complex)
    nz = np.abs(p0) > 0
    phase[nz] = (p[nz] / np.abs(p[nz])) / (p0[nz] / np.abs(p0[nz]))
    return tan * phase[None, :]


def fixed_family(domain: DomainSpec, samples, weight_fn) -> GoodFamily:
    """Family with a prescribed weight per sample (``weight_fn(point) -> weight``)."""
    samples = np.asarray(samples, dtype=complex)
    frames = [tangent_frame(domain, p) for p in samples]
    return GoodFamily(domain, samples, [tuple(float(m) for m in weight_fn(p)) for p in samples],
                      frames, kind="fixed")


def make_polydisc(family: GoodFamily, a, delta: float, *, alpha=None, r: float | None = None) -> Polydisc:
    """P_a(delta) with radii delta r(a)^(1/m_j) and the frame at pi(a).

    ``alpha`` and ``r`` may be supplied when a is built as alpha - r nu(alpha).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    a = np.asarray(a, dtype=complex)
    if alpha is None:
        alpha = project_to_boundary(family.domain, a)
    if r is None:
        r = float(np.linalg.norm(a - alpha))
    w = family.weight_at(alpha)
    frame = family.frame_at(alpha)
    return Polydisc(center=a, frame=frame, radii=polydisc_radii(r, w, delta), delta=delta, weight=w, r=r)


def disc_samples(samples: int, rings: tuple[float, ...] = (1.0, 0.5)) -> np.ndarray:
    """Points of the closed unit disc: ``samples`` phases on each ring plus the center."""
    theta = 2 * np.pi * np.arange(samples) / samples
    pts = [0j]
    for rad in rings:
        pts.extend(rad * np.exp(1j * theta))
    return np.array(pts)


def polydisc_points(P: Polydisc, samples: int = 16) -> np.ndarray:
    if samples < 8:
        raise ValueError("containment needs at least 8 samples per circle")
    w = disc_samples(samples)
    n = len(P.radii)
    grids = np.meshgrid(*([w] * n), indexing="ij")
    coeff = np.stack([g.reshape(-1) for g in grids], axis=1) * P.radii[None, :]
    return P.center[None, :] + coeff @ P.frame.basis


def polydisc_contains(domain: DomainSpec, P: Polydisc, samples: int = 16) -> bool:
    """rho < 0 at every sample of the distinguished boundary and interior rings of P."""
    if P.delta == 0:
        return True
    return bool(np.all(eval_rho(domain, polydisc_points(P, samples)) < 0))


def depth_ladder(t_max: float = 0.2, count: int = 8) -> np.ndarray:
    return t_max * 0.5 ** np.arange(count)


def collar_points(domain: DomainSpec, samples, depths):
    """Pairs (alpha, t) -> a = alpha - t nu(alpha) on the inward normal."""
    samples = np.asarray(samples, dtype=complex)
    nu = unit_normal(domain, samples)
    a = samples[:, None, :] - depths[None, :, None] * nu[:, None, :]
    return a


def _all_contained(family: GoodFamily, depths, delta: float, samples: int, indices) -> bool:
    dom = family.domain
    w = disc_samples(samples)
    n = dom.n
    grids = np.meshgrid(*([w] * n), indexing="ij")
    unit = np.stack([g.reshape(-1) for g in grids], axis=1)
    nu = unit_normal(dom, family.samples)
    for i in indices:
        frame = family.frames[i]
        for t in depths:
            radii = polydisc_radii(t, family.weights[i], delta)
            center = family.samples[i] - t * nu[i]
            pts = center[None, :] + (unit * radii[None, :]) @ frame.basis
            if np.any(eval_rho(dom, pts) >= 0):
                return False
    return True


def _bisect_delta(family, depths, samples, resolution, indices) -> float:
    lo, hi = 0.0, DELTA_CAP
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _all_contained(family, depths, mid, samples, indices):
            lo = mid
        else:
            hi = mid
    return lo


def delta_profile(family: GoodFamily, depths=None, *, samples: int = 16, resolution: float = DELTA_RESOLUTION,
                  indices=None) -> np.ndarray:
    """Largest contained delta at each depth separately."""
    depths = depth_ladder() if depths is None else np.asarray(depths, dtype=float)
    idx = range(len(family.samples)) if indices is None else indices
    return np.array([_bisect_delta(family, [t], samples, resolution, idx) for t in depths])


def depth_slope(depths, profile) -> float:
    """Slope of log delta_0(t) against log t over the deeper half of the ladder.

    Positive when delta_0 shrinks toward the boundary; the shallow rungs are
    dominated by curvature and are left out.
    """
    depths = np.asarray(depths, dtype=float)
    profile = np.maximum(np.asarray(profile, dtype=float), DELTA_RESOLUTION)
    order = np.argsort(depths)[: max(2, (len(depths) + 1) // 2)]
    return float(np.polyfit(np.log(depths[order]), np.log(profile[order]), 1)[0])


def find_delta0(family: GoodFamily, depths=None, *, samples: int = 16, resolution: float = DELTA_RESOLUTION,
                indices=None, uniform: bool = True) -> float:
    """Largest delta in (0, 2] (to ``resolution``) with every sampled P_a(delta) inside.

    Centers are a = alpha - t nu(alpha) for every family sample alpha and every
    depth t; r(a) = t on this normal segment.  With ``uniform`` the per-depth
    optimum must not decay like a power of t: a finite ladder always yields
    some positive delta, and the decay is what exposes a multitype that is too
    large.
    """
    depths = depth_ladder() if depths is None else np.asarray(depths, dtype=float)
    idx = range(len(family.samples)) if indices is None else indices
    if _all_contained(family, depths, DELTA_CAP, samples, idx):
        raise FamilyError("P_a(2) contained: sampling too coarse to detect overflow")
    if uniform and len(depths) >= 3:
        prof = delta_profile(family, depths, samples=samples, resolution=resolution, indices=idx)
        slope = depth_slope(depths, prof)
        family.meta["delta_profile"] = [float(v) for v in prof]
        family.meta["depth_slope"] = slope
        if slope > UNIFORM_SLOPE_MAX:
            raise FamilyError(f"contained delta decays like r^{slope:.3f} toward the boundary: "
                              "no uniform delta_0 (multitype too large?)")
        lo = float(prof.min())
    else:
        lo = _bisect_delta(family, depths, samples, resolution, idx)
    if lo < resolution:
        raise FamilyError("no delta >= 1e-3 keeps the polydiscs inside; wrong multitype assignment?")
    family.delta0 = lo
    return lo


def overflow_everywhere(family: GoodFamily, depths=None, samples: int = 16) -> bool:
    """True if P_a(2) leaves the domain for every sampled (alpha, t)."""
    depths = depth_ladder() if depths is None else np.asarray(depths, dtype=float)
    for i in range(len(family.samples)):
        for t in depths:
            if _all_contained(family, [t], DELTA_CAP, samples, [i]):
                return False
    return True


def containment_report(family: GoodFamily, delta: float, depths=None, samples: int = 16) -> dict:
    depths = depth_ladder() if depths is None else np.asarray(depths, dtype=float)
    total = failed = 0
    for i in range(len(family.samples)):
        for t in depths:
            total += 1
            if not _all_contained(family, [t], delta, samples, [i]):
                failed += 1
    return {"checked": total, "failed": failed, "delta": delta, "samples_per_circle": samples}


def mu_report(weight) -> dict:
    n = len(weight)
    return {"mu": mu(weight), "mu_j": [mu_j(weight, j) for j in range(1, n + 1)]}


def default_samples(domain: DomainSpec, res: int = 8) -> np.ndarray:
    return boundary_grid(domain, res)
