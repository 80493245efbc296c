"""Box-counting dimension, tangent slices of the weak set, and Holder exponents.

Grid covering stands in for the infimal ball covering in the definition of
the upper Minkowski dimension; the two counts differ by bounded factors, which
the slope fit ignores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import DomainSpec, eval_rho, hermitian, solve_along_normal, tangent_frame, to_real
from .levi import classify_points, default_weak_tol

MIN_RUNGS = 6
MIN_ADMISSIBLE = 4
PITCH_FACTOR = 4.0


class DimensionError(RuntimeError):
    pass


def box_count(points, eps: float, offset: float = 0.0) -> int:
    """Number of occupied cells of the axis grid of pitch ``eps`` shifted by ``offset * eps``.

    Parameters
    ----------
    points : array_like, shape (N, d)
        Sampled point set.
    eps : float
        Cell size.
    offset : float, optional
        Grid shift in units of ``eps``.

    Returns
    -------
    int
        Occupied cell count; 0 for an empty set.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return 0
    pts = pts.reshape(len(pts), -1)
    cells = np.floor(pts / eps + offset).astype(np.int64)
    return int(len(np.unique(cells, axis=0)))


def sampling_pitch(points) -> float:
    """90th percentile of nearest-neighbour distances (0 for fewer than two points)."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    d, _ = cKDTree(pts.reshape(len(pts), -1)).query(pts.reshape(len(pts), -1), k=2)
    return float(np.percentile(d[:, 1], 90))


@dataclass
class BoxCountReport:
    eps: np.ndarray
    counts: np.ndarray
    dimension: float
    window: tuple[int, int]
    residual: float
    pitch: float

    def to_json(self) -> dict:
        return {
            "eps": [float(e) for e in self.eps],
            "counts": [int(c) for c in self.counts],
            "dimension": self.dimension,
            "fit_window": list(self.window),
            "residual": self.residual,
            "pitch": self.pitch,
        }


def dim_estimate(points, eps_max: float, eps_min: float, rungs: int = 8, *, offset: float = 0.0,
                 pitch: float | None = None) -> BoxCountReport:
    """Least-squares slope of log N_eps against log(1/eps) on a geometric eps ladder.

    A rung is admissible when the sampling pitch is below eps/4; at least four
    admissible rungs are required.
    """
    if rungs < MIN_RUNGS:
        raise ValueError(f"need at least {MIN_RUNGS} rungs")
    if not 0 < eps_min < eps_max:
        raise ValueError("need 0 < eps_min < eps_max")
    pts = np.asarray(points, dtype=float)
    eps = np.geomspace(eps_max, eps_min, rungs)
    counts = np.array([box_count(pts, e, offset) for e in eps])
    pitch = sampling_pitch(pts) if pitch is None else pitch
    ok = np.nonzero(pitch < eps / PITCH_FACTOR)[0]
    if len(ok) < MIN_ADMISSIBLE:
        raise DimensionError(f"only {len(ok)} admissible rungs (sampling pitch {pitch:.3g})")
    lo, hi = int(ok.min()), int(ok.max())
    if len(pts) == 0:
        return BoxCountReport(eps, counts, 0.0, (lo, hi), 0.0, pitch)
    x = np.log(1.0 / eps[lo:hi + 1])
    y = np.log(counts[lo:hi + 1])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    dim = float(np.clip(coef[0], 0.0, pts.shape[1]))
    residual = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    return BoxCountReport(eps, counts, dim, (lo, hi), residual, pitch)


@dataclass
class SliceResult:
    coords: np.ndarray
    weak_mask: np.ndarray
    failures: int
    direction: int
    spacing: float

    @property
    def weak_points(self) -> np.ndarray:
        return self.coords[self.weak_mask]


def slice_weak_set(domain: DomainSpec, alpha, direction: int = 2, offsets=None, *, window: float = 0.75,
                   res: int = 151, tol: float | None = None) -> SliceResult:
    """Weak points on the tangent slice through alpha in the L_direction plane.

    Slice coordinates w (a ``res`` x ``res`` grid on [-window, window]^2) give
    the tangent point alpha + w L_j + sum_k offsets_k L_k, which is moved along
    the normal onto the boundary; points whose Levi determinant is within
    ``tol`` of zero are weak.  ``tol=None`` uses the scale-relative default.
    """
    alpha = np.asarray(alpha, dtype=complex)
    frame = tangent_frame(domain, alpha)
    j = direction - 1
    if not 1 <= j < domain.n:
        raise ValueError("direction must index a tangent vector (2..n)")
    x = np.linspace(-window, window, res)
    X, Y = np.meshgrid(x, x, indexing="ij")
    w = (X + 1j * Y).reshape(-1)
    base = alpha.copy()
    if offsets is not None:
        others = [k for k in range(1, domain.n) if k != j]
        for k, o in zip(others, offsets):
            base = base + o * frame.basis[k]
    tangent_pts = base[None, :] + w[:, None] * frame.basis[j][None, :]
    pts, ok = solve_along_normal(domain, tangent_pts, frame.normal)
    tol = default_weak_tol(domain) if tol is None else tol
    weak = np.zeros(len(w), dtype=bool)
    if ok.any():
        weak[ok] = classify_points(domain, pts[ok], tol)
    coords = np.column_stack([w.real, w.imag])
    return SliceResult(coords=coords, weak_mask=weak, failures=int((~ok).sum()), direction=direction,
                       spacing=float(x[1] - x[0]))


def slice_dimension(result: SliceResult, eps_max: float = 1.5, eps_min: float | None = None,
                    rungs: int = 8) -> BoxCountReport:
    """Box-counting dimension of the weak points of a slice (pitch = grid spacing)."""
    eps_min = eps_min if eps_min is not None else PITCH_FACTOR * 1.0001 * result.spacing
    pts = result.weak_points
    return dim_estimate(pts, eps_max, eps_min, rungs, pitch=result.spacing if len(pts) > 1 else 0.0)


def beta_from_dimension(dim: float) -> float:
    """beta = 2 - slice dimension, floored at 0."""
    return max(0.0, 2.0 - dim)


def best_slice(domain: DomainSpec, alpha, **kwargs) -> dict:
    """Slice dimension in every tangent direction and the smallest one."""
    out = {}
    for j in range(2, domain.n + 1):
        res = slice_weak_set(domain, alpha, j, **kwargs)
        if len(res.weak_points) == 0:
            out[j] = 0.0
        else:
            out[j] = slice_dimension(res).dimension
    best = min(out, key=out.get)
    return {"dimensions": out, "best_direction": best, "beta": beta_from_dimension(out[best])}


def holder_exponent(x, f, *, levels: int | None = None) -> float:
    """Best exponent h with |f(x) - f(y)| <= C |x - y|^h from dyadic separations.

    For separations h_k = 2^k grid steps (k >= 1, so that every separation can
    straddle a grid point symmetrically) the modulus of continuity
    max |f(x + h_k) - f(x)| is computed and log-log regressed on h_k.  A
    constant function returns 1 by convention.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if len(x) < 1000:
        raise ValueError("need at least 1000 samples")
    order = np.argsort(x)
    x, f = x[order], f[order]
    if np.ptp(f) == 0:
        return 1.0
    levels = levels or int(np.log2(len(x))) - 2
    seps, mods = [], []
    for k in range(1, levels):
        step = 2 ** k
        if step >= len(x):
            break
        d = np.abs(f[step:] - f[:-step])
        seps.append(np.mean(x[step:] - x[:-step]))
        mods.append(d.max())
    seps, mods = np.array(seps), np.array(mods)
    keep = mods > 0
    if keep.sum() < 2:
        return 1.0
    return float(np.polyfit(np.log(seps[keep]), np.log(mods[keep]), 1)[0])


def real_root(d: int, c: float) -> float:
    """Real root of y^d = c (largest real part), from the companion-matrix solver."""
    roots = np.roots([1.0] + [0.0] * (d - 1) + [-c])
    real = roots[np.abs(roots.imag) < 1e-6 * max(1.0, abs(c)) ** (1.0 / d) + 1e-9]
    if len(real) == 0:
        real = roots
    return float(real.real.max()) if c >= 0 or d % 2 == 0 else float(real.real.min())


def root_samples(d: int, count: int = 4097) -> tuple[np.ndarray, np.ndarray]:
    """Samples of the real root branch of y^d = x (x in [0,1] for even d, [-1,1] for odd d)."""
    x = np.linspace(0.0 if d % 2 == 0 else -1.0, 1.0, count)
    y = np.array([real_root(d, v) for v in x])
    return x, y


def boundary_coords(points) -> np.ndarray:
    """Real coordinates of complex points, shape (N, 2n)."""
    return to_real(np.asarray(points, dtype=complex))


def slice_tangent_coords(domain: DomainSpec, alpha, points, direction: int) -> np.ndarray:
    frame = tangent_frame(domain, alpha)
    w = hermitian(np.asarray(points) - alpha, frame.basis[direction - 1])
    return np.column_stack([w.real, w.imag])


def on_boundary(domain: DomainSpec, points, tol: float = 1e-10) -> bool:
    return bool(np.all(np.abs(eval_rho(domain, points)) < tol))
