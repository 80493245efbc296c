"""Levi form on the complex tangent space, its determinant, and the weak set W."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import (
    BoundaryFrame,
    DomainSpec,
    boundary_grid,
    dz_rho,
    eval_rho,
    project_to_boundary,
    second_derivatives,
    tangent_frame,
)

WEAK_REL_TOL = 1e-8
IMAG_TOL = 1e-8


class ConsistencyError(RuntimeError):
    pass


@dataclass
class LeviMatrix:
    frame: BoundaryFrame
    entries: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))


def levi_matrix(domain: DomainSpec, frame: BoundaryFrame) -> LeviMatrix:
    """L_jk = sum_pq rho_{p qbar} L_j^p conj(L_k^q) for the tangent vectors of ``frame``."""
    _, B = second_derivatives(domain, frame.alpha)
    T = frame.tangent
    return LeviMatrix(frame=frame, entries=T @ B @ T.conj().T)


def levi_determinants(domain: DomainSpec, points) -> np.ndarray:
    """Levi determinant at many boundary points at once.

    Uses the bordered form det(U^T B conj U) = -det [[B^T, N], [N^*, 0]] / |N|^2
    with N = conj(d rho), which needs no explicit tangent frame.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=complex))
    n = domain.n
    _, B = second_derivatives(domain, pts)
    N = np.conj(dz_rho(domain, pts))
    M = np.zeros((len(pts), n + 1, n + 1), dtype=complex)
    M[:, :n, :n] = np.swapaxes(B, -1, -2)
    M[:, :n, n] = N
    M[:, n, :n] = N.conj()
    det = -np.linalg.det(M) / np.sum(np.abs(N) ** 2, axis=1)
    scale = np.maximum(1.0, np.abs(det))
    if np.any(np.abs(det.imag) > IMAG_TOL * scale):
        raise ConsistencyError("Levi determinant has a large imaginary part")
    return det.real


def levi_determinant(domain: DomainSpec, alpha) -> float:
    frame = tangent_frame(domain, alpha)
    det = np.linalg.det(levi_matrix(domain, frame).entries)
    if abs(det.imag) > IMAG_TOL * max(1.0, abs(det)):
        raise ConsistencyError("Levi determinant has a large imaginary part")
    return float(det.real)


@lru_cache(maxsize=64)
def default_weak_tol(domain: DomainSpec) -> float:
    """1e-8 times the largest |D| over a coarse boundary sample."""
    pts = boundary_grid(domain, 16)
    return WEAK_REL_TOL * float(np.max(np.abs(levi_determinants(domain, pts))))


def classify_point(domain: DomainSpec, alpha, tol: float | None = None) -> str:
    tol = default_weak_tol(domain) if tol is None else tol
    return "Weak" if abs(levi_determinant(domain, alpha)) <= tol else "Strict"


def classify_points(domain: DomainSpec, points, tol: float | None = None) -> np.ndarray:
    """Boolean mask, True where the point is weakly pseudoconvex."""
    tol = default_weak_tol(domain) if tol is None else tol
    return np.abs(levi_determinants(domain, points)) <= tol


@dataclass
class WeakSetSample:
    points: np.ndarray
    tol: float
    spacing: float
    grid: np.ndarray
    determinants: np.ndarray

    def __len__(self):
        return len(self.points)


def weak_set_sample(domain: DomainSpec, res: int, tol: float | None = None) -> WeakSetSample:
    """Classify a res x res boundary grid and keep the weak points."""
    tol = default_weak_tol(domain) if tol is None else tol
    grid = boundary_grid(domain, res)
    if len(grid) == 0:
        raise ValueError("empty boundary parametrization")
    dets = levi_determinants(domain, grid)
    weak = np.abs(dets) <= tol
    return WeakSetSample(points=grid[weak], tol=tol, spacing=2 * np.pi / res, grid=grid, determinants=dets)


def analytic_weak_mask(domain: DomainSpec, points, atol: float = 1e-12) -> np.ndarray:
    """Known W = {|z_1| = 1, z_2 = 0} for the C^2 egg (m_2 > 1) and the flat model."""
    pts = np.asarray(points, dtype=complex)
    if domain.kind == "ball":
        return np.zeros(len(pts), dtype=bool)
    if domain.kind in ("egg", "expflat") and domain.n == 2:
        return np.abs(pts[:, 1]) <= atol
    raise ValueError("analytic weak set only known for the ball, C^2 eggs and the flat model")


def boundary_curve(domain: DomainSpec, alpha, v, t: float) -> np.ndarray:
    """gamma_v(t): re-project alpha + t v onto the boundary (t = 0 gives alpha)."""
    if t == 0.0:
        return np.asarray(alpha, dtype=complex)
    return project_to_boundary(domain, np.asarray(alpha) + t * np.asarray(v))


def _central_difference(f, k: int, h: float) -> float:
    from math import comb

    total = 0.0
    for j in range(k + 1):
        total += (-1) ** j * comb(k, j) * f((k / 2 - j) * h)
    return total / h ** k


def nonflatness_order(domain: DomainSpec, alpha, v, kmax: int, *, step: float = 1e-2,
                      rel_tol: float = 1e-6):
    """Smallest k <= kmax with d^k/dt^k D(gamma_v(t)) at 0 nonzero, else ``"Flat"``.

    Derivatives come from central differences with steps h and h/2 combined by
    one Richardson step; ``rel_tol`` is relative to the largest |D| on a coarse
    boundary sample.
    """
    alpha = np.asarray(alpha, dtype=complex)
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    if abs(np.sum(dz_rho(domain, alpha) * v)) > 1e-8 * np.linalg.norm(dz_rho(domain, alpha)):
        raise ValueError("direction is not complex-tangent at alpha")
    scale = default_weak_tol(domain) / WEAK_REL_TOL
    cache: dict[float, float] = {}

    def D(t: float) -> float:
        key = round(t, 15)
        if key not in cache:
            cache[key] = float(levi_determinants(domain, boundary_curve(domain, alpha, v, t))[0])
        return cache[key]

    for k in range(kmax + 1):
        if k == 0:
            d = D(0.0)
        else:
            coarse = _central_difference(D, k, step)
            fine = _central_difference(D, k, step / 2)
            d = (4 * fine - coarse) / 3
        if abs(d) > rel_tol * scale:
            return k
    return "Flat"


def min_levi_eigenvalue(domain: DomainSpec, points) -> float:
    out = np.inf
    for p in np.atleast_2d(points):
        out = min(out, float(levi_matrix(domain, tangent_frame(domain, p)).eigenvalues().min()))
    return out


def is_on_boundary(domain: DomainSpec, points, tol: float = 1e-10) -> np.ndarray:
    return np.abs(eval_rho(domain, points)) < tol
