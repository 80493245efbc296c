"""Defining functions, exact jets, boundary projection and tangent frames.

A domain is ``Omega = {rho < 0}`` in C^n.  Every built-in model is written as a
sum of monomials ``c z^alpha zbar^beta`` plus, for the exponentially flat
model, one radial term ``exp(1 - 1/|z_2|^2)``.  All derivatives are exact:
monomials are differentiated term by term and the radial term uses a
closed-form recursion for the derivatives of ``exp(1 - 1/s)``.

Points are complex numpy arrays of shape ``(n,)`` or ``(..., n)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_ORDER = 16
PROJECTION_ITERATIONS = 100
RHO_TOL = 1e-12
PARALLEL_TOL = 1e-8
FRAME_TOL = 1e-10


class GeometryError(RuntimeError):
    """Raised when a geometric precondition fails (outside the domain, no convergence, ...)."""


@dataclass(frozen=True)
class Monomial:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    coeff: float


@dataclass(frozen=True)
class DomainSpec:
    """A bounded domain given by a real defining function.

    ``kind`` is one of ``"ball"``, ``"egg"``, ``"expflat"`` or ``"polynomial"``.
    ``exponents`` holds the egg exponents ``m_j`` and ``terms`` the monomials of a
    general polynomial.  Use the constructors below rather than filling fields.
    """

    kind: str
    n: int
    exponents: tuple[int, ...] = ()
    terms: tuple[Monomial, ...] = ()
    monomials: tuple[Monomial, ...] = field(default=(), compare=False, repr=False)
    flat_index: int | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("domains live in C^n with n >= 2")
        if self.kind == "ball":
            monos = [_unit_mono(self.n, j, 1) for j in range(self.n)]
            monos.append(Monomial((0,) * self.n, (0,) * self.n, -1.0))
            flat = None
        elif self.kind == "egg":
            if len(self.exponents) != self.n or min(self.exponents) < 1:
                raise ValueError("egg needs one positive exponent per coordinate")
            monos = [_unit_mono(self.n, j, m) for j, m in enumerate(self.exponents)]
            monos.append(Monomial((0,) * self.n, (0,) * self.n, -1.0))
            flat = None
        elif self.kind == "expflat":
            if self.n != 2:
                raise ValueError("expflat is defined in C^2")
            monos = [_unit_mono(2, 0, 1), Monomial((0, 0), (0, 0), -1.0)]
            flat = 1
        elif self.kind == "polynomial":
            monos = list(self.terms)
            _check_polynomial(self.n, monos)
            flat = None
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "monomials", tuple(monos))
        object.__setattr__(self, "flat_index", flat)

    @property
    def separable(self) -> bool:
        """True for rho = sum_j f_j(|z_j|^2) - 1 (all built-in models)."""
        return self.kind in ("ball", "egg", "expflat")

    def radial_exponents(self) -> tuple[int, ...]:
        if self.kind == "ball":
            return (1,) * self.n
        if self.kind == "egg":
            return self.exponents
        return (1, 0)

    def to_json(self) -> dict:
        if self.kind == "egg":
            params = {"exponents": list(self.exponents)}
        elif self.kind == "polynomial":
            params = {"terms": [{"alpha": list(t.alpha), "beta": list(t.beta), "coeff": t.coeff}
                                for t in self.terms]}
        else:
            params = {}
        return {"kind": self.kind, "n": self.n, "params": params}

    def __str__(self):
        if self.kind == "egg":
            return f"Egg({self.n},{self.exponents})"
        return {"ball": f"UnitBall({self.n})", "expflat": "ExpFlat"}.get(self.kind, f"Polynomial({self.n})")


def _unit_mono(n: int, j: int, m: int) -> Monomial:
    e = [0] * n
    e[j] = m
    return Monomial(tuple(e), tuple(e), 1.0)


def _check_polynomial(n: int, monos: list[Monomial]):
    if not monos:
        raise ValueError("polynomial domain needs at least one term")
    table: dict[tuple, float] = {}
    for t in monos:
        if len(t.alpha) != n or len(t.beta) != n or min(t.alpha + t.beta) < 0:
            raise ValueError(f"bad multi-index in term {t}")
        key = (t.alpha, t.beta)
        table[key] = table.get(key, 0.0) + float(t.coeff)
    for (a, b), c in table.items():
        if not math.isclose(table.get((b, a), 0.0), c, rel_tol=1e-14, abs_tol=0.0):
            raise ValueError(f"terms are not closed under conjugation: {a},{b}")


def unit_ball(n: int) -> DomainSpec:
    return DomainSpec("ball", n)


def egg(exponents) -> DomainSpec:
    exponents = tuple(int(m) for m in exponents)
    return DomainSpec("egg", len(exponents), exponents=exponents)


def expflat() -> DomainSpec:
    return DomainSpec("expflat", 2)


def polynomial(n: int, terms) -> DomainSpec:
    monos = tuple(Monomial(tuple(int(x) for x in t["alpha"]), tuple(int(x) for x in t["beta"]),
                           float(t["coeff"])) for t in terms)
    return DomainSpec("polynomial", n, terms=monos)


def domain_from_json(doc: dict) -> DomainSpec:
    """Build a domain from ``{"kind", "n", "params"}``; raises ValueError on malformed input."""
    try:
        kind = str(doc["kind"]).lower()
        n = int(doc["n"])
        params = doc.get("params") or {}
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed domain document: {exc}") from None
    aliases = {"unitball": "ball", "ball": "ball", "egg": "egg", "expflat": "expflat",
               "generalpolynomial": "polynomial", "polynomial": "polynomial"}
    if kind not in aliases:
        raise ValueError(f"unknown domain kind {kind!r}")
    kind = aliases[kind]
    try:
        if kind == "ball":
            return unit_ball(n)
        if kind == "egg":
            dom = egg(params["exponents"])
            if dom.n != n:
                raise ValueError("egg exponents do not match n")
            return dom
        if kind == "expflat":
            return expflat()
        return polynomial(n, params["terms"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed {kind} parameters: {exc}") from None


def load_domain(path) -> DomainSpec:
    with open(path) as fh:
        return domain_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# the flat radial term F(s) = exp(1 - 1/s), s = |z|^2


@lru_cache(maxsize=None)
def _flat_polys(kmax: int) -> tuple[np.ndarray, ...]:
    # F^(k)(s) = exp(1 - t) Q_k(t), t = 1/s, with Q_{k+1} = t^2 (Q_k - Q_k')
    q = np.polynomial.Polynomial([1.0])
    out = [q.coef.copy()]
    t2 = np.polynomial.Polynomial([0.0, 0.0, 1.0])
    for _ in range(kmax):
        q = t2 * (q - q.deriv())
        out.append(q.coef.copy())
    return tuple(out)


def flat_derivatives(s, kmax: int) -> np.ndarray:
    """Derivatives F^(k)(s), k = 0..kmax, of F(s) = exp(1 - 1/s) (0 for s <= 0).

    Returns an array of shape ``(kmax + 1,) + s.shape``.  Terms are combined in
    log space so that tiny ``s`` underflows cleanly to 0 instead of inf * 0.
    """
    s = np.asarray(s, dtype=float)
    shape = s.shape
    s = s.reshape(-1)
    out = np.zeros((kmax + 1, s.size))
    pos = s > 0
    if not np.any(pos):
        return out.reshape((kmax + 1,) + shape)
    t = 1.0 / s[pos]
    logt = np.log(t)
    for k, coef in enumerate(_flat_polys(kmax)):
        acc = np.zeros_like(t)
        for i, c in enumerate(coef):
            if c != 0.0:
                acc += c * np.exp(i * logt + 1.0 - t)
        out[k, pos] = acc
    return out.reshape((kmax + 1,) + shape)


# ---------------------------------------------------------------------------
# values and low-order derivatives (vectorized over leading axes)


def _as_points(domain: DomainSpec, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != domain.n:
        raise ValueError(f"point dimension {z.shape[-1]} does not match n={domain.n}")
    return z


def _powers(z: np.ndarray, e: tuple[int, ...]) -> np.ndarray:
    out = np.ones(z.shape[:-1], dtype=complex)
    for j, k in enumerate(e):
        if k:
            out = out * z[..., j] ** k
    return out


def eval_rho(domain: DomainSpec, z) -> np.ndarray | float:
    """rho(z); negative inside, zero on the boundary, positive outside."""
    z = _as_points(domain, z)
    zb = np.conj(z)
    val = np.zeros(z.shape[:-1], dtype=complex)
    for t in domain.monomials:
        val = val + t.coeff * _powers(z, t.alpha) * _powers(zb, t.beta)
    out = val.real
    if domain.flat_index is not None:
        s = np.abs(z[..., domain.flat_index]) ** 2
        out = out + flat_derivatives(s, 0)[0]
    return out if out.ndim else float(out)


def _shift(e: tuple[int, ...], j: int) -> tuple[tuple[int, ...], int]:
    lst = list(e)
    k = lst[j]
    lst[j] = max(k - 1, 0)
    return tuple(lst), k


def dz_rho(domain: DomainSpec, z) -> np.ndarray:
    """Holomorphic gradient (d rho / d z_j)."""
    z = _as_points(domain, z)
    zb = np.conj(z)
    out = np.zeros(z.shape, dtype=complex)
    for t in domain.monomials:
        zbeta = _powers(zb, t.beta)
        for j in range(domain.n):
            a, k = _shift(t.alpha, j)
            if k:
                out[..., j] += t.coeff * k * _powers(z, a) * zbeta
    if domain.flat_index is not None:
        j = domain.flat_index
        s = np.abs(z[..., j]) ** 2
        out[..., j] += flat_derivatives(s, 1)[1] * zb[..., j]
    return out


def second_derivatives(domain: DomainSpec, z) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(A, B)`` with ``A_pq = d2 rho/dz_p dz_q`` and ``B_pq = d2 rho/dz_p dzbar_q``."""
    z = _as_points(domain, z)
    zb = np.conj(z)
    n = domain.n
    A = np.zeros(z.shape + (n,), dtype=complex)
    B = np.zeros(z.shape + (n,), dtype=complex)
    for t in domain.monomials:
        for p in range(n):
            ap, kp = _shift(t.alpha, p)
            if not kp:
                continue
            for q in range(n):
                bq, kq = _shift(t.beta, q)
                if kq:
                    B[..., p, q] += t.coeff * kp * kq * _powers(z, ap) * _powers(zb, bq)
                aq, kq2 = _shift(ap, q)
                kq2 = kq2 if q != p else kp - 1
                if kq2 > 0:
                    A[..., p, q] += t.coeff * kp * kq2 * _powers(z, aq) * _powers(zb, t.beta)
    if domain.flat_index is not None:
        j = domain.flat_index
        s = np.abs(z[..., j]) ** 2
        d = flat_derivatives(s, 2)
        B[..., j, j] += d[1] + s * d[2]
        A[..., j, j] += d[2] * zb[..., j] ** 2
    return A, B


def real_gradient(domain: DomainSpec, z) -> np.ndarray:
    """Euclidean gradient written as a complex vector: rho_x + i rho_y = 2 conj(d rho/dz)."""
    return 2.0 * np.conj(dz_rho(domain, z))


def real_hessian(domain: DomainSpec, z) -> np.ndarray:
    """Real Hessian of rho in coordinates (x_1..x_n, y_1..y_n)."""
    A, B = second_derivatives(domain, z)
    xx = 2.0 * (A + B).real
    yy = 2.0 * (B - A).real
    xy = 2.0 * (B - A).imag
    top = np.concatenate([xx, xy], axis=-1)
    bottom = np.concatenate([np.swapaxes(xy, -1, -2), yy], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def to_real(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.concatenate([z.real, z.imag], axis=-1)


def to_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def hermitian(u, v) -> np.ndarray:
    """<u, v> = sum u_p conj(v_p) along the last axis."""
    return np.sum(np.asarray(u) * np.conj(v), axis=-1)


# ---------------------------------------------------------------------------
# jets


@dataclass
class Jet:
    """Exact derivatives d^alpha dbar^beta rho at ``point`` for |alpha|+|beta| <= order.

    Missing keys are zero.
    """

    point: np.ndarray
    order: int
    coefficients: dict

    def coeff(self, alpha, beta) -> complex:
        return self.coefficients.get((tuple(alpha), tuple(beta)), 0j)


def _falling(k: int, a: int) -> int:
    out = 1
    for i in range(a):
        out *= k - i
    return out


def _sub_indices(e: tuple[int, ...]):
    return np.ndindex(*[k + 1 for k in e])


def _trunc_mul(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    """Product of bivariate power series c[i, j] t^i s^j truncated to i + j <= K."""
    out = np.zeros((K + 1, K + 1), dtype=complex)
    ia, ja = np.nonzero(a)
    for i, j in zip(ia, ja):
        if i + j > K:
            continue
        sub = b[: K + 1 - i, : K + 1 - j]
        out[i:, j:] += a[i, j] * sub
    ii, jj = np.indices(out.shape)
    out[ii + jj > K] = 0
    return out


def _radial_series(derivs: np.ndarray, z0: complex, u: complex, v: complex, K: int) -> np.ndarray:
    """Taylor coefficients in (t, s) of F((z0 + u t)(conj(z0) + v s)) given F^(k)(|z0|^2)."""
    P = np.zeros((K + 1, K + 1), dtype=complex)
    if K >= 1:
        P[1, 0] = np.conj(z0) * u
        P[0, 1] = z0 * v
    if K >= 2:
        P[1, 1] = u * v
    out = np.zeros((K + 1, K + 1), dtype=complex)
    power = np.zeros((K + 1, K + 1), dtype=complex)
    power[0, 0] = 1.0
    for k in range(K + 1):
        if derivs[k] != 0.0:
            out += derivs[k] / math.factorial(k) * power
        power = _trunc_mul(power, P, K)
    return out


def jet(domain: DomainSpec, z, K: int, *, max_order: int = MAX_ORDER) -> Jet:
    """All mixed partials d^alpha dbar^beta rho(z) with |alpha| + |beta| <= K."""
    if K > max_order:
        raise ValueError(f"jet order {K} exceeds the configured maximum {max_order}")
    z = _as_points(domain, z).reshape(domain.n)
    zb = np.conj(z)
    n = domain.n
    coeffs: dict = {}
    for t in domain.monomials:
        for a in _sub_indices(t.alpha):
            if sum(a) > K:
                continue
            for b in _sub_indices(t.beta):
                if sum(a) + sum(b) > K:
                    continue
                c = t.coeff
                for j in range(n):
                    c *= _falling(t.alpha[j], a[j]) * _falling(t.beta[j], b[j])
                    c *= z[j] ** (t.alpha[j] - a[j]) * zb[j] ** (t.beta[j] - b[j])
                key = (tuple(a), tuple(b))
                coeffs[key] = coeffs.get(key, 0j) + c
    if domain.flat_index is not None:
        j = domain.flat_index
        derivs = flat_derivatives(abs(z[j]) ** 2, K)
        series = _radial_series(derivs, z[j], 1.0, 1.0, K)
        for p in range(K + 1):
            for q in range(K + 1 - p):
                if series[p, q] != 0:
                    a = [0] * n
                    b = [0] * n
                    a[j], b[j] = p, q
                    key = (tuple(a), tuple(b))
                    val = series[p, q] * math.factorial(p) * math.factorial(q)
                    coeffs[key] = coeffs.get(key, 0j) + val
    return Jet(point=z, order=K, coefficients=coeffs)


def line_series(domain: DomainSpec, z, L, K: int) -> np.ndarray:
    """Taylor coefficients c[a, b] of rho(z + t L) in (t, tbar), a + b <= K.

    Obtained by exact substitution; equivalent to contracting the jet with L.
    """
    z = _as_points(domain, z).reshape(domain.n)
    L = np.asarray(L, dtype=complex).reshape(domain.n)
    out = np.zeros((K + 1, K + 1), dtype=complex)
    cache: dict = {}

    def factor(j: int, m: int, conj: bool) -> np.ndarray:
        key = (j, m, conj)
        if key not in cache:
            base = np.conj(z[j]) if conj else z[j]
            step = np.conj(L[j]) if conj else L[j]
            f = np.zeros((K + 1, K + 1), dtype=complex)
            for i in range(min(m, K) + 1):
                c = math.comb(m, i) * base ** (m - i) * step ** i
                if conj:
                    f[0, i] = c
                else:
                    f[i, 0] = c
            cache[key] = f
        return cache[key]

    for t in domain.monomials:
        term = np.zeros((K + 1, K + 1), dtype=complex)
        term[0, 0] = t.coeff
        for j in range(domain.n):
            if t.alpha[j]:
                term = _trunc_mul(term, factor(j, t.alpha[j], False), K)
            if t.beta[j]:
                term = _trunc_mul(term, factor(j, t.beta[j], True), K)
        out += term
    if domain.flat_index is not None:
        j = domain.flat_index
        derivs = flat_derivatives(abs(z[j]) ** 2, K)
        out += _radial_series(derivs, z[j], L[j], np.conj(L[j]), K)
    return out


# ---------------------------------------------------------------------------
# projection, distance, frames


def _newton_to_surface(domain: DomainSpec, a: np.ndarray, iterations: int = PROJECTION_ITERATIONS):
    """Gradient Newton a <- a - rho grad / |grad|^2; returns (point, converged)."""
    x = a.copy()
    prev = np.inf
    for _ in range(iterations):
        r = eval_rho(domain, x)
        if abs(r) < 1e-15:
            return x, True
        g = real_gradient(domain, x)
        g2 = float(np.sum(np.abs(g) ** 2))
        if g2 == 0.0 or not np.isfinite(r):
            return x, False
        if abs(r) > 10 * prev:
            return x, False
        prev = abs(r)
        x = x - r * g / g2
    return x, abs(eval_rho(domain, x)) < RHO_TOL


def _parallel_residual(domain: DomainSpec, alpha: np.ndarray, a: np.ndarray) -> float:
    d = to_real(alpha - a)
    g = to_real(real_gradient(domain, alpha))
    nd = np.linalg.norm(d)
    if nd < 1e-14:
        return 0.0
    u = g / np.linalg.norm(g)
    # sine of the angle via the rejection; 1 - cos^2 loses half the digits
    return float(np.linalg.norm(d - (d @ u) * u) / nd)


def project_to_boundary(domain: DomainSpec, a, *, iterations: int = PROJECTION_ITERATIONS) -> np.ndarray:
    """Nearest boundary point pi(a) (foot of the normal through ``a``).

    Gradient Newton lands on the surface, then a Lagrange-Newton iteration on
    ``x - a + lam grad rho(x) = 0, rho(x) = 0`` makes ``x - a`` normal.
    """
    a = _as_points(domain, a).reshape(domain.n).astype(complex)
    x, ok = _newton_to_surface(domain, a, iterations)
    if not ok:
        raise GeometryError("Newton projection did not converge: point outside the collar")
    n = domain.n
    ar = to_real(a)
    xr = to_real(x)
    g = to_real(real_gradient(domain, x))
    lam = -float((xr - ar) @ g) / float(g @ g)

    for _ in range(iterations):
        xc = to_complex(xr)
        g = to_real(real_gradient(domain, xc))
        F = np.concatenate([xr - ar + lam * g, [eval_rho(domain, xc)]])
        if np.linalg.norm(F) < 1e-15:
            break
        H = real_hessian(domain, xc)
        J = np.zeros((2 * n + 1, 2 * n + 1))
        J[: 2 * n, : 2 * n] = np.eye(2 * n) + lam * H
        J[: 2 * n, 2 * n] = g
        J[2 * n, : 2 * n] = g
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        xr = xr + step[: 2 * n]
        lam = lam + step[2 * n]
        if np.linalg.norm(step) < 1e-16:
            break
    alpha = to_complex(xr)
    if abs(eval_rho(domain, alpha)) >= RHO_TOL or _parallel_residual(domain, alpha, a) > PARALLEL_TOL:
        # the foot-point refinement wandered; fall back only if the plain landing is normal
        if abs(eval_rho(domain, x)) < RHO_TOL and _parallel_residual(domain, x, a) <= PARALLEL_TOL:
            return x
        raise GeometryError("projection failed the normality check: point outside the collar")
    return alpha


def boundary_distance(domain: DomainSpec, a, *, global_search: bool = False, samples: int = 256,
                      seed: int = 0) -> float:
    """r(a) = dist(a, complement of Omega) for a strictly inside.

    On the model domains this is the normal-segment length |a - pi(a)|.  With
    ``global_search`` extra foot points are started from ray hits in sampled
    directions and the smallest distance is kept.
    """
    a = _as_points(domain, a).reshape(domain.n)
    if eval_rho(domain, a) >= 0:
        raise GeometryError("point is not strictly inside the domain")
    best = np.inf
    try:
        best = float(np.linalg.norm(a - project_to_boundary(domain, a)))
    except GeometryError:
        if not global_search:
            raise
    if global_search:
        rng = np.random.default_rng(seed)
        dirs = rng.normal(size=(samples, domain.n)) + 1j * rng.normal(size=(samples, domain.n))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        hits = ray_boundary(domain, a, dirs)
        order = np.argsort(np.linalg.norm(hits - a, axis=1))[:8]
        for hit in hits[order]:
            x, ok = _newton_to_surface(domain, hit)
            if ok:
                best = min(best, float(np.linalg.norm(x - a)))
    return best


def ray_boundary(domain: DomainSpec, origin, directions, *, tmax: float = 16.0, steps: int = 256) -> np.ndarray:
    """First boundary crossing of rays ``origin + t d`` (origin inside), by marching and bisection."""
    origin = np.asarray(origin, dtype=complex)
    d = np.asarray(directions, dtype=complex)
    ts = np.linspace(0.0, tmax, steps + 1)[1:]
    lo = np.zeros(len(d))
    hi = np.full(len(d), np.nan)
    for t in ts:
        undone = np.isnan(hi)
        if not undone.any():
            break
        vals = eval_rho(domain, origin + t * d[undone])
        idx = np.nonzero(undone)[0]
        crossed = vals >= 0
        hi[idx[crossed]] = t
        lo[idx[~crossed]] = t
    if np.isnan(hi).any():
        raise GeometryError("ray did not leave the domain; is it bounded?")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        inside = eval_rho(domain, origin + mid[:, None] * d) < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return origin + 0.5 * (lo + hi)[:, None] * d


@dataclass
class BoundaryFrame:
    """Boundary point ``alpha`` with unitary basis; ``basis[0]`` is the complex normal L_1."""

    alpha: np.ndarray
    basis: np.ndarray  # shape (n, n), row j is L_{j+1}

    @property
    def normal(self) -> np.ndarray:
        return self.basis[0]

    @property
    def tangent(self) -> np.ndarray:
        return self.basis[1:]


def unit_normal(domain: DomainSpec, z) -> np.ndarray:
    """Complex unit normal L_1 proportional to (d rho / d zbar_j); also the outward real unit normal."""
    g = np.conj(dz_rho(domain, z))
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise GeometryError("vanishing gradient: degenerate boundary point")
    return g / norm


def gram_schmidt(vectors, against=()) -> np.ndarray:
    out = [np.asarray(v, dtype=complex) for v in against]
    base = len(out)
    for v in vectors:
        w = np.asarray(v, dtype=complex).copy()
        for _ in range(2):
            for u in out:
                w = w - hermitian(w, u) * u
        nw = np.linalg.norm(w)
        if nw < 1e-12:
            continue
        out.append(w / nw)
    return np.array(out[base:])


def tangent_frame(domain: DomainSpec, alpha, *, tol: float = 1e-10) -> BoundaryFrame:
    """Unitary frame at a boundary point: L_1 the normal, L_2..L_n from the coordinate axes."""
    alpha = _as_points(domain, alpha).reshape(domain.n)
    if abs(eval_rho(domain, alpha)) >= tol:
        raise GeometryError("frame requested off the boundary")
    L1 = unit_normal(domain, alpha)
    drop = int(np.argmax(np.abs(L1)))
    axes = [np.eye(domain.n)[k] for k in range(domain.n) if k != drop]
    rest = gram_schmidt(axes, against=[L1])
    return BoundaryFrame(alpha=alpha, basis=np.vstack([L1, rest]))


def frame_from_tangents(domain: DomainSpec, alpha, tangents) -> BoundaryFrame:
    """Frame at ``alpha`` whose tangent vectors follow ``tangents`` in order (re-orthonormalized)."""
    L1 = unit_normal(domain, alpha)
    rest = gram_schmidt(tangents, against=[L1])
    if len(rest) != domain.n - 1:
        rest = tangent_frame(domain, alpha, tol=np.inf).tangent
    return BoundaryFrame(alpha=np.asarray(alpha, dtype=complex), basis=np.vstack([L1, rest]))


def solve_along_normal(domain: DomainSpec, x, normal, *, iterations: int = 60, tol: float = 1e-14):
    """Boundary points ``x + s * normal`` (s real) by vectorized 1-D Newton; returns (points, ok)."""
    x = np.asarray(x, dtype=complex)
    nv = np.broadcast_to(np.asarray(normal, dtype=complex), x.shape)
    s = np.zeros(x.shape[:-1])
    ok = np.zeros(x.shape[:-1], dtype=bool)
    for _ in range(iterations):
        p = x + s[..., None] * nv
        r = eval_rho(domain, p)
        ok = np.abs(r) < tol
        if ok.all():
            break
        slope = np.real(hermitian(real_gradient(domain, p), nv))
        safe = np.abs(slope) > 1e-14
        step = np.where(safe, r / np.where(safe, slope, 1.0), 0.0)
        step = np.clip(step, -0.5, 0.5)
        s = s - np.where(ok, 0.0, step)
    p = x + s[..., None] * nv
    ok = np.abs(eval_rho(domain, p)) < 1e-12
    return p, ok


# ---------------------------------------------------------------------------
# boundary parametrization


def _inverse_profile(domain: DomainSpec, j: int, t: np.ndarray) -> np.ndarray:
    """|z_j| such that f_j(|z_j|^2) = t for the separable models."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    if domain.kind == "expflat" and j == 1:
        with np.errstate(divide="ignore"):
            s = np.where(t > 0, 1.0 / (1.0 - np.log(np.where(t > 0, t, 1.0))), 0.0)
        return np.sqrt(s)
    m = domain.radial_exponents()[j]
    return t ** (1.0 / (2 * m))


def _simplex_grid(dim: int, res: int) -> np.ndarray:
    pts = []
    for idx in np.ndindex(*([res] * dim)):
        if sum(idx) <= res - 1:
            pts.append(idx)
    return np.array(pts, dtype=float) / (res - 1)


def boundary_grid(domain: DomainSpec, res: int, *, seed: int = 0) -> np.ndarray:
    """Boundary sample of shape (N, n).

    Separable models are parametrized by how the unit budget is shared among
    the terms, ``f_j(|z_j|^2) = t_j`` with ``sum t_j = 1`` on a uniform simplex
    grid, times ``res`` equally spaced phases of ``z_1`` (the other phases do
    not change any rotation-invariant quantity).  In C^2 this is a res x res
    grid.  General polynomials are sampled by ray shooting from the origin in
    ``res**2`` low-discrepancy directions.
    """
    if res < 8:
        raise ValueError("resolution must be at least 8 per angular coordinate")
    n = domain.n
    if domain.separable:
        shares = _simplex_grid(n - 1, res)
        last = np.clip(1.0 - shares.sum(axis=1), 0.0, 1.0)
        t = np.column_stack([shares, last])
        mods = np.column_stack([_inverse_profile(domain, j, t[:, j]) for j in range(n)])
        theta = 2 * np.pi * np.arange(res) / res
        pts = np.repeat(mods, res, axis=0).astype(complex)
        pts[:, 0] = pts[:, 0] * np.tile(np.exp(1j * theta), len(mods))
        return pts
    if eval_rho(domain, np.zeros(n)) >= 0:
        raise GeometryError("ray shooting needs the origin inside the domain")
    from scipy.stats import qmc

    u = qmc.Sobol(2 * n, scramble=True, seed=seed).random(res * res)
    from scipy.special import ndtri

    g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
    d = g[:, :n] + 1j * g[:, n:]
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    hits = ray_boundary(domain, np.zeros(n, dtype=complex), d)
    pts, ok = solve_along_normal(domain, hits, unit_normal(domain, hits))
    return pts[ok]
