"""Symbolic oracles shared by the test modules."""

from __future__ import annotations

import math

import numpy as np
import sympy as sp


def symbolic_rho(domain):
    """rho with z_j and zbar_j as independent sympy symbols (Wirtinger calculus)."""
    z = sp.symbols(f"z1:{domain.n + 1}")
    w = sp.symbols(f"w1:{domain.n + 1}")
    expr = 0
    for t in domain.monomials:
        term = sp.Float(t.coeff)
        for j in range(domain.n):
            term *= z[j] ** t.alpha[j] * w[j] ** t.beta[j]
        expr += term
    if domain.flat_index is not None:
        j = domain.flat_index
        expr += sp.exp(1 - 1 / (z[j] * w[j]))
    return expr, z, w


def sym_derivative(domain, point, a, b):
    expr, z, w = symbolic_rho(domain)
    for j in range(domain.n):
        if a[j]:
            expr = sp.diff(expr, z[j], a[j])
        if b[j]:
            expr = sp.diff(expr, w[j], b[j])
    subs = {z[j]: complex(point[j]) for j in range(domain.n)}
    subs.update({w[j]: complex(np.conj(point[j])) for j in range(domain.n)})
    return complex(sp.N(expr.subs(subs), 30))


def levi_oracle(domain, point):
    """Levi form on the unit complex tangent (rho_2, -rho_1)/|d rho|, n = 2, from Wirtinger derivatives."""
    expr, z, w = symbolic_rho(domain)
    subs = {z[j]: complex(point[j]) for j in range(2)}
    subs.update({w[j]: complex(np.conj(point[j])) for j in range(2)})
    d = [complex(sp.N(sp.diff(expr, z[j]).subs(subs), 30)) for j in range(2)]
    B = [[complex(sp.N(sp.diff(expr, z[j], w[k]).subs(subs), 30)) for k in range(2)] for j in range(2)]
    t = np.array([d[1], -d[0]]) / math.hypot(abs(d[0]), abs(d[1]))
    return float(np.real(sum(B[j][k] * t[j] * np.conj(t[k]) for j in range(2) for k in range(2))))
