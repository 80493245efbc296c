"""The verification suite behind ``pclab verify-all``: one check per acceptance item.

Every check returns a :class:`Check` whose ``values`` hold plain floats, ints,
strings and lists only, so reports serialize deterministically.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .convex import (
    cp_constant,
    cp_power,
    cp_series_check,
    doubling_constant,
    exponent_grid,
    sh_identity,
    sh_identity2,
    sigma_at,
    tau_exponent,
)
from .divisor import DivisorGraph, chart_scaling_check, graph_areas, malliavin_sum_check, surface_area, wirtinger_check
from .geometry import DomainSpec, boundary_grid, egg, expflat, unit_ball, unit_normal
from .levi import analytic_weak_mask, classify_points, default_weak_tol, nonflatness_order, weak_set_sample
from .minkowski import (
    beta_from_dimension,
    boundary_coords,
    dim_estimate,
    holder_exponent,
    root_samples,
    slice_dimension,
    slice_weak_set,
)
from .multitype import check_mu_bounds, linear_multitype
from .packing import layered_pack, nu_ratio, packing_lemma_check, theorem_sum
from .polydisc import (
    computed_family,
    containment_report,
    find_delta0,
    minimal_family,
    overflow_everywhere,
)

TOLERANCES = {
    "weak_agreement_min": 0.99,
    "grid_res": 128,
    "minkowski_range": [0.8, 1.2],
    "slice_dim_range": [0.0, 0.3],
    "beta_min": 1.7,
    "kmax": 12,
    "delta0_min": 1e-3,
    "packing_delta": 0.2,
    "packing_layers": [12, 16],
    "layer_sum_change_max": 0.01,
    "ratio_slack": 1.1,
    "malliavin_delta": 0.3,
    "malliavin_budgets": [8000, 16000],
    "malliavin_slack": 0.05,
    "malliavin_stability_max": 0.01,
    "additivity_rel": 1e-4,
    "scaling_rel": 1e-4,
    "wirtinger_tol": 1e-6,
    "packing_lemma_slope_min": 0.9,
    "holder_tol": 0.05,
    "graph_dim_slack": 0.15,
    "doubling_n0_max": 4,
    "sh_tol": 1e-10,
    "cp50_rel": 0.05,
    "tau_exponent_tol": 0.05,
    "nonflat_kmax": 12,
}


@dataclass
class Check:
    criterion: int
    name: str
    passed: bool
    values: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "passed": bool(self.passed),
                "values": _plain(self.values)}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    return x


EGG = egg((1, 2))
WEAK_POINT = np.array([1.0, 0.0], dtype=complex)


def strict_egg_point(y: float = 0.7) -> np.ndarray:
    return np.array([math.sqrt(1 - y ** 4), y], dtype=complex)


def weak_agreement(domain: DomainSpec, res: int = 128) -> dict:
    pts = boundary_grid(domain, res)
    tol = default_weak_tol(domain)
    got = classify_points(domain, pts, tol)
    want = analytic_weak_mask(domain, pts)
    return {"agreement": float(np.mean(got == want)), "points": len(pts), "weak_found": int(got.sum()),
            "weak_expected": int(want.sum()), "tol": tol}


def check_weak_set(seed: int = 0) -> Check:
    vals = {"egg": weak_agreement(EGG), "expflat": weak_agreement(expflat())}
    ok = all(v["agreement"] >= TOLERANCES["weak_agreement_min"] for v in vals.values())
    return Check(1, "weak-set classification", ok, vals)


def slice_beta(domain: DomainSpec, alpha=WEAK_POINT) -> tuple[float, float]:
    """Slice dimension at a weak point with the exact-zero test, and beta = 2 - dimension."""
    res = slice_weak_set(domain, alpha, 2, tol=0.0)
    dim = slice_dimension(res).dimension if len(res.weak_points) > 1 else 0.0
    return dim, beta_from_dimension(dim)


def check_minkowski(seed: int = 0) -> Check:
    dom = expflat()
    W = weak_set_sample(dom, TOLERANCES["grid_res"])
    rep = dim_estimate(boundary_coords(W.points), 2.0, 0.02, 8)
    sdim, beta = slice_beta(dom)
    lo, hi = TOLERANCES["minkowski_range"]
    slo, shi = TOLERANCES["slice_dim_range"]
    ok = lo <= rep.dimension <= hi and slo <= sdim <= shi and beta >= TOLERANCES["beta_min"]
    return Check(2, "Minkowski dimension of W (flat model)", ok,
                 {"dimension": rep.dimension, "counts": rep.counts, "slice_dimension": sdim, "beta": beta,
                  "weak_points": len(W.points)})


def check_multitype(seed: int = 0) -> Check:
    kmax = TOLERANCES["kmax"]
    rows = []
    ok = True

    def run(name, dom, p, want):
        nonlocal ok
        mt = linear_multitype(dom, p, kmax, seed=seed)
        good = tuple(mt.weight) == want and mt.converged
        ok &= good
        rows.append({"case": name, "point": [[float(v.real), float(v.imag)] for v in p],
                     "weight": [float(m) for m in mt.weight], "converged": mt.converged, "passed": good})

    for th in (0.0, math.pi / 3, math.pi):
        run("egg weak", EGG, np.array([np.exp(1j * th), 0.0]), (1.0, 4.0))
    for y in (0.3, 0.7, 1.0):
        p = strict_egg_point(y)
        run("egg strict", EGG, p * np.array([1.0, np.exp(0.4j)]), (1.0, 2.0))
    for n in (2, 3):
        dom = unit_ball(n)
        for p in boundary_grid(dom, 8)[::13][:4]:
            run(f"ball{n}", dom, p, (1.0,) + (2.0,) * (n - 1))
    return Check(3, "linear multitype", ok, {"cases": rows})


def egg_family():
    return computed_family(EGG, boundary_grid(EGG, 8))


def check_good_family(seed: int = 0) -> Check:
    vals = {}
    ok = True
    for name, fam, samples in (
        ("ball2", minimal_family(unit_ball(2), boundary_grid(unit_ball(2), 8)), 16),
        ("ball3", minimal_family(unit_ball(3), boundary_grid(unit_ball(3), 8)[::4]), 8),
        ("egg", egg_family(), 16),
    ):
        d0 = find_delta0(fam, samples=samples)
        rep = containment_report(fam, d0, samples=samples)
        over = overflow_everywhere(fam, samples=samples)
        good = d0 >= TOLERANCES["delta0_min"] and rep["failed"] == 0 and over
        ok &= good
        vals[name] = {"delta0": d0, "checked": rep["checked"], "failed": rep["failed"],
                      "overflow_at_2": over, "weights": sorted({tuple(w) for w in fam.weights})}
    return Check(4, "good family of polydiscs", ok, vals)


def check_layered_sum(seed: int = 0) -> Check:
    delta = TOLERANCES["packing_delta"]
    W = weak_set_sample(EGG, TOLERANCES["grid_res"]).points
    fam = egg_family()
    _, beta = slice_beta(EGG)
    m_n = fam.weight_at(WEAK_POINT)[-1]
    sums = {}
    for K in TOLERANCES["packing_layers"]:
        P = layered_pack(EGG, fam, delta, W, 0.25, K)
        sums[K] = (theorem_sum(P, beta=beta, m_n=m_n), P.verify_disjoint(), len(P))
    k1, k2 = TOLERANCES["packing_layers"]
    t1, t2 = sums[k1][0].total, sums[k2][0].total
    change = abs(t2 - t1) / t2
    ts = sums[k2][0]
    bound = nu_ratio(delta) ** (beta / m_n) * TOLERANCES["ratio_slack"]
    ok = change < TOLERANCES["layer_sum_change_max"] and ts.ratio is not None and ts.ratio <= bound \
        and sums[k1][1] and sums[k2][1]
    return Check(5, "layered packing sum over W", ok,
                 {"total_K12": t1, "total_K16": t2, "relative_change": change, "fitted_ratio": ts.ratio,
                  "ratio_bound": bound, "beta": beta, "layer_sums": ts.layer_sums,
                  "counts": [sums[k1][2], sums[k2][2]], "disjoint": bool(sums[k1][1] and sums[k2][1])})


def check_malliavin(seed: int = 0) -> Check:
    dom = unit_ball(2)
    delta = TOLERANCES["malliavin_delta"]
    fam = minimal_family(dom, boundary_grid(dom, 16))
    vals = {}
    ok = True
    for name, X in (("flat", DivisorGraph((0.0,))), ("parabola", DivisorGraph((0.0, 0.0, 0.3)))):
        res = [malliavin_sum_check(dom, X, delta, b, seed=seed, family=fam,
                                   slack=TOLERANCES["malliavin_slack"]) for b in TOLERANCES["malliavin_budgets"]]
        change = abs(res[1].lhs - res[0].lhs) / res[1].lhs
        good = all(r.passed for r in res) and change < TOLERANCES["malliavin_stability_max"]
        ok &= good
        vals[name] = {"lhs": [r.lhs for r in res], "area_budget": res[0].budget, "counts": [r.count for r in res],
                      "relative_change": change}
    return Check(6, "Malliavin-type sum on divisors", ok, vals)


def random_graphs(count: int, seed: int, through_center: bool = True):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        deg = int(rng.integers(1, 5))
        c = 0.3 * (rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)) / np.arange(1, deg + 2)
        if through_center:
            c[0] = 0.0
        out.append(DivisorGraph(tuple(complex(v) for v in c)))
    return out


def check_projection_lemma(seed: int = 0) -> Check:
    graphs = random_graphs(10, seed)
    add = []
    for X in graphs:
        a = graph_areas(X)
        s = surface_area(X)
        add.append(abs(s - a.total) / s)
    add_ok = max(add) <= TOLERANCES["additivity_rel"]

    scale = []
    fam_b = minimal_family(unit_ball(2), boundary_grid(unit_ball(2), 8))
    fam_e = egg_family()
    Y = random_graphs(1, seed + 1, through_center=False)[0]
    for fam, alpha in ((fam_b, fam_b.samples[5]), (fam_e, WEAK_POINT), (fam_e, strict_egg_point())):
        nu = unit_normal(fam.domain, alpha)
        for delta, r in ((0.1, 0.25), (0.3, 0.05), (1.0, 0.01)):
            res = chart_scaling_check(fam, alpha - r * nu, delta, Y, alpha=alpha, r=r,
                                      rel_tol=TOLERANCES["scaling_rel"])
            scale.append({"weight": list(res.weight), "delta": delta, "r": r, "passed": res.passed,
                          "lhs": [res.lhs[1], res.lhs[2]], "rhs": [res.rhs[1], res.rhs[2]]})
    scale_ok = all(s["passed"] for s in scale)

    weights = {tuple(w) for w in fam_e.weights} | {(1.0, 2.0), (1.0, 2.0, 2.0)}
    mu_ok = all(check_mu_bounds(w) for w in weights)

    tol = TOLERANCES["wirtinger_tol"]
    flat = wirtinger_check(DivisorGraph((0.0,)), tol=tol)
    wir = [wirtinger_check(X, tol=tol) for X in graphs]
    wir_ok = flat.passed and flat.equality and all(w.passed and not w.equality for w in wir)
    ok = add_ok and scale_ok and mu_ok and wir_ok
    return Check(7, "projection-area lemma", ok,
                 {"additivity_max_rel": max(add), "scaling": scale, "mu_bounds": mu_ok,
                  "wirtinger_totals": [w.total for w in wir], "flat_total": flat.total,
                  "parts": {"additivity": add_ok, "scaling": scale_ok, "mu_bounds": mu_ok, "wirtinger": wir_ok}})


def segment_points(count: int = 4097) -> np.ndarray:
    x = np.linspace(-0.5, 0.5, count)
    return np.column_stack([x + 0j, np.zeros(count, dtype=complex)])


def check_packing_lemma(seed: int = 0) -> Check:
    r_values = 2.0 ** -np.arange(3, 9)
    rep = packing_lemma_check(segment_points(), [1.0], r_values, TOLERANCES["packing_lemma_slope_min"])
    return Check(8, "packing lemma on a segment", rep.passed,
                 {"slope": rep.slope, "counts": rep.counts, "areas": rep.areas})


def check_holder(seed: int = 0) -> Check:
    h = {d: holder_exponent(*root_samples(d)) for d in (2, 3)}
    x, y = root_samples(3, 65537)
    rep = dim_estimate(np.column_stack([x, y]), 0.5, 0.004, 8)
    bound = 2 - 1 / 3 + TOLERANCES["graph_dim_slack"]
    ok = all(abs(h[d] - 1 / d) <= TOLERANCES["holder_tol"] for d in h) and rep.dimension <= bound
    return Check(9, "Holder exponents of roots", ok,
                 {"holder": {str(d): v for d, v in h.items()}, "graph_dimension": rep.dimension,
                  "graph_dimension_bound": bound})


def check_convex(seed: int = 0) -> Check:
    pts = [WEAK_POINT, strict_egg_point(), strict_egg_point(0.3), np.array([0.0, 1.0 + 0j])]
    n0 = doubling_constant(EGG, pts, [1e-2, 1e-3], TOLERANCES["doubling_n0_max"])
    sigma = sigma_at(EGG, WEAK_POINT * 0.99)
    grid = exponent_grid(20)
    sh1 = all(sh_identity(sigma, q) for q in grid)
    sh2 = True
    for p in grid:
        for q in grid:
            if 1 / p + 1 / q <= 1:
                sh2 &= sh_identity2(sigma, p, q, 1 / (1 / p + 1 / q))
    c2sq = cp_power(2)
    c50 = cp_constant(50)
    series = all(cp_series_check(p) for p in grid if p > 1)
    ds = 2.0 ** -np.arange(6, 15)
    tb = tau_exponent(unit_ball(2), WEAK_POINT, 2, ds)
    te = tau_exponent(EGG, WEAK_POINT, 2, ds)
    tt = TOLERANCES["tau_exponent_tol"]
    parts = {
        "doubling": n0 is not None and n0 <= TOLERANCES["doubling_n0_max"],
        "sh": sh1 and sh2,
        "c2_squared_is_3": c2sq == 3.0,
        "cp_series": series,
        "c50_within_5pct_of_2": abs(c50 - 2) <= TOLERANCES["cp50_rel"] * 2,
        "tau_ball": abs(tb - 0.5) <= tt,
        "tau_egg": abs(te - 0.25) <= tt,
    }
    return Check(10, "convex-type machinery", all(parts.values()),
                 {"doubling_n0": n0, "c2_squared": c2sq, "c50": c50, "c50_power_50": c50 ** 50,
                  "tau_exponent_ball": tb, "tau_exponent_egg": te, "parts": parts})


def check_nonflatness(seed: int = 0) -> Check:
    kmax = TOLERANCES["nonflat_kmax"]
    v = np.array([0.0, 1.0], dtype=complex)
    k_egg = nonflatness_order(EGG, WEAK_POINT, v, kmax)
    k_flat = nonflatness_order(expflat(), WEAK_POINT, v, kmax)
    _, beta = slice_beta(expflat())
    ok = k_egg == 2 and k_flat == "Flat" and beta >= TOLERANCES["beta_min"]
    return Check(11, "non-flatness order", ok, {"egg": k_egg, "expflat": k_flat, "expflat_beta": beta})


CHECKS = {
    1: check_weak_set,
    2: check_minkowski,
    3: check_multitype,
    4: check_good_family,
    5: check_layered_sum,
    6: check_malliavin,
    7: check_projection_lemma,
    8: check_packing_lemma,
    9: check_holder,
    10: check_convex,
    11: check_nonflatness,
}


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("PCLAB_THREADS", os.cpu_count() or 1)))
    except ValueError:
        raise ValueError("PCLAB_THREADS must be an integer") from None


def run_suite(seed: int = 0, only=None, domain: DomainSpec | None = None) -> dict:
    """Run the checks (all, or the ids in ``only``) and return the report dictionary."""
    ids = sorted(only) if only else sorted(CHECKS)
    unknown = [i for i in ids if i not in CHECKS]
    if unknown:
        raise ValueError(f"unknown criteria {unknown}")
    with ThreadPoolExecutor(max_workers=min(thread_cap(), len(ids))) as pool:
        futures = {i: pool.submit(CHECKS[i], seed) for i in ids}
        results = [futures[i].result() for i in ids]
    report = {
        "meta": {"version": __version__, "seed": seed, "tolerances": TOLERANCES,
                 "domain": domain.to_json() if domain is not None else None},
        "checks": [c.to_json() for c in results],
        "passed": all(c.passed for c in results),
    }
    if domain is not None:
        report["domain_summary"] = domain_summary(domain, seed)
    return report


def domain_summary(domain: DomainSpec, seed: int = 0) -> dict:
    """Weak fraction on a coarse grid and the multitype at one sample of the user domain."""
    pts = boundary_grid(domain, 32, seed=seed)
    weak = classify_points(domain, pts, default_weak_tol(domain))
    mt = linear_multitype(domain, pts[0], seed=seed)
    return _plain({"grid_points": len(pts), "weak_fraction": float(np.mean(weak)),
                   "sample_point": [[float(v.real), float(v.imag)] for v in pts[0]],
                   "sample_weight": ["inf" if math.isinf(m) else m for m in mt.weight]})


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
