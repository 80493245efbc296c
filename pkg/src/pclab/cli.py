"""Command-line entry point ``pclab``.

Exit status: 0 when every check passes, 1 when a mathematical check fails,
2 on input or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .convex import (
    carleson_window_data,
    cp_constant,
    cp_power,
    cp_series_check,
    doubling_check,
    pseudo_ball,
    sh_check,
    sh_check2,
    surrogate_kernel_norm,
)
from .divisor import chart_scaling_check, graph_areas, graph_from_json, malliavin_sum_check, wirtinger_check
from .geometry import GeometryError, boundary_grid, eval_rho, load_domain, project_to_boundary, unit_normal
from .levi import ConsistencyError, classify_points, default_weak_tol, levi_determinants, weak_set_sample
from .minkowski import DimensionError, beta_from_dimension, dim_estimate, slice_dimension, slice_weak_set
from .multitype import linear_multitype, mu
from .packing import greedy_pack, theorem_sum
from .polydisc import (
    FamilyError,
    computed_family,
    containment_report,
    family_from_json,
    find_delta0,
    fixed_family,
    minimal_family,
    mu_report,
)
from .suite import dumps, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def parse_point(text: str) -> np.ndarray:
    try:
        return np.array([complex(t.strip().replace(" ", "")) for t in text.split(",")], dtype=complex)
    except ValueError:
        raise InputError(f"cannot parse point {text!r}; expected comma-separated complex numbers") from None


def parse_weight(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise InputError(f"cannot parse weight {text!r}") from None


def coord_header(n: int) -> list[str]:
    return [f"{p}{j}" for j in range(1, n + 1) for p in ("x", "y")]


def coord_cells(z) -> list[str]:
    out = []
    for v in z:
        out += [fmt(v.real), fmt(v.imag)]
    return out


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def emit(report: dict, path=None):
    text = json.dumps(report, indent=2, sort_keys=True, default=_default)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"not serializable: {type(x)}")


def meta(args, **tolerances) -> dict:
    knobs = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"version": __version__, "seed": getattr(args, "seed", None), "command": args.command,
            "args": knobs, "tolerances": tolerances}


def _enc_weight(w):
    return ["inf" if math.isinf(m) else m for m in w]


# -- subcommands ------------------------------------------------------------


def cmd_classify(args) -> int:
    dom = load_domain(args.domain)
    pts = boundary_grid(dom, args.res, seed=args.seed)
    tol = default_weak_tol(dom) if args.tol is None else args.tol
    dets = levi_determinants(dom, pts)
    weak = classify_points(dom, pts, tol)
    rho = eval_rho(dom, pts)
    rows = [coord_cells(p) + [fmt(r), fmt(d), "Weak" if w else "Strict"] for p, r, d, w in zip(pts, rho, dets, weak)]
    write_csv(args.out, coord_header(dom.n) + ["rho", "levi_det", "class"], rows)
    if args.out not in (None, "-"):
        emit({"meta": meta(args, weak_tol=tol), "points": len(pts), "weak": int(weak.sum())})
    return EXIT_OK


def cmd_multitype(args) -> int:
    dom = load_domain(args.domain)
    p = parse_point(args.point)
    if len(p) != dom.n:
        raise InputError("point dimension does not match the domain")
    if abs(eval_rho(dom, p)) > 1e-8:
        p = project_to_boundary(dom, p)
    mt = linear_multitype(dom, p, args.kmax, args.samples, seed=args.seed, repair=args.repair)
    emit({"meta": meta(args, coefficient_tol=1e-10), "point": p, **mt.to_json()}, args.out)
    return EXIT_OK if mt.valid and not mt.infinite else EXIT_FAIL


def build_family(args, dom):
    samples = boundary_grid(dom, args.res, seed=args.seed)
    if args.override_weak:
        w_weak = parse_weight(args.override_weak)
        if len(w_weak) != dom.n:
            raise InputError("override weight length does not match the domain")
        tol = default_weak_tol(dom)
        base = computed_family(dom, samples, seed=args.seed) if args.type == "computed" else None

        def weight(p):
            if classify_points(dom, p[None, :], tol)[0]:
                return w_weak
            return base.weight_at(p) if base is not None else (1.0,) + (2.0,) * (dom.n - 1)

        return fixed_family(dom, samples, weight)
    if args.type == "minimal":
        return minimal_family(dom, samples)
    return computed_family(dom, samples, seed=args.seed)


def cmd_family(args) -> int:
    dom = load_domain(args.domain)
    fam = build_family(args, dom)
    report = {"meta": meta(args, delta_resolution=1e-3, delta_min=1e-3, samples_per_circle=args.circle_samples)}
    try:
        d0 = find_delta0(fam, samples=args.circle_samples)
    except FamilyError as exc:
        report.update({"passed": False, "error": str(exc), "family": fam.to_json()})
        emit(report, args.out)
        return EXIT_FAIL
    rep = containment_report(fam, d0, samples=args.circle_samples)
    weights = sorted({tuple(w) for w in fam.weights})
    report.update({"passed": rep["failed"] == 0, "delta0": d0, "containment": rep,
                   "mu": {str(w): mu_report(w) for w in weights}, "family": fam.to_json()})
    emit(report, args.out)
    return EXIT_OK if rep["failed"] == 0 else EXIT_FAIL


def load_family(args, dom):
    if args.family:
        with open(args.family) as fh:
            doc = json.load(fh)
        fam = family_from_json(doc.get("family", doc))
        if fam.domain.to_json() != dom.to_json():
            raise InputError("family was built for a different domain")
        return fam
    return minimal_family(dom, boundary_grid(dom, 16, seed=args.seed))


def cmd_packing(args) -> int:
    dom = load_domain(args.domain)
    fam = load_family(args, dom)
    W = divisor = None
    if args.target == "weak":
        W = weak_set_sample(dom, args.res).points
    if args.target == "divisor":
        if not args.graph:
            raise InputError("--graph is required for the divisor target")
        with open(args.graph) as fh:
            divisor = graph_from_json(json.load(fh))
    P = greedy_pack(dom, fam, args.delta, args.target, budget=args.budget, seed=args.seed, W_points=W,
                    divisor=divisor, gamma0=args.gamma0, layers=args.layers)
    rows = [coord_cells(a) + [fmt(r), fmt(m), str(int(k))] for a, r, m, k in zip(P.centers, P.r, P.mu, P.layer)]
    write_csv(args.out, coord_header(dom.n) + ["r", "mu", "layer"], rows)
    disjoint = P.verify_disjoint()
    ts = theorem_sum(P)
    report = {"meta": meta(args), "count": len(P), "disjoint": disjoint, "sum": ts.total,
              "layer_sums": ts.layer_sums, "ratio": ts.ratio, "candidates": P.meta.get("candidates")}
    if args.out not in (None, "-"):
        emit(report, args.report)
    return EXIT_OK if disjoint else EXIT_FAIL


def read_points(path) -> np.ndarray:
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise InputError("empty point file")
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        return np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError:
        raise InputError("point file must contain numeric columns only") from None


def cmd_dim(args) -> int:
    pts = read_points(args.input)
    try:
        rep = dim_estimate(pts, args.eps_max, args.eps_min, args.rungs, offset=args.offset)
    except DimensionError as exc:
        raise InputError(str(exc)) from None
    emit({"meta": meta(args, pitch_factor=4.0, min_admissible=4), **rep.to_json()}, args.out)
    return EXIT_OK


def cmd_slice(args) -> int:
    dom = load_domain(args.domain)
    p = parse_point(args.point)
    if len(p) != dom.n:
        raise InputError("point dimension does not match the domain")
    res = slice_weak_set(dom, p, args.direction, window=args.window, res=args.res, tol=args.tol)
    if len(res.weak_points) > 1:
        dim = slice_dimension(res).dimension
    else:
        dim = 0.0
    emit({"meta": meta(args, weak_tol=args.tol if args.tol is not None else default_weak_tol(dom)),
          "weak_points": int(res.weak_mask.sum()), "failures": res.failures, "dimension": dim,
          "beta": beta_from_dimension(dim)}, args.out)
    return EXIT_OK


def cmd_divisor(args) -> int:
    dom = load_domain(args.domain)
    with open(args.graph) as fh:
        X = graph_from_json(json.load(fh))
    report = {"meta": meta(args, quadrature_rel=1e-10, wirtinger_tol=1e-6, scaling_rel=1e-4, malliavin_slack=0.05)}
    if args.check == "wirtinger":
        res = wirtinger_check(X)
        a = graph_areas(X)
        report.update({"A1": a.A1, "A2": a.A2, "total": res.total, "passed": res.passed, "equality": res.equality})
        ok = res.passed
    elif args.check == "scaling":
        fam = minimal_family(dom, boundary_grid(dom, 16, seed=args.seed))
        alpha = project_to_boundary(dom, parse_point(args.point))
        a = alpha - args.r * unit_normal(dom, alpha)
        res = chart_scaling_check(fam, a, args.delta, X, alpha=alpha, r=args.r)
        report.update({"lhs": res.lhs, "rhs": res.rhs, "passed": res.passed, "weight": list(res.weight)})
        ok = res.passed
    else:
        res = malliavin_sum_check(dom, X, args.delta, args.budget, seed=args.seed)
        report.update({"lhs": res.lhs, "area_budget": res.budget, "count": res.count, "passed": res.passed})
        ok = res.passed
    emit(report, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not key=value")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _number(x) -> float:
    if isinstance(x, str) and x.lower() in ("inf", "infinity"):
        return math.inf
    return float(x)


def cmd_convex(args) -> int:
    dom = load_domain(args.domain)
    prm = parse_params(args.params)
    report = {"meta": meta(args, tau_tol=1e-8, tau_phases=32, sh_tol=1e-10, window_rel=1e-4), "params": prm}
    if args.check == "cp":
        p = _number(prm.get("p", 2))
        ok = cp_series_check(p)
        report.update({"C_p": cp_constant(p), "C_p_power_p": cp_power(p), "series_agrees": ok})
    else:
        x = parse_point(str(prm.get("point", "1,0")))
        if len(x) != dom.n:
            raise InputError("point dimension does not match the domain")
        x = project_to_boundary(dom, x) if abs(eval_rho(dom, x)) > 1e-8 else x
        if args.check == "doubling":
            delta = _number(prm.get("delta", 0.01))
            N = _number(prm.get("N", 2))
            ok = doubling_check(dom, x, delta, N)
            report.update({"taus": pseudo_ball(dom, x, delta).taus, "sigma": pseudo_ball(dom, x, delta).sigma,
                           "sigma_N": pseudo_ball(dom, x, N * delta).sigma, "passed": ok})
        else:
            r = _number(prm.get("r", 0.01))
            a = x - r * unit_normal(dom, x)
            if args.check == "sh":
                if "s" in prm:
                    ok = sh_check2(dom, a, _number(prm["p"]), _number(prm["q"]), _number(prm["s"]))
                else:
                    ok = sh_check(dom, a, _number(prm.get("q", 2)))
                report.update({"passed": ok})
            else:
                p = _number(prm.get("p", "inf"))
                fam = minimal_family(dom, boundary_grid(dom, 16, seed=args.seed))
                w = carleson_window_data(dom, fam, a, p)
                ok = math.isfinite(w.ratio)
                report.update({"area": w.area, "kernel_inverse": w.kernel_inverse, "ratio": w.ratio,
                               "norm": surrogate_kernel_norm(dom, a, p), "out_of_collar": w.out_of_collar,
                               "order": w.order})
    emit(report, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_all(args) -> int:
    dom = load_domain(args.domain) if args.domain else None
    only = None
    if args.only:
        try:
            only = [int(t) for t in args.only.split(",")]
        except ValueError:
            raise InputError("--only takes comma-separated criterion numbers") from None
    report = run_suite(args.seed, only, dom)
    text = dumps(report)
    if args.out in (None, "-"):
        print(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    for c in report["checks"]:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] criterion {c['criterion']}: {c['name']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pclab", description="Pseudoconvexity laboratory.")
    ap.add_argument("--version", action="version", version=f"pclab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        return p

    p = add("classify", cmd_classify, "classify a boundary grid as weak/strict (CSV)")
    p.add_argument("--domain", required=True)
    p.add_argument("--res", type=int, default=128)
    p.add_argument("--tol", type=float, default=None)

    p = add("multitype", cmd_multitype, "greedy linear multitype at a boundary point")
    p.add_argument("--domain", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--kmax", type=int, default=12)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--repair", action="store_true")

    p = add("family", cmd_family, "build a good family and search delta_0")
    p.add_argument("--domain", required=True)
    p.add_argument("--type", choices=["minimal", "computed"], default="minimal")
    p.add_argument("--res", type=int, default=8)
    p.add_argument("--circle-samples", type=int, default=16)
    p.add_argument("--override-weak", default=None, help="weight forced at weak samples, e.g. 1,8")

    p = add("packing", cmd_packing, "greedy delta-separated packing (CSV)")
    p.add_argument("--domain", required=True)
    p.add_argument("--family", default=None)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--target", choices=["weak", "collar", "divisor"], required=True)
    p.add_argument("--layers", type=int, default=12)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--gamma0", type=float, default=0.25)
    p.add_argument("--res", type=int, default=128)
    p.add_argument("--graph", default=None)
    p.add_argument("--report", default=None)

    p = add("dim", cmd_dim, "box-counting dimension of a point cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--eps-max", type=float, required=True)
    p.add_argument("--eps-min", type=float, required=True)
    p.add_argument("--rungs", type=int, default=8)
    p.add_argument("--offset", type=float, default=0.0)

    p = add("slice", cmd_slice, "weak set on a tangent slice and its dimension")
    p.add_argument("--domain", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--direction", type=int, default=2)
    p.add_argument("--res", type=int, default=151)
    p.add_argument("--window", type=float, default=0.75)
    p.add_argument("--tol", type=float, default=None)

    p = add("divisor", cmd_divisor, "graph-divisor area checks")
    p.add_argument("--domain", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", type=float, default=0.3)
    p.add_argument("--check", choices=["wirtinger", "scaling", "malliavin"], required=True)
    p.add_argument("--budget", type=int, default=8000)
    p.add_argument("--point", default="1,0")
    p.add_argument("--r", type=float, default=0.25)

    p = add("convex", cmd_convex, "convex-type checks")
    p.add_argument("--domain", required=True)
    p.add_argument("--check", choices=["doubling", "sh", "cp", "window"], required=True)
    p.add_argument("--params", nargs="*", default=[], help="key=value pairs")

    p = add("verify-all", cmd_verify_all, "run the full verification suite")
    p.add_argument("--domain", default=None)
    p.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"pclab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GeometryError, FamilyError, ConsistencyError, DimensionError) as exc:
        print(f"pclab: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
