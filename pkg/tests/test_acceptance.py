"""Acceptance suite: one line per criterion, printed in the terminal summary.

Run standalone with ``python tests/test_acceptance.py`` to get the same lines
without pytest. Every threshold below is a literal so a drift in
``pclab.suite.TOLERANCES`` shows up as a failure here.
"""
from __future__ import annotations

import math
import sys

import pytest

from pclab.suite import TOLERANCES, dumps, run_suite

try:
    from conftest import record
except ImportError:  # standalone run
    def record(key, passed, detail=""):
        print(f"{'PASS' if passed else 'FAIL'}  criterion {key}: {detail}")

SEED = 7

PINNED = {
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


@pytest.fixture(scope="module")
def reports():
    return run_suite(seed=SEED), run_suite(seed=SEED)


@pytest.fixture(scope="module")
def checks(reports):
    return {c["criterion"]: c for c in reports[0]["checks"]}


def test_tolerances_pinned():
    assert TOLERANCES == PINNED


def test_c1_weak_set(checks):
    v = checks[1]["values"]
    agree = {k: v[k]["agreement"] for k in v}
    ok = checks[1]["passed"] and all(a >= 0.99 for a in agree.values()) \
        and all(v[k]["points"] >= 128 * 64 for k in v)
    record("1 weak-set correctness", ok, ", ".join(f"{k} {a:.4f}" for k, a in agree.items()))
    assert ok


def test_c2_minkowski(checks):
    v = checks[2]["values"]
    ok = checks[2]["passed"] and 0.8 <= v["dimension"] <= 1.2 and 0.0 <= v["slice_dimension"] <= 0.3 \
        and v["beta"] >= 1.7
    record("2 Minkowski dimension", ok,
           f"dim {v['dimension']:.3f}, slice dim {v['slice_dimension']:.3f}, beta {v['beta']:.3f}")
    assert ok


def test_c3_multitype(checks):
    cases = checks[3]["values"]["cases"]
    want = {"egg weak": [1, 4], "egg strict": [1, 2], "ball2": [1, 2], "ball3": [1, 2, 2]}
    ok = checks[3]["passed"] and all(c["weight"] == want[c["case"]] and c["converged"] for c in cases) \
        and {c["case"] for c in cases} == set(want)
    record("3 linear multitype", ok, f"{len(cases)} points, Kmax 12")
    assert ok


def test_c4_good_family(checks):
    v = checks[4]["values"]
    ok = checks[4]["passed"] and set(v) == {"ball2", "ball3", "egg"} and all(
        f["delta0"] >= 1e-3 and f["failed"] == 0 and f["overflow_at_2"] for f in v.values())
    record("4 good family", ok, ", ".join(f"{k} delta0 {f['delta0']:.3g}" for k, f in v.items()))
    assert ok


def test_c5_layered_sum(checks):
    v = checks[5]["values"]
    bound = (2 / 3) ** (v["beta"] / 4) * 1.1  # nu(0.2) = 2/3, m_n = 4 at the weak circle
    ok = checks[5]["passed"] and v["relative_change"] < 0.01 and v["fitted_ratio"] <= bound \
        and v["disjoint"] and v["ratio_bound"] == pytest.approx(bound, rel=1e-12)
    record("5 layered packing sum", ok,
           f"change {v['relative_change']:.2e}, ratio {v['fitted_ratio']:.4f} <= {bound:.4f}")
    assert ok


def test_c6_malliavin(checks):
    v = checks[6]["values"]
    ok = checks[6]["passed"] and set(v) == {"flat", "parabola"} and all(
        x["relative_change"] < 0.01 for x in v.values())
    record("6 Malliavin sum", ok,
           ", ".join(f"{k} lhs {x['lhs'][1]:.4f} / budget {x['area_budget']:.4f}" for k, x in v.items()))
    assert ok


def test_c7_projection_lemma(checks):
    v = checks[7]["values"]
    ok = checks[7]["passed"] and v["additivity_max_rel"] <= 1e-4 and all(v["parts"].values()) \
        and all(t >= math.pi - 1e-6 for t in v["wirtinger_totals"]) \
        and v["flat_total"] == pytest.approx(math.pi, abs=1e-6)
    record("7 projection-area lemma", ok,
           f"additivity {v['additivity_max_rel']:.1e}, {len(v['scaling'])} scaling charts, parts {v['parts']}")
    assert ok


def test_c8_packing_lemma(checks):
    v = checks[8]["values"]
    ok = checks[8]["passed"] and v["slope"] >= 0.9
    record("8 packing lemma", ok, f"slope {v['slope']:.3f}")
    assert ok


def test_c9_holder(checks):
    v = checks[9]["values"]
    h2, h3 = v["holder"]["2"], v["holder"]["3"]
    ok = checks[9]["passed"] and abs(h2 - 0.5) <= 0.05 and abs(h3 - 1 / 3) <= 0.05 \
        and v["graph_dimension"] <= 2 - 1 / 3 + 0.15
    record("9 Holder exponents", ok, f"h2 {h2:.3f}, h3 {h3:.3f}, graph dim {v['graph_dimension']:.3f}")
    assert ok


def test_c10_convex(checks):
    v = checks[10]["values"]
    ok = checks[10]["passed"] and abs(v["c50"] - 2) <= 0.1
    failed = [k for k, good in v["parts"].items() if not good]
    record("10 convex machinery", ok, f"C_50 {v['c50']:.4f}, C_50^50 {v['c50_power_50']:.4f}, failing {failed}")
    assert ok


def test_c10_parts_other_than_c50(checks):
    # everything in the criterion except the literal C_50 reading
    v = checks[10]["values"]
    parts = dict(v["parts"])
    parts.pop("c50_within_5pct_of_2")
    assert all(parts.values())
    assert v["doubling_n0"] <= 4 and v["c2_squared"] == 3.0
    assert abs(v["tau_exponent_ball"] - 0.5) <= 0.05 and abs(v["tau_exponent_egg"] - 0.25) <= 0.05


def test_c10_power_tends_to_two(checks):
    # C_p^p -> 2 is the reading under which the limit holds
    assert checks[10]["values"]["c50_power_50"] == pytest.approx(2.0, rel=0.05)


def test_c11_nonflatness(checks):
    v = checks[11]["values"]
    ok = checks[11]["passed"] and v["egg"] == 2 and v["expflat"] == "Flat" and v["expflat_beta"] >= 1.7
    record("11 non-flatness order", ok, f"egg k={v['egg']}, expflat {v['expflat']}, beta {v['expflat_beta']:.3f}")
    assert ok


def test_c12_reproducible(reports):
    a, b = reports
    ok = dumps(a) == dumps(b) and a["meta"]["seed"] == SEED
    record("12 reproducibility", ok, f"{len(dumps(a))} bytes, seed {SEED}")
    assert ok


def test_verify_all_passes(reports):
    assert reports[0]["passed"], [c["criterion"] for c in reports[0]["checks"] if not c["passed"]]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
