"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python3 tests/test_acceptance.py``.
"""
import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctmdp.classify import classify  # noqa: E402
from ctmdp.cli import main  # noqa: E402
from ctmdp.corpus import (CORPUS_SEED, CORPUS_SIZE, binding_models, generate_corpus, random_any_policy,  # noqa: E402
                          random_ct_policy)
from ctmdp.lift import evaluate_ct_stationary  # noqa: E402
from ctmdp.model import StationaryPolicy, load_model  # noqa: E402
from ctmdp.sim import estimate_costs, estimate_occupancy, simulate  # noqa: E402
from ctmdp.verify import (IdentityReport, check_discounted_balance, check_lp_oracle,  # noqa: E402
                          check_occupancy_equality, check_roundtrip, check_structure,
                          check_undiscounted_balance)

M3 = Path(__file__).parent / "data" / "m3.json"
CORPUS = generate_corpus(CORPUS_SEED, CORPUS_SIZE)
POLICIES_PER_MODEL = 3


def report(number, passed, summary):
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'}  {summary}"
    sys.__stdout__.write(line + "\n")
    sys.__stdout__.flush()
    return passed


def _cli_json(argv):
    from io import StringIO
    from contextlib import redirect_stdout
    buf = StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, json.loads(buf.getvalue()), buf.getvalue()


def test_criterion_1_example_gap():
    t = time.perf_counter()
    code, doc, _ = _cli_json(["demo-ex1", "--n-traj", "100000", "--seed", "0"])
    elapsed = time.perf_counter() - t
    cost_err = abs(doc["ctmdp_cost_estimate"] - (1 - math.exp(-1)))
    p_err = abs(doc["p_no_jump_estimate"] - math.exp(-1))
    ok = (code == 0 and cost_err <= 0.01 and p_err <= 0.005 and doc["dtmdp_value"] == 1.0
          and doc["gap_holds"] and elapsed < 10.0)
    assert report(1, ok, f"cost={doc['ctmdp_cost_estimate']:.5f}(err {cost_err:.1e}) "
                         f"P(no jump)={doc['p_no_jump_estimate']:.5f}(err {p_err:.1e}) "
                         f"DT value={doc['dtmdp_value']} gap_holds={doc['gap_holds']} {elapsed:.2f}s")


def test_criterion_2_m3_end_to_end():
    code, doc, _ = _cli_json(["solve", str(M3)])
    value_err = abs(doc["value"] - 0.4)
    sigma_err = abs(doc["sigma"]["s0"]["a0"] - 0.2)
    pi_err = abs(doc["pi"]["s0"]["a0"] - 1 / 3)
    usage_err = abs(doc["constraint_usage"][0] - 0.4)
    ok = code == 0 and value_err <= 1e-9 and sigma_err <= 1e-12 and pi_err <= 1e-12 and usage_err <= 1e-9
    assert report(2, ok, f"value={doc['value']:.10f} sigma(a0|s0)={doc['sigma']['s0']['a0']:.12f} "
                         f"pi(a0|s0)={doc['pi']['s0']['a0']:.15f} J_1={doc['constraint_usage'][0]:.12f}")


def test_criterion_3_roundtrip():
    t = time.perf_counter()
    merged = IdentityReport("lift_roundtrip", 1e-9)
    for k, m in enumerate(CORPUS):
        merged.merge(check_roundtrip(m, seed=k))
    elapsed = time.perf_counter() - t
    ok = merged.passed and len(merged.residuals) == 20 * len(CORPUS) and elapsed < 30.0
    assert report(3, ok, f"{len(CORPUS)} models x 20 policies, max rel dev {merged.max_residual:.2e}, "
                         f"{elapsed:.2f}s")


def test_criterion_4_occupancy_equality():
    merged = IdentityReport("occupancy_equality", 1e-10)
    for k, m in enumerate(CORPUS):
        rng = np.random.default_rng(k)
        cls = classify(m)
        for _ in range(POLICIES_PER_MODEL):
            phi = random_ct_policy(m, cls, rng)
            for alpha in (0.0, 0.5):
                merged.merge(check_occupancy_equality(m, phi, 10, alpha, cls))
    ok = merged.passed and not merged.skipped
    assert report(4, ok, f"{len(merged.residuals)} (model, policy, alpha, n) cases, "
                         f"max dev {merged.max_residual:.2e}, skipped {len(merged.skipped)}")


def test_criterion_5_balance():
    disc = IdentityReport("discounted_balance", 1e-9)
    undisc = IdentityReport("undiscounted_balance", 1e-9)
    singleton, sweep, tested = 0.0, 0.0, 0
    for k, m in enumerate(CORPUS):
        rng = np.random.default_rng(k)
        for _ in range(POLICIES_PER_MODEL):
            phi = random_any_policy(m, rng)
            for alpha in (1.0, 0.1):
                disc.merge(check_discounted_balance(m, phi, alpha))
            rep = check_undiscounted_balance(m, phi)
            undisc.merge(rep)
            if not rep.skipped:
                tested += 1
                sweep = max(sweep, rep.details["alpha_sweep"][str(1e-4)])
                singleton = max([singleton] + [r for r, c in zip(rep.residuals, rep.cases) if "gamma" in c])
    ok = disc.passed and undisc.passed and tested > 0
    assert report(5, ok, f"discounted max {disc.max_residual:.2e}; undiscounted max {singleton:.2e} on "
                         f"{tested} transient cases ({len(undisc.skipped)} skipped); alpha-sweep "
                         f"max |aeta-Z| at 1e-4 = {sweep:.2e}")


def test_criterion_6_structure_and_mass_bound():
    merged = IdentityReport("structure", 0.0)
    for m in CORPUS:
        merged.merge(check_structure(m))
    batches, bad = 0, 0
    m3 = load_model(M3)
    pi = StationaryPolicy(np.array([[1 / 3, 2 / 3], [0.0, 1.0], [1.0, 0.0]]))
    runs = [(m3, pi, 100_000, 1e4, 10**6, 0)]
    for k, m in enumerate(CORPUS):
        runs.append((m, random_any_policy(m, np.random.default_rng(k)), 2000, 20.0, 500, k))
    for m, phi, n, horizon, cap, seed in runs:
        occ = estimate_occupancy(simulate(m, phi, n, horizon=horizon, jump_cap=cap, seed=seed, record=11), 10)
        batches += 1
        bad += not occ.bound_holds(3.0)
    ok = merged.passed and bad == 0
    assert report(6, ok, f"{len(merged.residuals)} structural assertions on {len(CORPUS)} models, "
                         f"{len(merged.failures)} failed; mass bound violated in {bad}/{batches} batches")


def test_criterion_7_lp_oracle():
    small = [m for m in CORPUS if m.n_states <= 3 and m.n_actions <= 2]
    extra = binding_models(seed=CORPUS_SEED + 1, count=12)
    merged = IdentityReport("lp_oracle", 1e-6)
    verdicts = {}
    for m in small + extra:
        rep = check_lp_oracle(m)
        merged.merge(rep)
        verdicts[rep.details["lp_status"]] = verdicts.get(rep.details["lp_status"], 0) + 1
    ok = merged.passed and not merged.skipped
    assert report(7, ok, f"{len(small)} corpus + {len(extra)} binding models, max |LP - grid| "
                         f"{merged.max_residual:.2e}, LP verdicts {dict(sorted(verdicts.items()))}")


def test_criterion_8_monte_carlo():
    m = load_model(M3)
    pi = StationaryPolicy(np.array([[1 / 3, 2 / 3], [0.0, 1.0], [1.0, 0.0]]))
    exact = evaluate_ct_stationary(m, pi).aggregate
    a = simulate(m, pi, 100_000, seed=2024)
    b = simulate(m, pi, 100_000, seed=2024, workers=4)
    est = estimate_costs(a)
    z = np.abs(est.mean - exact) / est.stderr
    identical = all(np.array_equal(getattr(a, f), getattr(b, f), equal_nan=True)
                    for f in ("costs", "occupation", "n_jumps", "rec_states", "rec_sojourns"))
    ok = bool(np.all(z <= 4.0)) and identical
    assert report(8, ok, f"J estimates {np.round(est.mean, 5).tolist()} vs exact {exact.tolist()}, "
                         f"|z| max {z.max():.2f}; workers 1 vs 4 bit-identical={identical}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
