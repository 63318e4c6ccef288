"""Command-line entry point: ``ctmdp <subcommand> ...``.

Every subcommand writes one JSON document (to ``--output`` or stdout).
Exit codes: 0 success, 1 domain failure (invalid model, infeasible problem,
failed verification), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .classify import classification_to_dict, classify
from .corpus import CORPUS_SEED, CORPUS_SIZE
from .lift import evaluate_ct_stationary, evaluate_dt_stationary, lift_policy
from .model import (InvalidModelError, ModelFormatError, load_model, load_policy, policy_to_dict,
                    validate_model)
from .plan import solve_occupation
from .reduce import build_discounted_chain, build_jump_chain, dtmdp_to_dict
from .sim import (DEFAULT_HORIZON, DEFAULT_JUMP_CAP, Ex1Scenario, estimate_costs, estimate_occupancy,
                  estimate_occupation, run_ex1, simulate)
from .verify import verify_corpus, verify_model

SUBCOMMANDS = ("validate", "classify", "reduce", "solve", "evaluate", "simulate", "verify", "demo-ex1")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    model: Optional[str] = None
    policy: Optional[str] = None
    output: Optional[str] = None
    seed: int = 0
    n_traj: int = 100_000
    t_max: float = DEFAULT_HORIZON
    k_max: int = DEFAULT_JUMP_CAP
    alpha: Optional[float] = None
    n_max: int = 10
    workers: int = 1
    corpus_size: int = CORPUS_SIZE


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"


def _table(m, arr) -> dict:
    return {sx: {sa: arr[x, a] for a, sa in enumerate(m.actions)} for x, sx in enumerate(m.states)}


# --------------------------------------------------------------------------

class UsageError(Exception):
    pass


class DomainFailure(Exception):
    def __init__(self, doc):
        super().__init__("domain failure")
        self.doc = doc


def _load(cfg: RunConfig):
    return load_model(cfg.model)


def cmd_validate(cfg: RunConfig):
    m = load_model(cfg.model, validate=False)
    report = validate_model(m)
    doc = {"valid": report.ok, **report.to_dict()}
    if not report.ok:
        raise DomainFailure(doc)
    return doc


def cmd_classify(cfg: RunConfig):
    m = _load(cfg)
    return classification_to_dict(m, classify(m))


def cmd_reduce(cfg: RunConfig):
    m = _load(cfg)
    d = build_jump_chain(m) if cfg.alpha is None else build_discounted_chain(m, cfg.alpha)
    return dtmdp_to_dict(d)


def cmd_solve(cfg: RunConfig):
    m = _load(cfg)
    cls = classify(m)
    d = build_jump_chain(m)
    sol = solve_occupation(d, cls)
    doc = {"status": sol.status}
    if not sol.optimal:
        doc["value"] = math.inf
        raise DomainFailure(doc)
    pi = lift_policy(sol.policy, m, cls)
    doc.update(
        value=sol.objective,
        constraint_usage=list(sol.constraint_usage),
        bounds=list(m.bounds),
        slack=list(sol.slack),
        mu=_table(m, sol.mu),
        sigma=policy_to_dict(sol.policy, m),
        pi=policy_to_dict(pi, m),
        basis=list(sol.basis),
        pivots=sol.pivots,
        dt_evaluation=evaluate_dt_stationary(d, sol.policy).to_dict(m),
        ct_evaluation=evaluate_ct_stationary(m, pi).to_dict(m),
    )
    return doc


def _policy(cfg: RunConfig, m):
    if cfg.policy is None:
        raise UsageError("--policy is required")
    return load_policy(cfg.policy, m)


def cmd_evaluate(cfg: RunConfig):
    m = _load(cfg)
    return evaluate_ct_stationary(m, _policy(cfg, m)).to_dict(m)


def cmd_simulate(cfg: RunConfig):
    m = _load(cfg)
    phi = _policy(cfg, m)
    n_max = max(0, cfg.n_max)
    batch = simulate(m, phi, cfg.n_traj, horizon=cfg.t_max, jump_cap=cfg.k_max, seed=cfg.seed,
                     alpha=cfg.alpha, record=n_max + 1, workers=cfg.workers)
    cost = estimate_costs(batch)
    occ = estimate_occupancy(batch, n_max)
    occupation = estimate_occupation(batch)
    doc = {
        "n_traj": cfg.n_traj,
        "seed": cfg.seed,
        "T_max": cfg.t_max,
        "K_max": cfg.k_max,
        "costs": {"mean": cost.mean, "stderr": cost.stderr, "unbounded": cost.unbounded},
        "occupancy": [{"n": n, "mass": _table(m, occ.mass[n]), "stderr": _table(m, occ.stderr[n]),
                       "total": occ.total[n], "total_stderr": occ.total_stderr[n]}
                      for n in range(n_max + 1)],
        "occupancy_bound_holds": occ.bound_holds(),
        "occupation": {"mean": _table(m, occupation.mean), "stderr": _table(m, occupation.stderr),
                       "unbounded": _table(m, occupation.unbounded)},
        "truncated_fraction": occupation.truncated_fraction,
        "rested_fraction": occupation.rested_fraction,
    }
    if cfg.alpha is not None:
        disc = estimate_occupation(batch, cfg.alpha)
        docc = estimate_occupancy(batch, n_max, cfg.alpha)
        doc["alpha"] = cfg.alpha
        doc["discounted_occupation"] = {"mean": _table(m, disc.mean), "stderr": _table(m, disc.stderr)}
        doc["discounted_occupancy_total"] = {"mean": docc.total, "stderr": docc.total_stderr}
    return doc


def cmd_verify(cfg: RunConfig):
    if cfg.model is None:
        reports = verify_corpus(seed=cfg.seed, size=cfg.corpus_size)
    else:
        reports = verify_model(_load(cfg), seed=cfg.seed)
    doc = [r.to_dict() for r in reports]
    if not all(r.passed for r in reports):
        raise DomainFailure(doc)
    return doc


def cmd_demo_ex1(cfg: RunConfig):
    report = run_ex1(Ex1Scenario(seed=cfg.seed, n_traj=cfg.n_traj, horizon=cfg.t_max))
    doc = report.to_dict()
    doc.update(exact_cost=1.0 - math.exp(-1.0), exact_no_jump=math.exp(-1.0))
    if not report.gap_holds:
        raise DomainFailure(doc)
    return doc


HANDLERS = {
    "validate": cmd_validate, "classify": cmd_classify, "reduce": cmd_reduce, "solve": cmd_solve,
    "evaluate": cmd_evaluate, "simulate": cmd_simulate, "verify": cmd_verify, "demo-ex1": cmd_demo_ex1,
}


# --------------------------------------------------------------------------

def _positive(kind):
    def parse(text):
        try:
            v = kind(float(text)) if kind is int else kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return v
    return parse


def _nonnegative_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctmdp", description="Constrained total-cost CTMDP toolkit.")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    def add(name, help_text, model="required"):
        p = sub.add_parser(name, help=help_text)
        if model == "required":
            p.add_argument("model", help="model JSON file")
        elif model == "optional":
            p.add_argument("model", nargs="?", help="model JSON file (default: the seeded random corpus)")
        p.add_argument("-o", "--output", help="write JSON here instead of stdout")
        return p

    add("validate", "check a model file")
    add("classify", "state partition, W sets, zeta, selectors")
    p = add("reduce", "embedded jump-chain model")
    p.add_argument("--alpha", type=_positive(float), help="discount rate for the discounted chain")
    add("solve", "constrained optimum via the occupation LP")
    p = add("evaluate", "exact values of a stationary policy")
    p.add_argument("--policy", required=True, help="policy JSON file")
    p = add("simulate", "Monte Carlo estimates under a stationary policy")
    p.add_argument("--policy", required=True, help="policy JSON file")
    p.add_argument("--n-traj", type=_positive(int), default=100_000)
    p.add_argument("--T-max", dest="t_max", type=_positive(float), default=DEFAULT_HORIZON)
    p.add_argument("--K-max", dest="k_max", type=_positive(int), default=DEFAULT_JUMP_CAP)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--alpha", type=_positive(float))
    p.add_argument("--n-max", type=_nonnegative_int, default=10, help="last jump index for occupancy tables")
    p.add_argument("--workers", type=_positive(int), default=1)
    p = add("verify", "identity checks on a model or on the random corpus", model="optional")
    p.add_argument("--seed", type=_nonnegative_int, default=CORPUS_SEED)
    p.add_argument("--corpus-size", type=_positive(int), default=CORPUS_SIZE)
    p = add("demo-ex1", "elapsed-time rule: continuous-time cost vs jump-chain value", model=None)
    p.add_argument("--n-traj", type=_positive(int), default=100_000)
    p.add_argument("--seed", type=_nonnegative_int, default=0)
    p.add_argument("--T-max", dest="t_max", type=_positive(float), default=DEFAULT_HORIZON)
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(ns).items() if v is not None}
    return RunConfig(**fields)


def _emit(doc, cfg: RunConfig):
    text = dumps(doc)
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        doc = HANDLERS[cfg.subcommand](cfg)
    except UsageError as exc:
        sys.stderr.write(f"ctmdp {cfg.subcommand}: {exc}\n")
        return 2
    except FileNotFoundError as exc:
        sys.stderr.write(f"ctmdp {cfg.subcommand}: {exc}\n")
        return 2
    except InvalidModelError as exc:
        _emit({"valid": False, **exc.report.to_dict()}, cfg)
        return 1
    except ModelFormatError as exc:
        _emit({"valid": False, "error": str(exc)}, cfg)
        return 1
    except DomainFailure as exc:
        _emit(exc.doc, cfg)
        return 1
    _emit(doc, cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
