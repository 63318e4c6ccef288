"""Constrained total-undiscounted continuous-time MDPs: reduction to the
embedded jump chain, occupation-measure LP, policy lifting, simulation and
identity checks."""
from .classify import Classification, classify
from .lift import evaluate_ct_stationary, evaluate_dt_stationary, lift_policy
from .model import (CtmdpModel, MarkovTimePolicy, StationaryPolicy, load_model, load_policy, m3_model,
                    safe_div, save_model, validate_model)
from .plan import build_occupation_lp, solve_occupation
from .reduce import DtmdpModel, build_discounted_chain, build_jump_chain
from .sim import estimate_costs, estimate_occupancy, estimate_occupation, run_ex1, simulate

__all__ = [
    "Classification", "CtmdpModel", "DtmdpModel", "MarkovTimePolicy", "StationaryPolicy",
    "build_discounted_chain", "build_jump_chain", "build_occupation_lp", "classify",
    "estimate_costs", "estimate_occupancy", "estimate_occupation", "evaluate_ct_stationary",
    "evaluate_dt_stationary", "lift_policy", "load_model", "load_policy", "m3_model", "run_ex1",
    "safe_div", "save_model", "simulate", "solve_occupation", "validate_model",
]
