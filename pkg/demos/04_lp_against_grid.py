"""The occupation LP against brute force.

For small two-action models the constrained optimum over randomised
stationary policies can be found by searching a grid in policy space.  The
LP answer should match it, and when the LP is infeasible no grid point
should meet the constraints either.
"""
from ctmdp.classify import classify
from ctmdp.corpus import binding_models
from ctmdp.plan import solve_occupation
from ctmdp.reduce import build_jump_chain
from ctmdp.verify import grid_search_optimum

for k, m in enumerate(binding_models(seed=11, count=5)):
    d = build_jump_chain(m)
    sol = solve_occupation(d, classify(m))
    grid = grid_search_optimum(d)
    print(f"model {k}: {m.n_states} states, {m.n_constraints} constraint(s); "
          f"LP {sol.objective:.9f}  grid {grid.value:.9f}  ({grid.evaluated} policy evaluations)")
