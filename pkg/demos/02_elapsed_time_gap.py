"""Why the reduction needs its conditions.

A single state whose action equals the elapsed time a(t) = t, with jump rate
and cost rate e^{-a}.  The total hazard is finite (1), so with probability
e^{-1} the process never jumps, and the expected cost is E[min(E, 1)] =
1 - e^{-1} for a unit exponential E.  Every policy of the embedded jump
chain pays c/q = 1 per visit and then leaves, so its value is 1: the
continuous-time cost is strictly smaller than the jump-chain value.
"""
import math

from ctmdp.sim import Ex1Scenario, elapsed_time_rule, run_ex1

rule = elapsed_time_rule()
print("total hazard:", rule.total_hazard(), " P(no jump) exact:", math.exp(-1))

report = run_ex1(Ex1Scenario(seed=0, n_traj=100_000))
print(f"CT cost        {report.ctmdp_cost_estimate:.5f} +/- {report.ctmdp_cost_stderr:.5f}"
      f"   (exact {1 - math.exp(-1):.5f})")
print(f"P(no jump)     {report.p_no_jump_estimate:.5f} +/- {report.p_no_jump_stderr:.5f}")
print(f"jump-chain value {report.dtmdp_value}")
print("gap holds (estimate + 3 stderr < 1):", report.gap_holds)

# the generic quadrature path reproduces the closed form
numeric = elapsed_time_rule(closed_form=False)
print("quadrature sojourn for draw 0.5:", numeric.sojourn(0.5), " closed form:", rule.sojourn(0.5))
