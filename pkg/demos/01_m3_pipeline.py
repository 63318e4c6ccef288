"""Solve a small constrained CTMDP end to end.

The three-state model has a costly but quick route (a0 at s0, then s1) and a
free route (a1 at s0) that uses up the single constraint budget d_1 = 0.4.
We classify the states, reduce to the embedded jump chain, solve the
occupation LP, lift the optimal jump-chain policy back to continuous time,
and check the result exactly and by simulation.
"""
import numpy as np

from ctmdp import (build_jump_chain, classify, estimate_costs, evaluate_ct_stationary, lift_policy, m3_model,
                   simulate, solve_occupation)

m = m3_model()
cls = classify(m)
print("partition:", {m.states[x]: cls.partition.label(x) for x in range(m.n_states)})
print("zeta (states where every policy pays):", sorted(m.states[x] for x in cls.zeta))

d = build_jump_chain(m)
print("forbidden pairs (infinite reduced cost):", [(m.states[x], m.actions[a]) for x, a in zip(*np.nonzero(d.forbidden))])

sol = solve_occupation(d, cls)
print(f"\nLP status {sol.status}, optimal value {sol.objective:.6f}, constraint usage {sol.constraint_usage}")
print("jump-chain policy sigma:\n", sol.policy.probs)

# divide by the rates: a slow action must be chosen more often to get the same jump frequency
pi = lift_policy(sol.policy, m, cls)
print("continuous-time policy pi:\n", pi.probs)

exact = evaluate_ct_stationary(m, pi)
print("\nexact CT values J_i(gamma):", exact.aggregate, "feasible:", exact.feasible)

batch = simulate(m, pi, 100_000, seed=1)
est = estimate_costs(batch)
for i, (mu, se) in enumerate(zip(est.mean, est.stderr)):
    print(f"simulated J_{i}: {mu:.4f} +/- {se:.4f}  (exact {exact.aggregate[i]:.4f})")
