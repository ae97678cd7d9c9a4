"""Four ways to value the same strategy profile.

The nested simulation protocol, the unknown-horizon repeated game with scaled
summed payoffs, the same game paying only the last round, and the infinitely
repeated game with weights p^t (1 - p) all give the same expected payoffs. The
nested protocol and the last-round game even induce the same distribution over
histories. The summed-payoff game does not: its payoff profiles are spread
differently, even though their means agree.
"""

import numpy as np

from rjs import (check_equivalence, exact_utility, prisoners_dilemma, random_game, random_profile, stationary_strategy,
                 terminal_distribution, tv_histories)

rng = np.random.default_rng(3)
game = random_game([3, 3], rng)
profile = random_profile(game, rng, max_states=4)

print("expected payoffs for a random 3x3 game and random 4-state machines")
for p in (0.3, 0.9, "list:0.9,0.8,0.5,0.1,tail=0.01"):
    row = {v: exact_utility(v, profile, game, p, tol=1e-12).utilities for v in ("rjs", "rep_u", "rep_last", "rep_omega")}
    spread = max(np.abs(u - row["rjs"]).max() for u in row.values())
    print(f"  {p}: rjs {row['rjs'].round(6)}  largest difference across variants {spread:.1e}")

print("\nterminal histories, nested protocol vs last-round game (2x2 game, p = 0.1)")
small = random_game([2, 2], rng)
prof = random_profile(small, rng, 4)
a = terminal_distribution("rjs", prof, small, "constant:0.1", depth_cap=8)
b = terminal_distribution("rep_last", prof, small, "constant:0.1", depth_cap=8)
print(f"  total variation {tv_histories(a, b):.1e}, unenumerated mass {a.residual_mass:.1e}")

print("\nsame means, different outcome laws: two coin flippers, p = 0.5")
pd = prisoners_dilemma()
coins = [stationary_strategy(pd, i, [0.5, 0.5]) for i in range(2)]
rep = check_equivalence("rjs", "rep_u", coins, pd, "constant:0.5", 1e-6, kind="realisation", depth_cap=8)
print(f"  utility gap {max(rep.utility_gap):.1e}, total variation over payoff profiles {rep.tv_outcomes:.3f}")
