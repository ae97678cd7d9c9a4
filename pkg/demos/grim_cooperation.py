"""Grim trigger in the prisoner's dilemma, played through nested joint simulations.

Each agent sees how a simulated copy of the interaction went before acting, and
that copy saw a deeper copy, and so on. With continuation probability p the
grim pair cooperates at every level. A defector gains 2 only in the rounds no
simulation exposed it.
"""

import numpy as np

from rjs import (constant_strategy, exact_utility, grim_trigger, min_discount_for_equilibrium, prisoners_dilemma,
                 rjs_batch, verify_equilibrium)

C, D = 0, 1
pd = prisoners_dilemma()
grim = [grim_trigger(pd, i, C, D, {D}) for i in range(2)]
defector = [constant_strategy(pd, 0, D), grim[1]]

print("sampled playthroughs at p = 0.9")
batch = rjs_batch(grim, pd, "constant:0.9", np.arange(5))
for r in batch.records():
    print(f"  seed {r.seed}: {r.depth} simulations below, payoff {r.utilities}")

print("\nexact expected payoffs")
for p in (0.0, 0.4, 0.6, 0.9):
    ug = exact_utility("rjs", grim, pd, p).utilities
    ud = exact_utility("rjs", defector, pd, p).utilities
    print(f"  p = {p}: grim pair {ug.round(4)}  defector vs grim {ud.round(4)}")

print("\nis the grim pair an equilibrium?")
for p in (0.4, 0.5, 0.6):
    rep = verify_equilibrium(pd, grim, p)
    print(f"  p = {p}: nash={rep.is_nash} best deviation gain {rep.gains.max():.4f}")
print(f"  smallest p that sustains cooperation: {min_discount_for_equilibrium(pd, grim):.5f}")

print("\nwith a fixed budget of 3 simulations the top level defects")
rep = verify_equilibrium(pd, grim, "budget:3")
print(f"  nash={rep.is_nash} gains {rep.gains}")
