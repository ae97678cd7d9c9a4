"""A fixed budget of T simulations.

The top-level agents act after exactly T simulated rounds, and only that last
action pays. This matches a (T + 1)-round repeated game that pays the last
round, not the T-round game that pays the average. The two agree only when
play does not depend on the round.
"""

import numpy as np

from rjs import exact_utility, random_game, random_profile, stationary_strategy, terminal_distribution, tv_histories

rng = np.random.default_rng(4)
game = random_game([2, 2], rng)
machines = random_profile(game, rng, 4)
coins = [stationary_strategy(game, i, rng.dirichlet([1, 1])) for i in range(2)]

for T in (1, 2, 3):
    sched = f"budget:{T}"
    a = terminal_distribution("rjs", machines, game, sched)
    b = terminal_distribution("rep_last", machines, game, sched)
    gap_m = np.abs(exact_utility("rjs", machines, game, sched).utilities
                   - exact_utility("rep_finite", machines, game, None, T=T).utilities).max()
    gap_c = np.abs(exact_utility("rjs", coins, game, sched).utilities
                   - exact_utility("rep_finite", coins, game, None, T=T).utilities).max()
    print(f"T = {T}: TV to last-round game with {T + 1} rounds {tv_histories(a, b):.1e}; "
          f"gap to {T}-round average: machines {gap_m:.3f}, stationary {gap_c:.1e}")
