"""How many levels of simulation lie above me?

An agent that has seen m complete rounds below it cannot tell whether it is the
real one. Under a constant continuation probability p the number n of levels
above follows p^n (1 - p) whatever m is. The Monte Carlo column counts agents
across sampled playthroughs.
"""

from rjs import belief_monte_carlo_check, posterior_table, prisoners_dilemma, stationary_strategy

pd = prisoners_dilemma()
coins = [stationary_strategy(pd, i, [0.6, 0.4]) for i in range(2)]

for p, m in ((0.5, 0), (0.9, 2), (0.99, 5)):
    est = belief_monte_carlo_check(coins, pd, p, m, samples=100_000, max_n=4)
    print(f"p = {p}, m = {m}, {est.matches} matching agents")
    for n, (a, e, z) in enumerate(zip(est.analytic, est.probs, est.z_scores)):
        label = f"n={n}" if n < len(est.analytic) - 1 else f"n>{n - 1}"
        print(f"  {label:5} analytic {a:.4f}  empirical {e:.4f}  z {z:+.2f}")

print("\nvariable schedule [0.9, 0.5] then stop, nothing seen below")
print(" ", posterior_table("list:0.9,0.5,tail=0", 0, 2)[:3].round(4))
