"""Which payoffs can be sustained as equilibria of the nested protocol?

A target is supported by cycling through joint actions whose discounted
average hits it, and punishing any deviation with the minmax action forever.
"""

from rjs import prisoners_dilemma, verify_folk_point

pd = prisoners_dilemma()
for target, p in (([3, 3], 0.9), ([2.5, 2.5], 0.999), ([4.0, 1.5], 0.9), ([0.5, 0.5], 0.9), ([3, 3], 0.4)):
    r = verify_folk_point(pd, target, p)
    cyc = "-" if r.cycle is None else " ".join(pd.label(j) for j in r.cycle)
    got = "-" if r.achieved is None else [round(float(x), 4) for x in r.achieved]
    print(f"{str(target):12} p={p:<6} cycle [{cyc}] achieved {got} nash={r.is_nash} {r.diagnostic}")
