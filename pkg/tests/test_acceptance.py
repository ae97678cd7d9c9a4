"""Acceptance criteria, one test per criterion, each printing a single PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for the summary alone.
"""

import hashlib
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import chi2_contingency, norm

from rjs.analysis import (bucket_gap, check_equivalence, exact_utility, min_discount_for_equilibrium,
                          terminal_distribution, verify_equilibrium, verify_folk_point)
from rjs.beliefs import belief_monte_carlo_check, compare_estimates
from rjs.games import prisoners_dilemma, random_game
from rjs.repeated import rep_batch
from rjs.schedule import SimulationSchedule
from rjs.simulate import rjs_batch, rjs_sample, rjs_sample_voluntary, wrap_voluntary
from rjs.strategies import FSMStrategy, grim_trigger, random_fsm, random_profile, stationary_strategy

C, D = 0, 1
PD = prisoners_dilemma()
GRIM = [grim_trigger(PD, i, C, D, {D}) for i in range(2)]
THREE_SIGMA = 2 * norm.sf(3.0)


def report(capsys, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def tv(a: dict, b: dict) -> float:
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))


def empirical(utilities: np.ndarray) -> dict:
    keys, counts = np.unique(np.round(utilities, 12), axis=0, return_counts=True)
    return {tuple(k): c / len(utilities) for k, c in zip(keys, counts)}


# -- 1 ---------------------------------------------------------------------------------

def criterion_1():
    rng = np.random.default_rng(1)
    worst, fails = 0.0, 0
    for k in range(100):
        n = 2 if k < 50 else 3
        game = random_game([n, n], rng)
        prof = random_profile(game, rng, 4)
        for p in (0.3, 0.6, 0.9):
            r = exact_utility("rjs", prof, game, p)
            for v in ("rep_u", "rep_omega"):
                o = exact_utility(v, prof, game, p, tol=1e-12)
                gap = float(np.max(np.abs(r.utilities - o.utilities)))
                slack = gap - (r.tail_bound + o.tail_bound)
                worst = max(worst, slack)
                fails += slack > 1e-6
    return fails == 0, f"600 comparisons, worst gap beyond tail bounds {worst:.2e} (tol 1e-6)"


# -- 2 ---------------------------------------------------------------------------------

def criterion_2():
    rng = np.random.default_rng(2)
    sched = SimulationSchedule.constant(0.1)
    cap = 8
    residual = sched.survival(cap + 1)
    worst = 0.0
    for _ in range(50):
        game = random_game([2, 2], rng)
        prof = random_profile(game, rng, 4)
        a = terminal_distribution("rjs", prof, game, sched, depth_cap=cap)
        b = terminal_distribution("rep_last", prof, game, sched, depth_cap=cap)
        worst = max(worst, bucket_gap(a, b))
    exact_ok = worst <= 1e-12 and residual < 1e-8

    mc = SimulationSchedule.constant(0.5)
    seeds = np.arange(100_000)
    tvs = []
    for _ in range(5):
        game = random_game([2, 2], rng)
        prof = random_profile(game, rng, 4)
        r = rjs_batch(prof, game, mc, seeds)
        q = rep_batch("last-only", prof, game, mc, seeds)
        tvs.append(tv(empirical(r.utilities), empirical(q.utilities)))
    mc_ok = max(tvs) < 0.01
    return exact_ok and mc_ok, (f"50 profiles, cap {cap} (residual {residual:.1e}), max bucket gap {worst:.1e}; "
                                f"Monte Carlo TV max {max(tvs):.4f} over 5 profiles at 1e5 samples")


# -- 3 ---------------------------------------------------------------------------------

def criterion_3():
    mixed = [stationary_strategy(PD, i, [0.5, 0.5]) for i in range(2)]
    rep = check_equivalence("rjs", "rep_u", mixed, PD, "constant:0.5", 1e-6, kind="realisation", depth_cap=8)
    gap = max(rep.utility_gap)
    ok = rep.tv_outcomes > 0.1 and gap <= 1e-6
    return ok, f"coin-flip profile on PD at p=0.5: outcome TV {rep.tv_outcomes:.3f}, utility gap {gap:.1e}"


# -- 4 ---------------------------------------------------------------------------------

def criterion_4():
    g6 = verify_equilibrium(PD, GRIM, 0.6)
    g4 = verify_equilibrium(PD, GRIM, 0.4)
    p0 = min_discount_for_equilibrium(PD, GRIM)
    folk = verify_folk_point(PD, [2.5, 2.5], 0.999)
    ok = (g6.is_nash and g6.gains.max() <= 1e-9 and not g4.is_nash and g4.gains.max() >= 0.39
          and p0 is not None and abs(p0 - 0.5) <= 1e-3
          and folk.constructible and folk.is_nash and folk.residual <= 0.01)
    return ok, (f"gain@0.6 {g6.gains.max():.1e}, gain@0.4 {g4.gains.max():.3f}, min p {p0:.5f}, "
                f"folk (2.5,2.5)@0.999 achieved {np.round(folk.achieved, 4).tolist()} nash={folk.is_nash}")


# -- 5 ---------------------------------------------------------------------------------

def criterion_5a():
    rng = np.random.default_rng(5)
    worst, fails, total = 0.0, 0, 0
    for _ in range(50):
        game = random_game([2, 2], rng)
        prof = random_profile(game, rng, 4)
        for T in (1, 2, 3, 5):
            r = exact_utility("rjs", prof, game, SimulationSchedule.finite_budget(T))
            f = exact_utility("rep_finite", prof, game, None, T=T)
            gap = float(np.max(np.abs(r.utilities - f.utilities)))
            worst = max(worst, gap)
            fails += gap > 1e-9
            total += 1
    return fails == 0, f"RJS budget(T) vs Rep_T: {fails}/{total} exceed 1e-9, max gap {worst:.3f}"


def criterion_5b():
    rep = verify_equilibrium(PD, GRIM, SimulationSchedule.finite_budget(3))
    return (not rep.is_nash and rep.gains.max() > 0), f"grim pair under budget(3): deviation gains {rep.gains.tolist()}"


# -- 6 ---------------------------------------------------------------------------------

def criterion_6():
    rng = np.random.default_rng(6)
    sched = SimulationSchedule.parse("list:0.9,0.8,0.5,0.1,tail=0.01")
    cap = 7
    worst = 0.0
    for _ in range(20):
        game = random_game([2, 2], rng)
        prof = random_profile(game, rng, 4)
        a = terminal_distribution("rjs", prof, game, sched, depth_cap=cap)
        b = terminal_distribution("rep_last", prof, game, sched, depth_cap=cap)
        worst = max(worst, bucket_gap(a, b))
    return worst <= 1e-12, f"20 profiles, cap {cap} (residual {sched.survival(cap + 1):.1e}), max bucket gap {worst:.1e}"


# -- 7 ---------------------------------------------------------------------------------

def criterion_7(workers: int = 1):
    rng = np.random.default_rng(7)
    mixed = [stationary_strategy(PD, i, [0.6, 0.4]) for i in range(2)]
    worst, ok = 0.0, True
    for p in (0.5, 0.9, 0.99):
        for m in (0, 2):
            est = belief_monte_carlo_check(mixed, PD, p, m, samples=100_000, seed=0, max_n=5, workers=workers)
            worst = max(worst, float(np.max(np.abs(est.z_scores))))
            ok &= est.within(3.0)
    observed = [(C, C), (D, C)]
    ests = []
    for k in range(3):
        game = PD
        prof = [random_fsm_full_support(game, i, rng) for i in range(2)]
        ests.append(belief_monte_carlo_check(prof, game, 0.9, 2, observed_below=observed, samples=100_000,
                                             seed=k * 100_000, max_n=5, workers=workers))
    # joint homogeneity test over all profiles and buckets, at the two-sided 3 sigma level
    pvalue = chi2_contingency(np.array([e.counts for e in ests])).pvalue
    pair = max(float(np.max(np.abs(compare_estimates(a, b)))) for i, a in enumerate(ests) for b in ests[i + 1:])
    ok &= pvalue >= THREE_SIGMA and all(e.within(3.0) for e in ests)
    return ok, (f"6 (p, m) cells, max |z| {worst:.2f}; 3 profiles conditioned on one below-history "
                f"({min(e.matches for e in ests)}+ matches): joint p-value {pvalue:.3f} (3 sigma = {THREE_SIGMA:.4f}), "
                f"max pairwise bucket |z| {pair:.2f}")


def random_fsm_full_support(game, player, rng):
    s = random_fsm(game, player, 2, rng)
    return FSMStrategy(player, game.action_counts, 0.1 + 0.8 * s.emission, s.transition)


# -- 8 ---------------------------------------------------------------------------------

def criterion_8():
    rng = np.random.default_rng(8)
    prof = random_profile(PD, rng, 4)
    wrapped = [wrap_voluntary(s, D) for s in prof]
    mismatches = 0
    for seed in range(10_000):
        v = rjs_sample_voluntary(wrapped, PD, "constant:0.8", seed)
        b = rjs_sample(prof, PD, "constant:0.8", seed)
        mismatches += (v.history, v.depth, v.utilities) != (b.history, b.depth, b.utilities)

    punisher = [wrap_voluntary(GRIM[0], D), GRIM[1]]
    trials, punished, seed = 0, 0, 0
    while trials < 1000:
        level = int(rng.integers(0, 4))
        r = rjs_sample_voluntary(punisher, PD, "constant:0.95", seed, [None, lambda j, lv=level: j != lv])
        seed += 1
        if r.depth != level:
            continue
        trials += 1
        # the decline is announced at the deepest level, before its emission
        punished += r.history[0][0] == D
    ok = mismatches == 0 and punished == trials
    return ok, f"{mismatches} mismatches over 1e4 seeds; punished {punished}/{trials} scripted declines"


# -- 9 ---------------------------------------------------------------------------------

def suite_digest(workers: int) -> str:
    h = hashlib.sha256()
    rng = np.random.default_rng(9)
    seeds = np.arange(30_000)
    for n in (2, 3):
        game = random_game([n, n], rng)
        prof = random_profile(game, rng, 4)
        b = rjs_batch(prof, game, "constant:0.9", seeds, workers=workers)
        h.update(b.depths.tobytes())
        h.update(b.utilities.tobytes())
        for variant, arg in (("unknown", 0.9), ("last-only", "list:0.9,0.5,tail=0.7"), ("finite", 4)):
            r = rep_batch(variant, prof, game, arg, seeds, workers=workers)
            h.update(r.utilities.tobytes())
            h.update(r.raw_sums.tobytes())
        h.update(exact_utility("rjs", prof, game, 0.9).utilities.tobytes())
        h.update(exact_utility("rep_u", prof, game, 0.9).utilities.tobytes())
    est = belief_monte_carlo_check(GRIM, PD, 0.9, 2, samples=30_000, workers=workers)
    h.update(est.counts.tobytes())
    return h.hexdigest()


def criterion_9():
    here = Path(__file__).resolve().parent
    code = f"import sys; sys.path.insert(0, {str(here)!r}); import test_acceptance as t; print(t.suite_digest(8))"
    other = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout.strip()
    digests = [suite_digest(1), suite_digest(1), suite_digest(8), other]
    return len(set(digests)) == 1, f"digest {digests[0][:16]}... across 2 runs x workers 1/8 and a fresh process"


CRITERIA = {"1": criterion_1, "2": criterion_2, "3": criterion_3, "4": criterion_4, "5a": criterion_5a,
            "5b": criterion_5b, "6": criterion_6, "7": criterion_7, "8": criterion_8, "9": criterion_9}


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, capsys):
    ok, detail = CRITERIA[name]()
    assert report(capsys, name, ok, detail), detail


if __name__ == "__main__":
    results = [report(None, name, *fn()) for name, fn in CRITERIA.items()]
    sys.exit(0 if all(results) else 1)
