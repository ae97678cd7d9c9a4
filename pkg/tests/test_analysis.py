import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rjs.analysis import (BranchBudgetExceeded, best_response, check_equivalence, exact_utility,
                          min_discount_for_equilibrium, terminal_distribution, tv_histories, verify_equilibrium,
                          verify_folk_point)
from rjs.games import expected_utility, prisoners_dilemma, random_game
from rjs.repeated import rep_omega_exact
from rjs.schedule import SimulationSchedule
from rjs.strategies import CallbackStrategy, constant_strategy, grim_trigger, random_profile, stationary_strategy
from oracles import last_payoff, repeated_histories, rjs_histories

C, D = 0, 1
CC = 0


def as_dict(dist):
    return {h: q for h, q in dist.as_dict().items()}


# -- terminal distributions ------------------------------------------------------------

def test_grim_geometric_buckets(pd, grim_pair):
    dist = terminal_distribution("rjs", grim_pair, pd, SimulationSchedule.constant(0.5), depth_cap=3)
    for L, q in zip(range(1, 5), [0.5, 0.25, 0.125, 0.0625]):
        h, p = dist.buckets[L]
        assert h.tolist() == [[CC] * L] and p[0] == pytest.approx(q, abs=1e-15)
    assert dist.residual_mass == pytest.approx(0.0625)
    assert dist.total_mass() + dist.residual_mass == pytest.approx(1.0, abs=1e-12)


def test_p_zero_is_stage_game(pd, rng):
    prof = random_profile(pd, rng, 3)
    dist = terminal_distribution("rjs", prof, pd, SimulationSchedule.constant(0.0), depth_cap=4)
    assert list(dist.buckets) == [1]
    h, p = dist.buckets[1]
    emit = [s.emission[s.initial] for s in prof]
    for code, q in zip(h[:, 0], p):
        a, b = pd.decode(code)
        assert q == pytest.approx(emit[0][a] * emit[1][b], abs=1e-15)


@settings(max_examples=15)
@given(st.integers(0, 10_000), st.sampled_from(["constant:0.4", "list:0.9,0.5,0.2,tail=0.3", "budget:3"]))
def test_rjs_distribution_matches_recursive_oracle(seed, sched):
    rng = np.random.default_rng(seed)
    g = random_game([2, 2], rng)
    prof = random_profile(g, rng, 3)
    s = SimulationSchedule.parse(sched)
    dist = terminal_distribution("rjs", prof, g, s, depth_cap=4)
    ref = rjs_histories(g, prof, s.prob_at, cap=4)
    got = as_dict(dist)
    assert set(got) <= set(ref)
    for h, q in ref.items():
        assert got.get(h, 0.0) == pytest.approx(q, abs=1e-13)
    assert dist.residual_mass == pytest.approx(s.survival(5), abs=1e-15)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_last_round_histories_match_on_random_profiles(seed):
    rng = np.random.default_rng(seed)
    g = random_game([2, 3], rng)
    prof = random_profile(g, rng, 4)
    s = SimulationSchedule.explicit([0.8, 0.3], 0.5)
    a = terminal_distribution("rjs", prof, g, s, depth_cap=4)
    b = terminal_distribution("rep_last", prof, g, s, depth_cap=4)
    assert tv_histories(a, b) <= 1e-12
    ref = repeated_histories(g, prof, s.prob_at, cap=4)
    got = as_dict(b)
    for h, q in ref.items():
        assert got.get(h, 0.0) == pytest.approx(q, abs=1e-13)


def test_callback_enumeration_matches_fsm(pd):
    grim_cb = [CallbackStrategy(i, pd.action_counts,
                                lambda h, i=i: [0.0, 1.0] if any(j[1 - i] == D for j in h) else [0.7, 0.3])
               for i in range(2)]
    s = SimulationSchedule.constant(0.5)
    dist = terminal_distribution("rjs", grim_cb, pd, s, depth_cap=5)
    ref = rjs_histories(pd, grim_cb, s.prob_at, cap=5)
    got = as_dict(dist)
    for h, q in ref.items():
        assert got.get(h, 0.0) == pytest.approx(q, abs=1e-13)
    v = exact_utility("rjs", grim_cb, pd, s, tol=1e-6)
    assert np.allclose(v.utilities, last_payoff(pd, ref), atol=s.survival(6) * 5 + 1e-6)


def test_branch_budget(pd):
    mixed = [stationary_strategy(pd, i, [0.5, 0.5]) for i in range(2)]
    with pytest.raises(BranchBudgetExceeded):
        terminal_distribution("rjs", mixed, pd, "constant:0.5", depth_cap=12, budget=10_000)


def test_terminal_distribution_rejects(pd, grim_pair):
    with pytest.raises(ValueError):
        terminal_distribution("rep_omega", grim_pair, pd, "constant:0.5", depth_cap=2)
    with pytest.raises(ValueError):
        terminal_distribution("rjs", grim_pair, pd, "constant:0.5", depth_cap=-1)


# -- exact utilities and equivalence reports -------------------------------------------------

def test_exact_utility_examples(pd, grim_pair, rng):
    assert np.allclose(exact_utility("rjs", grim_pair, pd, 0.9).utilities, [3.0, 3.0], atol=1e-9)
    dev = [constant_strategy(pd, 0, D), grim_pair[1]]
    u = exact_utility("rjs", dev, pd, 0.9).utilities
    assert u[0] == pytest.approx(1.4, abs=1e-9)
    assert np.allclose(u, rep_omega_exact(dev, pd, 0.9).utilities, atol=1e-9)
    prof = random_profile(pd, rng, 3)
    first = expected_utility(pd, [s.emission[s.initial] for s in prof])
    assert np.allclose(exact_utility("rjs", prof, pd, 0.0).utilities, first, atol=1e-15)
    with pytest.raises(ValueError):
        exact_utility("rjs", prof, pd, 0.5, tol=0.0)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([0.3, 0.6, 0.9, 0.99]))
def test_all_routes_agree_on_random_profiles(seed, p):
    rng = np.random.default_rng(seed)
    g = random_game([3, 2], rng)
    prof = random_profile(g, rng, 4)
    r = exact_utility("rjs", prof, g, p)
    for v in ("rep_omega", "rep_u", "rep_last"):
        o = exact_utility(v, prof, g, p, tol=1e-12)
        assert np.all(np.abs(r.utilities - o.utilities) <= 1e-9 + r.tail_bound + o.tail_bound)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_routes_agree_under_variable_schedule(seed):
    rng = np.random.default_rng(seed)
    g = random_game([2, 2], rng)
    prof = random_profile(g, rng, 4)
    s = SimulationSchedule.parse("list:0.9,0.8,0.5,0.1,tail=0.01")
    r = exact_utility("rjs", prof, g, s)
    for v in ("rep_omega", "rep_u", "rep_last"):
        assert np.allclose(r.utilities, exact_utility(v, prof, g, s, tol=1e-12).utilities, atol=1e-10)


def test_grim_realisation_equivalence(pd, grim_pair):
    rep = check_equivalence("rjs", "rep_last", grim_pair, pd, "constant:0.5", 1e-9, kind="realisation")
    assert rep.verdict and rep.tv_histories == 0.0 and rep.tv_outcomes == 0.0
    assert rep.to_dict()["verdict"] == "pass"


def test_strategic_but_not_realisation(pd):
    mixed = [stationary_strategy(pd, i, [0.5, 0.5]) for i in range(2)]
    rep = check_equivalence("rjs", "rep_u", mixed, pd, "constant:0.5", 1e-6, kind="realisation", depth_cap=8)
    assert max(rep.utility_gap) <= 1e-6
    assert rep.tv_outcomes > 0.1
    assert not rep.verdict
    assert check_equivalence("rjs", "rep_u", mixed, pd, "constant:0.5", 1e-6).verdict


def test_budget_equals_last_round_of_t_plus_one(pd, rng):
    for T in (1, 2, 3, 5):
        for _ in range(5):
            prof = random_profile(pd, rng, 4)
            s = SimulationSchedule.finite_budget(T)
            a = terminal_distribution("rjs", prof, pd, s)
            b = terminal_distribution("rep_last", prof, pd, s)
            assert list(a.buckets) == [T + 1]
            assert tv_histories(a, b) <= 1e-12


def test_budget_equals_rep_t_for_stationary(pd, rng):
    for T in (1, 2, 3, 5):
        prof = [stationary_strategy(pd, i, rng.dirichlet([1, 1])) for i in range(2)]
        rep = check_equivalence("rjs", "rep_finite", prof, pd, f"budget:{T}", 1e-9)
        assert rep.verdict


def test_rep_finite_for_callbacks(pd):
    cb = [CallbackStrategy(i, pd.action_counts, lambda h: [0.5, 0.5] if len(h) % 2 else [1.0, 0.0])
          for i in range(2)]
    v = exact_utility("rep_finite", cb, pd, None, T=2)
    # round 0 is (C, C); round 1 is uniform
    assert np.allclose(v.utilities, (np.array([3.0, 3.0]) + np.array([2.25, 2.25])) / 2)


# -- best responses and equilibria -------------------------------------------------------

def test_best_response_examples(pd, grim_pair, always):
    assert best_response(pd, grim_pair, 0, 0.9).value == pytest.approx(3.0, abs=1e-9)
    assert best_response(pd, grim_pair, 0, 0.4).value == pytest.approx(0.6 * 5 + 0.4 * 1, abs=1e-9)
    for p in (0.0, 0.5, 0.95):
        br = best_response(pd, always(C, C), 0, p)
        assert br.value == pytest.approx(5.0, abs=1e-9)
        assert np.all(br.strategy.emission[:, D] == 1.0)


def test_best_response_rejects(pd, grim_pair):
    with pytest.raises(ValueError):
        best_response(pd, grim_pair, 0, 1.0)
    cb = [grim_pair[0], CallbackStrategy(1, pd.action_counts, lambda h: [1.0, 0.0])]
    with pytest.raises(TypeError):
        best_response(pd, cb, 0, 0.5)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.5, 0.9, 0.97]))
def test_best_response_value_is_achieved_and_optimal(seed, p):
    rng = np.random.default_rng(seed)
    g = random_game([3, 2], rng)
    prof = random_profile(g, rng, 3)
    player = int(rng.integers(2))
    br = best_response(g, prof, player, p, tol=1e-10)
    assert br.bellman_residual <= 1e-10
    swapped = list(prof)
    swapped[player] = br.strategy
    achieved = exact_utility("rjs", swapped, g, p).utilities[player]
    assert achieved == pytest.approx(br.value, abs=1e-9)
    # no pure-FSM alternative from a random sample does better
    for _ in range(5):
        alt = list(prof)
        alt[player] = random_profile(g, rng, 3, deterministic=1.0)[player]
        assert exact_utility("rjs", alt, g, p).utilities[player] <= br.value + 1e-9
    assert exact_utility("rjs", prof, g, p).utilities[player] <= br.value + 1e-9


def test_best_response_with_schedule_prefix(pd, grim_pair):
    # one guaranteed level below, then none: defecting at the real level pays 5
    br = best_response(pd, grim_pair, 0, "budget:1")
    assert br.value == pytest.approx(5.0)
    assert exact_utility("rjs", [br.strategy, grim_pair[1]], pd, "budget:1").utilities[0] == pytest.approx(5.0)


def test_verify_equilibrium_examples(pd, grim_pair, always):
    assert verify_equilibrium(pd, grim_pair, 0.9).is_nash
    rep = verify_equilibrium(pd, grim_pair, 0.4)
    assert not rep.is_nash and rep.gains.max() == pytest.approx(0.4, abs=1e-9)
    for p in (0.0, 0.4, 0.9):
        rep = verify_equilibrium(pd, always(D, D), p)
        assert rep.is_nash and np.allclose(rep.best_values, [1.0, 1.0])


def test_min_discount_examples(pd, grim_pair, always):
    p0 = min_discount_for_equilibrium(pd, grim_pair)
    assert p0 == pytest.approx(0.5, abs=1e-4)
    assert min_discount_for_equilibrium(pd, always(D, D)) == 0.0
    pd10 = prisoners_dilemma(T=10.0)
    grim10 = [grim_trigger(pd10, i, C, D, {D}) for i in range(2)]
    assert min_discount_for_equilibrium(pd10, grim10) == pytest.approx(7 / 9, abs=1e-4)
    assert min_discount_for_equilibrium(pd, always(C, C)) is None


def test_min_discount_bracket(pd, grim_pair):
    pd10 = prisoners_dilemma(T=10.0)
    for game, prof in ((pd, grim_pair), (pd10, [grim_trigger(pd10, i, C, D, {D}) for i in range(2)])):
        p0 = min_discount_for_equilibrium(game, prof)
        assert verify_equilibrium(game, prof, p0 - 2e-4).gains.max() > 1e-9
        assert verify_equilibrium(game, prof, p0 + 2e-4).gains.max() <= 1e-9


def test_folk_examples(pd):
    r = verify_folk_point(pd, [3, 3], 0.9)
    assert r.constructible and r.cycle == [(C, C)] and r.is_nash
    r = verify_folk_point(pd, [0.5, 0.5], 0.9)
    assert not r.constructible and "minmax" in r.diagnostic
    r = verify_folk_point(pd, [2.5, 2.5], 0.999)
    assert r.constructible and r.cycle == [(C, D), (D, C)] and r.is_nash
    assert r.residual <= 0.01


def test_folk_unreachable_target(pd):
    r = verify_folk_point(pd, [4.9, 4.9], 0.9, max_cycle_len=3)
    assert not r.constructible and r.diagnostic


@pytest.mark.parametrize("target,p", [([3, 3], 0.6), ([2.5, 2.5], 0.9), ([4.0, 1.5], 0.9)])
def test_folk_monotone_in_p(pd, target, p):
    assert verify_folk_point(pd, target, p).is_nash
    for q in np.arange(p, 0.99 + 1e-9, 0.01):
        assert verify_folk_point(pd, target, float(q)).is_nash
