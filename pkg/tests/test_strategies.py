import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rjs.games import prisoners_dilemma, random_game
from rjs.repeated import rep_omega_exact
from rjs.strategies import (CallbackStrategy, FSMStrategy, constant_strategy, folk_cycle_profile, grim_trigger,
                            random_fsm, stationary_strategy, strategy_response)

C, D = 0, 1


def test_grim_responses(pd, grim_pair):
    g = grim_pair[0]
    assert np.array_equal(strategy_response(g, []), [1.0, 0.0])
    assert np.array_equal(strategy_response(g, [(C, C), (C, C)]), [1.0, 0.0])
    assert np.array_equal(strategy_response(g, [(C, C), (C, D)]), [0.0, 1.0])


def test_grim_structure(pd, grim_pair):
    g = grim_pair[0]
    assert g.n_states == 2
    assert np.all(g.transition[1] == 1)


def test_grim_without_triggers_is_constant(pd):
    g = grim_trigger(pd, 0, C, D, set())
    for h in itertools.product(pd.joint_actions(), repeat=3):
        assert np.array_equal(strategy_response(g, list(h)), [1.0, 0.0])


def test_grim_ignores_own_defection(pd, grim_pair):
    assert np.array_equal(strategy_response(grim_pair[0], [(D, C), (D, C)]), [1.0, 0.0])
    assert np.array_equal(strategy_response(grim_pair[1], [(C, D), (C, D)]), [1.0, 0.0])


def test_grim_absorbing(pd, grim_pair):
    g = grim_pair[0]
    for tail in itertools.product(pd.joint_actions(), repeat=4):
        assert np.array_equal(strategy_response(g, [(C, D)] + list(tail)), [0.0, 1.0])


def test_response_rejects_out_of_bounds(pd, grim_pair):
    with pytest.raises(ValueError):
        strategy_response(grim_pair[0], [(0, 2)])
    with pytest.raises(ValueError):
        strategy_response(grim_pair[0], [(0,)])


@given(st.integers(0, 10_000))
def test_streaming_fold_equals_batch_fold(seed):
    rng = np.random.default_rng(seed)
    g = random_game([2, 2], rng)
    fsm = random_fsm(g, 0, 3, rng)
    joint = g.joint_actions()
    for L in range(7):
        for h in itertools.product(range(4), repeat=L):
            if rng.random() > 0.05:
                continue
            cur = fsm.cursor()
            for k in h:
                cur.observe(joint[k], k)
            assert np.array_equal(cur.probs(), strategy_response(fsm, [joint[k] for k in h]))
            assert np.array_equal(cur.probs(), strategy_response(fsm, [joint[k] for k in h]))


def test_emission_validation(pd):
    with pytest.raises(ValueError):
        FSMStrategy(0, pd.action_counts, [[0.6, 0.6]], np.zeros((1, 4), dtype=int))
    with pytest.raises(ValueError):
        FSMStrategy(0, pd.action_counts, [[1.0, 0.0]], np.ones((1, 4), dtype=int))
    with pytest.raises(ValueError):
        FSMStrategy(0, pd.action_counts, [[1.0, 0.0]], np.zeros((1, 3), dtype=int))
    with pytest.raises(ValueError):
        FSMStrategy(0, pd.action_counts, [[1.0, 0.0]], np.zeros((1, 4), dtype=int), initial=1)


def test_one_cycle_is_grim_pair(pd, grim_pair):
    folk = folk_cycle_profile(pd, [(C, C)])
    for L in range(5):
        for h in itertools.product(pd.joint_actions(), repeat=L):
            for i in range(2):
                assert np.array_equal(strategy_response(folk[i], list(h)), strategy_response(grim_pair[i], list(h)))


def test_folk_on_path_follows_cycle(pd):
    cycle = [(C, D), (D, C), (D, D)]
    prof = folk_cycle_profile(pd, cycle)
    cursors = [s.cursor() for s in prof]
    for t in range(65):
        joint = tuple(int(np.argmax(c.probs())) for c in cursors)
        assert joint == cycle[t % 3]
        for c in cursors:
            c.observe(joint, pd.encode(joint))


def test_folk_punishes_lowest_deviator():
    g = random_game([2, 2, 2], np.random.default_rng(5))
    prof = folk_cycle_profile(g, [(0, 0, 0)])
    # players 0 and 1 deviate together: player 2 punishes player 0, each deviator punishes the other
    assert [s.state_after([(1, 1, 0)]) for s in prof] == [1 + 1, 1 + 0, 1 + 0]
    assert [s.state_after([(0, 1, 1)]) for s in prof] == [1 + 1, 1 + 2, 1 + 1]


def test_folk_rejects_empty_cycle(pd):
    with pytest.raises(ValueError):
        folk_cycle_profile(pd, [])


def test_alternating_cycle_value_near_limit(pd):
    prof = folk_cycle_profile(pd, [(C, D), (D, C)])
    u = rep_omega_exact(prof, pd, 0.999).utilities
    assert np.all(np.abs(u - 2.5) <= 0.01)


def test_constant_pairs(pd, always, grim_pair):
    for p in (0.0, 0.3, 0.9):
        assert np.allclose(rep_omega_exact(always(C, C), pd, p).utilities, [3.0, 3.0])
        assert np.allclose(rep_omega_exact(always(D, D), pd, p).utilities, [1.0, 1.0])
    dev = rep_omega_exact([constant_strategy(pd, 0, D), grim_pair[1]], pd, 0.9).utilities
    assert dev[0] == pytest.approx(0.1 * 5 + 0.9 * 1, abs=1e-12)


def test_callback_strategy(pd):
    tft = CallbackStrategy(1, pd.action_counts, lambda h: [1.0, 0.0] if not h or h[-1][0] == C else [0.0, 1.0])
    assert np.array_equal(strategy_response(tft, [(D, C)]), [0.0, 1.0])
    bad = CallbackStrategy(0, pd.action_counts, lambda h: [0.5, 0.6])
    with pytest.raises(ValueError):
        strategy_response(bad, [])


def test_stationary_and_constant(pd):
    s = stationary_strategy(pd, 1, [0.25, 0.75])
    assert np.array_equal(strategy_response(s, [(C, D)] * 3), [0.25, 0.75])
    with pytest.raises(ValueError):
        constant_strategy(pd, 0, 2)


def test_to_dict_names_states(pd, grim_pair):
    d = grim_pair[0].to_dict(pd)
    assert d["states"] == ["cooperate", "punish"]
    assert d["transitions"]["cooperate"]["C,D"] == "punish"
    assert d["transitions"]["cooperate"]["D,C"] == "cooperate"
    assert d["emissions"]["punish"] == {"C": 0.0, "D": 1.0}


def test_response_is_pure():
    g = prisoners_dilemma()
    s = random_fsm(g, 0, 4, np.random.default_rng(1))
    h = [(0, 1), (1, 1), (0, 0)]
    assert np.array_equal(strategy_response(s, h), strategy_response(s, list(h)))
