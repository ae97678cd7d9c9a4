import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rjs import rng
from rjs.schedule import ScheduleError, SimulationSchedule, as_schedule


@pytest.mark.parametrize("text", ["constant:0.9", "budget:3", "list:0.9,0.8,0.5,0.1,tail=0.01", "constant:0.0"])
def test_parse_round_trip(text):
    s = SimulationSchedule.parse(text)
    assert SimulationSchedule.parse(str(s)) == s


def test_parse_forms():
    s = SimulationSchedule.parse("list:[0.9, 0.5, tail=0.2]")
    assert s.prefix == (0.9, 0.5) and s.tail == 0.2
    assert SimulationSchedule.parse("budget:4").budget == 4
    assert SimulationSchedule.parse("constant:0.3").budget is None


@pytest.mark.parametrize("text", ["constant:1.0", "constant:1.5", "constant:-0.1", "constant:x", "geo:0.5",
                                  "list:0.5,tail=1", "constant:nan"])
def test_parse_rejects(text):
    with pytest.raises(ScheduleError):
        SimulationSchedule.parse(text)


def test_termination_guard_depends_on_cap():
    with pytest.raises(ScheduleError):
        SimulationSchedule.constant(0.999)
    assert as_schedule(0.999, sampling=False).tail == 0.999
    assert SimulationSchedule.parse("constant:0.999", sampling=False).depth_cap > 10_000
    with pytest.raises(ScheduleError):
        as_schedule(1.0, sampling=False)


def test_budget_ones_then_zero():
    s = SimulationSchedule.finite_budget(3)
    assert [s.prob_at(t) for t in range(5)] == [1.0, 1.0, 1.0, 0.0, 0.0]
    assert s.depth_pmf(3) == 1.0 and s.survival(4) == 0.0


@given(st.floats(0.0, 0.95), st.integers(0, 200))
def test_weights_normalise(p, n):
    s = SimulationSchedule.constant(p)
    w = s.weights(n)
    assert math.isclose(w.sum() + s.survival(n), 1.0, abs_tol=1e-12)
    assert np.all(w >= 0)


@given(st.lists(st.floats(0.0, 1.0), max_size=6), st.floats(0.0, 0.9), st.integers(0, 12))
def test_depth_law_matches_definition(prefix, tail, d):
    s = SimulationSchedule.explicit(prefix, tail)
    ps = [s.prob_at(t) for t in range(d + 1)]
    assert s.survival(d) == pytest.approx(math.prod(ps[:d]), abs=1e-15)
    assert s.depth_pmf(d) == pytest.approx(math.prod(ps[:d]) * (1 - ps[d]), abs=1e-15)


def test_depth_for_mass():
    s = SimulationSchedule.constant(0.5)
    k = s.depth_for_mass(1e-6)
    assert s.survival(k + 1) <= 1e-6 < s.survival(k)


@given(st.integers(0, 2 ** 63 - 1), st.integers(0, 3), st.integers(0, 10 ** 6), st.integers(0, 8))
def test_uniform_scalar_matches_vector(seed, stream, index, channel):
    u = rng.uniform(seed, stream, index, channel)
    v = rng.uniforms(np.array([seed], dtype=np.uint64), stream, index, channel)[0]
    assert u == v
    assert 0.0 <= u < 1.0


def test_uniforms_look_uniform():
    u = rng.uniforms(np.arange(200_000, dtype=np.uint64), rng.RJS, 0, rng.CHANCE)
    counts = np.histogram(u, bins=10, range=(0, 1))[0]
    assert np.all(np.abs(counts - 20_000) < 5 * math.sqrt(20_000 * 0.9))
    # different channels are not the same stream
    w = rng.uniforms(np.arange(200_000, dtype=np.uint64), rng.RJS, 0, rng.ACTION)
    assert abs(np.corrcoef(u, w)[0, 1]) < 0.01


def test_check_seed():
    assert rng.check_seed(5) == 5
    with pytest.raises(ValueError):
        rng.check_seed(-1)
    with pytest.raises(ValueError):
        rng.check_seed(2 ** 63)
