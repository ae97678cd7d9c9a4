"""Sampling recursive joint-simulation playthroughs.

A playthrough is generated in two phases: first the nesting depth is drawn by
walking the continuation coins ``p_0, p_1, ...`` from the real level down,
then the joint actions are drawn bottom-up, round ``k`` conditioning on the
``k`` rounds below it. The coins never depend on actions, so this is the same
distribution as the literal recursion, without its stack depth.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng
from .games import NormalFormGame
from .sampling import (DepthCapExceeded, all_fsm, check_profile, draw_action, draw_joint, draw_joint_scalar,
                       merge_levels, run_chunked, seed_array, strides_of)
from .schedule import SimulationSchedule, as_schedule
from .strategies import Strategy


@dataclass(frozen=True)
class PlaythroughRecord:
    """One playthrough: ``history[0]`` is the deepest simulation, ``history[-1]`` is real."""

    history: tuple[tuple[int, ...], ...]
    depth: int
    utilities: tuple[float, ...]
    seed: int = 0
    consent_log: tuple[tuple[bool, ...], ...] | None = None


def sample_depth(schedule: SimulationSchedule, seed: int) -> int:
    t = 0
    while True:
        if t > schedule.depth_cap:
            raise DepthCapExceeded(f"depth exceeded cap {schedule.depth_cap} (seed {seed})")
        if not rng.uniform(seed, rng.RJS, t, rng.CHANCE) < schedule.prob_at(t):
            return t
        t += 1


def _record(game, history, depth, seed, consent_log=None) -> PlaythroughRecord:
    u = game.utilities[history[-1]]
    return PlaythroughRecord(tuple(history), depth, tuple(float(x) for x in u), seed, consent_log)


def rjs_sample(profile: Sequence[Strategy], game: NormalFormGame, schedule, seed: int) -> PlaythroughRecord:
    """Sample one playthrough of the recursive joint simulation."""
    profile = check_profile(game, profile)
    schedule = as_schedule(schedule)
    seed = rng.check_seed(seed)
    depth = sample_depth(schedule, seed)
    cursors = [s.cursor() for s in profile]
    history = []
    for k in range(depth + 1):
        joint, code = draw_joint_scalar(game, cursors, seed, rng.RJS, k)
        history.append(joint)
        for c in cursors:
            c.observe(joint, code)
    return _record(game, history, depth, seed)


@dataclass
class PlaythroughBatch:
    """Many playthroughs stored level-major.

    ``levels[k]`` holds the joint-action codes of round ``k`` for every rollout
    with ``depth >= k``, in rollout order.
    """

    game: NormalFormGame
    seeds: np.ndarray
    depths: np.ndarray
    levels: list[np.ndarray]
    utilities: np.ndarray

    def __len__(self):
        return len(self.seeds)

    def alive(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.depths >= k)

    def prefix_codes(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Rollouts with ``depth >= m`` and their first ``m`` rounds as an ``(n, m)`` code array."""
        idx = self.alive(m)
        out = np.empty((len(idx), m), dtype=np.int64)
        for k in range(m):
            pos = np.searchsorted(self.alive(k), idx)
            out[:, k] = self.levels[k][pos]
        return idx, out

    def records(self) -> list[PlaythroughRecord]:
        hist: list[list[tuple[int, ...]]] = [[] for _ in range(len(self))]
        decoded = [self.game.decode(c) for c in range(self.game.num_joint)]
        for k, codes in enumerate(self.levels):
            for i, c in zip(self.alive(k), codes):
                hist[i].append(decoded[c])
        return [PlaythroughRecord(tuple(h), int(d), tuple(float(x) for x in u), int(s))
                for h, d, u, s in zip(hist, self.depths, self.utilities, self.seeds)]

    def record(self, i: int) -> PlaythroughRecord:
        d = int(self.depths[i])
        codes = [int(self.levels[k][np.searchsorted(self.alive(k), i)]) for k in range(d + 1)]
        return PlaythroughRecord(tuple(self.game.decode(c) for c in codes), d,
                                 tuple(float(x) for x in self.utilities[i]), int(self.seeds[i]))

    def mean_utilities(self) -> np.ndarray:
        return self.utilities.mean(axis=0)

    def stderr(self) -> np.ndarray:
        n = len(self)
        return self.utilities.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(self.game.num_players, np.nan)

    def to_csv(self, fh=None) -> str | None:
        """Write ``seed, depth, history, u_1..u_N``; rounds separated by ';', players by '|'."""
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        N = self.game.num_players
        w.writerow(["seed", "depth", "history"] + [f"u_{i + 1}" for i in range(N)])
        labels = self.game.action_labels
        for r in self.records():
            hist = ";".join("|".join(labels[i][a] for i, a in enumerate(j)) for j in r.history)
            w.writerow([r.seed, r.depth, hist] + [repr(x) for x in r.utilities])
        return fh.getvalue() if own else None


def _depths_vec(schedule: SimulationSchedule, seeds: np.ndarray) -> np.ndarray:
    depths = np.zeros(len(seeds), dtype=np.int64)
    live = np.arange(len(seeds))
    t = 0
    while live.size:
        if t > schedule.depth_cap:
            raise DepthCapExceeded(f"depth exceeded cap {schedule.depth_cap}")
        u = rng.uniforms(seeds[live], rng.RJS, t, rng.CHANCE)
        go = u < schedule.prob_at(t)
        depths[live[~go]] = t
        live = live[go]
        t += 1
    return depths


def _levels_vec(profile, game, seeds, depths, n_levels=None) -> list[np.ndarray]:
    strides = strides_of(game)
    top = int(depths.max()) + 1 if len(depths) else 0
    if n_levels is not None:
        top = min(top, n_levels)
    states = [np.full(len(seeds), s.initial, dtype=np.int64) for s in profile]
    levels = []
    for k in range(top):
        idx = np.flatnonzero(depths >= k)
        st = [s[idx] for s in states]
        codes = draw_joint(profile, st, seeds[idx], rng.RJS, k, strides)
        levels.append(codes)
        for i, s in enumerate(profile):
            states[i][idx] = s.transition[st[i], codes]
    return levels


def rjs_batch(profile: Sequence[Strategy], game: NormalFormGame, schedule, seeds,
              workers: int = 1, n_levels: int | None = None) -> PlaythroughBatch:
    """Playthroughs for every seed in ``seeds``; record ``i`` equals ``rjs_sample(..., seeds[i])``.

    FSM profiles are sampled vectorised; other strategies fall back to the scalar
    sampler. ``n_levels`` limits how many bottom rounds get actions drawn (used
    when only history prefixes matter); utilities are then left as NaN.
    """
    profile = check_profile(game, profile)
    schedule = as_schedule(schedule)
    seeds = seed_array(seeds)
    N = game.num_players
    flat_u = game.flat_utilities()

    if not all_fsm(profile):
        recs = [rjs_sample(profile, game, schedule, int(s)) for s in seeds]
        levels: list[list[int]] = []
        for r in recs:
            for k, j in enumerate(r.history):
                if len(levels) <= k:
                    levels.append([])
                levels[k].append(game.encode(j))
        return PlaythroughBatch(game, seeds, np.array([r.depth for r in recs], dtype=np.int64),
                                [np.array(c, dtype=np.int64) for c in levels],
                                np.array([r.utilities for r in recs], dtype=float).reshape(-1, N))

    def one(chunk):
        depths = _depths_vec(schedule, chunk)
        levels = _levels_vec(profile, game, chunk, depths, n_levels)
        util = np.full((len(chunk), N), np.nan)
        if n_levels is None or len(levels) == (int(depths.max()) + 1 if len(chunk) else 0):
            last = np.empty(len(chunk), dtype=np.int64)
            for k, codes in enumerate(levels):
                idx = np.flatnonzero(depths >= k)
                top = depths[idx] == k
                last[idx[top]] = codes[top]
            util = flat_u[last] if len(chunk) else util
        return {"depths": depths, "levels": levels, "util": util}

    parts = run_chunked(one, seeds, workers)
    return PlaythroughBatch(game, seeds,
                            np.concatenate([p["depths"] for p in parts]),
                            merge_levels([p["levels"] for p in parts]),
                            np.concatenate([p["util"] for p in parts]).reshape(-1, N))


# -- voluntary simulation ---------------------------------------------------------

ConsentPolicy = Callable[[int], bool]


class VoluntaryStrategy:
    """Strategy for the consent-based variant.

    Always consents. Plays ``base`` while every observed consent announcement
    from the other players is positive; after the first observed decline (in a
    sub-simulation or at the current level) it plays ``punisher`` forever.
    """

    def __init__(self, base: Strategy, punisher_action: int):
        n = base.action_counts[base.player]
        if not 0 <= punisher_action < n:
            raise ValueError(f"punisher action {punisher_action} out of range")
        self.base = base
        self.player = base.player
        self.action_counts = base.action_counts
        self.punisher_action = int(punisher_action)

    def consent(self, level: int) -> bool:
        return True

    def cursor(self):
        return _VoluntaryCursor(self)


class _VoluntaryCursor:
    def __init__(self, strategy: VoluntaryStrategy):
        self.strategy = strategy
        self.inner = strategy.base.cursor()
        self.punishing = False
        n = strategy.action_counts[strategy.player]
        self._punish_cdf = np.cumsum(np.eye(n)[strategy.punisher_action])

    def _declined(self, consents) -> bool:
        me = self.strategy.player
        return any(not c for j, c in enumerate(consents) if j != me)

    def cdf(self, consents=()):
        if self.punishing or self._declined(consents):
            return self._punish_cdf
        return self.inner.cdf()

    def observe(self, joint, code, consents=()):
        self.inner.observe(joint, code)
        if self._declined(consents):
            self.punishing = True


class _PlainCursor:
    """A base strategy playing the voluntary game: ignores consent announcements."""

    def __init__(self, strategy: Strategy):
        self.inner = strategy.cursor()

    def cdf(self, consents=()):
        return self.inner.cdf()

    def observe(self, joint, code, consents=()):
        self.inner.observe(joint, code)


def wrap_voluntary(strategy: Strategy, punisher_action: int) -> VoluntaryStrategy:
    """Extend an RJS strategy to the voluntary game with grim punishment of declines."""
    return VoluntaryStrategy(strategy, punisher_action)


def rjs_sample_voluntary(profile: Sequence, game: NormalFormGame, schedule, seed: int,
                         consent_policy: Sequence[ConsentPolicy | None] | None = None) -> PlaythroughRecord:
    """Sample the voluntary variant.

    At nesting level ``j`` (0 is the real level) all players announce consent at
    once. A deeper simulation runs only if everyone consents and the chance coin
    with probability ``p_j`` succeeds. ``consent_policy[i]`` overrides player
    ``i``'s announcement as a function of the nesting level; by default
    :class:`VoluntaryStrategy` players and plain strategies consent.

    Coins and action draws use the same keys as :func:`rjs_sample`, so with
    unanimous consent the two produce identical playthroughs for each seed.
    """
    N = game.num_players
    bases = [s.base if isinstance(s, VoluntaryStrategy) else s for s in profile]
    check_profile(game, bases)
    schedule = as_schedule(schedule)
    seed = rng.check_seed(seed)
    policies = list(consent_policy) if consent_policy is not None else [None] * N
    if len(policies) != N:
        raise ValueError("consent_policy needs one entry per player")

    def announce(i, level):
        if policies[i] is not None:
            return bool(policies[i](level))
        s = profile[i]
        return bool(s.consent(level)) if isinstance(s, VoluntaryStrategy) else True

    by_level = []
    j = 0
    while True:
        if j > schedule.depth_cap:
            raise DepthCapExceeded(f"depth exceeded cap {schedule.depth_cap} (seed {seed})")
        consents = tuple(announce(i, j) for i in range(N))
        by_level.append(consents)
        if not all(consents) or not rng.uniform(seed, rng.RJS, j, rng.CHANCE) < schedule.prob_at(j):
            break
        j += 1
    depth = j
    consent_log = tuple(reversed(by_level))

    cursors = [s.cursor() if isinstance(s, VoluntaryStrategy) else _PlainCursor(s) for s in profile]
    history = []
    for k in range(depth + 1):
        here = consent_log[k]
        joint = tuple(draw_action(c.cdf(here), rng.uniform(seed, rng.RJS, k, rng.ACTION + i))
                      for i, c in enumerate(cursors))
        code = game.encode(joint)
        history.append(joint)
        for c in cursors:
            c.observe(joint, code, here)
    return _record(game, history, depth, seed, consent_log)

