"""Repeated-game variants: sampling and exact evaluation.

Rounds are numbered from 0. Under a schedule the game continues after round
``t`` with probability ``p_t``, so it lasts at least ``k + 1`` rounds with
probability ``p_0 ... p_{k-1}``. Variants:

* finite (``Rep_T``): ``T`` rounds, payoff is the average stage payoff;
* unknown (``Rep_u``): random horizon, round ``t`` scaled by ``1 - p_t``
  (``1 - p`` for a constant schedule);
* last-only: random horizon, payoff of the last round only, unscaled;
* omega (``Rep_w``): infinite horizon, round ``t`` weighted by
  ``p_0 ... p_{t-1} (1 - p_t)`` (``p^t (1 - p)`` for constant ``p``).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .chain import ProductChain
from .games import NormalFormGame
from .sampling import (DepthCapExceeded, all_fsm, check_profile, draw_joint, draw_joint_scalar,
                       merge_levels, run_chunked, seed_array, strides_of)
from .schedule import SimulationSchedule, as_schedule
from .strategies import Strategy

MAX_ROUNDS = 1_000_000

VARIANTS = ("finite", "unknown", "last-only")


@dataclass(frozen=True)
class RepeatedRecord:
    history: tuple[tuple[int, ...], ...]
    utilities: tuple[float, ...]
    raw_sum: tuple[float, ...]
    seed: int = 0


def _play_scalar(profile, game, seed, schedule: SimulationSchedule | None, T: int | None):
    cursors = [s.cursor() for s in profile]
    history = []
    t = 0
    while True:
        if schedule is not None and t > schedule.depth_cap:
            raise DepthCapExceeded(f"game exceeded {schedule.depth_cap + 1} rounds (seed {seed})")
        joint, code = draw_joint_scalar(game, cursors, seed, rng.REPEATED, t)
        history.append(joint)
        for c in cursors:
            c.observe(joint, code)
        if T is not None:
            if t + 1 >= T:
                return history
        elif not rng.uniform(seed, rng.REPEATED, t, rng.CHANCE) < schedule.prob_at(t):
            return history
        t += 1


def _stage(game, history) -> np.ndarray:
    return np.array([game.utilities[j] for j in history])


def _running(stage: np.ndarray, w: np.ndarray | None = None) -> np.ndarray:
    """Round-by-round accumulation, in the same order as the batch sampler."""
    total = np.zeros(stage.shape[1])
    for t, u in enumerate(stage):
        total += u if w is None else w[t] * u
    return total


def rep_finite_sample(profile: Sequence[Strategy], game: NormalFormGame, T: int, seed: int) -> RepeatedRecord:
    """Play ``T`` rounds; utilities are the per-round average."""
    if T < 1:
        raise ValueError("T must be at least 1")
    profile = check_profile(game, profile)
    seed = rng.check_seed(seed)
    history = _play_scalar(profile, game, seed, None, T)
    stage = _stage(game, history)
    raw = _running(stage)
    return RepeatedRecord(tuple(history), tuple(raw / T), tuple(raw), seed)


def rep_unknown_sample(profile: Sequence[Strategy], game: NormalFormGame, p_or_schedule, seed: int) -> RepeatedRecord:
    """Random horizon; utilities are ``sum_t (1 - p_t) u(round t)``, raw sum reported alongside."""
    profile = check_profile(game, profile)
    schedule = as_schedule(p_or_schedule)
    seed = rng.check_seed(seed)
    history = _play_scalar(profile, game, seed, schedule, None)
    stage = _stage(game, history)
    w = 1.0 - schedule.probs(len(history))
    return RepeatedRecord(tuple(history), tuple(_running(stage, w)), tuple(_running(stage)), seed)


def rep_unknown_lastonly_sample(profile: Sequence[Strategy], game: NormalFormGame, p_or_schedule,
                                seed: int) -> RepeatedRecord:
    """Random horizon; utilities are the last round's stage payoff."""
    profile = check_profile(game, profile)
    schedule = as_schedule(p_or_schedule)
    seed = rng.check_seed(seed)
    history = _play_scalar(profile, game, seed, schedule, None)
    stage = _stage(game, history)
    return RepeatedRecord(tuple(history), tuple(stage[-1]), tuple(_running(stage)), seed)


@dataclass
class RepeatedBatch:
    game: NormalFormGame
    variant: str
    seeds: np.ndarray
    lengths: np.ndarray
    levels: list[np.ndarray]
    utilities: np.ndarray
    raw_sums: np.ndarray

    def __len__(self):
        return len(self.seeds)

    def mean_utilities(self) -> np.ndarray:
        return self.utilities.mean(axis=0)

    def stderr(self) -> np.ndarray:
        n = len(self)
        return self.utilities.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(self.game.num_players, np.nan)

    def records(self) -> list[RepeatedRecord]:
        hist: list[list] = [[] for _ in range(len(self))]
        decoded = [self.game.decode(c) for c in range(self.game.num_joint)]
        for k, codes in enumerate(self.levels):
            for i, c in zip(np.flatnonzero(self.lengths > k), codes):
                hist[i].append(decoded[c])
        return [RepeatedRecord(tuple(h), tuple(map(float, u)), tuple(map(float, r)), int(s))
                for h, u, r, s in zip(hist, self.utilities, self.raw_sums, self.seeds)]

    def to_csv(self, fh=None) -> str | None:
        """Write ``seed, rounds, history, u_1..u_N``; rounds separated by ';', players by '|'."""
        own = fh is None
        fh = io.StringIO() if own else fh
        w = csv.writer(fh, lineterminator="\n")
        N = self.game.num_players
        w.writerow(["seed", "rounds", "history"] + [f"u_{i + 1}" for i in range(N)])
        labels = self.game.action_labels
        for r in self.records():
            hist = ";".join("|".join(labels[i][a] for i, a in enumerate(j)) for j in r.history)
            w.writerow([r.seed, len(r.history), hist] + [repr(x) for x in r.utilities])
        return fh.getvalue() if own else None


def rep_batch(variant: str, profile: Sequence[Strategy], game: NormalFormGame, p_or_schedule_or_T, seeds,
              workers: int = 1) -> RepeatedBatch:
    """Vectorised sampling of ``variant`` in {finite, unknown, last-only} over ``seeds``.

    Record ``i`` equals the corresponding scalar sampler at ``seeds[i]``. For
    ``finite`` pass ``T`` as the third argument.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    profile = check_profile(game, profile)
    seeds = seed_array(seeds)
    N = game.num_players
    if variant == "finite":
        T, schedule = int(p_or_schedule_or_T), None
        if T < 1:
            raise ValueError("T must be at least 1")
    else:
        T, schedule = None, as_schedule(p_or_schedule_or_T)

    if not all_fsm(profile):
        fn = {"finite": rep_finite_sample, "unknown": rep_unknown_sample,
              "last-only": rep_unknown_lastonly_sample}[variant]
        arg = T if variant == "finite" else schedule
        recs = [fn(profile, game, arg, int(s)) for s in seeds]
        levels: list[list[int]] = []
        for r in recs:
            for k, j in enumerate(r.history):
                if len(levels) <= k:
                    levels.append([])
                levels[k].append(game.encode(j))
        return RepeatedBatch(game, variant, seeds, np.array([len(r.history) for r in recs]),
                             [np.array(c, dtype=np.int64) for c in levels],
                             np.array([r.utilities for r in recs]).reshape(-1, N),
                             np.array([r.raw_sum for r in recs]).reshape(-1, N))

    U = game.flat_utilities()
    strides = strides_of(game)

    def one(chunk):
        n = len(chunk)
        states = [np.full(n, s.initial, dtype=np.int64) for s in profile]
        lengths = np.zeros(n, dtype=np.int64)
        util = np.zeros((n, N))
        raw = np.zeros((n, N))
        levels = []
        live = np.arange(n)
        t = 0
        while live.size:
            if schedule is not None and t > schedule.depth_cap:
                raise DepthCapExceeded(f"game exceeded {schedule.depth_cap + 1} rounds")
            st = [s[live] for s in states]
            codes = draw_joint(profile, st, chunk[live], rng.REPEATED, t, strides)
            levels.append(codes)
            for i, s in enumerate(profile):
                states[i][live] = s.transition[st[i], codes]
            u = U[codes]
            raw[live] += u
            lengths[live] += 1
            if variant == "finite":
                go = np.full(live.size, t + 1 < T)
            else:
                p = schedule.prob_at(t)
                if variant == "unknown":
                    util[live] += (1.0 - p) * u
                go = rng.uniforms(chunk[live], rng.REPEATED, t, rng.CHANCE) < p
            if variant == "last-only":
                util[live[~go]] = u[~go]
            live = live[go]
            t += 1
        if variant == "finite":
            util = raw / T
        return {"lengths": lengths, "levels": levels, "util": util, "raw": raw}

    parts = run_chunked(one, seeds, workers)
    return RepeatedBatch(game, variant, seeds,
                         np.concatenate([p["lengths"] for p in parts]),
                         merge_levels([p["levels"] for p in parts]),
                         np.concatenate([p["util"] for p in parts]).reshape(-1, N),
                         np.concatenate([p["raw"] for p in parts]).reshape(-1, N))


# -- exact evaluation -----------------------------------------------------------

@dataclass(frozen=True)
class ExactValue:
    utilities: np.ndarray
    tail_bound: float
    horizon: int | None = None
    weights: np.ndarray | None = field(default=None, repr=False)


def _omega_closed_form(chain: ProductChain, p: float) -> np.ndarray:
    path, start = chain.deterministic_path()
    r = chain.reward[path]
    L = len(path) - start
    w = (1.0 - p) * p ** np.arange(len(path))
    head = w[:start] @ r[:start]
    cyc = w[start:] @ r[start:] / (1.0 - p ** L)
    return head + cyc


def rep_omega_exact(profile: Sequence[Strategy], game: NormalFormGame, p, tol: float = 1e-12) -> ExactValue:
    """Exact infinite-horizon discounted payoff.

    For constant ``p`` the weights are ``p^t (1 - p)``; a schedule gives weights
    ``p_0 ... p_{t-1} (1 - p_t)``. Expectations are propagated through the joint
    FSM state chain and truncated once the remaining weight times ``max|u|`` is
    at most ``tol`` (reported as ``tail_bound``). Deterministic profiles with a
    constant ``p`` are summed in closed form over their eventual cycle.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    chain = ProductChain(game, profile)
    if isinstance(p, SimulationSchedule):
        schedule = p
    else:
        if not 0.0 <= float(p) < 1.0:
            raise ValueError("p must be in [0, 1)")
        schedule = None
        p = float(p)
    M = game.max_abs_utility()
    if schedule is None and chain.deterministic:
        return ExactValue(_omega_closed_form(chain, p), 0.0)
    mu = chain.start()
    total = np.zeros(game.num_players)
    surv = 1.0
    for t in range(MAX_ROUNDS):
        pt = schedule.prob_at(t) if schedule is not None else p
        total += surv * (1.0 - pt) * (mu @ chain.reward)
        surv *= pt
        if surv * M <= tol:
            return ExactValue(total, surv * M, t)
        mu = mu @ chain.T
    raise ValueError(f"tol {tol} not reachable within {MAX_ROUNDS} rounds")


def rep_omega_weighted_exact(profile: Sequence[Strategy], game: NormalFormGame, weights: Sequence[float],
                             limit: float) -> ExactValue:
    """Discounted payoff for explicit positive weights, normalised by their total ``limit``.

    The partial sums of ``weights`` must increase to within 1e-12 of ``limit``.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w <= 0):
        raise ValueError("weights must be a non-empty list of positive reals")
    partial = np.cumsum(w)
    if abs(partial[-1] - limit) > 1e-12:
        raise ValueError(f"weights sum to {partial[-1]!r}, not within 1e-12 of limit {limit!r}")
    chain = ProductChain(game, profile)
    stage = chain.expected_stage(len(w))
    return ExactValue(w @ stage / limit, 0.0, len(w), w)


def rep_unknown_exact(profile: Sequence[Strategy], game: NormalFormGame, p_or_schedule,
                      tol: float = 1e-12) -> ExactValue:
    """Exact expected payoff of the random-horizon game with per-round scaling ``1 - p_t``.

    Follows the realised-payoff process: alongside the state distribution it
    carries the expected payoff accumulated so far on each state, and banks it
    whenever the game stops.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    schedule = as_schedule(p_or_schedule, sampling=False)
    chain = ProductChain(game, profile)
    M = game.max_abs_utility()
    N = game.num_players
    mu = chain.start()
    acc = np.zeros((chain.n_states, N))
    total = np.zeros(N)
    scale_sum = 0.0
    surv = 1.0
    for t in range(MAX_ROUNDS):
        pt = schedule.prob_at(t)
        w = 1.0 - pt
        # expected payoff so far including round t, on each pre-transition state
        banked = acc.sum(axis=0) + w * (mu @ chain.reward)
        total += (1.0 - pt) * banked
        acc = pt * (chain.T.T @ acc + w * np.einsum("s,sxn->xn", mu, chain.flow))
        mu = pt * (mu @ chain.T)
        surv *= pt
        scale_sum += w
        tail = M * surv * (scale_sum + 1.0)
        if tail <= tol:
            return ExactValue(total, tail, t)
    raise ValueError(f"tol {tol} not reachable within {MAX_ROUNDS} rounds")


def rep_lastonly_exact(profile: Sequence[Strategy], game: NormalFormGame, p_or_schedule,
                       tol: float = 1e-12) -> ExactValue:
    """Expected last-round payoff: sum over horizons ``L`` of Pr(L) E[u(round L-1)]."""
    schedule = as_schedule(p_or_schedule, sampling=False)
    chain = ProductChain(game, profile)
    M = game.max_abs_utility()
    mu = chain.start()
    total = np.zeros(game.num_players)
    for t in range(MAX_ROUNDS):
        total += schedule.depth_pmf(t) * (mu @ chain.reward)
        tail = schedule.survival(t + 1) * M
        if tail <= tol:
            return ExactValue(total, tail, t)
        mu = mu @ chain.T
    raise ValueError(f"tol {tol} not reachable within {MAX_ROUNDS} rounds")


def rep_finite_exact(profile: Sequence[Strategy], game: NormalFormGame, T: int) -> ExactValue:
    """Exact average payoff over ``T`` rounds."""
    if T < 1:
        raise ValueError("T must be at least 1")
    chain = ProductChain(game, profile)
    return ExactValue(chain.expected_stage(T).mean(axis=0), 0.0, T)
