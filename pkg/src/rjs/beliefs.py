"""Posterior over how many simulation levels lie above an agent that has seen ``m`` rounds below it.

An awakening is one level of one playthrough. The agent at a level with ``m``
completed rounds below it is at depth ``D - m`` from the top when the
playthrough has ``D`` simulations in total, so the quantity of interest is
``n = D - m`` given ``D >= m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .games import NormalFormGame
from .schedule import as_schedule
from .simulate import rjs_batch
from .strategies import Strategy

MIN_CONDITIONING = 1e-300


def depth_posterior(p: float, m: int, n: int) -> float:
    """``Pr(n more levels above | m rounds seen below) = p**n (1 - p)``; ``m`` drops out."""
    p = float(p)
    if not 0.0 <= p < 1.0:
        raise ValueError("p must be in [0, 1)")
    if m < 0 or n < 0:
        raise ValueError("m and n must be non-negative")
    return p ** n * (1.0 - p)


def depth_posterior_schedule(schedule, m: int, n: int) -> float:
    """Same posterior under a depth-dependent schedule, by conditioning the depth law on ``D >= m``."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be non-negative")
    schedule = as_schedule(schedule, sampling=False)
    if schedule.is_constant and schedule.tail < 1.0:
        return depth_posterior(schedule.tail, m, n)
    cond = schedule.survival(m)
    if cond < MIN_CONDITIONING:
        raise ValueError(f"Pr(D >= {m}) = {cond:.3g} is too small to condition on")
    return schedule.depth_pmf(m + n) / cond


def posterior_table(schedule, m: int, max_n: int) -> np.ndarray:
    """Posterior for ``n = 0..max_n`` followed by the mass of ``n > max_n``."""
    head = np.array([depth_posterior_schedule(schedule, m, n) for n in range(max_n + 1)])
    sched = as_schedule(schedule, sampling=False)
    tail = sched.survival(m + max_n + 1) / sched.survival(m)
    return np.r_[head, tail]


@dataclass
class BeliefEstimate:
    """Empirical posterior over ``n`` with buckets ``0..max_n`` and a last bucket for ``n > max_n``."""

    m: int
    observed_below: tuple | None
    counts: np.ndarray
    analytic: np.ndarray
    samples: int
    diagnostic: str = ""
    config: dict = field(default_factory=dict)

    @property
    def matches(self) -> int:
        return int(self.counts.sum())

    @property
    def empty(self) -> bool:
        return self.matches == 0

    @property
    def probs(self) -> np.ndarray:
        if self.empty:
            return np.full(len(self.counts), np.nan)
        return self.counts / self.matches

    @property
    def stderr(self) -> np.ndarray:
        """Binomial standard error of each bucket under the analytic posterior."""
        if self.empty:
            return np.full(len(self.counts), np.nan)
        q = self.analytic
        return np.sqrt(q * (1.0 - q) / self.matches)

    @property
    def z_scores(self) -> np.ndarray:
        se = self.stderr
        diff = self.probs - self.analytic
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.inf))

    def within(self, sigmas: float = 3.0) -> bool:
        return not self.empty and bool(np.all(np.abs(self.z_scores) <= sigmas))

    def to_dict(self) -> dict:
        labels = [str(n) for n in range(len(self.counts) - 1)] + [f">{len(self.counts) - 2}"]
        return {
            "m": self.m,
            "observed_below": None if self.observed_below is None else [list(j) for j in self.observed_below],
            "matches": self.matches,
            "samples": self.samples,
            "buckets": labels,
            "counts": [int(c) for c in self.counts],
            "empirical": [float(x) for x in self.probs],
            "analytic": [float(x) for x in self.analytic],
            "z": [float(x) for x in self.z_scores],
            "diagnostic": self.diagnostic,
            "config": self.config,
        }


def belief_monte_carlo_check(profile: Sequence[Strategy], game: NormalFormGame, schedule, m: int,
                             observed_below: Sequence[Sequence[int]] | None = None, samples: int = 100_000,
                             seed: int = 0, max_n: int = 5, workers: int = 1) -> BeliefEstimate:
    """Empirical posterior of ``n`` over awakenings with ``m`` rounds below.

    Each playthrough with ``D >= m`` contributes exactly one such awakening.
    With ``observed_below`` only awakenings whose rounds below equal it are kept.
    Seeds are ``seed .. seed + samples - 1``.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if m < 0:
        raise ValueError("m must be non-negative")
    schedule = as_schedule(schedule)
    seeds = np.arange(seed, seed + samples, dtype=np.uint64)
    batch = rjs_batch(profile, game, schedule, seeds, workers=workers, n_levels=m)
    idx, prefix = batch.prefix_codes(m)
    if observed_below is not None:
        if len(observed_below) != m:
            raise ValueError(f"observed_below has {len(observed_below)} rounds, expected m = {m}")
        want = np.array([game.encode(tuple(j)) for j in observed_below], dtype=np.int64)
        keep = np.all(prefix == want, axis=1) if m else np.ones(len(idx), dtype=bool)
        idx = idx[keep]
        observed_below = tuple(tuple(int(a) for a in j) for j in observed_below)
    n = batch.depths[idx] - m
    counts = np.bincount(np.minimum(n, max_n + 1), minlength=max_n + 2)
    diagnostic = ""
    if counts.sum() == 0:
        diagnostic = f"no awakening with {m} rounds below matched in {samples} playthroughs"
    try:
        analytic = posterior_table(schedule, m, max_n)
    except ValueError as exc:
        analytic = np.full(max_n + 2, np.nan)
        diagnostic = diagnostic or str(exc)
    return BeliefEstimate(m, observed_below, counts, analytic, samples, diagnostic,
                          {"schedule": str(schedule), "m": m, "samples": samples, "seed": seed, "max_n": max_n})


def compare_estimates(a: BeliefEstimate, b: BeliefEstimate) -> np.ndarray:
    """Per-bucket z-scores of ``a - b`` using the pooled two-sample standard error."""
    if a.empty or b.empty:
        raise ValueError("cannot compare an empty estimate")
    pooled = (a.counts + b.counts) / (a.matches + b.matches)
    se = np.sqrt(pooled * (1.0 - pooled) * (1.0 / a.matches + 1.0 / b.matches))
    diff = a.probs - b.probs
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.inf))
