"""Depth-indexed simulation (continuation) probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

HARD_DEPTH_CAP = 10_000
TERMINATION_MASS = 1e-12


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationSchedule:
    """Probabilities ``p_t`` of running one more level after ``t`` levels.

    Every schedule is a finite prefix followed by a constant tail:
    ``constant(p)`` has an empty prefix, ``finite_budget(T)`` is ``T`` ones
    followed by a zero tail, and ``explicit`` takes both directly.

    Construction enforces termination: the running product of ``p_t`` must
    drop below 1e-12 before ``depth_cap``.
    """

    prefix: tuple[float, ...]
    tail: float
    mode: str = "explicit"
    depth_cap: int = HARD_DEPTH_CAP

    def __post_init__(self):
        prefix = tuple(float(p) for p in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "tail", float(self.tail))
        for t, p in enumerate(prefix + (self.tail,)):
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise ScheduleError(f"p_{t} = {p} is not in [0, 1]")
        if self.depth_cap < 0:
            raise ScheduleError("depth_cap must be non-negative")
        if self.survival(self.depth_cap + 1) >= TERMINATION_MASS:
            raise ScheduleError(
                f"schedule does not terminate: Pr(depth > {self.depth_cap}) = "
                f"{self.survival(self.depth_cap + 1):.3g} >= {TERMINATION_MASS}")

    @classmethod
    def constant(cls, p: float, depth_cap: int = HARD_DEPTH_CAP) -> "SimulationSchedule":
        return cls((), p, "constant", depth_cap)

    @classmethod
    def finite_budget(cls, T: int, depth_cap: int = HARD_DEPTH_CAP) -> "SimulationSchedule":
        if T < 0:
            raise ScheduleError("budget must be non-negative")
        return cls((1.0,) * int(T), 0.0, "finite_budget", max(depth_cap, int(T)))

    @classmethod
    def explicit(cls, probs: Sequence[float], tail: float = 0.0,
                 depth_cap: int = HARD_DEPTH_CAP) -> "SimulationSchedule":
        return cls(tuple(probs), tail, "explicit", depth_cap)

    @classmethod
    def parse(cls, text: str, sampling: bool = True) -> "SimulationSchedule":
        """Parse ``constant:P``, ``budget:T`` or ``list:p0,p1,...[,tail=P]``.

        ``sampling=False`` lifts the depth cap as far as a tail ``p < 1`` needs.
        """
        kind, _, body = text.strip().partition(":")
        try:
            if kind == "constant":
                p = float(body)
                return cls.constant(p, HARD_DEPTH_CAP if sampling else _exact_cap((), p))
            if kind == "budget":
                return cls.finite_budget(int(body))
            if kind == "list":
                body = body.strip().strip("[]")
                probs, tail = [], 0.0
                for tok in filter(None, (s.strip() for s in body.split(","))):
                    if tok.startswith("tail="):
                        tail = float(tok[5:])
                    else:
                        probs.append(float(tok))
                return cls.explicit(probs, tail, HARD_DEPTH_CAP if sampling else _exact_cap(probs, tail))
        except ScheduleError:
            raise
        except ValueError as exc:
            raise ScheduleError(f"bad schedule {text!r}: {exc}") from None
        raise ScheduleError(f"unknown schedule kind {kind!r}; use constant:, budget: or list:")

    def __str__(self):
        if self.mode == "constant":
            return f"constant:{self.tail!r}"
        if self.mode == "finite_budget":
            return f"budget:{len(self.prefix)}"
        return "list:" + ",".join([repr(p) for p in self.prefix] + [f"tail={self.tail!r}"])

    @property
    def is_constant(self) -> bool:
        return not self.prefix

    @property
    def budget(self) -> int | None:
        """``T`` when the schedule is exactly ``T`` ones and a zero tail."""
        if self.tail == 0.0 and all(p == 1.0 for p in self.prefix):
            return len(self.prefix)
        return None

    def prob_at(self, t: int) -> float:
        if t < 0:
            raise ValueError("depth must be non-negative")
        return self.prefix[t] if t < len(self.prefix) else self.tail

    def probs(self, n: int) -> np.ndarray:
        """``p_0 .. p_{n-1}`` as an array."""
        head = np.asarray(self.prefix[:n], dtype=float)
        return np.r_[head, np.full(max(n - len(head), 0), self.tail)]

    def survival(self, d: int) -> float:
        """Pr(depth >= d) = prod_{t<d} p_t."""
        k = min(d, len(self.prefix))
        s = math.prod(self.prefix[:k])
        if d > k:
            s *= self.tail ** (d - k)
        return s

    def depth_pmf(self, d: int) -> float:
        """Pr(depth = d) = (prod_{t<d} p_t)(1 - p_d)."""
        return self.survival(d) * (1.0 - self.prob_at(d))

    def depth_for_mass(self, mass: float) -> int:
        """Smallest cap ``K`` with Pr(depth > K) <= mass, bounded by ``depth_cap``."""
        s = 1.0
        for t in range(self.depth_cap + 1):
            s *= self.prob_at(t)
            if s <= mass:
                return t
        return self.depth_cap

    def weights(self, n: int) -> np.ndarray:
        """Depth law ``Pr(depth = t)`` for ``t < n``; these are the round weights."""
        p = self.probs(n)
        surv = np.r_[1.0, np.cumprod(p)[:-1]] if n else np.zeros(0)
        return surv * (1.0 - p)


def _exact_cap(prefix, tail: float) -> int:
    """Depth cap that lets any schedule with ``tail < 1`` pass the termination check."""
    if not 0.0 < tail < 1.0:
        return HARD_DEPTH_CAP
    need = len(prefix) + math.ceil(math.log(TERMINATION_MASS / 10) / math.log(tail))
    return max(HARD_DEPTH_CAP, need)


def as_schedule(p_or_schedule, sampling: bool = True) -> SimulationSchedule:
    """Coerce a schedule, its text form or a constant ``p``.

    With ``sampling=False`` a tail ``p < 1`` gets a depth cap large enough to
    pass the termination check, since exact evaluators never unroll to it.
    """
    if isinstance(p_or_schedule, SimulationSchedule):
        return p_or_schedule
    if isinstance(p_or_schedule, str):
        return SimulationSchedule.parse(p_or_schedule, sampling)
    p = float(p_or_schedule)
    return SimulationSchedule.constant(p, HARD_DEPTH_CAP if sampling else _exact_cap((), p))
