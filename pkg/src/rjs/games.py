"""Finite normal-form games: expected utility, security values, stage Nash checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog

DEFAULT_TOL = 1e-9
SIMPLEX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """An N-player game given by action labels and a utility tensor.

    ``utilities`` has shape ``(n_1, ..., n_N, N)``: one action index per player,
    then the payoff vector. The array is stored read-only.
    """

    action_labels: tuple[tuple[str, ...], ...]
    utilities: np.ndarray
    name: str = ""
    _strides: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        labels = tuple(tuple(str(a) for a in acts) for acts in self.action_labels)
        if not labels:
            raise ValueError("a game needs at least one player")
        for i, acts in enumerate(labels):
            if not acts:
                raise ValueError(f"player {i} has an empty action set")
            if len(set(acts)) != len(acts):
                raise ValueError(f"player {i} has duplicate action labels")
        u = np.array(self.utilities, dtype=float)
        shape = tuple(len(a) for a in labels) + (len(labels),)
        if u.shape != shape:
            raise ValueError(f"utility tensor has shape {u.shape}, expected {shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("utilities must be finite reals")
        u.setflags(write=False)
        strides = []
        acc = 1
        for n in reversed(shape[:-1]):
            strides.append(acc)
            acc *= n
        object.__setattr__(self, "action_labels", labels)
        object.__setattr__(self, "utilities", u)
        object.__setattr__(self, "_strides", tuple(reversed(strides)))

    @property
    def num_players(self) -> int:
        return len(self.action_labels)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.action_labels)

    @property
    def num_joint(self) -> int:
        return int(np.prod(self.action_counts))

    def encode(self, joint: Sequence[int]) -> int:
        """Row-major flat index of a joint action."""
        if len(joint) != self.num_players:
            raise ValueError(f"joint action {tuple(joint)} has wrong length")
        code = 0
        for i, (a, n, s) in enumerate(zip(joint, self.action_counts, self._strides)):
            if not (0 <= int(a) < n):
                raise ValueError(f"action index {a} out of range for player {i}")
            code += int(a) * s
        return code

    def decode(self, code: int) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unravel_index(int(code), self.action_counts))

    def joint_actions(self) -> list[tuple[int, ...]]:
        """All joint actions in flat-index order."""
        return list(itertools.product(*(range(n) for n in self.action_counts)))

    def action_index(self, player: int, label: str) -> int:
        try:
            return self.action_labels[player].index(label)
        except ValueError:
            raise ValueError(f"player {player} has no action {label!r}") from None

    def label(self, joint: Sequence[int]) -> str:
        return ",".join(self.action_labels[i][a] for i, a in enumerate(joint))

    def flat_utilities(self) -> np.ndarray:
        """Utilities as a ``(num_joint, N)`` matrix in flat-index order."""
        return self.utilities.reshape(self.num_joint, self.num_players)

    def max_abs_utility(self) -> float:
        return float(np.max(np.abs(self.utilities)))

    def to_dict(self) -> dict:
        return {
            "players": self.num_players,
            "actions": [list(a) for a in self.action_labels],
            "utilities": self.utilities.tolist(),
        }


def prisoners_dilemma(R=3.0, S=0.0, T=5.0, P=1.0) -> NormalFormGame:
    """Prisoner's Dilemma with actions C, D. Defaults are the conventional 3/0/5/1."""
    u = [[(R, R), (S, T)], [(T, S), (P, P)]]
    return NormalFormGame((("C", "D"), ("C", "D")), u, name="prisoners_dilemma")


def matching_pennies() -> NormalFormGame:
    u = [[(1, -1), (-1, 1)], [(-1, 1), (1, -1)]]
    return NormalFormGame((("H", "T"), ("H", "T")), u, name="matching_pennies")


def random_game(action_counts: Sequence[int], rng: np.random.Generator, low=-10.0, high=10.0) -> NormalFormGame:
    shape = tuple(action_counts) + (len(action_counts),)
    labels = tuple(tuple(f"a{k}" for k in range(n)) for n in action_counts)
    return NormalFormGame(labels, rng.uniform(low, high, size=shape), name="random")


def check_profile(game: NormalFormGame, profile: Sequence[Sequence[float]]) -> list[np.ndarray]:
    """Validate a mixed profile against ``game`` and return it as arrays."""
    if len(profile) != game.num_players:
        raise ValueError(f"profile has {len(profile)} entries for a {game.num_players}-player game")
    out = []
    for i, (pi, n) in enumerate(zip(profile, game.action_counts)):
        pi = np.asarray(pi, dtype=float)
        if pi.shape != (n,):
            raise ValueError(f"player {i} strategy has shape {pi.shape}, expected ({n},)")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"player {i} strategy is not a probability vector")
        out.append(pi)
    return out


def expected_utility(game: NormalFormGame, profile: Sequence[Sequence[float]]) -> np.ndarray:
    """Exact expected payoff vector of a mixed profile."""
    profile = check_profile(game, profile)
    u = game.utilities
    for pi in profile:
        u = np.tensordot(pi, u, axes=(0, 0))
    return u


def _pure(n: int, a: int) -> np.ndarray:
    e = np.zeros(n)
    e[a] = 1.0
    return e


def deviation_payoffs(game: NormalFormGame, profile: Sequence[Sequence[float]], player: int) -> np.ndarray:
    """Payoff of each pure action of ``player`` against the others' mixed play."""
    profile = check_profile(game, profile)
    u = np.moveaxis(game.utilities[..., player], player, -1)
    for j, pi in enumerate(profile):
        if j != player:
            u = np.tensordot(pi, u, axes=(0, 0))
    return u


class SecurityValue(NamedTuple):
    value: float
    strategy: list[np.ndarray | None]
    exact: bool = True
    note: str = ""


def _clean(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    return x / x.sum()


def _opponent_matrix(game: NormalFormGame, player: int) -> np.ndarray:
    """Player's payoffs as (own action) x (flattened opponent pure profile)."""
    u = np.moveaxis(game.utilities[..., player], player, 0)
    return u.reshape(game.action_counts[player], -1)


def maxmin_value(game: NormalFormGame, player: int) -> SecurityValue:
    """max over own mixed strategies of the worst-case payoff.

    Exact for any number of players: against a fixed own strategy the payoff is
    multilinear in the opponents' strategies, so the minimum sits at a pure profile.
    """
    M = _opponent_matrix(game, player)
    n, m = M.shape
    # variables: x (n), v; maximise v  <=>  minimise -v
    c = np.r_[np.zeros(n), -1.0]
    A_ub = np.c_[-M.T, np.ones(m)]
    A_eq = np.r_[np.ones(n), 0.0][None, :]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * n + [(None, None)], method="highs-ds")
    if not res.success:
        raise RuntimeError(f"maxmin LP failed: {res.message}")
    x = _clean(res.x[:n])
    value = float(np.min(x @ M))
    strategy: list[np.ndarray | None] = [None] * game.num_players
    strategy[player] = x
    return SecurityValue(value, strategy)


def minmax_value(game: NormalFormGame, player: int) -> SecurityValue:
    """min over punisher strategies of the player's best-response payoff.

    Two players: exact LP over the punisher's mixed strategies. More players:
    minimum over independent *pure* punisher profiles only, which can overstate
    the mixed minmax; the result is flagged ``exact=False`` in that case.
    """
    N = game.num_players
    M = _opponent_matrix(game, player)
    n, m = M.shape
    strategy: list[np.ndarray | None] = [None] * N
    if N == 1:
        return SecurityValue(float(M.max()), strategy)
    if N == 2:
        other = 1 - player
        c = np.r_[np.zeros(m), 1.0]
        A_ub = np.c_[M, -np.ones(n)]
        A_eq = np.r_[np.ones(m), 0.0][None, :]
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=[1.0],
                      bounds=[(0, None)] * m + [(None, None)], method="highs-ds")
        if not res.success:
            raise RuntimeError(f"minmax LP failed: {res.message}")
        y = _clean(res.x[:m])
        strategy[other] = y
        return SecurityValue(float(np.max(M @ y)), strategy)
    best = np.max(M, axis=0)
    k = int(np.argmin(best))
    others = [j for j in range(N) if j != player]
    pure = np.unravel_index(k, [game.action_counts[j] for j in others])
    for j, a in zip(others, pure):
        strategy[j] = _pure(game.action_counts[j], int(a))
    return SecurityValue(float(best[k]), strategy, exact=False,
                         note="pure independent punishers only; mixed punishment may be lower")


@dataclass(frozen=True)
class StageNashReport:
    is_nash: bool
    max_gain: np.ndarray


def verify_stage_nash(game: NormalFormGame, profile, tol: float = DEFAULT_TOL) -> StageNashReport:
    """Check a mixed profile for profitable pure deviations."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    profile = check_profile(game, profile)
    value = expected_utility(game, profile)
    gains = np.array([deviation_payoffs(game, profile, i).max() - value[i]
                      for i in range(game.num_players)])
    return StageNashReport(bool(np.all(gains <= tol)), gains)
