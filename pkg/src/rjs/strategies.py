"""History-conditioned strategies.

Histories are sequences of joint actions (tuples of per-player action
indices). Element 0 is the first repeated round, which is also the deepest
simulation of a recursive joint simulation; the last element is the most
recent round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .games import SIMPLEX_TOL, NormalFormGame, deviation_payoffs, minmax_value

History = Sequence[Sequence[int]]


def _joint_strides(counts: Sequence[int]) -> np.ndarray:
    strides = np.ones(len(counts), dtype=np.int64)
    for i in range(len(counts) - 2, -1, -1):
        strides[i] = strides[i + 1] * counts[i + 1]
    return strides


def encode_history(counts: Sequence[int], history: History) -> list[int]:
    """Flat joint-action codes for a history, validating every index."""
    strides = _joint_strides(counts)
    codes = []
    for r, joint in enumerate(history):
        if len(joint) != len(counts):
            raise ValueError(f"round {r}: joint action {tuple(joint)} has wrong length")
        for i, (a, n) in enumerate(zip(joint, counts)):
            if not (0 <= int(a) < n):
                raise ValueError(f"round {r}: action {a} of player {i} out of range")
        codes.append(int(np.dot(strides, joint)))
    return codes


class Strategy:
    """Anything that maps a history to a distribution over the player's actions."""

    player: int
    action_counts: tuple[int, ...]

    def response(self, history: History) -> np.ndarray:
        raise NotImplementedError

    def cursor(self) -> "Cursor":
        return _HistoryCursor(self)


class Cursor:
    """Incremental view of a strategy along one history."""

    def probs(self) -> np.ndarray:
        raise NotImplementedError

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs())

    def observe(self, joint: tuple[int, ...], code: int) -> None:
        raise NotImplementedError


class _HistoryCursor(Cursor):
    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self.history: list[tuple[int, ...]] = []

    def probs(self):
        return self.strategy.response(self.history)

    def observe(self, joint, code):
        self.history.append(joint)


@dataclass(frozen=True, eq=False)
class FSMStrategy(Strategy):
    """Finite-state behavioural strategy.

    ``emission[s]`` is the action distribution in state ``s``;
    ``transition[s, k]`` is the next state after observing joint action with
    flat code ``k`` (row-major over the game's action counts).
    """

    player: int
    action_counts: tuple[int, ...]
    emission: np.ndarray
    transition: np.ndarray
    initial: int = 0
    state_names: tuple[str, ...] = ()
    _cdf: np.ndarray = field(init=False, repr=False)
    _last: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        counts = tuple(int(n) for n in self.action_counts)
        em = np.array(self.emission, dtype=float)
        tr = np.array(self.transition, dtype=np.int64)
        if not (0 <= self.player < len(counts)):
            raise ValueError(f"player {self.player} not in game")
        n_states = em.shape[0] if em.ndim == 2 else 0
        if n_states == 0 or em.shape != (n_states, counts[self.player]):
            raise ValueError(f"emission must have shape (states, {counts[self.player]})")
        if np.any(em < 0) or np.any(np.abs(em.sum(axis=1) - 1.0) > SIMPLEX_TOL):
            raise ValueError("every emission row must be a probability vector")
        if tr.shape != (n_states, int(np.prod(counts))):
            raise ValueError(f"transition must have shape ({n_states}, {int(np.prod(counts))})")
        if np.any(tr < 0) or np.any(tr >= n_states):
            raise ValueError("transition targets must be valid states")
        if not (0 <= self.initial < n_states):
            raise ValueError("initial state out of range")
        names = tuple(self.state_names) or tuple(f"s{k}" for k in range(n_states))
        if len(names) != n_states:
            raise ValueError("state_names must name every state")
        for arr in (em, tr):
            arr.setflags(write=False)
        cdf = np.cumsum(em, axis=1)
        last = np.array([np.flatnonzero(np.diff(np.r_[0.0, row]) > 0)[-1] for row in cdf])
        object.__setattr__(self, "action_counts", counts)
        object.__setattr__(self, "emission", em)
        object.__setattr__(self, "transition", tr)
        object.__setattr__(self, "initial", int(self.initial))
        object.__setattr__(self, "state_names", names)
        object.__setattr__(self, "_cdf", cdf)
        object.__setattr__(self, "_last", last)

    @property
    def n_states(self) -> int:
        return self.emission.shape[0]

    @property
    def deterministic(self) -> bool:
        return bool(np.all(self.emission.max(axis=1) == 1.0))

    def fold(self, codes: Sequence[int], state: int | None = None) -> int:
        s = self.initial if state is None else state
        for k in codes:
            s = int(self.transition[s, k])
        return s

    def state_after(self, history: History) -> int:
        return self.fold(encode_history(self.action_counts, history))

    def response(self, history: History) -> np.ndarray:
        return self.emission[self.state_after(history)]

    def cursor(self) -> Cursor:
        return _FSMCursor(self)

    def to_dict(self, game: NormalFormGame | None = None) -> dict:
        """Explicit ``fsm`` description (see :mod:`rjs.config`)."""
        names = self.state_names
        if game is None:
            joint_labels = [str(k) for k in range(self.transition.shape[1])]
            own = [str(a) for a in range(self.action_counts[self.player])]
        else:
            joint_labels = [game.label(j) for j in game.joint_actions()]
            own = list(game.action_labels[self.player])
        return {
            "type": "fsm",
            "states": list(names),
            "initial": names[self.initial],
            "emissions": {names[s]: dict(zip(own, map(float, self.emission[s]))) for s in range(self.n_states)},
            "transitions": {names[s]: dict(zip(joint_labels, (names[t] for t in self.transition[s])))
                            for s in range(self.n_states)},
        }


class _FSMCursor(Cursor):
    __slots__ = ("fsm", "state")

    def __init__(self, fsm: FSMStrategy):
        self.fsm = fsm
        self.state = fsm.initial

    def probs(self):
        return self.fsm.emission[self.state]

    def cdf(self):
        return self.fsm._cdf[self.state]

    def observe(self, joint, code):
        self.state = int(self.fsm.transition[self.state, code])


class CallbackStrategy(Strategy):
    """Escape hatch: an arbitrary ``history -> distribution`` function.

    Usable by the samplers and by exact enumeration, but not by the
    product-chain evaluators or the best-response solver.
    """

    def __init__(self, player: int, action_counts: Sequence[int], fn: Callable[[tuple], Sequence[float]]):
        self.player = player
        self.action_counts = tuple(action_counts)
        self.fn = fn

    def response(self, history: History) -> np.ndarray:
        encode_history(self.action_counts, history)
        probs = np.asarray(self.fn(tuple(tuple(j) for j in history)), dtype=float)
        if probs.shape != (self.action_counts[self.player],) or np.any(probs < 0) \
                or abs(probs.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"callback for player {self.player} returned an invalid distribution")
        return probs


def strategy_response(strategy: Strategy, history: History) -> np.ndarray:
    """Distribution a strategy plays after ``history``."""
    return strategy.response(history)


def _one_hot(n: int, a: int) -> np.ndarray:
    e = np.zeros(n)
    e[a] = 1.0
    return e


def constant_strategy(game: NormalFormGame, player: int, action: int) -> FSMStrategy:
    n = game.action_counts[player]
    if not 0 <= action < n:
        raise ValueError(f"action {action} out of range for player {player}")
    return FSMStrategy(player, game.action_counts, [_one_hot(n, action)],
                       np.zeros((1, game.num_joint), dtype=int), state_names=("play",))


def stationary_strategy(game: NormalFormGame, player: int, probs: Sequence[float]) -> FSMStrategy:
    """Play the same mixed action every round, whatever happened."""
    return FSMStrategy(player, game.action_counts, [probs],
                       np.zeros((1, game.num_joint), dtype=int), state_names=("play",))


def grim_trigger(game: NormalFormGame, own_player: int, coop_action: int, punish_action: int,
                 trigger_actions=frozenset()) -> FSMStrategy:
    """Play ``coop_action`` until some opponent plays a trigger action, then punish forever.

    Only opponents' coordinates are inspected; the player's own moves never
    trigger punishment.
    """
    n = game.action_counts[own_player]
    for a in (coop_action, punish_action):
        if not 0 <= a < n:
            raise ValueError(f"action {a} out of range for player {own_player}")
    triggers = set(int(a) for a in trigger_actions)
    transition = np.zeros((2, game.num_joint), dtype=int)
    transition[1, :] = 1
    for code, joint in enumerate(game.joint_actions()):
        if any(j != own_player and joint[j] in triggers for j in range(game.num_players)):
            transition[0, code] = 1
    return FSMStrategy(own_player, game.action_counts,
                       [_one_hot(n, coop_action), _one_hot(n, punish_action)],
                       transition, state_names=("cooperate", "punish"))


def minmax_punishers(game: NormalFormGame) -> list[list[np.ndarray | None]]:
    """For each player j, the opponents' strategies that hold j to the minmax value."""
    return [minmax_value(game, j).strategy for j in range(game.num_players)]


def folk_cycle_profile(game: NormalFormGame, cycle: Sequence[Sequence[int]],
                       punishers: Sequence[Sequence[np.ndarray | None]] | None = None) -> list[FSMStrategy]:
    """Profile that plays ``cycle`` in lockstep and minmaxes a deviator forever.

    State ``k < len(cycle)`` is the cycle position and state ``len(cycle) + j``
    punishes player ``j`` by playing ``punishers[j]``. As with grim trigger, each
    player reacts only to the other players' moves: its own deviations are not
    triggers, and when several others deviate at once the lowest index is
    punished. The one-cycle ``[(C, C)]`` in the prisoner's dilemma is therefore
    exactly the mutual grim-trigger profile.
    """
    if len(cycle) == 0:
        raise ValueError("cycle must be non-empty")
    for j in cycle:
        game.encode(j)
    if punishers is None:
        punishers = minmax_punishers(game)
    N, L = game.num_players, len(cycle)
    names = tuple(f"cycle{k}" for k in range(L)) + tuple(f"punish{j}" for j in range(N))
    profile = []
    for i in range(N):
        transition = np.zeros((L + N, game.num_joint), dtype=int)
        for k, want in enumerate(cycle):
            for code, joint in enumerate(game.joint_actions()):
                deviators = [j for j in range(N) if j != i and joint[j] != want[j]]
                transition[k, code] = L + deviators[0] if deviators else (k + 1) % L
        for j in range(N):
            transition[L + j, :] = L + j
        n = game.action_counts[i]
        emission = [_one_hot(n, int(want[i])) for want in cycle]
        for j in range(N):
            if i != j:
                emission.append(np.asarray(punishers[j][i], dtype=float))
            else:
                # never entered: a player does not punish itself
                others = [punishers[j][k] if k != j else np.full(n, 1.0 / n) for k in range(N)]
                emission.append(_one_hot(n, int(np.argmax(deviation_payoffs(game, others, j)))))
        profile.append(FSMStrategy(i, game.action_counts, emission, transition, state_names=names))
    return profile


def random_fsm(game: NormalFormGame, player: int, n_states: int, rng: np.random.Generator,
               deterministic: float = 0.0) -> FSMStrategy:
    """Random FSM: Dirichlet emissions (pure with probability ``deterministic``), uniform transitions."""
    n = game.action_counts[player]
    emission = []
    for _ in range(n_states):
        if rng.random() < deterministic:
            emission.append(_one_hot(n, int(rng.integers(n))))
        else:
            w = rng.dirichlet(np.ones(n))
            emission.append(w / w.sum())
    transition = rng.integers(n_states, size=(n_states, game.num_joint))
    return FSMStrategy(player, game.action_counts, emission, transition)


def random_profile(game: NormalFormGame, rng: np.random.Generator, max_states: int = 4,
                   deterministic: float = 0.0) -> list[FSMStrategy]:
    return [random_fsm(game, i, int(rng.integers(1, max_states + 1)), rng, deterministic)
            for i in range(game.num_players)]
