"""Markov chain over joint FSM states induced by a profile of FSM strategies."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .games import NormalFormGame
from .strategies import FSMStrategy, Strategy


def require_fsm(game: NormalFormGame, profile: Sequence[Strategy]) -> list[FSMStrategy]:
    if len(profile) != game.num_players:
        raise ValueError(f"profile has {len(profile)} strategies for a {game.num_players}-player game")
    for i, s in enumerate(profile):
        if not isinstance(s, FSMStrategy):
            raise TypeError(f"player {i}: exact chain evaluation needs FSM strategies")
        if s.player != i:
            raise ValueError(f"strategy at position {i} is for player {s.player}")
        if s.action_counts != game.action_counts:
            raise ValueError(f"player {i}: strategy built for a different game")
    return list(profile)


class ProductChain:
    """Joint-state chain of a profile.

    Attributes:
        states: ``(S, N)`` per-player state of every joint state.
        act: ``(S, J)`` probability of each joint action in each joint state.
        nxt: ``(S, J)`` successor joint state.
        reward: ``(S, N)`` expected stage payoff in each joint state.
        T: ``(S, S)`` one-round transition matrix.
    """

    def __init__(self, game: NormalFormGame, profile: Sequence[Strategy]):
        profile = require_fsm(game, profile)
        self.game = game
        self.profile = profile
        sizes = [s.n_states for s in profile]
        self.sizes = sizes
        self.states = np.array(list(itertools.product(*(range(n) for n in sizes))), dtype=np.int64)
        S, J, N = len(self.states), game.num_joint, game.num_players
        joints = np.array(game.joint_actions(), dtype=np.int64)
        act = np.ones((S, J))
        for i, s in enumerate(profile):
            act *= s.emission[self.states[:, i]][:, joints[:, i]]
        mult = np.ones(N, dtype=np.int64)
        for i in range(N - 2, -1, -1):
            mult[i] = mult[i + 1] * sizes[i + 1]
        nxt = np.zeros((S, J), dtype=np.int64)
        for i, s in enumerate(profile):
            nxt += s.transition[self.states[:, i]] * mult[i]
        self.mult = mult
        self.act = act
        self.nxt = nxt
        self.reward = act @ game.flat_utilities()
        T = np.zeros((S, S))
        rows = np.repeat(np.arange(S), J)
        np.add.at(T, (rows, nxt.ravel()), act.ravel())
        self.T = T
        # flow[s, s', :] = E[u(a) ; next state s' | state s]
        flow = np.zeros((S, S, N))
        U = game.flat_utilities()
        np.add.at(flow, (rows, nxt.ravel()), (act[:, :, None] * U[None, :, :]).reshape(-1, N))
        self.flow = flow
        self.initial = int(np.dot(mult, [s.initial for s in profile]))

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def deterministic(self) -> bool:
        return bool(np.all(self.act.max(axis=1) == 1.0))

    def start(self) -> np.ndarray:
        mu = np.zeros(self.n_states)
        mu[self.initial] = 1.0
        return mu

    def expected_stage(self, n: int) -> np.ndarray:
        """Expected stage payoffs ``E[u(round t)]`` for ``t < n`` as an ``(n, N)`` array."""
        out = np.empty((n, self.game.num_players))
        mu = self.start()
        for t in range(n):
            out[t] = mu @ self.reward
            mu = mu @ self.T
        return out

    def deterministic_path(self) -> tuple[list[int], int]:
        """Joint-state path of a deterministic profile: (states, index where the cycle starts)."""
        seen: dict[int, int] = {}
        path = []
        s = self.initial
        while s not in seen:
            seen[s] = len(path)
            path.append(s)
            a = int(np.argmax(self.act[s]))
            s = int(self.nxt[s, a])
        return path, seen[s]
