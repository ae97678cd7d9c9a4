"""Action-drawing kernels shared by the RJS and repeated-game samplers.

Round ``k`` of a rollout with seed ``s`` draws player ``i``'s action from the
uniform keyed ``(s, stream, k, ACTION + i)`` by inverse CDF. The scalar and
vectorised kernels evaluate the same comparisons, so they agree bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import rng
from .games import NormalFormGame
from .strategies import FSMStrategy, Strategy

CHUNK = 8192


class DepthCapExceeded(RuntimeError):
    pass


def check_profile(game: NormalFormGame, profile: Sequence[Strategy]) -> list[Strategy]:
    if len(profile) != game.num_players:
        raise ValueError(f"profile has {len(profile)} strategies for a {game.num_players}-player game")
    for i, s in enumerate(profile):
        if s.player != i:
            raise ValueError(f"strategy at position {i} is for player {s.player}")
        if tuple(s.action_counts) != game.action_counts:
            raise ValueError(f"player {i}: strategy built for a different game")
    return list(profile)


def all_fsm(profile) -> bool:
    return all(isinstance(s, FSMStrategy) for s in profile)


def draw_action(cdf: np.ndarray, u: float) -> int:
    a = int(np.searchsorted(cdf, u, side="right"))
    if a >= len(cdf):
        a = int(np.flatnonzero(np.diff(np.r_[0.0, cdf]) > 0)[-1])
    return a


def draw_joint_scalar(game: NormalFormGame, cursors, seed: int, stream: int, k: int) -> tuple[tuple[int, ...], int]:
    joint = tuple(draw_action(c.cdf(), rng.uniform(seed, stream, k, rng.ACTION + i))
                  for i, c in enumerate(cursors))
    return joint, game.encode(joint)


def draw_joint(profile: Sequence[FSMStrategy], states: list[np.ndarray], seeds: np.ndarray,
               stream: int, k: int, strides: np.ndarray) -> np.ndarray:
    """Joint-action codes for a batch of rollouts at round ``k`` (FSM profiles only)."""
    code = np.zeros(len(seeds), dtype=np.int64)
    for i, s in enumerate(profile):
        cdf = s._cdf[states[i]]
        u = rng.uniforms(seeds, stream, k, rng.ACTION + i)
        a = (u[:, None] >= cdf).sum(axis=1)
        over = a >= cdf.shape[1]
        if np.any(over):
            a[over] = s._last[states[i][over]]
        code += a * strides[i]
    return code


def strides_of(game: NormalFormGame) -> np.ndarray:
    return np.asarray(game._strides, dtype=np.int64)


def seed_array(seeds) -> np.ndarray:
    if isinstance(seeds, range):
        arr = np.arange(seeds.start, seeds.stop, seeds.step, dtype=np.int64)
    else:
        arr = np.asarray(list(seeds) if not isinstance(seeds, np.ndarray) else seeds, dtype=np.int64)
    if arr.size and (arr.min() < 0):
        raise ValueError("seeds must be non-negative")
    return arr.astype(np.uint64)


def run_chunked(fn: Callable[[np.ndarray], dict], seeds: np.ndarray, workers: int = 1) -> list[dict]:
    """Apply ``fn`` to fixed-size seed chunks, in order, optionally on a thread pool.

    Chunk boundaries do not depend on ``workers``, so results do not either.
    """
    chunks = [seeds[i:i + CHUNK] for i in range(0, len(seeds), CHUNK)] or [seeds]
    if workers <= 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def merge_levels(parts: list[list[np.ndarray]]) -> list[np.ndarray]:
    depth = max((len(p) for p in parts), default=0)
    out = []
    for k in range(depth):
        out.append(np.concatenate([p[k] for p in parts if len(p) > k]))
    return out
