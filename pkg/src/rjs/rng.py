"""Counter-based uniforms keyed by (seed, stream, index, channel).

Every random draw in the samplers is a pure function of its key, so rollouts
can be generated in any order or in parallel and still be bit-identical, and
two samplers that use the same keys are coupled draw for draw.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SCALE = 2.0 ** -53

# streams
RJS = 1
REPEATED = 2

# channels; actions use ACTION + player
CHANCE = 0
ACTION = 1


def _mix(z: int) -> int:
    z = (z + _GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def uniform(seed: int, stream: int, index: int, channel: int) -> float:
    """One uniform in [0, 1) for a single key."""
    h = _mix(seed & MASK)
    h = _mix(h ^ stream)
    h = _mix(h ^ index)
    h = _mix(h ^ channel)
    return (h >> 11) * _SCALE


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def uniforms(seeds: np.ndarray, stream: int, index: int, channel: int) -> np.ndarray:
    """Vectorised :func:`uniform` over an array of seeds."""
    with np.errstate(over="ignore"):
        h = _mix_array(np.asarray(seeds, dtype=np.uint64))
        h = _mix_array(h ^ np.uint64(stream))
        h = _mix_array(h ^ np.uint64(index))
        h = _mix_array(h ^ np.uint64(channel))
    return (h >> np.uint64(11)).astype(np.float64) * _SCALE


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 63:
        raise ValueError(f"seed {seed} must be in [0, 2**63)")
    return seed

