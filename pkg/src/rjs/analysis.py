"""Exact distributions and utilities across game variants, and equilibrium checks.

Variant names: ``rjs`` (recursive joint simulation), ``rep_last`` (random
horizon, last-round payoff), ``rep_u`` (random horizon, scaled sum),
``rep_omega`` (infinite discounted), ``rep_finite`` (``T`` rounds, average).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import repeated
from .chain import ProductChain, require_fsm
from .games import DEFAULT_TOL, NormalFormGame, minmax_value
from .sampling import all_fsm, check_profile
from .schedule import SimulationSchedule, as_schedule
from .strategies import FSMStrategy, Strategy, folk_cycle_profile

BRANCH_BUDGET = 10_000_000
_ALIASES = {
    "rjs": "rjs", "RJS": "rjs",
    "rep_last": "rep_last", "last-only": "rep_last", "Rep_u^last": "rep_last",
    "rep_u": "rep_u", "unknown": "rep_u", "Rep_u": "rep_u",
    "rep_omega": "rep_omega", "omega": "rep_omega", "omega-exact": "rep_omega", "Rep_omega": "rep_omega",
    "rep_finite": "rep_finite", "finite": "rep_finite", "Rep_T": "rep_finite",
}


class BranchBudgetExceeded(RuntimeError):
    pass


def variant_name(v: str) -> str:
    try:
        return _ALIASES[v]
    except KeyError:
        raise ValueError(f"unknown variant {v!r}") from None


# -- terminal distributions ----------------------------------------------------------

@dataclass
class _Nodes:
    hist: np.ndarray            # (n, L) joint-action codes
    prob: np.ndarray            # (n,)
    states: list[np.ndarray] | None   # per-player FSM states, FSM path only


def _root(profile) -> _Nodes:
    fsm = all_fsm(profile)
    return _Nodes(np.zeros((1, 0), dtype=np.int64), np.ones(1),
                  [np.array([s.initial]) for s in profile] if fsm else None)


def _joint_probs(game: NormalFormGame, profile, nodes: _Nodes) -> np.ndarray:
    joints = np.array(game.joint_actions(), dtype=np.int64)
    act = np.ones((len(nodes.prob), game.num_joint))
    if nodes.states is not None:
        for i, s in enumerate(profile):
            act *= s.emission[nodes.states[i]][:, joints[:, i]]
        return act
    for r, row in enumerate(nodes.hist):
        history = [game.decode(c) for c in row]
        for i, s in enumerate(profile):
            act[r] *= s.response(history)[joints[:, i]]
    return act


def _step(game, profile, nodes: _Nodes, scale: float, budget: int) -> _Nodes:
    """Extend every node by one round, multiplying by the emitted joint-action probabilities."""
    act = _joint_probs(game, profile, nodes)
    node_idx, code = np.nonzero(act > 0)
    if len(node_idx) > budget:
        raise BranchBudgetExceeded(f"enumeration needs {len(node_idx)} nodes, budget is {budget}")
    prob = nodes.prob[node_idx] * act[node_idx, code] * scale
    hist = np.concatenate([nodes.hist[node_idx], code[:, None]], axis=1)
    states = None
    if nodes.states is not None:
        states = [s.transition[nodes.states[i][node_idx], code] for i, s in enumerate(profile)]
    return _Nodes(hist, prob, states)


@dataclass
class TerminalDistribution:
    """Probabilities of terminal histories, bucketed by history length.

    ``buckets[L] = (histories (n, L) of joint-action codes, probabilities (n,))``,
    rows sorted lexicographically. ``residual_mass`` is the probability of
    histories longer than the enumeration cap.
    """

    game: NormalFormGame
    variant: str
    schedule: SimulationSchedule
    buckets: dict[int, tuple[np.ndarray, np.ndarray]]
    residual_mass: float
    depth_cap: int

    def total_mass(self) -> float:
        return float(sum(p.sum() for _, p in self.buckets.values()))

    def as_dict(self) -> dict[tuple, float]:
        out = {}
        for L, (h, p) in self.buckets.items():
            for row, q in zip(h, p):
                out[tuple(self.game.decode(c) for c in row)] = float(q)
        return out

    def terminal_utilities(self, L: int) -> np.ndarray:
        """Payoff vector of each length-``L`` terminal history under this variant."""
        h, _ = self.buckets[L]
        U = self.game.flat_utilities()
        if self.variant == "rep_u":
            w = 1.0 - self.schedule.probs(L)
            return np.einsum("t,ntk->nk", w, U[h])
        return U[h[:, -1]]

    def outcome_distribution(self, decimals: int = 12) -> dict[tuple, float]:
        """Distribution over payoff profiles (rounded to ``decimals``)."""
        out: dict[tuple, float] = {}
        for L, (_, p) in sorted(self.buckets.items()):
            for u, q in zip(np.round(self.terminal_utilities(L), decimals), p):
                key = tuple(float(x) + 0.0 for x in u)
                out[key] = out.get(key, 0.0) + float(q)
        return out

    def expected_utility(self) -> np.ndarray:
        total = np.zeros(self.game.num_players)
        for L, (_, p) in sorted(self.buckets.items()):
            total += p @ self.terminal_utilities(L)
        return total


def _sorted_bucket(hist: np.ndarray, prob: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keep = prob > 0
    hist, prob = hist[keep], prob[keep]
    if hist.shape[1] and len(hist):
        order = np.lexsort(hist.T[::-1])
        hist, prob = hist[order], prob[order]
    return hist, prob


def terminal_distribution(variant: str, profile: Sequence[Strategy], game: NormalFormGame, schedule,
                          depth_cap: int | None = None, tol: float = 1e-12,
                          budget: int = BRANCH_BUDGET) -> TerminalDistribution:
    """Enumerate terminal histories up to ``depth_cap`` simulations / ``depth_cap + 1`` rounds.

    ``rjs`` first takes the depth law ``Pr(depth = d)`` and then the conditional
    probability of each action sequence generated bottom-up; ``rep_last`` and
    ``rep_u`` walk forward, multiplying in the continue/stop probability after
    each round. Without ``depth_cap`` the cap is the smallest depth leaving at
    most ``tol`` of unenumerated mass.
    """
    variant = variant_name(variant)
    if variant not in ("rjs", "rep_last", "rep_u"):
        raise ValueError("terminal distributions exist for rjs, rep_last and rep_u")
    profile = check_profile(game, profile)
    schedule = as_schedule(schedule)
    if depth_cap is None:
        depth_cap = schedule.depth_for_mass(tol)
    if depth_cap < 0:
        raise ValueError("depth_cap must be non-negative")
    buckets = {}
    nodes = _root(profile)
    total = 0
    if variant == "rjs":
        for d in range(depth_cap + 1):
            nodes = _step(game, profile, nodes, 1.0, budget - total)
            total += len(nodes.prob)
            buckets[d + 1] = _sorted_bucket(nodes.hist, schedule.depth_pmf(d) * nodes.prob)
            if schedule.survival(d + 1) == 0.0:
                break
    else:
        for t in range(depth_cap + 1):
            nodes = _step(game, profile, nodes, 1.0, budget - total)
            total += len(nodes.prob)
            pt = schedule.prob_at(t)
            buckets[t + 1] = _sorted_bucket(nodes.hist, nodes.prob * (1.0 - pt))
            nodes = _Nodes(nodes.hist, nodes.prob * pt, nodes.states)
            keep = nodes.prob > 0
            if not np.any(keep):
                break
            nodes = _Nodes(nodes.hist[keep], nodes.prob[keep],
                           None if nodes.states is None else [s[keep] for s in nodes.states])
    buckets = {L: b for L, b in buckets.items() if len(b[1])}
    residual = schedule.survival(depth_cap + 1)
    return TerminalDistribution(game, variant, schedule, buckets, residual, depth_cap)


def _aligned(a: TerminalDistribution, b: TerminalDistribution, L: int):
    ha, pa = a.buckets.get(L, (np.zeros((0, L), dtype=np.int64), np.zeros(0)))
    hb, pb = b.buckets.get(L, (np.zeros((0, L), dtype=np.int64), np.zeros(0)))
    rows = np.concatenate([ha, hb])
    if len(rows) == 0:
        return np.zeros(0), np.zeros(0)
    _, inv = np.unique(rows, axis=0, return_inverse=True)
    inv = inv.ravel()
    n = inv.max() + 1
    va, vb = np.zeros(n), np.zeros(n)
    np.add.at(va, inv[:len(ha)], pa)
    np.add.at(vb, inv[len(ha):], pb)
    return va, vb


def bucket_gap(a: TerminalDistribution, b: TerminalDistribution) -> float:
    """Largest per-history probability difference."""
    gap = 0.0
    for L in set(a.buckets) | set(b.buckets):
        va, vb = _aligned(a, b, L)
        if va.size:
            gap = max(gap, float(np.max(np.abs(va - vb))))
    return gap


def tv_histories(a: TerminalDistribution, b: TerminalDistribution) -> float:
    """Total variation over terminal histories (identified by their action sequences)."""
    s = 0.0
    for L in sorted(set(a.buckets) | set(b.buckets)):
        va, vb = _aligned(a, b, L)
        s += float(np.abs(va - vb).sum())
    return 0.5 * s


def tv_outcomes(a: TerminalDistribution, b: TerminalDistribution, decimals: int = 12) -> float:
    """Total variation between the induced distributions over payoff profiles."""
    da, db = a.outcome_distribution(decimals), b.outcome_distribution(decimals)
    return 0.5 * sum(abs(da.get(k, 0.0) - db.get(k, 0.0)) for k in set(da) | set(db))


# -- exact utilities ---------------------------------------------------------------

def rjs_chain_utility(profile: Sequence[Strategy], game: NormalFormGame, schedule) -> repeated.ExactValue:
    """RJS expected payoff by unrolling the recursion on the joint FSM state.

    Let ``b_j`` be the state distribution just before the action at nesting level
    ``j``. The history below level ``j`` is empty with probability ``1 - p_j`` and
    otherwise is the complete history of level ``j + 1``, so
    ``b_j = (1 - p_j) e_init + p_j T'b_{j+1}``. On the constant tail this is a
    fixed point solved as a linear system; the prefix is unrolled backwards. No
    truncation is involved.
    """
    schedule = as_schedule(schedule, sampling=False)
    chain = ProductChain(game, profile)
    delta = chain.start()
    q = schedule.tail
    if q == 0.0:
        b = delta
    else:
        A = np.eye(chain.n_states) - q * chain.T.T
        b = np.linalg.solve(A, (1.0 - q) * delta)
    for p in reversed(schedule.prefix):
        b = (1.0 - p) * delta + p * (chain.T.T @ b)
    return repeated.ExactValue(b @ chain.reward, 0.0)


def exact_utility(variant: str, profile: Sequence[Strategy], game: NormalFormGame, schedule,
                  tol: float = DEFAULT_TOL, T: int | None = None) -> repeated.ExactValue:
    """Expected payoff vector of ``profile`` in ``variant`` with a bound on truncation error.

    FSM profiles go through the joint-state chain; other strategies fall back
    to enumerating terminal histories, with the cap chosen so the unenumerated
    mass times the largest achievable payoff is at most ``tol / 2``.
    """
    variant = variant_name(variant)
    if tol <= 0:
        raise ValueError("tol must be positive")
    profile = check_profile(game, profile)
    if variant == "rep_finite":
        if T is None:
            T = as_schedule(schedule).budget if not isinstance(schedule, (int, float)) else None
        if T is None:
            raise ValueError("rep_finite needs T")
        if all_fsm(profile):
            return repeated.rep_finite_exact(profile, game, T)
        # T rounds = budget schedule with T - 1 continuations, averaged
        dist = terminal_distribution("rep_last", profile, game, SimulationSchedule.finite_budget(T - 1),
                                     depth_cap=T - 1)
        h, p = dist.buckets[T]
        return repeated.ExactValue(p @ game.flat_utilities()[h].mean(axis=1), 0.0, T)
    schedule = as_schedule(schedule, sampling=False)
    if all_fsm(profile):
        if variant == "rjs":
            return rjs_chain_utility(profile, game, schedule)
        if variant == "rep_omega":
            p = schedule.tail if schedule.is_constant else schedule
            return repeated.rep_omega_exact(profile, game, p, tol)
        if variant == "rep_u":
            return repeated.rep_unknown_exact(profile, game, schedule, tol)
        return repeated.rep_lastonly_exact(profile, game, schedule, tol)
    M = game.max_abs_utility()
    if variant == "rep_omega":
        variant = "rep_last"
    cap = schedule.depth_for_mass(tol / (2 * max(M, 1e-300)))
    dist = terminal_distribution(variant, profile, game, schedule, depth_cap=cap)
    tail = dist.residual_mass * M
    if variant == "rep_u":
        tail *= 1.0 + float(np.sum(1.0 - schedule.probs(cap + 1)))
    return repeated.ExactValue(dist.expected_utility(), tail, cap)


@dataclass
class EquivalenceReport:
    variants: tuple[str, str]
    utilities: tuple[list[float], list[float]]
    utility_gap: list[float]
    tail_bounds: tuple[float, float]
    tol: float
    kind: str
    tv_histories: float | None = None
    tv_outcomes: float | None = None
    max_bucket_gap: float | None = None
    residual_masses: tuple[float, float] | None = None
    verdict: bool = False
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "variants": list(self.variants),
            "kind": self.kind,
            "utilities": [list(map(float, u)) for u in self.utilities],
            "utility_gap": list(map(float, self.utility_gap)),
            "tail_bounds": list(map(float, self.tail_bounds)),
            "tv_histories": self.tv_histories,
            "tv_outcomes": self.tv_outcomes,
            "max_bucket_gap": self.max_bucket_gap,
            "residual_masses": None if self.residual_masses is None else list(self.residual_masses),
            "tol": self.tol,
            "verdict": "pass" if self.verdict else "fail",
            "config": self.config,
        }


def check_equivalence(variant_a: str, variant_b: str, profile: Sequence[Strategy], game: NormalFormGame,
                      schedule, tol: float = DEFAULT_TOL, kind: str = "strategic",
                      depth_cap: int | None = None, T: int | None = None) -> EquivalenceReport:
    """Compare two variants on one profile.

    ``kind="strategic"`` passes iff every per-player utility gap is within
    ``tol`` plus both tail bounds. ``kind="realisation"`` additionally enumerates
    both terminal distributions to ``depth_cap`` and requires the per-history
    gap to be within ``tol`` and the payoff-profile total variation within
    ``tol`` plus the residual masses. ``rep_finite`` takes ``T`` from a
    finite-budget schedule unless given.
    """
    a, b = variant_name(variant_a), variant_name(variant_b)
    if kind not in ("strategic", "realisation"):
        raise ValueError("kind must be 'strategic' or 'realisation'")
    sched = as_schedule(schedule, sampling=False)
    if T is None and "rep_finite" in (a, b):
        T = sched.budget
    inner = min(tol / 4, 1e-12)
    ua = exact_utility(a, profile, game, sched, inner, T=T)
    ub = exact_utility(b, profile, game, sched, inner, T=T)
    gap = np.abs(ua.utilities - ub.utilities)
    verdict = bool(np.all(gap <= tol + ua.tail_bound + ub.tail_bound))
    report = EquivalenceReport((a, b), (list(ua.utilities), list(ub.utilities)), list(gap),
                               (ua.tail_bound, ub.tail_bound), tol, kind,
                               config={"schedule": str(sched), "tol": tol, "T": T})
    if kind == "realisation":
        da = terminal_distribution(a, profile, game, sched, depth_cap=depth_cap)
        db = terminal_distribution(b, profile, game, sched, depth_cap=depth_cap)
        report.tv_histories = tv_histories(da, db)
        report.tv_outcomes = tv_outcomes(da, db)
        report.max_bucket_gap = bucket_gap(da, db)
        report.residual_masses = (da.residual_mass, db.residual_mass)
        report.config["depth_cap"] = da.depth_cap
        verdict = verdict and report.max_bucket_gap <= tol \
            and report.tv_outcomes <= tol + da.residual_mass + db.residual_mass
    report.verdict = verdict
    return report


# -- best responses and equilibria ------------------------------------------------------

@dataclass
class BestResponse:
    player: int
    value: float
    strategy: FSMStrategy
    bellman_residual: float
    iterations: int


def _opponent_model(game: NormalFormGame, profile: Sequence[FSMStrategy], player: int):
    """Reward ``r[s, a]`` and transitions ``P[a, s, s']`` on the opponents' joint FSM state."""
    opp = [s for j, s in enumerate(profile) if j != player]
    sizes = [s.n_states for s in opp]
    states = np.array(list(itertools.product(*(range(n) for n in sizes))), dtype=np.int64).reshape(-1, len(opp))
    S, J = len(states), game.num_joint
    mult = np.ones(len(opp), dtype=np.int64)
    for k in range(len(opp) - 2, -1, -1):
        mult[k] = mult[k + 1] * sizes[k + 1]
    joints = np.array(game.joint_actions(), dtype=np.int64)
    others = [j for j in range(game.num_players) if j != player]
    q = np.ones((S, J))
    nxt = np.zeros((S, J), dtype=np.int64)
    for k, (j, s) in enumerate(zip(others, opp)):
        q *= s.emission[states[:, k]][:, joints[:, j]]
        nxt += s.transition[states[:, k]] * mult[k]
    own = joints[:, player]
    n_own = game.action_counts[player]
    U = game.flat_utilities()[:, player]
    r = np.zeros((S, n_own))
    P = np.zeros((n_own, S, S))
    for a in range(n_own):
        cols = np.flatnonzero(own == a)
        r[:, a] = q[:, cols] @ U[cols]
        for c in cols:
            np.add.at(P[a], (np.arange(S), nxt[:, c]), q[:, c])
    init = int(np.dot(mult, [s.initial for s in opp])) if opp else 0
    return r, P, nxt, init, S


def _q_values(r, P, V, p):
    return (1.0 - p) * r + p * np.einsum("ast,t->sa", P, V)


def _stationary(r, P, q, tol, max_iter=1_000_000):
    S, A = r.shape
    if q == 0.0:
        V = r.max(axis=1)
        return V, r.argmax(axis=1), 0.0, 0
    V = np.zeros(S)
    stop = tol * (1.0 - q) / (2.0 * q)
    it = 0
    for it in range(1, max_iter + 1):
        Vn = _q_values(r, P, V, q).max(axis=1)
        delta = np.max(np.abs(Vn - V))
        V = Vn
        if delta <= stop:
            break
    # polish the greedy policy with exact policy iteration
    pol = _q_values(r, P, V, q).argmax(axis=1)
    for _ in range(1000):
        Ppi = P[pol, np.arange(S)]
        V = np.linalg.solve(np.eye(S) - q * Ppi, (1.0 - q) * r[np.arange(S), pol])
        Q = _q_values(r, P, V, q)
        better = Q.max(axis=1) > Q[np.arange(S), pol] + 1e-13
        if not np.any(better):
            break
        pol = np.where(better, Q.argmax(axis=1), pol)
    residual = float(np.max(np.abs(_q_values(r, P, V, q).max(axis=1) - V)))
    return V, pol, residual, it


def best_response(game: NormalFormGame, profile: Sequence[Strategy], player: int, p_or_schedule,
                  tol: float = DEFAULT_TOL) -> BestResponse:
    """Optimal payoff and an optimal FSM for ``player`` against the other FSMs in ``profile``.

    The decision process lives on the opponents' joint FSM state. Stage rewards
    are ``(1 - p_t) u`` and the process continues with ``p_t``; the constant tail
    is solved by value iteration (then polished by policy iteration) and the
    schedule prefix by backward induction. The returned strategy's states are
    (round, opponent state) pairs, with the round saturating at the prefix length.
    """
    if isinstance(p_or_schedule, (int, float)) and not 0.0 <= float(p_or_schedule) < 1.0:
        raise ValueError("p must be in [0, 1)")
    schedule = as_schedule(p_or_schedule, sampling=False)
    others = [s for j, s in enumerate(profile) if j != player]
    if not all(isinstance(s, FSMStrategy) for s in others):
        raise TypeError("best_response needs FSM opponents")
    r, P, nxt, init, S = _opponent_model(game, profile, player)
    V, pol, residual, it = _stationary(r, P, schedule.tail, tol)
    K = len(schedule.prefix)
    policies = [pol]
    for t in reversed(range(K)):
        pt = schedule.prefix[t]
        Q = _q_values(r, P, V, pt)
        pol = Q.argmax(axis=1)
        V = Q.max(axis=1)
        policies.append(pol)
    policies.reverse()       # policies[t] for t < K, policies[K] stationary
    n_own = game.action_counts[player]
    n_states = (K + 1) * S
    emission = np.zeros((n_states, n_own))
    transition = np.zeros((n_states, game.num_joint), dtype=np.int64)
    for t in range(K + 1):
        emission[t * S + np.arange(S), policies[t]] = 1.0
        transition[t * S:(t + 1) * S] = min(t + 1, K) * S + nxt
    names = tuple(f"t{t}_o{s}" for t in range(K + 1) for s in range(S))
    fsm = FSMStrategy(player, game.action_counts, emission, transition, initial=init, state_names=names)
    return BestResponse(player, float(V[init]), fsm, residual, it)


@dataclass
class EquilibriumReport:
    is_nash: bool
    gains: np.ndarray
    values: np.ndarray
    best_values: np.ndarray


def verify_equilibrium(game: NormalFormGame, profile: Sequence[Strategy], p_or_schedule,
                       tol: float = DEFAULT_TOL) -> EquilibriumReport:
    """Nash check in the RJS game (equivalently the discounted repeated game)."""
    profile = require_fsm(game, profile)
    schedule = as_schedule(p_or_schedule, sampling=False)
    values = rjs_chain_utility(profile, game, schedule).utilities
    best = np.array([best_response(game, profile, i, schedule, tol).value for i in range(game.num_players)])
    gains = best - values
    return EquilibriumReport(bool(np.all(gains <= tol)), gains, values, best)


def min_discount_for_equilibrium(game: NormalFormGame, profile: Sequence[Strategy], tol: float = DEFAULT_TOL,
                                 resolution: float = 1e-5, probes=(0.5, 0.9, 0.99, 0.999)) -> float | None:
    """Smallest ``p`` at which ``profile`` is a Nash equilibrium, by bisection.

    Returns 0.0 if it is an equilibrium already at ``p = 0`` and ``None`` if no
    probe in ``probes`` passes. Assumes the set of passing ``p`` is an interval
    reaching towards 1, as it is for trigger strategies.
    """
    def ok(p):
        return verify_equilibrium(game, profile, p, tol).is_nash

    if ok(0.0):
        return 0.0
    hi = next((p for p in probes if ok(p)), None)
    if hi is None:
        return None
    lo = 0.0
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class FolkReport:
    constructible: bool
    cycle: list[tuple[int, ...]] | None
    achieved: np.ndarray | None
    residual: float | None
    is_nash: bool
    gains: np.ndarray | None
    minmax: np.ndarray
    diagnostic: str = ""
    profile: list[FSMStrategy] | None = None

    def to_dict(self, game: NormalFormGame | None = None) -> dict:
        cyc = self.cycle
        if cyc is not None and game is not None:
            cyc = [[game.action_labels[i][a] for i, a in enumerate(j)] for j in cyc]
        return {
            "constructible": self.constructible,
            "cycle": None if cyc is None else [list(j) for j in cyc],
            "achieved": None if self.achieved is None else list(map(float, self.achieved)),
            "residual": self.residual,
            "is_nash": self.is_nash,
            "gains": None if self.gains is None else list(map(float, self.gains)),
            "minmax": list(map(float, self.minmax)),
            "diagnostic": self.diagnostic,
        }


def cycle_payoffs(game: NormalFormGame, cycles: np.ndarray, p: float) -> np.ndarray:
    """Discounted average payoff of repeating each cycle (rows of joint codes) from position 0."""
    L = cycles.shape[1]
    w = (1.0 - p) * p ** np.arange(L) / (1.0 - p ** L) if p > 0 else np.r_[1.0, np.zeros(L - 1)]
    return np.einsum("k,nkj->nj", w, game.flat_utilities()[cycles])


def verify_folk_point(game: NormalFormGame, target: Sequence[float], p: float, tol: float = 0.01,
                      max_cycle_len: int = 8, nash_tol: float = DEFAULT_TOL,
                      budget: int = 2_000_000) -> FolkReport:
    """Try to support payoff ``target`` as a Nash equilibrium at discount ``p``.

    Requires ``target_i`` strictly above every minmax value, then searches pure
    joint-action cycles by increasing length (lexicographic within a length) for
    one whose discounted average is within ``tol`` of the target, builds the
    lockstep cycle profile with grim minmax punishment and checks it is Nash.
    """
    v = np.asarray(target, dtype=float)
    if v.shape != (game.num_players,):
        raise ValueError("target needs one entry per player")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must be in [0, 1)")
    mm = [minmax_value(game, i) for i in range(game.num_players)]
    minmax = np.array([m.value for m in mm])
    if not np.all(v > minmax):
        bad = [i for i in range(game.num_players) if not v[i] > minmax[i]]
        return FolkReport(False, None, None, None, False, None, minmax,
                          f"target not above minmax for players {bad}")
    J = game.num_joint
    for L in range(1, max_cycle_len + 1):
        if J ** L > budget:
            return FolkReport(False, None, None, None, False, None, minmax,
                              f"no cycle of length < {L} within {tol}; length {L} exceeds search budget")
        cycles = np.array(list(itertools.product(range(J), repeat=L)), dtype=np.int64)
        pay = cycle_payoffs(game, cycles, p)
        hits = np.flatnonzero(np.max(np.abs(pay - v), axis=1) <= tol)
        if hits.size:
            codes = cycles[hits[0]]
            cycle = [game.decode(c) for c in codes]
            profile = folk_cycle_profile(game, cycle, [m.strategy for m in mm])
            eq = verify_equilibrium(game, profile, p, nash_tol)
            achieved = eq.values
            return FolkReport(True, cycle, achieved, float(np.max(np.abs(achieved - v))), eq.is_nash,
                              eq.gains, minmax, "" if eq.is_nash else "cycle profile is not Nash at this p",
                              profile)
    return FolkReport(False, None, None, None, False, None, minmax,
                      f"no cycle up to length {max_cycle_len} within {tol} of target")
