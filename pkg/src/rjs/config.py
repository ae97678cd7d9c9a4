"""JSON loaders for games and strategy profiles.

Game file::

    {"players": 2, "actions": [["C", "D"], ["C", "D"]],
     "utilities": [[[3, 3], [0, 5]], [[5, 0], [1, 1]]]}

``utilities[a_1]...[a_N]`` is the payoff vector of that joint action.

Strategy file: a single strategy object (used by every player unless it names
a ``player``), a list of them, ``{"profile": [...]}``, or a profile-level
``{"type": "folk_cycle", "cycle": [["C", "C"], ...]}``. Strategy objects:

* ``{"type": "constant", "action": "D"}``
* ``{"type": "stationary", "probs": {"C": 0.5, "D": 0.5}}`` (or a list)
* ``{"type": "grim_trigger", "cooperate": "C", "punish": "D", "triggers": ["D"]}``
* ``{"type": "fsm", "states": [...], "initial": ..., "emissions": {state: {action: p}},
  "transitions": {state: {"C,D": state, "*": state}}}``; ``"*"`` is the default
  target for joint actions not listed.

Errors raise :class:`ConfigError` carrying a JSON path such as ``$.profile[1].emissions``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .games import NormalFormGame, matching_pennies, minmax_value, prisoners_dilemma
from .strategies import (FSMStrategy, Strategy, constant_strategy, folk_cycle_profile, grim_trigger,
                         stationary_strategy)

BUILTIN_GAMES = {"pd": prisoners_dilemma, "matching-pennies": matching_pennies}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _read(source) -> tuple[Any, str]:
    if isinstance(source, (dict, list)):
        return source, "$"
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise ConfigError("$", f"cannot read {source}: {exc.strerror}") from None
    try:
        return json.loads(text), "$"
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(path, message)


def _number(x, path: str) -> float:
    _expect(isinstance(x, (int, float)) and not isinstance(x, bool), path, "expected a number")
    _expect(bool(np.isfinite(x)), path, "must be finite")
    return float(x)


def game_from_dict(doc: Any, path: str = "$") -> NormalFormGame:
    _expect(isinstance(doc, dict), path, "game must be a JSON object")
    for key in ("players", "actions", "utilities"):
        _expect(key in doc, f"{path}.{key}", "missing")
    N = doc["players"]
    _expect(isinstance(N, int) and not isinstance(N, bool) and N >= 1, f"{path}.players", "must be a positive integer")
    actions = doc["actions"]
    _expect(isinstance(actions, list) and len(actions) == N, f"{path}.actions", f"must list {N} action sets")
    for i, acts in enumerate(actions):
        p = f"{path}.actions[{i}]"
        _expect(isinstance(acts, list) and acts, p, "must be a non-empty list of labels")
        for k, a in enumerate(acts):
            _expect(isinstance(a, str) and a != "", f"{p}[{k}]", "action label must be a non-empty string")
        _expect(len(set(acts)) == len(acts), p, "duplicate action labels")
    counts = [len(a) for a in actions]

    def walk(node, depth, p):
        if depth == N:
            _expect(isinstance(node, list) and len(node) == N, p, f"expected a payoff vector of length {N}")
            return [_number(x, f"{p}[{k}]") for k, x in enumerate(node)]
        _expect(isinstance(node, list) and len(node) == counts[depth], p,
                f"expected {counts[depth]} entries for player {depth}'s actions")
        return [walk(x, depth + 1, f"{p}[{k}]") for k, x in enumerate(node)]

    u = walk(doc["utilities"], 0, f"{path}.utilities")
    return NormalFormGame(actions, np.array(u, dtype=float), str(doc.get("name", "")))


def load_game(source) -> NormalFormGame:
    """Game from a path, a parsed document, or a builtin name (``pd``, ``matching-pennies``)."""
    if isinstance(source, str) and source in BUILTIN_GAMES:
        return BUILTIN_GAMES[source]()
    doc, path = _read(source)
    return game_from_dict(doc, path)


def _action(game: NormalFormGame, player: int, label, path: str) -> int:
    _expect(isinstance(label, str), path, "expected an action label")
    _expect(label in game.action_labels[player], path,
            f"player {player} has no action {label!r} (has {list(game.action_labels[player])})")
    return game.action_labels[player].index(label)


def _probs(game: NormalFormGame, player: int, spec, path: str) -> np.ndarray:
    n = game.action_counts[player]
    if isinstance(spec, dict):
        probs = np.zeros(n)
        for label, x in spec.items():
            probs[_action(game, player, label, f"{path}.{label}")] = _number(x, f"{path}.{label}")
    else:
        _expect(isinstance(spec, list) and len(spec) == n, path, f"expected {n} probabilities")
        probs = np.array([_number(x, f"{path}[{k}]") for k, x in enumerate(spec)])
    _expect(bool(np.all(probs >= 0)) and abs(probs.sum() - 1.0) <= 1e-9, path,
            "must be a probability distribution")
    return probs / probs.sum()


def _default_punish(game: NormalFormGame, player: int) -> int:
    if game.num_players != 2:
        return game.action_counts[player] - 1
    y = minmax_value(game, 1 - player).strategy[player]
    return int(np.argmax(y))


def _fsm(game: NormalFormGame, player: int, doc: dict, path: str) -> FSMStrategy:
    states = doc.get("states")
    _expect(isinstance(states, list) and states and all(isinstance(s, str) for s in states),
            f"{path}.states", "must be a non-empty list of state names")
    _expect(len(set(states)) == len(states), f"{path}.states", "duplicate state names")
    index = {s: k for k, s in enumerate(states)}
    initial = doc.get("initial", states[0])
    _expect(initial in index, f"{path}.initial", f"unknown state {initial!r}")
    em = doc.get("emissions")
    _expect(isinstance(em, dict), f"{path}.emissions", "must map every state to a distribution")
    emission = []
    for s in states:
        _expect(s in em, f"{path}.emissions.{s}", "missing")
        emission.append(_probs(game, player, em[s], f"{path}.emissions.{s}"))
    for s in em:
        _expect(s in index, f"{path}.emissions.{s}", "unknown state")
    tr = doc.get("transitions")
    _expect(isinstance(tr, dict), f"{path}.transitions", "must map every state to its successors")
    labels = {game.label(j): k for k, j in enumerate(game.joint_actions())}
    transition = np.full((len(states), game.num_joint), -1, dtype=np.int64)
    for s, row in tr.items():
        p = f"{path}.transitions.{s}"
        _expect(s in index, p, "unknown state")
        if isinstance(row, str):
            row = {"*": row}
        _expect(isinstance(row, dict), p, "must map joint actions to states")
        default = row.get("*")
        if default is not None:
            _expect(default in index, f"{p}.*", f"unknown state {default!r}")
            transition[index[s]] = index[default]
        for joint, target in row.items():
            if joint == "*":
                continue
            _expect(joint in labels, f"{p}.{joint}", f"unknown joint action (use e.g. {next(iter(labels))!r})")
            _expect(target in index, f"{p}.{joint}", f"unknown state {target!r}")
            transition[index[s], labels[joint]] = index[target]
    missing = np.argwhere(transition < 0)
    if len(missing):
        s, k = missing[0]
        raise ConfigError(f"{path}.transitions.{states[s]}",
                          f"no successor for joint action {game.label(game.decode(k))!r}")
    return FSMStrategy(player, game.action_counts, emission, transition, index[initial], tuple(states))


def strategy_from_dict(game: NormalFormGame, player: int, doc: Any, path: str = "$") -> Strategy:
    _expect(isinstance(doc, dict), path, "strategy must be a JSON object")
    kind = doc.get("type")
    n = game.action_counts[player]
    try:
        if kind == "constant":
            return constant_strategy(game, player, _action(game, player, doc.get("action"), f"{path}.action"))
        if kind == "stationary":
            return stationary_strategy(game, player, _probs(game, player, doc.get("probs"), f"{path}.probs"))
        if kind == "grim_trigger":
            coop = _action(game, player, doc["cooperate"], f"{path}.cooperate") if "cooperate" in doc else 0
            punish = (_action(game, player, doc["punish"], f"{path}.punish") if "punish" in doc
                      else _default_punish(game, player))
            if "triggers" in doc:
                trig = doc["triggers"]
                _expect(isinstance(trig, list), f"{path}.triggers", "must be a list of action labels")
                triggers = set()
                for k, label in enumerate(trig):
                    p = f"{path}.triggers[{k}]"
                    _expect(isinstance(label, str), p, "expected an action label")
                    hits = [j for j in range(game.num_players) if j != player and label in game.action_labels[j]]
                    _expect(bool(hits), p, f"no opponent has action {label!r}")
                    triggers.add(game.action_labels[hits[0]].index(label))
            else:
                triggers = set(range(n)) - {coop}
            return grim_trigger(game, player, coop, punish, triggers)
        if kind == "fsm":
            return _fsm(game, player, doc, path)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"unknown strategy type {kind!r} (constant, stationary, grim_trigger, fsm)")


def profile_from_dict(game: NormalFormGame, doc: Any, path: str = "$") -> list[Strategy]:
    N = game.num_players
    if isinstance(doc, dict) and doc.get("type") == "folk_cycle":
        cyc = doc.get("cycle")
        _expect(isinstance(cyc, list) and cyc, f"{path}.cycle", "must be a non-empty list of joint actions")
        cycle = []
        for k, joint in enumerate(cyc):
            p = f"{path}.cycle[{k}]"
            _expect(isinstance(joint, list) and len(joint) == N, p, f"expected {N} action labels")
            cycle.append(tuple(_action(game, i, a, f"{p}[{i}]") for i, a in enumerate(joint)))
        return folk_cycle_profile(game, cycle)
    if isinstance(doc, dict) and "profile" in doc:
        doc, path = doc["profile"], f"{path}.profile"
    if isinstance(doc, dict):
        if "player" in doc:
            raise ConfigError(f"{path}.player", "a single strategy cannot fill a whole profile; give a list")
        return [strategy_from_dict(game, i, doc, path) for i in range(N)]
    _expect(isinstance(doc, list) and len(doc) == N, path, f"expected {N} strategies")
    out = []
    for i, s in enumerate(doc):
        p = f"{path}[{i}]"
        if isinstance(s, dict) and "player" in s:
            _expect(s["player"] == i, f"{p}.player", f"strategy at position {i} names player {s['player']}")
        out.append(strategy_from_dict(game, i, s, p))
    return out


def load_profile(game: NormalFormGame, source) -> list[Strategy]:
    doc, path = _read(source)
    return profile_from_dict(game, doc, path)


def profile_to_dict(game: NormalFormGame, profile) -> dict:
    return {"profile": [s.to_dict(game) for s in profile]}
