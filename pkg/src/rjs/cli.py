"""``rjs`` command line.

Every command prints a JSON report (sorted keys) on stdout embedding the
resolved configuration and seed, and a one-line summary on stderr. Exit codes:
0 success or verification pass, 1 verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, beliefs, repeated
from .config import ConfigError, load_game, load_profile, profile_to_dict
from .games import NormalFormGame
from .sampling import DepthCapExceeded
from .schedule import ScheduleError, as_schedule
from .simulate import rjs_batch

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
VARIABLE_SCHEDULE = "list:0.9,0.8,0.5,0.1,tail=0.01"


class InputError(Exception):
    pass


def _default_workers() -> int:
    raw = os.environ.get("RJS_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"RJS_WORKERS={raw!r} is not an integer") from None
    if n < 1:
        raise InputError("RJS_WORKERS must be at least 1")
    return n


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _emit(report: dict, path: str | None, summary: str):
    text = json.dumps(report, sort_keys=True, indent=2, allow_nan=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    print(summary, file=sys.stderr)


def _game_and_profile(args, need_profile: bool = True):
    game = load_game(args.game)
    profile = load_profile(game, args.strategies) if need_profile else None
    return game, profile


def _resolved(args, game: NormalFormGame, profile=None, **extra) -> dict:
    cfg = {"command": args.command, "game": game.to_dict()}
    if profile is not None:
        cfg["profile"] = profile_to_dict(game, profile)["profile"]
    cfg.update(extra)
    return cfg


def _seeds(seed: int, samples: int) -> np.ndarray:
    if samples < 1:
        raise InputError("--samples must be at least 1")
    if seed < 0 or seed + samples > 2 ** 63:
        raise InputError("seed range must lie in [0, 2**63)")
    return np.arange(seed, seed + samples, dtype=np.uint64)


def _list(x) -> list:
    return [float(v) for v in np.asarray(x).ravel()]


# -- commands ---------------------------------------------------------------------

def cmd_simulate(args) -> int:
    game, profile = _game_and_profile(args)
    schedule = as_schedule(args.schedule)
    batch = rjs_batch(profile, game, schedule, _seeds(args.seed, args.samples), workers=args.workers)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            batch.to_csv(fh)
    report = {
        "config": _resolved(args, game, profile, schedule=str(schedule), samples=args.samples,
                            seed=args.seed, out=args.out),
        "seed": args.seed,
        "samples": args.samples,
        "utilities": _list(batch.mean_utilities()),
        "stderr_per_player": _list(batch.stderr()),
        "mean_depth": float(batch.depths.mean()),
        "max_depth": int(batch.depths.max()),
    }
    _emit(report, args.report, f"simulated {args.samples} playthroughs; mean utilities {report['utilities']}")
    return EXIT_OK


def _horizon(args):
    if args.variant == "finite":
        if args.T is None:
            raise InputError("--variant finite needs --T")
        return args.T
    if args.p is not None and args.schedule is not None:
        raise InputError("give --p or --schedule, not both")
    if args.p is not None:
        return as_schedule(args.p, sampling=args.variant != "omega-exact")
    if args.schedule is not None:
        return as_schedule(args.schedule)
    raise InputError(f"--variant {args.variant} needs --p or --schedule")


def cmd_repeated(args) -> int:
    game, profile = _game_and_profile(args)
    horizon = _horizon(args)
    cfg = _resolved(args, game, profile, variant=args.variant, seed=args.seed,
                    horizon=horizon if isinstance(horizon, int) else str(horizon))
    if args.variant == "omega-exact":
        p = horizon.tail if horizon.is_constant else horizon
        val = repeated.rep_omega_exact(profile, game, p, args.tol)
        report = {"config": cfg, "seed": args.seed, "samples": 0, "utilities": _list(val.utilities),
                  "tail_bound": val.tail_bound, "stderr_per_player": None}
    else:
        batch = repeated.rep_batch(args.variant, profile, game, horizon, _seeds(args.seed, args.samples),
                                   workers=args.workers)
        if args.out:
            with open(args.out, "w", newline="") as fh:
                batch.to_csv(fh)
        report = {"config": cfg, "seed": args.seed, "samples": args.samples,
                  "utilities": _list(batch.mean_utilities()), "tail_bound": 0.0,
                  "stderr_per_player": _list(batch.stderr())}
    _emit(report, args.report, f"{args.variant}: utilities {report['utilities']}")
    return EXIT_OK


def cmd_verify(args) -> int:
    game = load_game(args.game)
    check = args.check
    if check == "folk":
        return _folk(args, game)
    profile = load_profile(game, args.strategies)
    text = args.schedule or (VARIABLE_SCHEDULE if check == "variable-schedule" else None)
    if check == "finite-budget" and text is None and args.T is not None:
        text = f"budget:{args.T}"
    if text is None and args.p is not None:
        text = f"constant:{args.p}"
    if text is None:
        raise InputError(f"--check {check} needs --schedule")
    schedule = as_schedule(text, sampling=False)
    if check == "theorem1":
        reports = [analysis.check_equivalence("rjs", b, profile, game, schedule, args.tol)
                   for b in ("rep_omega", "rep_u")]
    elif check in ("lemma2", "variable-schedule"):
        reports = [analysis.check_equivalence("rjs", "rep_last", profile, game, schedule, args.tol,
                                              kind="realisation", depth_cap=args.depth_cap)]
    else:
        T = schedule.budget
        if T is None:
            raise InputError("--check finite-budget needs a budget:T schedule")
        if T < 1:
            raise InputError("finite-budget check needs T >= 1")
        reports = [analysis.check_equivalence("rjs", "rep_finite", profile, game, schedule, args.tol, T=T)]
    ok = all(r.verdict for r in reports)
    report = {
        "config": _resolved(args, game, profile, check=check, schedule=str(schedule), tol=args.tol,
                            depth_cap=args.depth_cap),
        "reports": [r.to_dict() for r in reports],
        "verdict": "pass" if ok else "fail",
    }
    gaps = [max(r.utility_gap) for r in reports]
    _emit(report, args.report, f"verify {check}: {'pass' if ok else 'fail'} (max utility gap {max(gaps):.3g})")
    return EXIT_OK if ok else EXIT_FAIL


def _folk(args, game: NormalFormGame) -> int:
    if args.target is None or args.p is None:
        raise InputError("folk check needs --target and --p")
    target = _floats(args.target)
    if len(target) != game.num_players:
        raise InputError(f"--target needs {game.num_players} values")
    res = analysis.verify_folk_point(game, target, args.p, tol=args.folk_tol, max_cycle_len=args.max_cycle_len)
    ok = res.constructible and res.is_nash
    report = {
        "config": _resolved(args, game, target=target, p=args.p, tol=args.folk_tol,
                            max_cycle_len=args.max_cycle_len),
        "result": res.to_dict(game),
        "verdict": "pass" if ok else "fail",
    }
    cyc = "none" if res.cycle is None else " ".join("(" + game.label(j) + ")" for j in res.cycle)
    _emit(report, args.report, f"folk point {target} at p={args.p}: cycle {cyc}; "
                               f"{'pass' if ok else 'fail'} {res.diagnostic}".rstrip())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_folk(args) -> int:
    return _folk(args, load_game(args.game))


def cmd_beliefs(args) -> int:
    if (args.p is None) == (args.schedule is None):
        raise InputError("give exactly one of --p or --schedule")
    if args.m < 0 or args.max_n < 0:
        raise InputError("--m and --max-n must be non-negative")
    schedule = as_schedule(args.p if args.p is not None else args.schedule, sampling=args.monte_carlo)
    table = beliefs.posterior_table(schedule, args.m, args.max_n)
    cfg = {"command": "beliefs", "schedule": str(schedule), "m": args.m, "max_n": args.max_n,
           "monte_carlo": args.monte_carlo}
    report = {"config": cfg, "analytic": _list(table)}
    est = None
    if args.monte_carlo:
        game = load_game(args.game)
        profile = load_profile(game, args.strategies) if args.strategies else _grim_default(game)
        observed = None
        if args.observed is not None:
            observed = [tuple(game.action_index(i, a) for i, a in enumerate(r.split(",")))
                        for r in filter(None, args.observed.split(";"))]
        est = beliefs.belief_monte_carlo_check(profile, game, schedule, args.m, observed, args.samples,
                                               args.seed, max_n=args.max_n, workers=args.workers)
        cfg.update(_resolved(args, game, profile, samples=args.samples, seed=args.seed, observed=args.observed))
        report["monte_carlo"] = est.to_dict()
    if args.json:
        _emit(report, args.report, f"posterior table for m={args.m}")
        return EXIT_OK
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    head = f"{'n':>5} {'posterior':>12}"
    if est is not None:
        head += f" {'empirical':>12} {'count':>8} {'z':>8}"
    print(f"# schedule {schedule}, m = {args.m}")
    print(head)
    for k, q in enumerate(table):
        label = str(k) if k <= args.max_n else f">{args.max_n}"
        line = f"{label:>5} {q:12.6g}"
        if est is not None:
            line += f" {est.probs[k]:12.6g} {int(est.counts[k]):8d} {est.z_scores[k]:8.3f}"
        print(line)
    if est is not None:
        print(f"# {est.matches} matching awakenings in {est.samples} playthroughs {est.diagnostic}".rstrip())
    return EXIT_OK


def _grim_default(game: NormalFormGame):
    from .config import profile_from_dict
    return profile_from_dict(game, {"type": "grim_trigger"})


def cmd_best_response(args) -> int:
    game, profile = _game_and_profile(args)
    if not 0 <= args.player < game.num_players:
        raise InputError(f"--player must be in [0, {game.num_players})")
    if (args.p is None) == (args.schedule is None):
        raise InputError("give exactly one of --p or --schedule")
    sched = as_schedule(args.p if args.p is not None else args.schedule, sampling=False)
    br = analysis.best_response(game, profile, args.player, sched, args.tol)
    current = analysis.exact_utility("rjs", profile, game, sched).utilities[args.player]
    report = {
        "config": _resolved(args, game, profile, player=args.player, schedule=str(sched), tol=args.tol),
        "value": br.value,
        "current_value": float(current),
        "gain": br.value - float(current),
        "bellman_residual": br.bellman_residual,
        "strategy": br.strategy.to_dict(game),
    }
    _emit(report, args.report, f"player {args.player}: best-response value {br.value:.12g} "
                               f"(profile gives {current:.12g})")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rjs", description="Recursive joint simulation and repeated games.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, profile=True):
        p.add_argument("--game", default="pd", help="game JSON file or builtin name (pd, matching-pennies)")
        if profile:
            p.add_argument("--strategies", required=True, help="strategy profile JSON file")
        p.add_argument("--report", help="also write the JSON report here")

    def sampling(p):
        p.add_argument("--samples", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=None, help="worker threads (default $RJS_WORKERS or 1)")
        p.add_argument("--out", help="CSV file for per-sample records")

    p = sub.add_parser("simulate", help="sample RJS playthroughs")
    common(p)
    sampling(p)
    p.add_argument("--schedule", required=True, help="constant:P | budget:T | list:p0,p1,...,tail=P")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("repeated", help="sample or evaluate a repeated-game variant")
    common(p)
    sampling(p)
    p.add_argument("--variant", required=True, choices=["finite", "unknown", "last-only", "omega-exact"])
    p.add_argument("--p", type=float)
    p.add_argument("--schedule")
    p.add_argument("--T", type=int)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_repeated)

    p = sub.add_parser("verify", help="check an equivalence or folk-theorem claim")
    p.add_argument("--check", required=True,
                   choices=["theorem1", "lemma2", "folk", "finite-budget", "variable-schedule"])
    p.add_argument("--game", default="pd")
    p.add_argument("--strategies")
    p.add_argument("--report")
    p.add_argument("--schedule")
    p.add_argument("--T", type=int)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--depth-cap", type=int)
    p.add_argument("--target")
    p.add_argument("--p", type=float)
    p.add_argument("--folk-tol", type=float, default=0.01)
    p.add_argument("--max-cycle-len", type=int, default=8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("folk", help="construct and check a folk-theorem equilibrium")
    common(p, profile=False)
    p.add_argument("--target", required=True, help="comma-separated payoff vector")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--folk-tol", "--tol", dest="folk_tol", type=float, default=0.01)
    p.add_argument("--max-cycle-len", type=int, default=8)
    p.set_defaults(func=cmd_folk)

    p = sub.add_parser("beliefs", help="posterior over the number of levels above")
    p.add_argument("--p", type=float)
    p.add_argument("--schedule")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--max-n", type=int, default=10)
    p.add_argument("--monte-carlo", action="store_true")
    p.add_argument("--game", default="pd")
    p.add_argument("--strategies")
    p.add_argument("--observed", help="rounds below, e.g. 'C,C;D,C'")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--json", action="store_true", help="print the JSON report instead of a table")
    p.add_argument("--report")
    p.set_defaults(func=cmd_beliefs)

    p = sub.add_parser("best-response", help="optimal reply to the other players' FSMs")
    common(p)
    p.add_argument("--player", type=int, default=0)
    p.add_argument("--p", type=float)
    p.add_argument("--schedule")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_best_response)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "workers", 1) is None:
            args.workers = _default_workers()
        if getattr(args, "workers", 1) < 1:
            raise InputError("--workers must be at least 1")
        return args.func(args)
    except (InputError, ConfigError, ScheduleError, DepthCapExceeded, analysis.BranchBudgetExceeded,
            ValueError, TypeError) as exc:
        print(f"rjs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"rjs {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
