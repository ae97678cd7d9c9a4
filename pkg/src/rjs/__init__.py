"""Recursive joint simulation of normal-form games, repeated-game variants and equilibrium checks."""

from .analysis import (EquivalenceReport, TerminalDistribution, best_response, check_equivalence, exact_utility,
                       min_discount_for_equilibrium, terminal_distribution, tv_histories, tv_outcomes, verify_equilibrium,
                       verify_folk_point)
from .beliefs import belief_monte_carlo_check, depth_posterior, depth_posterior_schedule, posterior_table
from .config import ConfigError, load_game, load_profile
from .games import (NormalFormGame, expected_utility, matching_pennies, maxmin_value, minmax_value,
                    prisoners_dilemma, random_game, verify_stage_nash)
from .repeated import (rep_batch, rep_finite_sample, rep_omega_exact, rep_omega_weighted_exact,
                       rep_unknown_lastonly_sample, rep_unknown_sample)
from .schedule import ScheduleError, SimulationSchedule
from .simulate import PlaythroughRecord, rjs_batch, rjs_sample, rjs_sample_voluntary, wrap_voluntary
from .strategies import (CallbackStrategy, FSMStrategy, constant_strategy, folk_cycle_profile, grim_trigger,
                         random_fsm, random_profile, stationary_strategy, strategy_response)

__all__ = [
    "NormalFormGame", "prisoners_dilemma", "matching_pennies", "random_game", "expected_utility",
    "maxmin_value", "minmax_value", "verify_stage_nash",
    "FSMStrategy", "CallbackStrategy", "constant_strategy", "stationary_strategy", "grim_trigger",
    "folk_cycle_profile", "random_fsm", "random_profile", "strategy_response",
    "SimulationSchedule", "ScheduleError",
    "PlaythroughRecord", "rjs_sample", "rjs_batch", "rjs_sample_voluntary", "wrap_voluntary",
    "rep_finite_sample", "rep_unknown_sample", "rep_unknown_lastonly_sample", "rep_batch",
    "rep_omega_exact", "rep_omega_weighted_exact",
    "TerminalDistribution", "EquivalenceReport", "terminal_distribution", "exact_utility", "check_equivalence",
    "tv_histories", "tv_outcomes",
    "best_response", "verify_equilibrium", "min_discount_for_equilibrium", "verify_folk_point",
    "depth_posterior", "depth_posterior_schedule", "belief_monte_carlo_check", "posterior_table",
    "load_game", "load_profile", "ConfigError",
]
