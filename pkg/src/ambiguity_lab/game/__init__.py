"""Ambiguity game: exact solver (``core``) and sweeps / simulation (``lab``)."""

from ambiguity_lab.game.core import (
    A,
    C,
    PROFILES,
    AmbiguityGame,
    DeviationSet,
    EquilibriumReport,
    MetaAction,
    PayoffMatrix,
    Regime,
    VoterUtility,
    analytic_regime,
    as_rational,
    canonical_game,
    contest_win_probabilities,
    lottery_expected_utility,
    payoff_matrix,
    pure_nash_equilibria,
    solve,
)
from ambiguity_lab.game.lab import PhaseRecord, SweepGrid, monte_carlo_check, phase_table, sweep_grid

__all__ = [
    "A", "C", "PROFILES", "AmbiguityGame", "DeviationSet", "EquilibriumReport", "MetaAction",
    "PayoffMatrix", "PhaseRecord", "Regime", "SweepGrid", "VoterUtility", "analytic_regime",
    "as_rational", "canonical_game", "contest_win_probabilities", "lottery_expected_utility",
    "monte_carlo_check", "payoff_matrix", "phase_table", "pure_nash_equilibria", "solve", "sweep_grid",
]
