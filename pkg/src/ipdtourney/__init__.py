"""Deterministic iterated prisoner's dilemma tournaments.

Modules:

- :mod:`ipdtourney.engine` -- actions, payoffs, noise and the match loop
- :mod:`ipdtourney.strategies` -- the strategy catalog
- :mod:`ipdtourney.tournament` -- round robins, interaction caches, sub-tournaments
- :mod:`ipdtourney.analysis` -- cooperation matrices and regression diagnostics
- :mod:`ipdtourney.cli` -- batch front end
"""

__version__ = "0.1.0"

from .engine import (
    C,
    D,
    DEFAULT_PAYOFFS,
    Action,
    MatchConfig,
    MatchResult,
    PayoffMatrix,
    StrategyView,
    apply_noise,
    payoff_pair,
    play_match,
    sample_geometric_lengths,
)
from .strategies import list_strategies, make_strategy
from .tournament import (
    InteractionCache,
    RankingReport,
    TournamentConfig,
    build_schedule,
    enumerate_added_subsets,
    preset,
    repeat_tournament,
    run_tournament,
    subset_scores,
)
