"""Strategy interface and catalog.

Strategies see only a :class:`~ipdtourney.engine.StrategyView`, the same
summary the original Fortran submissions received: opponent's last move, turn
number, both running scores, a uniform draw and their own last move.

Catalog ids are stable strings.  Parametrized entries embed the parameter
(``random_0.5``, ``gtft_0.25``), and an ``@label`` suffix makes a distinct
player with the same behaviour (``k92r_tft@clone``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .engine import C, D, Action, StrategyView

CATALOG_VERSION = "1"


class UnknownStrategyError(KeyError):
    def __init__(self, strategy_id: str):
        super().__init__(strategy_id)
        self.strategy_id = strategy_id

    def __str__(self) -> str:
        return f"unknown strategy id {self.strategy_id!r}"


class Strategy:
    """Base class. Subclasses override :meth:`next_action` and, if stateful, :meth:`reset`."""

    name = "Strategy"
    author = ""
    stochastic = False

    def __init__(self):
        self.id = ""

    def next_action(self, view: StrategyView) -> Action:
        raise NotImplementedError

    def reset(self) -> None:
        pass

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.id}>"


def tft_next(view: StrategyView) -> Action:
    return view.opponent_last


def random_next(p_cooperate: float, view: StrategyView) -> Action:
    return C if view.rand < p_cooperate else D


@dataclass
class ChampionState:
    icoop: int = 0


def champion_next(state: ChampionState, view: StrategyView) -> Action:
    """Champion with the per-match counter reset applied.

    Cooperates for ten turns, mirrors for fifteen, then defects only when the
    opponent just defected, its cooperation rate is below 0.6 and the draw
    exceeds that rate.  The turn-1 phantom cooperation is counted.
    """
    turn = view.turn
    if turn == 1:
        state.icoop = 0
    if view.opponent_last is C:
        state.icoop += 1
    if turn <= 10:
        return C
    if turn <= 25:
        return view.opponent_last
    coprat = state.icoop / turn
    if view.opponent_last is D and coprat < 0.6 and view.rand > coprat:
        return D
    return C


class TitForTat(Strategy):
    name = "Tit For Tat"
    author = "Anatol Rapoport"

    def next_action(self, view):
        return view.opponent_last


class Champion(Strategy):
    name = "Champion"
    author = "Danny C. Champion"
    stochastic = True

    def __init__(self):
        super().__init__()
        self.state = ChampionState()

    def next_action(self, view):
        return champion_next(self.state, view)

    def reset(self):
        self.state = ChampionState()


class UnpatchedChampion(Champion):
    """Champion without the turn-1 counter reset.

    The counter survives from one match to the next unless a fresh instance is
    built, so replaying a match on the same instance can change its moves.
    ``reset`` deliberately leaves the counter alone.
    """

    name = "Champion (unpatched)"

    def next_action(self, view):
        state = self.state
        if view.opponent_last is C:
            state.icoop += 1
        if view.turn <= 10:
            return C
        if view.turn <= 25:
            return view.opponent_last
        coprat = state.icoop / view.turn
        if view.opponent_last is D and coprat < 0.6 and view.rand > coprat:
            return D
        return C

    def reset(self):
        pass


class RandomPlayer(Strategy):
    name = "Random"

    def __init__(self, p_cooperate: float = 0.5):
        super().__init__()
        if not 0.0 <= p_cooperate <= 1.0:
            raise ValueError(f"p_cooperate must lie in [0, 1], got {p_cooperate!r}")
        self.p_cooperate = p_cooperate
        self.stochastic = 0.0 < p_cooperate < 1.0
        self.name = f"Random({p_cooperate:g})"

    def next_action(self, view):
        return C if view.rand < self.p_cooperate else D


class AllCooperate(Strategy):
    name = "All Cooperate"

    def next_action(self, view):
        return C


class AllDefect(Strategy):
    name = "All Defect"

    def next_action(self, view):
        return D


class Grudger(Strategy):
    name = "Grudger"

    def __init__(self):
        super().__init__()
        self.triggered = False

    def next_action(self, view):
        if view.opponent_last is D:
            self.triggered = True
        return D if self.triggered else C

    def reset(self):
        self.triggered = False


class TitForTwoTats(Strategy):
    name = "Tit For Two Tats"

    def __init__(self):
        super().__init__()
        self.streak = 0

    def next_action(self, view):
        if view.turn == 1:
            self.streak = 0
        self.streak = self.streak + 1 if view.opponent_last is D else 0
        return D if self.streak >= 2 else C

    def reset(self):
        self.streak = 0


class WinStayLoseShift(Strategy):
    # last payoff was T or R exactly when the opponent cooperated
    name = "Win-Stay Lose-Shift"

    def next_action(self, view):
        if view.opponent_last is C:
            return view.own_last
        return D if view.own_last is C else C


class GenerousTitForTat(Strategy):
    name = "Generous Tit For Tat"

    def __init__(self, generosity: float = 1 / 3):
        super().__init__()
        if not 0.0 <= generosity <= 1.0:
            raise ValueError(f"generosity must lie in [0, 1], got {generosity!r}")
        self.generosity = generosity
        self.stochastic = 0.0 < generosity < 1.0
        self.name = f"Generous Tit For Tat ({generosity:.3g})"

    def next_action(self, view):
        if view.opponent_last is C:
            return C
        return C if view.rand < self.generosity else D


def _param(arg: str | None, default: float) -> float:
    if arg is None:
        return default
    return float(arg)


# id prefix -> (factory taking the optional parameter string, takes_param)
_REGISTRY: dict[str, tuple[Callable[[str | None], Strategy], bool]] = {
    "k92r_tft": (lambda a: TitForTat(), False),
    "k61r_champion": (lambda a: Champion(), False),
    "k61r_champion_unpatched": (lambda a: UnpatchedChampion(), False),
    "random": (lambda a: RandomPlayer(_param(a, 0.5)), True),
    "all_c": (lambda a: AllCooperate(), False),
    "all_d": (lambda a: AllDefect(), False),
    "grudger": (lambda a: Grudger(), False),
    "tf2t": (lambda a: TitForTwoTats(), False),
    "wsls": (lambda a: WinStayLoseShift(), False),
    "gtft": (lambda a: GenerousTitForTat(_param(a, 1 / 3)), True),
}

# listed by list_strategies() and used by the preset; the unpatched Champion is opt-in
CATALOG_IDS = (
    "k92r_tft",
    "k61r_champion",
    "random_0.5",
    "all_c",
    "all_d",
    "grudger",
    "tf2t",
    "wsls",
    "gtft",
)


def _split(strategy_id: str) -> tuple[str, str | None]:
    base = strategy_id.split("@", 1)[0]
    if base in _REGISTRY:
        return base, None
    prefix, sep, arg = base.rpartition("_")
    if sep and prefix in _REGISTRY and _REGISTRY[prefix][1]:
        try:
            float(arg)
        except ValueError:
            raise UnknownStrategyError(strategy_id) from None
        return prefix, arg
    raise UnknownStrategyError(strategy_id)


def validate_id(strategy_id: str) -> None:
    """Raise :class:`UnknownStrategyError` unless ``strategy_id`` can be built."""
    make_strategy(strategy_id)


def make_strategy(strategy_id: str) -> Strategy:
    prefix, arg = _split(strategy_id)
    factory, _ = _REGISTRY[prefix]
    try:
        strategy = factory(arg)
    except ValueError as exc:
        raise UnknownStrategyError(strategy_id) from exc
    strategy.id = strategy_id
    return strategy


def is_stochastic(strategy_id: str) -> bool:
    return make_strategy(strategy_id).stochastic


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    name: str
    author: str
    stochastic: bool


def list_strategies(ids=CATALOG_IDS) -> list[CatalogEntry]:
    out = []
    for sid in ids:
        s = make_strategy(sid)
        out.append(CatalogEntry(sid, s.name, s.author, s.stochastic))
    return out
