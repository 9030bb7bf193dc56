"""Match mechanics: actions, payoffs, noise, match lengths and the turn loop."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np


class Action(enum.IntEnum):
    """A single move. Serializes as 0 (cooperate) or 1 (defect)."""

    COOPERATE = 0
    DEFECT = 1

    @property
    def flipped(self) -> "Action":
        return _FLIP[self]

    def __str__(self) -> str:
        return "C" if self is Action.COOPERATE else "D"


C = Action.COOPERATE
D = Action.DEFECT
_FLIP = (D, C)


class StrategyView(NamedTuple):
    """What a strategy sees at the start of a turn.

    Field order follows the classic Fortran argument list ``(J, M, K, L, R, JA)``.
    On turn 1 both ``opponent_last`` and ``own_last`` are Cooperate.
    """

    opponent_last: Action
    turn: int
    own_score: int
    opponent_score: int
    rand: float
    own_last: Action


@dataclass(frozen=True)
class PayoffMatrix:
    """Per-turn payoffs: temptation, reward, punishment, sucker."""

    t: int = 5
    r: int = 3
    p: int = 1
    s: int = 0

    def __post_init__(self):
        if not (self.t > self.r > self.p > self.s):
            raise ValueError(f"payoffs must satisfy T > R > P > S, got {self}")
        if not (2 * self.r > self.t + self.s):
            raise ValueError(f"payoffs must satisfy 2R > T + S, got {self}")

    def table(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Joint payoffs indexed ``[a][b]`` with actions as ints."""
        return (
            ((self.r, self.r), (self.s, self.t)),
            ((self.t, self.s), (self.p, self.p)),
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.t, self.r, self.p, self.s)


DEFAULT_PAYOFFS = PayoffMatrix()


@dataclass(frozen=True)
class MatchConfig:
    length: int
    noise_prob: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if int(self.length) != self.length or self.length < 1:
            raise ValueError(f"match length must be a positive integer, got {self.length!r}")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ValueError(f"noise_prob must lie in [0, 1], got {self.noise_prob!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class MatchResult:
    moves_a: tuple[Action, ...]
    moves_b: tuple[Action, ...]
    score_a: int
    score_b: int
    coop_a: int
    coop_b: int
    length: int

    @property
    def mean_payoff_a(self) -> float:
        return self.score_a / self.length

    @property
    def mean_payoff_b(self) -> float:
        return self.score_b / self.length

    @property
    def coop_rate_a(self) -> float:
        return self.coop_a / self.length

    @property
    def coop_rate_b(self) -> float:
        return self.coop_b / self.length


class StrategyContractError(RuntimeError):
    """A strategy returned something other than an action."""


def payoff_pair(a: Action, b: Action, m: PayoffMatrix = DEFAULT_PAYOFFS) -> tuple[int, int]:
    return m.table()[a][b]


def apply_noise(intended: Action, noise_prob: float, draw: float) -> Action:
    """Flip ``intended`` iff ``draw < noise_prob``."""
    if draw < noise_prob:
        return _FLIP[intended]
    return Action(intended)


def sample_geometric_lengths(end_prob: float, count: int, seed: int) -> np.ndarray:
    """Draw match lengths with a constant per-turn ending probability.

    ``P(L = k) = (1 - end_prob) ** (k - 1) * end_prob`` for ``k >= 1``.
    """
    if not 0.0 < end_prob <= 1.0:
        raise ValueError(f"end_prob must lie in (0, 1], got {end_prob!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    rng = np.random.default_rng(seed)
    return rng.geometric(end_prob, size=count).astype(np.int64)


def geometric_median(end_prob: float) -> int:
    """Smallest k with ``P(L <= k) >= 1/2``."""
    if end_prob == 1.0:
        return 1
    return math.ceil(math.log(0.5) / math.log1p(-end_prob))


def match_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Disjoint generators for strategy draws and noise draws of one match."""
    strategy_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(strategy_ss), np.random.default_rng(noise_ss)


def play_match(strategy_a, strategy_b, config: MatchConfig,
               payoffs: PayoffMatrix = DEFAULT_PAYOFFS) -> MatchResult:
    """Play one match; both strategies must be freshly reset.

    Each player gets one uniform draw per turn (exposed as ``view.rand``) and
    one independent noise draw per turn. History holds played (post-noise)
    actions only.
    """
    n = config.length
    strategy_rng, noise_rng = match_streams(config.seed)
    rand_a = strategy_rng.random(n).tolist()
    rand_b = strategy_rng.random(n).tolist()
    noise = config.noise_prob
    if noise > 0.0:
        flip_a = (noise_rng.random(n) < noise).tolist()
        flip_b = (noise_rng.random(n) < noise).tolist()
    else:
        flip_a = flip_b = None

    table = payoffs.table()
    next_a = strategy_a.next_action
    next_b = strategy_b.next_action
    view = StrategyView
    moves_a: list[Action] = []
    moves_b: list[Action] = []
    last_a = last_b = C
    score_a = score_b = 0
    coop_a = coop_b = 0

    for t in range(n):
        act_a = next_a(view(last_b, t + 1, score_a, score_b, rand_a[t], last_a))
        act_b = next_b(view(last_a, t + 1, score_b, score_a, rand_b[t], last_b))
        if act_a is not C and act_a is not D:
            act_a = _checked(act_a, strategy_a, t + 1)
        if act_b is not C and act_b is not D:
            act_b = _checked(act_b, strategy_b, t + 1)
        if flip_a is not None:
            if flip_a[t]:
                act_a = _FLIP[act_a]
            if flip_b[t]:
                act_b = _FLIP[act_b]
        pa, pb = table[act_a][act_b]
        score_a += pa
        score_b += pb
        if act_a is C:
            coop_a += 1
        if act_b is C:
            coop_b += 1
        moves_a.append(act_a)
        moves_b.append(act_b)
        last_a, last_b = act_a, act_b

    return MatchResult(tuple(moves_a), tuple(moves_b), score_a, score_b, coop_a, coop_b, n)


def _checked(value, strategy, turn: int) -> Action:
    # plain 0/1 ints are tolerated; anything else is a broken strategy
    if type(value) in (int, np.int64) and value in (0, 1):
        return Action(int(value))
    name = getattr(strategy, "id", type(strategy).__name__)
    raise StrategyContractError(
        f"strategy {name!r} returned {value!r} on turn {turn}; expected 0/1 or an Action"
    )


def invert_moves(moves: Sequence[Action]) -> tuple[Action, ...]:
    return tuple(_FLIP[a] for a in moves)
