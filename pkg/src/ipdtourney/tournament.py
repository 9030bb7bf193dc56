"""Round-robin tournaments, the interaction cache and sub-tournament enumeration."""

from __future__ import annotations

import hashlib
import io
import itertools
import json
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .engine import (
    DEFAULT_PAYOFFS,
    MatchConfig,
    PayoffMatrix,
    StrategyContractError,
    play_match,
)
from .strategies import CATALOG_IDS, make_strategy, validate_id

PRESET_LENGTHS = (63, 77, 151, 156, 308)
RANDOM_BASELINE_ID = "random_0.5"
WORKERS_ENV = "IPDTOURNEY_WORKERS"

# scores closer than this are ties, resolved by player order
TIE_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TournamentConfig:
    players: tuple[str, ...]
    lengths: tuple[int, ...] = PRESET_LENGTHS
    repetitions: int = 1
    include_self_matches: bool = True
    include_random_baseline: bool = True
    noise_prob: float = 0.0
    master_seed: int = 0
    payoffs: PayoffMatrix = DEFAULT_PAYOFFS

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "lengths", tuple(int(x) for x in self.lengths))
        if not self.players:
            raise ConfigError("players must be non-empty")
        if not all(isinstance(p, str) for p in self.players):
            raise ConfigError(f"player ids must be strings, got {list(self.players)}")
        dupes = sorted({p for p in self.players if self.players.count(p) > 1})
        if dupes:
            raise ConfigError(f"duplicate player ids: {', '.join(dupes)}")
        if not self.lengths or min(self.lengths) < 1:
            raise ConfigError(f"lengths must be non-empty positive integers, got {self.lengths}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ConfigError(f"noise_prob must lie in [0, 1], got {self.noise_prob}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        for p in self.players:
            validate_id(p)

    @property
    def field(self) -> tuple[str, ...]:
        """Players actually entered, random baseline appended when requested."""
        if self.include_random_baseline and RANDOM_BASELINE_ID not in self.players:
            return self.players + (RANDOM_BASELINE_ID,)
        return self.players

    def to_dict(self) -> dict:
        return {
            "players": list(self.players),
            "lengths": list(self.lengths),
            "repetitions": self.repetitions,
            "include_self_matches": self.include_self_matches,
            "include_random_baseline": self.include_random_baseline,
            "noise_prob": self.noise_prob,
            "master_seed": self.master_seed,
            "payoffs": dict(zip("trps", self.payoffs.as_tuple())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TournamentConfig":
        known = {"players", "lengths", "repetitions", "include_self_matches",
                 "include_random_baseline", "noise_prob", "master_seed", "payoffs"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        kw = dict(d)
        if "payoffs" in kw:
            pay = kw["payoffs"]
            try:
                kw["payoffs"] = PayoffMatrix(**pay) if isinstance(pay, dict) else PayoffMatrix(*pay)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad payoffs: {exc}") from None
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "TournamentConfig":
        d = self.to_dict()
        d["master_seed"] = seed
        return TournamentConfig.from_dict(d)


def preset(name: str = "axelrod-second-1980", **overrides) -> TournamentConfig:
    """Named configurations. ``axelrod-second-1980``: five fixed lengths, T,R,P,S = 5,3,1,0,
    self-play and a Random(0.5) baseline, over the whole catalog."""
    if name != "axelrod-second-1980":
        raise ConfigError(f"unknown preset {name!r}")
    base = dict(
        players=tuple(p for p in CATALOG_IDS if p != RANDOM_BASELINE_ID),
        lengths=PRESET_LENGTHS,
        repetitions=1,
        include_self_matches=True,
        include_random_baseline=True,
        noise_prob=0.0,
        master_seed=0,
        payoffs=DEFAULT_PAYOFFS,
    )
    base.update(overrides)
    return TournamentConfig(**base)


PRESET_N_RUNS = 100


# ---------------------------------------------------------------- scheduling

class ScheduledMatch(NamedTuple):
    i: int
    j: int
    length_index: int
    length: int
    repetition: int
    seed: int


def _player_key(strategy_id: str) -> int:
    return zlib.crc32(strategy_id.encode())


def derive_match_seed(master_seed: int, id_a: str, id_b: str, repetition: int,
                      length_index: int) -> int:
    """64-bit match seed from the master seed and the match coordinates.

    Keyed on player ids rather than positions so the same pairing gets the
    same seed in any sub-field.
    """
    ss = np.random.SeedSequence(
        master_seed,
        spawn_key=(_player_key(id_a), _player_key(id_b), repetition, length_index),
    )
    return int(ss.generate_state(1, np.uint64)[0])


def derive_run_seed(master_seed: int, run: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(0x52554E, run))
    return int(ss.generate_state(1, np.uint64)[0])


def build_schedule(config: TournamentConfig) -> list[ScheduledMatch]:
    players = config.field
    n = len(players)
    out = []
    for i in range(n):
        for j in range(i if config.include_self_matches else i + 1, n):
            for li, length in enumerate(config.lengths):
                for rep in range(config.repetitions):
                    seed = derive_match_seed(config.master_seed, players[i], players[j], rep, li)
                    out.append(ScheduledMatch(i, j, li, length, rep, seed))
    return out


def schedule_size(n_players: int, n_lengths: int, repetitions: int, self_matches: bool) -> int:
    return (math.comb(n_players, 2) + (n_players if self_matches else 0)) * n_lengths * repetitions


# ---------------------------------------------------------------- execution

def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return 1
    if raw.strip().lower() == "max":
        return os.cpu_count() or 1
    n = int(raw)
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1 or 'max', got {raw!r}")
    return n


class MatchFailure(RuntimeError):
    def __init__(self, message: str, coordinates: dict):
        super().__init__(message)
        self.coordinates = coordinates


def _play_chunk(args) -> list[tuple[int, int, int, int]]:
    players, chunk, noise, payoffs = args
    out = []
    for m in chunk:
        a = make_strategy(players[m.i])
        b = make_strategy(players[m.j])
        try:
            r = play_match(a, b, MatchConfig(m.length, noise, m.seed), payoffs)
        except StrategyContractError as exc:
            coords = {"player_a": players[m.i], "player_b": players[m.j],
                      "length": m.length, "repetition": m.repetition, "seed": m.seed}
            raise MatchFailure(f"{exc} (match {coords})", coords) from exc
        out.append((r.score_a, r.score_b, r.coop_a, r.coop_b))
    return out


def play_schedule(config: TournamentConfig, schedule: Sequence[ScheduledMatch],
                  workers: int | None = None) -> list[tuple[int, int, int, int]]:
    """Play every match; results come back in schedule order whatever the worker count."""
    workers = default_workers() if workers is None else workers
    players = config.field
    args = (players, schedule, config.noise_prob, config.payoffs)
    if workers <= 1 or len(schedule) < 2:
        return _play_chunk(args)
    n_chunks = min(len(schedule), workers * 8)
    bounds = np.linspace(0, len(schedule), n_chunks + 1).astype(int)
    tasks = [(players, schedule[lo:hi], config.noise_prob, config.payoffs)
             for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_play_chunk, tasks))
    return [r for part in parts for r in part]


# ---------------------------------------------------------------- results

@dataclass
class InteractionCache:
    """Mean per-turn payoff and cooperation rate for every ordered pair.

    ``mean_payoff[i, j]`` is what ``players[i]`` earned per turn against
    ``players[j]``, averaged over all lengths and repetitions. The diagonal is
    NaN unless self-matches were played; a self-match averages both seats.
    """

    players: tuple[str, ...]
    mean_payoff: np.ndarray
    mean_coop: np.ndarray
    include_self: bool
    fingerprint: str = ""

    def index(self, strategy_id: str) -> int:
        return self.players.index(strategy_id)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# ipdtourney interaction cache v1\n")
        buf.write(f"# fingerprint: {self.fingerprint}\n")
        buf.write(f"# self_matches: {'true' if self.include_self else 'false'}\n")
        buf.write(f"# players: {','.join(self.players)}\n")
        buf.write("player_i,player_j,mean_payoff,mean_coop\n")
        n = len(self.players)
        for i in range(n):
            for j in range(n):
                if i == j and not self.include_self:
                    continue
                buf.write(f"{self.players[i]},{self.players[j]},"
                          f"{float(self.mean_payoff[i, j])!r},{float(self.mean_coop[i, j])!r}\n")
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "InteractionCache":
        header = {}
        lines = text.splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                header[key.strip()] = value.strip()
            elif line:
                body.append(line)
        if "players" not in header or not body or body[0] != "player_i,player_j,mean_payoff,mean_coop":
            raise ValueError("not an interaction cache file")
        players = tuple(header["players"].split(","))
        include_self = header.get("self_matches") == "true"
        pos = {p: k for k, p in enumerate(players)}
        n = len(players)
        pay = np.full((n, n), np.nan)
        coop = np.full((n, n), np.nan)
        for row in body[1:]:
            a, b, p, c = row.split(",")
            pay[pos[a], pos[b]] = float(p)
            coop[pos[a], pos[b]] = float(c)
        return cls(players, pay, coop, include_self, header.get("fingerprint", ""))

    @classmethod
    def load(cls, path) -> "InteractionCache":
        with open(path) as fh:
            return cls.from_csv(fh.read())


def build_cache(config: TournamentConfig, schedule: Sequence[ScheduledMatch],
                results: Sequence[tuple[int, int, int, int]]) -> InteractionCache:
    players = config.field
    n = len(players)
    pay_sum = [[0.0] * n for _ in range(n)]
    coop_sum = [[0.0] * n for _ in range(n)]
    count = [[0] * n for _ in range(n)]
    for m, (sa, sb, ca, cb) in zip(schedule, results):
        i, j, L = m.i, m.j, m.length
        if i == j:
            pay_sum[i][i] += (sa + sb) / (2 * L)
            coop_sum[i][i] += (ca + cb) / (2 * L)
            count[i][i] += 1
        else:
            pay_sum[i][j] += sa / L
            pay_sum[j][i] += sb / L
            coop_sum[i][j] += ca / L
            coop_sum[j][i] += cb / L
            count[i][j] += 1
            count[j][i] += 1
    pay = np.full((n, n), np.nan)
    coop = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(n):
            if count[i][j]:
                pay[i, j] = pay_sum[i][j] / count[i][j]
                coop[i, j] = coop_sum[i][j] / count[i][j]
    return InteractionCache(players, pay, coop, config.include_self_matches, config.fingerprint())


def player_scores(mean_payoff: np.ndarray, include_self: bool) -> np.ndarray:
    """Mean over opponents of the per-turn payoff; exactly rounded so the
    result does not depend on the order players are listed in."""
    n = mean_payoff.shape[0]
    out = np.empty(n)
    for i in range(n):
        row = [mean_payoff[i, j] for j in range(n) if include_self or j != i]
        if not row:
            raise ValueError("a lone player without self-matches has no score")
        out[i] = math.fsum(row) / len(row)
    return out


def rank_order(scores: Sequence[float], tol: float = TIE_TOL) -> list[int]:
    """Indices from best to worst; scores within ``tol`` of the best of their
    group tie and keep their listed order."""
    scores = np.asarray(scores, dtype=float)
    desc = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    out: list[int] = []
    k = 0
    while k < len(desc):
        top = scores[desc[k]]
        group = [desc[k]]
        k += 1
        while k < len(desc) and top - scores[desc[k]] <= tol:
            group.append(desc[k])
            k += 1
        out.extend(sorted(group))
    return out


def winner_index(scores: Sequence[float], tol: float = TIE_TOL) -> int:
    scores = np.asarray(scores, dtype=float)
    return int(np.flatnonzero(scores >= scores.max() - tol)[0])


@dataclass
class RankingReport:
    players: tuple[str, ...]
    mean_scores: np.ndarray
    ranks: np.ndarray
    winners: list[str] = field(default_factory=list)
    win_proportion: dict[str, float] = field(default_factory=dict)
    run_scores: np.ndarray | None = None  # (n_runs, n_players) when repeated
    cache: InteractionCache | None = None

    @property
    def order(self) -> list[int]:
        return [int(i) for i in np.argsort(self.ranks, kind="stable")]

    @property
    def winner(self) -> str:
        return self.players[self.order[0]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("rank,strategy,mean_score,win_proportion\n")
        for i in self.order:
            p = self.players[i]
            buf.write(f"{int(self.ranks[i])},{p},{float(self.mean_scores[i])!r},"
                      f"{float(self.win_proportion.get(p, 0.0))!r}\n")
        return buf.getvalue()

    @staticmethod
    def read_csv(text: str) -> dict[str, int]:
        """``strategy -> rank`` from a rankings file."""
        rows = text.strip().splitlines()
        if not rows or not rows[0].startswith("rank,strategy"):
            raise ValueError("not a rankings file")
        out = {}
        for row in rows[1:]:
            rank, strategy = row.split(",")[:2]
            out[strategy] = int(rank)
        return out


def _report(players, scores, winners=None, run_scores=None) -> RankingReport:
    order = rank_order(scores)
    ranks = np.empty(len(players), dtype=int)
    ranks[order] = np.arange(1, len(players) + 1)
    if winners is None:
        winners = [players[order[0]]]
    counts = {p: 0 for p in players}
    for w in winners:
        counts[w] += 1
    prop = {p: counts[p] / len(winners) for p in players}
    return RankingReport(tuple(players), np.asarray(scores, float), ranks, list(winners), prop, run_scores)


def run_tournament(config: TournamentConfig, workers: int | None = None
                   ) -> tuple[InteractionCache, RankingReport]:
    schedule = build_schedule(config)
    results = play_schedule(config, schedule, workers)
    cache = build_cache(config, schedule, results)
    scores = player_scores(cache.mean_payoff, cache.include_self)
    return cache, _report(cache.players, scores)


def repeat_tournament(config: TournamentConfig, n_runs: int, workers: int | None = None
                      ) -> RankingReport:
    """Independent tournaments with seeds derived from ``config.master_seed``.

    The returned ranking is by mean score across runs; ``winners`` lists each
    run's winner, ``run_scores`` holds every run's per-player scores and
    ``cache`` the interaction means averaged over runs.
    """
    if n_runs < 1:
        raise ConfigError(f"n_runs must be >= 1, got {n_runs}")
    players = config.field
    run_scores = np.empty((n_runs, len(players)))
    winners = []
    pay = np.zeros((len(players), len(players)))
    coop = np.zeros_like(pay)
    for r in range(n_runs):
        cache, report = run_tournament(config.with_seed(derive_run_seed(config.master_seed, r)), workers)
        run_scores[r] = report.mean_scores
        winners.append(report.winner)
        pay += cache.mean_payoff
        coop += cache.mean_coop
    mean = run_scores.mean(axis=0)
    report = _report(players, mean, winners, run_scores)
    report.cache = InteractionCache(players, pay / n_runs, coop / n_runs,
                                    config.include_self_matches, config.fingerprint())
    return report


# ---------------------------------------------------------------- sub-tournaments

def _check_indices(cache: InteractionCache, idx: Iterable[int]) -> list[int]:
    idx = [int(i) for i in idx]
    n = len(cache.players)
    bad = [i for i in idx if not 0 <= i < n]
    if bad:
        raise IndexError(f"player indices {bad} outside cache of {n} players")
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate player indices in {idx}")
    return idx


def subset_scores(cache: InteractionCache, subset: Sequence[int]) -> np.ndarray:
    """Tournament scores of ``subset`` computed from cached interactions alone."""
    idx = _check_indices(cache, subset)
    if not idx:
        raise ValueError("subset must be non-empty")
    sub = cache.mean_payoff[np.ix_(idx, idx)]
    return player_scores(sub, cache.include_self)


def subset_ranking(cache: InteractionCache, subset: Sequence[int]) -> RankingReport:
    idx = _check_indices(cache, subset)
    return _report([cache.players[i] for i in idx], subset_scores(cache, idx))


@dataclass
class SubsetTally:
    players: tuple[str, ...]
    k: int
    visited: int
    wins: np.ndarray  # indexed like cache.players

    def as_dict(self) -> dict[str, int]:
        return {p: int(w) for p, w in zip(self.players, self.wins) if w}

    def proportions(self) -> dict[str, float]:
        return {p: int(w) / self.visited for p, w in zip(self.players, self.wins) if w}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("strategy,k,wins,tournaments,win_proportion\n")
        for p, w in zip(self.players, self.wins):
            if w:
                buf.write(f"{p},{self.k},{int(w)},{self.visited},{int(w) / self.visited!r}\n")
        return buf.getvalue()


_ENUM_STATE: dict = {}
_CHUNK_ROWS = 1 << 16


def _enum_init(state: dict) -> None:
    _ENUM_STATE.clear()
    _ENUM_STATE.update(state)


def _combos_with_first(first: int, n_pool: int, k: int) -> np.ndarray:
    rest = range(first + 1, n_pool)
    if k == 1:
        return np.array([[first]], dtype=np.int64)
    count = math.comb(len(rest), k - 1)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(rest, k - 1)),
                       dtype=np.int64, count=count * (k - 1))
    out = np.empty((count, k), dtype=np.int64)
    out[:, 0] = first
    out[:, 1:] = flat.reshape(count, k - 1)
    return out


def _tally_rows(combos: np.ndarray, st: dict) -> np.ndarray:
    """Winner (cache index) of the tournament base + pool[combo] for each row."""
    base_idx = st["base_idx"]
    pool_idx = st["pool_idx"]
    base_vs_pool = st["base_vs_pool"]  # (P, b): base player's payoff vs pool member
    pool_vs_base = st["pool_vs_base"]  # (P,): pool member's summed payoff vs base
    pool_pool = st["pool_pool"]  # (P, P)
    base_part = st["base_part"]  # (b,)
    denom = st["denom"]
    self_on = st["include_self"]
    rows, k = combos.shape
    b = len(base_idx)

    cols = []
    if b:
        base_tot = np.broadcast_to(base_part, (rows, b)).copy()
        for m in range(k):
            base_tot += base_vs_pool[combos[:, m]]
        cols.append(base_tot)
    added = np.empty((rows, k))
    for m in range(k):
        tot = pool_vs_base[combos[:, m]].copy()
        for q in range(k):
            if q != m or self_on:
                tot += pool_pool[combos[:, m], combos[:, q]]
        added[:, m] = tot
    cols.append(added)
    means = np.concatenate(cols, axis=1) / denom
    who = np.concatenate(
        [np.broadcast_to(base_idx, (rows, b)), pool_idx[combos]], axis=1)
    best = means.max(axis=1, keepdims=True)
    cand = np.where(means >= best - TIE_TOL, who, np.iinfo(np.int64).max)
    return cand.min(axis=1)


def _tally_first(first: int) -> tuple[int, np.ndarray]:
    st = _ENUM_STATE
    combos = _combos_with_first(first, len(st["pool_idx"]), st["k"])
    wins = np.zeros(st["n_players"], dtype=np.int64)
    for lo in range(0, len(combos), _CHUNK_ROWS):
        winners = _tally_rows(combos[lo:lo + _CHUNK_ROWS], st)
        wins += np.bincount(winners, minlength=st["n_players"])
    return len(combos), wins


def enumerate_added_subsets(cache: InteractionCache, base: Sequence[int], pool: Sequence[int],
                            k: int, workers: int | None = None) -> SubsetTally:
    """Tally the winner of every tournament ``base + S`` for ``S`` a k-subset of ``pool``.

    Subsets are partitioned by their lowest pool member; partitions run in
    parallel and their tallies are summed, so the result is independent of
    the worker count.
    """
    base = _check_indices(cache, base)
    pool = _check_indices(cache, pool)
    if set(base) & set(pool):
        raise ValueError("base and pool must be disjoint")
    if not 1 <= k <= len(pool):
        raise ValueError(f"k must lie in [1, {len(pool)}], got {k}")
    if not cache.include_self and len(base) + k < 2:
        raise ValueError("without self-matches a tournament needs at least two players")
    M = cache.mean_payoff
    b_idx = np.array(base, dtype=np.int64)
    p_idx = np.array(pool, dtype=np.int64)
    bb = M[np.ix_(b_idx, b_idx)].copy()
    if not cache.include_self:
        np.fill_diagonal(bb, 0.0)
    st = dict(
        k=k,
        n_players=len(cache.players),
        include_self=cache.include_self,
        base_idx=b_idx,
        pool_idx=p_idx,
        base_part=bb.sum(axis=1) if len(base) else np.zeros(0),
        base_vs_pool=np.ascontiguousarray(M[np.ix_(b_idx, p_idx)].T),
        pool_vs_base=M[np.ix_(p_idx, b_idx)].sum(axis=1) if len(base) else np.zeros(len(pool)),
        pool_pool=np.ascontiguousarray(M[np.ix_(p_idx, p_idx)]),
        denom=float(len(base) + k - (0 if cache.include_self else 1)),
    )
    firsts = range(len(pool) - k + 1)
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        _enum_init(st)
        parts = [_tally_first(f) for f in firsts]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_enum_init,
                                 initargs=(st,)) as ex:
            parts = list(ex.map(_tally_first, firsts))
    wins = np.zeros(len(cache.players), dtype=np.int64)
    visited = 0
    for n, w in parts:
        visited += n
        wins += w
    return SubsetTally(cache.players, k, visited, wins)
