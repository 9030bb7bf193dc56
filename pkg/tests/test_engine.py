import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ipdtourney.engine import (
    C,
    D,
    DEFAULT_PAYOFFS,
    Action,
    MatchConfig,
    PayoffMatrix,
    StrategyContractError,
    apply_noise,
    geometric_median,
    invert_moves,
    payoff_pair,
    play_match,
    sample_geometric_lengths,
)
from ipdtourney.strategies import CATALOG_IDS, make_strategy


def test_action_serialization_round_trips():
    assert [int(a) for a in Action] == [0, 1]
    assert Action(0) is C and Action(1) is D
    assert C.flipped is D and D.flipped is C


@pytest.mark.parametrize("a, b, expected", [
    (C, C, (3, 3)),
    (D, C, (5, 0)),
    (C, D, (0, 5)),
    (D, D, (1, 1)),
])
def test_payoff_pair_default(a, b, expected):
    assert payoff_pair(a, b, DEFAULT_PAYOFFS) == expected


@pytest.mark.parametrize("t, r, p, s", [(3, 5, 1, 0), (5, 3, 3, 0), (5, 2, 1, 0), (6, 3, 1, 0.5)])
def test_payoff_matrix_rejects_non_dilemmas(t, r, p, s):
    # 6,3,1,0.5 violates nothing ordinal but 2R = 6 < T + S = 6.5
    with pytest.raises(ValueError):
        PayoffMatrix(t, r, p, s)


def test_apply_noise_examples():
    assert apply_noise(C, 0.0, 0.0) is C
    assert apply_noise(C, 1.0, 0.5) is D
    assert apply_noise(D, 0.01, 0.005) is C
    assert apply_noise(D, 0.01, 0.01) is D


@given(st.sampled_from([C, D]), st.floats(0, 1), st.floats(0, 1, exclude_max=True))
def test_apply_noise_flips_iff_draw_below_prob(a, p, u):
    assert (apply_noise(a, p, u) != a) == (u < p)


@pytest.mark.parametrize("bad", [dict(length=0), dict(length=5, noise_prob=1.5),
                                 dict(length=5, noise_prob=-0.1), dict(length=5, seed=-1),
                                 dict(length=5, seed=2**64)])
def test_match_config_validation(bad):
    with pytest.raises(ValueError):
        MatchConfig(**bad)


# ------------------------------------------------------------ geometric lengths

def test_geometric_certain_termination():
    assert (sample_geometric_lengths(1.0, 1000, seed=3) == 1).all()


def test_geometric_rejects_zero_end_prob():
    with pytest.raises(ValueError):
        sample_geometric_lengths(0.0, 10, seed=0)
    with pytest.raises(ValueError):
        sample_geometric_lengths(0.5, 0, seed=0)


def test_geometric_analytic_median_is_200():
    # smallest k with 1 - (1-p)^k >= 1/2, by direct scan
    p = 0.00346
    k = next(k for k in range(1, 10_000) if 1 - (1 - p) ** k >= 0.5)
    assert k == 200 == geometric_median(p)


def test_geometric_mean_at_half():
    x = sample_geometric_lengths(0.5, 200_000, seed=11)
    assert abs(x.mean() - 2.0) < 0.05


def test_geometric_sampler_is_deterministic():
    a = sample_geometric_lengths(0.00346, 1000, seed=99)
    b = sample_geometric_lengths(0.00346, 1000, seed=99)
    assert np.array_equal(a, b)


def test_geometric_ks_against_analytic_cdf():
    p = 0.00346
    x = sample_geometric_lengths(p, 100_000, seed=5)
    # discrete KS: sup over support points of |F_n(k) - F(k)|
    ks = np.arange(1, x.max() + 1)
    emp = np.searchsorted(np.sort(x), ks, side="right") / x.size
    ana = 1 - (1 - p) ** ks
    d = np.abs(emp - ana).max()
    # asymptotic critical value at alpha = 0.001 (conservative for discrete laws)
    crit = math.sqrt(-0.5 * math.log(0.001 / 2)) / math.sqrt(x.size)
    assert d < crit


def test_geometric_sample_median_in_sampling_band():
    p = 0.00346
    x = sample_geometric_lengths(p, 100_000, seed=0)
    # empirical CDF sd is 0.0016 at n = 1e5; +-0.005 is about 3.2 sd
    lo, hi = stats.geom.ppf([0.495, 0.505], p)
    assert lo <= np.median(x) <= hi


# ------------------------------------------------------------ play_match

def test_tft_vs_tft_mutual_cooperation():
    r = play_match(make_strategy("k92r_tft"), make_strategy("k92r_tft"), MatchConfig(10))
    assert (r.score_a, r.score_b, r.coop_a, r.coop_b) == (30, 30, 10, 10)


def test_tft_vs_all_defect_trace():
    r = play_match(make_strategy("k92r_tft"), make_strategy("all_d"), MatchConfig(5))
    assert r.moves_a == (C, D, D, D, D)
    assert r.moves_b == (D,) * 5
    assert (r.score_a, r.score_b) == (4, 9)


def test_all_cooperate_63_turns():
    r = play_match(make_strategy("all_c"), make_strategy("all_c"), MatchConfig(63))
    assert (r.score_a, r.score_b) == (189, 189)


class _Recorder:
    id = "recorder"

    def __init__(self, moves):
        self.moves = list(moves)
        self.views = []

    def next_action(self, view):
        self.views.append(view)
        return self.moves[view.turn - 1]


def test_views_carry_running_scores_and_phantom_first_turn():
    a = _Recorder([C, D, D, C])
    b = _Recorder([C, C, D, D])
    play_match(a, b, MatchConfig(4))
    first = a.views[0]
    assert (first.turn, first.opponent_last, first.own_last, first.own_score, first.opponent_score) == (1, C, C, 0, 0)
    # after turns (C,C) (D,C) (D,D): a has 3+5+1, b has 3+0+1
    assert [(v.own_score, v.opponent_score) for v in a.views] == [(0, 0), (3, 3), (8, 3), (9, 4)]
    assert [(v.own_score, v.opponent_score) for v in b.views] == [(0, 0), (3, 3), (3, 8), (4, 9)]
    assert [v.opponent_last for v in b.views] == [C, C, D, D]
    assert all(0.0 <= v.rand < 1.0 for v in a.views + b.views)


def test_history_records_played_moves_under_noise():
    a = _Recorder([C] * 200)
    b = _Recorder([C] * 200)
    r = play_match(a, b, MatchConfig(200, noise_prob=0.2, seed=7))
    assert [v.own_last for v in a.views[1:]] == list(r.moves_a[:-1])
    assert [v.opponent_last for v in a.views[1:]] == list(r.moves_b[:-1])
    assert D in r.moves_a


def test_contract_violation_is_reported():
    bad = _Recorder(["x"])
    with pytest.raises(StrategyContractError, match="recorder"):
        play_match(bad, make_strategy("all_c"), MatchConfig(1))


def test_plain_ints_are_accepted():
    r = play_match(_Recorder([1, 0]), _Recorder([0, 0]), MatchConfig(2))
    assert r.moves_a == (D, C)


ids = st.sampled_from(CATALOG_IDS)


@settings(max_examples=60, deadline=None)
@given(ids, ids, st.integers(1, 120), st.floats(0, 0.3), st.integers(0, 2**64 - 1))
def test_match_invariants(a, b, length, noise, seed):
    cfg = MatchConfig(length, noise, seed)
    r = play_match(make_strategy(a), make_strategy(b), cfg)
    again = play_match(make_strategy(a), make_strategy(b), cfg)
    assert r == again
    assert len(r.moves_a) == len(r.moves_b) == r.length == length
    cells = {(3, 3), (5, 0), (0, 5), (1, 1)}
    pairs = [payoff_pair(x, y) for x, y in zip(r.moves_a, r.moves_b)]
    assert set(pairs) <= cells
    assert r.score_a == sum(p for p, _ in pairs) and r.score_b == sum(q for _, q in pairs)
    assert r.coop_a == r.moves_a.count(C) and r.coop_b == r.moves_b.count(C)


def _reference_match(a, b, length, rand_a, rand_b):
    """Straightforward noiseless loop kept separate from the engine."""
    from ipdtourney.engine import StrategyView
    ha, hb, sa, sb = [], [], 0, 0
    for t in range(length):
        va = StrategyView(hb[-1] if hb else C, t + 1, sa, sb, rand_a[t], ha[-1] if ha else C)
        vb = StrategyView(ha[-1] if ha else C, t + 1, sb, sa, rand_b[t], hb[-1] if hb else C)
        x, y = a.next_action(va), b.next_action(vb)
        pa, pb = {(C, C): (3, 3), (C, D): (0, 5), (D, C): (5, 0), (D, D): (1, 1)}[(x, y)]
        ha.append(x)
        hb.append(y)
        sa, sb = sa + pa, sb + pb
    return tuple(ha), tuple(hb), sa, sb


@settings(max_examples=40, deadline=None)
@given(ids, ids, st.integers(1, 80), st.integers(0, 2**32))
def test_zero_noise_matches_reference_loop(a, b, length, seed):
    from ipdtourney.engine import match_streams
    r = play_match(make_strategy(a), make_strategy(b), MatchConfig(length, 0.0, seed))
    strategy_rng, _ = match_streams(seed)
    rand_a, rand_b = strategy_rng.random(length), strategy_rng.random(length)
    ref = _reference_match(make_strategy(a), make_strategy(b), length, rand_a, rand_b)
    assert (r.moves_a, r.moves_b, r.score_a, r.score_b) == ref


@pytest.mark.parametrize("a, b", [("all_c", "all_d"), ("random_0.5", "all_c"), ("random_0.3", "random_0.8")])
def test_full_noise_inverts_history_independent_players(a, b):
    # with noise 1 every intended move is flipped; for players that ignore
    # history the intended moves are unchanged, so the trace is the inverse
    cfg0 = MatchConfig(50, 0.0, 123)
    cfg1 = MatchConfig(50, 1.0, 123)
    r0 = play_match(make_strategy(a), make_strategy(b), cfg0)
    r1 = play_match(make_strategy(a), make_strategy(b), cfg1)
    assert r1.moves_a == invert_moves(r0.moves_a)
    assert r1.moves_b == invert_moves(r0.moves_b)


def test_all_cooperate_rate_under_noise():
    p, n = 0.01, 200_000
    r = play_match(make_strategy("all_c"), make_strategy("all_c"), MatchConfig(n, p, 2024))
    rate = (r.coop_a + r.coop_b) / (2 * n)
    sigma = math.sqrt(p * (1 - p) / (2 * n))
    assert abs(rate - (1 - p)) < 4 * sigma
