"""
What if more players had been invited?
======================================

A single tournament over base + pool fills the interaction cache. Every
sub-tournament that adds k pool members is then scored from the cache
alone, without replaying any match.
"""

from ipdtourney import TournamentConfig, run_tournament
from ipdtourney.tournament import enumerate_added_subsets

base = ("k92r_tft", "k61r_champion", "grudger", "all_d")
pool = ("tf2t", "wsls", "gtft", "gtft_0.1", "all_c", "random_0.2", "random_0.8", "wsls@b")
cache, _ = run_tournament(TournamentConfig(base + pool, include_random_baseline=False,
                                           noise_prob=0.01, master_seed=11))

b = list(range(len(base)))
p = list(range(len(base), len(base) + len(pool)))
for k in (1, 2, 3):
    tally = enumerate_added_subsets(cache, b, p, k)
    print(f"k={k}: {tally.visited} tournaments")
    for sid, wins in sorted(tally.as_dict().items(), key=lambda kv: -kv[1]):
        print(f"    {sid:14s} {wins}")
