"""
Cooperation matrices
====================

Entry (i, j) is how often i cooperated with j. The deviation m - m.T shows
who was more generous in each pairing.
"""

import numpy as np

from ipdtourney import TournamentConfig, run_tournament
from ipdtourney.analysis import cooperation_matrix, mean_cooperation, symmetry_deviation

players = ("k92r_tft", "k61r_champion", "grudger", "wsls", "all_c", "all_d")
for noise in (0.0, 0.01, 0.05):
    cache, report = run_tournament(TournamentConfig(players, noise_prob=noise, master_seed=3))
    print(f"noise {noise:<5} mean cooperation {mean_cooperation(cache):.3f}")

m = cooperation_matrix(cache, report.order)
np.set_printoptions(precision=2, suppress=True)
print([cache.players[i] for i in report.order])
print(m.entries)
print(symmetry_deviation(m))
