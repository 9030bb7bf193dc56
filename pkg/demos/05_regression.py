"""
Explaining scores with a few representatives
============================================

Each player's score is regressed on its payoffs against a handful of
representative opponents, then predictors are dropped one at a time.
"""

from ipdtourney import TournamentConfig, run_tournament
from ipdtourney.analysis import backward_elimination, ols_fit, representative_design

players = ("k92r_tft", "k61r_champion", "grudger", "tf2t", "wsls", "gtft", "gtft_0.1",
           "all_c", "all_d", "random_0.3", "random_0.7", "random_0.5")
cache, report = run_tournament(TournamentConfig(players, include_random_baseline=False,
                                                noise_prob=0.01, master_seed=5))
reps = ("all_d", "k92r_tft", "random_0.5")
X, y = representative_design(cache, reps)
fit = ols_fit(X, y, names=reps)
print(fit.to_csv())

for step in backward_elimination(X, y):
    print([reps[i] for i in step.retained], round(step.r_squared, 4))
