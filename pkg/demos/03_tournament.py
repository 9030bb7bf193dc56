"""
Round robin and repeated tournaments
====================================
"""

from ipdtourney import TournamentConfig, repeat_tournament, run_tournament

players = ("k92r_tft", "k61r_champion", "grudger", "tf2t", "wsls", "gtft", "all_c", "all_d")
config = TournamentConfig(players, noise_prob=0.01, master_seed=2024)

cache, report = run_tournament(config)
print(report.to_csv())

# twenty tournaments with derived seeds; win proportion is the share each one topped
repeated = repeat_tournament(config, n_runs=20)
for i in repeated.order:
    sid = repeated.players[i]
    print(f"{sid:14s} {repeated.mean_scores[i]:.3f}  wins {repeated.win_proportion.get(sid, 0.0):.2f}")
