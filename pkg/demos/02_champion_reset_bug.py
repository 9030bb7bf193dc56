"""
Champion's counter and why reset matters
========================================

Champion counts how often its opponent cooperated. The original code
never cleared that counter between matches, so a long friendly match
made the next opponent look friendlier than it was.
"""

from ipdtourney import MatchConfig, make_strategy, play_match

friendly = MatchConfig(308, seed=1)
hostile = MatchConfig(156, seed=2)

for sid in ("k61r_champion", "k61r_champion_unpatched"):
    champ = make_strategy(sid)
    play_match(champ, make_strategy("all_c"), friendly)
    champ.reset()
    r = play_match(champ, make_strategy("all_d"), hostile)
    print(f"{sid:26s} defections after turn 25 vs AllD: {r.moves_a[25:].count(1)}")
