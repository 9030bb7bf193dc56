"""
A single match, with and without noise
======================================

Two players meet for a fixed number of turns. Noise flips each intended
move with a small probability, and the history records what was played.
"""

from ipdtourney import MatchConfig, make_strategy, play_match

# TFT against itself never leaves mutual cooperation
r = play_match(make_strategy("k92r_tft"), make_strategy("k92r_tft"), MatchConfig(151))
print("noiseless TFT vs TFT, points per turn:", r.score_a / r.length)

# one accidental defection starts an echo of retaliation
r = play_match(make_strategy("k92r_tft"), make_strategy("k92r_tft"), MatchConfig(151, 0.01, seed=7))
print("noisy TFT vs TFT, points per turn:   ", round(r.score_a / r.length, 3))
print("first 40 moves of seat A:", "".join("CD"[m] for m in r.moves_a[:40]))

# WSLS recovers from the same kind of slip within two turns
r = play_match(make_strategy("wsls"), make_strategy("wsls@twin"), MatchConfig(151, 0.01, seed=7))
print("noisy WSLS vs WSLS, points per turn: ", round(r.score_a / r.length, 3))
