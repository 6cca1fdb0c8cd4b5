"""
Strategic ambiguity in a two-party contest
==========================================

Solve the canonical game exactly, trace where the equilibrium switches from
centrist ambiguity to full commitment, and check the enumeration by
simulation.
"""

from fractions import Fraction

from ambiguity_lab.game import (
    PROFILES, SweepGrid, canonical_game, monte_carlo_check, phase_table, solve, sweep_grid,
)
from ambiguity_lab.game.core import profile_label

# k = 6/5 sits below the threshold k^2 = 3/2: only the centrist blurs
game = canonical_game(Fraction(6, 5), 2)
report = solve(game)
print("regime:", report.regime)
for prof in PROFILES:
    pc, pe = report.payoffs.entries[prof]
    print(f"  {profile_label(prof)}  centrist {pc}  extremist {pe}")
print("pure equilibria:", [profile_label(p) for p in report.pure_equilibria])

# crossing the threshold flips the equilibrium to mutual commitment
print("k = 13/10:", solve(canonical_game(Fraction(13, 10), 2)).regime)

# a coarse phase table, l = k + 1
records = sweep_grid(SweepGrid([Fraction(n, 20) for n in range(21, 31)], l_offset=1))
print(phase_table(records))

# simulated win frequencies against the exact values
for prof in PROFILES:
    freq, se = monte_carlo_check(game, prof, 200_000, seed=1)
    exact = report.payoffs.entries[prof][0]
    print(f"{profile_label(prof)}: simulated {freq:.4f} +/- {se:.4f}, exact {float(exact):.4f}")
