"""
Overlapping evidence and miscounted atoms
==========================================

In the technicolor variant a die decides which day gets the red paper.
Seeing red and seeing blue are not exclusive events at the branch level,
which is why their probabilities add to more than one.
"""

from sleepingbeauty import builtin
from sleepingbeauty import measure as m

tc = builtin("technicolor")
space = m.centered(tc, m.HALFER)
red, blue = m.sees_event(tc, "red"), m.sees_event(tc, "blue")
H = m.outcome_event(tc, "H")

rep = m.overlap_report(space, [red, blue])
print("P(Red), P(Blue) =", *rep.measures, " sum =", rep.total, rep.verdict)
print("P(H|Red) =", m.condition(space, H, red))

# Bayes run backwards recovers the prior
print("P(H) from P(H|Red)P(Red)/P(Red|H) =", m.condition(space, H, red) * space.prob(red) / m.condition(space, red, H))

# d'Alembert counted H, TH, TT as equally likely outcomes of two tosses
da = builtin("dalembert")
heads = m.branch_event(da, ["H", "TH"])
naive = m.naive_indifference(da)
print("\nP(at least one Heads): objective", m.objective(da, heads), "naive", naive.prob(heads), f"[{naive.erroneous}]")
