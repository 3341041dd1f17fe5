"""
Centered credences for the two-awakening protocol
==================================================

Heads wakes the subject on Monday only, Tails on Monday and Tuesday.
We compare the halfer and thirder ways of spreading each branch's
probability over its awakenings.
"""

from sleepingbeauty import builtin
from sleepingbeauty import measure as m

sbp = builtin("sbp")
H, T = m.outcome_event(sbp, "H"), m.outcome_event(sbp, "T")
mo, tu = m.day_event(sbp, "Mo"), m.day_event(sbp, "Tu")

# the objective measure lives on branches
print("objective P(H) =", m.objective(sbp, H))

for weighting in m.WEIGHTINGS:
    space = m.centered(sbp, weighting)
    print(f"\n{weighting}")
    for key, w in space.weights.items():
        print("  ", key, w)
    print("  P(H)    =", space.prob(H))
    print("  P(Mo)   =", space.prob(mo))
    print("  P(H|Mo) =", m.condition(space, H, mo))
    # total probability over the day partition
    dec = m.decompose(space, H, [mo, tu])
    print("  P(H) as sum of P(H|day)P(day):", " + ".join(f"{c}*{p}" for c, p in dec), "=", dec.total)

# with a hundred Tails awakenings the thirder atom for Heads shrinks to 1/101
many = builtin("n_waking(100)")
print("\nthirder P(H) with 100 Tails awakenings =", m.centered(many, m.THIRDER).prob(m.outcome_event(many, "H")))

# the elicitation variants share one branch table; only the annotation differs
for name in ("method2", "method2prime"):
    for line in m.knowledge_report(builtin(name)):
        print(f"{name}: {line}")
