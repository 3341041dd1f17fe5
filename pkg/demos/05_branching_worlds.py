"""
Quantum coins and world weights
================================

With a quantum coin every outcome happens in some world.  Born weights
give the Heads world 1/2; renormalizing again over awakening days gives
the 1/3 answer and is flagged as a mistake.
"""

from sleepingbeauty import builtin
from sleepingbeauty import branching as br

tree = br.from_quantum_protocol(builtin("quantum_sbp"))
print(tree.render())

for mode in ("single", "double"):
    measure = br.world_measure(tree, mode)
    flag = f"  [{measure.erroneous}]" if measure.erroneous else ""
    print(f"{mode}: P(H world) = {br.world_credence(tree, 'H', mode)}{flag}")

# waking twice after Tails versus a second quantum toss choosing the day
print(br.from_quantum_protocol(builtin("second_q_toss")).render())
for row in br.second_q_toss_compare().rows:
    print(f"{row.setup:14s} P~(Mo)={row.objective_mo}  P(Mo)={row.credence_mo}  worlds={row.worlds}  Born(Mo)={row.born_mo}")
