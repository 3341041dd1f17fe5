"""
Counting per experiment versus per awakening
=============================================

The same seeded ensemble gives 1/2 when each run counts once and 1/3
when each awakening counts once.
"""

import time

from sleepingbeauty import builtin
from sleepingbeauty import measure as m
from sleepingbeauty import sampler

sbp = builtin("sbp")
H = m.outcome_event(sbp, "H")

start = time.perf_counter()
ens = sampler.run(sbp, 100_000, seed=42)
print(f"sampled {len(ens)} runs in {time.perf_counter() - start:.3f}s")

for est in (sampler.per_experiment_frequency(ens, H), sampler.per_awakening_frequency(ens, H)):
    exact = sampler.exact_frequency(sbp, H, est.mode)
    print(f"{est.mode:15s} {est.hits}/{est.total} = {float(est.estimate):.5f} +- {est.stderr:.5f}  (exact {exact})")

# threads and chunking do not change a single draw
par = sampler.run(sbp, 100_000, seed=42, workers=4, chunk_size=5000)
print("parallel run identical:", ens.identical(par))

# the put-in / pick-out picture: green ball on Heads, red balls on Tails
g = builtin("groisman")
green = m.sees_event(g, "green")
print("\ngreen put in :", sampler.convergence_check(g, green, sampler.PER_EXPERIMENT, 100_000, 42).estimate.estimate)
print("green picked :", sampler.convergence_check(g, green, sampler.PER_AWAKENING, 100_000, 42).estimate.estimate)

# rewards of 1 per Heads run and 2 per Tails run
r = sampler.reward_summary(ens, {"H": 1, "T": 2}, H)
print(f"\nHeads share of reward {float(r.share):.4f}, Heads frequency {float(r.frequency):.4f}")
