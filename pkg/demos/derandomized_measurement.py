"""How many measurement settings does LiH need?

The 118-term LiH Hamiltonian is grouped into full-support Pauli bases by
greedy derandomization. The script counts the distinct bases and the
terms left unmeasured, then shows the estimate on the exact ground state
tightening as the shot budget grows.

Run:  python demos/derandomized_measurement.py
"""
import numpy as np

from rydvqe.fixtures import load_fixture
from rydvqe.measurement import (
    allocate_shots,
    derandomize,
    estimate_energy,
    measure_plan,
    observables_from_hamiltonian,
)
from rydvqe.pauli import ground_state_exact

h = load_fixture("lih")
obs = observables_from_hamiltonian(h)
e0, psi = ground_state_exact(h)

for m in (50, 260):
    plan = allocate_shots(derandomize(obs, 6, m, 0.9), 1000, obs)
    missed = estimate_energy(h, measure_plan(psi, plan, seed=0)).uncovered
    print(f"M = {m}: {plan.n_distinct} distinct bases, {len(missed)} terms never measured")

plan = derandomize(obs, 6, 260, 0.9)
print("most used bases (qubit 0 first):",
      ", ".join(f"{b.label()} x{r}" for b, r in sorted(zip(plan.merged().bases, plan.merged().repetitions),
                                                        key=lambda x: -x[1])[:5]))

print(f"\nexact ground energy {e0:.6f} Ha")
for budget in (1_000, 10_000, 100_000):
    alloc = allocate_shots(plan, budget, obs)
    errs = [estimate_energy(h, measure_plan(psi, alloc, seed=s)).energy - e0 for s in range(10)]
    print(f"{budget:>7} shots: rms error over 10 seeds {np.sqrt(np.mean(np.square(errs))):.2e} Ha")
