"""Shots needed to reach 5% error: pulse splitting vs a fixed alternating pulse.

The iterative protocol estimates energies from derandomized bases, so one
1000-shot evaluation covers every term. The alternating baseline measures
each Pauli term separately with 1000 shots, which costs 14,000 shots per
evaluation on this 4-qubit fixture. Both start from |0000>.

Run:  python demos/shot_efficiency.py [n_seeds]
"""
import math
import sys

import numpy as np

from rydvqe import (
    Register,
    VqeConfig,
    ground_energy_exact,
    optimize_register,
    run_alternating,
    run_iterative_pulse,
    target_matrix,
)
from rydvqe.fixtures import load_fixture
from rydvqe.register import EmbeddingOptions

n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 5
h = load_fixture("h2_jw_4q_flipped")
e0 = ground_energy_exact(h)
square = Register(np.array([[0, 0], [8, 0], [0, 8], [8, 8]], float))
r = optimize_register(target_matrix(h, 4), square, EmbeddingOptions(max_evals=3000, n_starts=4)).register

ours, base = [], []
for seed in range(n_seeds):
    ours.append(run_iterative_pulse(h, r, VqeConfig(seed=seed)).shots_to_error(e0))
    base.append(run_alternating(h, r, 3, VqeConfig(ansatz="AlternatingAB", seed=seed,
                                                   shot_budget_total=2_000_000)).shots_to_error(e0))
    print(f"seed {seed}: iterative {ours[-1]:>9.0f} shots, alternating {base[-1]:>9.0f} shots")

# a seed that never gets within 5% counts as infinitely many shots
m_ours, m_base = np.median(ours), np.median(base)
print(f"medians: iterative {m_ours:.0f}, alternating {m_base:.0f}")
if math.isfinite(m_ours) and math.isfinite(m_base):
    print(f"the alternating baseline needs {m_base / m_ours:.1f}x more shots")
