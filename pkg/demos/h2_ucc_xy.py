"""Two atoms, three knobs: sampled UCC-XY VQE on a 2-qubit H2-class Hamiltonian.

Two atoms 20 um apart exchange an excitation through the XY coupling. Local
detunings on each atom steer the state around the {|01>, |10>} block, where
this fixture's ground state lives. Differential evolution tunes the two
detunings and the evolution time from 1000-shot energy estimates.

Run:  python demos/h2_ucc_xy.py
"""
import numpy as np

from rydvqe import InteractionModel, Register, VqeConfig, ground_energy_exact, relative_error, run_ucc_xy
from rydvqe.fixtures import load_fixture

h = load_fixture("h2_eff_2q")
e0 = ground_energy_exact(h)
pair = Register(np.array([[0.0, 0.0], [20.0, 0.0]]), InteractionModel("XY"))
print(f"exact ground energy {e0:.6f} Ha")
# Relative error is taken on the total energy, constant offset included, so
# even the first random guess of a run can already sit inside 5%.

for seed in range(5):
    cfg = VqeConfig(ansatz="UccXY", optimizer="DifferentialEvolution", shot_budget_total=36_500, seed=seed)
    trace = run_ucc_xy(h, pair, cfg)
    incumbent = trace.incumbent_exact_energies()[-1]
    print(f"seed {seed}: best estimate {trace.best_energy:+.5f} Ha, its exact energy {incumbent:+.5f} Ha, "
          f"error {relative_error(e0, incumbent):.2%}, shots to 5% {trace.shots_to_error(e0):.0f}")

# Without shot noise the closed-form block solution is reached to machine precision.
exact = run_ucc_xy(h, pair, VqeConfig(ansatz="UccXY", optimizer="DifferentialEvolution", exact_mode=True))
print(f"noise-free run: error {relative_error(e0, exact.best_energy):.1e}")
