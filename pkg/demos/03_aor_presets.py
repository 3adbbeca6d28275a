"""Accelerated overrelaxation presets on random diagonally dominant systems.

Each preset fixes the AOR parameters (omega, kappa) and whether alpha and
beta are free. Gauss-Seidel splittings need fewer sweeps than Jacobi ones.
"""
import numpy as np

from mtensor import SolverConfig, alpha_bound, jacobi_splitting, preset_solve
from mtensor.fixtures import random_dominant_system
from mtensor.solver import PRESETS

rng = np.random.default_rng(3)
systems = [random_dominant_system(rng, 20, 20, 3) for _ in range(10)]

A, B, C, T = systems[0]
bound = alpha_bound(jacobi_splitting(A, T), T)
print(f"first system: alpha must stay below 2 / (1 + rho) = {bound:.4f} for the Jacobi step\n")

cfg = SolverConfig(alpha=0.9, beta=0.9, tol=1e-10)
print("preset        mean iterations   worst residual")
for name in PRESETS:
    reps = [preset_solve(name, A, B, C, T, cfg) for A, B, C, T in systems]
    iters = np.mean([r.iterations for r in reps])
    worst = max(r.residual for r in reps)
    print(f"{name:<13} {iters:>15.2f}   {worst:.2e}")

print("\nSOR sweep of omega (alpha = beta = 1):")
cfg = SolverConfig(alpha=1.0, beta=1.0, tol=1e-10)
for omega in (0.8, 1.0, 1.1, 1.2):
    reps = [preset_solve("hosor-tspi", A, B, C, T, cfg, omega1=omega, omega2=omega) for A, B, C, T in systems]
    print(f"  omega {omega:.1f}: {np.mean([r.iterations for r in reps]):.2f} iterations")
