"""
Ecology of the logistic competition model
=========================================

Deterministic quantities behind every simulation: the monomorphic
equilibrium, invasion fitness, the invasion-implies-fixation check and
the two-trait Lotka-Volterra system.
"""

import numpy as np

from ecoevo.model import (
    classify_iif,
    dieckmann_doebeli,
    equilibrium_mass,
    invasion_fitness,
    logistic_solve,
    lv_coexistence_equilibrium,
    lv_solve,
)

model = dieckmann_doebeli(K=1000)
print("q_K =", model.q_K, " p_K =", model.p_K)

# equilibrium mass n_x = (b - d) / (eta C(0)) across the trait space
xs = np.linspace(-1, 1, 5)
for x, n in zip(xs, equilibrium_mass(model, xs)):
    print(f"n({x:+.1f}) = {n:.5f}")

# a population started at 0.1 relaxes to its equilibrium
t, n = logistic_solve(model, -1.0, 0.1, 40.0)
print("logistic trajectory at t=40:", n[-1])

# rare mutants fitter than the resident have positive invasion fitness
print("f(0; -1) =", invasion_fitness(model, 0.0, -1.0))
print("survival probability f/b =", invasion_fitness(model, 0.0, -1.0) / model.b(0.0))

# a resident/mutant pair either fixes, dies out, or falls outside the
# invasion-implies-fixation regime (DEGENERATE, which includes coexistence)
for x, y in [(-1.0, -0.5), (-0.5, -1.0), (-1.0, 0.0)]:
    print(f"({x}, {y}) ->", classify_iif(model, x, y).name)

# the (-1, 0) pair settles on a stable coexistence point
eq = lv_coexistence_equilibrium(model, -1.0, 0.0)
print("coexistence:", eq)
t, n12 = lv_solve(model, -1.0, 0.0, (0.5, 0.01), 400.0)
print("Lotka-Volterra at t=400:", n12[-1])

# narrower competition gives symmetric coexistence of close traits
narrow = dieckmann_doebeli(K=1000, sigma_C=0.7)
print("sigma_C=0.7, (-0.1, 0.1):", lv_coexistence_equilibrium(narrow, -0.1, 0.1))
