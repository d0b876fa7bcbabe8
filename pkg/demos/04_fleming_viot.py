"""
Fleming-Viot marker dynamics
============================

Between trait substitutions the marker law of the resident evolves as a
Fleming-Viot process.  It is simulated with a Moran particle system
(continuous markers) or with the Wright-Fisher diffusion (two alleles).
"""

import numpy as np

from ecoevo.limits import FVParticleSystem, WFParams, fv_sample, wf_simulate
from ecoevo.model import dieckmann_doebeli
from ecoevo.rng import make_rng

# %% Moran particles: variance relaxes to sigma^2 n / 2 at rate 2b/n
b, n_hat, s2 = 1.0, 0.54, 0.04
fv = FVParticleSystem(0.0, n_hat, 2 * b / n_hat, b, 500, sigma2=s2, values=np.zeros(500))
traj = fv_sample(fv, np.arange(0.0, 20.0, 0.05), make_rng(1))
print("variance, late average:", traj.var[100:].mean(), "theory:", s2 * n_hat / 2 * (1 - 1 / 500))
print("expected relaxation curve at t=0.5:", s2 * n_hat / 2 * (1 - 1 / 500) * (1 - np.exp(-2 * b / n_hat * 0.5)),
      "observed:", traj.var[10])

# %% Two alleles: Wright-Fisher diffusion of the frequency of a
model = dieckmann_doebeli(K=1000, marker="two-allele", q_a=0.5, q_A=0.5)
params = WFParams.for_trait(model, -1.0)
batch = wf_simulate(0.9, 1.0, params, make_rng(2), dt=1e-4, paths=2000)
print("W_a at t=1: mean", batch.w.mean(), "sd", batch.w.std())
# with symmetric mutation the mean relaxes to 1/2 at rate b r (q_a + q_A)
print("predicted mean:", 0.5 + 0.4 * np.exp(-params.b * params.r_bar * 1.0))

# the same law from a two-allele Moran system
ends = []
for i in range(200):
    s = FVParticleSystem.for_trait(model, -1.0, "a", N=500)
    s.n_a = 450
    ends.append(fv_sample(s, [1.0], make_rng(100 + i)).mean[0])
print("Moran frequency of a at t=1:", 1 - np.mean(ends))
