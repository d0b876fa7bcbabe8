"""
Substitution Fleming-Viot process
=================================

Trait substitutions collapse the marker law onto the marker carried by
the successful mutant: neutral diversity is erased at every sweep and
then rebuilt by mutation and drift.
"""

import numpy as np

from ecoevo.limits import SFVPState, WFState, sfvp_jump, sfvp_run
from ecoevo.model import dieckmann_doebeli, equilibrium_mass
from ecoevo.rng import make_rng

# %% Continuous markers: heterozygosity drops to 0 after each jump
model = dieckmann_doebeli(K=1000)
res = sfvp_run(model, -1.0, 0.0, 60.0, make_rng(4), sample_interval=5.0, N=200)
for r in res.records:
    tag = "jump" if r.jump else "    "
    print(f"{tag} t={r.time:6.2f} x={r.trait:+.3f} var={r.marker_var:.2e} het={r.marker_heterozygosity:.3f}")
print(res.n_jumps, "substitutions")

# %% Two alleles: the allele fixed by a sweep is a with probability W_a
two = dieckmann_doebeli(K=1000, marker="two-allele")
rng = make_rng(8)
fixed_a = 0
for _ in range(2000):
    st = SFVPState(0.0, -1.0, float(equilibrium_mass(two, -1.0)), WFState(0.0, -1.0, 0.85))
    fixed_a += sfvp_jump(two, st, -0.9, rng).marker_law.w_a == 1.0
print("fraction of sweeps fixing a:", fixed_a / 2000)

res = sfvp_run(two, -1.0, "a", 100.0, make_rng(9), sample_interval=10.0)
print("W_a samples:", np.round([1 - r.marker_mean for r in res.records], 3))
