"""
Coexisting traits
=================

When two traits coexist each carries its own marker law.  The laws are
independent Fleming-Viot processes whose resampling coefficient reflects
the total competitive load of the pair.
"""

from ecoevo.limits import dimorphic_bracket, dimorphic_fv_run
from ecoevo.model import dieckmann_doebeli
from ecoevo.rng import stream

model = dieckmann_doebeli(K=1000, sigma_C=0.7)
res = dimorphic_fv_run(model, -0.1, 0.1, 0.0, 0.0, 2.0, (stream(1, 0), stream(1, 1)), sample_interval=0.5, N=300)
print("equilibrium masses:", res.n1, res.n2)
print("resampling coefficients:", dimorphic_bracket(model, -0.1, 0.1, res.n1, res.n2),
      dimorphic_bracket(model, 0.1, -0.1, res.n2, res.n1))
for t, v1, v2 in zip(res.trajectories[0].times, res.trajectories[0].var, res.trajectories[1].var):
    print(f"t={t:.1f}  var1={v1:.2e}  var2={v2:.2e}")
