"""
Trait substitution sequence
===========================

On the mutation time scale the resident trait jumps from x to y at rate
b(x) n_x m(x, y - x) [f(y; x)]_+ / b(y).  The jump rate is computed by
quadrature and the path by thinning.
"""

import numpy as np

from ecoevo.limits import tss_run
from ecoevo.model import dieckmann_doebeli, tss_jump_rate
from ecoevo.rng import make_rng

model = dieckmann_doebeli(K=1000)
rate, err = tss_jump_rate(model, -1.0, full_output=True)
print(f"jump rate out of x=-1: {rate:.6f} (+- {err:.1e}), mean wait {1 / rate:.2f}")

path = tss_run(model, -1.0, 0.0, 200.0, make_rng(5))
for s in path[:10]:
    print(f"t={s.time:8.2f}  x={s.trait:+.4f}")

# the resident climbs towards the birth optimum x=0
finals = [tss_run(model, -1.0, 0.0, 200.0, make_rng(i))[-1].trait for i in range(50)]
print("mean trait at t=200:", np.mean(finals))
