# %% [markdown]
# Two KdV solitons, c = 1 and 4, collide at t = 0. The pseudospectral
# solver is started from the exact solution and compared with it; the
# crests leave the collision shifted by ln 3 (fast) and -2 ln 3 (slow).

# %%
import warnings

import numpy as np

from multisoliton.grid import Grid1D
from multisoliton.integrable import (KdvNSolitonSpec, asymptotic_soliton_params,
                                     kdv_nsoliton_values)
from multisoliton.solver import SolverConfig, evolve_gkdv, multisoliton_initial_data

spec = KdvNSolitonSpec((1.0, 4.0))
grid = Grid1D(-100.0, 300.0, 4096)

# %%
u0 = multisoliton_initial_data(spec, grid, "exact_kdv", 0.0)
cfg = SolverConfig("gkdv", 2, dt=1e-3, t_end=10.0,
                   snapshot_times=(0.0, 2.5, 5.0, 7.5, 10.0), frame_velocity=4.0)
with warnings.catch_warnings():
    # ~1e-11 of radiation reaches the domain ends; it is kept in rec.warnings
    warnings.simplefilter("ignore", RuntimeWarning)
    rec = evolve_gkdv(u0, cfg)
print(len(rec.warnings), "boundary warnings recorded")
print(f"wall time {rec.wall_time:.1f} s")

# %%
for t, f in rec.snapshots:
    err = np.max(np.abs(f.values - kdv_nsoliton_values(spec, t, grid.x)))
    c = rec.conservation[rec.times.tolist().index(t)]
    print(f"t={t:5.1f}  max|u - exact|={err:.2e}  mass={c['mass']:.12f}  energy={c['energy']:.10f}")

# %% phase shifts from the determinant
plus = asymptotic_soliton_params(spec, +1)
minus = asymptotic_soliton_params(spec, -1)
for (c, xp), (_, xm) in zip(plus, minus):
    print(f"c={c}: shift {xp - xm:+.12f}   (ln 3 = {np.log(3):.12f})")
