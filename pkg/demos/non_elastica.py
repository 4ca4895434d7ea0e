"""A stationary curve that is not an elastica.

A figure eight has rotation index zero, so it cannot flow to a circle. When
its two lobes enclose areas of different size the signed area is nonzero and
the flow has to settle on a curve with a nonzero multiplier c1: the limit
solves the generalized elastica equation with pressure, not the classical one.
"""

# %%
import numpy as np

from apef import InitialDatum, OutputPolicy, RunConfig, StepPolicy, Stopping, run
from apef.curve import self_intersects

cfg = RunConfig(
    lam=1.0, n=256, t_end=50.0,
    initial=InitialDatum("asymmetric_eight", {"scale": 1.0, "shear": 0.4}),
    policy=StepPolicy(dt_init=1e-6, dt_max=1e-2, dt_min=1e-14, growth=1.05),
    outputs=OutputPolicy(write=False),
    stopping=Stopping(eps_stat=1e-5),
    name="non-elastica",
)
traj, state = run(cfg)
rep = traj.report

# %%
first, last = traj.records[0], traj.records[-1]
print(f"initial: A = {first.area:.6f}, L = {first.length:.4f}, E_lambda = {first.energy.total:.4f}")
print(f"final:   A = {last.area:.6f}, L = {last.length:.4f}, E_lambda = {last.energy.total:.4f}")
print(f"rotation index {first.rotation} -> {last.rotation}; self-intersecting: {self_intersects(state.curve)}")

# %% the multiplier is far from zero, and it is constant along the curve
print(f"\n{traj.status} after {state.step_index} steps (t = {state.t:.3f}), residual {rep.residual:.2e}")
print(f"c1 = {rep.c1:.6f} +- {rep.c1_std:.1e}  ->  {rep.classification}")
print(f"identity 2 c1 A0 = E - lambda L: {2 * rep.c1 * rep.area0:.6f} vs {rep.bending - rep.lam * rep.length:.6f}")

# %% curvature profile of the limit
k = state.curve.geometry.k
print(f"\ncurvature range [{k.min():.4f}, {k.max():.4f}], mean {np.mean(k):.2e}")
