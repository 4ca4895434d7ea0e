"""Without a length penalty a zero-area figure eight never settles.

At lambda = 0 a closed curve with zero area and zero rotation index has no
stationary shape to go to. The flow keeps lowering the bending energy by
growing, and the length increases at most linearly in time.
"""

# %%
import numpy as np

from apef import InitialDatum, OutputPolicy, RunConfig, StepPolicy, Stopping, run
from apef.stationary import analyze

cfg = RunConfig(
    lam=0.0, n=128, t_end=5.0,
    initial=InitialDatum("gerono_eight", {"scale": 1.0}),
    policy=StepPolicy(dt_init=1e-6, dt_max=1e-2, dt_min=1e-14, growth=1.05),
    outputs=OutputPolicy(write=False),
    stopping=Stopping(eps_stat=1e-12),
    name="length-growth",
)
traj, state = run(cfg)

# %%
t = traj.column("t")
L = traj.column("length")
E = traj.column("energy_bending")
for target in (0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0):
    i = min(np.searchsorted(t, target), len(t) - 1)
    print(f"t = {t[i]:5.2f}: L = {L[i]:8.4f}, E = {E[i]:8.4f}, E L = {E[i] * L[i]:8.4f}")

rate = np.diff(L) / np.diff(t)
print(f"\nlargest dL/dt over the run: {rate.max():.4f}; over the last second: {rate[t[1:] > 4].max():.4f}")
rep = analyze(state.curve, 0.0, 0.0)
print(f"final state: {rep.classification} (residual {rep.residual:.2e})")
