"""The scalar graph equation and the curve equation agree near a circle.

Close to a reference curve the flow can be written for a single height
function over the reference normal. One step of that scalar equation is
compared against one step of the direct curve integrator; the two differ by
the splitting error, which shrinks with the step.
"""

# %%
import numpy as np

from apef import StepPolicy
from apef.flow import graph_curve, height_over, initial_state, step, step_graph
from apef.initial import circle

ref = circle(128)
th = 2 * np.pi * ref.x
start = graph_curve(ref, 1e-3 * np.cos(2 * th))

# %%
print(f"{'dt':>8} {'sup |phi_direct - phi_graph|':>30}")
for dt in (1e-3, 1e-4, 1e-5, 1e-6):
    pol = StepPolicy(dt_init=dt, dt_max=dt, dt_min=dt * 1e-6)
    s = initial_state(start, 1.0, pol, resample=False)
    direct = step(s, pol)
    graph = step_graph(s, pol, reference=ref)
    dist = np.abs(height_over(direct.curve, ref) - graph.height).max()
    print(f"{dt:8.0e} {dist:30.3e}")

# %% a larger bump tilts the normal too far and the graph description breaks down
from apef.errors import GraphModeBreakdown
from apef.flow import graph_velocity

try:
    graph_velocity(ref, 0.25 * np.cos(8 * th), 1.0)
except GraphModeBreakdown as exc:
    print(f"\n{type(exc).__name__}: {exc}")
