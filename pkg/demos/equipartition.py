"""Equipartition of bending and length energy at zero enclosed area.

For a stationary curve with zero signed area the multiplier identity
2 c1 A0 = E - lambda L forces E = lambda L: the bending energy equals the
penalized length. The datum here is a three-lobed Fourier curve with rotation
index one whose lobes cancel in area exactly.
"""

# %%
from apef import InitialDatum, OutputPolicy, RunConfig, StepPolicy, Stopping, run
from apef.curve import area, rotation_index
from apef.initial import ZERO_AREA_COEFFICIENTS, generate

datum = InitialDatum("fourier", {"coefficients": ZERO_AREA_COEFFICIENTS})
start = generate(datum, 256)
print(f"datum: rotation index {rotation_index(start)}, signed area {area(start):.1e}")

# %%
for lam in (0.5, 1.0, 2.0):
    cfg = RunConfig(lam=lam, n=256, t_end=100.0, initial=datum,
                    policy=StepPolicy(dt_init=1e-6, dt_max=1e-2, dt_min=1e-14, growth=1.05),
                    outputs=OutputPolicy(write=False), stopping=Stopping(eps_stat=1e-5),
                    name=f"equipartition-{lam}")
    traj, state = run(cfg)
    rep = traj.report
    print(f"lambda = {lam}: {traj.status} at t = {state.t:.2f}, E = {rep.bending:.6f}, "
          f"lambda L = {lam * rep.length:.6f}, gap {rep.equipartition_gap:.1e}")
