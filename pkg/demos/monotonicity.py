"""Fit the monotonicity constants for boundary and interior kernels on a relaxing channel run.

Prints the smallest admissible ``(C1, C2)`` for each kernel centre and terminal
time.  Takes a few seconds.
"""
import math

from contactflow.diagnostics import KernelSpec, monotonicity_check
from contactflow.energetics import make_quartic_model
from contactflow.geometry import Channel2D
from contactflow.measures import MeasurePack
from contactflow.solver import initial_profile, run, stability_cap

model = make_quartic_model(math.pi / 3)
eps, T = 0.04, 0.02
dom = Channel2D(1.0, 0.5, 128, 64)
dt = 0.5 * stability_cap(model, eps)
band = {"shape": "band", "lower": 0.2, "upper": 0.8, "axis": 0, "period": 1.0}
rec = run(initial_profile(dom, model, eps, "well_prepared_interface", {"interface": band}), T, dt=dt,
          snapshot_every=int(round(0.001 / dt)))
packs = [MeasurePack(f) for f in rec.snapshots()]

print(f"{'variant':>8} {'centre':>14} {'s':>6} {'C1':>8} {'C2':>8} {'violations':>10}")
for variant, centres in (("pair", [(0.25, 0.0), (0.5, 0.025)]), ("rho1", [(0.3, 0.25)])):
    for c in centres:
        for s in (T + 0.01, T + 0.04):
            rep = monotonicity_check(rec, KernelSpec(dom, c, s, variant), packs=packs)
            print(f"{variant:>8} {str(c):>14} {s:6.3f} {rep.C1:8.3g} {rep.C2:8.3g} {rep.violations:10d}")
