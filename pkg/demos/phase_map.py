"""Coarse (theta, g) phase map with first-order lines.

Writes ``phase_map.svg`` in the working directory and lists the traced
first-order lines next to the flux critical points.
"""
import numpy as np

from dickeflux import ModelParams, flux_critical_points, phase_diagram
from dickeflux.cli import svg_phase_map
from dickeflux.criticality import first_order_lines

n = 5
base = ModelParams(n, 1.0)
cells = phase_diagram(base, np.linspace(0.05, 3.09, 60), np.linspace(0.0, 2.0, 41))
with open("phase_map.svg", "w") as fh:
    fh.write(svg_phase_map(cells))

labels = {}
for c in cells:
    labels[c.label] = labels.get(c.label, 0) + 1
print("cells per label:", labels)
print("flux critical points:", [round(t, 4) for t in flux_critical_points(base)])
for ln in first_order_lines(cells):
    g0, th0 = ln.end
    print(f"line from g={g0:.3f} theta={th0:.4f}, theta span {ln.theta_span:.4f}, "
          f"{len(ln.points)} rows")
