"""Sign classes of the superradiant ground state across the flux.

For every ring size the ground state is classified at g = 1.5 on a flux
grid; ``F`` marks frustrated classes, ``.`` unfrustrated ones.  The
effective couplings J_1.. are printed at the flux critical points.
"""
import numpy as np

from dickeflux import ModelParams, classify, effective_couplings, flux_critical_points, minimize

thetas = np.linspace(0.05, np.pi - 0.05, 40)
for n in (3, 4, 5, 6, 8):
    row = []
    for th in thetas:
        cls = classify(minimize(ModelParams(n, th, g=1.5)))
        row.append("F" if cls.frustrated else ".")
    print(f"N={n}  {''.join(row)}")

for n in (3, 5):
    p = ModelParams(n, 1.0)
    for tc in flux_critical_points(p):
        j = effective_couplings(p.replace(theta=tc)).j_eff[1:]
        st = minimize(p.replace(theta=tc, g=1.5), restarts=16)
        print(f"N={n} theta_c={tc:.6f} J={np.array2string(j, precision=4)} "
              f"D={classify(st).degeneracy}")
