"""Gap exponents on both sides of the superradiant transition.

On the mean-field side of the flux (k = 0 critical) the gap closes as
|g - g_c|^(1/2) from both sides.  On the anomalous side (k != 0 critical)
it closes linearly from below and as |g - g_c|^(N/2) from above.
"""
import numpy as np

from dickeflux import ModelParams, fit_exponent, gap_series

CASES = [(3, 3 * np.pi / 4), (3, np.pi / 4), (5, np.pi / 4)]

for n, theta in CASES:
    p = ModelParams(n, theta)
    for side in ("below", "above"):
        gc, series = gap_series(p, side)
        fit = fit_exponent(series, gc, side)
        print(f"N={n} theta={theta:.4f} {side:5s} g_c={gc:.8f} "
              f"exponent={fit.exponent:.4f} r2={fit.r_squared:.6f}")
