"""
How irregular is a modulation path?
===================================

The oscillatory integral ``Phi_{s,t}(xi) = int_s^t exp(i xi W_r) dr`` is the
Fourier transform of the local time of ``W``. A path is (rho, gamma)-irregular
when ``<xi>^rho |Phi_{s,t}(xi)| / (t-s)^gamma`` stays bounded. The linear path
``W = t`` only manages ``rho <= 1 - gamma``; fractional Brownian motion reaches
``rho < (1 - gamma)/H``.
"""

import numpy as np

from modisp.occupation import (default_xi_grid, estimate_irregularity, local_time_histogram,
                               oscillatory_integral, resolved_xi_grid)
from modisp.pathgen import FbmParams, generate_deterministic, generate_fbm

# a Brownian path and its local time
w = generate_fbm(FbmParams(hurst=0.5, horizon=1.0, n_points=2**14 + 1, seed=0))
lt = local_time_histogram(w, 0.0, 1.0, n_bins=40)
print(f"total occupation {lt.total_mass:.15f} (interval length 1)")
print(f"peak local time {lt.density.max():.3f} at z = {lt.centers[lt.density.argmax()]:+.3f}")

# |Phi| decays in xi for the rough path but not for the smooth one
lin = generate_deterministic(1.0, 1.0, 2**14 + 1)
print("\n      xi   |Phi| fBm   |Phi| W=t")
for xi in [1, 10, 100, 1000]:
    print(f"{xi:8d}  {abs(oscillatory_integral(w, 0, 1, xi)):10.2e}  "
          f"{abs(oscillatory_integral(lin, 0, 1, xi)):10.2e}")

# empirical breakdown rho: the largest rho whose sup ratio stops growing
rep = estimate_irregularity(lin, gamma=0.5, xi_grid=default_xi_grid(2.0**14))
print(f"\nW=t, gamma=1/2: breakdown rho {rep.breakdown_rho:.2f} (theory 1/2)")
for H in (0.3, 0.5, 0.7):
    b = [estimate_irregularity(p, 0.5, xi_grid=resolved_xi_grid(p)).breakdown_rho
         for p in (generate_fbm(FbmParams(H, 1.0, 2**14 + 1, s)) for s in range(6))]
    print(f"fBm H={H}: median breakdown rho {np.median(b):.2f} (theory {0.5 / H:.2f})")
