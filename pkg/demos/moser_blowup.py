"""Following the concentrating sequence at and below the sharp multiplier.

Run with ``python3 demos/moser_blowup.py``. Below the sharp multiplier the
log-functional settles down quickly. At the sharp multiplier with a nonzero
weak limit it keeps growing, but only like a power of ln j, so the growth is
slow at any j reachable in double precision.
"""
import math

import numpy as np

from sharpadams.constants import SobolevParams, beta_nm
from sharpadams.extremals import build_moser_adams, divergence_sweep
from sharpadams.radial_solver import grad_m_norm

for n, m in [(2, 1), (4, 2)]:
    p = SobolevParams(n, m)
    print(f"\n(n, m) = ({n}, {m}),  beta = {beta_nm(p):.6g}")

    # the norm of v_j exceeds 1 by roughly K / ln j
    K = [(grad_m_norm(build_moser_adams(p, j), p) ** p.p - 1) * math.log(j) for j in (16, 256, 4096)]
    print("  K estimates:", np.round(K, 3))

    for alpha in (0.0, 0.5):
        sub = divergence_sweep(p, alpha, 0.9)
        sharp = divergence_sweep(p, alpha, 1.0)
        print(f"  alpha = {alpha}")
        print("     j   sub-sharp     sharp   plateau model")
        for a, b in zip(sub, sharp):
            print(f"  {a.j:5d}  {a.log_value:9.4f}  {b.log_value:9.4f}  {b.lower_bound:9.4f}")
