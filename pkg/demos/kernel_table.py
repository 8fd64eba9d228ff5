"""Iterated kernels against their power-law envelopes.

Run with ``python3 demos/kernel_table.py``. Each g_i is homogeneous, so the
ratio to the envelope depends on t/s only; its supremum is the constant in
the envelope bound.
"""
import numpy as np

from sharpadams.kernels import g_iter, kernel_table, log_grid, split_formula, verify_derivative_identity

for n in (6, 8):
    for i in (2, 3):
        tab = kernel_table(n, i, log_grid(size=20), log_grid(size=20))
        fine = kernel_table(n, i, log_grid(size=39), log_grid(size=39))
        print(f"n={n} i={i}: sup ratio {tab.sup_ratio:.5f} (refined {fine.sup_ratio:.5f}),"
              f" max quad error {tab.quad_error.max():.1e}")

print("\ng_2(t, 1) for n = 6 from nested quadrature and from the split formula:")
for t in (0.1, 1.0, 10.0):
    print(f"  t={t:5}: {g_iter(6, 2, t, 1.0)[0]:.10f}  {split_formula(6, 2, t, 1.0):.10f}")

print("\nderivative identity residual for n=6, i=2, t=0.7, s=1.5:")
for h in (0.2, 0.1, 0.05, 0.025):
    print(f"  h={h:6}: {verify_derivative_identity(6, 2, 0.7, 1.5, h=h):.3e}")
