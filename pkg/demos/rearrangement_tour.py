"""Rearrangements of a random grid function, and the inequalities they obey.

Run with ``python3 demos/rearrangement_tour.py``.
"""
import numpy as np

from sharpadams.rearrangement import (GridFunction, decreasing_rearrangement, distribution_function,
                                      lp_norm, spherical_rearrangement)
from sharpadams.verify import check_radial_lemma, hardy_sides

rng = np.random.default_rng(1)
g = GridFunction(rng.uniform(0.1, 1.0, 12), rng.normal(size=12))
star = decreasing_rearrangement(g)

print("u* levels  :", np.round(star.levels, 3))
print("breakpoints:", np.round(star.breakpoints, 3))

# same distribution function, same L^p norms
for s in (0.2, 0.8):
    print(f"mu({s}) = {distribution_function(g, s):.4f}   |{{u* > {s}}}| = "
          f"{star.lengths[star.levels > s].sum():.4f}")
for p in (1, 2, 4):
    print(f"||u||_{p} = {lp_norm(g, p):.6f}   ||u*||_{p} = {star.power_integral(p) ** (1 / p):.6f}")

# u** dominates u* but only by the Hardy factor in L^p
t = np.linspace(0.05, star.total_measure, 6)
print("u*  :", np.round(star(t), 3))
print("u** :", np.round(star.maximal(t), 3))
for p in (1.5, 2.0, 4.0):
    lhs, rhs = hardy_sides(star, p)
    print(f"p = {p}:  ||u**||_p = {lhs:.4f} <= p' ||u*||_p = {rhs:.4f}")

# the radial profile in R^3 and the pointwise decay bound
u_sharp = spherical_rearrangement(g, 3)
print("u# radii :", np.round(u_sharp.radii[:5], 3), "...")
rep = check_radial_lemma(g, 2.0, np.linspace(0.05, 1.5, 30), 3)
print(f"radial decay bound: pass={rep.passed}, min slack {rep.min_slack:.4f}")
