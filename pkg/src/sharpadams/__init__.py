"""Numerical companion for sharp Moser-Trudinger and Adams type inequalities."""
from .constants import (ImprovementExponent, SobolevParams, alpha_n, beta_nm, c_epsilon,
                        c_nk, improvement_exponent, j_index, omega_n)
from .rearrangement import (GridFunction, RadialProfile, StepRearrangement, decreasing_rearrangement,
                            distribution_function, lp_norm, maximal_function, radial_grid,
                            spherical_rearrangement, truncate_above, truncate_below)

__version__ = "0.1.0"
