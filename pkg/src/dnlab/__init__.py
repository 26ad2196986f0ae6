"""Numerical laboratory for semilinear elliptic Dirichlet problems.

Finite-difference grids and Laplacians on rectangles, a catalogue of
nonlinearities with exact derivatives, Newton and monotone solvers,
Dirichlet-to-Neumann traces, radial shooting with explicit saturation
constants, higher-order linearization probes, and a scenario runner.
"""

__version__ = "0.1.0"

from .grid import Grid, build_rectangle, discrete_flux, laplacian_interior
from .nonlinearity import (BumpModified, Linear, Nonlinearity, Polynomial,
                           SeparatedAnalytic, SpatialExpression, constant,
                           check_growth_bounds, check_monotone,
                           make_truncated_pair)
from .elliptic import (NewtonOptions, SolveReport, estimate_wellposedness_radius,
                       smallest_eigenvalue, solve_linear, solve_semilinear)
from .dnmap import DNTrace, dn_distance, dn_map
from .boundarydata import constant_data, random_trig_data, trig_data
from .radial import (Profile1D, RadialProfile, ball_bound, poly_profile,
                     saturation_constants, saturation_sweep, shoot,
                     solve_radial_bvp, tail_integral)
from .linearize import (CascadeSolution, cascade_solve, cascade_solve_even,
                        check_integral_identities, dn_amplitude_derivative,
                        estimate_envelope, rigidity_probe_t1,
                        second_linearization)
