"""Numerical experiments on multiplicative Diophantine exponents of points on
complex analytic curves, via shortest vectors of lattices moved by a diagonal
flow.

Hot loops live in :mod:`dioflow._kernels` and are compiled with numba unless
``DIOFLOW_DISABLE_JIT=1`` is set in the environment before import.
"""

__version__ = "0.1.0"

from ._accel import JIT_ENABLED  # noqa: E402
from .exterior import Multivector, apply_exterior, plucker, represent_subgroup, wedge  # noqa: E402
from .lattice import LatticeBasis, covolume, delta, enumerate_subgroups, shortest_vector  # noqa: E402
from .flow import ComplexPoint, FlowTime, NumericGuardError, orbit_delta, orbit_lattice  # noqa: E402
from .reduction import ReductionParams, check_22, check_26, corollary23_witnesses, reduce  # noqa: E402
from .exponents import (  # noqa: E402
    ApproxRecord,
    best_approx_records,
    dirichlet_check,
    omega_estimate,
    omega_mult_estimate,
    pi_plus,
)
from .goodness import Ball, GoodFitReport, check_good, combine_good, good_fit, rho1_estimate, rho2_estimate  # noqa: E402
from .maps import AnalyticMap, line_iz, mahler_curve, nonextremal_example  # noqa: E402
from .nondivergence import (  # noqa: E402
    NondivReport,
    borel_cantelli_sum,
    check_213,
    check_214,
    covolume_function,
    f_tilde,
    theorem26_experiment,
)
