"""Coherent backscattering of intense laser light by two dipole-coupled atoms.

The two-atom master equation is solved to second order in the far-field
photon-exchange coupling and averaged over the relative atomic position,
giving ladder, crossed and elastic intensities and the enhancement factor.
"""
from .averaging import AverageSpec, average_observable, fibonacci_sphere, sample_configurations
from .model import (
    BASIS,
    Configuration,
    DriveParams,
    Superoperator,
    build_coupling_blocks,
    build_dipole_operator,
    build_full_liouvillian,
    build_single_atom_liouvillian,
    coupling_g,
)
from .observables import (
    CbsPoint,
    cbs_at,
    cbs_point,
    crossed_term,
    elastic_analytic,
    elastic_components,
    enhancement,
    inelastic_components,
    intensity_expectations,
    ladder_term,
    theta_profile,
)
from .oracle import exact_steady_state, richardson_order2, time_integrate
from .perturbation import (
    BatchSolver,
    PerturbativeState,
    SteadyStateSolver,
    solve_configuration,
    solve_order0,
    solve_order_n,
    solve_perturbative,
)
from .spherical import Level, SphericalVector

__version__ = "0.1.0"
