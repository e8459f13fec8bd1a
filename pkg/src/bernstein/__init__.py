"""Bernstein-process view of the CIR short-rate model.

Closed-form BESQ/CIR densities, the forward and backward solutions
``eta`` and ``eta_star``, finite-difference certification of the heat
equations with potential ``V(q) = A/q^2 + B q^2``, and exact or Euler
Monte Carlo with KS comparisons.
"""
from .densities import (
    CdfTable,
    DensityCurve,
    DensitySpec,
    Grid1D,
    Law,
    besq_density,
    cdf,
    density_curve,
    eta_star,
    moment,
    rho,
    rho_positive,
    rho_zero,
    total_mass,
    x_density,
    z_second_moment,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ModelMismatch,
    QuadratureError,
    SchemeError,
)
from .mc import KsResult, SampleSet, ks_test, ks_two_sample, sample_besq, sample_x, sample_z
from .model import (
    DerivedParams,
    InitialCondition,
    ModelParams,
    derive,
    drift_backward,
    drift_forward,
    eta,
    potential_v,
)
from .pde import (
    ResidualReport,
    StencilPolicy,
    residual_bessel_ode,
    residual_c1,
    residual_c2,
    residual_fokker_planck,
)
from .specfun import SeriesPolicy, bessel_i, bessel_i_derivs, bessel_j, log_bessel_i

__version__ = "0.1.0"
