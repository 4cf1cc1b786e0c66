"""First-passage functionals and inverse problems for one-dimensional
diffusions with Poissonian stochastic resetting.

The package is organized around six parts: density families (candidate
solutions of the inverse problems), closed-form kernels and a nonlocal
boundary-value solver, forward mixtures of those kernels, inverse solvers,
a Monte Carlo oracle, and a command-line front end with a regression suite
of reference cases.
"""

from .densities import (
    Beta,
    Binomial,
    DensityFamily,
    DiscreteUniform,
    Exponential,
    Gamma,
    Geometric,
    Linear,
    PointMass,
    Poisson,
    ScaledBeta,
    Triangular,
    TruncatedExponential,
    Uniform,
    family_from_dict,
)
from .analytic import (
    BmResetCoefficients,
    BrownianDrift,
    ConjugationMap,
    Custom,
    DiffusionModel,
    Feller,
    GeometricBM,
    Interval,
    OrnsteinUhlenbeck,
    ResetSpec,
    WrightFisher,
    bm_coefficients,
    bvp_solve,
    conjugate_transform,
    feller_map,
    fpt_lt_bm,
    identity_map,
    mean_fet_bm,
    mean_fpt_bm,
    pi0_bm,
    pi0_classical,
    pi0_conjugated,
    wright_fisher_map,
)
from .forward import (
    ForwardRequest,
    fpt_lt_case1,
    fpt_lt_case2,
    mean_fet_case1,
    mean_fet_case2,
    mean_fpt_case1,
    mean_fpt_case2,
    q_case1,
    q_case1_general,
    q_case2,
)
from .inverse import (
    FptLawSpec,
    InverseProblem,
    InverseSolution,
    SearchSpace,
    ifpp_linear_closed_form,
    ifpt_ghat_from_fhat,
    laplace_invert,
    moments_from_lt,
    solve_ifpp,
    solve_ifpt,
    solve_imfet,
    solve_imfpt,
)
from .simulate import Estimate, FptSamples, SimConfig, estimate_lt, simulate_exit, simulate_fpt
from . import errors

__version__ = "0.1.0"
