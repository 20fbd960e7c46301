"""Self-exciting point process toolkit.

Simulation (thinning, exact composition, immigrant-birth clusters, and the
nonlinear/multivariate/marked/discrete/dynamic-contagion/renewal variants),
likelihood and method-of-moments inference, stochastic declustering, and
time-rescaling goodness-of-fit, plus a batch CLI (``hawkes --help``).
"""

from ._kernels import BACKEND
from .core import (
    EventSequence,
    ExpKernel,
    HawkesModel,
    Kernel,
    NonlinearSpec,
    PowerLawKernel,
    branching_ratio,
    compensator,
    conditional_intensity,
    is_stationary,
    kernel_eval,
    kernel_integral,
    rescale_times,
)
from .errors import (
    BoundViolationError,
    DataValidationError,
    FitError,
    HawkesError,
    SimulationError,
)
from .gmm import (
    BinSeries,
    MomentTriple,
    bin_counts,
    empirical_moments,
    fit_gmm,
    fit_gmm_from_moments,
    theoretical_moments,
)
from .infer import (
    DeclusterResult,
    FitResult,
    decluster,
    fit_mle,
    gof_rescaling,
    loglik_discrete,
    loglik_etas,
    loglik_exp_fast,
    loglik_general,
    loglik_mv,
)
from .multivariate import (
    BranchingMatrix,
    MultivariateHawkesModel,
    branching_matrix,
    intensity_k,
    is_stationary_mv,
    spectral_radius,
)
from .renewal import (
    RenewalDensity,
    RenewalHawkesModel,
    VolterraGrid,
    renewal_intensity,
    solve_K,
    solve_M,
)
from .rng import DEFAULT_SEED
from .sim import (
    ConstantJump,
    DiscreteModel,
    DynamicContagionModel,
    EtasModel,
    ExponentialJump,
    simulate_cluster,
    simulate_discrete,
    simulate_dynamic_contagion,
    simulate_etas,
    simulate_exact_exp,
    simulate_multivariate,
    simulate_nonlinear,
    simulate_renewal_hawkes,
    simulate_thinning,
)

__version__ = "0.1.0"
