"""fracibnr: discounted IBNR claims under fractional Poisson arrivals.

Exact, quadrature-based, asymptotic and Monte Carlo evaluation of the mean,
variance, covariance and correlation of the total discounted
incurred-but-not-reported claim process, plus long-range/short-range
dependence classification of its correlation decay.
"""

from .classify import DependenceClass, classify, correlation_decay, empirical_exponent
from .engine import (
    CustomDelay,
    DelayDistribution,
    ExponentialDelay,
    ModelConfig,
    ParetoDelay,
    QuadratureControl,
    covariance,
    correlation,
    dh_transform,
    joint_moment,
    marginal_moment,
    mean_ibnr,
    variance,
)
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    FracIbnrError,
    NumericalError,
    QuadratureError,
    RangeError,
    TruncationError,
)
from .expo import (
    DecayLaw,
    a_n_coeff,
    expo_cov_asym,
    expo_cov_exact,
    expo_mean_asym,
    expo_mean_exact,
    expo_variance_asym,
    expo_variance_exact,
    w_integral,
)
from .montecarlo import (
    ClaimLaw,
    Estimate,
    ExponentialClaims,
    LogNormalClaims,
    ParetoClaims,
    PointMassClaims,
    SimulationPath,
    Target,
    estimate,
    evaluate_z,
    mc_backend,
    path_generator,
    sample_interarrival,
    sample_path,
)
from .pareto import (
    g_star,
    lemma2_j_asym,
    pareto_cov_asym,
    pareto_mean_asym,
    pareto_mean_exact,
    pareto_variance_asym,
)
from .renewal import (
    RenewalModel,
    count_variance,
    interarrival_survival,
    renewal_density,
    renewal_function,
)
from .specfun import (
    SeriesControl,
    beta_fn,
    gamma_fn,
    gauss_2f1,
    incomplete_beta,
    kummer_1f1,
    kummer_1f1_ln,
    mittag_leffler,
)

__version__ = "0.1.0"
