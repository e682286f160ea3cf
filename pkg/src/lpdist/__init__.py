"""Random distances in l_p^n balls, from exact sampling to CLT constants and large-deviation rates."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, LpdistError, ResourceError, UnsupportedError
from .specfun import PIndex, abs_moment, as_pindex, log_beta, log_gamma, mp_ratio, norm_const, reg_inc_beta
from .sampler import (
    DomainKind,
    PointSample,
    RandomStream,
    sample_ball,
    sample_boundary,
    sample_gamma,
    sample_pair_distance,
    sample_pgauss,
    sample_surrogate,
)
from .stats import (
    MomentSummary,
    SampleBatch,
    empirical_moments,
    empirical_tail_rate,
    ks_distance,
    run_batch,
    tail_rates_shared,
)
from .clt_theory import (
    CltConstants,
    CltReport,
    clt_center,
    clt_report,
    clt_variance,
    sphere_cdf,
    sphere_mean,
    sphere_variance,
)
from .ldp_rate import (
    MgfEvaluation,
    RateCurve,
    cube_log_mgf,
    cube_rate,
    legendre2,
    log_mgf,
    mgf_domain_contains,
    rate_ball,
    rate_boundary,
    rate_curve,
    rate_radial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
