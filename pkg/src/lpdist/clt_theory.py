"""CLT constants for the normalized distance, the exact sphere law, and empirical checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .sampler import DomainKind
from .specfun import PIndex, PLike, abs_moment, as_pindex, reg_inc_beta, stirling_remainder
from .stats import SampleBatch, empirical_moments, ks_critical, ks_distance, ks_statistic, run_batch

__all__ = [
    "CltConstants",
    "CltReport",
    "clt_center",
    "clt_variance",
    "clt_variance_joint_delta",
    "clt_constants",
    "sphere_cdf",
    "sphere_mean",
    "sphere_variance",
    "clt_report",
    "report_from_batch",
]

SIGMA2_SPHERE_LIMIT = 0.5


def clt_center(p: PLike) -> float:
    """Centering constant ``sqrt(2 E|g|^2)``; ``sqrt(2/3)`` for the cube."""
    return math.sqrt(2.0 * abs_moment(as_pindex(p), 2.0))


def clt_variance(p: PLike) -> float:
    """The stated limiting variance ``p^(2/p) (M_p(4) + M_p(2)^2) / (4 M_p(2))``.

    Written with the corrected moments ``m_k = E|g|^k`` this is
    ``(m4 + m2^2) / (4 m2)``, which is also how the cube value 7/30 arises.
    """
    pi = as_pindex(p)
    if pi.is_infinite:
        return 7.0 / 30.0
    m2 = abs_moment(pi, 2.0)
    m4 = abs_moment(pi, 4.0)
    return (m4 + m2 * m2) / (4.0 * m2)


def clt_variance_joint_delta(p: PLike) -> float:
    """Delta-method variance that keeps the random ``||G||_p`` normalization.

    With ``m_k = E|g|^k``: ``(m4 + m2^2 - 4 m2^2 / p) / (4 m2)``. The last term
    comes from the covariance ``2 m2`` between ``|g - g'|^2`` and ``|g|^p``;
    it vanishes at p = inf, where the sampler has no normalization step.
    """
    pi = as_pindex(p)
    if pi.is_infinite:
        return 7.0 / 30.0
    m2 = abs_moment(pi, 2.0)
    m4 = abs_moment(pi, 4.0)
    return (m4 + m2 * m2 - 4.0 * m2 * m2 / pi.finite) / (4.0 * m2)


@dataclass(frozen=True)
class CltConstants:
    p: PIndex
    center: float
    sigma2: float
    sigma2_alternate: float | None = None
    sigma2_joint_delta: float | None = None

    def __post_init__(self) -> None:
        if not (self.center > 0 and self.sigma2 > 0):
            raise ValueError("center and sigma2 must be positive")

    def to_dict(self) -> dict:
        return {
            "p": str(self.p),
            "center": self.center,
            "sigma2": self.sigma2,
            "sigma2_alternate": self.sigma2_alternate,
            "sigma2_joint_delta": self.sigma2_joint_delta,
        }


def clt_constants(p: PLike) -> CltConstants:
    pi = as_pindex(p)
    alt = SIGMA2_SPHERE_LIMIT if (not pi.is_infinite and pi.finite == 2.0) else None
    return CltConstants(pi, clt_center(pi), clt_variance(pi), alt, clt_variance_joint_delta(pi))


def _check_n(n: int) -> int:
    if int(n) != n or n < 2:
        raise DomainError(f"sphere law needs an integer n >= 2, got {n!r}")
    return int(n)


def sphere_cdf(n: int, t):
    """``P(|X - Y| <= t)`` for independent uniform points on the unit sphere in R^n.

    With ``a = 1 - t^2/2`` the probability is ``I_{1-a^2}((n-1)/2, 1/2) / 2``
    for ``a >= 0`` and one minus that for ``a < 0``.
    """
    n = _check_n(n)
    ta = np.asarray(t, dtype=float)
    scalar = ta.ndim == 0
    ta = np.atleast_1d(ta)
    out = np.where(ta >= 2.0, 1.0, 0.0)
    mid = (ta > 0.0) & (ta < 2.0)
    if mid.any():
        tm = ta[mid]
        # 1 - a^2 = (t^2/2)(2 - t^2/2), formed without cancellation
        h = 0.5 * tm * tm
        s = np.clip(h * (2.0 - h), 0.0, 1.0)
        half = 0.5 * reg_inc_beta(0.5 * (n - 1), 0.5, s)
        out[mid] = np.where(h <= 1.0, half, 1.0 - half)
    return float(out[0]) if scalar else out


def _sphere_log_excess(n: int) -> float:
    # ln(mean / sqrt 2), assembled from Stirling remainders so large n keeps full precision
    return (
        -(n - 1) * math.log1p(-1.0 / (2.0 * n))
        - 0.5
        + 2.0 * stirling_remainder(0.5 * n)
        - stirling_remainder(n - 0.5)
    )


def sphere_mean(n: int) -> float:
    """``E|X - Y| = 2^(n-1) Γ(n/2)^2 / (√π Γ(n - 1/2))``."""
    n = _check_n(n)
    return math.sqrt(2.0) * math.exp(_sphere_log_excess(n))


def sphere_variance(n: int) -> float:
    """``2 - E|X - Y|^2``, via ``expm1`` so the O(1/n) value keeps its digits."""
    n = _check_n(n)
    return max(0.0, -2.0 * math.expm1(2.0 * _sphere_log_excess(n)))


@dataclass(frozen=True)
class CltReport:
    constants: CltConstants
    p: PIndex
    n: int
    domain: DomainKind
    trials: int
    seed: int
    mean_t: float
    se_mean_t: float
    mean_z: float
    var_z: float
    se_var_z: float
    ks_vs_theory: float
    ks_vs_alternate: float | None
    ks_vs_joint_delta: float | None
    ks_vs_exact: float | None
    ks_critical_99: float
    verdicts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "p": str(self.p),
            "n": self.n,
            "domain": self.domain.value,
            "trials": self.trials,
            "seed": self.seed,
            "theory": self.constants.to_dict(),
            "empirical": {
                "mean_t": self.mean_t,
                "se_mean_t": self.se_mean_t,
                "mean_z": self.mean_z,
                "var_z": self.var_z,
                "se_var_z": self.se_var_z,
            },
            "ks": self.ks_vs_theory,
            "ks_alternate": self.ks_vs_alternate,
            "ks_joint_delta": self.ks_vs_joint_delta,
            "ks_exact": self.ks_vs_exact,
            "ks_critical_99": self.ks_critical_99,
            "verdicts": dict(self.verdicts),
        }


def _variance_se(z: np.ndarray, var: float) -> float:
    # large-sample SE of the sample variance: sqrt((mu4 - var^2) / N)
    c = z - z.mean()
    mu4 = float(np.mean(c**4))
    return math.sqrt(max(mu4 - var * var, 0.0) / z.size)


def report_from_batch(batch: SampleBatch) -> CltReport:
    """Compare ``Z = sqrt(n)(T_n - center)`` from ``batch`` with the CLT constants."""
    if batch.trials < 100:
        raise DomainError("clt_report needs at least 100 trials")
    const = clt_constants(batch.p)
    n = batch.n
    t_mom = empirical_moments(batch)
    z = math.sqrt(n) * (batch.values - const.center)
    z_mom = empirical_moments(z)
    se_var = _variance_se(z, z_mom.variance)

    ks_theory = ks_distance(z, 0.0, const.sigma2)
    ks_alt = ks_distance(z, 0.0, const.sigma2_alternate) if const.sigma2_alternate else None
    ks_joint = ks_distance(z, 0.0, const.sigma2_joint_delta) if const.sigma2_joint_delta else None
    ks_exact = None
    if (
        not batch.p.is_infinite
        and batch.p.finite == 2.0
        and batch.domain is DomainKind.BALL_BOUNDARY
        and n >= 2
    ):
        # at p = 2 the raw statistic is the chord length on the sphere
        ks_exact = ks_statistic(batch.values, lambda t: sphere_cdf(n, t))

    crit = ks_critical(batch.trials)
    verdicts: dict = {
        "center_within_4se_plus_half_over_n": abs(t_mom.mean - const.center)
        <= 4.0 * t_mom.std_error_mean + 0.5 / n,
        "ks_theory_within_99": ks_theory <= crit,
    }
    if ks_alt is not None:
        gap = abs(const.sigma2 - const.sigma2_alternate)
        verdicts["variance_separation_se"] = gap / se_var if se_var > 0 else math.inf
        verdicts["variance_z_theory"] = (z_mom.variance - const.sigma2) / se_var if se_var > 0 else math.inf
        verdicts["variance_z_alternate"] = (
            (z_mom.variance - const.sigma2_alternate) / se_var if se_var > 0 else math.inf
        )
        closer = "alternate" if ks_alt < ks_theory else "theory"
        by_var = (
            "alternate"
            if abs(z_mom.variance - const.sigma2_alternate) < abs(z_mom.variance - const.sigma2)
            else "theory"
        )
        verdicts["preferred_by_ks"] = closer
        verdicts["preferred_by_variance"] = by_var
        verdicts["decision_unambiguous"] = bool(
            verdicts["variance_separation_se"] >= 10.0 and closer == by_var
        )
    return CltReport(
        constants=const,
        p=batch.p,
        n=n,
        domain=batch.domain,
        trials=batch.trials,
        seed=batch.seed,
        mean_t=t_mom.mean,
        se_mean_t=t_mom.std_error_mean,
        mean_z=z_mom.mean,
        var_z=z_mom.variance,
        se_var_z=se_var,
        ks_vs_theory=ks_theory,
        ks_vs_alternate=ks_alt,
        ks_vs_joint_delta=ks_joint,
        ks_vs_exact=ks_exact,
        ks_critical_99=crit,
        verdicts=verdicts,
    )


def clt_report(
    p: PLike, n: int, domain, trials: int, seed: int, workers: int = 1
) -> CltReport:
    """Run a batch and build the CLT verification report for it."""
    if trials < 100:
        raise DomainError("clt_report needs at least 100 trials")
    return report_from_batch(run_batch(p, n, domain, trials, seed, workers))
