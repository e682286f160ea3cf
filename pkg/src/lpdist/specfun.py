"""Special functions and the moment constants of p-generalized Gaussians."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "PIndex",
    "PLike",
    "as_pindex",
    "log_gamma",
    "log_beta",
    "stirling_remainder",
    "mp_ratio",
    "abs_moment",
    "norm_const",
    "reg_inc_beta",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PIndex:
    """Norm index ``p``: a finite real ``p >= 1`` or infinity.

    ``value`` is ``None`` for the infinite index, so no finite instance ever
    carries ``inf`` inside it. Use :data:`PIndex.INF` or :func:`as_pindex`.
    """

    value: float | None

    def __post_init__(self) -> None:
        if self.value is None:
            return
        v = float(self.value)
        if math.isnan(v) or math.isinf(v) or v < 1.0:
            raise DomainError(f"p must be a finite real >= 1 (or infinity), got {self.value!r}")
        object.__setattr__(self, "value", v)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    @property
    def inv(self) -> float:
        """``1/p``, with ``1/inf := 0``."""
        return 0.0 if self.value is None else 1.0 / self.value

    @property
    def finite(self) -> float:
        """The finite value; raises for the infinite index."""
        if self.value is None:
            raise DomainError("operation requires a finite p")
        return self.value

    def as_float(self) -> float:
        return math.inf if self.value is None else self.value

    def __str__(self) -> str:
        if self.value is None:
            return "inf"
        return format(self.value, "g")


PIndex.INF = PIndex(None)  # type: ignore[attr-defined]

PLike = Union[PIndex, float, int, str]


def as_pindex(p: PLike) -> PIndex:
    """Coerce ``2``, ``2.5``, ``"inf"``, ``math.inf`` or a PIndex to a PIndex."""
    if isinstance(p, PIndex):
        return p
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "+inf", "∞"):
            return PIndex.INF  # type: ignore[attr-defined]
        try:
            p = float(s)
        except ValueError as exc:
            raise DomainError(f"cannot parse p from {p!r}") from exc
    if isinstance(p, (int, float, np.integer, np.floating)):
        if math.isinf(float(p)) and float(p) > 0:
            return PIndex.INF  # type: ignore[attr-defined]
        return PIndex(float(p))
    raise DomainError(f"cannot interpret {p!r} as a norm index")


def log_gamma(x: float) -> float:
    """``ln Γ(x)`` for ``x > 0``."""
    x = float(x)
    if not x > 0.0 or math.isinf(x):
        raise DomainError(f"log_gamma requires a finite x > 0, got {x!r}")
    return math.lgamma(x)


def stirling_remainder(x: float) -> float:
    """Binet remainder ``ln Γ(x) - [(x-1/2) ln x - x + ln √(2π)]``.

    Used to form differences of large log-gammas without cancellation.
    """
    if x >= 15.0:
        r = 1.0 / x
        r2 = r * r
        return r * (
            1.0 / 12.0
            - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
            - r2 * (1.0 / 1680.0
            - r2 * (1.0 / 1188.0
            - r2 * (691.0 / 360360.0)))))
        )
    return math.lgamma(x) - ((x - 0.5) * math.log(x) - x + _HALF_LOG_2PI)


def log_beta(a: float, b: float) -> float:
    """``ln B(a, b)`` accurate also when one or both arguments are large."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"log_beta requires a, b > 0, got ({a!r}, {b!r})")
    s = a + b
    return (
        (a - 0.5) * -math.log1p(b / a)
        + b * math.log(b / s)
        - 0.5 * math.log(b)
        + _HALF_LOG_2PI
        + stirling_remainder(a)
        + stirling_remainder(b)
        - stirling_remainder(s)
    )


def mp_ratio(p: PLike, alpha: float) -> float:
    """The bare ratio ``M_p(α) = Γ((α+1)/p) / Γ(1/p)``; finite p only."""
    pi = as_pindex(p)
    if pi.is_infinite:
        raise DomainError("mp_ratio is undefined at p = inf; use abs_moment")
    if not alpha >= 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")
    pv = pi.finite
    return math.exp(log_gamma((alpha + 1.0) / pv) - log_gamma(1.0 / pv))


def abs_moment(p: PLike, alpha: float) -> float:
    """``E|g|^α`` for a p-generalized Gaussian ``g``.

    Finite p gives ``p^(α/p) M_p(α)``; ``p = inf`` is the uniform law on
    [-1, 1], giving ``1/(α+1)``.
    """
    pi = as_pindex(p)
    if not alpha >= 0.0:
        raise DomainError(f"alpha must be >= 0, got {alpha!r}")
    if pi.is_infinite:
        return 1.0 / (alpha + 1.0)
    pv = pi.finite
    return math.exp(
        (alpha / pv) * math.log(pv) + log_gamma((alpha + 1.0) / pv) - log_gamma(1.0 / pv)
    )


def norm_const(p: PLike) -> float:
    """Normalizer ``C_p = 2 p^(1/p) Γ(1 + 1/p)`` of ``exp(-|x|^p / p)``; 2 at infinity."""
    pi = as_pindex(p)
    if pi.is_infinite:
        return 2.0
    pv = pi.finite
    return 2.0 * math.exp(math.log(pv) / pv + log_gamma(1.0 + 1.0 / pv))


_CF_TINY = 1e-300


def _betacf(a: float, b: float, x: np.ndarray, eps: float, max_iter: int) -> np.ndarray:
    # modified Lentz evaluation of the incomplete-beta continued fraction, all lanes at once
    c = np.ones_like(x)
    d = 1.0 - (a + b) * x / (a + 1.0)
    d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > eps
        if not active.any():
            return h
    raise ConvergenceError(f"incomplete beta continued fraction did not converge (a={a}, b={b})")


def reg_inc_beta(a: float, b: float, x, *, eps: float = 1e-15, max_iter: int = 100_000):
    """Regularized incomplete beta ``I_x(a, b)``; ``x`` may be scalar or array.

    Continued fraction with the usual switch to ``1 - I_{1-x}(b, a)`` for
    ``x > (a+1)/(a+b+2)``.
    """
    if not (a > 0.0 and b > 0.0) or math.isinf(a) or math.isinf(b):
        raise DomainError(f"reg_inc_beta requires finite a, b > 0, got ({a!r}, {b!r})")
    xa = np.asarray(x, dtype=float)
    if np.isnan(xa).any() or (xa < 0.0).any() or (xa > 1.0).any():
        raise DomainError("reg_inc_beta requires 0 <= x <= 1")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = np.empty_like(xa)
    out[xa == 0.0] = 0.0
    out[xa == 1.0] = 1.0
    inner = (xa > 0.0) & (xa < 1.0)
    if inner.any():
        lb = log_beta(a, b)
        xi = xa[inner]
        flip = xi > (a + 1.0) / (a + b + 2.0)
        res = np.empty_like(xi)
        if (~flip).any():
            xs = xi[~flip]
            front = np.exp(a * np.log(xs) + b * np.log1p(-xs) - lb) / a
            res[~flip] = front * _betacf(a, b, xs, eps, max_iter)
        if flip.any():
            xs = 1.0 - xi[flip]
            front = np.exp(b * np.log(xs) + a * np.log(xi[flip]) - lb) / b
            res[flip] = 1.0 - front * _betacf(b, a, xs, eps, max_iter)
        out[inner] = np.clip(res, 0.0, 1.0)
    return float(out[0]) if scalar else out
