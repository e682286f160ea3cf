"""Batch Monte Carlo driver and empirical statistics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, ResourceError
from .sampler import DomainKind, RandomStream, sample_pair_distance
from .specfun import PIndex, PLike, as_pindex

__all__ = [
    "SampleBatch",
    "MomentSummary",
    "RunningMoments",
    "block_size_for",
    "run_batch",
    "stream_moments",
    "empirical_moments",
    "ks_statistic",
    "ks_distance",
    "ks_critical",
    "empirical_tail_rate",
    "tail_rates_shared",
    "MEMORY_BUDGET_BYTES",
]

# stored values plus per-worker scratch (two point stacks and their difference)
MEMORY_BUDGET_BYTES = 4 * 1024**3
_BLOCK_ELEMENTS = 1 << 21


def block_size_for(n: int) -> int:
    """Trials per block; a pure function of ``n`` so replay never depends on workers."""
    return max(1, min(1 << 16, _BLOCK_ELEMENTS // max(1, int(n))))


@dataclass(frozen=True)
class SampleBatch:
    """Draws of the normalized distance statistic plus the parameters that produced them."""

    values: np.ndarray
    p: PIndex
    n: int
    domain: DomainKind
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.values.shape != (self.trials,):
            raise ValueError("values.length must equal trials")
        self.values.setflags(write=False)


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    count: int
    std_error_mean: float


@dataclass
class RunningMoments:
    """Mergeable count/mean/M2 accumulator (Chan et al. pairwise update)."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, values: np.ndarray) -> "RunningMoments":
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            return self
        mu = float(v.mean())
        other = RunningMoments(v.size, mu, float(((v - mu) ** 2).sum()))
        return self.merge(other)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / n
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.count = n
        return self

    def summary(self) -> MomentSummary:
        if self.count == 0:
            raise ValueError("empty batch has no moments")
        var = self.m2 / (self.count - 1) if self.count > 1 else 0.0
        var = max(var, 0.0)
        return MomentSummary(self.mean, var, self.count, math.sqrt(var / self.count))


def _check_common(n: int, trials: int, workers: int) -> None:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")


def _blocks(trials: int, n: int) -> list[tuple[int, int, int]]:
    b = block_size_for(n)
    out = []
    for k, start in enumerate(range(0, trials, b)):
        out.append((k, start, min(b, trials - start)))
    return out


def _draw_block(seed: int, block: int, count: int, p: PIndex, n: int, domain: DomainKind):
    stream = RandomStream(seed, block)
    return np.atleast_1d(sample_pair_distance(stream, p, n, domain, size=count))


def run_batch(
    p: PLike,
    n: int,
    domain,
    trials: int,
    seed: int,
    workers: int = 1,
    *,
    memory_budget: int | None = None,
) -> SampleBatch:
    """Draw ``trials`` independent distance statistics.

    Trial block ``k`` always uses substream ``k``, so the returned array is
    identical for any ``workers``.
    """
    pi = as_pindex(p)
    dom = DomainKind.parse(domain)
    _check_common(n, trials, workers)
    budget = MEMORY_BUDGET_BYTES if memory_budget is None else memory_budget
    need = 8 * trials + workers * 8 * 3 * block_size_for(n) * n
    if need > budget:
        raise ResourceError(
            f"batch needs ~{need} bytes (> budget {budget}); use stream_moments for moments"
        )
    values = np.empty(trials)
    blocks = _blocks(trials, n)

    def work(blk):
        k, start, count = blk
        values[start : start + count] = _draw_block(seed, k, count, pi, n, dom)

    if workers == 1 or len(blocks) == 1:
        for blk in blocks:
            work(blk)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, blocks))
    return SampleBatch(values, pi, int(n), dom, int(trials), int(seed))


def stream_moments(p: PLike, n: int, domain, trials: int, seed: int, workers: int = 1) -> MomentSummary:
    """Moments of the same draws :func:`run_batch` would produce, without storing them."""
    pi = as_pindex(p)
    dom = DomainKind.parse(domain)
    _check_common(n, trials, workers)
    blocks = _blocks(trials, n)

    def work(blk):
        k, _, count = blk
        return RunningMoments().update(_draw_block(seed, k, count, pi, n, dom))

    if workers == 1:
        parts = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, blocks))
    acc = RunningMoments()
    for part in parts:  # fixed merge order
        acc.merge(part)
    return acc.summary()


def empirical_moments(batch: SampleBatch | np.ndarray) -> MomentSummary:
    """Mean, unbiased variance and standard error, via chunked pairwise merging."""
    values = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    if values.size == 0:
        raise ValueError("empty batch has no moments")
    acc = RunningMoments()
    for chunk in np.array_split(values, max(1, values.size // 65536)):
        acc.update(chunk)
    return acc.summary()


def ks_statistic(values, cdf) -> float:
    """Sup distance between the empirical CDF of ``values`` and a reference ``cdf``.

    Both one-sided gaps are taken at each sorted point, which also handles ties.
    """
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("ks_statistic needs at least one value")
    f = np.asarray(cdf(x), dtype=float)
    n = x.size
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(min(1.0, max(d_plus, d_minus, 0.0)))


def ks_distance(values, center: float, sigma2: float) -> float:
    """KS distance of ``values`` to the normal law N(center, sigma2)."""
    if not sigma2 > 0.0:
        raise DomainError(f"sigma2 must be > 0, got {sigma2!r}")
    s = math.sqrt(sigma2)
    return ks_statistic(values, lambda x: ndtr((x - center) / s))


def ks_critical(count: int, level: float = 0.99) -> float:
    """Asymptotic one-sample KS critical value at the given confidence level."""
    c = {0.90: 1.224, 0.95: 1.358, 0.99: 1.628}[level]
    return c / math.sqrt(count)


def _rate_from_hits(hits: int, trials: int, n: int) -> float:
    return -math.log(max(hits, 1) / trials) / n


def tail_rates_shared(batch: SampleBatch, zs) -> list[tuple[float, float, int]]:
    """``(z, -(1/n) ln P(T_n >= z), hits)`` for several thresholds on one common sample.

    Sharing the sample makes the estimates non-decreasing in ``z``.
    """
    v = np.sort(batch.values)
    out = []
    for z in zs:
        hits = int(v.size - np.searchsorted(v, z, side="left"))
        out.append((float(z), _rate_from_hits(hits, batch.trials, batch.n), hits))
    return out


def empirical_tail_rate(
    p: PLike, n: int, domain, z: float, trials: int, seed: int, workers: int = 1
) -> tuple[float, int]:
    """Estimate ``-(1/n) ln P(T_n >= z)``.

    Returns ``(rate, hits)``. Zero hits give the censored value
    ``ln(trials)/n``, a lower bound on the true rate.
    """
    batch = run_batch(p, n, domain, trials, seed, workers)
    _, rate, hits = tail_rates_shared(batch, [z])[0]
    return rate, hits
