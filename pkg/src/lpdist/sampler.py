"""Seeded exact samplers for l_p^n balls, their boundaries and the distance statistics.

Every sampler draws from a :class:`RandomStream`, a counter-based Philox
generator keyed by ``(seed, substream_id)``. Equal keys replay identical
sequences; distinct substream ids give independent streams, which is what
lets batch drivers split work across workers without changing results.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import PIndex, PLike, as_pindex

__all__ = [
    "RandomStream",
    "DomainKind",
    "PointSample",
    "sample_gamma",
    "log_gamma_draw",
    "sample_pgauss",
    "sample_boundary",
    "sample_ball",
    "sample_pair_distance",
    "sample_surrogate",
    "boundary_from_gauss",
    "lp_norm",
]

_MASK64 = (1 << 64) - 1


class RandomStream:
    """Counter-based random stream identified by ``(seed, substream_id)``."""

    def __init__(self, seed: int, substream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.substream_id = int(substream_id) & _MASK64
        key = np.array([self.seed, self.substream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, substream_id: int) -> "RandomStream":
        """A fresh stream with the same seed and a different substream id."""
        return RandomStream(self.seed, substream_id)

    def uniform(self, size=None):
        """Uniform on the open interval (0, 1); never returns 0."""
        u = self._gen.random(size)
        # Generator.random is [0, 1); reflect to (0, 1]
        return 1.0 - u

    def signs(self, size=None):
        bits = self._gen.integers(0, 2, size=size, dtype=np.int8)
        return 1.0 - 2.0 * bits

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, substream_id={self.substream_id})"


class DomainKind(str, enum.Enum):
    BALL_INTERIOR = "ball"
    BALL_BOUNDARY = "boundary"

    @classmethod
    def parse(cls, value: "DomainKind | str") -> "DomainKind":
        if isinstance(value, DomainKind):
            return value
        v = str(value).strip().lower()
        if v in ("ball", "interior", "ballinterior", "ball_interior"):
            return cls.BALL_INTERIOR
        if v in ("boundary", "sphere", "ballboundary", "ball_boundary"):
            return cls.BALL_BOUNDARY
        raise DomainError(f"unknown domain {value!r}; expected 'ball' or 'boundary'")


def lp_norm(x: np.ndarray, p: PIndex) -> np.ndarray:
    """``||x||_p`` over the last axis."""
    a = np.abs(x)
    if p.is_infinite:
        return a.max(axis=-1)
    pv = p.finite
    if pv == 2.0:
        return np.sqrt(np.einsum("...i,...i->...", x, x))
    if pv == 1.0:
        return a.sum(axis=-1)
    if pv <= 32.0:
        return (a ** pv).sum(axis=-1) ** (1.0 / pv)
    # large p: scale by the max entry so |x|^p cannot overflow
    m = a.max(axis=-1, keepdims=True)
    m = np.where(m > 0, m, 1.0)
    return m[..., 0] * ((a / m) ** pv).sum(axis=-1) ** (1.0 / pv)


@dataclass(frozen=True)
class PointSample:
    """Coordinates of one point (shape ``(n,)``) or a stack of points (``(k, n)``)."""

    coords: np.ndarray
    p: PIndex
    domain: DomainKind

    @property
    def n(self) -> int:
        return self.coords.shape[-1]

    def norms(self) -> np.ndarray:
        return lp_norm(self.coords, self.p)

    def check(self, tol: float = 1e-12) -> bool:
        """True when the domain invariant holds for every stored point."""
        r = self.norms()
        if self.domain is DomainKind.BALL_BOUNDARY:
            return bool(np.all(np.abs(r - 1.0) <= tol))
        return bool(np.all(r <= 1.0 + tol))


def log_gamma_draw(stream: RandomStream, shape: float, size=None):
    """Natural log of Gamma(shape, 1) draws.

    Shapes below one use ``G_a = G_{a+1} U^{1/a}`` on the log scale, so tiny
    shapes (large p) never underflow to ``log 0``.
    """
    if not shape > 0.0:
        raise DomainError(f"gamma shape must be > 0, got {shape!r}")
    gen = stream.generator
    if shape >= 1.0:
        return np.log(gen.standard_gamma(shape, size))
    g = gen.standard_gamma(shape + 1.0, size)
    u = stream.uniform(size)
    return np.log(g) + np.log(u) / shape


def sample_gamma(stream: RandomStream, shape: float, size=None):
    """Exact Gamma(shape, scale 1) draws."""
    if not shape > 0.0:
        raise DomainError(f"gamma shape must be > 0, got {shape!r}")
    if shape >= 1.0:
        return stream.generator.standard_gamma(shape, size)
    return np.exp(log_gamma_draw(stream, shape, size))


def _pgauss_magnitude(stream: RandomStream, pv: float, size):
    # |g|^p / p ~ Gamma(1/p, 1)
    lg = log_gamma_draw(stream, 1.0 / pv, size)
    return np.exp((math.log(pv) + lg) / pv)


def sample_pgauss(stream: RandomStream, p: PLike, size=None):
    """Draws with density ``exp(-|x|^p/p) / C_p``; uniform on [-1, 1] at p = inf."""
    pi = as_pindex(p)
    if pi.is_infinite:
        return stream.generator.uniform(-1.0, 1.0, size)
    mag = _pgauss_magnitude(stream, pi.finite, size)
    return mag * stream.signs(size)


def boundary_from_gauss(g: np.ndarray, p: PLike) -> np.ndarray:
    """Project generalized-Gaussian vectors onto the unit sphere of ``||.||_p``."""
    pi = as_pindex(p)
    return g / lp_norm(g, pi)[..., None]


def _shape(n: int, size) -> tuple[int, ...]:
    if n < 1:
        raise DomainError(f"dimension n must be >= 1, got {n!r}")
    return (int(n),) if size is None else (int(size), int(n))


def _cube_boundary(stream: RandomStream, n: int, size) -> np.ndarray:
    shape = _shape(n, size)
    x = stream.generator.uniform(-1.0, 1.0, shape)
    k = stream.generator.integers(0, n, size=shape[:-1])
    s = stream.signs(shape[:-1])
    if size is None:
        x[k] = s
    else:
        x[np.arange(shape[0]), k] = s
    return x


def sample_boundary(stream: RandomStream, p: PLike, n: int, size=None) -> PointSample:
    """Cone-measure uniform point(s) on the unit sphere of ``||.||_p``.

    At p = inf a uniformly chosen coordinate is replaced by a random sign,
    which is exactly uniform on the cube surface.
    """
    pi = as_pindex(p)
    if pi.is_infinite:
        coords = _cube_boundary(stream, n, size)
    else:
        g = sample_pgauss(stream, pi, _shape(n, size))
        coords = boundary_from_gauss(g, pi)
    return PointSample(coords, pi, DomainKind.BALL_BOUNDARY)


def sample_ball(stream: RandomStream, p: PLike, n: int, size=None) -> PointSample:
    """Uniform point(s) in the unit ball of ``||.||_p``."""
    pi = as_pindex(p)
    shape = _shape(n, size)
    if pi.is_infinite:
        coords = stream.generator.uniform(-1.0, 1.0, shape)
    else:
        g = sample_pgauss(stream, pi, shape)
        radius = np.exp(np.log(stream.uniform(shape[:-1])) / n)
        coords = boundary_from_gauss(g, pi) * np.asarray(radius)[..., None]
    return PointSample(coords, pi, DomainKind.BALL_INTERIOR)


def _distance_scale(pi: PIndex, n: int) -> float:
    return float(n) ** (pi.inv - 0.5)


def sample_pair_distance(stream: RandomStream, p: PLike, n: int, domain, size=None):
    """The normalized distance ``n^(1/p - 1/2) ||X - Y||_2`` of two independent points."""
    pi = as_pindex(p)
    dom = DomainKind.parse(domain)
    draw = sample_boundary if dom is DomainKind.BALL_BOUNDARY else sample_ball
    x = draw(stream, pi, n, size).coords
    y = draw(stream, pi, n, size).coords
    d = x - y
    return _distance_scale(pi, n) * np.sqrt(np.einsum("...i,...i->...", d, d))


def sample_surrogate(stream: RandomStream, p: PLike, n: int, size=None):
    """``n^(1/p-1/2) ||G - G'||_2 / ||G||_p`` built from two fresh Gaussian-type vectors."""
    pi = as_pindex(p)
    if pi.is_infinite:
        raise DomainError("the surrogate statistic is defined for finite p only")
    shape = _shape(n, size)
    g = sample_pgauss(stream, pi, shape)
    h = sample_pgauss(stream, pi, shape)
    d = g - h
    return _distance_scale(pi, n) * np.sqrt(np.einsum("...i,...i->...", d, d)) / lp_norm(g, pi)
