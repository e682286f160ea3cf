"""Large-deviation rate functions of the normalized distance.

For finite ``p >= 2`` the rate comes from the bivariate log-MGF

    Λ(t1, t2) = ln E exp(t1 |g - g'|^2 + t2 |g'|^p)

of independent p-generalized Gaussians ``g, g'``. That log-MGF is evaluated
by tensor Gauss-Legendre quadrature (closed form at p = 2). Its convex
conjugate is taken by damped Newton, and the constraint infima are then
minimized over one log-scaled variable. The cube (p = inf, interior) uses
the one-dimensional log-MGF of ``|u - u'|^2``.

Rates are floats; ``math.inf`` stands for +∞ and never enters arithmetic
except through comparisons.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clt_theory import clt_center
from .errors import ConvergenceError, DomainError, UnsupportedError
from .quadrature import composite_nodes, dyadic_edges, split_panels
from .sampler import DomainKind
from .specfun import PIndex, PLike, as_pindex, norm_const

__all__ = [
    "MgfEvaluation",
    "ConjugateResult",
    "RatePoint",
    "RateCurve",
    "mgf_domain_contains",
    "log_mgf",
    "legendre2",
    "legendre2_detail",
    "rate_boundary",
    "rate_boundary_detail",
    "rate_radial",
    "rate_sphere_exact",
    "rate_ball",
    "rate_ball_detail",
    "cube_log_mgf",
    "cube_log_mgf_moments",
    "cube_rate",
    "cube_rate_detail",
    "rate_curve",
    "QUAD_TOL",
    "UNBOUNDED_THRESHOLD",
    "GOLDEN_TOL",
]

QUAD_TOL = 1e-11  # |Λ_hi - Λ_lo| accepted per evaluation
TAIL_TOL = 1e-12  # relative mass allowed outside the inner half of the box
UNBOUNDED_THRESHOLD = 1e4
GOLDEN_TOL = 1e-7
_LOG_CUT = 30.0  # the inner half of the box already holds all but ~e^-30 of the mass
_Q_HI, _Q_LO = 16, 12
_K0 = 5  # panels per half-axis before refinement
_MAX_LEVEL = 5


def _ldp_p(p) -> float:
    pi = as_pindex(p)
    if pi.is_infinite:
        raise UnsupportedError("finite p required; the cube rate is cube_rate")
    if pi.finite < 2.0:
        raise UnsupportedError(f"LDP requires p >= 2, got p = {pi}")
    return pi.finite


@dataclass(frozen=True)
class MgfEvaluation:
    t1: float
    t2: float
    value: float
    grad: tuple[float, float]
    quad_error: float
    hessian: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))
    reliable: bool = True
    method: str = "quadrature"


def mgf_domain_contains(p: PLike, t1: float, t2: float) -> bool:
    """Whether ``Λ(t1, t2)`` is finite on an open neighbourhood of the point."""
    pv = _ldp_p(p)
    if pv == 2.0:
        a = 0.5 - t1
        return a > 0.0 and a * (a - t2) - t1 * t1 > 0.0
    return t2 < 1.0 / pv


def _finite_at(pv: float, t1: float, t2: float) -> bool:
    # like mgf_domain_contains, but for p > 2 also admits the face t2 = 1/p with t1 < 0,
    # where the Gaussian factor in x - y still makes the integral converge
    if pv == 2.0:
        a = 0.5 - t1
        return a > 0.0 and a * (a - t2) - t1 * t1 > 0.0
    b = 1.0 / pv
    return t2 < b or (t2 == b and t1 < 0.0)


def _closed_form(t1: float, t2: float):
    delta = (1.0 - 2.0 * t1) * (1.0 - 2.0 * t1 - 2.0 * t2) - 4.0 * t1 * t1
    d1 = -4.0 + 4.0 * t2
    d2 = -2.0 + 4.0 * t1
    grad = np.array([-0.5 * d1 / delta, -0.5 * d2 / delta])
    dd = np.array([d1, d2])
    hess = -0.5 * (np.array([[0.0, 4.0], [4.0, 0.0]]) / delta - np.outer(dd, dd) / delta**2)
    return -0.5 * math.log(delta), grad, hess, 0.0


# ---------------------------------------------------------------------------
# 2-D quadrature of Λ for finite p


def _box(pv: float, t1: float, t2: float) -> tuple[float, float, float]:
    """Half-widths ``(rx, ry, ru)`` of the integration box.

    Each is twice the radius at which the integrand's envelope drops below
    ``e^-30``, so the outer half of the box should carry negligible mass.
    """
    return tuple(2.0 * r for r in _envelope_radii(pv, t1, t2))


def _envelope_radii(pv: float, t1: float, t2: float) -> tuple[float, float, float]:
    L = _LOG_CUT
    ru_gauss = math.sqrt(L / -t1) if t1 < 0.0 else math.inf
    if pv == 2.0:
        negq = np.array([[0.5 - t1, t1], [t1, 0.5 - t1 - t2]])
        lam = float(np.linalg.eigvalsh(negq)[0])
        r = math.sqrt(L / lam)
        return r, r, min(ru_gauss, 2.0 * r)
    c2 = 1.0 / pv - t2
    if t1 <= 0.0:
        rx = (L * pv) ** (1.0 / pv)
        ry = math.inf
        if c2 > 0.0:
            ry = (L / c2) ** (1.0 / pv)
        if t1 < 0.0:
            ry = min(ry, rx + ru_gauss)
        return rx, ry, min(ru_gauss, rx + ry)
    # t1 > 0: (x-y)^2 <= 2x^2 + 2y^2 splits the exponent into f(x) + g(y)
    if not c2 > 0.0:
        raise DomainError("log-MGF is infinite for t1 >= 0 on the face t2 = 1/p")
    fmax = _peak(1.0 / pv, 2.0 * t1, pv)
    gmax = _peak(c2, 2.0 * t1, pv)
    rx = _outer_root(1.0 / pv, 2.0 * t1, pv, L + gmax)
    ry = _outer_root(c2, 2.0 * t1, pv, L + fmax)
    return rx, ry, rx + ry


def _peak(c: float, b: float, pv: float) -> float:
    # max over r >= 0 of b r^2 - c r^p
    r = (2.0 * b / (c * pv)) ** (1.0 / (pv - 2.0))
    return b * r * r - c * r**pv


def _outer_root(c: float, b: float, pv: float, level: float) -> float:
    # largest r with c r^p - b r^2 = level (level > 0)
    def h(r):
        return c * r**pv - b * r * r - level

    lo = (2.0 * b / (c * pv)) ** (1.0 / (pv - 2.0))
    hi = max(2.0 * lo, 1.0)
    while h(hi) <= 0.0:
        lo, hi = hi, 2.0 * hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def _abs_pow(v: np.ndarray, pv: float) -> np.ndarray:
    if pv == 2.0:
        return v * v
    a = np.abs(v)
    if pv == 3.0:
        return a * a * a
    if pv == 4.0:
        a2 = a * a
        return a2 * a2
    return a**pv


def _grid_sum(pv, t1, t2, rx, ry, ru, k, q):
    """Log integral, moment sums and outer-mass fraction on one tensor grid."""
    y_edges = np.linspace(-ry, ry, 2 * k + 1)
    y, wy = composite_nodes(y_edges, q)
    by = _abs_pow(y, pv)
    u_mode = ru < rx
    rin = ru if u_mode else rx
    in_edges = np.linspace(-rin, rin, 2 * k + 1)
    if u_mode:
        # rows follow x - y; the |x|^p kink sits at u = -y, so split there per row
        w, ww = composite_nodes(split_panels(in_edges, -y), q)
        u = w
        x = u + y[:, None]
    else:
        w, ww = composite_nodes(in_edges, q)
        x = w[None, :]
        u = x - y[:, None]
        w = np.broadcast_to(w, u.shape)
    with np.errstate(divide="ignore"):
        logw = np.log(wy)[:, None] + np.log(ww)
    a = u * u
    expo = t1 * a - _abs_pow(x, pv) / pv + ((t2 - 1.0 / pv) * by)[:, None] + logw
    m = float(expo.max())
    e = np.exp(expo - m)
    row = e.sum(axis=1)
    s = float(row.sum())
    ea_row = (e * a).sum(axis=1)
    eaa_row = (e * (a * a)).sum(axis=1)
    sums = np.array(
        [
            ea_row.sum(),
            (row * by).sum(),
            eaa_row.sum(),
            (ea_row * by).sum(),
            (row * by * by).sum(),
        ]
    ) / s
    outer = (np.abs(y) > 0.5 * ry)[:, None] | (np.abs(w) > 0.5 * rin)
    tail = float(e[outer].sum()) / s
    return m + math.log(s), sums, tail


@dataclass
class _QuadWorkspace:
    """Per-call refinement memory; never shared between threads."""

    level: int = 0
    evaluations: int = 0


def _quad_log_mgf(pv: float, t1: float, t2: float, ws: _QuadWorkspace | None = None):
    ws = ws if ws is not None else _QuadWorkspace()
    rx, ry, ru = _box(pv, t1, t2)
    log_norm = 2.0 * math.log(norm_const(pv))
    # resume one level below the last accepted one so easy points get cheap again
    level = max(ws.level - 1, 0)
    grow = 1.0
    for _ in range(4 * _MAX_LEVEL + 8):
        k = _K0 << level
        hi_v, mom, tail = _grid_sum(pv, t1, t2, grow * rx, grow * ry, grow * ru, k, _Q_HI)
        lo_v, _, _ = _grid_sum(pv, t1, t2, grow * rx, grow * ry, grow * ru, k, _Q_LO)
        ws.evaluations += 1
        err = abs(hi_v - lo_v)
        if err > QUAD_TOL:
            if level >= _MAX_LEVEL:
                raise ConvergenceError(
                    f"log-MGF quadrature stalled at (t1={t1}, t2={t2}): error {err:.3g}"
                )
            level += 1
            continue
        if tail > TAIL_TOL:
            if level >= _MAX_LEVEL:
                raise ConvergenceError(f"log-MGF box never captured the mass at (t1={t1}, t2={t2})")
            grow *= 2.0
            level += 1
            continue
        ws.level = level
        ea, eb, eaa, eab, ebb = mom
        grad = np.array([ea, eb])
        hess = np.array([[eaa - ea * ea, eab - ea * eb], [eab - ea * eb, ebb - eb * eb]])
        return hi_v - log_norm, grad, hess, err
    raise ConvergenceError("log-MGF refinement loop exhausted")


def log_mgf(p: PLike, t1: float, t2: float, method: str = "auto") -> MgfEvaluation:
    """Evaluate ``Λ(t1, t2)`` and its gradient.

    ``method`` is ``"quadrature"``, ``"analytic"`` (p = 2 only) or ``"auto"``,
    which means analytic at p = 2 and quadrature otherwise.
    """
    pv = _ldp_p(p)
    if not mgf_domain_contains(pv, t1, t2):
        raise DomainError(f"(t1={t1}, t2={t2}) lies outside the log-MGF domain for p={pv:g}")
    if method not in ("auto", "analytic", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "analytic" and pv != 2.0:
        raise UnsupportedError("the analytic log-MGF exists only at p = 2")
    if pv == 2.0 and method != "quadrature":
        v, g, h, err = _closed_form(t1, t2)
        used = "analytic"
    else:
        v, g, h, err = _quad_log_mgf(pv, t1, t2)
        used = "quadrature"
    return MgfEvaluation(
        t1=float(t1),
        t2=float(t2),
        value=float(v),
        grad=(float(g[0]), float(g[1])),
        quad_error=float(err),
        hessian=((float(h[0, 0]), float(h[0, 1])), (float(h[1, 0]), float(h[1, 1]))),
        reliable=err <= QUAD_TOL,
        method=used,
    )


# ---------------------------------------------------------------------------
# Legendre-Fenchel conjugate


@dataclass(frozen=True)
class ConjugateResult:
    value: float
    t: tuple[float, float]
    converged: bool
    unbounded: bool
    iterations: int


class _Conjugator:
    """Newton solver for ``sup_t <(x, y), t> - Λ(t)`` with warm starts between calls."""

    def __init__(self, pv: float, method: str = "auto"):
        self.pv = pv
        self.analytic = pv == 2.0 and method != "quadrature"
        self.ws = _QuadWorkspace()
        self.last_t = np.zeros(2)
        self.bound = 1.0 / pv if pv > 2.0 else math.inf

    def _eval(self, t):
        if self.analytic:
            return _closed_form(float(t[0]), float(t[1]))
        return _quad_log_mgf(self.pv, float(t[0]), float(t[1]), self.ws)

    def solve(self, x: float, y: float, start=None, max_iter: int = 200) -> ConjugateResult:
        if not (x > 0.0 and y > 0.0):
            # (|g-g'|^2, |g'|^p) lies in the open quadrant almost surely
            return ConjugateResult(math.inf, (math.nan, math.nan), True, True, 0)
        target = np.array([x, y], dtype=float)
        t = np.array(self.last_t if start is None else start, dtype=float)
        if not _finite_at(self.pv, t[0], t[1]):
            t = np.zeros(2)
        val, grad, hess, _ = self._eval(t)
        obj = float(target @ t - val)
        for it in range(1, max_iter + 1):
            if obj > UNBOUNDED_THRESHOLD:
                return ConjugateResult(math.inf, (float(t[0]), float(t[1])), True, True, it)
            g = target - grad
            on_face = t[1] >= self.bound and g[1] >= 0.0
            if on_face:
                d = np.array([g[0] / hess[0, 0], 0.0])
            else:
                try:
                    d = np.linalg.solve(hess, g)
                except np.linalg.LinAlgError:
                    d = g.copy()
                if g @ d <= 0.0:
                    d = g.copy()
            dec = float(g @ d)
            # keep Newton steps within a region proportional to the current scale
            cap = 1.0 + float(np.max(np.abs(t)))
            dmax = float(np.max(np.abs(d)))
            if dmax > cap:
                d = d * (cap / dmax)
            if dec < 2e-13:
                self.last_t = t
                return ConjugateResult(obj, (float(t[0]), float(t[1])), True, False, it)
            alpha = 1.0
            accepted = False
            while alpha > 1e-14:
                tn = t + alpha * d
                if tn[1] > self.bound:
                    tn[1] = self.bound
                if _finite_at(self.pv, tn[0], tn[1]):
                    try:
                        vn, gn, hn, _ = self._eval(tn)
                    except ConvergenceError:
                        alpha *= 0.5
                        continue
                    objn = float(target @ tn - vn)
                    if objn >= obj + 1e-4 * float(g @ (tn - t)) - 1e-13:
                        accepted = True
                        break
                alpha *= 0.5
            if not accepted:
                # line search beaten by quadrature noise: close enough when the decrement is tiny
                ok = dec < 1e-8
                self.last_t = t
                return ConjugateResult(obj, (float(t[0]), float(t[1])), ok, False, it)
            t, val, grad, hess, obj = tn, vn, gn, hn, objn
        self.last_t = t
        return ConjugateResult(obj, (float(t[0]), float(t[1])), False, False, max_iter)


def legendre2_detail(p: PLike, x: float, y: float, *, method: str = "auto", start=None) -> ConjugateResult:
    """Conjugate ``Λ*(x, y)`` together with its maximizer and solver diagnostics."""
    pv = _ldp_p(p)
    return _Conjugator(pv, method).solve(float(x), float(y), start)


def legendre2(p: PLike, x: float, y: float) -> float:
    """``Λ*(x, y) = sup_t [x t1 + y t2 - Λ(t)]``; ``math.inf`` where unbounded."""
    return legendre2_detail(p, x, y).value


# ---------------------------------------------------------------------------
# one-dimensional minimization


def _bracket(f, s0: float, step: float, max_expand: int = 60):
    b, fb = s0, f(s0)
    a, fa = b - step, f(b - step)
    c, fc = b + step, f(b + step)
    for _ in range(max_expand):
        if fb <= fa and fb <= fc:
            return (a, fa), (b, fb), (c, fc), True
        step *= 2.0
        if fa < fc:
            c, fc, b, fb = b, fb, a, fa
            a = b - step
            fa = f(a)
        else:
            a, fa, b, fb = b, fb, c, fc
            c = b + step
            fc = f(c)
    return (a, fa), (b, fb), (c, fc), False


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(f, a: float, c: float, tol: float, known=None):
    """Golden-section search on [a, c]; returns (argmin, min) over all probed points."""
    best = known if known is not None else (math.nan, math.inf)
    x1 = c - _INVPHI * (c - a)
    x2 = a + _INVPHI * (c - a)
    f1, f2 = f(x1), f(x2)
    for xv, fv in ((x1, f1), (x2, f2)):
        if fv < best[1]:
            best = (xv, fv)
    while c - a > tol:
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - _INVPHI * (c - a)
            f1 = f(x1)
            if f1 < best[1]:
                best = (x1, f1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (c - a)
            f2 = f(x2)
            if f2 < best[1]:
                best = (x2, f2)
    return best


# ---------------------------------------------------------------------------
# rate functions


@dataclass(frozen=True)
class RatePoint:
    z: float
    value: float
    inner_argmin: float
    converged: bool


def rate_radial(z: float) -> float:
    """Rate of the radial factor ``U^(1/n)``: ``-ln z`` on (0, 1], +∞ elsewhere."""
    if 0.0 < z <= 1.0:
        return -math.log(z)
    return math.inf


def rate_sphere_exact(z: float) -> float:
    """Exact speed-n rate of ``|X - Y|`` for uniform points on the Euclidean sphere.

    ``<X, Y>`` has density proportional to ``(1 - s^2)^((n-3)/2)``, so the rate is
    ``-ln(1 - s^2)/2`` at ``s = 1 - z^2/2``, i.e. ``-ln z - ln(1 - z^2/4)/2``
    on (0, 2) and +∞ elsewhere. Kept as an independent yardstick for the
    p = 2 case of :func:`rate_boundary`.
    """
    z = float(z)
    if not 0.0 < z < 2.0:
        return math.inf
    return max(0.0, -math.log(z) - 0.5 * math.log1p(-0.25 * z * z))


def _boundary_search(conj: _Conjugator, pv: float, z: float, s_hint: float = 0.0, step: float = 0.25):
    flags = {"ok": True}
    z2 = z * z

    def phi(s):
        y = math.exp(s)
        r = conj.solve(z2 * math.exp(2.0 * s / pv), y)
        if not r.converged:
            flags["ok"] = False
        return r.value

    (a, fa), (b, fb), (c, fc), bracketed = _bracket(phi, s_hint, step)
    if not bracketed:
        return RatePoint(z, fb, math.exp(b), False)
    s_best, f_best = _golden(phi, a, c, GOLDEN_TOL, known=(b, fb))
    return RatePoint(z, max(f_best, 0.0), math.exp(s_best), flags["ok"])


def rate_boundary_detail(p: PLike, z: float, *, _conj: _Conjugator | None = None, _hint: float = 0.0) -> RatePoint:
    """``I_W(z)`` with the inner minimizer ``y`` (where ``x = z^2 y^(2/p)``)."""
    pv = _ldp_p(p)
    z = float(z)
    if not z > 0.0:
        # z = 0 forces x = 0, where the conjugate is infinite
        return RatePoint(z, math.inf, math.nan, True)
    conj = _conj if _conj is not None else _Conjugator(pv)
    return _boundary_search(conj, pv, z, _hint)


def rate_boundary(p: PLike, z: float) -> float:
    """Rate function of the normalized distance between two cone-measure points."""
    return rate_boundary_detail(p, z).value


def rate_ball_detail(p: PLike, z: float) -> RatePoint:
    """``inf over z1 in (0, 1] of -ln z1 + I_W(z / z1)``, with the optimal ``z1``.

    ``I_W`` is a convex conjugate composed with a monotone path through its
    zero, so it grows away from the center on both sides. Above the center the
    choice ``z1 = 1`` is therefore optimal; below it only
    ``z1 in [z / center, 1]`` can compete.
    """
    pv = _ldp_p(p)
    z = float(z)
    if not z > 0.0:
        return RatePoint(z, math.inf, math.nan, True)
    center = clt_center(pv)
    conj = _Conjugator(pv)
    if z >= center:
        r = _boundary_search(conj, pv, z)
        return RatePoint(z, r.value, 1.0, r.converged)
    flags = {"ok": True, "hint": 0.0}

    def g(s1):
        r = _boundary_search(conj, pv, z * math.exp(-s1), flags["hint"], step=0.05)
        flags["hint"] = math.log(r.inner_argmin) if r.inner_argmin > 0 else 0.0
        if not r.converged:
            flags["ok"] = False
        return -s1 + r.value

    lo = math.log(z / center)
    known = min(((lo, g(lo)), (0.0, g(0.0))), key=lambda kv: kv[1])
    s1, val = _golden(g, lo, 0.0, GOLDEN_TOL, known=known)
    return RatePoint(z, max(val, 0.0), math.exp(s1), flags["ok"])


def rate_ball(p: PLike, z: float) -> float:
    """Rate function of the normalized distance between two uniform points of the ball."""
    return rate_ball_detail(p, z).value


# ---------------------------------------------------------------------------
# cube: X = |u - u'|^2 with u, u' uniform on [-1, 1]

_CUBE_LEVELS = 64
_CUBE_Q_HI, _CUBE_Q_LO = 20, 12


def _cube_sum(t: float, q: int, edges: np.ndarray):
    v, w = composite_nodes(edges, q)
    if t > 0.0:
        # v = 2 - x keeps the peak at the refined end of the grid
        d = v * (4.0 - v)  # 4 - x^2
        with np.errstate(divide="ignore"):
            expo = t * (v * v - 4.0 * v) + np.log(0.5 * v) + np.log(w)
        shift = 4.0 * t
    else:
        d = (2.0 - v) * (2.0 + v)
        with np.errstate(divide="ignore"):
            expo = t * v * v + np.log1p(-0.5 * v) + np.log(w)
        shift = 0.0
    m = float(expo.max())
    e = np.exp(expo - m)
    s = float(e.sum())
    ed = float((e * d).sum()) / s
    vd = float((e * (d - ed) ** 2).sum()) / s
    return shift + m + math.log(s), ed, vd


def cube_log_mgf_moments(t: float) -> tuple[float, float, float, float]:
    """``(Λ(t), 4 - Λ'(t), Λ''(t), quad_error)`` for ``Λ(t) = ln ∫_0^2 e^(t x^2)(1 - x/2) dx``.

    ``4 - Λ'(t)`` is returned instead of ``Λ'(t)`` so that it keeps its
    relative precision as ``Λ'(t)`` approaches 4.
    """
    t = float(t)
    if math.isnan(t) or math.isinf(t):
        raise DomainError(f"t must be finite, got {t!r}")
    edges = dyadic_edges(2.0, _CUBE_LEVELS)
    for _ in range(6):
        hi = _cube_sum(t, _CUBE_Q_HI, edges)
        lo = _cube_sum(t, _CUBE_Q_LO, edges)
        err = abs(hi[0] - lo[0])
        if err <= 1e-13 * max(1.0, abs(hi[0])):
            return hi[0], hi[1], hi[2], err
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mids]))
    raise ConvergenceError(f"cube log-MGF quadrature did not settle at t={t}")


def cube_log_mgf(t: float) -> float:
    """Log-MGF of ``|u - u'|^2`` for independent uniforms on [-1, 1]."""
    return cube_log_mgf_moments(t)[0]


@dataclass(frozen=True)
class CubeConjugate:
    value: float
    t: float
    converged: bool
    unbounded: bool


_CUBE_T_MAX = 1e12
_CUBE_T_MIN = -1e30


def cube_rate_detail(z: float) -> CubeConjugate:
    """``sup_t [z^2 t - Λ(t)]`` by safeguarded Newton on ``Λ'(t) = z^2``."""
    z = float(z)
    if z < 0.0 or math.isnan(z):
        return CubeConjugate(math.inf, math.nan, True, True)
    xi = z * z
    gap = 4.0 - xi

    def h(t):
        # decreasing in t; zero at the maximizer
        lam, four_minus_d, var, _ = cube_log_mgf_moments(t)
        return four_minus_d - gap, var, lam

    h0, var0, lam0 = h(0.0)
    if h0 == 0.0:
        return CubeConjugate(max(0.0, -lam0), 0.0, True, False)
    if h0 > 0.0:
        lo, hlo = 0.0, h0
        hi = 1.0
        hhi = h(hi)[0]
        while hhi > 0.0:
            lo, hlo = hi, hhi
            hi *= 2.0
            if hi > _CUBE_T_MAX:
                return CubeConjugate(math.inf, hi, True, True)
            hhi = h(hi)[0]
    else:
        hi, hhi = 0.0, h0
        lo = -1.0
        hlo = h(lo)[0]
        while hlo < 0.0:
            hi, hhi = lo, hlo
            lo *= 2.0
            if lo < _CUBE_T_MIN:
                return CubeConjugate(math.inf, lo, True, True)
            hlo = h(lo)[0]
    t = 0.5 * (lo + hi) if math.isfinite(lo + hi) else lo
    converged = False
    for _ in range(200):
        ht, vt, _ = h(t)
        if ht > 0.0:
            lo = t
        else:
            hi = t
        if abs(ht) <= 1e-15 * max(1.0, xi) or hi - lo <= 1e-15 * max(1.0, abs(t)):
            converged = True
            break
        tn = t + ht / vt if vt > 0.0 else math.nan
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        t = tn
    lam = cube_log_mgf(t)
    return CubeConjugate(max(0.0, xi * t - lam), t, converged, False)


def cube_rate(z: float) -> float:
    """Rate function of the normalized distance between two uniform points of the cube."""
    return cube_rate_detail(z).value


# ---------------------------------------------------------------------------
# grid driver


@dataclass(frozen=True)
class RateCurve:
    p: PIndex
    domain: DomainKind
    z_grid: tuple[float, ...]
    rates: tuple[float, ...]
    inner_argmin: tuple[float, ...]
    converged: tuple[bool, ...]
    minimizers: tuple[dict, ...] = field(default=())

    def rows(self):
        """``(z, rate, inner_argmin, converged)`` per grid point."""
        return list(zip(self.z_grid, self.rates, self.inner_argmin, self.converged))


def _curve_point(pi: PIndex, dom: DomainKind, z: float) -> tuple[float, float, bool, dict]:
    if pi.is_infinite:
        r = cube_rate_detail(z)
        return r.value, r.t, r.converged, {"t": r.t, "unbounded": r.unbounded}
    if dom is DomainKind.BALL_BOUNDARY:
        r = rate_boundary_detail(pi, z)
        return r.value, r.inner_argmin, r.converged, {"y": r.inner_argmin}
    r = rate_ball_detail(pi, z)
    return r.value, r.inner_argmin, r.converged, {"z1": r.inner_argmin}


def rate_curve(
    p: PLike, domain, z_min: float, z_max: float, steps: int, workers: int = 1
) -> RateCurve:
    """Evaluate the matching rate function on ``steps`` equally spaced points."""
    pi = as_pindex(p)
    dom = DomainKind.parse(domain)
    if pi.is_infinite and dom is DomainKind.BALL_BOUNDARY:
        raise UnsupportedError("no rate function is available for the cube boundary")
    if not pi.is_infinite:
        _ldp_p(pi)
    if not (z_min < z_max):
        raise DomainError("z_min must be < z_max")
    if steps < 2:
        raise DomainError("steps must be >= 2")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    grid = np.linspace(z_min, z_max, int(steps))

    def work(z):
        return _curve_point(pi, dom, float(z))

    if workers == 1:
        res = [work(z) for z in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            res = list(pool.map(work, grid))
    return RateCurve(
        p=pi,
        domain=dom,
        z_grid=tuple(float(z) for z in grid),
        rates=tuple(r[0] for r in res),
        inner_argmin=tuple(r[1] for r in res),
        converged=tuple(r[2] for r in res),
        minimizers=tuple(r[3] for r in res),
    )
