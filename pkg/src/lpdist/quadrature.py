"""Composite Gauss-Legendre building blocks shared by the rate-function code."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["gl_rule", "composite_nodes", "split_panels", "dyadic_edges"]


@lru_cache(maxsize=None)
def gl_rule(q: int) -> tuple[np.ndarray, np.ndarray]:
    """``q``-point Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(edges: np.ndarray, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``q``-point rule on every panel ``[edges[k], edges[k+1]]``.

    ``edges`` may carry leading batch axes; the panel axis is the last one and
    the result flattens panels and nodes into one trailing axis.
    """
    xi, wi = gl_rule(q)
    lo = edges[..., :-1, None]
    hi = edges[..., 1:, None]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid + half * xi
    weights = half * wi
    shape = edges.shape[:-1] + ((edges.shape[-1] - 1) * q,)
    return nodes.reshape(shape), np.broadcast_to(weights, nodes.shape).reshape(shape)


def split_panels(edges: np.ndarray, cuts: np.ndarray) -> np.ndarray:
    """Insert one extra breakpoint per row: ``(M+1,)`` edges and ``(r,)`` cuts give ``(r, M+2)``.

    Cuts are clipped into the edge range; a cut landing on an existing edge
    leaves a zero-width panel, which contributes nothing.
    """
    c = np.clip(cuts, edges[0], edges[-1])[:, None]
    rows = np.broadcast_to(edges, (c.shape[0], edges.size))
    return np.sort(np.concatenate([rows, c], axis=1), axis=1)


def dyadic_edges(length: float, levels: int) -> np.ndarray:
    """Edges of ``[0, length]`` refined geometrically toward 0: 0, L/2^levels, ..., L/2, L."""
    return np.concatenate([[0.0], length * np.exp2(-np.arange(levels, -1, -1, dtype=float))])
