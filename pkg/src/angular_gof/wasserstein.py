"""Weighted L1-Wasserstein distance between a step CDF and a smooth CDF.

The test statistic is T_n = sqrt(k) * int_0^{pi/2} |F - G| q dtheta with F the
reweighted empirical angular CDF and G the fitted parametric one.  The
integral is computed cellwise: between consecutive jumps of F the integrand is
|c - G(theta)| for a constant c, smooth except at the (at most one) crossing
of G with c, which is isolated by a bracketed bisection.  Cells are mapped
through u = sqrt(|theta - pi/4|) for the singular weight so the transformed
integrand is bounded and no quadrature node ever touches pi/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PI_2, PI_4, WeightKind
from .empirical import AngularDataset, StepCDF, empirical_angular_cdf

__all__ = ["TestStatistic", "weighted_l1_distance", "test_statistic"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0


@dataclass(frozen=True)
class TestStatistic:
    """sqrt(k)-scaled weighted Wasserstein distance."""

    value: float
    k: int
    weight_kind: WeightKind
    n_cells: int


def _bisect_crossings(G, c: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized bisection for G(theta) = c on brackets [lo, hi]."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(48):  # interval <= pi/2 shrinks below 2e-15
        mid = 0.5 * (lo + hi)
        below = np.asarray(G(mid)) < c
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _cell_integrals(G, c, lo, hi, singular: bool, tol: float) -> float:
    """Sum over cells of int |c_i - G| (q) dtheta, with panel refinement.

    For the singular weight the cells arrive already transformed to the
    u = sqrt|theta - pi/4| variable; ``lo``/``hi`` are u-bounds, ``sides``
    encodes the mapping back to theta, and q dtheta = 2 du.
    """
    c = np.asarray(c, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if singular:
        # side = +1 for theta = pi/4 + u^2, -1 for theta = pi/4 - u^2
        sides = np.where(hi > 0, 1.0, -1.0)
        lo_u, hi_u = np.abs(lo), np.abs(hi)
        lo_u, hi_u = np.minimum(lo_u, hi_u), np.maximum(lo_u, hi_u)

    total = 0.0
    active = np.arange(c.size)
    prev = np.full(c.size, np.nan)
    for n_panels in (1, 2, 4, 8, 16, 32):
        if active.size == 0:
            break
        if singular:
            a, b = lo_u[active], hi_u[active]
        else:
            a, b = lo[active], hi[active]
        width = (b - a) / n_panels
        # nodes: (cells, panels, 64)
        starts = a[:, None] + width[:, None] * np.arange(n_panels)[None, :]
        nodes = starts[:, :, None] + width[:, None, None] * _GL_NODES[None, None, :]
        w = width[:, None, None] * _GL_WEIGHTS[None, None, :]
        if singular:
            theta = PI_4 + sides[active][:, None, None] * nodes**2
            vals = 2.0 * np.sum(np.abs(c[active][:, None, None] - np.asarray(G(theta))) * w, axis=(1, 2))
        else:
            vals = np.sum(np.abs(c[active][:, None, None] - np.asarray(G(nodes))) * w, axis=(1, 2))
        done = np.abs(vals - prev[active]) <= tol * np.maximum(np.abs(vals), 1e-30)
        prev[active] = vals
        total += float(np.sum(vals[done]))
        active = active[~done]
    if active.size:
        total += float(np.sum(prev[active]))
    return total


def weighted_l1_distance(F: StepCDF, G, q: WeightKind, tol: float = 1e-7) -> tuple[float, int]:
    """int_0^{pi/2} |F - G| q dtheta; returns (value, number of cells).

    F is a step CDF on [0, pi/2]; G is a vectorized nondecreasing CDF
    evaluator with G(0) = 0 and G(pi/2) = 1.
    """
    locs = np.asarray(F.locations, dtype=float)
    cuts = np.unique(np.concatenate([[0.0, PI_4, PI_2], locs[(locs > 0) & (locs < PI_2)]]))
    g_at_cuts = np.asarray(G(cuts), dtype=float)
    if np.any(np.diff(g_at_cuts) < -1e-9):
        raise ValueError("G is not nondecreasing on the partition")

    a0 = cuts[:-1]
    b0 = cuts[1:]
    keep = (b0 - a0) > 1e-15
    a0, b0 = a0[keep], b0[keep]
    ga, gb = g_at_cuts[:-1][keep], g_at_cuts[1:][keep]
    c = np.asarray(F(0.5 * (a0 + b0)), dtype=float)  # F is constant per cell

    # Split cells where G crosses the constant c; each crossing cell (a, b)
    # becomes (a, root) and (root, b) so the integrand is C^1 per cell.
    crossing = (ga - c) * (gb - c) < 0.0
    if np.any(crossing):
        roots = _bisect_crossings(G, c[crossing], a0[crossing], b0[crossing])
        a_all = np.concatenate([a0[~crossing], a0[crossing], roots])
        b_all = np.concatenate([b0[~crossing], roots, b0[crossing]])
        c_all = np.concatenate([c[~crossing], c[crossing], c[crossing]])
    else:
        a_all, b_all, c_all = a0, b0, c

    ok = (b_all - a_all) > 1e-15
    a_all, b_all, c_all = a_all[ok], b_all[ok], c_all[ok]
    n_cells = int(a_all.size)

    if q is WeightKind.CONSTANT:
        total = _cell_integrals(G, c_all, a_all, b_all, singular=False, tol=tol)
    else:
        # Transform each cell to the u = sqrt|theta - pi/4| variable.  Every
        # cell lies on one side of pi/4 because pi/4 is a partition cut.
        right = a_all >= PI_4
        u_lo = np.where(right, np.sqrt(np.maximum(a_all - PI_4, 0.0)), -np.sqrt(np.maximum(PI_4 - a_all, 0.0)))
        u_hi = np.where(right, np.sqrt(np.maximum(b_all - PI_4, 0.0)), -np.sqrt(np.maximum(PI_4 - b_all, 0.0)))
        # encode side in the sign of hi (see _cell_integrals)
        total = _cell_integrals(G, c_all, u_lo, u_hi, singular=True, tol=tol)
    return total, n_cells


def test_statistic(dataset: AngularDataset, law, q: WeightKind, tol: float = 1e-7) -> TestStatistic:
    """T_n = sqrt(k) * weighted L1 distance between Q-tilde and the model Q."""
    F = empirical_angular_cdf(dataset, reweighted=True)
    value, n_cells = weighted_l1_distance(F, law.normalized_cdf, q, tol)
    return TestStatistic(
        value=math.sqrt(dataset.k) * value,
        k=dataset.k,
        weight_kind=q,
        n_cells=n_cells,
    )
