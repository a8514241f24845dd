"""Smooth compactly supported approximants of rough data and the Cauchy check
for the solutions they generate."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analysis import fit_growth_bound
from .core import grid_nodes, h1_norm, l2_norm, reduce_to_first_order
from .errors import ResolutionError, SpecificationError
from .families import sample
from .solver import solve

__all__ = ["MollifierParams", "mollify", "mollified_data", "CauchyRow", "generalized_solution_check"]


@dataclass(frozen=True)
class MollifierParams:
    """Level l of the approximating sequence.

    The kernel is supported on |s| < kernel_width; the cutoff vanishes within
    cutoff_margin + kernel_width of each endpoint, so mollified output is zero
    on [0, cutoff_margin] and [1 - cutoff_margin, 1].
    """

    level: int

    def __post_init__(self):
        if int(self.level) != self.level or self.level < 1:
            raise SpecificationError(f"mollifier level must be an integer >= 1, got {self.level}")

    @property
    def kernel_width(self):
        return 1.0 / (4 * self.level)

    @property
    def cutoff_margin(self):
        return 1.0 / (2 * self.level)

    def min_cells(self):
        """Smallest N with dx < kernel_width / 4."""
        return 16 * self.level + 1


def _bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _smooth_step(s):
    """C-infinity transition from 0 (s <= 0) to 1 (s >= 1)."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        left = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        right = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return left / (left + right)


def _cutoff(x, params):
    m, d = params.cutoff_margin, params.kernel_width
    dist = np.minimum(x, 1.0 - x)
    return _smooth_step((dist - (m + d)) / (m - d))


def mollify(f, params):
    """Cut off near both endpoints, then convolve with a unit-mass bump kernel."""
    f = np.asarray(f, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise SpecificationError("mollify needs one-dimensional grid samples")
    if not np.all(np.isfinite(f)):
        raise SpecificationError("mollify input contains non-finite values")
    n_cells = f.size - 1
    dx = 1.0 / n_cells
    if not dx < params.kernel_width / 4:
        raise ResolutionError(
            f"grid too coarse for level {params.level}: dx={dx:.4g} needs < {params.kernel_width / 4:.4g}"
            f" (N >= {params.min_cells()})"
        )
    half = int(math.floor(params.kernel_width / dx))
    kernel = _bump(np.arange(-half, half + 1) * dx / params.kernel_width)
    kernel /= kernel.sum()
    g = f * _cutoff(grid_nodes(n_cells), params)
    return np.convolve(g, kernel, mode="same")


def mollified_data(w0, w1, a, n_cells, level):
    """Sample two families, mollify both at ``level`` and reduce."""
    params = MollifierParams(level)
    return reduce_to_first_order(
        mollify(sample(w0, n_cells), params), mollify(sample(w1, n_cells), params), a
    )


@dataclass(frozen=True)
class CauchyRow:
    """Distance between the solutions generated at levels l and l'.

    ``distance`` is sup over recorded times of max(|dw|_L2, |du|_L2);
    ``bound`` is M3 e^{A horizon} |d phi|_L2 with (M3, A) fitted on the runs.
    """

    level: int
    next_level: int
    distance: float
    phi_distance: float
    w0_h1_distance: float
    bound: float

    @property
    def within_bound(self):
        return self.distance <= self.bound * (1.0 + 1e-9)


def generalized_solution_check(spec, w0, w1, l_list, n_cells):
    """Solve with mollified data at each level and tabulate consecutive distances."""
    l_list = [int(l) for l in l_list]
    if len(l_list) < 2 or any(b <= a for a, b in zip(l_list, l_list[1:])):
        raise SpecificationError("l_list must be increasing with at least two entries")
    dx = 1.0 / n_cells
    data, trajs = [], []
    for level in l_list:
        d = mollified_data(w0, w1, spec.a, n_cells, level)
        data.append(d)
        trajs.append(solve(spec, d, n_cells, record_every=1))
    fits = [fit_growth_bound(tr, norms="WU") for tr in trajs]
    A = max(f.A for f in fits)
    M3 = max(f.M3 for f in fits)
    rows = []
    for (la, da, ta), (lb, db, tb) in zip(
        zip(l_list, data, trajs), zip(l_list[1:], data[1:], trajs[1:])
    ):
        dist = max(
            max(l2_norm(sa.w - sb.w, dx), l2_norm(sa.u - sb.u, dx)) for sa, sb in zip(ta.states, tb.states)
        )
        dphi = max(l2_norm(da.phi1 - db.phi1, dx), l2_norm(da.phi2 - db.phi2, dx))
        dh1 = h1_norm(da.w0 - db.w0, dx)
        rows.append(CauchyRow(la, lb, float(dist), float(dphi), float(dh1), float(M3 * math.exp(A * spec.horizon) * dphi)))
    return rows
