"""Characteristic-aligned time stepping for the reduced (w, u) system.

With dt = dx / a every grid diagonal is a characteristic, so the transport
part is exact: w moves one node right per step and u one node left. Only the
source terms need quadrature. The default rule is the trapezoid along each
characteristic; the two unknowns meeting at a node form a 2x2 linear system
that is solved in closed form, independently at each node.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import GridState, Orientation, Trajectory, grid_nodes, l2_norm, mirror_data, mirror_problem
from .errors import SolverOverflowError, SpecificationError, StabilityError

logger = logging.getLogger(__name__)

__all__ = ["Rule", "Forcing", "StepScheme", "init_state", "step", "solve"]


class Rule(enum.Enum):
    TRAPEZOID = "trapezoid"
    EULER = "euler"


@dataclass(frozen=True)
class Forcing:
    """Right-hand sides and boundary data for manufactured-solution checks.

    Solves ``w_t + a w_x - u = f_w``, ``u_t - a u_x + a1 u + c w = f_u`` with
    ``w(0,t) = p u(0,t) + w_left(t)`` and ``u(1,t) = u_right(t)``.
    """

    f_w: Optional[Callable] = None
    f_u: Optional[Callable] = None
    w_left: Optional[Callable] = None
    u_right: Optional[Callable] = None


@dataclass(frozen=True)
class StepScheme:
    rule: Rule = Rule.TRAPEZOID
    forcing: Optional[Forcing] = None


_DEFAULT = StepScheme()
_DET_MIN = 1e-12


def _eval(fn, x, t, like):
    if fn is None:
        return np.zeros_like(like)
    return np.broadcast_to(np.asarray(fn(x, t), dtype=float), like.shape)


def _bnd(fn, t):
    return 0.0 if fn is None else float(fn(t))


def init_state(spec, data, n_cells, forcing=None):
    """Level t = 0, with the boundary relations imposed on the endpoint values."""
    if spec.orientation is not Orientation.LEFT:
        raise SpecificationError("init_state needs a LEFT-oriented problem; use mirror_problem first")
    if data.phi1.size != n_cells + 1 or data.phi2.size != n_cells + 1:
        raise SpecificationError(
            f"initial data has {data.phi1.size} samples, grid with N={n_cells} needs {n_cells + 1}"
        )
    w = np.array(data.phi1, dtype=float)
    u = np.array(data.phi2, dtype=float)
    forcing = forcing or Forcing()
    u_end = _bnd(forcing.u_right, 0.0)
    if u[-1] != u_end:
        logger.info("init_state: u(1,0) = %.17g overwritten by %.17g", u[-1], u_end)
    u[-1] = u_end
    w0 = spec.p * u[0] + _bnd(forcing.w_left, 0.0)
    if w[0] != w0:
        logger.info("init_state: w(0,0) = %.17g overwritten by %.17g", w[0], w0)
    w[0] = w0
    return GridState(n_cells, spec.a, 0, w, u)


def step(state, spec, scheme=_DEFAULT):
    """Advance one level of the LEFT-oriented system."""
    with np.errstate(over="ignore", invalid="ignore"):
        return _step(state, spec, scheme)


def _step(state, spec, scheme):
    N = state.n_cells
    dt = state.dt
    t, t1 = state.t, (state.step + 1) * dt
    x = grid_nodes(N)
    w, u = state.w, state.u
    forcing = scheme.forcing or Forcing()
    c0, c1 = spec.c(x, t), spec.c(x, t1)
    b0, b1 = spec.a1(x, t), spec.a1(x, t1)
    g_left, g_right = _bnd(forcing.w_left, t1), _bnd(forcing.u_right, t1)

    w_new = np.empty(N + 1)
    u_new = np.empty(N + 1)
    if scheme.rule is Rule.EULER:
        fw = _eval(forcing.f_w, x, t, w)
        fu = _eval(forcing.f_u, x, t, u)
        u_new[:-1] = u[1:] - dt * (c0[1:] * w[1:] + b0[1:] * u[1:]) + dt * fu[1:]
        u_new[-1] = g_right
        w_new[1:] = w[:-1] + dt * u[:-1] + dt * fw[:-1]
        w_new[0] = spec.p * u_new[0] + g_left
    else:
        h = 0.5 * dt
        fw0, fw1 = _eval(forcing.f_w, x, t, w), _eval(forcing.f_w, x, t1, w)
        fu0, fu1 = _eval(forcing.f_u, x, t, u), _eval(forcing.f_u, x, t1, u)
        # known parts: A_j arrives along the w-characteristic from j-1, B_j along u from j+1
        A = w[:-1] + h * u[:-1] + h * (fw0[:-1] + fw1[1:])      # nodes 1..N
        B = u[1:] - h * (c0[1:] * w[1:] + b0[1:] * u[1:]) + h * (fu0[1:] + fu1[:-1])  # nodes 0..N-1
        # interior j = 1..N-1:  w+ = A + h u+,  u+ = B - h (c w+ + a1 u+)
        det = 1.0 + h * b1[1:-1] + h * h * c1[1:-1]
        det0 = 1.0 + h * (b1[0] + c1[0] * spec.p)
        bad = np.abs(np.append(det, det0)) < _DET_MIN
        if np.any(bad):
            raise StabilityError(
                f"nodal system singular at t={t1:.6g}: dt={dt:.3g}, sup|c|={np.max(np.abs(c1)):.3g}"
            )
        u_new[1:-1] = (B[1:] - h * c1[1:-1] * A[:-1]) / det
        w_new[1:-1] = A[:-1] + h * u_new[1:-1]
        u_new[0] = (B[0] - h * c1[0] * g_left) / det0
        w_new[0] = spec.p * u_new[0] + g_left
        u_new[-1] = g_right
        w_new[-1] = A[-1] + h * g_right
    if not (np.all(np.isfinite(w_new)) and np.all(np.isfinite(u_new))):
        raise SolverOverflowError(f"non-finite values at t={t1:.6g}", step_index=state.step + 1)
    return GridState(N, state.a, state.step + 1, w_new, u_new)


def _reflect(state):
    return GridState(state.n_cells, state.a, state.step, state.w[::-1], state.u[::-1])


def solve(spec, data, n_cells, record_every=1, scheme=_DEFAULT, extra_steps=()):
    """March from t = 0 to the first step time >= horizon.

    Norms are recorded every step; full states every ``record_every`` steps,
    at every index in ``extra_steps`` and at the final step.

    A RIGHT problem is solved on its mirror image and the stored states are
    reflected back, so ``u`` then holds the right-oriented variable
    w_t - a w_x.
    """
    if n_cells < 4:
        raise SpecificationError(f"need at least 4 cells, got {n_cells}")
    if record_every < 1:
        raise SpecificationError(f"record_every must be >= 1, got {record_every}")
    right = spec.orientation is Orientation.RIGHT
    if right:
        if scheme.forcing is not None:
            raise SpecificationError("forcing is only supported for LEFT problems")
        spec, data = mirror_problem(spec), mirror_data(data)
    n_steps = max(1, math.ceil(spec.horizon * spec.a * n_cells - 1e-9))
    extra = set(int(s) for s in extra_steps)
    dx = 1.0 / n_cells

    state = init_state(spec, data, n_cells, scheme.forcing)
    W, U, sw, su = (np.empty(n_steps + 1) for _ in range(4))
    states = []

    def record(s):
        W[s.step] = l2_norm(s.w, dx)
        U[s.step] = l2_norm(s.u, dx)
        sw[s.step] = np.max(np.abs(s.w))
        su[s.step] = np.max(np.abs(s.u))
        if s.step % record_every == 0 or s.step in extra or s.step == n_steps:
            states.append(_reflect(s) if right else s)

    record(state)
    for k in range(n_steps):
        try:
            state = step(state, spec, scheme)
        except SolverOverflowError as exc:
            raise SolverOverflowError(f"step {k + 1}: {exc}", step_index=k + 1) from exc
        except StabilityError as exc:
            raise StabilityError(f"step {k + 1}: {exc}") from exc
        record(state)

    times = np.arange(n_steps + 1) * (dx / spec.a)
    return Trajectory(
        n_cells, spec.a, times, W, U, sw, su, tuple(states), record_every, data.normalizer, data.phi_norm
    )
