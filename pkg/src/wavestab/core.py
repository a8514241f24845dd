"""Problem description, grid containers, norms and the first-order reduction.

The second-order problem

    w_tt - a^2 w_xx + c(x, t) w = 0   (optionally with a first-order term a1)

is rewritten for the pair ``(w, u)`` with ``u = w_t + a w_x``:

    w_t + a w_x = u,     u_t - a u_x + a1 u + c w = 0,
    w(0, t) = p u(0, t), u(1, t) = 0.

A problem with ``Orientation.RIGHT`` (boundary coupling at x = 1) is the
mirror image of a ``LEFT`` one under x -> 1 - x and is always solved
through :func:`mirror_problem`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import CoefficientField, Zero
from .errors import DataError, SpecificationError

__all__ = [
    "Orientation",
    "ProblemSpec",
    "InitialData",
    "GridState",
    "Trajectory",
    "grid_nodes",
    "derivative",
    "reduce_to_first_order",
    "mirror_problem",
    "unmirror_problem",
    "mirror_data",
    "l2_norm",
    "h1_norm",
    "sup_norm",
]


class Orientation(enum.Enum):
    LEFT = "left"    # w(0,t) = p (w_t + a w_x)(0,t),  (w_t + a w_x)(1,t) = 0
    RIGHT = "right"  # w(1,t) = q (w_t - a w_x)(1,t),  (w_t - a w_x)(0,t) = 0


@dataclass(frozen=True)
class ProblemSpec:
    """The continuous problem on [0, 1] x [0, horizon].

    For ``Orientation.RIGHT`` the field ``p`` holds the boundary constant q,
    and the first-order term pairs as ``(d_t + a d_x + a1)(d_t - a d_x) w``.
    """

    a: float
    p: float = 0.0
    orientation: Orientation = Orientation.LEFT
    c: CoefficientField = field(default_factory=Zero)
    a1: CoefficientField = field(default_factory=Zero)
    horizon: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise SpecificationError(f"wave speed a must be finite and > 0, got {self.a}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise SpecificationError(f"horizon must be finite and > 0, got {self.horizon}")
        if not math.isfinite(self.p):
            raise SpecificationError(f"boundary parameter must be finite, got {self.p}")
        if not isinstance(self.orientation, Orientation):
            raise SpecificationError(f"orientation must be an Orientation, got {self.orientation!r}")
        for name in ("c", "a1"):
            coef = getattr(self, name)
            if not isinstance(coef, CoefficientField):
                raise SpecificationError(f"{name} must be a CoefficientField, got {type(coef).__name__}")
            if not math.isfinite(coef.sup_norm(self.horizon)):
                raise DataError(f"coefficient {name} is not bounded on [0,1]x[0,{self.horizon}]")

    @property
    def extinction_time(self):
        """Finite extinction time 2/a of the unperturbed problem."""
        return 2.0 / self.a

    @property
    def smoothing_time(self):
        return 6.0 / self.a

    def c_sup(self):
        return self.c.sup_norm(self.horizon)


def _as_samples(f, name="samples"):
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise SpecificationError(f"{name} must be one-dimensional, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise DataError(f"{name} contain non-finite values")
    return f


def grid_nodes(n_cells):
    """The N+1 nodes of the uniform grid on [0, 1]."""
    return np.arange(n_cells + 1) / n_cells


def derivative(f, dx):
    """Second-order difference: centered inside, one-sided at both ends."""
    f = _as_samples(f)
    if f.size < 3:
        raise SpecificationError("derivative stencil needs at least 3 samples")
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx)
    d[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dx)
    return d


def l2_norm(f, dx):
    """L2(0,1) norm by the composite trapezoid rule."""
    f = _as_samples(f)
    if f.size < 2:
        raise SpecificationError("l2_norm needs at least 2 samples")
    big = float(np.max(np.abs(f)))
    if math.isfinite(big) and (big > 1e150 or 0.0 < big < 1e-150):
        # squaring would overflow or underflow; rescale by an exact power of two
        scale = math.ldexp(1.0, math.frexp(big)[1] - 1)
        return scale * l2_norm(f / scale, dx)
    sq = f * f
    return math.sqrt(dx * (np.sum(sq) - 0.5 * (sq[0] + sq[-1])))


def h1_norm(f, dx):
    return math.hypot(l2_norm(f, dx), l2_norm(derivative(f, dx), dx))


def sup_norm(f):
    f = _as_samples(f)
    if f.size == 0:
        raise SpecificationError("sup_norm of an empty array")
    return float(np.max(np.abs(f)))


@dataclass(frozen=True, eq=False)
class InitialData:
    """Samples of (w0, w1) and the reduced pair (phi1, phi2).

    Build with :func:`reduce_to_first_order`; ``phi2 = w1 + a w0'`` always
    refers to the left-oriented variable w_t + a w_x.
    """

    w0: np.ndarray
    w1: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    a: float

    @property
    def n_cells(self):
        return self.w0.size - 1

    @property
    def dx(self):
        return 1.0 / self.n_cells

    @property
    def normalizer(self):
        """max(|w0|_H1, |w1|_L2), the data norm in the decay and growth bounds."""
        return max(h1_norm(self.w0, self.dx), l2_norm(self.w1, self.dx))

    @property
    def phi_norm(self):
        """max_i |phi_i|_L2."""
        return max(l2_norm(self.phi1, self.dx), l2_norm(self.phi2, self.dx))

    def scaled(self, factor):
        return reduce_to_first_order(factor * self.w0, factor * self.w1, self.a)


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def reduce_to_first_order(w0, w1, a):
    """Initial data for the first-order system: phi1 = w0, phi2 = w1 + a w0'."""
    w0 = _as_samples(w0, "w0")
    w1 = _as_samples(w1, "w1")
    if w0.shape != w1.shape:
        raise SpecificationError(f"w0 and w1 lengths differ: {w0.size} vs {w1.size}")
    if not (math.isfinite(a) and a > 0):
        raise SpecificationError(f"wave speed a must be > 0, got {a}")
    dx = 1.0 / (w0.size - 1)
    phi1 = _frozen(w0)
    return InitialData(phi1, _frozen(w1), phi1, _frozen(w1 + a * derivative(w0, dx)), float(a))


def mirror_problem(spec):
    """Map a RIGHT problem to the equivalent LEFT problem under x -> 1 - x."""
    if spec.orientation is not Orientation.RIGHT:
        raise SpecificationError("mirror_problem expects a RIGHT-oriented problem")
    return replace(spec, orientation=Orientation.LEFT, c=spec.c.mirrored(), a1=spec.a1.mirrored())


def unmirror_problem(spec):
    """Inverse of :func:`mirror_problem`."""
    if spec.orientation is not Orientation.LEFT:
        raise SpecificationError("unmirror_problem expects a LEFT-oriented problem")
    return replace(spec, orientation=Orientation.RIGHT, c=spec.c.mirrored(), a1=spec.a1.mirrored())


def mirror_data(data):
    """Reflect (w0, w1) in x and reduce again for the mirrored problem."""
    return reduce_to_first_order(data.w0[::-1], data.w1[::-1], data.a)


@dataclass(frozen=True, eq=False)
class GridState:
    """One time level of (w, u) on N+1 nodes, with dt = dx / a."""

    n_cells: int
    a: float
    step: int
    w: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        if self.n_cells < 4:
            raise SpecificationError(f"need at least 4 cells, got {self.n_cells}")
        for name in ("w", "u"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.n_cells + 1,):
                raise SpecificationError(f"{name} must have {self.n_cells + 1} nodes, got shape {arr.shape}")
            object.__setattr__(self, name, _frozen(arr))

    @property
    def dx(self):
        return 1.0 / self.n_cells

    @property
    def dt(self):
        return self.dx / self.a

    @property
    def t(self):
        return self.step * self.dt

    @property
    def x(self):
        return grid_nodes(self.n_cells)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Norm records for every step plus thinned full states.

    ``normalizer`` and ``phi_norm`` carry the data norms of the run so that
    fits can be normalised without the original data.
    """

    n_cells: int
    a: float
    times: np.ndarray
    W: np.ndarray
    U: np.ndarray
    sup_w: np.ndarray
    sup_u: np.ndarray
    states: tuple = ()
    record_every: int = 1
    normalizer: float = 1.0
    phi_norm: float = 1.0

    @property
    def dt(self):
        return 1.0 / (self.n_cells * self.a)

    @property
    def final(self):
        return self.states[-1]

    def state_at(self, step):
        for s in self.states:
            if s.step == step:
                return s
        raise KeyError(f"step {step} was not recorded")

    def norm_max(self):
        """Per-step max(W, U, sup_w, sup_u)."""
        return np.maximum.reduce([self.W, self.U, self.sup_w, self.sup_u])

    @classmethod
    def from_norms(cls, times, W, U=None, normalizer=1.0, a=1.0):
        """Synthetic trajectory from a norm history (no states)."""
        times = np.asarray(times, dtype=float)
        W = np.asarray(W, dtype=float)
        U = np.zeros_like(W) if U is None else np.asarray(U, dtype=float)
        dt = times[1] - times[0] if times.size > 1 else 1.0
        n_cells = max(4, int(round(1.0 / (a * dt))))
        return cls(n_cells, a, times, W, U, np.abs(W), np.abs(U), (), 1, normalizer, normalizer)
