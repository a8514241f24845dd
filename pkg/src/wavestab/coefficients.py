"""Bounded coefficient fields c(x, t) and a1(x, t) on [0, 1] x [0, T].

Parametric families evaluate exactly and report their sup- and C2-norms in
closed form. ``SampledGrid`` stores lattice values, interpolates bilinearly
and is only Lipschitz, so it reports no C2 norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SpecificationError

__all__ = [
    "CoefficientField",
    "Zero",
    "Constant",
    "SeparableTrig",
    "GaussianBump",
    "SampledGrid",
]


def _sup_abs_cos(k, phase, lo, hi):
    """Exact sup of |cos(k*s + phase)| for s in [lo, hi]."""
    a, b = sorted((k * lo + phase, k * hi + phase))
    # a multiple of pi inside the argument range gives the maximum 1
    if math.floor(b / math.pi) >= math.ceil(a / math.pi):
        return 1.0
    return max(abs(math.cos(a)), abs(math.cos(b)))


def _gauss_shape(order, s):
    e = np.exp(-0.5 * s * s)
    if order == 0:
        return e
    if order == 1:
        return s * e
    return (s * s - 1.0) * e


_GAUSS_CRITICAL = {0: (0.0,), 1: (-1.0, 1.0), 2: (0.0, -math.sqrt(3.0), math.sqrt(3.0))}


def _sup_abs_gauss(order, lo, hi):
    pts = [lo, hi] + [s for s in _GAUSS_CRITICAL[order] if lo <= s <= hi]
    return float(max(abs(_gauss_shape(order, s)) for s in pts))


_ORDERS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


class CoefficientField:
    """Common interface: ``field(x, t)`` evaluates with numpy broadcasting."""

    def __call__(self, x, t):
        raise NotImplementedError

    def sup_norm(self, horizon):
        """sup |field| over [0, 1] x [0, horizon]."""
        raise NotImplementedError

    def c2_norm(self, horizon):
        """Max over derivative orders <= 2 of the sup-norm, or None if unknown."""
        return None

    def mirrored(self):
        """The field composed with x -> 1 - x."""
        raise NotImplementedError

    @property
    def is_zero(self):
        return False

    @property
    def smooth(self):
        """Whether the field meets a C2-with-bounded-derivatives hypothesis."""
        return True


@dataclass(frozen=True)
class Zero(CoefficientField):
    def __call__(self, x, t):
        return np.zeros(np.broadcast(x, t).shape)

    def sup_norm(self, horizon):
        return 0.0

    def c2_norm(self, horizon):
        return 0.0

    def mirrored(self):
        return self

    @property
    def is_zero(self):
        return True


@dataclass(frozen=True)
class Constant(CoefficientField):
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DataError(f"constant coefficient must be finite, got {self.value}")

    def __call__(self, x, t):
        return np.full(np.broadcast(x, t).shape, float(self.value))

    def sup_norm(self, horizon):
        return abs(float(self.value))

    def c2_norm(self, horizon):
        return abs(float(self.value))

    def mirrored(self):
        return self

    @property
    def is_zero(self):
        return self.value == 0.0


@dataclass(frozen=True)
class SeparableTrig(CoefficientField):
    """``amplitude * cos(x_freq * x) * cos(t_freq * t)``."""

    amplitude: float
    x_freq: float = math.pi
    t_freq: float = 0.0
    mirrored_x: bool = False

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        xx = 1.0 - x if self.mirrored_x else x
        return self.amplitude * np.cos(self.x_freq * xx) * np.cos(self.t_freq * np.asarray(t, dtype=float))

    def _sup_derivative(self, ax, at, horizon):
        # d^n/ds^n cos(k s) = k^n cos(k s + n pi/2) in magnitude
        sx = abs(self.x_freq) ** ax * _sup_abs_cos(self.x_freq, ax * math.pi / 2, 0.0, 1.0)
        st = abs(self.t_freq) ** at * _sup_abs_cos(self.t_freq, at * math.pi / 2, 0.0, horizon)
        return abs(self.amplitude) * sx * st

    def sup_norm(self, horizon):
        return self._sup_derivative(0, 0, horizon)

    def c2_norm(self, horizon):
        return max(self._sup_derivative(ax, at, horizon) for ax, at in _ORDERS)

    def mirrored(self):
        return SeparableTrig(self.amplitude, self.x_freq, self.t_freq, not self.mirrored_x)

    @property
    def is_zero(self):
        return self.amplitude == 0.0


@dataclass(frozen=True)
class GaussianBump(CoefficientField):
    """``amplitude * exp(-(x - center)^2 / (2 width^2)) * cos(t_freq * t)``."""

    amplitude: float
    center: float = 0.5
    width: float = 0.1
    t_freq: float = 0.0
    mirrored_x: bool = False

    def __post_init__(self):
        if not self.width > 0:
            raise SpecificationError(f"GaussianBump width must be positive, got {self.width}")

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        xx = 1.0 - x if self.mirrored_x else x
        s = (xx - self.center) / self.width
        return self.amplitude * np.exp(-0.5 * s * s) * np.cos(self.t_freq * np.asarray(t, dtype=float))

    def _sup_derivative(self, ax, at, horizon):
        lo, hi = (0.0 - self.center) / self.width, (1.0 - self.center) / self.width
        sx = _sup_abs_gauss(ax, lo, hi) / self.width**ax
        st = abs(self.t_freq) ** at * _sup_abs_cos(self.t_freq, at * math.pi / 2, 0.0, horizon)
        return abs(self.amplitude) * sx * st

    def sup_norm(self, horizon):
        return self._sup_derivative(0, 0, horizon)

    def c2_norm(self, horizon):
        return max(self._sup_derivative(ax, at, horizon) for ax, at in _ORDERS)

    def mirrored(self):
        return GaussianBump(self.amplitude, self.center, self.width, self.t_freq, not self.mirrored_x)

    @property
    def is_zero(self):
        return self.amplitude == 0.0


@dataclass(frozen=True, eq=False)
class SampledGrid(CoefficientField):
    """Values on a uniform lattice over [0, 1] x [0, t_max], rows indexed by time.

    Evaluation is bilinear; times beyond ``t_max`` are clamped to the last row.
    """

    values: np.ndarray
    t_max: float
    _x: np.ndarray = field(init=False, repr=False)
    _t: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] < 2:
            raise SpecificationError(f"SampledGrid needs a (nt, nx>=2) array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DataError("SampledGrid values must be finite")
        if v.shape[0] > 1 and not self.t_max > 0:
            raise SpecificationError("SampledGrid t_max must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_x", np.linspace(0.0, 1.0, v.shape[1]))
        object.__setattr__(self, "_t", np.linspace(0.0, self.t_max, v.shape[0]))

    def __call__(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        v = self.values
        nx = v.shape[1] - 1
        fx = np.clip(x, 0.0, 1.0) * nx
        ix = np.minimum(np.floor(fx).astype(int), nx - 1)
        rx = fx - ix
        if v.shape[0] == 1:
            row = v[0]
            return (1 - rx) * row[ix] + rx * row[ix + 1]
        nt = v.shape[0] - 1
        ft = np.clip(t, 0.0, self.t_max) / self.t_max * nt
        it = np.minimum(np.floor(ft).astype(int), nt - 1)
        rt = ft - it
        lo = (1 - rx) * v[it, ix] + rx * v[it, ix + 1]
        hi = (1 - rx) * v[it + 1, ix] + rx * v[it + 1, ix + 1]
        return (1 - rt) * lo + rt * hi

    def sup_norm(self, horizon):
        return float(np.max(np.abs(self.values)))

    def mirrored(self):
        return SampledGrid(self.values[:, ::-1], self.t_max)

    @property
    def is_zero(self):
        return not np.any(self.values)

    @property
    def smooth(self):
        return False

    def __eq__(self, other):
        return (
            isinstance(other, SampledGrid)
            and self.t_max == other.t_max
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None
