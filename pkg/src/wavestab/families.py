"""Named initial-data families, evaluable at arbitrary points of [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import grid_nodes, reduce_to_first_order
from .errors import SpecificationError

__all__ = ["Family", "zero", "sine", "hat", "step", "random_fourier", "make_family", "sample", "initial_data"]


@dataclass(frozen=True)
class Family:
    name: str
    params: tuple

    def __call__(self, x):
        return _EVAL[self.name](np.asarray(x, dtype=float), *self.params)


def _zero(x):
    return np.zeros_like(x)


def _sine(x, k):
    return np.sin(k * np.pi * x)


def _hat(x, center, width):
    return np.maximum(0.0, 1.0 - np.abs(x - center) / width)


def _step(x, edge):
    # midpoint value at the jump node
    return np.where(x > edge, 1.0, np.where(x == edge, 0.5, 0.0))


_MODES = 16


def _random(x, seed, smoothness):
    rng = np.random.default_rng(seed)
    coef = rng.standard_normal((2, _MODES))
    k = np.arange(1, _MODES + 1)
    decay = k ** (-float(smoothness))
    arg = np.pi * np.multiply.outer(x, k)
    return np.cos(arg) @ (coef[0] * decay) + np.sin(arg) @ (coef[1] * decay)


_EVAL = {"zero": _zero, "sine": _sine, "hat": _hat, "step": _step, "random": _random}


def zero():
    return Family("zero", ())


def sine(k=1):
    return Family("sine", (float(k),))


def hat(center=0.5, width=0.25):
    if not width > 0:
        raise SpecificationError(f"hat width must be positive, got {width}")
    return Family("hat", (float(center), float(width)))


def step(edge=0.5):
    return Family("step", (float(edge),))


def random_fourier(seed=0, smoothness=2.0):
    """Truncated random Fourier series with coefficients decaying like k^-smoothness."""
    return Family("random", (int(seed), float(smoothness)))


def make_family(name, **params):
    makers = {"zero": zero, "sine": sine, "hat": hat, "step": step, "random": random_fourier}
    if name not in makers:
        raise SpecificationError(f"unknown data family {name!r}; expected one of {sorted(makers)}")
    return makers[name](**params)


def sample(fn, n_cells):
    return np.asarray(fn(grid_nodes(n_cells)), dtype=float)


def initial_data(w0, w1, a, n_cells):
    """Sample two families on N+1 nodes and reduce to first order."""
    return reduce_to_first_order(sample(w0, n_cells), sample(w1, n_cells), a)
