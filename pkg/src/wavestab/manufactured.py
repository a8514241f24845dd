"""Manufactured solution w = e^{-t} sin(pi x) for convergence studies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Orientation, grid_nodes, reduce_to_first_order
from .errors import SpecificationError
from .solver import Forcing, StepScheme

__all__ = ["SineDecay", "manufactured"]


@dataclass(frozen=True)
class SineDecay:
    """Exact pair for w = e^{-t} sin(pi x) under a given problem."""

    spec: object

    def w(self, x, t):
        return np.exp(-t) * np.sin(np.pi * x)

    def u(self, x, t):
        a = self.spec.a
        return np.exp(-t) * (-np.sin(np.pi * x) + a * np.pi * np.cos(np.pi * x))

    def u_x(self, x, t):
        a = self.spec.a
        return np.exp(-t) * (-np.pi * np.cos(np.pi * x) - a * np.pi**2 * np.sin(np.pi * x))

    def f_u(self, x, t):
        # u_t = -u since every term carries e^{-t}
        s = self.spec
        u = self.u(x, t)
        return -u - s.a * self.u_x(x, t) + s.a1(x, t) * u + s.c(x, t) * self.w(x, t)

    def forcing(self):
        s = self.spec
        return Forcing(
            f_w=None,
            f_u=self.f_u,
            w_left=lambda t: self.w(0.0, t) - s.p * self.u(0.0, t),
            u_right=lambda t: self.u(1.0, t),
        )

    def scheme(self):
        return StepScheme(forcing=self.forcing())

    def initial_data(self, n_cells):
        x = grid_nodes(n_cells)
        return reduce_to_first_order(self.w(x, 0.0), -self.w(x, 0.0), self.spec.a)


def manufactured(spec):
    if spec.orientation is not Orientation.LEFT:
        raise SpecificationError("manufactured solutions are set up for LEFT problems")
    return SineDecay(spec)
