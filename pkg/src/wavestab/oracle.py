"""Reference solutions from the integral form of the reduced system.

Along characteristics the classical solution satisfies

    w(x,t) = int_{t-x/a}^t u(x - a(t-tau), tau) dtau + p u(0, t - x/a),
    u(x,t) = -int_{t+(x-1)/a}^t [c w](x + a(t-tau), tau) dtau,

and substituting the second line into the first gives a closed equation for
w alone whose memory reaches back 2/a (histories are kept 4/a deep).

Everything here lives on the CFL=1 lattice x_j = j dx, t_n = n dt with
dt = dx / a, so every characteristic sample is a lattice node.

Two discretisations of the closed w-equation are provided:

``"nested"``
    Composite trapezoid in both variables of the double integral. This is
    algebraically the same discrete operator as the trapezoidal
    characteristic stepper, so its fixed point reproduces that solver to
    roundoff.
``"area"``
    The double integral rewritten as an area integral over its domain of
    dependence (a characteristic quadrilateral, Jacobian 2a) and evaluated by
    the vertex-average rule on the lattice triangles. Second order, and a
    genuinely different discretisation from the stepper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import grid_nodes
from .errors import CoverageError, InsufficientDataError, SpecificationError

__all__ = [
    "HistorySegment",
    "WindowReport",
    "PicardResult",
    "Discrepancy",
    "compare_with_solver",
    "decoupled_exact",
    "picard_u",
    "picard_w_equation",
    "picard_solve",
]


@dataclass(frozen=True, eq=False)
class HistorySegment:
    """Lattice values of (w, u) on [t0 - 4/a, t0]: 4N + 1 time levels."""

    n_cells: int
    a: float
    start_step: int
    w: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        shape = (4 * self.n_cells + 1, self.n_cells + 1)
        for name in ("w", "u"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise SpecificationError(f"history {name} must have shape {shape}, got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dx(self):
        return 1.0 / self.n_cells

    @property
    def dt(self):
        return self.dx / self.a

    @property
    def levels(self):
        return self.w.shape[0]

    @property
    def times(self):
        return (self.start_step + np.arange(self.levels)) * self.dt

    @property
    def t0(self):
        return (self.start_step + self.levels - 1) * self.dt

    @classmethod
    def from_states(cls, states):
        """Build from 4N + 1 consecutive GridStates."""
        states = list(states)
        if not states:
            raise InsufficientDataError("no states given")
        N, a = states[0].n_cells, states[0].a
        steps = [s.step for s in states]
        if len(states) != 4 * N + 1 or steps != list(range(steps[0], steps[0] + 4 * N + 1)):
            raise InsufficientDataError(f"history needs 4N+1 = {4 * N + 1} consecutive levels")
        return cls(N, a, steps[0], np.array([s.w for s in states]), np.array([s.u for s in states]))

    @classmethod
    def from_trajectory(cls, traj, end_step):
        N = traj.n_cells
        by_step = {s.step: s for s in traj.states}
        try:
            states = [by_step[k] for k in range(end_step - 4 * N, end_step + 1)]
        except KeyError as exc:
            raise InsufficientDataError(f"trajectory lacks level {exc.args[0]} for the history window") from None
        return cls.from_states(states)

    @classmethod
    def constant(cls, n_cells, a, end_step, w_value=0.0, u_value=0.0):
        shape = (4 * n_cells + 1, n_cells + 1)
        return cls(n_cells, a, end_step - 4 * n_cells, np.full(shape, w_value), np.full(shape, u_value))


def _require_decoupled(spec):
    if not (spec.c.is_zero and spec.a1.is_zero):
        raise SpecificationError("decoupled_exact needs c = 0 and a1 = 0")


def decoupled_exact(data, spec, x, t):
    """Closed-form (w, u) of the unperturbed system at a point.

    Endpoint conventions match :func:`wavestab.solver.init_state`:
    phi2(1) is taken as 0 and phi1(0) as p phi2(0). The remaining transport
    integral of phi2 is evaluated by the trapezoid rule in time with step
    dt = dx / a ending at t, which reproduces the lattice solution exactly.
    """
    _require_decoupled(spec)
    a, p = spec.a, spec.p
    N = data.n_cells
    nodes = grid_nodes(N)
    phi2 = np.array(data.phi2, dtype=float)
    phi2[-1] = 0.0
    phi1 = np.array(data.phi1, dtype=float)
    phi1[0] = p * phi2[0]
    dt = 1.0 / (N * a)

    def u_at(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 1.0, np.interp(s, nodes, phi2), 0.0)

    u = float(u_at(x + a * t))
    foot = x - a * t
    tau_lo = 0.0 if foot > 0 else t - x / a
    base = float(np.interp(foot, nodes, phi1)) if foot > 0 else p * float(u_at(a * tau_lo))
    # trapezoid in tau on t, t - dt, ..., with a shorter last panel if needed
    span = t - tau_lo
    k = int(math.floor(span / dt + 1e-9))
    taus = t - dt * np.arange(k + 1)
    vals = u_at(x - a * t + 2.0 * a * taus)
    integral = dt * (np.sum(vals) - 0.5 * (vals[0] + vals[-1])) if k > 0 else 0.0
    rest = taus[-1] - tau_lo
    if rest > 1e-12 * dt:
        integral += 0.5 * rest * (vals[-1] + float(u_at(x - a * t + 2.0 * a * tau_lo)))
    return base + integral, u


def _lattice_index(seg, x, t):
    N = seg.n_cells
    i = int(round(x * N))
    m = int(round(t / seg.dt)) - seg.start_step
    if abs(i - x * N) > 1e-8 or abs((t / seg.dt) - seg.start_step - m) > 1e-6:
        raise SpecificationError(f"({x}, {t}) is not a node of the lattice")
    if not (0 <= i <= N) or not (0 <= m < seg.levels):
        raise CoverageError(f"({x}, {t}) lies outside the lattice")
    return i, m


def _trap(vals, h):
    if vals.size < 2:
        return 0.0
    return h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1]))


def _u_line(seg, spec, w_field, i, m, with_a1=True):
    """u at node (i, m) by trapezoid along the u-characteristic to x = 1."""
    N, dt = seg.n_cells, seg.dt
    K = N - i
    if m - K < 0:
        raise CoverageError(f"u-characteristic from node ({i}, {m}) leaves the lattice")
    k = np.arange(K + 1)
    js, ms = i + k, m - k
    xs = js / N
    ts = (seg.start_step + ms) * dt
    f = spec.c(xs, ts) * w_field[ms, js]
    if not with_a1 or spec.a1.is_zero:
        return -_trap(f, dt)
    b = spec.a1(xs, ts)
    # E_k = exp(int from node k to the boundary of a1 / a), trapezoid in steps of dx
    seg_int = 0.5 * dt * (b[:-1] + b[1:])
    tail = np.concatenate([np.cumsum(seg_int[::-1])[::-1], [0.0]])
    E = np.exp(tail)
    return -_trap(f * E, dt) / E[0]


def picard_u(x, t, w_field, spec):
    """u(x, t) from a w-lattice via the characteristic integral.

    ``w_field`` is a :class:`HistorySegment`; (x, t) must be a lattice node.
    With a nonzero a1 the integrating factors are trapezoid integrals on the
    same lattice.
    """
    i, m = _lattice_index(w_field, x, t)
    return float(_u_line(w_field, spec, w_field.w, i, m))


def _require_plain(spec):
    if not spec.a1.is_zero:
        raise SpecificationError("the closed w-equation is derived for a1 = 0")


def _diamond(f, j, m, N, dxdt):
    """Vertex-average rule on the lattice diamond centred at (j, m); half at j = N."""
    if j == N:
        return dxdt * ((f[m, N] + f[m, N - 1]) / 3.0 + (f[m - 1, N] + f[m + 1, N]) / 6.0)
    return dxdt * (2.0 * f[m, j] + f[m, j - 1] + f[m, j + 1] + f[m - 1, j] + f[m + 1, j]) / 3.0


def picard_w_equation(x, t, w_history, spec, quadrature="nested"):
    """Right-hand side of the closed w-equation at one lattice node.

    ``w_history`` is a :class:`HistorySegment` (its ``w`` array may already
    contain a current iterate beyond t0). Requires the domain of dependence
    [t - 2/a, t] to lie inside the lattice.
    """
    _require_plain(spec)
    seg = w_history
    J, n = _lattice_index(seg, x, t)
    N, dt, dx = seg.n_cells, seg.dt, seg.dx
    if n - 2 * N - 1 < 0:
        raise CoverageError(f"history before t={t} is shorter than 2/a")
    times = seg.times
    f = spec.c(grid_nodes(N)[None, :], times[:, None]) * seg.w
    # boundary memory term: -p int [cw](a(t - tau) - x, tau) dtau  ==  p u(0, t - x/a)
    k = np.arange(N + 1)
    boundary = -spec.p * _trap(f[n - J - k, k], dt)

    if quadrature == "nested":
        g = np.empty(J + 1)
        for r, m in enumerate(range(n - J, n + 1)):
            lo = 2 * m - n + J - N
            ks = np.arange(lo, m + 1)
            pos = J + 2 * m - n - ks
            g[r] = -_trap(f[ks, pos], dt)
        return float(_trap(g, dt) + boundary)
    if quadrature == "area":
        total = 0.0
        for Jp in range(1, J + 1):
            m0 = n - J + Jp - 1
            for kk in range(N - Jp + 1):
                total += _diamond(f, Jp + kk, m0 - kk, N, dx * dt)
        return float(-total / (2.0 * spec.a) + boundary)
    raise SpecificationError(f"unknown quadrature {quadrature!r}")


@dataclass
class WindowReport:
    start_level: int
    levels: int
    iterations: int
    residuals: list = field(default_factory=list)
    converged: bool = False


@dataclass
class PicardResult:
    """Lattice solution on (t0, T_end] with per-window convergence diagnostics."""

    n_cells: int
    a: float
    start_step: int
    w: np.ndarray
    u: np.ndarray
    windows: list

    @property
    def dt(self):
        return 1.0 / (self.n_cells * self.a)

    @property
    def steps(self):
        return self.start_step + np.arange(self.w.shape[0])

    @property
    def times(self):
        return self.steps * self.dt

    @property
    def converged(self):
        return all(wr.converged for wr in self.windows)

    @property
    def iterations(self):
        return sum(wr.iterations for wr in self.windows)

    @property
    def final_residual(self):
        return self.windows[-1].residuals[-1] if self.windows else 0.0

    @property
    def residual_ratios(self):
        out = []
        for wr in self.windows:
            r = np.asarray(wr.residuals)
            with np.errstate(divide="ignore", invalid="ignore"):
                out.extend((r[1:] / r[:-1]).tolist())
        return out


def _rhs(w_lat, u_first, c_lat, spec, N, dt, quadrature):
    """Apply the discrete integral operator to a whole lattice.

    Rows before level 2N + 1 come out garbage (their domain of dependence
    leaves the lattice) and are never used.
    """
    L = w_lat.shape[0]
    h = 0.5 * dt
    f = c_lat * w_lat
    u = np.empty_like(w_lat)
    u[0] = u_first
    for m in range(1, L):
        u[m, :N] = u[m - 1, 1:] - h * (f[m - 1, 1:] + f[m, :N])
        u[m, N] = 0.0
    out = np.zeros_like(w_lat)
    if quadrature == "nested":
        for n in range(1, L):
            out[n, 0] = spec.p * u[n, 0]
            out[n, 1:] = out[n - 1, :N] + h * (u[n - 1, :N] + u[n, 1:])
        return out, u
    if quadrature != "area":
        raise SpecificationError(f"unknown quadrature {quadrature!r}")
    dxdt = dt / N
    D = np.zeros_like(w_lat)
    D[1:-1, 1:N] = dxdt * (
        2.0 * f[1:-1, 1:N] + f[1:-1, :N - 1] + f[1:-1, 2:] + f[:-2, 1:N] + f[2:, 1:N]
    ) / 3.0
    D[1:-1, N] = dxdt * ((f[1:-1, N] + f[1:-1, N - 1]) / 3.0 + (f[:-2, N] + f[2:, N]) / 6.0)
    S = np.zeros_like(w_lat)
    S[0] = D[0]
    for m in range(1, L):
        S[m, N] = D[m, N]
        S[m, 1:N] = D[m, 1:N] + S[m - 1, 2:]
    Q = np.zeros_like(w_lat)
    for n in range(1, L):
        Q[n, 1:] = Q[n - 1, :N] + S[n - 1, 1:]
    out = -Q / (2.0 * spec.a)
    # boundary memory p u(0, t_n - x_J / a) = p u[n - J, 0]
    u0 = u[:, 0]
    J = np.arange(N + 1)
    idx = np.arange(L)[:, None] - J[None, :]
    out += spec.p * np.where(idx >= 0, u0[np.clip(idx, 0, None)], 0.0)
    return out, u


def picard_solve(seed, spec, T_end, tol=1e-13, max_iter=200, quadrature="area"):
    """Successive substitution for the closed w-equation beyond a seeded history.

    Sweeps forward in windows of 4/a. In each window the unknown levels start
    at zero and ``w <- RHS(w)`` repeats until the sup-norm change is <= tol
    or ``max_iter`` evaluations were spent. Non-convergence is reported in the
    returned windows, never raised.
    """
    _require_plain(spec)
    N, a, dt = seed.n_cells, seed.a, seed.dt
    if abs(a - spec.a) > 1e-15 * a:
        raise SpecificationError("history and problem have different wave speeds")
    hist_levels = 4 * N + 1
    end_step = seed.start_step + hist_levels - 1
    total = int(math.ceil(T_end / dt - 1e-9)) - end_step
    if total < 1:
        raise SpecificationError(f"T_end={T_end} is not beyond the seed end t0={seed.t0}")
    x = grid_nodes(N)

    w_hist, u_hist = np.array(seed.w), np.array(seed.u)
    start = seed.start_step
    out_w, out_u, windows = [], [], []
    done = 0
    while done < total:
        K = min(4 * N, total - done)
        L = hist_levels + K
        times = (start + np.arange(L)) * dt
        c_lat = spec.c(x[None, :], times[:, None])
        w_lat = np.zeros((L, N + 1))
        w_lat[:hist_levels] = w_hist
        report = WindowReport(start + hist_levels, K, 0)
        for _ in range(max_iter):
            rhs, u_lat = _rhs(w_lat, u_hist[0], c_lat, spec, N, dt, quadrature)
            new = rhs[hist_levels:]
            res = float(np.max(np.abs(new - w_lat[hist_levels:])))
            w_lat[hist_levels:] = new
            report.iterations += 1
            report.residuals.append(res)
            if not np.isfinite(res):
                break
            if res <= tol:
                report.converged = True
                break
        windows.append(report)
        out_w.append(w_lat[hist_levels:].copy())
        out_u.append(u_lat[hist_levels:].copy())
        done += K
        # slide: keep the last 4N + 1 levels as the next history
        full_w = w_lat
        full_u = np.concatenate([u_hist, u_lat[hist_levels:]])
        w_hist, u_hist = full_w[-hist_levels:], full_u[-hist_levels:]
        start += K
    return PicardResult(N, a, end_step + 1, np.concatenate(out_w), np.concatenate(out_u), windows)


@dataclass(frozen=True)
class Discrepancy:
    n_cells: int
    sup_w: float
    sup_u: float
    result: PicardResult

    @property
    def sup(self):
        return max(self.sup_w, self.sup_u)


def compare_with_solver(spec, data, n_cells, T_end, t_start=None, **picard_kw):
    """Seed the oracle with the stepper's history on [t_start - 4/a, t_start]
    and report the sup discrepancy of both fields on (t_start, T_end]."""
    from .solver import solve

    dt = 1.0 / (n_cells * spec.a)
    t_start = 4.0 / spec.a if t_start is None else t_start
    end_step = int(round(t_start / dt))
    if end_step < 4 * n_cells:
        raise CoverageError(f"t_start={t_start} leaves less than 4/a of history")
    traj = solve(replace(spec, horizon=max(spec.horizon, T_end)), data, n_cells)
    seed = HistorySegment.from_trajectory(traj, end_step)
    res = picard_solve(seed, spec, T_end, **picard_kw)
    ref_w = np.array([traj.state_at(int(s)).w for s in res.steps])
    ref_u = np.array([traj.state_at(int(s)).u for s in res.steps])
    with np.errstate(invalid="ignore", over="ignore"):
        dw = float(np.max(np.abs(ref_w - res.w)))
        du = float(np.max(np.abs(ref_u - res.u)))
    return Discrepancy(n_cells, dw, du, res)
