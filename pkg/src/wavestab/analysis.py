"""Quantitative checks on trajectories: extinction, decay and growth fits,
discrete C2 norms under refinement, and empirical stability indices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InsufficientDataError, SpecificationError
from .families import initial_data
from .solver import solve

__all__ = [
    "FitReport",
    "SmoothingReport",
    "DERIVATIVE_ORDERS",
    "extinction_time",
    "fit_decay_rate",
    "fit_growth_bound",
    "discrete_c2_norms",
    "smoothing_report",
    "stability_index",
    "stability_index_of",
    "gronwall_constant",
    "envelope_holds",
]

DERIVATIVE_ORDERS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
FLOOR = 1e-13


@dataclass(frozen=True)
class FitReport:
    """A fitted pair ``W(t) ~ prefactor * exp(sign * rate * t) * normalizer``.

    For ``kind == "decay"`` the rate is gamma (W ~ M e^{-gamma t}); for
    ``kind == "growth"`` it is A (W <= M3 e^{A t}).
    """

    kind: str
    rate: float
    prefactor: float
    window: tuple
    rms_residual: float
    sample_count: int
    excluded: int = 0
    normalizer: float = 1.0

    @property
    def gamma(self):
        return self.rate

    @property
    def M(self):
        return self.prefactor

    A = gamma
    M3 = M

    def bound(self, t):
        sign = -1.0 if self.kind == "decay" else 1.0
        # a steep fitted rate may overflow to inf, which is still a valid bound
        with np.errstate(over="ignore"):
            return self.prefactor * np.exp(sign * self.rate * np.asarray(t)) * self.normalizer


def extinction_time(traj, tol):
    """Earliest recorded t* with every later record of all four norms <= tol."""
    if not tol > 0:
        raise SpecificationError(f"tol must be positive, got {tol}")
    above = np.nonzero(traj.norm_max() > tol)[0]
    if above.size == 0:
        return float(traj.times[0])
    last = above[-1]
    if last == traj.times.size - 1:
        return None
    return float(traj.times[last + 1])


def _line_fit(t, y):
    X = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return coef[0], coef[1], float(np.sqrt(np.mean(resid**2)))


def fit_decay_rate(traj, window, floor=FLOOR, normalizer=None):
    """Least-squares line through log W(t) on the window; gamma = -slope.

    Samples with W <= floor are dropped (they are roundoff after extinction)
    and counted in ``excluded``.
    """
    lo, hi = window
    norm = traj.normalizer if normalizer is None else normalizer
    t = traj.times
    inwin = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    usable = inwin & (traj.W > floor)
    if np.count_nonzero(usable) < 3:
        raise InsufficientDataError(
            f"only {np.count_nonzero(usable)} samples above floor {floor:g} in window [{lo}, {hi}]"
        )
    icpt, slope, rms = _line_fit(t[usable], np.log(traj.W[usable]))
    return FitReport(
        "decay",
        float(-slope),
        float(math.exp(icpt) / norm),
        (float(lo), float(hi)),
        rms,
        int(np.count_nonzero(usable)),
        int(np.count_nonzero(inwin & ~usable)),
        float(norm),
    )


def fit_growth_bound(traj, normalizer=None, norms="W"):
    """Exponential envelope ``W(t) <= M3 e^{A t} * normalizer`` for every sample.

    A is the least-squares slope of log(running max of W), clipped at 0; M3
    is then the smallest prefactor for which the envelope holds. ``norms="WU"``
    bounds max(W, U) instead (normalise by max_i |phi_i| in that case).
    """
    t = traj.times
    if norms == "W":
        y = np.asarray(traj.W, dtype=float)
    elif norms == "WU":
        y = np.maximum(traj.W, traj.U)
    else:
        raise SpecificationError(f"norms must be 'W' or 'WU', got {norms!r}")
    if normalizer is None:
        normalizer = traj.normalizer if norms == "W" else traj.phi_norm
    window = (float(t[0]), float(t[-1]))
    if not np.any(y > 0):
        return FitReport("growth", 0.0, 0.0, window, 0.0, int(y.size), 0, float(normalizer))
    env = np.maximum.accumulate(y)
    pos = env > 0
    if np.count_nonzero(pos) >= 2:
        _, slope, rms = _line_fit(t[pos], np.log(env[pos]))
    else:
        slope, rms = 0.0, 0.0
    A = max(float(slope), 0.0)
    M3 = float(np.max(y * np.exp(-A * t)) / normalizer)
    return FitReport("growth", A, M3, window, rms, int(np.count_nonzero(pos)), int(np.count_nonzero(~pos)), float(normalizer))


def envelope_holds(report, traj, norms="W", slack=1e-9):
    y = traj.W if norms == "W" else np.maximum(traj.W, traj.U)
    return bool(np.all(y <= report.bound(traj.times) * (1.0 + slack)))


def discrete_c2_norms(states, spec=None):
    """Sup over interior nodes of the six discrete derivatives of w, up to order 2.

    All stencils are centered and second-order accurate. On the dt = dx/a
    lattice the nodes with even and odd j + n never exchange information, so
    each stencil only combines nodes of one parity: pure second derivatives
    use a stride of two (levels n-2, n, n+2 and nodes j-2, j, j+2), which is
    why five consecutive levels are required. Mixing parities would expose
    the O(dx) offset between the two sublattices as grid-scale noise.
    """
    states = list(states)
    if len(states) < 5:
        raise InsufficientDataError(f"need 5 consecutive levels, got {len(states)}")
    steps = [s.step for s in states]
    if steps != list(range(steps[0], steps[0] + len(steps))):
        raise InsufficientDataError("levels are not consecutive")
    c = len(states) // 2
    w = [states[c + k].w for k in (-2, -1, 0, 1, 2)]
    dx, dt = states[c].dx, states[c].dt
    inner = slice(2, -2)

    def dx1(f):
        return (f[3:-1] - f[1:-3]) / (2.0 * dx)

    out = {
        (0, 0): w[2][inner],
        (1, 0): dx1(w[2]),
        (0, 1): (w[3][inner] - w[1][inner]) / (2.0 * dt),
        (2, 0): (w[2][4:] - 2.0 * w[2][inner] + w[2][:-4]) / (4.0 * dx * dx),
        (1, 1): (dx1(w[3]) - dx1(w[1])) / (2.0 * dt),
        (0, 2): (w[4][inner] - 2.0 * w[2][inner] + w[0][inner]) / (4.0 * dt * dt),
    }
    return {k: float(np.max(np.abs(v))) for k, v in out.items()}


@dataclass
class SmoothingReport:
    """Discrete C2 norms per (time, derivative order, N) and their refinement ratios.

    ``ratios[(t, order)][i]`` is norm(N_i) / norm(N_{i+1}); values near 1 mean
    the quantity is grid independent, values near 1/2 or below flag grid-scale
    roughness.
    """

    times: list
    n_list: list
    norms: dict = field(default_factory=dict)
    ratios: dict = field(default_factory=dict)
    within_hypothesis: bool = True

    def grid_independent(self, t, low=0.8, high=1.2):
        return all(low <= r <= high for order in DERIVATIVE_ORDERS for r in self.ratios[(t, order)])


def smoothing_report(spec, w0, w1, n_list, query_times):
    """Run the solver at each N and measure discrete C2 norms at the query times.

    ``w0`` and ``w1`` are evaluable families (see :mod:`wavestab.families`) so
    that every resolution samples the same functions.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or any(n % n_list[0] for n in n_list):
        raise SpecificationError("N_list must be increasing multiples of its first entry")
    query_times = [float(t) for t in query_times]
    if any(t < 0 or t > spec.horizon for t in query_times):
        raise SpecificationError("query times must lie within the horizon")
    report = SmoothingReport(query_times, n_list, within_hypothesis=spec.c.smooth and spec.a1.smooth)
    for N in n_list:
        dt = 1.0 / (N * spec.a)
        centers = {t: int(round(t / dt)) for t in query_times}
        extra = [k for n in centers.values() for k in range(max(n - 2, 0), n + 3)]
        horizon = max(spec.horizon, (max(centers.values()) + 2) * dt)
        run_spec = replace(spec, horizon=horizon)
        traj = solve(run_spec, initial_data(w0, w1, spec.a, N), N, record_every=10**9, extra_steps=extra)
        for t, n in centers.items():
            lo = max(n - 2, 0)
            norms = discrete_c2_norms([traj.state_at(k) for k in range(lo, lo + 5)], spec)
            for order in DERIVATIVE_ORDERS:
                report.norms.setdefault((t, order), []).append(norms[order])
    for key, vals in report.norms.items():
        with np.errstate(divide="ignore", invalid="ignore"):
            report.ratios[key] = [float(a / b) if b != 0 else math.nan for a, b in zip(vals, vals[1:])]
    return report


def stability_index_of(trajectories, t_list, floor=FLOOR):
    """Ensemble max of log(W(t)/W(0)) / t; -inf where W(t) <= floor."""
    out = []
    for t in t_list:
        best = -math.inf
        for tr in trajectories:
            if not tr.W[0] > 0:
                raise SpecificationError("stability index needs W(0) > 0")
            k = int(np.argmin(np.abs(tr.times - t)))
            Wt = tr.W[k]
            if Wt > floor and tr.times[k] > 0:
                best = max(best, math.log(Wt / tr.W[0]) / tr.times[k])
        out.append(best)
    return np.array(out)


def stability_index(spec, data_ensemble, t_list, floor=FLOOR):
    if not data_ensemble:
        raise SpecificationError("empty ensemble")
    run_spec = replace(spec, horizon=max(spec.horizon, max(t_list)))
    trajs = [solve(run_spec, d, d.n_cells, record_every=10**9) for d in data_ensemble]
    return stability_index_of(trajs, t_list, floor)


def gronwall_constant(traj, spec, floor=FLOOR):
    """Smallest K with W(t) <= K sup|c| int_{t-4/a}^t W for every recorded t > 4/a.

    Returns ``(K, ratios)``; ``K`` is 0 when W stays below ``floor`` there.
    """
    t, W = traj.times, traj.W
    dt = t[1] - t[0]
    cum = np.concatenate([[0.0], np.cumsum(0.5 * dt * (W[1:] + W[:-1]))])
    lag = int(round(4.0 / (spec.a * dt)))
    csup = spec.c.sup_norm(spec.horizon)
    idx = np.arange(lag + 1, t.size)
    if idx.size == 0:
        raise InsufficientDataError("trajectory does not extend beyond 4/a")
    memory = csup * (cum[idx] - cum[idx - lag])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(W[idx] > floor, W[idx] / memory, 0.0)
    return float(np.max(ratios)), ratios
