import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavestab import families as F
from wavestab.analysis import (
    DERIVATIVE_ORDERS,
    discrete_c2_norms,
    envelope_holds,
    extinction_time,
    fit_decay_rate,
    fit_growth_bound,
    smoothing_report,
    stability_index,
    stability_index_of,
)
from wavestab.coefficients import Constant, SampledGrid, SeparableTrig
from wavestab.core import GridState, ProblemSpec, Trajectory, grid_nodes
from wavestab.errors import InsufficientDataError, SpecificationError
from wavestab.mollify import mollified_data
from wavestab.solver import solve

T = np.linspace(0, 10, 201)


def random_data(seed, n):
    return F.initial_data(F.random_fourier(seed), F.random_fourier(seed + 1), 1.0, n)


# ---- extinction ------------------------------------------------------------

def test_extinction_zero_data():
    tr = solve(ProblemSpec(a=1.0, horizon=1.0), F.initial_data(F.zero(), F.zero(), 1.0, 20), 20)
    assert extinction_time(tr, 1e-12) == 0.0


def test_extinction_unperturbed():
    tr = solve(ProblemSpec(a=1.0, p=0.3, horizon=4.0), random_data(2, 100), 100, record_every=10**9)
    t_star = extinction_time(tr, 1e-10)
    assert t_star is not None and t_star <= 2 + 2 * tr.dt


def test_no_extinction_with_coupling():
    tr = solve(ProblemSpec(a=1.0, p=0.5, c=Constant(0.05), horizon=10.0), random_data(3, 200), 200,
               record_every=10**9)
    assert tr.W[-1] > 1e-10
    assert extinction_time(tr, 1e-10) is None


@given(st.lists(st.floats(1e-15, 1.0), min_size=2, max_size=5))
def test_extinction_monotone_in_tol(tols):
    tr = Trajectory.from_norms(T, np.where(T < 3, np.exp(-T), 1e-14 * np.exp(-T)))
    tols = sorted(tols)
    stars = [extinction_time(tr, tol) for tol in tols]
    for small, big in zip(stars, stars[1:]):
        if small is not None:
            assert big is not None and big <= small


def test_extinction_tol_positive():
    with pytest.raises(SpecificationError):
        extinction_time(Trajectory.from_norms(T, np.exp(-T)), 0.0)


# ---- decay fit -----------------------------------------------------------------

def test_decay_fit_exact_exponential():
    fit = fit_decay_rate(Trajectory.from_norms(T, 3 * np.exp(-2 * T)), (1, 9))
    assert fit.gamma == pytest.approx(2.0, abs=1e-12)
    assert fit.M == pytest.approx(3.0, rel=1e-12)
    assert fit.rms_residual < 1e-12 and fit.kind == "decay"


def test_decay_fit_constant():
    fit = fit_decay_rate(Trajectory.from_norms(T, np.full_like(T, 5.0)), (0, 10))
    assert abs(fit.gamma) < 1e-13 and fit.M == pytest.approx(5.0)


@given(st.floats(-3, 3), st.floats(-5, 5), st.floats(0.1, 10))
def test_decay_fit_recovers_line(slope, icpt, norm):
    tr = Trajectory.from_norms(T, np.exp(icpt - slope * T), normalizer=norm)
    fit = fit_decay_rate(tr, (0, 10))
    assert fit.gamma == pytest.approx(slope, abs=1e-12)
    assert math.log(fit.M * norm) == pytest.approx(icpt, abs=1e-12)


def test_decay_fit_drops_floor_samples():
    W = np.where(T < 2, np.exp(-T), 0.0)
    fit = fit_decay_rate(Trajectory.from_norms(T, W), (0, 10))
    assert fit.sample_count == np.count_nonzero(T < 2) and fit.excluded == np.count_nonzero(T >= 2)
    with pytest.raises(InsufficientDataError):
        fit_decay_rate(Trajectory.from_norms(T, W), (3, 10))


def test_decay_faster_for_smaller_coupling():
    gammas = []
    for eps in (1e-1, 1e-2):
        spec = ProblemSpec(a=1.0, p=0.5, c=SeparableTrig(eps, math.pi, 1.0), horizon=30.0)
        tr = solve(spec, random_data(7, 100), 100, record_every=10**9)
        gammas.append(fit_decay_rate(tr, (3, 30)).gamma)
    assert 0 < gammas[0] < gammas[1]


# ---- growth envelope ---------------------------------------------------------------

def test_growth_exact_exponential():
    tr = Trajectory.from_norms(T, np.exp(0.5 * T))
    fit = fit_growth_bound(tr)
    assert fit.A == pytest.approx(0.5, abs=1e-12) and fit.M3 == pytest.approx(1.0, rel=1e-12)
    assert envelope_holds(fit, tr)


def test_growth_of_decaying_trajectory():
    tr = Trajectory.from_norms(T, 4 * np.exp(-T), normalizer=2.0)
    fit = fit_growth_bound(tr)
    assert abs(fit.A) < 1e-14 and fit.M3 == pytest.approx(2.0, rel=1e-12)


def test_growth_of_transient_then_decay():
    tr = solve(ProblemSpec(a=1.0, p=0.5, horizon=3.0), random_data(1, 50), 50)
    fit = fit_growth_bound(tr)
    assert fit.A >= 0.0 and envelope_holds(fit, tr)
    assert fit.M3 <= np.max(tr.W) / tr.normalizer * (1 + 1e-15)


def test_growth_zero_trajectory():
    fit = fit_growth_bound(Trajectory.from_norms(T, np.zeros_like(T)))
    assert fit.A == 0.0 and fit.M3 == 0.0


def test_growth_large_coefficient():
    spec = ProblemSpec(a=1.0, p=0.5, c=Constant(1.0), horizon=10.0)
    tr = solve(spec, random_data(4, 100), 100, record_every=10**9)
    fit = fit_growth_bound(tr)
    assert math.isfinite(fit.A) and math.isfinite(fit.M3)
    assert envelope_holds(fit, tr)
    both = fit_growth_bound(tr, norms="WU")
    assert envelope_holds(both, tr, norms="WU")


@given(st.lists(st.floats(0, 1e6, allow_subnormal=False), min_size=3, max_size=60))
def test_envelope_property(values):
    t = np.arange(len(values)) * 0.1
    tr = Trajectory.from_norms(t, np.array(values), normalizer=2.0)
    assert envelope_holds(fit_growth_bound(tr), tr)


def test_growth_rejects_unknown_mode():
    with pytest.raises(SpecificationError):
        fit_growth_bound(Trajectory.from_norms(T, np.exp(-T)), norms="X")


# ---- discrete C2 norms ---------------------------------------------------------------

def synthetic_states(fn, n=20, a=1.0, first=3, count=5):
    x = grid_nodes(n)
    dt = 1.0 / (n * a)
    return [GridState(n, a, k, fn(x, k * dt), np.zeros(n + 1)) for k in range(first, first + count)]


def test_c2_norms_zero():
    norms = discrete_c2_norms(synthetic_states(lambda x, t: 0 * x))
    assert set(norms) == set(DERIVATIVE_ORDERS) and not any(norms.values())


def test_c2_norms_quadratic_in_x():
    norms = discrete_c2_norms(synthetic_states(lambda x, t: x * x))
    assert norms[(2, 0)] == pytest.approx(2.0, rel=1e-10)
    assert norms[(0, 1)] == norms[(1, 1)] == norms[(0, 2)] == 0.0


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.sampled_from([0.5, 1.0, 2.0]))
def test_c2_norms_exact_on_quadratics(coef, a):
    c0, cx, ct, cxx, cxt, ctt = coef
    n = 16

    def fn(x, t):
        return c0 + cx * x + ct * t + cxx * x * x + cxt * x * t + ctt * t * t

    states = synthetic_states(fn, n=n, a=a, first=7)
    norms = discrete_c2_norms(states)
    s = states[2]
    x = s.x[2:-2]
    exact = {
        (0, 0): np.max(np.abs(fn(x, s.t))),
        (1, 0): np.max(np.abs(cx + 2 * cxx * x + cxt * s.t)),
        (0, 1): np.max(np.abs(ct + cxt * x + 2 * ctt * s.t)),
        (2, 0): abs(2 * cxx),
        (1, 1): abs(cxt),
        (0, 2): abs(2 * ctt),
    }
    for k, v in exact.items():
        assert norms[k] == pytest.approx(v, abs=1e-8 * (1 + v))


def test_c2_norms_need_five_consecutive_levels():
    states = synthetic_states(lambda x, t: x)
    with pytest.raises(InsufficientDataError):
        discrete_c2_norms(states[:4])
    with pytest.raises(InsufficientDataError):
        discrete_c2_norms(states[:2] + states[3:] + [states[0]])


def test_smoothing_smooth_data():
    # smooth compactly supported data, no coupling: a classical solution throughout
    spec = ProblemSpec(a=1.0, p=0.5, horizon=3.0)

    rep_norms = {}
    for n in (128, 256):
        d = mollified_data(F.sine(1), F.sine(2), 1.0, n, 2)
        tr = solve(spec, d, n, extra_steps=range(0, 3 * n + 1))
        for t in (0.5, 1.2, 2.5):
            k = int(round(t * n))
            rep_norms.setdefault(t, []).append(discrete_c2_norms([tr.state_at(j) for j in range(k - 2, k + 3)]))
    for t in (0.5, 1.2):
        for order in DERIVATIVE_ORDERS:
            a, b = rep_norms[t][0][order], rep_norms[t][1][order]
            assert 0.9 <= a / b <= 1.1, (t, order, a, b)
    assert all(v <= 1e-12 for d in rep_norms[2.5] for v in d.values())


def test_smoothing_report_rough_data():
    spec = ProblemSpec(a=1.0, p=0.5, c=SeparableTrig(0.01, math.pi, 0.0), horizon=7.0)
    rep = smoothing_report(spec, F.hat(), F.step(), [100, 200], [0.5, 6.5])
    assert rep.ratios[(0.5, (2, 0))][0] <= 0.6
    assert not rep.grid_independent(0.5)
    assert rep.grid_independent(6.5)
    assert rep.within_hypothesis


def test_smoothing_report_flags_sampled_coefficients():
    vals = 0.01 * np.ones((3, 5))
    spec = ProblemSpec(a=1.0, p=0.5, c=SampledGrid(vals, 2.0), horizon=1.0)
    rep = smoothing_report(spec, F.sine(1), F.zero(), [40, 80], [0.5])
    assert not rep.within_hypothesis


def test_smoothing_report_validation():
    spec = ProblemSpec(a=1.0, horizon=1.0)
    with pytest.raises(SpecificationError):
        smoothing_report(spec, F.hat(), F.step(), [100, 150], [0.5])
    with pytest.raises(SpecificationError):
        smoothing_report(spec, F.hat(), F.step(), [100, 200], [1.5])


# ---- stability index ----------------------------------------------------------------

def test_stability_index_unperturbed_is_minus_infinity():
    spec = ProblemSpec(a=1.0, p=0.5, horizon=4.0)
    ens = [random_data(s, 50) for s in range(3)]
    est = stability_index(spec, ens, [1.0, 2.5, 3.0, 4.0])
    assert math.isfinite(est[0]) and np.all(est[1:] == -math.inf)


def test_stability_index_single_exponential():
    tr = Trajectory.from_norms(T, np.exp(-T))
    np.testing.assert_allclose(stability_index_of([tr], [1.0, 5.0, 10.0]), -1.0, rtol=1e-12)


def test_stability_index_decreases_with_time():
    spec = ProblemSpec(a=1.0, p=0.5, c=SeparableTrig(0.01, math.pi, 1.0), horizon=30.0)
    ens = [random_data(s, 100) for s in range(10)]
    est = stability_index(spec, ens, [3, 5, 10, 20, 30])
    # below the floor the estimate is -inf, which still compares as non-increasing
    assert np.all(est[1:] <= est[:-1])
    assert est[1] < est[0] < 0


def test_stability_index_needs_positive_start():
    with pytest.raises(SpecificationError):
        stability_index_of([Trajectory.from_norms(T, np.zeros_like(T))], [1.0])
