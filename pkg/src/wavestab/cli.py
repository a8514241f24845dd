"""Command-line scenario runner.

    wavestab <command> --config scenario.txt [--out DIR]

Commands: solve, extinction, decay-sweep, smoothing, verify, mollify-study.
Each writes one or more CSV tables into the output directory, plus a gnuplot
script (``output.emit_plots``) and a matplotlib PNG (``output.figures``,
on by default) next to each table.

Exit status: 0 on success, 2 for an invalid scenario file, 3 when a
computation fails.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import DERIVATIVE_ORDERS, extinction_time, fit_decay_rate, smoothing_report
from .config import COMMAND_KEYS, load_config
from .core import l2_norm
from .errors import ConfigError, InsufficientDataError, SolverOverflowError, WavestabError
from .families import initial_data
from .manufactured import manufactured
from .mollify import generalized_solution_check, mollified_data
from .oracle import compare_with_solver
from .plotting import emit_plot_script, render_figure
from .solver import solve

__all__ = ["main", "write_csv", "format_value", "ENV_OUT"]

logger = logging.getLogger("wavestab")

ENV_OUT = "WAVESTAB_OUT"
EXTINCT = "extinct"
NONE = "none"


def format_value(v):
    """17 significant digits; +-inf is written as the ``extinct`` marker."""
    if v is None:
        return NONE
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return EXTINCT
    if math.isnan(v):
        return NONE
    return f"{v:.17g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return Path(path)


class Run:
    """Output bookkeeping shared by the commands."""

    def __init__(self, cfg, out_dir):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.scripts = cfg.get("output.emit_plots", False)
        self.figures = cfg.get("output.figures", True)
        self.warnings = []

    def table(self, name, header, rows, plot=None, x=None):
        rows = list(rows)
        path = write_csv(self.out / name, header, rows)
        if plot and rows:
            if self.scripts:
                emit_plot_script(path, plot)
            if self.figures:
                render_figure(path, plot, x=x)
        print(f"wrote {path}")
        return path


def _data(cfg, n_cells, a):
    w0, w1 = cfg.family("w0"), cfg.family("w1")
    level = cfg.get("data.mollify")
    if level is not None:
        return mollified_data(w0, w1, a, n_cells, level)
    return initial_data(w0, w1, a, n_cells)


def _norm_rows(traj):
    return zip(traj.times, traj.W, traj.U, traj.sup_w, traj.sup_u)


NORM_HEADER = ("t", "W", "U", "sup_w", "sup_u")


def cmd_solve(run):
    cfg = run.cfg
    spec = cfg.problem()
    N = cfg.get("grid.N")
    snaps = cfg.get("run.snapshots", [])
    kw = dict(record_every=cfg.get("grid.record_every", 1), extra_steps=snaps)
    mms = None
    if cfg.get("forcing.manufactured", False):
        mms = manufactured(spec)
        traj = solve(spec, mms.initial_data(N), N, scheme=mms.scheme(), **kw)
    else:
        traj = solve(spec, _data(cfg, N, spec.a), N, **kw)
    run.table("norms.csv", NORM_HEADER, _norm_rows(traj), plot=["W", "U"])
    for k in snaps:
        if k > traj.times.size - 1:
            raise ConfigError(f"run.snapshots: step {k} is beyond the last step {traj.times.size - 1}")
        s = traj.state_at(k)
        write_csv(run.out / f"state_{k}.csv", ("x", "w", "u"), zip(s.x, s.w, s.u))
    if mms is not None:
        s = traj.final
        err = l2_norm(s.w - mms.w(s.x, s.t), s.dx)
        run.table("mms_error.csv", ("N", "t", "l2_error"), [(N, s.t, err)])
    return traj


def cmd_extinction(run):
    cfg = run.cfg
    traj = cmd_solve(run)
    tol = cfg.get("run.tol", 1e-12)
    a = cfg.get("problem.a")
    t_star = extinction_time(traj, tol)
    late = traj.times >= 2.0 / a + 2.0 * traj.dt - 1e-12
    after = float(np.max(traj.norm_max()[late])) if np.any(late) else None
    run.table("extinction.csv", ("t_star", "predicted", "tol", "max_after_predicted"),
              [(t_star, 2.0 / a, tol, after)])
    print(f"extinction time {format_value(t_star)} (2/a = {2.0 / a:g})")


def cmd_decay_sweep(run):
    cfg = run.cfg
    N = cfg.get("grid.N")
    window = cfg.get("run.window")
    floor = cfg.get("run.floor", 1e-13)
    rows = []
    for eps in sorted(cfg.get("run.epsilons"), reverse=True):
        spec = cfg.problem(c_amplitude=eps)
        traj = solve(spec, _data(cfg, N, spec.a), N, record_every=10**9)
        try:
            fit = fit_decay_rate(traj, window, floor=floor)
            rows.append((eps, fit.gamma, fit.M, fit.rms_residual, window[0], window[1]))
        except InsufficientDataError:
            if extinction_time(traj, floor) is None:
                raise
            rows.append((eps, math.inf, 0.0, 0.0, window[0], window[1]))
        print(f"epsilon {eps:g}: gamma {format_value(rows[-1][1])}")
    run.table("decay.csv", ("epsilon", "gamma", "M", "rms", "window_lo", "window_hi"), rows, plot=["gamma"])


def cmd_smoothing(run):
    cfg = run.cfg
    if "data.mollify" in cfg:
        raise ConfigError("data.mollify does not apply to the smoothing command", cfg.lines["data.mollify"])
    spec = cfg.problem()
    n_list, times = cfg.get("run.N_list"), cfg.get("run.times")
    rep = smoothing_report(spec, cfg.family("w0"), cfg.family("w1"), n_list, times)
    rows = []
    for t in rep.times:
        for al, be in DERIVATIVE_ORDERS:
            norms, ratios = rep.norms[(t, (al, be))], rep.ratios[(t, (al, be))]
            for i, r in enumerate(ratios):
                rows.append((t, al, be, n_list[i], n_list[i + 1], norms[i], norms[i + 1], r))
        verdict = "grid independent" if rep.grid_independent(t) else "grid dependent"
        print(f"t = {t:g}: {verdict}")
    if not rep.within_hypothesis:
        run.warnings.append("coefficients are sampled, not smooth; grid independence is not guaranteed")
    run.table("smoothing.csv",
              ("t", "alpha", "beta", "N_coarse", "N_fine", "norm_coarse", "norm_fine", "ratio"), rows,
              plot=["ratio"])


def cmd_verify(run):
    cfg = run.cfg
    a = cfg.get("problem.a")
    t_start = cfg.get("run.t_start", 4.0 / a)
    t_end = cfg.get("run.T_end", t_start + 4.0 / a)
    spec = cfg.problem(horizon=max(cfg.get("problem.horizon"), t_end))
    rows, prev = [], None
    for N in cfg.get("run.N_list"):
        d = compare_with_solver(
            spec, _data(cfg, N, a), N, t_end, t_start,
            tol=cfg.get("run.tol", 1e-13), max_iter=cfg.get("run.max_iter", 200),
        )
        res = d.result
        order = None
        if prev is not None and math.isfinite(d.sup) and d.sup > 0 and prev[1] > 0:
            order = math.log(prev[1] / d.sup) / math.log(N / prev[0])
        if not res.converged:
            run.warnings.append(f"N={N}: Picard iteration did not converge (residual {res.final_residual:.3g})")
        finite = [v if math.isfinite(v) else None for v in (d.sup, res.final_residual)]
        rows.append((N, finite[0], order, res.converged, res.iterations, finite[1]))
        prev = (N, d.sup)
        print(f"N={N}: discrepancy {d.sup:.3e}, converged={res.converged}")
    run.table("verify.csv",
              ("N", "sup_discrepancy", "observed_order", "converged", "iterations", "final_residual"),
              rows, plot=["sup_discrepancy"])


def cmd_mollify_study(run):
    cfg = run.cfg
    if "data.mollify" in cfg:
        raise ConfigError("data.mollify does not apply to mollify-study", cfg.lines["data.mollify"])
    spec = cfg.problem()
    table = generalized_solution_check(
        spec, cfg.family("w0"), cfg.family("w1"), cfg.get("run.l_list"), cfg.get("grid.N")
    )
    rows = [(r.level, r.next_level, r.distance, r.phi_distance, r.w0_h1_distance, r.bound) for r in table]
    run.table("mollify.csv", ("l", "l_next", "distance", "phi_distance", "w0_h1_distance", "bound"),
              rows, plot=["distance", "bound"])
    if not all(r.within_bound for r in table):
        run.warnings.append("some distances exceed the fitted growth bound")


COMMANDS = {
    "solve": cmd_solve,
    "extinction": cmd_extinction,
    "decay-sweep": cmd_decay_sweep,
    "smoothing": cmd_smoothing,
    "verify": cmd_verify,
    "mollify-study": cmd_mollify_study,
}
assert set(COMMANDS) == set(COMMAND_KEYS)


def build_parser():
    parser = argparse.ArgumentParser(prog="wavestab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver details")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario file (key = value lines)")
        p.add_argument("--out", help=f"output directory (default: output.dir, then ${ENV_OUT}, then ./wavestab-out)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        cfg.require(args.command)
        out = args.out or cfg.get("output.dir") or os.environ.get(ENV_OUT) or "wavestab-out"
        run = Run(cfg, out)
        COMMANDS[args.command](run)
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    except SolverOverflowError as exc:
        print(f"solver failed at step {exc.step_index}: {exc}", file=sys.stderr)
        return 3
    except WavestabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for w in run.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
