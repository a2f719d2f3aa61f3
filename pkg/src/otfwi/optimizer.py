"""L-BFGS with a weak-Wolfe line search for the model update loop.

The optimizer is deliberately self-contained: trial models are clipped to
the physical velocity band before every objective evaluation (so the clip
acts as a projection), the line search streams per-iteration rows to a CSV
for long runs, and each distinct stop reason is recorded on the trace.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .gridcore import VelocityModel, model_error

__all__ = ["LbfgsOptions", "InversionTrace", "minimize"]


@dataclass(frozen=True)
class LbfgsOptions:
    memory: int = 10
    max_iters: int = 100
    c1: float = 1e-4
    c2: float = 0.9
    initial_step: float | None = None
    grad_tol: float = 0.0
    step_tol: float = 0.0
    v_clip: tuple = (100.0, 10000.0)
    max_ls_evals: int = 25

    def __post_init__(self):
        if not (0 < self.c1 < self.c2 < 1):
            raise ValueError("need 0 < c1 < c2 < 1")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")


class InversionTrace:
    """Per-iteration log of the inversion; optionally streamed to CSV."""

    columns = ("iter", "J", "normalized_J", "model_error", "step",
               "n_evals", "line_search_status")

    def __init__(self, csv_path=None):
        self.rows = []
        self.stop_reason = None
        self._file = open(csv_path, "w", newline="") if csv_path else None
        self._writer = None
        if self._file:
            self._writer = csv.writer(self._file)
            self._writer.writerow(self.columns)

    def append(self, **row):
        self.rows.append(row)
        if self._writer:
            self._writer.writerow([row.get(c, "") for c in self.columns])
            self._file.flush()

    def close(self):
        if self._file:
            self._file.close()
            self._file = None

    @property
    def J(self):
        return [r["J"] for r in self.rows]

    @property
    def model_errors(self):
        return [r["model_error"] for r in self.rows]


def _two_loop(grad, s_list, y_list):
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / np.dot(y, s)
        a = rho * np.dot(s, q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= np.dot(s, y) / np.dot(y, y)
    for (s, y), a in zip(zip(s_list, y_list), reversed(alphas)):
        rho = 1.0 / np.dot(y, s)
        b = rho * np.dot(y, q)
        q += (a - b) * s
    return -q


def minimize(objective, m0: VelocityModel, opts: LbfgsOptions,
             truth: VelocityModel | None = None, trace_csv=None,
             callback=None):
    """Minimize objective(model) -> (J, gradient) starting from m0.

    Returns (final model, InversionTrace).  The gradient may be a
    GradientField or a bare array.  When ``truth`` is given, each row logs
    the model error normalized by the starting error.
    """
    vmin, vmax = opts.v_clip

    def make_model(x):
        # clip in squared slowness first so nonpositive trial values fold
        # onto the fast bound instead of producing NaN velocities
        m = np.clip(x.reshape(m0.grid.shape), 1.0 / vmax**2, 1.0 / vmin**2)
        return VelocityModel(m0.grid, m, vmin, vmax)

    def eval_at(x):
        J, grad = objective(make_model(x))
        gv = getattr(grad, "values", grad)
        return float(J), np.asarray(gv, dtype=np.float64).ravel()

    trace = InversionTrace(trace_csv)
    x = m0.m.ravel().copy()
    J, g = eval_at(x)
    J0 = J if J > 0 else 1.0
    n_evals = 1
    err0 = model_error(m0, truth) if truth is not None else None

    def log(i, step, status, nev):
        merr = ""
        if truth is not None:
            merr = model_error(make_model(x), truth) / err0 if err0 else 0.0
        trace.append(iter=i, J=J, normalized_J=J / J0, model_error=merr,
                     step=step, n_evals=nev, line_search_status=status)
        if callback:
            callback(i, make_model(x), J)

    log(0, 0.0, "init", n_evals)
    s_list, y_list = [], []

    for it in range(1, opts.max_iters + 1):
        gnorm = np.linalg.norm(g)
        if opts.grad_tol and gnorm < opts.grad_tol:
            trace.stop_reason = "grad_tol"
            break
        d = _two_loop(g, s_list, y_list)
        if np.dot(g, d) >= 0:
            d = -g  # memory went stale; restart from steepest descent
            s_list, y_list = [], []
        gd = np.dot(g, d)
        if gd >= 0:
            trace.stop_reason = "no_descent_direction"
            log(it, 0.0, "no_descent", 0)
            break
        if s_list or opts.initial_step is not None:
            step = opts.initial_step if not s_list else 1.0
        else:
            # first trial moves velocity by at most 2% of its range
            v = make_model(x).velocity
            vr = float(v.max() - v.min()) or 0.02 * float(v.mean())
            dmax = np.max(np.abs(d) * 0.5 * x ** (-1.5))
            step = 0.02 * vr / dmax if dmax > 0 else 1.0

        # weak Wolfe by expand/bisect bracketing; trial points are projected
        # onto the velocity bounds first, and both conditions are tested
        # against the slope of the projected move so an active bound cannot
        # overstate the predicted decrease
        mlo, mhi = 1.0 / vmax**2, 1.0 / vmin**2
        lo, hi = 0.0, np.inf
        status = "ls_exhausted"
        nev = 0
        J_new = g_new = x_new = None
        best = None  # last point that passed Armijo
        for _ in range(2 * opts.max_ls_evals):
            if nev >= opts.max_ls_evals:
                break
            x_try = np.clip(x + step * d, mlo, mhi)
            s_try = x_try - x
            pred = np.dot(g, s_try)
            if pred >= 0:
                # fully clipped move: shrink without spending an evaluation
                hi = step
                step = 0.5 * (lo + hi)
                continue
            J_try, g_try = eval_at(x_try)
            nev += 1
            if not np.isfinite(J_try) or J_try > J + opts.c1 * pred:
                hi = step
                step = 0.5 * (lo + hi)
                continue
            best = (J_try, g_try, x_try)
            if np.dot(g_try, s_try) < opts.c2 * pred:
                lo = step
                step = 2.0 * step if hi == np.inf else 0.5 * (lo + hi)
                continue
            status = "wolfe"
            J_new, g_new, x_new = J_try, g_try, x_try
            break
        if J_new is None:
            # fall back to the last point that had sufficient decrease
            if best is not None:
                J_new, g_new, x_new = best
                status = "armijo_only"
            else:
                trace.stop_reason = "no_feasible_descent"
                log(it, 0.0, "ls_failed", nev)
                break
        n_evals += nev
        s = x_new - x
        y = g_new - g
        x, J, g = x_new, J_new, g_new
        # clip acts as a projection: keep the represented model feasible
        x = make_model(x).m.ravel()
        if np.dot(s, y) > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            s_list.append(s)
            y_list.append(y)
            if len(s_list) > opts.memory:
                s_list.pop(0)
                y_list.pop(0)
        log(it, float(np.linalg.norm(s)), status, nev)
        if opts.step_tol and np.linalg.norm(s) < opts.step_tol:
            trace.stop_reason = "step_tol"
            break
    else:
        trace.stop_reason = trace.stop_reason or "max_iters"
    trace.close()
    return make_model(x), trace
