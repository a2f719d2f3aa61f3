"""Diagnostic scans: shift/dilation landscapes, Huber curves, noise scaling,
residual spectra, wavenumber splits, convexity verdicts.

Shift-dilation scans come in two frames:

* ``eulerian`` — the transformed signal (1/lam) g((t - s)/lam) is resampled
  onto the fixed recording window by cubic interpolation (zero outside the
  support).  This is the frame in which cycle skipping and the convexity
  defects of weak normalizations show up.
* ``lagrangian`` — the transform acts on the underlying measure: the
  transformed trace keeps its own translated/dilated time axis.  In this
  frame the ideal transport laws (misfit = s^2, the closed-form landscape)
  hold without windowing artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .gridcore import ShotGather, Trace, VelocityModel
from .misfit import MisfitKind
from .transport import normalize, w2_squared

__all__ = [
    "ScanGrid",
    "shift_dilate_scan",
    "convexity_check",
    "huber_scan",
    "noise_scan",
    "residual_spectrum",
    "bandpass_split",
]


@dataclass(frozen=True)
class ScanGrid:
    axis1_name: str
    axis1: np.ndarray
    values: np.ndarray
    axis2_name: str | None = None
    axis2: np.ndarray | None = None

    def __post_init__(self):
        a1 = np.asarray(self.axis1, dtype=np.float64)
        object.__setattr__(self, "axis1", a1)
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if self.axis2 is not None:
            a2 = np.asarray(self.axis2, dtype=np.float64)
            object.__setattr__(self, "axis2", a2)
            if v.shape != (a1.size, a2.size):
                raise ValueError("values shape does not match axes")
        elif v.shape != a1.shape:
            raise ValueError("values shape does not match axis")
        for ax in (a1,) + ((self.axis2,) if self.axis2 is not None else ()):
            if ax.size > 1 and np.any(np.diff(ax) <= 0):
                raise ValueError("scan axes must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite scan values")


def _transformed_trace(g: Trace, s, lam, frame):
    if frame == "lagrangian":
        return Trace(g.samples / lam, lam * g.dt, t0=lam * g.t0 + s)
    t = g.times
    spline = CubicSpline(t, g.samples, bc_type="natural", extrapolate=False)
    vals = spline((t - s) / lam) / lam
    return Trace(np.nan_to_num(vals, nan=0.0), g.dt, t0=g.t0)


def _scan_misfit(f: Trace, g: Trace, metric: MisfitKind):
    if metric.kind == "L2":
        r = f.samples - g.samples
        return float(np.sum(r * r) * f.dt)
    return w2_squared(normalize(f, metric.scheme), normalize(g, metric.scheme))


def shift_dilate_scan(g: Trace, s_values, lam_values, metric: MisfitKind,
                      frame: str = "eulerian") -> ScanGrid:
    """Misfit landscape over shifts s and dilations lam of the signal g.

    The scanned signal is f(t) = (1/lam) g((t - s)/lam); the landscape plots
    the bare misfit (W2 squared, no 1/2 factor).  lam_values may be [1.0]
    for a pure shift scan.
    """
    if frame not in ("eulerian", "lagrangian"):
        raise ValueError(f"unknown frame {frame!r}")
    s_values = np.asarray(s_values, dtype=np.float64)
    lam_values = np.asarray(lam_values, dtype=np.float64)
    vals = np.empty((s_values.size, lam_values.size))
    for j, lam in enumerate(lam_values):
        for i, s in enumerate(s_values):
            f = _transformed_trace(g, s, lam, frame)
            vals[i, j] = _scan_misfit(f, g, metric)
    if lam_values.size == 1:
        return ScanGrid("shift", s_values, vals[:, 0])
    return ScanGrid("shift", s_values, vals, "dilation", lam_values)


def convexity_check(grid: ScanGrid):
    """Finite-difference convexity diagnostics of a 2D scan.

    pd_fraction: share of interior points whose central-FD 2x2 Hessian has
    both eigenvalues > 0.  monotone_to_min: True when every axis-parallel
    slice through the grid minimum decreases monotonically toward it.
    """
    if grid.axis2 is None:
        raise ValueError("convexity_check needs a 2D scan")
    v = grid.values
    if v.shape[0] < 3 or v.shape[1] < 3:
        raise ValueError("grid too small: need at least 3 points per axis")
    h1 = np.diff(grid.axis1).mean()
    h2 = np.diff(grid.axis2).mean()
    vs = v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]
    vl = v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]
    vsl = (v[2:, 2:] - v[2:, :-2] - v[:-2, 2:] + v[:-2, :-2]) / 4.0
    hss = vs / h1**2
    hll = vl / h2**2
    hsl = vsl / (h1 * h2)
    # 2x2 symmetric PD iff trace > 0 and det > 0
    det = hss * hll - hsl**2
    pd = (hss + hll > 0) & (det > 0)
    pd_fraction = float(np.mean(pd))

    i0, j0 = np.unravel_index(np.argmin(v), v.shape)
    monotone = True
    row = v[i0, :]
    col = v[:, j0]
    for arr, k0 in ((row, j0), (col, i0)):
        left = arr[:k0 + 1]
        right = arr[k0:]
        if np.any(np.diff(left) > 0) or np.any(np.diff(right) < 0):
            monotone = False
    return {"pd_fraction": pd_fraction, "monotone_to_min": monotone}


def monotone_slices(grid: ScanGrid, axis: int = 0):
    """Per-slice monotonicity toward each slice's own minimum (True = clean)."""
    v = grid.values if grid.values.ndim == 2 else grid.values[:, None]
    if axis == 1:
        v = v.T
    flags = []
    for j in range(v.shape[1]):
        arr = v[:, j]
        k0 = int(np.argmin(arr))
        ok = not (np.any(np.diff(arr[:k0 + 1]) > 0) or np.any(np.diff(arr[k0:]) < 0))
        flags.append(ok)
    return flags


def huber_scan(f: Trace, s_values, c_values, curvature_frac: float = 0.02):
    """W2^2 of a density against its shift, for several linear constants c.

    f is taken as a nonnegative density; for each c the density is
    (f + c)/(1 + c L) with L the window length.  Returns per-c curves and a
    crossover estimate: the largest shift at which the curve still carries
    quadratic curvature (|second difference| above curvature_frac of its
    maximum).  Beyond the crossover the growth is linear and the second
    difference collapses.
    """
    if np.any(f.samples < 0):
        raise ValueError("huber_scan expects a nonnegative density signal")
    s_values = np.asarray(s_values, dtype=np.float64)
    t = f.times
    L = (f.nt - 1) * f.dt
    # the crossover law 1/c + |supp f| is stated for unit-mass f
    fsamp = f.samples / (f.samples.sum() * f.dt)
    spline = CubicSpline(t, fsamp, bc_type="natural", extrapolate=False)
    curves = {}
    crossovers = {}
    for c in c_values:
        vals = np.empty(s_values.size)
        base = fsamp + c
        gd = base / (base.sum() * f.dt)
        gden = _as_density(gd, f.dt, f.t0)
        for i, s in enumerate(s_values):
            shifted = np.nan_to_num(spline(t - s), nan=0.0) + c
            fd = shifted / (shifted.sum() * f.dt)
            vals[i] = w2_squared(_as_density(fd, f.dt, f.t0), gden)
        curves[c] = vals
        d2 = np.abs(np.diff(vals, 2))
        if d2.size and d2.max() > 0:
            mask = d2 > curvature_frac * d2.max()
            last = np.max(np.nonzero(mask)[0]) + 1
            crossovers[c] = float(s_values[last])
        else:
            crossovers[c] = float("nan")
    return {"s_values": s_values, "curves": curves, "crossover": crossovers}


def _as_density(vals, dt, t0):
    from .transport import NormalizedDensity

    vals = vals / (vals.sum() * dt)
    return NormalizedDensity(vals, dt, t0=t0)


def noise_scan(g: Trace, eta_values, N_values, trials: int = 20, seed=0):
    """Mean W2^2 and ||f-g||^2 under mean-zero piecewise-constant noise.

    The noise for every interval count N within one trial is derived from a
    single white-noise path (block sums rescaled to keep the per-interval
    variance at eta), so the 1/N transport scaling is measured on coupled
    realizations rather than independent ones.
    """
    rng = np.random.default_rng(seed)
    gd = np.clip(g.samples, 0.0, None)
    gd = gd / (gd.sum() * g.dt)
    gden = _as_density(gd, g.dt, g.t0)
    t = np.arange(g.nt) * g.dt
    L = (g.nt - 1) * g.dt
    N_values = [int(N) for N in N_values]
    Nmax = max(N_values)
    mean_w2 = {}
    mean_l2 = {}
    samples_w2 = {(eta, N): [] for eta in eta_values for N in N_values}
    samples_l2 = {(eta, N): [] for eta in eta_values for N in N_values}
    for _ in range(trials):
        base = rng.normal(size=Nmax)
        for eta in eta_values:
            for N in N_values:
                if Nmax % N == 0:
                    k = Nmax // N
                    vals = base.reshape(N, k).sum(axis=1) / np.sqrt(k)
                else:
                    vals = rng.normal(size=N)
                vals = vals * np.sqrt(eta)
                vals = vals - vals.mean()
                idx = np.minimum((t / L * N).astype(int), N - 1)
                delta = vals[idx]
                fvals = np.clip(gd + delta, 0.0, None)
                fden = _as_density(fvals, g.dt, g.t0)
                samples_w2[(eta, N)].append(w2_squared(fden, gden))
                samples_l2[(eta, N)].append(float(np.sum((fvals - gd) ** 2) * g.dt))
    for key in samples_w2:
        mean_w2[key] = float(np.mean(samples_w2[key]))
        mean_l2[key] = float(np.mean(samples_l2[key]))
    # regression through the origin of mean W2^2 on eta/N and mean L2^2 on eta
    xw = np.array([eta / N for eta in eta_values for N in N_values])
    yw = np.array([mean_w2[(eta, N)] for eta in eta_values for N in N_values])
    xl = np.array([eta for eta in eta_values for N in N_values])
    yl = np.array([mean_l2[(eta, N)] for eta in eta_values for N in N_values])
    slope_w2 = float(np.dot(xw, yw) / np.dot(xw, xw))
    slope_l2 = float(np.dot(xl, yl) / np.dot(xl, xl))
    return {
        "mean_w2": mean_w2,
        "mean_l2": mean_l2,
        "slope_w2_vs_eta_over_N": slope_w2,
        "slope_l2_vs_eta": slope_l2,
    }


def residual_spectrum(residual: ShotGather, window: str = "hann"):
    """Receiver-averaged magnitude spectrum of a residual gather.

    Returns (freqs_hz, mean |DFT|).  window='hann' applies a Hann taper per
    trace (the plotting convention); window='none' keeps the raw samples so
    Parseval's identity against the time-domain energy is exact.
    """
    data = residual.data
    nt = residual.nt
    if window == "hann":
        data = data * np.hanning(nt)[None, :]
    elif window != "none":
        raise ValueError(f"unknown window {window!r}")
    spec = np.abs(np.fft.rfft(data, axis=1))
    freqs = np.fft.rfftfreq(nt, d=residual.dt)
    return freqs, spec.mean(axis=0)


def bandpass_split(model: VelocityModel, k_cut: int):
    """Split squared slowness into low/high wavenumber parts (max-norm cutoff).

    Returns (low, high) as arrays on the model grid with low + high == m
    exactly; the high part is a zero-mean fluctuation field, so the parts
    are returned as bare arrays rather than velocity models.
    """
    m = model.m
    nx, nz = m.shape
    kx = np.abs(np.fft.fftfreq(nx, d=1.0 / nx))
    kz = np.abs(np.fft.fftfreq(nz, d=1.0 / nz))
    mask = (np.maximum(kx[:, None], kz[None, :]) <= k_cut)
    M = np.fft.fft2(m)
    low = np.real(np.fft.ifft2(M * mask))
    high = m - low
    return low, high
