"""1D optimal transport on traces: normalization, W2 distance, maps, adjoints.

The workhorse objects are probability densities obtained from signed traces
by a positive rescaling sigma plus an additive constant c and exact mass
renormalization.  The W2 distance between two densities on the line reduces
to quantile matching: with CDFs F, G the optimal map is T = Ginv(F) and

    W2^2 = int |t - T(t)|^2 f(t) dt = int_0^1 |Finv(y) - Ginv(y)|^2 dy.

Both forms are implemented; the time-domain form is the default and the
quantile form serves as a cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .gridcore import Trace

__all__ = [
    "NormalizationScheme",
    "NormalizedDensity",
    "TransportPlan1D",
    "normalize",
    "w2_squared",
    "optimal_map",
    "w2_frechet",
    "l2_trace",
    "w_sigma",
]

_KINDS = ("linear", "exponential", "softplus", "square")

# exp(x) overflows around 709; sigma values beyond this are hyperparameter
# errors, and the stable softplus branch switches well before it.
_EXP_CLIP = 30.0


@dataclass(frozen=True)
class NormalizationScheme:
    """Pointwise rescaling sigma plus constant c turning traces into densities.

    kind: 'linear' sigma(x) = x + b; 'exponential' sigma(x) = exp(b x);
    'softplus' sigma(x) = log(exp(b x) + 1); 'square' sigma(x) = x^2
    (non-injective, kept as a negative control only).
    """

    kind: str
    b: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown normalization kind {self.kind!r}")
        if self.kind in ("exponential", "softplus") and self.b <= 0:
            raise ValueError("b must be positive for exponential/softplus")
        if self.c < 0:
            raise ValueError("c must be nonnegative")

    def check_range(self, f):
        """Warn when ||b f||_inf leaves the empirically effective band."""
        if self.kind in ("exponential", "softplus"):
            bf = self.b * float(np.max(np.abs(f)))
            if not 0.2 <= bf <= 6.0:
                warnings.warn(
                    f"||b f||_inf = {bf:.3g} outside the recommended [0.2, 6]",
                    stacklevel=3,
                )
            return bf
        return None

    def sigma(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "linear":
            return x + self.b
        if self.kind == "exponential":
            out = np.exp(self.b * x)
            if not np.all(np.isfinite(out)):
                raise ValueError("exponential normalization overflow; reduce b")
            return out
        if self.kind == "softplus":
            bx = self.b * x
            # log(1+e^t) = t + log(1+e^-t) for large t avoids overflow
            return np.where(bx > _EXP_CLIP, bx, np.log1p(np.exp(np.minimum(bx, _EXP_CLIP))))
        return x**2

    def sigma_prime(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "linear":
            return np.ones_like(x)
        if self.kind == "exponential":
            return self.b * np.exp(self.b * x)
        if self.kind == "softplus":
            bx = self.b * x
            return self.b / (1.0 + np.exp(-np.clip(bx, -_EXP_CLIP, _EXP_CLIP)))
        return 2.0 * x


@dataclass(frozen=True)
class NormalizedDensity:
    """Nonnegative samples with unit mass under the dt quadrature.

    ``scale`` keeps the normalization denominator S = sum(sigma(f)+c)*dt for
    use in the Frechet chain rule.
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        object.__setattr__(self, "samples", s)
        if np.any(s < 0):
            raise ValueError("density samples must be nonnegative")
        mass = s.sum() * self.dt
        if abs(mass - 1.0) > 1e-12:
            raise ValueError(f"density mass {mass} not 1 within 1e-12")

    @property
    def nt(self):
        return self.samples.size

    @property
    def times(self):
        return self.t0 + np.arange(self.nt) * self.dt


@dataclass(frozen=True)
class TransportPlan1D:
    """Discrete CDFs and the sampled optimal map T = Ginv(F)."""

    F: np.ndarray
    G: np.ndarray
    T: np.ndarray
    times_f: np.ndarray
    times_g: np.ndarray


def normalize(f: Trace, scheme: NormalizationScheme) -> NormalizedDensity:
    """Map a signed trace to a probability density via (sigma(f)+c)/S.

    For the linear scheme min(f + b) must be positive; violations raise.
    The output mass is renormalized to exactly 1 under sum(.)*dt.
    """
    x = f.samples
    if scheme.kind == "linear" and np.min(x) + scheme.b + scheme.c <= 0:
        raise ValueError(
            f"linear normalization needs f + b + c > 0 everywhere; got min "
            f"{np.min(x) + scheme.b + scheme.c:.3g}"
        )
    scheme.check_range(x)
    vals = scheme.sigma(x) + scheme.c
    S = vals.sum() * f.dt
    if not np.isfinite(S) or S <= 0:
        raise ValueError("normalization produced a non-positive or non-finite mass")
    d = vals / S
    d = d / (d.sum() * f.dt)
    return NormalizedDensity(d, f.dt, t0=f.t0, scale=float(S))


def _cdf(d: NormalizedDensity):
    F = np.cumsum(d.samples) * d.dt
    return F / F[-1]


def _check_axes(fd: NormalizedDensity, gd: NormalizedDensity):
    """Densities may live on different (shifted/dilated) axes; both CDF-based
    forms below remain well defined.  Only degenerate inputs are rejected."""
    if fd.nt < 2 or gd.nt < 2:
        raise ValueError("densities need at least 2 samples")


def optimal_map(fd: NormalizedDensity, gd: NormalizedDensity) -> TransportPlan1D:
    """Monotone rearrangement T = Ginv(F) by piecewise-linear quantile inversion.

    Flat CDF segments (only possible at c = 0) resolve to the left endpoint
    of the flat interval, which keeps the inversion deterministic.
    """
    _check_axes(fd, gd)
    F = _cdf(fd)
    G = _cdf(gd)
    if np.any(np.diff(F) < 0) or np.any(np.diff(G) < 0):
        raise ValueError("non-monotone CDF: numerical corruption")
    Gu, j = np.unique(G, return_index=True)
    T = np.interp(F, Gu, gd.times[j])
    # interp overflows when adjacent CDF levels differ by a subnormal; the
    # map is confined to g's support, so clamping restores the invariant and
    # the affected quantiles carry only subnormal mass
    np.clip(T, gd.times[0], gd.times[-1], out=T)
    return TransportPlan1D(F, G, T, fd.times, gd.times)


def _quantile_slope(plan: TransportPlan1D):
    """Slope of the piecewise-linear quantile Ginv at each level F_i."""
    Gu, j = np.unique(plan.G, return_index=True)
    tu = plan.times_g[j]
    if Gu.size < 2:
        return np.zeros_like(plan.F)
    k = np.searchsorted(Gu, plan.F, side="right") - 1
    k = np.clip(k, 0, Gu.size - 2)
    slope = (tu[k + 1] - tu[k]) / (Gu[k + 1] - Gu[k])
    return np.where((plan.F <= Gu[0]) | (plan.F >= Gu[-1]), 0.0, slope)


def w2_squared(fd: NormalizedDensity, gd: NormalizedDensity,
               method: str = "time") -> float:
    """Squared 2-Wasserstein distance between two discrete densities.

    method='time' evaluates sum |t - T(t)|^2 f(t) dt on f's axis;
    method='quantile' evaluates the midpoint rule on int_0^1 |Finv - Ginv|^2,
    kept as an independent cross-check of the same quantity.
    """
    _check_axes(fd, gd)
    if method == "time":
        plan = optimal_map(fd, gd)
        return float(np.sum((plan.times_f - plan.T) ** 2 * fd.samples) * fd.dt)
    if method == "quantile":
        F = _cdf(fd)
        G = _cdf(gd)
        y = (np.arange(fd.nt) + 0.5) / fd.nt
        Fu, i = np.unique(F, return_index=True)
        Gu, j = np.unique(G, return_index=True)
        Finv = np.interp(y, Fu, fd.times[i])
        Ginv = np.interp(y, Gu, gd.times[j])
        return float(np.mean((Finv - Ginv) ** 2))
    raise ValueError(f"unknown method {method!r}")


def _frechet_density(plan: TransportPlan1D, fd: NormalizedDensity):
    """Exact gradient of the discrete w2_squared with respect to the density,
    up to an additive constant (annihilated by the outer projection).

    The continuum limit is the Kantorovich-style potential H with
    dH/dt = 2 (t - T(t)); the discrete form carries the quantile-slope
    correction so the finite-difference oracle is matched to roundoff
    rather than O(dt).
    """
    t = plan.times_f
    resid = t - plan.T
    c = 2.0 * resid * _quantile_slope(plan) * fd.samples * fd.dt
    return resid**2 - np.cumsum(c[::-1])[::-1]


def w2_frechet(f: Trace, g: Trace, scheme: NormalizationScheme) -> Trace:
    """Adjoint source dW2^2/df of the normalized W2 trace misfit.

    Chain rule through the normalization: with u the density-space gradient
    and S the normalization denominator,

        output = sigma'(f) * (u - <u, f_norm> ) / S,

    the mean-zero projection coming from differentiating S.  The pairing
    convention is <output, df> = sum(output * df) * dt.
    """
    fd = normalize(f, scheme)
    gd = normalize(g, scheme)
    plan = optimal_map(fd, gd)
    u = _frechet_density(plan, fd)
    proj = np.sum(u * fd.samples) * f.dt
    out = scheme.sigma_prime(f.samples) * (u - proj) / fd.scale
    return Trace(out, f.dt, t0=f.t0)


def l2_trace(f: Trace, g: Trace):
    """Plain least-squares trace misfit 0.5 * sum (f-g)^2 dt and its gradient."""
    if f.nt != g.nt or f.dt != g.dt:
        raise ValueError("traces live on incompatible time axes")
    r = f.samples - g.samples
    misfit = 0.5 * float(np.sum(r**2) * f.dt)
    return misfit, Trace(r, f.dt, t0=f.t0)


def w_sigma(f: Trace, g: Trace, scheme: NormalizationScheme,
            two_sided: bool = False) -> float:
    """The metric W_sigma(f, g) = W2(P_sigma f, P_sigma g) (square root).

    Evaluated in the quantile domain, which is symmetric in (f, g) down to
    the last bit: swapping the arguments only flips the sign inside a square.
    With ``two_sided`` the squared distances of (f, g) and (-f, -g) are
    averaged so neither signal polarity is favored; off by default.
    """
    val = w2_squared(normalize(f, scheme), normalize(g, scheme), method="quantile")
    if two_sided:
        fneg = Trace(-f.samples, f.dt, t0=f.t0)
        gneg = Trace(-g.samples, g.dt, t0=g.t0)
        val = 0.5 * (val + w2_squared(normalize(fneg, scheme),
                                      normalize(gneg, scheme), method="quantile"))
    return float(np.sqrt(max(val, 0.0)))
