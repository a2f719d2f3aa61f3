"""Core domain types: grids, velocity models, wavelets, acquisition, traces.

Everything here is an immutable value object.  The optimization variable
throughout the package is the squared slowness m = 1/v**2; velocity is a
derived view (``VelocityModel.velocity``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid2D",
    "VelocityModel",
    "Wavelet",
    "Acquisition",
    "Trace",
    "ShotGather",
    "ricker",
    "model_error",
]


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectilinear 2D grid; x is horizontal, z is depth (down)."""

    nx: int
    nz: int
    dx: float
    dz: float

    def __post_init__(self):
        if self.nx < 3 or self.nz < 3:
            raise ValueError("grid needs nx >= 3 and nz >= 3")
        if self.dx <= 0 or self.dz <= 0:
            raise ValueError("grid spacing must be positive")

    @property
    def shape(self):
        return (self.nx, self.nz)

    @property
    def extent(self):
        """Physical size (width, depth) in meters."""
        return ((self.nx - 1) * self.dx, (self.nz - 1) * self.dz)

    def nearest_node(self, x, z):
        """Snap a physical position (m) to the nearest (ix, iz) node."""
        ix = int(round(x / self.dx))
        iz = int(round(z / self.dz))
        if not (0 <= ix < self.nx and 0 <= iz < self.nz):
            raise ValueError(f"position ({x}, {z}) outside grid")
        return ix, iz


@dataclass(frozen=True)
class VelocityModel:
    """Squared-slowness model m = 1/v**2 on a Grid2D.

    m has shape (nx, nz).  Values must be strictly positive; the
    corresponding velocity must lie in the physical band [v_min, v_max].
    """

    grid: Grid2D
    m: np.ndarray
    v_min: float = 100.0
    v_max: float = 10000.0

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.m, dtype=np.float64))
        object.__setattr__(self, "m", m)
        if m.shape != self.grid.shape:
            raise ValueError(f"m shape {m.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ValueError("squared slowness must be finite and strictly positive")

    @classmethod
    def from_velocity(cls, grid, v, **kw):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim == 0:
            v = np.full(grid.shape, float(v))
        return cls(grid, 1.0 / v**2, **kw)

    @property
    def velocity(self):
        return 1.0 / np.sqrt(self.m)

    def clipped(self):
        """Return a copy with velocity clipped to [v_min, v_max]."""
        v = np.clip(self.velocity, self.v_min, self.v_max)
        return VelocityModel(self.grid, 1.0 / v**2, self.v_min, self.v_max)

    def with_m(self, m):
        return VelocityModel(self.grid, m, self.v_min, self.v_max)


@dataclass(frozen=True)
class Wavelet:
    """Sampled source wavelet on a regular time axis starting at t = 0."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0
    peak_freq: float = 0.0

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("wavelet needs at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("wavelet samples must be finite")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.peak_freq > 0:
            covered = (s.size - 1) * self.dt - self.t0
            if covered < 2.0 / self.peak_freq - 1e-12:
                raise ValueError(
                    "time axis must cover at least 2/peak_freq past t0 so the "
                    "wavelet is fully represented")

    @property
    def nt(self):
        return self.samples.size

    @property
    def times(self):
        return np.arange(self.nt) * self.dt


@dataclass(frozen=True)
class Acquisition:
    """Source and receiver layout plus the recording clock."""

    sources: tuple
    receivers: tuple
    record_time: float
    dt_record: float

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple((float(x), float(z)) for x, z in self.sources))
        object.__setattr__(self, "receivers", tuple((float(x), float(z)) for x, z in self.receivers))
        if self.record_time <= 0 or self.dt_record <= 0:
            raise ValueError("record_time and dt_record must be positive")

    @property
    def n_sources(self):
        return len(self.sources)

    @property
    def n_receivers(self):
        return len(self.receivers)

    @property
    def nt_record(self):
        return int(round(self.record_time / self.dt_record)) + 1

    def validate_against(self, grid: Grid2D):
        w, d = grid.extent
        for x, z in self.sources + self.receivers:
            if not (0 <= x <= w and 0 <= z <= d):
                raise ValueError(f"position ({x}, {z}) outside grid extent {w}x{d}")


@dataclass(frozen=True)
class Trace:
    """Time series at one receiver.

    ``t0`` is the physical time of the first sample, so the time axis is
    t0 + arange(nt)*dt.  Recorded seismic traces start at t0 = 0; scan
    utilities use nonzero origins to represent translated signals.
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.samples, dtype=np.float64))
        object.__setattr__(self, "samples", s)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("trace needs at least 2 samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("trace samples must be finite")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def nt(self):
        return self.samples.size

    @property
    def times(self):
        return self.t0 + np.arange(self.nt) * self.dt


@dataclass(frozen=True)
class ShotGather:
    """All receiver traces for one source firing, as an (nrec, nt) array."""

    data: np.ndarray
    dt: float
    source_index: int = 0

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.data, dtype=np.float64))
        object.__setattr__(self, "data", d)
        if d.ndim != 2:
            raise ValueError("gather data must be 2D (nrec, nt)")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def n_receivers(self):
        return self.data.shape[0]

    @property
    def nt(self):
        return self.data.shape[1]

    def trace(self, i) -> Trace:
        return Trace(self.data[i], self.dt)

    @classmethod
    def from_traces(cls, traces, source_index=0):
        dt = traces[0].dt
        nt = traces[0].nt
        for tr in traces:
            if tr.dt != dt or tr.nt != nt:
                raise ValueError("all traces in a gather must share nt and dt")
        return cls(np.stack([tr.samples for tr in traces]), dt, source_index)


def ricker(peak_freq, t0, nt, dt):
    """Ricker wavelet (1 - 2 pi^2 f^2 tau^2) exp(-pi^2 f^2 tau^2), tau = t - t0.

    Peak amplitude is 1 at t = t0.  Raises ValueError on nonpositive
    peak_freq/dt or nt < 2.
    """
    if peak_freq <= 0:
        raise ValueError("peak_freq must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if nt < 2:
        raise ValueError("nt must be at least 2")
    t = np.arange(nt) * dt
    arg = (np.pi * peak_freq * (t - t0)) ** 2
    samples = (1.0 - 2.0 * arg) * np.exp(-arg)
    return Wavelet(samples, dt, t0=t0, peak_freq=peak_freq)


def model_error(m_iter: VelocityModel, m_true: VelocityModel,
                m_init: VelocityModel | None = None):
    """Frobenius norm ||m_iter - m_true||_F of the squared-slowness misfit.

    With ``m_init`` supplied the result is normalized by
    ||m_init - m_true||_F, so the starting model scores exactly 1.
    """
    if m_iter.grid != m_true.grid:
        raise ValueError("model grids differ")
    err = np.linalg.norm(m_iter.m - m_true.m)
    if m_init is not None:
        if m_init.grid != m_true.grid:
            raise ValueError("model grids differ")
        err /= np.linalg.norm(m_init.m - m_true.m)
    return float(err)
