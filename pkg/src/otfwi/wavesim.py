"""Finite-difference acoustic wave propagation and its discrete adjoint.

The scheme is explicit leapfrog in time with a centered 2nd- or 4th-order
Laplacian in space, assembled once as a sparse CSR matrix.  The user grid is
padded internally by an absorbing sponge (left/right/bottom); the top edge is
a free surface (Neumann via mirror ghosts).  Receivers and sources live on
the user grid.

With C = diag(dt^2/m) and D = diag(sponge damping) one time step reads

    u[n+1] = D (2 I + C L) u[n] - D^2 u[n-1] + D C s[n]

and the adjoint recurrence is the exact transpose,

    lam[n] = (2 I + L^T C) D lam[n+1] - D^2 lam[n+2] + r[n],

run backward from zero final conditions.  Because the backward pass uses the
literal transpose of the forward matrices, the discrete dot-product identity
holds to roundoff, and the returned adjoint field is scaled so that
compute_gradient's time correlation is the exact gradient of the discrete
objective at interior cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .gridcore import Acquisition, Grid2D, ShotGather, VelocityModel, Wavelet

__all__ = [
    "SimConfig",
    "WavefieldHistory",
    "GradientField",
    "InstabilityError",
    "check_cfl",
    "simulate_forward",
    "simulate_forward_multi",
    "simulate_adjoint",
    "simulate_adjoint_multi",
    "compute_gradient",
]


class InstabilityError(RuntimeError):
    """The simulated field went non-finite (CFL violation or bad model)."""


@dataclass(frozen=True)
class SimConfig:
    dt: float
    nt: int
    stencil_order: int = 4
    sponge_width: int = 30
    sponge_strength: float = 0.0045
    top_boundary: str = "free"  # 'free' (Neumann surface) or 'absorbing'
    store_stride: int = 1
    history_dtype: type = np.float64
    field_dtype: type = np.float64
    check_every: int = 50

    def __post_init__(self):
        if self.dt <= 0 or self.nt < 2:
            raise ValueError("need dt > 0 and nt >= 2")
        if self.stencil_order not in (2, 4):
            raise ValueError("stencil_order must be 2 or 4")
        if self.sponge_width < 1 or self.store_stride < 1:
            raise ValueError("sponge_width and store_stride must be >= 1")
        if self.top_boundary not in ("free", "absorbing"):
            raise ValueError("top_boundary must be 'free' or 'absorbing'")


@dataclass(frozen=True)
class WavefieldHistory:
    """Snapshots of the field on the user grid, shape (nt_stored, nx, nz)."""

    snapshots: np.ndarray
    dt: float
    store_stride: int = 1

    @property
    def nt_stored(self):
        return self.snapshots.shape[0]


@dataclass(frozen=True)
class GradientField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "values", v)
        if v.shape != self.grid.shape:
            raise ValueError("gradient shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite gradient")


def _cfl_limit(order):
    # leapfrog stability bound on v*dt*sqrt(1/dx^2 + 1/dz^2)
    return 1.0 if order == 2 else np.sqrt(3.0) / 2.0


def check_cfl(model: VelocityModel, cfg: SimConfig, peak_freq: float | None = None):
    """Report CFL number, max stable dt, and points per minimum wavelength."""
    g = model.grid
    v_max = float(model.velocity.max())
    v_min = float(model.velocity.min())
    root = np.sqrt(1.0 / g.dx**2 + 1.0 / g.dz**2)
    cfl = v_max * cfg.dt * root
    # run at no more than 90% of the theoretical leapfrog bound
    limit = 0.9 * _cfl_limit(cfg.stencil_order)
    report = {
        "cfl_number": cfl,
        "cfl_limit": limit,
        "stable": cfl <= limit,
        "max_stable_dt": limit / (v_max * root),
    }
    if peak_freq:
        ppw = v_min / (peak_freq * max(g.dx, g.dz))
        report["points_per_wavelength"] = ppw
        report["dispersion_warning"] = ppw < 5
    return report


_LAPLACIAN_CACHE: dict = {}


def _laplacian(nxp, nzp, dx, dz, order):
    """Sparse CSR Laplacian with mirror (Neumann) ghosts on all padded edges."""
    key = (nxp, nzp, dx, dz, order)
    if key in _LAPLACIAN_CACHE:
        return _LAPLACIAN_CACHE[key]
    if order == 2:
        offs = {0: -2.0, 1: 1.0, -1: 1.0}
    else:
        offs = {0: -2.5, 1: 4.0 / 3.0, -1: 4.0 / 3.0, 2: -1.0 / 12.0, -2: -1.0 / 12.0}
    n = nxp * nzp
    IX, IZ = np.meshgrid(np.arange(nxp), np.arange(nzp), indexing="ij")
    row = (IX * nzp + IZ).ravel()

    def mirror(j, nn):
        j = np.abs(j)
        return np.where(j >= nn, 2 * (nn - 1) - j, j)

    rows, cols, vals = [], [], []
    for o, w in offs.items():
        jx = mirror(IX + o, nxp)
        rows.append(row)
        cols.append((jx * nzp + IZ).ravel())
        vals.append(np.full(n, w / dx**2))
        jz = mirror(IZ + o, nzp)
        rows.append(row)
        cols.append((IX * nzp + jz).ravel())
        vals.append(np.full(n, w / dz**2))
    L = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    _LAPLACIAN_CACHE[key] = L
    return L


def _sponge_profile(cfg: SimConfig, nxp, nzp, nx, nz, w, zoff):
    """Per-cell damping multiplier: 1 in the user region, decaying in the pad.

    Pad sits on the left/right/bottom, plus the top when the top boundary is
    absorbing (zoff = sponge width); with a free surface zoff = 0 and the
    top row stays undamped.
    """
    depth_x = np.zeros(nxp)
    depth_x[:w] = np.arange(w, 0, -1)
    depth_x[w + nx:] = np.arange(1, nxp - nx - w + 1)
    depth_z = np.zeros(nzp)
    if zoff:
        depth_z[:zoff] = np.arange(zoff, 0, -1)
    depth_z[zoff + nz:] = np.arange(1, nzp - nz - zoff + 1)
    depth = np.maximum(depth_x[:, None], depth_z[None, :])
    return np.exp(-((cfg.sponge_strength * depth) ** 2)).ravel()


class _Propagator:
    """Shared machinery for forward and adjoint runs on the padded grid."""

    def __init__(self, model: VelocityModel, cfg: SimConfig):
        g = model.grid
        self.model = model
        self.cfg = cfg
        w = cfg.sponge_width
        self.w = w
        self.zoff = w if cfg.top_boundary == "absorbing" else 0
        self.nxp = g.nx + 2 * w
        self.nzp = g.nz + w + self.zoff
        rep = check_cfl(model, cfg)
        if not rep["stable"]:
            raise InstabilityError(
                f"CFL {rep['cfl_number']:.3f} exceeds limit {rep['cfl_limit']:.3f}"
            )
        # replicate edge m into the pad
        zo = self.zoff
        mpad = np.empty((self.nxp, self.nzp))
        mpad[w:w + g.nx, zo:zo + g.nz] = model.m
        mpad[:w, zo:zo + g.nz] = model.m[0]
        mpad[w + g.nx:, zo:zo + g.nz] = model.m[-1]
        if zo:
            mpad[:, :zo] = mpad[:, zo][:, None]
        mpad[:, zo + g.nz:] = mpad[:, zo + g.nz - 1][:, None]
        self.mpad = mpad.ravel()
        ft = cfg.field_dtype
        self.C = (cfg.dt**2 / self.mpad).astype(ft)
        self.D = _sponge_profile(cfg, self.nxp, self.nzp, g.nx, g.nz, w, zo).astype(ft)
        self.L = _laplacian(self.nxp, self.nzp, g.dx, g.dz, cfg.stencil_order).astype(ft)
        self.Lt = self.L.T.tocsr()
        # One fused matrix per substep: u_next = A u - D^2 u_prev + DC s; the
        # adjoint recurrence matrix (2I + Lt C) D is exactly A^T.
        n = self.nxp * self.nzp
        eye = sp.identity(n, format="csr", dtype=ft)
        self.A = (sp.diags(self.D) @ (2.0 * eye + sp.diags(self.C) @ self.L)).tocsr()
        self.At = self.A.T.tocsr()
        self.D2 = (self.D * self.D).astype(ft)
        self.DC = (self.D * self.C).astype(ft)

    def flat_index(self, x, z):
        g = self.model.grid
        ix, iz = g.nearest_node(x, z)
        return (ix + self.w) * self.nzp + iz + self.zoff

    def crop(self, u):
        g = self.model.grid
        zo = self.zoff
        return u.reshape(self.nxp, self.nzp)[self.w:self.w + g.nx, zo:zo + g.nz]

    def _check(self, u, n):
        if not np.all(np.isfinite(u)):
            raise InstabilityError(f"non-finite field at step {n}")

    def run_forward(self, src_flat_idx, src_samples, rec_flat_idx, rec_stride):
        """Batched leapfrog over nshot independent sources.

        src_samples: (nt, nshot) source amplitudes already scaled per cell.
        Returns (gathers (nshot, nrec, nt_rec), history (nt, nshot, nx, nz)).
        """
        cfg = self.cfg
        n = self.nxp * self.nzp
        nshot = len(src_flat_idx)
        nt = cfg.nt
        ft = cfg.field_dtype
        u_prev = np.zeros((n, nshot), dtype=ft)
        u = np.zeros((n, nshot), dtype=ft)
        nt_rec = (nt - 1) // rec_stride + 1
        gath = np.zeros((nshot, len(rec_flat_idx), nt_rec))
        nstore = (nt - 1) // cfg.store_stride + 1
        g = self.model.grid
        hist = np.zeros((nstore, nshot, g.nx, g.nz), dtype=cfg.history_dtype)
        tmp = np.empty((n, nshot), dtype=ft)
        src_idx = np.asarray(src_flat_idx)
        shot_ix = np.arange(nshot)
        xs = slice(self.w, self.w + g.nx)
        zs = slice(self.zoff, self.zoff + g.nz)
        for step in range(nt):
            if step > 0:
                u_next = self.A @ u
                np.multiply(u_prev, self.D2[:, None], out=tmp)
                u_next -= tmp
                u_next[src_idx, shot_ix] += self.DC[src_idx] * src_samples[step - 1]
                u_prev, u = u, u_next
            if step % cfg.check_every == 0:
                self._check(u, step)
            if step % rec_stride == 0:
                gath[:, :, step // rec_stride] = u[rec_flat_idx].T
            if step % cfg.store_stride == 0:
                hist[step // cfg.store_stride] = (
                    u.reshape(self.nxp, self.nzp, nshot)[xs, zs].transpose(2, 0, 1)
                )
        self._check(u, nt - 1)
        return gath, hist

    def run_adjoint(self, rec_flat_idx, residuals, rec_stride):
        """Backward transpose recurrence.

        residuals: (nshot, nrec, nt_rec) values of dJ/du at receiver cells.
        Returns the adjoint history w with w[k] = lam[k+1] * dt / m on the
        user grid, so that -sum_k u_tt[k] * w[k] * dt is the exact discrete
        gradient (u_tt the centered second difference of the forward history).
        """
        cfg = self.cfg
        n = self.nxp * self.nzp
        nshot = residuals.shape[0]
        nt = cfg.nt
        ft = cfg.field_dtype
        lam_next = np.zeros((n, nshot), dtype=ft)   # lam[k+1]
        lam_next2 = np.zeros((n, nshot), dtype=ft)
        nstore = (nt - 1) // cfg.store_stride + 1
        g = self.model.grid
        hist = np.zeros((nstore, nshot, g.nx, g.nz), dtype=cfg.history_dtype)
        scale = (cfg.dt / self.mpad)[:, None].astype(ft)
        tmp = np.empty((n, nshot), dtype=ft)
        xs = slice(self.w, self.w + g.nx)
        zs = slice(self.zoff, self.zoff + g.nz)
        for k in range(nt - 1, -1, -1):
            lam = self.At @ lam_next
            np.multiply(lam_next2, self.D2[:, None], out=tmp)
            lam -= tmp
            if k % rec_stride == 0:
                kr = k // rec_stride
                lam[rec_flat_idx] += residuals[:, :, kr].T
            if k % cfg.check_every == 0:
                self._check(lam, k)
            if k % cfg.store_stride == 0:
                w = scale * lam_next  # lam[(k)+1] before the shift below
                hist[k // cfg.store_stride] = (
                    w.reshape(self.nxp, self.nzp, nshot)[xs, zs].transpose(2, 0, 1)
                )
            lam_next2 = lam_next
            lam_next = lam
        return hist, lam_next

    def source_scale(self):
        """Point-source amplitude per cell for a delta at a grid node."""
        g = self.model.grid
        return 1.0 / (g.dx * g.dz)


def _rec_stride(acq: Acquisition, cfg: SimConfig):
    ratio = acq.dt_record / cfg.dt
    stride = int(round(ratio))
    if abs(ratio - stride) > 1e-9 or stride < 1:
        raise ValueError("dt_record must be an integer multiple of the simulation dt")
    return stride


def simulate_forward_multi(model, acq, src: Wavelet, source_indices, cfg):
    """Run several shots in one batched propagation.

    Returns (list of ShotGather, list of WavefieldHistory), one per source.
    """
    acq.validate_against(model.grid)
    prop = _Propagator(model, cfg)
    stride = _rec_stride(acq, cfg)
    src_idx = [prop.flat_index(*acq.sources[i]) for i in source_indices]
    rec_idx = np.array([prop.flat_index(*r) for r in acq.receivers])
    wav = np.zeros(cfg.nt)
    nw = min(src.nt, cfg.nt)
    wav[:nw] = src.samples[:nw]
    amp = prop.source_scale()
    samples = np.repeat(wav[:, None] * amp, len(src_idx), axis=1)
    gath, hist = prop.run_forward(src_idx, samples, rec_idx, stride)
    gathers = [ShotGather(gath[k], acq.dt_record, source_index=i)
               for k, i in enumerate(source_indices)]
    hists = [WavefieldHistory(hist[:, k], cfg.dt, cfg.store_stride)
             for k in range(len(src_idx))]
    return gathers, hists


def simulate_forward(model, acq, src: Wavelet, source_index: int, cfg):
    gathers, hists = simulate_forward_multi(model, acq, src, [source_index], cfg)
    return gathers[0], hists[0]


def simulate_adjoint_multi(model, adjoint_gathers, acq, cfg):
    """Backpropagate receiver residuals for several shots at once."""
    acq.validate_against(model.grid)
    prop = _Propagator(model, cfg)
    stride = _rec_stride(acq, cfg)
    rec_idx = np.array([prop.flat_index(*r) for r in acq.receivers])
    res = np.stack([g.data for g in adjoint_gathers])
    nt_rec = (cfg.nt - 1) // stride + 1
    if res.shape[2] != nt_rec:
        raise ValueError("adjoint gather length does not match the simulation clock")
    hist, _ = prop.run_adjoint(rec_idx, res, stride)
    return [WavefieldHistory(hist[:, k], cfg.dt, cfg.store_stride)
            for k in range(res.shape[0])]


def simulate_adjoint(model, adjoint_gather: ShotGather, acq, cfg):
    return simulate_adjoint_multi(model, [adjoint_gather], acq, cfg)[0]


def compute_gradient(model, fwd: WavefieldHistory, adj: WavefieldHistory, cfg):
    """Adjoint-state gradient: -sum_t d2u/dt2 (x,t) w(x,t) dt per cell.

    d2u/dt2 is the centered second difference of the stored forward
    snapshots; the initial snapshot uses the zero initial condition as its
    left neighbor.
    """
    if fwd.store_stride != adj.store_stride:
        raise ValueError("store strides differ")
    if fwd.snapshots.shape != adj.snapshots.shape:
        raise ValueError("history shapes differ")
    u = fwd.snapshots
    dt_store = fwd.dt * fwd.store_stride
    utt = np.zeros_like(u)
    utt[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dt_store**2
    # zero initial conditions supply the missing left neighbor at k = 0
    utt[0] = (u[1] - 2.0 * u[0]) / dt_store**2
    utt[-1] = (-2.0 * u[-1] + u[-2]) / dt_store**2
    w = adj.snapshots
    vals = -np.einsum("tij,tij->ij", utt, w, dtype=np.float64) * dt_store
    return GradientField(model.grid, vals)
