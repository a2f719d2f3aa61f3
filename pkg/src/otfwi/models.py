"""Built-in velocity model generators for the experiment drivers."""

from __future__ import annotations

import numpy as np

from .gridcore import Grid2D, VelocityModel

__all__ = ["layered", "camembert", "constant", "builtin_models"]


def constant(grid: Grid2D, v: float = 2000.0) -> VelocityModel:
    """Uniform medium."""
    return VelocityModel.from_velocity(grid, float(v))


def layered(grid: Grid2D, v1: float = 2000.0, v2: float = 4000.0,
            z_interface: float = 1000.0) -> VelocityModel:
    """Two homogeneous layers, v1 above the interface depth, v2 below."""
    z = np.arange(grid.nz) * grid.dz
    v = np.where(z[None, :] < z_interface, v1, v2)
    return VelocityModel.from_velocity(grid, np.broadcast_to(v, grid.shape).copy())


def camembert(grid: Grid2D, v_bg: float = 4000.0, v_anom: float = 4600.0,
              center=None, radius: float = None) -> VelocityModel:
    """Circular anomaly of speed v_anom in a v_bg background."""
    w, d = grid.extent
    cx, cz = center if center is not None else (w / 2.0, d / 2.0)
    r = radius if radius is not None else 0.25 * min(w, d)
    x = np.arange(grid.nx) * grid.dx
    z = np.arange(grid.nz) * grid.dz
    dist2 = (x[:, None] - cx) ** 2 + (z[None, :] - cz) ** 2
    v = np.where(dist2 <= r**2, v_anom, v_bg)
    return VelocityModel.from_velocity(grid, v)


_GENERATORS = {"layered": layered, "camembert": camembert, "constant": constant}


def builtin_models(name: str, grid: Grid2D, **params) -> VelocityModel:
    if name not in _GENERATORS:
        raise ValueError(f"unknown model generator {name!r}; have {sorted(_GENERATORS)}")
    return _GENERATORS[name](grid, **params)
