"""Desk-scale experiment presets shared by the CLI, tests, and demos.

Two reference experiments:

* ``layered`` — a two-layer model (2 km/s over 4 km/s) observed with surface
  reflections only; reconstructing velocity below the reflecting interface
  separates transport-based misfits from plain least squares.
* ``camembert`` — a circular high-velocity anomaly crossed by transmitted
  waves; the classic cycle-skipping benchmark.

Each ``*_setup`` function returns a dict with every object needed to generate
observed data and run the inversion, so all entry points agree on geometry
and solver settings.
"""

from __future__ import annotations

import numpy as np

from .gridcore import Acquisition, Grid2D, ricker
from .misfit import MisfitKind, evaluate
from .models import camembert, constant, layered
from .optimizer import LbfgsOptions, minimize
from .transport import NormalizationScheme
from .wavesim import SimConfig, simulate_forward_multi


def layered_setup():
    grid = Grid2D(101, 101, 15.0, 15.0)
    dt, nt = 1.8e-3, 1001
    sim = SimConfig(dt=dt, nt=nt, stencil_order=2,
                    history_dtype=np.float32, field_dtype=np.float32,
                    top_boundary="absorbing")
    acq = Acquisition(
        sources=tuple((x, 0.0) for x in np.linspace(75.0, 1425.0, 5)),
        receivers=tuple((x, 0.0) for x in np.linspace(0.0, 1500.0, 101)),
        record_time=(nt - 1) * dt, dt_record=dt,
    )
    return {
        "grid": grid,
        "m_true": layered(grid, v1=2000.0, v2=4000.0, z_interface=1000.0),
        "m_init": constant(grid, 2000.0),
        "acq": acq,
        "src": ricker(5.0, 0.3, nt, dt),
        "sim": sim,
        "opts": LbfgsOptions(max_iters=100, v_clip=(1600.0, 5000.0)),
        "mask_source_radius": 2,
        "grad_smooth_sigma": 2.0,
    }


def camembert_setup():
    grid = Grid2D(151, 121, 20.0, 20.0)
    dt, nt = 2.0e-3, 501
    sim = SimConfig(dt=dt, nt=nt, stencil_order=4,
                    history_dtype=np.float32, field_dtype=np.float32,
                    top_boundary="absorbing")
    acq = Acquisition(
        sources=tuple((x, 0.0) for x in np.linspace(150.0, 2850.0, 7)),
        receivers=tuple((x, 2400.0) for x in np.linspace(0.0, 3000.0, 101)),
        record_time=(nt - 1) * dt, dt_record=dt,
    )
    return {
        "grid": grid,
        "m_true": camembert(grid, v_bg=4000.0, v_anom=4600.0,
                            center=(1500.0, 1200.0), radius=600.0),
        "m_init": constant(grid, 4000.0),
        "acq": acq,
        "src": ricker(20.0, 0.08, nt, dt),
        "sim": sim,
        "opts": LbfgsOptions(max_iters=60, v_clip=(3500.0, 5100.0)),
        "mask_source_radius": 2,
    }


def observed_data(setup):
    """Forward-model the true model over all shots."""
    idx = list(range(setup["acq"].n_sources))
    gathers, _ = simulate_forward_multi(
        setup["m_true"], setup["acq"], setup["src"], idx, setup["sim"])
    return gathers


def misfit_kind(name, observed):
    """Build the MisfitKind for a preset run.

    ``name`` is one of L2, W2_linear, W2_softplus, W2_square; data-dependent
    hyperparameters follow the usual convention: the linear constant c and
    the softplus slope b are set from the sup norm of the observed data.
    """
    amax = max(float(np.abs(g.data).max()) for g in observed)
    if name == "L2":
        return MisfitKind("L2")
    if name == "W2_linear":
        return MisfitKind("W2_trace", NormalizationScheme("linear", b=0.0, c=amax))
    if name == "W2_softplus":
        return MisfitKind("W2_trace",
                          NormalizationScheme("softplus", b=0.2 / amax, c=0.0))
    if name == "W2_square":
        return MisfitKind("W2_trace", NormalizationScheme("square", c=0.0))
    raise ValueError(f"unknown misfit preset {name!r}")


def run_inversion(setup, kind, observed, max_iters=None, trace_csv=None,
                  callback=None):
    """Run the preset inversion; returns (final model, InversionTrace)."""
    opts = setup["opts"]
    if max_iters is not None:
        import dataclasses
        opts = dataclasses.replace(opts, max_iters=max_iters)

    sigma = setup.get("grad_smooth_sigma", 0.0)

    def objective(model):
        ev = evaluate(model, observed, setup["acq"], setup["src"],
                      setup["sim"], kind,
                      mask_source_radius=setup["mask_source_radius"])
        g = ev.gradient.values
        if sigma > 0.0:
            # Gaussian smoothing is a symmetric positive-definite
            # preconditioner: it suppresses the high-wavenumber migration
            # artifacts that surface acquisition concentrates near the
            # reflectors while keeping descent directions descent.
            from scipy.ndimage import gaussian_filter
            g = gaussian_filter(g, sigma=sigma, mode="nearest")
        return ev.J, g

    return minimize(objective, setup["m_init"], opts, truth=setup["m_true"],
                    trace_csv=trace_csv, callback=callback)
