"""Full-waveform inversion with optimal-transport misfits.

Submodules:

* :mod:`otfwi.gridcore` — grids, models, wavelets, acquisition, traces.
* :mod:`otfwi.wavesim` — finite-difference wave propagation and adjoints.
* :mod:`otfwi.transport` — 1D optimal transport, normalizations, adjoint sources.
* :mod:`otfwi.misfit` — the multi-shot objective and its gradient.
* :mod:`otfwi.optimizer` — L-BFGS with a Wolfe line search.
* :mod:`otfwi.landscape` — diagnostic scans and convexity checks.
* :mod:`otfwi.models` — built-in velocity model generators.
* :mod:`otfwi.io` — binary/CSV/PGM file formats.
* :mod:`otfwi.cli` — the ``otfwi`` command line.
"""

from .gridcore import (Acquisition, Grid2D, ShotGather, Trace, VelocityModel,
                       Wavelet, model_error, ricker)
from .misfit import Evaluation, MisfitKind, assemble_adjoint_sources, evaluate
from .optimizer import InversionTrace, LbfgsOptions, minimize
from .transport import (NormalizationScheme, NormalizedDensity, TransportPlan1D,
                        l2_trace, normalize, optimal_map, w2_frechet, w2_squared,
                        w_sigma)
from .wavesim import (GradientField, InstabilityError, SimConfig,
                      WavefieldHistory, check_cfl, compute_gradient,
                      simulate_adjoint, simulate_forward)

__version__ = "0.1.0"
