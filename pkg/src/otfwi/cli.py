"""Config-driven command line: forward modeling, inversion, landscape scans.

Subcommands::

    otfwi forward   --config cfg.json --out DIR
    otfwi invert    --config cfg.json --data DIR --out DIR
    otfwi landscape --config cfg.json --out DIR
    otfwi w2 FILE_F FILE_G [--scheme KIND --b B --c C ...]

Exit codes: 0 success, 2 config error, 3 numerical instability,
4 optimizer abort, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as otio
from .gridcore import Acquisition, Grid2D, ricker
from .landscape import huber_scan, noise_scan, shift_dilate_scan
from .misfit import MisfitKind, evaluate
from .models import builtin_models
from .optimizer import LbfgsOptions, minimize
from .transport import NormalizationScheme, optimal_map, normalize, w2_frechet, w_sigma
from .wavesim import InstabilityError, SimConfig, simulate_forward_multi

EXIT_CONFIG = 2
EXIT_INSTABILITY = 3
EXIT_OPTIMIZER = 4
EXIT_IO = 5


class ConfigError(ValueError):
    pass


_POS_NUM = {"type": "number", "exclusiveMinimum": 0}
_SCHEME = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["linear", "exponential", "softplus", "square"]},
        "b": {"type": "number"},
        "c": {"type": "number", "minimum": 0},
    },
}
_POSITIONS = {
    "oneOf": [
        {"type": "array",
         "items": {"type": "array", "items": {"type": "number"},
                   "minItems": 2, "maxItems": 2}},
        {"type": "object", "additionalProperties": False,
         "required": ["n", "z"],
         "properties": {"n": {"type": "integer", "minimum": 1},
                        "z": {"type": "number"},
                        "margin": {"type": "number", "minimum": 0}}},
    ]
}
_MODEL_SPEC = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"enum": ["layered", "camembert", "constant"]},
        "params": {"type": "object"},
        "path": {"type": "string"},
    },
}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["grid", "acquisition", "wavelet", "sim"],
    "properties": {
        "grid": {
            "type": "object", "additionalProperties": False,
            "required": ["nx", "nz", "dx", "dz"],
            "properties": {"nx": {"type": "integer", "minimum": 3},
                           "nz": {"type": "integer", "minimum": 3},
                           "dx": _POS_NUM, "dz": _POS_NUM},
        },
        "model": {
            "type": "object", "additionalProperties": False,
            "properties": {"true": _MODEL_SPEC, "initial": _MODEL_SPEC},
        },
        "acquisition": {
            "type": "object", "additionalProperties": False,
            "required": ["sources", "receivers", "record_time", "dt_record"],
            "properties": {"sources": _POSITIONS, "receivers": _POSITIONS,
                           "record_time": _POS_NUM, "dt_record": _POS_NUM},
        },
        "wavelet": {
            "type": "object", "additionalProperties": False,
            "required": ["peak_freq", "t0"],
            "properties": {"peak_freq": _POS_NUM, "t0": {"type": "number"}},
        },
        "sim": {
            "type": "object", "additionalProperties": False,
            "required": ["dt", "nt"],
            "properties": {"dt": _POS_NUM, "nt": {"type": "integer", "minimum": 2},
                           "stencil_order": {"enum": [2, 4]},
                           "sponge_width": {"type": "integer", "minimum": 1},
                           "sponge_strength": _POS_NUM,
                           "top_boundary": {"enum": ["free", "absorbing"]},
                           "history_float32": {"type": "boolean"},
                           "field_float32": {"type": "boolean"}},
        },
        "misfit": {
            "type": "object", "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"enum": ["L2", "W2_trace"]},
                           "scheme": _SCHEME},
        },
        "optimizer": {
            "type": "object", "additionalProperties": False,
            "properties": {"max_iters": {"type": "integer", "minimum": 1},
                           "memory": {"type": "integer", "minimum": 1},
                           "c1": _POS_NUM, "c2": _POS_NUM,
                           "grad_tol": {"type": "number", "minimum": 0},
                           "step_tol": {"type": "number", "minimum": 0},
                           "v_clip": {"type": "array", "items": {"type": "number"},
                                      "minItems": 2, "maxItems": 2},
                           "mask_source_radius": {"type": "integer", "minimum": 0}},
        },
        "landscape": {
            "type": "object", "additionalProperties": False,
            "required": ["scan"],
            "properties": {
                "scan": {"enum": ["shift_dilate", "huber", "noise"]},
                "frame": {"enum": ["eulerian", "lagrangian"]},
                "s_values": {"type": "array", "items": {"type": "number"}},
                "lam_values": {"type": "array", "items": {"type": "number"}},
                "c_values": {"type": "array", "items": {"type": "number"}},
                "eta_values": {"type": "array", "items": {"type": "number"}},
                "N_values": {"type": "array", "items": {"type": "integer"}},
                "trials": {"type": "integer", "minimum": 1},
                "trace_nt": {"type": "integer", "minimum": 2},
                "trace_dt": _POS_NUM,
            },
        },
        "outputs": {
            "type": "object", "additionalProperties": False,
            "properties": {"snapshots_every": {"type": "integer", "minimum": 1}},
        },
        "seed": {"type": "integer"},
    },
}


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    try:
        import jsonschema
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except ImportError:
        pass
    except Exception as e:
        raise ConfigError(f"config rejected by schema: {e.message}") from e
    return cfg


def _positions(spec, grid: Grid2D):
    if isinstance(spec, dict):
        n, z = spec["n"], spec["z"]
        margin = spec.get("margin", 0.0)
        w = grid.extent[0]
        xs = np.linspace(margin, w - margin, n)
        return [(float(x), float(z)) for x in xs]
    return [(float(x), float(z)) for x, z in spec]


def build_setup(cfg):
    """Instantiate grid, models, acquisition, wavelet, sim config, misfit."""
    g = cfg["grid"]
    grid = Grid2D(g["nx"], g["nz"], g["dx"], g["dz"])

    def model_of(spec):
        if spec is None:
            return None
        if "path" in spec:
            return otio.read_model(spec["path"])
        return builtin_models(spec["name"], grid, **spec.get("params", {}))

    msec = cfg.get("model", {})
    m_true = model_of(msec.get("true"))
    m_init = model_of(msec.get("initial"))
    a = cfg["acquisition"]
    acq = Acquisition(
        sources=tuple(_positions(a["sources"], grid)),
        receivers=tuple(_positions(a["receivers"], grid)),
        record_time=a["record_time"], dt_record=a["dt_record"],
    )
    s = cfg["sim"]
    sim = SimConfig(
        dt=s["dt"], nt=s["nt"],
        stencil_order=s.get("stencil_order", 4),
        sponge_width=s.get("sponge_width", 30),
        sponge_strength=s.get("sponge_strength", 0.0045),
        top_boundary=s.get("top_boundary", "free"),
        history_dtype=np.float32 if s.get("history_float32") else np.float64,
        field_dtype=np.float32 if s.get("field_float32") else np.float64,
    )
    w = cfg["wavelet"]
    src = ricker(w["peak_freq"], w["t0"], sim.nt, sim.dt)
    kind = None
    if "misfit" in cfg:
        m = cfg["misfit"]
        scheme = None
        if "scheme" in m:
            sc = m["scheme"]
            scheme = NormalizationScheme(sc["kind"], b=sc.get("b", 1.0), c=sc.get("c", 0.0))
        kind = MisfitKind(m["kind"], scheme)
    return grid, m_true, m_init, acq, src, sim, kind


def cmd_forward(args):
    cfg = load_config(args.config)
    grid, m_true, _, acq, src, sim, _ = build_setup(cfg)
    if m_true is None:
        raise ConfigError("forward modeling needs model.true")
    os.makedirs(args.out, exist_ok=True)
    idx = list(range(acq.n_sources))
    files = []
    for lo in range(0, len(idx), 8):
        chunk = idx[lo:lo + 8]
        gathers, _ = simulate_forward_multi(m_true, acq, src, chunk, sim)
        for g in gathers:
            name = f"shot_{g.source_index:03d}.bin"
            otio.write_gather(os.path.join(args.out, name), g)
            files += [name, name + ".json"]
    otio.write_manifest(args.out, files)
    print(f"wrote {acq.n_sources} gathers to {args.out}")
    return 0


def cmd_invert(args):
    cfg = load_config(args.config)
    grid, m_true, m_init, acq, src, sim, kind = build_setup(cfg)
    if m_init is None or kind is None:
        raise ConfigError("inversion needs model.initial and a misfit section")
    observed = [otio.read_gather(os.path.join(args.data, f"shot_{i:03d}.bin"))
                for i in range(acq.n_sources)]
    opt = cfg.get("optimizer", {})
    opts = LbfgsOptions(
        memory=opt.get("memory", 10),
        max_iters=opt.get("max_iters", 50),
        c1=opt.get("c1", 1e-4), c2=opt.get("c2", 0.9),
        grad_tol=opt.get("grad_tol", 0.0), step_tol=opt.get("step_tol", 0.0),
        v_clip=tuple(opt.get("v_clip", (100.0, 10000.0))),
    )
    mask_r = opt.get("mask_source_radius", 2)
    os.makedirs(args.out, exist_ok=True)

    def objective(model):
        ev = evaluate(model, observed, acq, src, sim, kind,
                      mask_source_radius=mask_r)
        return ev.J, ev.gradient

    every = args.snapshots or cfg.get("outputs", {}).get("snapshots_every", 0)
    files = []

    def snap(it, model, J):
        if every and it % every == 0 and it > 0:
            name = f"model_iter_{it:04d}.bin"
            otio.write_model(os.path.join(args.out, name), model)
            files.append(name)
            files.append(name + ".json")

    trace_csv = os.path.join(args.out, "trace.csv")
    try:
        final, trace = minimize(objective, m_init, opts, truth=m_true,
                                trace_csv=trace_csv, callback=snap)
    except InstabilityError:
        raise
    except Exception as e:
        print(f"optimizer aborted: {e}", file=sys.stderr)
        return EXIT_OPTIMIZER
    otio.write_model(os.path.join(args.out, "final_model.bin"), final)
    files += ["final_model.bin", "final_model.bin.json", "trace.csv"]
    otio.write_manifest(args.out, files)
    print(f"stop reason: {trace.stop_reason}; final J = {trace.J[-1]:.6e}")
    return 0


def _scan_trace(cfg, sim, src):
    ls = cfg["landscape"]
    nt = ls.get("trace_nt", sim.nt)
    dt = ls.get("trace_dt", sim.dt)
    w = cfg["wavelet"]
    return ricker(w["peak_freq"], w["t0"], nt, dt), ls


def cmd_landscape(args):
    cfg = load_config(args.config)
    grid, _, _, acq, src, sim, kind = build_setup(cfg)
    if "landscape" not in cfg:
        raise ConfigError("landscape command needs a landscape section")
    os.makedirs(args.out, exist_ok=True)
    wav, ls = _scan_trace(cfg, sim, src)
    from .gridcore import Trace
    g_trace = Trace(wav.samples, wav.dt)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    files = []
    scan = ls["scan"]
    if scan == "shift_dilate":
        if kind is None:
            raise ConfigError("shift_dilate scan needs a misfit section")
        grid_scan = shift_dilate_scan(
            g_trace, ls.get("s_values", list(np.linspace(-0.3, 0.3, 31))),
            ls.get("lam_values", [1.0]), kind, frame=ls.get("frame", "eulerian"))
        if grid_scan.axis2 is None:
            otio.write_curve_csv(os.path.join(args.out, "scan.csv"),
                                 {"shift": grid_scan.axis1, "misfit": grid_scan.values})
            files.append("scan.csv")
        else:
            otio.write_matrix_csv(os.path.join(args.out, "scan.csv"),
                                  grid_scan.values, grid_scan.axis1, grid_scan.axis2)
            otio.write_pgm(os.path.join(args.out, "scan.pgm"), grid_scan.values)
            files += ["scan.csv", "scan.pgm"]
    elif scan == "huber":
        dens = np.clip(g_trace.samples, 0.0, None)
        res = huber_scan(Trace(dens + 1e-12, g_trace.dt),
                         ls.get("s_values", list(np.linspace(0, 3, 61))),
                         ls.get("c_values", [0.5, 1.0, 2.0]))
        cols = {"shift": res["s_values"]}
        cols.update({f"w2sq_c{c}": v for c, v in res["curves"].items()})
        otio.write_curve_csv(os.path.join(args.out, "huber.csv"), cols)
        files.append("huber.csv")
        print("crossovers:", res["crossover"])
    elif scan == "noise":
        res = noise_scan(Trace(np.abs(g_trace.samples) + 1.0, g_trace.dt),
                         ls.get("eta_values", [1e-4, 1e-3, 1e-2]),
                         ls.get("N_values", [50, 100, 200, 400, 800]),
                         trials=ls.get("trials", 20), seed=seed)
        keys = sorted(res["mean_w2"])
        otio.write_curve_csv(os.path.join(args.out, "noise.csv"), {
            "eta": [k[0] for k in keys], "N": [k[1] for k in keys],
            "mean_w2sq": [res["mean_w2"][k] for k in keys],
            "mean_l2sq": [res["mean_l2"][k] for k in keys]})
        files.append("noise.csv")
        print("W2^2 slope vs eta/N:", res["slope_w2_vs_eta_over_N"])
    otio.write_manifest(args.out, files)
    return 0


def cmd_w2(args):
    from .gridcore import Trace
    scheme = NormalizationScheme(args.scheme, b=args.b, c=args.c)
    gf = otio.read_gather(args.file_f)
    gg = otio.read_gather(args.file_g)
    f = gf.trace(args.trace)
    g = gg.trace(args.trace)
    w = w_sigma(f, g, scheme)
    print(f"W_sigma   = {w:.9e}")
    print(f"W_sigma^2 = {w * w:.9e}")
    if args.write_map:
        plan = optimal_map(normalize(f, scheme), normalize(g, scheme))
        otio.write_curve_csv(args.write_map, {"t": plan.times_f, "T": plan.T})
    if args.write_adjoint:
        adj = w2_frechet(f, g, scheme)
        otio.write_curve_csv(args.write_adjoint, {"t": adj.times, "adjoint": adj.samples})
    return 0


def main(argv=None):
    p = argparse.ArgumentParser(prog="otfwi", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", required=True)
        if out:
            sp.add_argument("--out", default=os.environ.get("OTFWI_OUT", "out"))
        sp.add_argument("--threads", type=int,
                        default=int(os.environ.get("OTFWI_THREADS", "1")))
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--reproducible", action="store_true")
        sp.add_argument("--snapshots", type=int, default=0)

    common(sub.add_parser("forward", help="write observed gathers for a config"))
    spi = sub.add_parser("invert", help="run the inversion loop")
    common(spi)
    spi.add_argument("--data", required=True)
    common(sub.add_parser("landscape", help="run landscape scans"))
    spw = sub.add_parser("w2", help="W_sigma between two gather files")
    spw.add_argument("file_f")
    spw.add_argument("file_g")
    spw.add_argument("--trace", type=int, default=0)
    spw.add_argument("--scheme", default="linear")
    spw.add_argument("--b", type=float, default=1.0)
    spw.add_argument("--c", type=float, default=0.0)
    spw.add_argument("--write-map", default=None)
    spw.add_argument("--write-adjoint", default=None)
    args = p.parse_args(argv)
    threads = getattr(args, "threads", 1)
    if getattr(args, "reproducible", False):
        # bitwise reproducibility requires a fixed reduction order
        threads = 1
        if getattr(args, "seed", None) is None:
            args.seed = 0
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=threads)
    except ImportError:
        os.environ["OMP_NUM_THREADS"] = str(threads)
    handlers = {"forward": cmd_forward, "invert": cmd_invert,
                "landscape": cmd_landscape, "w2": cmd_w2}
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except InstabilityError as e:
        print(f"numerical instability: {e}", file=sys.stderr)
        return EXIT_INSTABILITY
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
