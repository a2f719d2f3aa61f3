"""End-to-end tour of the otfwi command line.

Builds a small JSON config, then drives the four subcommands in order:

  forward    synthesize observed shot gathers from the true model
  invert     run a short L-BFGS inversion against those gathers
  landscape  scan the misfit over trace shifts
  w2         compare two wavelet files with the buffered W2 distance

Everything lands in demos/out/08/.  The same flows are available from a
shell as `otfwi forward --config cfg.json --out DIR` etc.; this script
calls the entry point in-process so it can narrate the artifacts.
"""

import json
import os

import numpy as np

from otfwi.cli import main
from otfwi.gridcore import ShotGather, ricker
from otfwi.io import read_model, write_gather

out = os.path.join(os.path.dirname(__file__), "out", "08")
os.makedirs(out, exist_ok=True)

cfg = {
    "grid": {"nx": 41, "nz": 41, "dx": 10.0, "dz": 10.0},
    "model": {
        "true": {"name": "layered",
                 "params": {"v1": 1900.0, "v2": 2100.0, "z_interface": 200.0}},
        "initial": {"name": "constant", "params": {"v": 2000.0}},
    },
    "acquisition": {
        "sources": {"n": 3, "z": 0.0, "margin": 60.0},
        "receivers": {"n": 21, "z": 0.0},
        "record_time": 0.4,
        "dt_record": 1e-3,
    },
    "wavelet": {"peak_freq": 15.0, "t0": 0.1},
    "sim": {"dt": 1e-3, "nt": 401, "stencil_order": 2},
    "misfit": {"kind": "W2_trace",
               "scheme": {"kind": "linear", "b": 0.0, "c": 1.0}},
    "optimizer": {"max_iters": 5, "v_clip": [1500.0, 2600.0]},
    "landscape": {"scan": "shift_dilate",
                  "s_values": list(np.linspace(-0.1, 0.1, 21).round(6))},
}
cfg_path = os.path.join(out, "cfg.json")
with open(cfg_path, "w") as fh:
    json.dump(cfg, fh, indent=2)

fwd_dir = os.path.join(out, "forward")
rc = main(["forward", "--config", cfg_path, "--out", fwd_dir, "--reproducible"])
print(f"forward   -> rc={rc}, shots: "
      f"{sorted(f for f in os.listdir(fwd_dir) if f.endswith('.bin'))}")

inv_dir = os.path.join(out, "invert")
rc = main(["invert", "--config", cfg_path, "--out", inv_dir,
           "--data", fwd_dir, "--snapshots", "2"])
final = read_model(os.path.join(inv_dir, "final_model.bin"))
print(f"invert    -> rc={rc}, final model velocity range "
      f"[{final.velocity.min():.0f}, {final.velocity.max():.0f}] m/s; "
      f"see {inv_dir}/trace.csv")

scan_dir = os.path.join(out, "landscape")
rc = main(["landscape", "--config", cfg_path, "--out", scan_dir])
print(f"landscape -> rc={rc}, wrote {os.listdir(scan_dir)}")

# two gather files holding a wavelet and its 20 ms shift
dt = 1e-3
w = ricker(15.0, 0.1, 401, dt).samples
fa = os.path.join(out, "wavelet_a.bin")
fb = os.path.join(out, "wavelet_b.bin")
write_gather(fa, ShotGather(w[None, :], dt))
write_gather(fb, ShotGather(np.roll(w, 20)[None, :], dt))
rc = main(["w2", fa, fb, "--scheme", "exponential", "--b", "3.0",
           "--write-map", os.path.join(out, "w2_map.csv"),
           "--write-adjoint", os.path.join(out, "w2_adjoint.csv")])
print(f"w2        -> rc={rc}, wrote w2_map.csv and w2_adjoint.csv")
