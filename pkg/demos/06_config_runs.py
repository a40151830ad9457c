# Running experiments from JSON configs, as the disklab command does.

import json
import tempfile

from disklab.cli import main, shipped_suite
from disklab.experiments import run_experiment

cfg = {
    "schema_version": "disklab.config/1",
    "experiment": "coverage",
    "operator": {"kind": "weighted_backward_shift", "dim": 32,
                 "weights": {"mode": "constant", "value": 2}},
    "parameters": {"horizon": 30, "grid": {"half_width": 3, "step": 0.25}},
}
env, table = run_experiment(cfg)
print(json.dumps({k: env[k] for k in ("experiment", "flags")}, indent=2))
print("max distance:", env["results"]["max_distance"])
print(table.splitlines()[:3])

# %% the shipped acceptance suite, with reports written to a scratch directory
with tempfile.TemporaryDirectory() as out:
    code = main(["verify", str(shipped_suite()), "--out", out])
print("exit code", code)
