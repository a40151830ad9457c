"""Config-driven experiments and the report envelope they produce.

A config is a JSON object::

    {"experiment": "density",
     "operator": {"kind": "weighted_backward_shift", "dim": 256,
                  "weights": {"mode": "constant", "value": 2}},
     "parameters": {"horizon": 200, "epsilon": 1e-3, ...},
     "criteria": [{"id": "AC3", "observed": "/results/covered_fraction",
                   "expected": 1.0, "comparison": "eq", "tolerance": 0}]}

``criteria`` is only read by :func:`verify_suite`.  Every report is an
envelope ``{schema_version, artifact_version, experiment, config, results,
flags, timestamp}``; apart from ``timestamp`` it is a deterministic function
of the config and seed.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import os
import pathlib
import warnings
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np

from . import __version__
from .constructions import (adjoint_point_spectrum, certified_transfer, counterexample_vector,
                            direct_sum_with_scalar)
from .criterion import (build_diskcyclic_vector, criterion_residuals, equivalence_sequence,
                        lambda_criterion_residuals, reduce_to_plain, right_inverse_map)
from .dense_sets import DenseSetEnumerator, random_unit_vectors
from .errors import DisklabError, InvalidSpecError
from .numrange import (convex_hull, convex_hull_distance, disk_range_coverage,
                       numerical_range_boundary, square_grid)
from .operators import (OperatorSpec, canonical_basis_vector, complex_from_json, complex_to_json,
                        make_operator, support_end, vector_from_json, vector_to_json)
from .orbits import MODES, best_disk_coefficient, density_report, hierarchy_check, orbit

__all__ = [
    "EXPERIMENTS", "CONFIG_SCHEMA", "REPORT_SCHEMA", "UsageError", "ExperimentConfig",
    "run_experiment", "write_report", "verify_suite", "evaluate_criterion",
]

CONFIG_VERSION = "disklab.config/1"
REPORT_VERSION = "disklab.report/1"

EXPERIMENTS = ("orbit", "density", "numrange", "coverage", "criterion", "build-vector",
               "transfer", "counterexample", "spectrum", "hierarchy", "argmin")

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["experiment"],
    "properties": {
        "schema_version": {"const": CONFIG_VERSION},
        "experiment": {"enum": list(EXPERIMENTS)},
        "operator": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"type": "string"},
                "dim": {"type": "integer", "minimum": 2},
                "weights": {"type": "object", "required": ["mode"]},
                "entries": {"type": "array"},
                "inner": {"type": "object"},
            },
        },
        "parameters": {
            "type": "object",
            "properties": {
                "horizon": {"type": "integer", "minimum": 0},
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "theta_count": {"type": "integer", "minimum": 8},
                "seed": {"type": "integer", "minimum": 0},
                "mode": {"enum": list(MODES)},
                "sample_count": {"type": "integer", "minimum": 1},
            },
        },
        "criteria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "observed", "expected", "comparison"],
                "properties": {
                    "id": {"type": "string"},
                    "observed": {"type": "string"},
                    "comparison": {"enum": ["eq", "le", "ge", "is"]},
                    "tolerance": {"type": "number", "minimum": 0},
                },
            },
        },
    },
    "allOf": [
        {"if": {"properties": {"experiment": {"not": {"const": "argmin"}}}},
         "then": {"required": ["operator"]}},
    ],
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "artifact_version", "experiment", "config", "results",
                 "flags", "timestamp"],
    "properties": {
        "schema_version": {"const": REPORT_VERSION},
        "artifact_version": {"type": "string"},
        "experiment": {"enum": list(EXPERIMENTS)},
        "config": {"type": "object"},
        "results": {"type": "object"},
        "flags": {
            "type": "object",
            "required": ["overflow"],
            "properties": {
                "overflow": {"type": "boolean"},
                "truncation_dim": {"type": ["integer", "null"]},
                "warnings": {"type": "array", "items": {"type": "string"}},
            },
        },
        "timestamp": {"type": "string"},
    },
}


class UsageError(DisklabError, ValueError):
    """Config or invocation problem; ``field`` names the offending entry."""

    def __init__(self, msg, field=None):
        super().__init__(msg)
        self.field = field


def _field_of(err: jsonschema.ValidationError) -> str:
    path = list(err.absolute_path)
    if err.validator == "required":
        # the missing key is quoted at the start of the message
        missing = err.message.split("'")[1] if "'" in err.message else ""
        path.append(missing)
    return "/".join(str(p) for p in path) or "<root>"


class ExperimentConfig:
    """Validated experiment config (the raw dict is kept for the report echo)."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object", "<root>")
        errors = sorted(jsonschema.Draft202012Validator(CONFIG_SCHEMA).iter_errors(raw),
                        key=lambda e: list(e.absolute_path))
        if errors:
            raise UsageError(errors[0].message, _field_of(errors[0]))
        self.raw = raw
        self.experiment = raw["experiment"]
        self.parameters = dict(raw.get("parameters", {}))
        self.criteria = list(raw.get("criteria", []))
        self.operator = None
        if "operator" in raw:
            try:
                self.operator = OperatorSpec.from_json(raw["operator"])
            except InvalidSpecError as exc:
                raise UsageError(f"operator: {exc}", "operator") from exc

    @classmethod
    def from_file(cls, path) -> ExperimentConfig:
        try:
            raw = json.loads(pathlib.Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed JSON: {exc}", f"<json line {exc.lineno}>") from exc
        return cls(raw)


# vector and target sources ----------------------------------------------------

def _pad(v, n):
    out = np.zeros(n, dtype=complex)
    if support_end(v) > n:
        raise UsageError(f"vector support {support_end(v)} exceeds dimension {n}")
    out[: min(n, len(v))] = v[:n]
    return out


def _targets(src: dict, n: int, seed: int) -> list:
    kind = src.get("source", "enumerator")
    if kind == "enumerator":
        enum = DenseSetEnumerator(int(src.get("support", 4)))
        vecs = enum.take(int(src.get("start", 1)), int(src.get("count", 20)))
    elif kind == "random":
        vecs = random_unit_vectors(int(src.get("support", n)), int(src.get("count", 10)),
                                   int(src.get("seed", seed)))
        vecs = [v * float(src.get("scale", 1.0)) for v in vecs]
    elif kind == "explicit":
        vecs = [vector_from_json(v) for v in src["vectors"]]
    elif kind == "mixed":
        vecs = []
        for part in src["parts"]:
            vecs.extend(_targets(part, n, seed))
    else:
        raise UsageError(f"unknown target source {kind!r}", "parameters/targets/source")
    return [_pad(v, n) for v in vecs]


def _vector(src: dict, op, params: dict, seed: int, flags: dict):
    n = op.dim
    kind = src.get("source", "basis")
    if kind == "basis":
        return canonical_basis_vector(n, int(src.get("index", 1))), None
    if kind == "explicit":
        return _pad(vector_from_json(src["vector"]), n), None
    if kind == "random":
        return random_unit_vectors(n, 1, int(src.get("seed", seed)),
                                   support=int(src.get("support", n)))[0], None
    if kind == "built":
        inv = make_operator(right_inverse_map(op.spec))
        tg = _targets(src.get("targets", params.get("targets", {})), n, seed)
        x, cert = build_diskcyclic_vector(op, inv, tg, budget=src.get("budget"))
        return x, cert
    raise UsageError(f"unknown vector source {kind!r}", "parameters/vector/source")


# experiments --------------------------------------------------------------------

def _exp_orbit(cfg, op, p, seed, flags):
    x, _ = _vector(p.get("vector", {}), op, p, seed, flags)
    orb = orbit(op, x, int(p.get("horizon", 10)))
    flags["overflow"] = orb.overflowed
    rows = [{"n": r.n, "norm": r.norm} for r in orb]
    results = {"horizon": orb.horizon, "records": rows}
    if p.get("include_vectors", False):
        results["vectors"] = [vector_to_json(r.vec) for r in orb]
    return results, [("n", "norm"), [(r["n"], r["norm"]) for r in rows]]


def _exp_density(cfg, op, p, seed, flags):
    x, cert = _vector(p.get("vector", {}), op, p, seed, flags)
    tg = _targets(p.get("targets", {}), op.dim, seed)
    horizon = p.get("horizon")
    if horizon is None:
        horizon = max(cert.gaps) if cert is not None else 100
    rep = density_report(op, x, tg, int(horizon), float(p.get("epsilon", 1e-3)),
                         p.get("mode", "disk"), clip=bool(p.get("clip", True)))
    flags["overflow"] = rep.overflowed
    out = rep.to_dict()
    if cert is not None:
        out["certificate"] = cert.to_dict()
    return out, rep.to_csv()


def _exp_numrange(cfg, op, p, seed, flags):
    sample = numerical_range_boundary(op, int(p.get("theta_count", 256)))
    out = sample.to_dict()
    out["min_modulus"] = float(np.abs(sample.boundary_points).min())
    out["spread"] = float(np.abs(sample.boundary_points - sample.boundary_points[0]).max())
    if "hull_samples" in p:
        # field-of-values convexity check against random unit vectors
        hull = convex_hull(sample.boundary_points)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(int(p["hull_samples"])):
            u = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
            u /= np.linalg.norm(u)
            worst = max(worst, float(convex_hull_distance(hull, np.vdot(u, op.matrix @ u))))
        out["hull_max_distance"] = worst
    return out, sample.to_csv()


def _grid(p):
    g = p.get("grid", {"half_width": 3.0, "step": 0.25})
    if "points" in g:
        return [complex_from_json(z) for z in g["points"]]
    return square_grid(float(g["half_width"]), float(g["step"]))


def _exp_coverage(cfg, op, p, seed, flags):
    cov = disk_range_coverage(op, int(p.get("horizon", 30)), _grid(p), int(p.get("theta_count", 256)))
    flags["overflow"] = cov.overflowed
    out = cov.to_dict()
    out["max_distance"] = float(cov.per_point_distance.max())
    return out, cov.to_csv()


def _n_ks(p):
    nk = p.get("n_ks", {"start": 1, "stop": 200})
    if isinstance(nk, dict):
        return list(range(int(nk.get("start", 1)), int(nk["stop"]) + 1, int(nk.get("step", 1))))
    return [int(v) for v in nk]


def _exp_criterion(cfg, op, p, seed, flags):
    S = make_operator(right_inverse_map(op.spec))
    enum = DenseSetEnumerator(int(p.get("support", 4)))
    n_ks = _n_ks(p)
    count = int(p.get("sample_count", 50))
    tol = float(p.get("tolerance", 1e-9))
    plain = criterion_residuals(op, S, enum, enum, n_ks, count, tol)
    out = {"plain": plain.to_dict()}
    samples = enum.take(1, count)
    support = max(support_end(v) for v in samples)
    beyond = np.asarray(plain.n_ks) >= support
    out["max_support"] = support
    out["cond1_max_beyond_support"] = float(plain.cond1_residuals[beyond].max(initial=0.0))
    out["cond3_max"] = float(plain.cond3_residuals.max())
    if "cond2_rate" in p:
        # cond2 against rate^{n_k} * max ||y||
        ymax = max(float(np.linalg.norm(v)) for v in samples)
        bound = float(p["cond2_rate"]) ** np.asarray(plain.n_ks, dtype=float) * ymax
        out["cond2_bound_ratio_max"] = float((plain.cond2_residuals / bound).max())
    lam_rule = p.get("lambda")
    if lam_rule == "equivalence":
        y = _pad(vector_from_json(p["lambda_y"]), op.dim) if "lambda_y" in p \
            else canonical_basis_vector(op.dim, 1)
        lam = equivalence_sequence(op, S, y, n_ks)
    elif lam_rule == "one":
        lam = [1.0] * len(n_ks)
    elif lam_rule is None:
        lam = None
    else:
        raise UsageError(f"unknown lambda rule {lam_rule!r}", "parameters/lambda")
    if lam is not None:
        lrep = lambda_criterion_residuals(op, S, lam, enum, enum, n_ks, count, tol)
        red = reduce_to_plain(lrep)
        out["lambda"] = lrep.to_dict()
        out["lambda_max_modulus"] = max(abs(z) for z in lam)
        out["reduction_matches_plain"] = bool(
            np.array_equal(red.cond1_residuals, plain.cond1_residuals)
            and np.array_equal(red.cond2_residuals, plain.cond2_residuals)
            and np.array_equal(red.cond3_residuals, plain.cond3_residuals)
            and red.verdict == plain.verdict)
    flags["overflow"] = plain.overflowed
    rows = [(k, plain.cond1_residuals[i], plain.cond2_residuals[i], plain.cond3_residuals[i])
            for i, k in enumerate(plain.n_ks)]
    return out, [("n_k", "cond1", "cond2", "cond3"), rows]


def _exp_build(cfg, op, p, seed, flags):
    S = make_operator(right_inverse_map(op.spec))
    tg = _targets(p.get("targets", {}), op.dim, seed)
    x, cert = build_diskcyclic_vector(op, S, tg, budget=p.get("budget"), schedule=p.get("schedule"))
    bounds = 2.0 ** -np.arange(1, len(tg) + 1)
    out = {
        "certificate": cert.to_dict(),
        "vector": vector_to_json(x),
        "certificate_sound": cert.sound,
        "within_geometric_budget": bool(np.all(cert.achieved_residuals <= bounds)),
    }
    if "epsilon" in p:
        rep = density_report(op, x, tg, max(cert.gaps), float(p["epsilon"]), "disk")
        out["density"] = rep.to_dict()
        out["covered_fraction"] = rep.covered_fraction
    rows = [(j + 1, m, b, a) for j, (m, b, a) in
            enumerate(zip(cert.gaps, cert.residual_bounds, cert.achieved_residuals))]
    return out, [("j", "m_j", "bound", "achieved"), rows]


def _exp_transfer(cfg, op, p, seed, flags):
    alpha = float(p.get("alpha", 2.0))
    tg = p.get("targets", {})
    if isinstance(tg, list):
        pairs = [(vector_from_json(t["w"]), complex_from_json(t.get("lambda", 1.0))) for t in tg]
    else:
        # vectors from a target source, lambdas cycled over the list given
        lams = [complex_from_json(v) for v in p.get("lambdas", [1.0])]
        ws = _targets(tg, op.dim, seed)
        pairs = [(w, lams[i % len(lams)]) for i, w in enumerate(ws)]
    z, cert, schedules = certified_transfer(op.spec, alpha, pairs, budget=float(p.get("budget", 2e-4)),
                                            k_start=int(p.get("k_start", 1)))
    flags["overflow"] = any(s.overflowed for s in schedules)
    final = [float(s.distances[-1]) for s in schedules]
    out = {
        "alpha": alpha,
        "certificate": cert.to_dict(),
        "schedules": [s.to_dict() for s in schedules],
        "certified_distances": final,
        "max_certified_distance": max(final),
        "max_scalar_modulus": max(abs(z) for s in schedules for z in s.scalars),
    }
    rows = [(i, complex(s.lam).real, complex(s.lam).imag, s.n_ks[-1], d)
            for i, (s, d) in enumerate(zip(schedules, final))]
    return out, [("target_index", "lambda_re", "lambda_im", "n_k", "distance"), rows]


def _exp_counterexample(cfg, op, p, seed, flags):
    horizon = int(p.get("horizon", 200))
    count = int(p.get("count", 10))
    xs = random_unit_vectors(op.dim - 1, count, seed)
    S = op
    if op.spec.kind != "direct_sum_scalar":
        S = make_operator(direct_sum_with_scalar(op.spec, float(p.get("alpha", 2.0))))
        xs = random_unit_vectors(op.dim, count, seed)
    certs = []
    for x in xs:
        _, c = counterexample_vector(S, x * float(p.get("scale", 1.0)), horizon)
        certs.append(c)
    out = {"horizon": horizon, "certificates": certs, "min_certificate": min(certs)}
    return out, [("sample", "certificate"), list(enumerate(certs))]


def _exp_spectrum(cfg, op, p, seed, flags):
    rep = adjoint_point_spectrum(op.spec)
    out = rep.to_dict()
    out["count"] = len(rep.eigenvalues)
    out["all_outside_unit_disk"] = all(abs(z) > 1 for z in rep.eigenvalues)
    rows = [(z.real, z.imag) for z in rep.eigenvalues]
    return out, [("re", "im"), rows]


def _exp_hierarchy(cfg, op, p, seed, flags):
    x, _ = _vector(p.get("vector", {}), op, p, seed, flags)
    tg = _targets(p.get("targets", {}), op.dim, seed)
    horizon = int(p.get("horizon", 100))
    eps = float(p.get("epsilon", 1e-3))
    reps = [density_report(op, x, tg, horizon, eps, m, clip=bool(p.get("clip", True))) for m in MODES]
    flags["overflow"] = any(r.overflowed for r in reps)
    ok = hierarchy_check(*reps)
    out = {"hierarchy_holds": ok}
    out.update({f"{m}_covered_fraction": r.covered_fraction for m, r in zip(MODES, reps)})
    out["distances"] = {m: r.distances().tolist() for m, r in zip(MODES, reps)}
    rows = [(i,) + tuple(r.hits[i].distance for r in reps) for i in range(len(tg))]
    return out, [("target_index", "plain", "disk", "scaled"), rows]


def _exp_argmin(cfg, op, p, seed, flags):
    rng = np.random.default_rng(seed)
    dim = int(p.get("dim", 6))
    pairs = int(p.get("pairs", 1000))
    radial = int(p.get("radial", 400))
    angular = int(p.get("angular", 400))
    r = np.linspace(0.0, 1.0, radial)
    th = np.arange(angular) * (2 * np.pi / angular)
    grid = (r[:, None] * np.exp(1j * th)[None, :]).ravel()
    worst_gap, worst_adv = 0.0, -np.inf
    for _ in range(pairs):
        v = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) * rng.uniform(0.05, 2.0)
        y = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        _, d = best_disk_coefficient(v, y)
        g = _grid_min(grid, v, y)
        worst_gap = max(worst_gap, abs(d - g))
        worst_adv = max(worst_adv, d - g)
    return ({"pairs": pairs, "max_abs_difference": worst_gap, "max_grid_advantage": worst_adv},
            [("metric", "value"), [("max_abs_difference", worst_gap), ("max_grid_advantage", worst_adv)]])


def _grid_min(grid, v, y):
    # direct ||a v - y||^2 accumulated coordinate by coordinate over the whole grid
    d2 = np.zeros(grid.shape, dtype=float)
    for vk, yk in zip(v, y):
        d2 += np.abs(grid * vk - yk) ** 2
    return float(np.sqrt(d2.min()))


_DISPATCH = {
    "orbit": _exp_orbit, "density": _exp_density, "numrange": _exp_numrange,
    "coverage": _exp_coverage, "criterion": _exp_criterion, "build-vector": _exp_build,
    "transfer": _exp_transfer, "counterexample": _exp_counterexample, "spectrum": _exp_spectrum,
    "hierarchy": _exp_hierarchy, "argmin": _exp_argmin,
}


def _clean(obj):
    """Replace non-finite floats (JSON has no inf) by None, recursively."""
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return complex_to_json(obj)
    return obj


def run_experiment(config, seed: int | None = None):
    """Run one experiment; returns ``(envelope, csv_text_or_None)``.

    ``config`` is a dict, a path or an :class:`ExperimentConfig`.  ``seed``
    overrides ``parameters.seed``.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_file(config) if isinstance(config, (str, os.PathLike)) \
            else ExperimentConfig(config)
    params = dict(config.parameters)
    if seed is not None:
        params["seed"] = int(seed)
    seed_ = int(params.get("seed", 0))
    op = make_operator(config.operator) if config.operator is not None else None
    flags = {"overflow": False, "truncation_dim": op.dim if op is not None else None, "warnings": []}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        results, table = _DISPATCH[config.experiment](config, op, params, seed_, flags)
    flags["warnings"] = sorted({str(w.message) for w in caught})
    echo = dict(config.raw)
    echo["parameters"] = params
    envelope = {
        "schema_version": REPORT_VERSION,
        "artifact_version": __version__,
        "experiment": config.experiment,
        "config": echo,
        "results": _clean(results),
        "flags": _clean(flags),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    jsonschema.validate(envelope, REPORT_SCHEMA)
    if isinstance(table, list):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table[0])
        for row in table[1]:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        table = buf.getvalue()
    return envelope, table


def write_report(envelope: dict, table, out_dir, name: str, fmt: str = "json") -> list:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("json", "both"):
        path = out / f"{name}.json"
        path.write_text(json.dumps(envelope, indent=2, sort_keys=True) + "\n")
        written.append(path)
    if fmt in ("csv", "both") and table is not None:
        path = out / f"{name}.csv"
        path.write_text(table)
        written.append(path)
    return written


def _pointer(doc, ptr: str):
    cur = doc
    for part in ptr.lstrip("/").split("/"):
        if part == "":
            continue
        cur = cur[int(part)] if isinstance(cur, list) else cur[part]
    return cur


def evaluate_criterion(envelope: dict, crit: dict) -> dict:
    """Compare the observed value (JSON pointer into the envelope) with the expectation."""
    tol = float(crit.get("tolerance", 0.0))
    expected = crit["expected"]
    try:
        observed = _pointer(envelope, crit["observed"])
    except (KeyError, IndexError, ValueError):
        observed = None
    cmp = crit["comparison"]
    if observed is None:
        ok = False
    elif cmp == "is":
        ok = observed == expected
    elif cmp == "eq":
        ok = abs(float(observed) - float(expected)) <= tol
    elif cmp == "le":
        ok = float(observed) <= float(expected) + tol
    else:
        ok = float(observed) >= float(expected) - tol
    return {"id": crit["id"], "expected": expected, "comparison": cmp, "observed": observed,
            "tolerance": tol, "pass": bool(ok)}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DISKLAB_THREADS", "1")))
    except ValueError:
        return 1


def verify_suite(path, out_dir=None, seed: int | None = None) -> dict:
    """Run every ``*.json`` config under ``path`` and evaluate its criteria.

    Configs fan out over ``DISKLAB_THREADS`` workers.  The summary lists one
    row per criterion; a criterion id shared by several configs passes only
    if every row for it passes.
    """
    root = pathlib.Path(path)
    files = sorted(root.glob("*.json")) if root.is_dir() else []
    if not files:
        raise UsageError(f"no experiment configs found in {path}", "path")
    configs = [ExperimentConfig.from_file(f) for f in files]

    def one(item):
        f, cfg = item
        try:
            env, table = run_experiment(cfg, seed=seed)
            error = None
        except DisklabError as exc:
            env, table, error = None, None, f"{type(exc).__name__}: {exc}"
        rows = []
        for crit in cfg.criteria:
            if env is None:
                rows.append({"id": crit["id"], "expected": crit["expected"],
                             "comparison": crit["comparison"], "observed": error,
                             "tolerance": float(crit.get("tolerance", 0.0)), "pass": False})
            else:
                rows.append(evaluate_criterion(env, crit))
        for r in rows:
            r["config"] = f.name
        if out_dir is not None and env is not None:
            write_report(env, table, out_dir, f.stem, "both")
        return rows

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = [r for chunk in pool.map(one, zip(files, configs)) for r in chunk]
    by_id: dict = {}
    for r in rows:
        by_id.setdefault(r["id"], []).append(r["pass"])
    failed = sorted(k for k, v in by_id.items() if not all(v))
    summary = {"rows": rows, "failed": failed, "passed": not failed}
    if out_dir is not None:
        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["criterion", "config", "expected", "observed", "tolerance", "pass"])
        for r in rows:
            w.writerow([r["id"], r["config"], r["expected"], r["observed"], r["tolerance"], r["pass"]])
        (out / "summary.csv").write_text(buf.getvalue())
    return summary
