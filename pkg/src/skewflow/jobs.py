"""Analysis jobs: YAML schema, validation, execution and report emission.

The schema is documented in ``docs/job_schema.md``.  Validation happens in
full before anything is computed; every problem is reported with the line
of the offending node.
"""

from dataclasses import dataclass, field
import csv
import datetime
import io
import json
import math
import os

import numpy as np
import yaml

from . import __version__, core, corpus, criteria, spectra
from .errors import InputError, SkewFlowError

TOP_KEYS = {"system", "norm", "seed", "horizon", "tolerances", "analyses", "output"}
SYSTEM_KEYS = {"builtin", "params", "steps", "generator"}
HORIZON_KEYS = {"n_max", "states", "random_vectors", "trend_factor", "split", "vectors"}
TOLERANCE_KEYS = {"axioms"}
OUTPUT_KEYS = {"dir"}
GENERATOR_KEYS = {"blocks", "seed", "conjugation", "cond_cap", "length"}

COMMON = {"type", "name"}
ANALYSIS_KEYS = {
    "axioms": {"grid", "triples", "states"},
    "growth": {"omegas"},
    "decay": {"omegas"},
    "es": {"mu"},
    "eis": {"mu"},
    "datko": {"rho", "gauge"},
    "adjoint": {"gamma", "gauge"},
    "instability": {"rho", "rate", "gauge"},
    "dichotomy": {"method", "projectors", "nu1", "nu2", "rho1", "rho2", "gauge"},
    "trichotomy": {"method", "projectors", "nu", "rho", "gauge"},
    "four_projector": {"projectors", "mu", "nu"},
    "estimate": {"direction", "search", "tol"},
}
GRID_KEYS = {"count", "t_max", "integer"}

CERT_HEADER = ("n", "coefficient", "max_ratio", "verdict")
AXIOM_HEADER = ("t", "s", "residual")
ENVELOPE_HEADER = ("n", "M", "omega", "verdict")
ESTIMATE_HEADER = ("parameter", "verdict")


class JobError(InputError):
    """Schema or precondition problems; ``errors`` lists ``(line, path, message)``."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"line {ln}: {path}: {msg}" if ln else f"{path}: {msg}" for ln, path, msg in self.errors]
        super().__init__("invalid job:\n  " + "\n  ".join(lines))


# ---------------------------------------------------------------------------
# line bookkeeping
# ---------------------------------------------------------------------------

def _line_map(text):
    """``{path tuple: 1-based line}`` for every node of a YAML document."""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise JobError([(mark.line + 1 if mark else None, "<document>", str(exc))]) from None
    lines = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                lines[path + (k.value,)] = k.start_mark.line + 1
                walk(v, path + (k.value,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    if root is not None:
        walk(root, ())
    return lines


class _Collector:
    def __init__(self, lines, strict):
        self.lines = lines
        self.strict = strict
        self.errors = []
        self.warnings = []

    def line(self, path):
        path = tuple(path)
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def error(self, path, msg):
        self.errors.append((self.line(path), _fmt(path), msg))

    def keys(self, mapping, allowed, path):
        for k in mapping:
            if k not in allowed:
                msg = f"unknown key {k!r} (allowed: {', '.join(sorted(allowed))})"
                if self.strict:
                    self.error(path + (k,), msg)
                else:
                    self.warnings.append(f"{_fmt(path + (k,))}: {msg} (ignored)")


def _fmt(path):
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<job>"


# ---------------------------------------------------------------------------
# job
# ---------------------------------------------------------------------------

@dataclass
class AnalysisJob:
    system: dict
    analyses: list
    norm: str = "l1"
    seed: int = 0
    horizon: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self):
        """Canonical echo; parsing it again yields an equal job."""
        out = {"system": self.system, "norm": self.norm, "seed": self.seed,
               "horizon": self.horizon, "tolerances": self.tolerances,
               "analyses": self.analyses}
        if self.output:
            out["output"] = self.output
        return _plain(out)

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def parse_job(source, strict=True, seed=None):
    """Parse and validate a job from a path or YAML text."""
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, str) and ("\n" in source or ":" in source):
        text = source
    else:
        raise JobError([(None, "<job>", f"job file not found: {source}")])
    lines = _line_map(text)
    data = yaml.safe_load(text)
    return validate_job(data, lines, strict=strict, seed=seed)


def job_from_dict(data, strict=True, seed=None):
    return validate_job(data, {}, strict=strict, seed=seed)


def _num(col, path, value, name, cond=None, desc=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        col.error(path, f"{name} must be a number, got {value!r}")
        return None
    value = float(value)
    if not math.isfinite(value):
        col.error(path, f"{name} must be finite")
        return None
    if cond is not None and not cond(value):
        col.error(path, f"{name} must be {desc}")
        return None
    return value


def validate_job(data, lines=None, strict=True, seed=None):
    col = _Collector(lines or {}, strict)
    if not isinstance(data, dict):
        raise JobError([(1, "<job>", "job must be a mapping")])
    col.keys(data, TOP_KEYS, ())
    system = data.get("system")
    if system is None:
        col.error(("system",), "missing system section")
        system = {}
    else:
        _check_system(col, system)
    norm = data.get("norm", "l1")
    if norm not in core.NORM_KINDS:
        col.error(("norm",), f"norm must be one of {core.NORM_KINDS}")
    job_seed = data.get("seed", 0)
    if seed is not None:
        job_seed = seed
    if isinstance(job_seed, bool) or not isinstance(job_seed, int) or job_seed < 0:
        col.error(("seed",), "seed must be a nonnegative integer")
    horizon = data.get("horizon") or {}
    if not isinstance(horizon, dict):
        col.error(("horizon",), "horizon must be a mapping")
        horizon = {}
    col.keys(horizon, HORIZON_KEYS, ("horizon",))
    tolerances = data.get("tolerances") or {}
    if not isinstance(tolerances, dict):
        col.error(("tolerances",), "tolerances must be a mapping")
        tolerances = {}
    col.keys(tolerances, TOLERANCE_KEYS, ("tolerances",))
    if "axioms" in tolerances:
        _num(col, ("tolerances", "axioms"), tolerances["axioms"], "axioms tolerance",
             lambda v: v > 0, "> 0")
    output = data.get("output") or {}
    if not isinstance(output, dict):
        col.error(("output",), "output must be a mapping")
        output = {}
    col.keys(output, OUTPUT_KEYS, ("output",))
    analyses = data.get("analyses")
    if not analyses:
        col.error(("analyses",), "analyses must be a non-empty list")
        analyses = []
    elif not isinstance(analyses, list):
        col.error(("analyses",), "analyses must be a list")
        analyses = []
    names = set()
    for i, a in enumerate(analyses):
        _check_analysis(col, a, ("analyses", i))
        if isinstance(a, dict):
            nm = a.get("name", f"{i:02d}_{a.get('type')}")
            if nm in names:
                col.error(("analyses", i, "name"), f"duplicate analysis name {nm!r}")
            names.add(nm)
    if not col.errors:
        try:
            _horizon(horizon, job_seed)
        except (InputError, TypeError, ValueError) as exc:
            col.error(("horizon",), str(exc))
    if col.errors:
        raise JobError(sorted(col.errors, key=lambda e: (e[0] or 0, e[1])))
    analyses = [dict(a, name=a.get("name", f"{i:02d}_{a['type']}")) for i, a in enumerate(analyses)]
    if not strict:
        analyses = [{k: v for k, v in a.items() if k in COMMON | ANALYSIS_KEYS[a["type"]]}
                    for a in analyses]
        horizon = {k: v for k, v in horizon.items() if k in HORIZON_KEYS}
    return AnalysisJob(system=system, analyses=analyses, norm=norm, seed=job_seed,
                       horizon=horizon, tolerances=tolerances, output=output,
                       warnings=col.warnings)


def _check_system(col, system):
    path = ("system",)
    if not isinstance(system, dict):
        col.error(path, "system must be a mapping")
        return
    col.keys(system, SYSTEM_KEYS, path)
    sources = [k for k in ("builtin", "steps", "generator") if k in system]
    if len(sources) != 1:
        col.error(path, "system needs exactly one of builtin, steps, generator")
        return
    src = sources[0]
    if src == "builtin":
        if system["builtin"] not in corpus.BUILTINS:
            col.error(path + ("builtin",), f"unknown builtin {system['builtin']!r}; "
                                           f"available: {', '.join(sorted(corpus.BUILTINS))}")
        if "params" in system and not isinstance(system["params"], dict):
            col.error(path + ("params",), "params must be a mapping")
    elif src == "steps":
        try:
            arr = np.array(system["steps"], dtype=float)
            if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] < 1:
                raise ValueError
        except (TypeError, ValueError):
            col.error(path + ("steps",), "steps must be a non-empty list of square matrices")
    else:
        gen = system["generator"]
        if not isinstance(gen, dict):
            col.error(path + ("generator",), "generator must be a mapping")
            return
        col.keys(gen, GENERATOR_KEYS, path + ("generator",))
        try:
            _generator_spec(gen)
        except (InputError, TypeError, ValueError, KeyError, IndexError) as exc:
            col.error(path + ("generator",), f"invalid generator: {exc}")


def _generator_spec(gen):
    blocks = []
    for b in gen["blocks"]:
        if isinstance(b, dict):
            blocks.append((int(b["size"]), tuple(b["rates"]), b["role"]))
        else:
            blocks.append((int(b[0]), tuple(b[1]), b[2]))
    return corpus.GeneratorSpec(tuple(blocks), seed=int(gen.get("seed", 0)),
                                conjugation=gen.get("conjugation", "none"),
                                cond_cap=float(gen.get("cond_cap", 20.0)),
                                length=int(gen.get("length", 64)))


def _check_gauge(col, path, spec):
    try:
        criteria.gauge_from_spec(spec)
    except InputError as exc:
        col.error(path, str(exc))


def _check_projectors(col, path, spec, count):
    if spec is None or spec in ("fixture", "coordinate", "truth"):
        return
    if isinstance(spec, dict) and set(spec) == {"coordinate"}:
        sets = spec["coordinate"]
        if not isinstance(sets, list) or len(sets) != count:
            col.error(path, f"coordinate projectors need {count} index lists")
        return
    if not isinstance(spec, list) or len(spec) != count:
        col.error(path, f"projectors must be 'fixture', 'truth', {{coordinate: ...}} "
                        f"or a list of {count} matrices")
        return
    for i, m in enumerate(spec):
        try:
            arr = np.array(m, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError
        except (TypeError, ValueError):
            col.error(path + (i,), "projector must be a square matrix")


def _check_analysis(col, a, path):
    if not isinstance(a, dict):
        col.error(path, "analysis must be a mapping")
        return
    kind = a.get("type")
    if kind not in ANALYSIS_KEYS:
        col.error(path + ("type",), f"unknown analysis type {kind!r}; "
                                    f"expected one of {', '.join(ANALYSIS_KEYS)}")
        return
    col.keys(a, COMMON | ANALYSIS_KEYS[kind], path)

    def need(key, name, cond=None, desc=None, default=None):
        if key not in a:
            if default is None:
                col.error(path, f"{kind} needs {key}")
            return default
        return _num(col, path + (key,), a[key], name, cond, desc)

    if kind in ("es", "eis"):
        need("mu", "mu", lambda v: v > 0, "> 0")
    elif kind == "datko":
        need("rho", "rho", lambda v: v > 0, "> 0")
        _check_gauge(col, path + ("gauge",), a.get("gauge"))
    elif kind == "adjoint":
        need("gamma", "gamma", lambda v: v > 0, "> 0")
        _check_gauge(col, path + ("gauge",), a.get("gauge"))
    elif kind == "instability":
        if ("rho" in a) == ("rate" in a):
            col.error(path, "instability needs exactly one of rho (< 0) or rate (> 0)")
        elif "rho" in a:
            _num(col, path + ("rho",), a["rho"], "rho", lambda v: v < 0, "< 0")
        else:
            _num(col, path + ("rate",), a["rate"], "rate", lambda v: v > 0, "> 0")
        _check_gauge(col, path + ("gauge",), a.get("gauge"))
    elif kind in ("growth", "decay"):
        om = a.get("omegas")
        if om is not None and (not isinstance(om, list) or not om
                               or any(_num(col, path + ("omegas",), w, "omega", lambda v: v > 0, "> 0")
                                      is None for w in om)):
            col.error(path + ("omegas",), "omegas must be a non-empty list of positive numbers")
    elif kind == "dichotomy":
        method = a.get("method", "pointwise")
        _check_projectors(col, path + ("projectors",), a.get("projectors"), 2)
        if method == "pointwise":
            need("nu1", "nu1", lambda v: v <= 0, "<= 0")
            need("nu2", "nu2", lambda v: v >= 0, ">= 0")
        elif method == "sum":
            need("rho1", "rho1", lambda v: v > 0, "> 0")
            need("rho2", "rho2", lambda v: v < 0, "< 0")
            _check_gauge(col, path + ("gauge",), a.get("gauge"))
        else:
            col.error(path + ("method",), "method must be 'pointwise' or 'sum'")
    elif kind == "trichotomy":
        method = a.get("method", "pointwise")
        _check_projectors(col, path + ("projectors",), a.get("projectors"), 3)
        key = "nu" if method == "pointwise" else "rho"
        if method not in ("pointwise", "sum"):
            col.error(path + ("method",), "method must be 'pointwise' or 'sum'")
            return
        vals = a.get(key)
        if not isinstance(vals, list) or len(vals) != 4:
            col.error(path + (key,), f"{key} must be a list of four numbers")
            return
        nums = [_num(col, path + (key, i), v, f"{key}[{i}]") for i, v in enumerate(vals)]
        if None in nums:
            return
        if method == "pointwise" and not (nums[0] <= nums[1] <= 0 <= nums[2] <= nums[3]):
            col.error(path + (key,), "nu must satisfy nu1 <= nu2 <= 0 <= nu3 <= nu4")
        if method == "sum" and not all(v > 0 for v in nums):
            col.error(path + (key,), "rho values must all be > 0")
        if method == "sum":
            _check_gauge(col, path + ("gauge",), a.get("gauge"))
    elif kind == "four_projector":
        spec = a.get("projectors")
        if isinstance(spec, list) and len(spec) == 3:
            _check_projectors(col, path + ("projectors",), spec, 3)
        else:
            _check_projectors(col, path + ("projectors",), spec, 4)
        mu = need("mu", "mu", lambda v: v > 0, "> 0")
        nu = need("nu", "nu", lambda v: v > 0, "> 0")
        if mu is not None and nu is not None and not mu > nu:
            col.error(path + ("mu",), "mu must be > nu")
    elif kind == "estimate":
        if a.get("direction", "stable") not in ("stable", "instable"):
            col.error(path + ("direction",), "direction must be 'stable' or 'instable'")
        search = a.get("search", [1e-6, 20.0])
        if (not isinstance(search, list) or len(search) != 2
                or any(_num(col, path + ("search",), v, "search bound") is None for v in search)
                or not 0 < float(search[0]) < float(search[1])):
            col.error(path + ("search",), "search must be [lo, hi] with 0 < lo < hi")
        if "tol" in a:
            _num(col, path + ("tol",), a["tol"], "tol", lambda v: v > 0, "> 0")
    elif kind == "axioms":
        if "triples" in a:
            tr = a["triples"]
            if not isinstance(tr, list) or not tr or any(
                    not isinstance(t, list) or len(t) != 3 for t in tr):
                col.error(path + ("triples",), "triples must be a non-empty list of [t, s, t0]")
            else:
                for i, triple in enumerate(tr):
                    vals = [_num(col, path + ("triples", i), v, "time") for v in triple]
                    if None not in vals and not (vals[0] >= vals[1] >= vals[2] >= 0):
                        col.error(path + ("triples", i), "each triple needs t >= s >= t0 >= 0")
        grid = a.get("grid")
        if grid is not None:
            if not isinstance(grid, dict):
                col.error(path + ("grid",), "grid must be a mapping")
            else:
                col.keys(grid, GRID_KEYS, path + ("grid",))
                if "count" in grid and (not isinstance(grid["count"], int) or grid["count"] < 1):
                    col.error(path + ("grid", "count"), "count must be a positive integer")


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

def _horizon(h, seed):
    kw = {"seed": int(seed)}
    if "n_max" in h:
        kw["n_max"] = int(h["n_max"])
    if "states" in h:
        kw["states"] = tuple(float(s) for s in h["states"])
    if "random_vectors" in h:
        kw["n_random_vectors"] = int(h["random_vectors"])
    if "trend_factor" in h:
        kw["trend_factor"] = float(h["trend_factor"])
    if "split" in h:
        kw["split"] = float(h["split"])
    if "vectors" in h:
        kw["vectors"] = tuple(tuple(float(c) for c in v) for v in h["vectors"])
    return criteria.Horizon(**kw)


def build_system(job):
    """Return ``(system, descriptor_dict, families, truth)``."""
    sysspec = job.system
    truth = None
    if "builtin" in sysspec:
        system, desc = corpus.builtin(sysspec["builtin"], sysspec.get("params"))
        families = desc.families
        info = _plain(_jsonable(desc.to_dict()))
    elif "steps" in sysspec:
        system = core.step_system(sysspec["steps"], name="inline")
        families = {}
        info = {"name": "inline", "steps": len(sysspec["steps"])}
    else:
        spec = _generator_spec(sysspec["generator"])
        system, truth = corpus.random_block_cocycle(spec)
        families = {}
        info = {"name": "generator", "spec": spec.to_dict(),
                "planted_exponents": {k: list(v) for k, v in truth.exponents.items()}}
    if job.norm != system.norm_kind:
        system = system.with_norm(job.norm)
    return system, info, families, truth


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items() if not callable(v)}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _family(spec, kind, system, families, truth):
    count = spectra.FAMILY_SIZES[kind]
    if spec is None:
        spec = "truth" if truth is not None else "fixture"
    if spec == "truth":
        if truth is None:
            raise InputError("'truth' projectors need a generator system")
        order = {"pair": ("stable", "unstable"),
                 "triple": ("stable", "unstable", "central")}[kind]
        return spectra.ProjectorFamily(kind, [truth.projectors[r] for r in order])
    if spec in ("fixture", "coordinate"):
        if kind not in families:
            raise InputError(f"system provides no {kind} family; give projectors explicitly")
        return spectra.ProjectorFamily(kind, families[kind])
    if isinstance(spec, dict):
        return spectra.coordinate_family(kind, system.dim, spec["coordinate"])
    if len(spec) != count:
        raise InputError(f"{kind} needs {count} projectors")
    return spectra.ProjectorFamily(kind, [np.array(m, dtype=float) for m in spec])


def _quad(spec, system, families, truth):
    if isinstance(spec, list) and len(spec) == 4:
        return spectra.ProjectorFamily("quad", [np.array(m, dtype=float) for m in spec])
    return spectra.four_from_three(_family(spec, "triple", system, families, truth))


def _run_one(a, system, horizon, job, families, truth):
    kind = a["type"]
    gauge = a.get("gauge", "identity")
    if kind == "axioms":
        if "triples" in a:
            grid = [tuple(float(v) for v in t) for t in a["triples"]]
        else:
            g = a.get("grid", {})
            t_max = float(g.get("t_max", min(10.0, system.max_time or 10.0)))
            grid = core.random_time_grid(int(g.get("count", 50)), t_max, job.seed,
                                         bool(g.get("integer", system.integer_times)))
        states = [float(s) for s in a.get("states", [0.0, 1.0, 2.5])]
        if system.x_independent and "states" not in a:
            states = states[:1]
        tol = float(job.tolerances.get("axioms", core.AXIOM_TOLERANCE))
        return core.verify_axioms(system, grid, states, tol)
    if kind == "growth":
        return criteria.fit_growth(system, horizon, a.get("omegas"))
    if kind == "decay":
        return criteria.fit_decay(system, horizon, a.get("omegas"))
    if kind == "es":
        return criteria.es_certificate(system, a["mu"], horizon)
    if kind == "eis":
        return criteria.eis_certificate(system, a["mu"], horizon)
    if kind == "datko":
        return criteria.datko_criterion(system, gauge, a["rho"], horizon)
    if kind == "adjoint":
        return criteria.adjoint_criterion(system, gauge, a["gamma"], horizon)
    if kind == "instability":
        rho = a["rho"] if "rho" in a else -float(a["rate"])
        return criteria.instability_criterion(system, gauge, rho, horizon)
    if kind == "dichotomy":
        pair = _family(a.get("projectors"), "pair", system, families, truth)
        if a.get("method", "pointwise") == "sum":
            return spectra.dichotomy_sum_criterion(system, pair, a["rho1"], a["rho2"], gauge, horizon)
        return spectra.dichotomy_certificate(system, pair, a["nu1"], a["nu2"], horizon)
    if kind == "trichotomy":
        triple = _family(a.get("projectors"), "triple", system, families, truth)
        if a.get("method", "pointwise") == "sum":
            return spectra.trichotomy_sum_criterion(system, triple, a["rho"], horizon, gauge)
        return spectra.trichotomy_certificate(system, triple, a["nu"], horizon)
    if kind == "four_projector":
        quad = _quad(a.get("projectors"), system, families, truth)
        return spectra.four_projector_certificate(system, quad, a["mu"], a["nu"], horizon)
    if kind == "estimate":
        lo, hi = a.get("search", [1e-6, 20.0])
        return criteria.estimate_exponent(system, a.get("direction", "stable"), horizon,
                                          (float(lo), float(hi)), float(a.get("tol", 1e-4)))
    raise InputError(f"unknown analysis type {kind!r}")


def _verdict(result):
    for attr in ("holds", "passed"):
        if hasattr(result, attr):
            return bool(getattr(result, attr))
    return result.value is not None


@dataclass
class Report:
    job: AnalysisJob
    system: dict
    results: list        # (analysis dict, result object or None, error dict or None)
    generated_at: str = ""

    def to_dict(self):
        analyses = []
        for a, res, err in self.results:
            block = {"name": a["name"], "type": a["type"]}
            if err is not None:
                block.update(status="error", error=err)
            else:
                block.update(status="ok", verdict=_verdict(res), result=res.to_dict())
            analyses.append(block)
        return _jsonable({
            "provenance": {"tool": "skewflow", "version": __version__, "seed": self.job.seed,
                           "job": self.job.to_dict()},
            "system": self.system,
            "summary": {b["name"]: (b["verdict"] if b["status"] == "ok" else "error")
                        for b in analyses},
            "analyses": analyses,
            "generated_at": self.generated_at,
        })


def run(job):
    """Execute analyses in declared order; failures become per-analysis error blocks."""
    system, info, families, truth = build_system(job)
    horizon = _horizon(job.horizon, job.seed)
    results = []
    for a in job.analyses:
        try:
            res = _run_one(a, system, horizon, job, families, truth)
            results.append((a, res, None))
        except SkewFlowError as exc:
            err = {"kind": type(exc).__name__, "message": str(exc)}
            if getattr(exc, "witness", None) is not None:
                err["witness"] = exc.witness
            results.append((a, None, err))
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return Report(job, info, results, stamp)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _g(v):
    return "%.17g" % float(v)


def csv_tables(report):
    """``{file name: (header, rows)}`` for every successful analysis."""
    out = {}
    for a, res, err in report.results:
        if err is not None:
            continue
        if isinstance(res, core.AxiomReport):
            rows = [(_g(r[0]), _g(r[1]), _g(r[4])) for r in res.rows]
            out[f"{a['name']}.csv"] = (AXIOM_HEADER, rows)
        elif isinstance(res, criteria.EnvelopeBound):
            rows = [(str(n), _g(m), _g(w), str(v)) for n, m, w, v in res.rows()]
            out[f"{a['name']}.csv"] = (ENVELOPE_HEADER, rows)
        elif isinstance(res, criteria.ExponentEstimate):
            rows = [(_g(mu), str(int(ok))) for mu, ok in res.probes]
            out[f"{a['name']}.csv"] = (ESTIMATE_HEADER, rows)
        else:
            rows = [(str(n), _g(c), _g(r), str(v)) for n, c, r, v in res.rows()]
            out[f"{a['name']}.csv"] = (CERT_HEADER, rows)
    return out


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def emit(report, out_dir, formats=("structured", "csv")):
    """Write ``report.json``, ``job.yaml`` and one CSV per analysis into ``out_dir``."""
    written = []
    try:
        os.makedirs(out_dir, exist_ok=True)
        if "structured" in formats:
            path = os.path.join(out_dir, "report.json")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(report.to_dict(), fh, indent=2, sort_keys=True, allow_nan=False)
                fh.write("\n")
            written.append(path)
            path = os.path.join(out_dir, "job.yaml")
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(report.job.dump())
            written.append(path)
        if "csv" in formats:
            for name, (header, rows) in csv_tables(report).items():
                path = os.path.join(out_dir, name)
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(render_csv(header, rows))
                written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {exc.filename or out_dir}: {exc.strerror}") from exc
    return written
