"""Seeded experiment sweeps over noise variance and IRS count, with CSV output."""

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from importlib import resources

from .scene import IrsConfig, SceneConfig, build_channels, draw_reflectivities
from .uber import UberConfig, run_uber

SCHEMA_VERSION = 1
WORKERS_ENV = "IRSRADAR_WORKERS"
CSV_COLUMNS = ("seed", "sigma2", "m_count", "outer_iter", "fisher", "crlb", "wall_time_ms")
SWEEP_KINDS = ("sigma", "irs_count", "trace")
TEMPLATES = {"fig1": "fig1.json", "fig1b": "fig1b.json"}


class SpecError(ValueError):
    """Experiment spec could not be parsed or failed validation."""


@dataclass(frozen=True)
class Sweep:
    kind: str
    values: tuple = ()
    m_values: tuple = ()


@dataclass(frozen=True)
class ExperimentSpec:
    scene: SceneConfig
    uber: UberConfig
    sweep: Sweep
    n_seeds: int = 1
    base_seed: int = 0
    output_path: str = None

    @property
    def seeds(self):
        return [self.base_seed + i for i in range(self.n_seeds)]


@dataclass(frozen=True)
class ResultRow:
    seed: int
    sigma2: float
    m_count: int
    outer_iter: object  # int, or "final"
    fisher: float
    crlb: float
    wall_time_ms: float = None

    def sort_key(self):
        it = self.outer_iter
        return (self.sigma2, self.m_count, self.seed, (1, 0) if it == "final" else (0, it))


def _require(d, key, where):
    if key not in d:
        raise SpecError(f"{where}: missing required field '{key}'")
    return d[key]


def _known(d, cls, where, extra=()):
    allowed = {f.name for f in fields(cls)} | set(extra)
    unknown = set(d) - allowed
    if unknown:
        raise SpecError(f"{where}: unknown field(s) {sorted(unknown)}")


def _scene_from_dict(d):
    if not isinstance(d, dict):
        raise SpecError("scene: expected an object")
    irs_raw = _require(d, "irs_list", "scene")
    if not isinstance(irs_raw, list) or not irs_raw:
        raise SpecError("scene.irs_list: expected a non-empty list")
    _known(d, SceneConfig, "scene")
    irs = []
    for i, item in enumerate(irs_raw):
        where = f"scene.irs_list[{i}]"
        _known(item, IrsConfig, where)
        try:
            irs.append(IrsConfig(
                position=tuple(_require(item, "position", where)),
                n_elements=int(item.get("n_elements", 8)),
                spacing=item.get("spacing"),
            ))
        except (TypeError, ValueError) as exc:
            raise SpecError(f"{where}: {exc}") from None
    kwargs = {k: v for k, v in d.items() if k != "irs_list"}
    for key in ("radar_position", "target_position"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        return SceneConfig(irs_list=tuple(irs), **kwargs)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"scene: {exc}") from None


def _uber_from_dict(d):
    _known(d, UberConfig, "uber", extra=())
    if "initial_waveform" in d or "initial_phases" in d:
        raise SpecError("uber: initial designs cannot be given in a spec file")
    try:
        return UberConfig(**d)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"uber: {exc}") from None


def _sweep_from_dict(d, n_irs):
    kind = _require(d, "kind", "sweep")
    if kind not in SWEEP_KINDS:
        raise SpecError(f"sweep.kind: expected one of {SWEEP_KINDS}, got {kind!r}")
    _known(d, Sweep, "sweep")
    values = tuple(d.get("values", ()))
    m_values = tuple(int(m) for m in d.get("m_values", ()))
    if kind != "trace" and not values:
        raise SpecError(f"sweep.values: {kind} sweep needs a non-empty list")
    if kind == "sigma":
        if any(not (isinstance(v, (int, float)) and v > 0) for v in values):
            raise SpecError("sweep.values: noise variances must be positive numbers")
        values = tuple(float(v) for v in values)
    if kind == "irs_count":
        m_values, values = tuple(int(v) for v in values), ()
    for m in m_values:
        if not 1 <= m <= n_irs:
            raise SpecError(f"sweep: IRS count {m} outside [1, {n_irs}]")
    return Sweep(kind, values, m_values)


def spec_from_dict(d):
    """Validate a parsed spec document and apply defaults."""
    if not isinstance(d, dict):
        raise SpecError("spec: expected a JSON object")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SpecError(f"schema_version: unsupported version {version!r}")
    allowed = {"schema_version", "scene", "uber", "sweep", "n_seeds", "base_seed", "output_path"}
    unknown = set(d) - allowed
    if unknown:
        raise SpecError(f"spec: unknown field(s) {sorted(unknown)}")
    scene = _scene_from_dict(_require(d, "scene", "spec"))
    uber = _uber_from_dict(d.get("uber", {}))
    sweep = _sweep_from_dict(d.get("sweep", {"kind": "trace"}), scene.n_irs)
    n_seeds = d.get("n_seeds", 1)
    if not isinstance(n_seeds, int) or n_seeds < 1:
        raise SpecError("n_seeds: must be an integer >= 1")
    base_seed = d.get("base_seed", 0)
    if not isinstance(base_seed, int) or base_seed < 0:
        raise SpecError("base_seed: must be a non-negative integer")
    return ExperimentSpec(scene, uber, sweep, n_seeds, base_seed, d.get("output_path"))


def load_spec(path):
    """Read and validate a JSON experiment spec.

    Raises
    ------
    SpecError
        On malformed JSON (with line and column) or on a violated constraint
        (naming the offending field).
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(doc)


def template_text(name):
    if name not in TEMPLATES:
        raise SpecError(f"unknown template {name!r}; choose from {sorted(TEMPLATES)}")
    return resources.files("irsradar.data").joinpath(TEMPLATES[name]).read_text(encoding="utf-8")


def template_path(name):
    if name not in TEMPLATES:
        raise SpecError(f"unknown template {name!r}; choose from {sorted(TEMPLATES)}")
    return str(resources.files("irsradar.data").joinpath(TEMPLATES[name]))


def _run_cell(job):
    scene, uber, seed, sigma2, m_count, keep_trace = job
    start = time.perf_counter()
    # one draw per seed for the full IRS list; smaller M use a prefix
    alpha = draw_reflectivities(scene.n_irs, seed)[:m_count]
    sub = scene.with_irs_count(m_count).with_noise_variance(sigma2)
    try:
        result = run_uber(sub, build_channels(sub), alpha, uber, seed=seed)
    except Exception as exc:
        raise RuntimeError(f"run failed (seed={seed}, sigma2={sigma2}, M={m_count}): {exc}") from exc
    wall = (time.perf_counter() - start) * 1e3
    fisher = result.fisher_trace if keep_trace else result.fisher_trace[-1:]
    return [float(f) for f in fisher], wall


def worker_count():
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _execute(jobs, workers):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [_run_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_run_cell, jobs))


def _rows(jobs, outputs, trace):
    rows = []
    for (scene, uber, seed, sigma2, m_count, _), (fisher, wall) in zip(jobs, outputs):
        if trace:
            for it, f in enumerate(fisher):
                rows.append(ResultRow(seed, sigma2, m_count, it, f, 1.0 / f, wall))
        else:
            rows.append(ResultRow(seed, sigma2, m_count, "final", fisher[-1], 1.0 / fisher[-1], wall))
    return sorted(rows, key=ResultRow.sort_key)


def run_sigma_sweep(spec, workers=None):
    """Final-CRLB rows for every noise variance x seed (x IRS count when ``m_values`` is set)."""
    if spec.sweep.kind != "sigma":
        raise SpecError("spec does not describe a sigma sweep")
    m_values = spec.sweep.m_values or (spec.scene.n_irs,)
    jobs = [(spec.scene, spec.uber, seed, s2, m, False)
            for s2 in spec.sweep.values for m in m_values for seed in spec.seeds]
    return _rows(jobs, _execute(jobs, workers), trace=False)


def run_irs_count_sweep(spec, workers=None):
    if spec.sweep.kind != "irs_count":
        raise SpecError("spec does not describe an IRS-count sweep")
    s2 = spec.scene.noise_variance
    jobs = [(spec.scene, spec.uber, seed, s2, m, False)
            for m in spec.sweep.m_values for seed in spec.seeds]
    return _rows(jobs, _execute(jobs, workers), trace=False)


def run_trace(spec, workers=None):
    """One row per outer iteration (0 .. outer_iterations) for every seed."""
    s2 = spec.scene.noise_variance
    m_values = spec.sweep.m_values or (spec.scene.n_irs,)
    jobs = [(spec.scene, spec.uber, seed, s2, m, True) for m in m_values for seed in spec.seeds]
    return _rows(jobs, _execute(jobs, workers), trace=True)


def run_spec(spec, workers=None):
    runner = {"sigma": run_sigma_sweep, "irs_count": run_irs_count_sweep, "trace": run_trace}
    return runner[spec.sweep.kind](spec, workers)


def format_csv(rows, timing=False):
    """Render rows as CSV text.

    Floats use ``repr`` so they round-trip exactly. Wall times are left blank
    unless ``timing`` is set, which keeps the output byte-reproducible.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        wall = repr(round(r.wall_time_ms, 3)) if timing and r.wall_time_ms is not None else ""
        writer.writerow([r.seed, repr(r.sigma2), r.m_count, r.outer_iter,
                         repr(r.fisher), repr(r.crlb), wall])
    return buf.getvalue()


def write_csv(rows, path, timing=False):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows, timing))
