"""Experiment configuration, orchestration and export.

A run is described by a JSON document::

    {
      "mode": "ibm",
      "model": {"preset": "dieckmann-doebeli", "marker": "two-allele"},
      "K": 500,
      "horizon": 50.0,
      "replicates": 4,
      "seed": 12345,
      "sampling_interval": 1.0,
      "output_dir": "runs/demo",
      "threads": 1,
      "params": {"x0": -1.0, "u0": "a"}
    }

``model`` is either a preset reference (``preset`` plus keyword
overrides) or a full model document.  Replicate ``i`` draws from stream
``derive_seed(seed, i)``; results are collected and written in replicate
order, so outputs do not depend on ``threads``.
"""
from __future__ import annotations

import json
import math
import time as _time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .analysis import compare_ibm_to_wf, fixation_experiment
from .ibm import init_monomorphic, inject_mutant, run_until
from .io import event_rows, read_csv, sha256, snapshot_rows, write_csv
from .limits import (
    FVParticleSystem,
    WFParams,
    dimorphic_fv_run,
    fv_sample,
    sfvp_run,
    tss_run,
    wf_simulate,
)
from .model import Discrete, ModelError, ModelSpec, classify_iif, equilibrium_mass, preset
from .rng import derive_seed, make_rng

MODES = ("ibm", "tss", "fv", "wf", "sfvp", "dimorphic-fv", "invasion", "compare-wf", "check-iif")
FIGURES = ("fig2-support", "fig3-allele-counts", "fig4-dimorphic")
_U64 = 2**64


class ConfigError(ValueError):
    pass


class MissingSeries(LookupError):
    pass


class AllReplicatesFailed(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    mode: str
    model: dict
    seed: int | None
    horizon: float = 1.0
    K: int | None = None
    replicates: int = 1
    sampling_interval: float | None = None
    output_dir: str = "ecoevo-run"
    threads: int = 1
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def build_model(self) -> ModelSpec:
        return build_model(self.model, self.K)


def build_model(doc: dict, K: int | None = None) -> ModelSpec:
    doc = dict(doc)
    if "preset" in doc:
        name = doc.pop("preset")
        if K is not None:
            doc["K"] = K
        return preset(name, **doc)
    spec = ModelSpec.from_dict(doc)
    return spec.with_changes(K=K) if K is not None else spec


def _field(doc: dict, key: str, kind, default=Ellipsis, check=None, what: str = ""):
    if key not in doc or doc[key] is None:
        if default is Ellipsis:
            raise ConfigError(f"{key}: required field is missing")
        return default
    v = doc[key]
    try:
        if kind is int and (isinstance(v, bool) or int(v) != v):
            raise TypeError
        v = kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {kind.__name__}, got {doc[key]!r}") from None
    if check is not None and not check(v):
        raise ConfigError(f"{key}: {what} (got {v!r})")
    return v


def parse_config(source: str | Path | dict) -> ExperimentConfig:
    """Validate a configuration file (or an already-loaded document)."""
    if isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file {source} does not exist") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {f for f in ExperimentConfig.__dataclass_fields__}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown field")
    mode = _field(doc, "mode", str, check=lambda m: m in MODES, what=f"must be one of {', '.join(MODES)}")
    model = doc.get("model")
    if not isinstance(model, dict):
        raise ConfigError("model: expected a preset reference or a model document")
    seed = _field(
        doc, "seed", int, default=None if mode == "check-iif" else Ellipsis,
        check=lambda s: 0 <= s < _U64, what="must be an unsigned 64-bit integer",
    )
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object")
    cfg = ExperimentConfig(
        mode=mode,
        model=model,
        seed=seed,
        horizon=_field(doc, "horizon", float, 1.0, lambda h: h >= 0 and math.isfinite(h), "must be finite and >= 0"),
        K=_field(doc, "K", int, None, lambda k: k >= 1, "must be >= 1"),
        replicates=_field(doc, "replicates", int, 1, lambda r: r >= 0, "must be >= 0"),
        sampling_interval=_field(doc, "sampling_interval", float, None, lambda s: s > 0, "must be positive"),
        output_dir=_field(doc, "output_dir", str, "ecoevo-run"),
        threads=_field(doc, "threads", int, 1, lambda t: t >= 1, "must be >= 1"),
        params=params,
    )
    try:
        cfg.build_model()
    except ModelError as e:
        raise ConfigError(f"model: {e}") from None
    return cfg


# ---------------------------------------------------------------------------
# replicate workers
#
# Each worker returns {"files": {name: (schema, rows)}, "summary": {...}}.


def _label(spec: ModelSpec):
    ms = spec.marker_space
    if isinstance(ms, Discrete):
        return ms.label
    return lambda u: u


def _marker(spec: ModelSpec, u):
    ms = spec.marker_space
    return ms.index(u) if isinstance(ms, Discrete) else float(u)


def _times(cfg: ExperimentConfig) -> np.ndarray:
    dt = cfg.sampling_interval or max(cfg.horizon, 1e-12)
    n = int(math.floor(cfg.horizon / dt + 1e-9))
    return np.arange(n + 1) * dt


def _rep_ibm(cfg, spec, i, rng):
    p = cfg.params
    x0 = float(p.get("x0", 0.0))
    n0 = float(p.get("n0", equilibrium_mass(spec, x0)))
    state = init_monomorphic(spec, x0, p.get("u0", _label(spec)(0.0)), n0)
    for y, v in p.get("inject", []):
        inject_mutant(state, y, v)
    lab = _label(spec)
    snaps: list[tuple] = []
    res = run_until(
        state, cfg.horizon, rng,
        recorder=lambda t, s: snaps.extend(snapshot_rows(t, s, lab)),
        sample_interval=cfg.sampling_interval or max(cfg.horizon, 1e-12),
        log_events=bool(p.get("log_events", False)),
    )
    files = {"snapshot": ("snapshot", snaps)}
    if res.event_log is not None:
        files["events"] = ("events", event_rows(res.event_log, lab))
    return {"files": files, "summary": {"status": res.status, "n_events": res.n_events, "final_mass": state.mass}}


def _rep_tss(cfg, spec, i, rng):
    p = cfg.params
    path = tss_run(spec, float(p.get("x0", 0.0)), _marker(spec, p.get("u0", 0.0)), cfg.horizon, rng)
    rows = []
    for k, s in enumerate(path):
        jump = 0 < k < len(path) - 1
        rows.append((s.time, s.trait, float(equilibrium_mass(spec, s.trait)), s.marker, 0.0, 0.0, jump))
    return {"files": {"trajectory": ("trajectory", rows)}, "summary": {"jumps": len(path) - 2}}


def _rep_fv(cfg, spec, i, rng):
    p = cfg.params
    x = float(p.get("x", p.get("x0", 0.0)))
    sys = FVParticleSystem.for_trait(spec, x, p.get("u0", _label(spec)(0.0)), N=int(p.get("N", 500)),
                                     r_cfg=float(p.get("r_cfg", 100.0)))
    tr = fv_sample(sys, _times(cfg), rng, heterozygosity=True)
    rows = [(t, x, sys.n_hat, m, v, h, False) for t, m, v, h in zip(tr.times, tr.mean, tr.var, tr.heterozygosity)]
    files = {"trajectory": ("trajectory", rows)}
    if p.get("particles", False):
        files["particles"] = ("particles", [(sys.time, u, w) for u, w in sorted(sys.atoms().items())])
    return {"files": files, "summary": {"n_events": sys.n_events}}


def _rep_wf(cfg, spec, i, rng):
    p = cfg.params
    x = float(p.get("x", p.get("x0", 0.0)))
    params = WFParams.for_trait(spec, x)
    dt = float(p.get("dt", 1e-4))
    w = float(p.get("w0", 0.5))
    times = _times(cfg)
    rows, clamps, steps = [], 0, 0
    t_prev = 0.0
    for t in times:
        if t > t_prev:
            b = wf_simulate(w, t - t_prev, params, rng, dt=dt, paths=1)
            w, clamps, steps = float(b.w[0]), clamps + b.clamps, steps + b.steps
        t_prev = t
        rows.append((t, x, params.n_hat, 1.0 - w, w * (1 - w), 2 * w * (1 - w), False))
    return {"files": {"trajectory": ("trajectory", rows)}, "summary": {"clamps": clamps, "steps": steps}}


def _rep_sfvp(cfg, spec, i, rng):
    p = cfg.params
    res = sfvp_run(
        spec, float(p.get("x0", 0.0)), p.get("u0", _label(spec)(0.0)), cfg.horizon, rng,
        sample_interval=cfg.sampling_interval, N=int(p.get("N", 500)), r_cfg=float(p.get("r_cfg", 100.0)),
        dt=float(p.get("dt", 1e-3)),
    )
    rows = [
        (r.time, r.trait, r.n_hat, r.marker_mean, r.marker_var, r.marker_heterozygosity, r.jump) for r in res.records
    ]
    return {"files": {"trajectory": ("trajectory", rows)}, "summary": {"status": res.status, "jumps": res.n_jumps}}


def _rep_dimorphic(cfg, spec, i, rng):
    p = cfg.params
    x0, y = float(p["x0"]), float(p["y"])
    lab = _label(spec)
    rng2 = make_rng(int(rng.integers(0, 2**63)))
    res = dimorphic_fv_run(
        spec, x0, y, p.get("u1", lab(0.0)), p.get("u2", lab(0.0)), cfg.horizon, (rng, rng2),
        sample_interval=cfg.sampling_interval or max(cfg.horizon, 1e-12), N=int(p.get("N", 500)),
        r_cfg=float(p.get("r_cfg", 100.0)), heterozygosity=True,
    )
    rows = []
    for trait, n, tr in ((x0, res.n1, res.trajectories[0]), (y, res.n2, res.trajectories[1])):
        rows += [(t, trait, n, m, v, h, False) for t, m, v, h in zip(tr.times, tr.mean, tr.var, tr.heterozygosity)]
    rows.sort(key=lambda r: (r[0], r[1]))
    return {"files": {"trajectory": ("trajectory", rows)}, "summary": {"n1": res.n1, "n2": res.n2}}


_REPLICATE = {
    "ibm": _rep_ibm,
    "tss": _rep_tss,
    "fv": _rep_fv,
    "wf": _rep_wf,
    "sfvp": _rep_sfvp,
    "dimorphic-fv": _rep_dimorphic,
}


def _run_replicate(cfg: ExperimentConfig, i: int) -> dict:
    try:
        spec = cfg.build_model()
        rng = make_rng(derive_seed(cfg.seed, i))
        out = _REPLICATE[cfg.mode](cfg, spec, i, rng)
        out["ok"] = True
    except Exception as e:  # recorded in the manifest, the batch goes on
        out = {"ok": False, "error": f"{type(e).__name__}: {e}", "files": {}, "summary": {}}
    out["index"] = i
    return out


def _map(fn, items, threads: int):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ProcessPoolExecutor(min(threads, len(items))) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


class _Call:
    """Picklable ``fn(cfg, i)`` partial for process pools."""

    def __init__(self, fn, cfg):
        self.fn, self.cfg = fn, cfg

    def __call__(self, i):
        return self.fn(self.cfg, i)


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_clock_seconds: float
    replicates: list[dict]
    files: list[dict]
    status: str

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def all_failed(self) -> bool:
        return self.status == "all-replicates-failed"


def _write(out: Path, name: str, schema: str, rows, written: list[Path]):
    written.append(write_csv(out / name, schema, rows))


def _write_json(path: Path, doc: Any, written: list[Path]):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n")
    written.append(path)


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Run every replicate of ``cfg``, write its outputs and a ``manifest.json``."""
    t0 = _time.perf_counter()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    reps: list[dict] = []
    spec = cfg.build_model()

    if cfg.mode in _REPLICATE:
        results = _map(_Call(_run_replicate, cfg), range(cfg.replicates), cfg.threads)
        for r in results:
            i = r["index"]
            entry = {"index": i, "seed": derive_seed(cfg.seed, i), "ok": r["ok"], **r["summary"]}
            if not r["ok"]:
                entry["error"] = r["error"]
            reps.append(entry)
            for key, (schema, rows) in r["files"].items():
                _write(out, f"{cfg.mode}_rep{i:04d}_{key}.csv", schema, rows, written)
    elif cfg.mode == "invasion":
        reps = _run_invasion(cfg, spec, out, written)
    elif cfg.mode == "compare-wf":
        reps = _run_compare(cfg, spec, out, written)
    elif cfg.mode == "check-iif":
        grid = int(cfg.params.get("grid", 21))
        _write(out, "iif_grid.csv", "iif-grid", iif_grid(spec, grid), written)

    failed = sum(not r.get("ok", True) for r in reps)
    status = "all-replicates-failed" if reps and failed == len(reps) else "ok"
    manifest = RunManifest(
        cfg.to_dict(), __version__, 0.0, reps,
        [{"path": p.name, "sha256": sha256(p)} for p in written], status,
    )
    manifest.wall_clock_seconds = _time.perf_counter() - t0
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return manifest


def _run_invasion(cfg, spec, out: Path, written) -> list[dict]:
    p = cfg.params
    rep = fixation_experiment(
        spec, float(p.get("x0", -1.0)), float(p.get("y", 0.0)), cfg.replicates, cfg.seed,
        t_K=p.get("t_K"), epsilon=p.get("epsilon"), u0=_marker(spec, p.get("u0", _label(spec)(0.0))),
        burn_in=float(p.get("burn_in", 0.0)), workers=cfg.threads,
    )
    doc = rep.to_dict()
    trials = doc.pop("trials")
    doc["config"] = cfg.to_dict()
    _write_json(out / "invasion_report.json", doc, written)
    _write(out, "invasion_trials.csv", "invasion-trials", [tuple(t.values()) for t in trials], written)
    return [{"index": t["index"], "seed": derive_seed(cfg.seed, t["index"]), "ok": True} for t in trials]


def _run_compare(cfg, spec, out: Path, written) -> list[dict]:
    p = cfg.params
    K = cfg.K or spec.K
    cmp = compare_ibm_to_wf(
        spec, cfg.horizon, K, cfg.replicates, cfg.seed, trait=float(p.get("trait", p.get("x", 0.0))),
        w0=float(p.get("w0", 0.5)), dt=float(p.get("dt", 1e-4)),
    )
    doc = cmp.to_dict()
    ibm, wf = doc.pop("ibm"), doc.pop("wf")
    doc["mean_gap_in_se"] = cmp.mean_gap_in_se
    doc["config"] = cfg.to_dict()
    _write_json(out / "compare_wf_report.json", doc, written)
    rows = [(k, "ibm", w) for k, w in enumerate(ibm)] + [(k, "wf", w) for k, w in enumerate(wf)]
    _write(out, "compare_wf_samples.csv", "wf-samples", rows, written)
    return [{"index": i, "seed": derive_seed(cfg.seed, i), "ok": True} for i in range(cfg.replicates)]


def iif_grid(spec: ModelSpec, n: int) -> list[tuple[float, float, str]]:
    """IIF classification of every ordered pair on an ``n``-point trait grid."""
    if n < 2:
        raise ConfigError("params.grid: need at least 2 points")
    g = spec.trait_space.grid(n)
    return [
        (float(x), float(y), "degenerate" if x == y else classify_iif(spec, float(x), float(y)).value)
        for x in g
        for y in g
    ]


# ---------------------------------------------------------------------------
# plot data


def _manifest(run_dir: Path) -> dict:
    try:
        return json.loads((run_dir / "manifest.json").read_text())
    except FileNotFoundError:
        raise MissingSeries(f"{run_dir} holds no run outputs") from None


def emit_plot_data(run_dir: str | Path, figure: str) -> Path:
    """Write the tidy table behind ``figure`` into ``run_dir`` and register it in the manifest."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    run_dir = Path(run_dir)
    man = _manifest(run_dir)
    mode = man["config"]["mode"]
    cfg = ExperimentConfig(**man["config"])
    two_allele = isinstance(cfg.build_model().marker_space, Discrete)
    files = sorted(f["path"] for f in man["files"])
    rows: list[tuple] = []
    if figure in ("fig2-support", "fig3-allele-counts"):
        if mode != "ibm" or (figure == "fig3-allele-counts") != two_allele:
            raise MissingSeries(f"{figure} needs an ibm run with a {'two-allele' if figure.startswith('fig3') else 'continuous'} marker")
        for name in (f for f in files if f.endswith("_snapshot.csv")):
            rep = int(name.split("_rep")[1][:4])
            table: dict[tuple[str, str], list] = defaultdict(list)
            for r in read_csv(run_dir / name)[1]:
                table[(r["time"], r["trait"])].append((r["marker"], int(r["count"])))
            for (t, x), items in sorted(table.items(), key=lambda kv: (float(kv[0][0]), float(kv[0][1]))):
                if two_allele:
                    c = Counter()
                    for u, n in items:
                        c[u] += n
                    rows.append((rep, float(t), float(x), c["a"], c["A"]))
                else:
                    us = [float(u) for u, _ in items]
                    rows.append((rep, float(t), float(x), sum(n for _, n in items), min(us), max(us)))
    else:
        if mode != "dimorphic-fv":
            raise MissingSeries("fig4-dimorphic needs a dimorphic-fv run")
        for name in (f for f in files if f.endswith("_trajectory.csv")):
            rep = int(name.split("_rep")[1][:4])
            for r in read_csv(run_dir / name)[1]:
                rows.append((rep, float(r["time"]), float(r["trait"]), float(r["marker_mean"]),
                             float(r["marker_var"]), float(r["marker_heterozygosity"])))
    if not rows:
        raise MissingSeries(f"no data for {figure} in {run_dir}")
    path = write_csv(run_dir / f"{figure}.csv", figure, rows)
    man["files"] = [f for f in man["files"] if f["path"] != path.name] + [{"path": path.name, "sha256": sha256(path)}]
    (run_dir / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")
    return path
