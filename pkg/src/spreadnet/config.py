"""Experiment configuration files (YAML) with schema versioning and field diagnostics."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError, SpreadNetError
from .graphgen import Family
from .network import SpreadParams

SCHEMA_VERSION = 1
KINDS = ("compare", "fixed_point", "sweep", "curves", "lattice")
MODELS = ("bass", "si", "general")
SWEEP_PARAMS = ("lambda", "d", "p", "q", "i0")
SWEEP_METRICS = ("half_life", "f_infinity", "f_at_t")

_FIELDS = {
    "schema", "name", "kind", "model", "family", "params", "runs", "horizon", "grid", "seed",
    "out", "resample_graph", "tolerance", "stderr_factor", "workers", "sweep", "degrees",
}


@dataclass(frozen=True)
class SweepSpec:
    param: str
    start: float
    stop: float
    points: int
    metric: str
    t: Optional[float] = None

    def values(self):
        import numpy as np
        v = np.linspace(self.start, self.stop, self.points)
        return np.round(v).astype(int) if self.param == "d" else v


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a graph family, spreading parameters and what to compute.

    ``kind`` selects the computation: ``compare`` (simulation ensemble plus
    the exact curve), ``fixed_point`` and ``sweep`` (scalar metric against a
    parameter), ``curves`` (exact d-regular curves for several d) and
    ``lattice`` (torus ensemble against a random regular graph of equal degree).
    """

    name: str
    family: Family
    params: SpreadParams
    model: str = "general"
    kind: str = "compare"
    runs: int = 10
    horizon: float = 100.0
    grid: int = 201
    seed: int = 0
    out: str = "."
    resample_graph: bool = True
    tolerance: Optional[float] = None
    stderr_factor: float = 4.0
    workers: int = 1
    sweep: Optional[SweepSpec] = None
    degrees: tuple = ()
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.model == "bass" and not (self.params.i0 == 0 and self.params.p > 0):
            raise ConfigError("field 'params': model bass requires i0 = 0 and p > 0")
        if self.model == "si" and not (self.params.p == 0 and 0 < self.params.i0 < 1):
            raise ConfigError("field 'params': model si requires p = 0 and 0 < i0 < 1")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _line_map(text: str) -> dict:
    """Top-level key -> 1-based line number, for diagnostics."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def _fail(key: str, lines: dict, msg: str, source: str):
    where = f"{source}:{lines[key]}" if key in lines else source
    raise ConfigError(f"{where}: field '{key}': {msg}")


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Validate a YAML document and build an :class:`ExperimentConfig`."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"{where}: invalid YAML: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: expected a mapping at the top level")
    lines = _line_map(text)

    unknown = sorted(set(raw) - _FIELDS)
    if unknown:
        _fail(unknown[0], lines, "unknown field", source)
    if raw.get("schema") != SCHEMA_VERSION:
        _fail("schema", lines, f"must be {SCHEMA_VERSION}, got {raw.get('schema')!r}", source)
    for key in ("name", "family", "params"):
        if key not in raw:
            raise ConfigError(f"{source}: missing required field '{key}'")

    def typed(key, kind, default=None, check=None, msg=""):
        if key not in raw or raw[key] is None:
            return default
        v = raw[key]
        if kind is float and isinstance(v, int) and not isinstance(v, bool):
            v = float(v)
        if not isinstance(v, kind) or (kind is int and isinstance(v, bool)):
            _fail(key, lines, f"expected {kind.__name__}, got {type(v).__name__}", source)
        if check is not None and not check(v):
            _fail(key, lines, msg, source)
        return v

    name = typed("name", str)
    kind = typed("kind", str, "compare", lambda v: v in KINDS, f"must be one of {KINDS}")
    model = typed("model", str, "general", lambda v: v in MODELS, f"must be one of {MODELS}")
    try:
        family = Family.parse(typed("family", str))
        family.validate()
    except SpreadNetError as exc:
        _fail("family", lines, str(exc), source)

    p = raw["params"]
    if not isinstance(p, dict) or set(p) - {"p", "q", "i0"}:
        _fail("params", lines, "expected a mapping with keys p, q, i0", source)
    try:
        params = SpreadParams(float(p.get("p", 0.0)), float(p.get("q", 0.0)), float(p.get("i0", 0.0)))
    except (SpreadNetError, TypeError, ValueError) as exc:
        _fail("params", lines, str(exc), source)

    sweep = None
    if raw.get("sweep") is not None:
        s = raw["sweep"]
        need = {"param", "start", "stop", "points", "metric"}
        if not isinstance(s, dict) or need - set(s) or set(s) - need - {"t"}:
            _fail("sweep", lines, f"expected keys {sorted(need)} (and optional t)", source)
        if s["param"] not in SWEEP_PARAMS:
            _fail("sweep", lines, f"param must be one of {SWEEP_PARAMS}", source)
        if s["metric"] not in SWEEP_METRICS:
            _fail("sweep", lines, f"metric must be one of {SWEEP_METRICS}", source)
        if s["metric"] == "f_at_t" and s.get("t") is None:
            _fail("sweep", lines, "metric f_at_t needs t", source)
        if not int(s["points"]) >= 2 or not float(s["stop"]) > float(s["start"]):
            _fail("sweep", lines, "need points >= 2 and stop > start", source)
        sweep = SweepSpec(s["param"], float(s["start"]), float(s["stop"]), int(s["points"]),
                          s["metric"], None if s.get("t") is None else float(s["t"]))
    if kind in ("fixed_point", "sweep") and sweep is None:
        raise ConfigError(f"{source}: kind {kind} needs a 'sweep' section")

    degrees = raw.get("degrees") or ()
    if not isinstance(degrees, (list, tuple)) or not all(isinstance(d, int) and d >= 2 for d in degrees):
        _fail("degrees", lines, "expected a list of integers >= 2", source)
    if kind == "curves" and not degrees:
        raise ConfigError(f"{source}: kind curves needs a 'degrees' list")

    try:
        return ExperimentConfig(
            name=name, family=family, params=params, model=model, kind=kind,
            runs=typed("runs", int, 10, lambda v: v >= 1, "must be >= 1"),
            horizon=typed("horizon", float, 100.0, lambda v: v > 0, "must be > 0"),
            grid=typed("grid", int, 201, lambda v: v >= 2, "must be >= 2"),
            seed=typed("seed", int, 0, lambda v: v >= 0, "must be >= 0"),
            out=typed("out", str, "."),
            resample_graph=typed("resample_graph", bool, True),
            tolerance=typed("tolerance", float, None, lambda v: v >= 0, "must be >= 0"),
            stderr_factor=typed("stderr_factor", float, 4.0, lambda v: v >= 0, "must be >= 0"),
            workers=typed("workers", int, 1, lambda v: v >= 1, "must be >= 1"),
            sweep=sweep, degrees=tuple(degrees),
        )
    except ConfigError as exc:
        msg = str(exc)
        key = msg.split("'")[1] if msg.startswith("field '") else None
        raise ConfigError(f"{source}:{lines[key]}: {msg}" if key in lines else f"{source}: {msg}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def preset_names() -> list[str]:
    root = resources.files("spreadnet") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def preset_text(name: str) -> str:
    root = resources.files("spreadnet") / "presets"
    f = root / f"{name}.yaml"
    if not f.is_file():
        raise ConfigError(f"unknown figure id {name!r}; choose from {', '.join(preset_names())}")
    return f.read_text()


def load_preset(name: str) -> ExperimentConfig:
    return parse_config(preset_text(name), f"preset {name}")
