"""Scenario configuration: schema, JSON loading, and field assembly.

A scenario bundles everything one experiment needs: the network, the
damping, the time grid, the known source, the unknown disturbances, the
observation set, and the knobs of the detection and identification
stages.  All quantities are nondimensional and the on-disk format is a
single JSON document; ``load_config`` turns it into typed dataclasses
with every invariant checked up front so the pipeline can assume a
consistent scenario.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import DisturbanceProfile, TimeGrid
from .errors import ConfigError
from .graphs import Graph

DETECTION_WINDOW_DEFAULT = 10
IDENTIFICATION_MODES = ("auto", "da", "absorbent")
SOURCE_KINDS = ("zero", "samples", "parametric")


@dataclass(frozen=True)
class GraphConfig:
    n: int
    edges: tuple[tuple[int, int], ...]

    def build(self) -> Graph:
        try:
            return Graph(n=self.n, edges=self.edges)
        except ValueError as exc:
            raise ConfigError(f"invalid graph: {exc}") from exc


@dataclass(frozen=True)
class GridConfig:
    total: float
    dt: float
    healthy: float

    def build(self) -> TimeGrid:
        try:
            return TimeGrid.from_durations(self.total, self.dt, self.healthy)
        except ValueError as exc:
            raise ConfigError(f"invalid grid: {exc}") from exc


@dataclass(frozen=True)
class SourceConfig:
    """Known forcing acting during the healthy window and beyond."""

    kind: str = "zero"
    path: str | None = None
    values: tuple[tuple[int, tuple[float, ...]], ...] = ()
    profiles: tuple[DisturbanceProfile, ...] = ()


@dataclass(frozen=True)
class DetectionConfig:
    epsilon: float | None = None
    window: int = DETECTION_WINDOW_DEFAULT


@dataclass(frozen=True)
class IdentificationConfig:
    mode: str = "auto"
    order: int = 8
    alpha: float = 1e-2
    extension_steps: int | None = None
    rho: float = 3.0


@dataclass(frozen=True)
class NoiseConfig:
    std: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"


@dataclass(frozen=True)
class ScenarioConfig:
    graph: GraphConfig
    eta: float
    grid: GridConfig
    observed: tuple[int, ...]
    source: SourceConfig = field(default_factory=SourceConfig)
    disturbances: tuple[DisturbanceProfile, ...] = ()
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    identification: IdentificationConfig = field(default_factory=IdentificationConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> None:
        """Check cross-field invariants; raise ``ConfigError`` on failure."""
        n = self.graph.build().n
        self.grid.build()
        if self.eta <= 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if not self.observed:
            raise ConfigError("the observation set must not be empty")
        if len(set(self.observed)) != len(self.observed):
            raise ConfigError("observation set contains repeated vertices")
        bad = [v for v in self.observed if not 1 <= v <= n]
        if bad:
            raise ConfigError(f"observed vertices {bad} outside 1..{n}")
        observed = set(self.observed)
        for dist in self.disturbances:
            if not 1 <= dist.vertex <= n:
                raise ConfigError(f"disturbance vertex {dist.vertex} outside 1..{n}")
            if dist.vertex in observed:
                raise ConfigError(
                    f"disturbance at observed vertex {dist.vertex}: unknown "
                    "forcing must act on unobserved vertices only"
                )
            if dist.onset < self.grid.healthy:
                raise ConfigError(
                    f"disturbance onset {dist.onset} inside the healthy "
                    f"window (0, {self.grid.healthy})"
                )
        if self.source.kind not in SOURCE_KINDS:
            raise ConfigError(f"unknown source kind {self.source.kind!r}")
        if self.identification.mode not in IDENTIFICATION_MODES:
            raise ConfigError(
                f"unknown identification mode {self.identification.mode!r}"
            )
        if self.identification.alpha <= 0.0:
            raise ConfigError("identification alpha must be positive")
        if self.identification.order < 0:
            raise ConfigError("identification order must be non-negative")
        if self.detection.window < 1:
            raise ConfigError("detection window must be at least one step")
        if self.detection.epsilon is not None and self.detection.epsilon <= 0.0:
            raise ConfigError("detection epsilon must be positive")
        if self.noise.std < 0.0:
            raise ConfigError("noise std must be non-negative")


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"missing required key {key!r} in {context}")
    return mapping[key]


def _as_mapping(value, context: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{context} must be an object, got {type(value).__name__}")
    return value


def _disturbance_from_mapping(entry: dict, context: str) -> DisturbanceProfile:
    entry = _as_mapping(entry, context)
    samples = entry.get("samples")
    try:
        return DisturbanceProfile(
            vertex=int(_require(entry, "vertex", context)),
            kind=str(entry.get("kind", "sine_halfperiod")),
            amplitude=float(entry.get("amplitude", 1.0)),
            onset=float(entry.get("onset", 0.0)),
            duration=(
                float(entry["duration"]) if entry.get("duration") is not None else None
            ),
            samples=np.asarray(samples, dtype=float) if samples is not None else None,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {context}: {exc}") from exc


def _source_from_mapping(entry: dict | None) -> SourceConfig:
    if entry is None:
        return SourceConfig()
    entry = _as_mapping(entry, "source")
    kind = str(entry.get("kind", "zero"))
    if kind == "zero":
        return SourceConfig()
    if kind == "samples":
        path = entry.get("path")
        raw_values = entry.get("values")
        if path is None and raw_values is None:
            raise ConfigError("source kind 'samples' needs a 'path' or 'values'")
        values: tuple[tuple[int, tuple[float, ...]], ...] = ()
        if raw_values is not None:
            pairs = []
            for label, series in _as_mapping(raw_values, "source values").items():
                try:
                    pairs.append((int(label), tuple(float(x) for x in series)))
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"invalid source samples: {exc}") from exc
            values = tuple(sorted(pairs))
        return SourceConfig(kind="samples", path=path, values=values)
    if kind == "parametric":
        raw = entry.get("profiles", [])
        if not isinstance(raw, list):
            raise ConfigError("source profiles must be a list")
        profiles = tuple(
            _disturbance_from_mapping(item, "source profile") for item in raw
        )
        return SourceConfig(kind="parametric", profiles=profiles)
    raise ConfigError(f"unknown source kind {kind!r}")


def config_from_mapping(raw: dict) -> ScenarioConfig:
    """Build and validate a scenario from parsed JSON data."""
    raw = _as_mapping(raw, "scenario")
    graph_raw = _as_mapping(_require(raw, "graph", "scenario"), "graph")
    edges_raw = _require(graph_raw, "edges", "graph")
    if not isinstance(edges_raw, list):
        raise ConfigError("graph edges must be a list of pairs")
    edges = []
    for pair in edges_raw:
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"graph edge {pair!r} is not a pair")
        edges.append((int(pair[0]), int(pair[1])))
    graph = GraphConfig(n=int(_require(graph_raw, "n", "graph")), edges=tuple(edges))

    grid_raw = _as_mapping(_require(raw, "grid", "scenario"), "grid")
    grid = GridConfig(
        total=float(_require(grid_raw, "T", "grid")),
        dt=float(_require(grid_raw, "dt", "grid")),
        healthy=float(_require(grid_raw, "T0", "grid")),
    )

    observed_raw = _require(raw, "observed", "scenario")
    if not isinstance(observed_raw, list):
        raise ConfigError("observed must be a list of vertex labels")
    observed = tuple(sorted(int(v) for v in observed_raw))

    disturbances_raw = raw.get("disturbances", [])
    if not isinstance(disturbances_raw, list):
        raise ConfigError("disturbances must be a list")
    disturbances = tuple(
        _disturbance_from_mapping(item, "disturbance") for item in disturbances_raw
    )

    detection_raw = _as_mapping(raw.get("detection", {}), "detection")
    epsilon_raw = detection_raw.get("epsilon", "auto")
    if isinstance(epsilon_raw, str):
        if epsilon_raw != "auto":
            raise ConfigError("detection epsilon must be a number or 'auto'")
        epsilon = None
    elif epsilon_raw is None:
        epsilon = None
    else:
        epsilon = float(epsilon_raw)
    detection = DetectionConfig(
        epsilon=epsilon,
        window=int(detection_raw.get("window", DETECTION_WINDOW_DEFAULT)),
    )

    ident_raw = _as_mapping(raw.get("identification", {}), "identification")
    extension = ident_raw.get("t_bar_k_steps")
    identification = IdentificationConfig(
        mode=str(ident_raw.get("mode", "auto")),
        order=int(ident_raw.get("L", 8)),
        alpha=float(ident_raw.get("alpha", 1e-2)),
        extension_steps=int(extension) if extension is not None else None,
        rho=float(ident_raw.get("rho", 3.0)),
    )

    noise_raw = _as_mapping(raw.get("noise", {}), "noise")
    noise = NoiseConfig(
        std=float(noise_raw.get("std", 0.0)),
        seed=int(noise_raw.get("seed", 0)),
    )

    outputs_raw = _as_mapping(raw.get("outputs", {}), "outputs")
    outputs = OutputConfig(directory=str(outputs_raw.get("dir", "out")))

    try:
        eta = float(_require(raw, "eta", "scenario"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid eta: {exc}") from exc

    config = ScenarioConfig(
        graph=graph,
        eta=eta,
        grid=grid,
        observed=observed,
        source=_source_from_mapping(raw.get("source")),
        disturbances=disturbances,
        detection=detection,
        identification=identification,
        noise=noise,
        outputs=outputs,
    )
    config.validate()
    return config


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_mapping(raw)


def _read_samples_csv(path: Path, grid: TimeGrid, n: int) -> np.ndarray:
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read source samples {path}: {exc}") from exc
    if not header or header[0] != "time":
        raise ConfigError(f"source samples {path} must start with a 'time' column")
    labels = []
    for name in header[1:]:
        if not name.startswith("v"):
            raise ConfigError(f"source column {name!r} is not of the form v<label>")
        labels.append(int(name[1:]))
    if any(not 1 <= v <= n for v in labels):
        raise ConfigError(f"source columns {labels} outside 1..{n}")
    if len(rows) != grid.steps + 1:
        raise ConfigError(
            f"source samples {path} has {len(rows)} rows, grid needs {grid.steps + 1}"
        )
    field_values = np.zeros((n, grid.steps + 1))
    for i, row in enumerate(rows):
        for j, label in enumerate(labels):
            field_values[label - 1, i] = float(row[j + 1])
    return field_values


def source_field(config: ScenarioConfig, grid: TimeGrid) -> np.ndarray:
    """Known forcing sampled on the grid, one row per vertex."""
    n = config.graph.n
    out = np.zeros((n, grid.steps + 1))
    source = config.source
    if source.kind == "zero":
        return out
    if source.kind == "samples":
        if source.path is not None:
            out += _read_samples_csv(Path(source.path), grid, n)
        for label, series in source.values:
            if not 1 <= label <= n:
                raise ConfigError(f"source vertex {label} outside 1..{n}")
            values = np.asarray(series, dtype=float)
            if values.size != grid.steps + 1:
                raise ConfigError(
                    f"source samples for vertex {label} have {values.size} "
                    f"entries, grid needs {grid.steps + 1}"
                )
            out[label - 1] += values
        return out
    for profile in source.profiles:
        if not 1 <= profile.vertex <= n:
            raise ConfigError(f"source vertex {profile.vertex} outside 1..{n}")
        out[profile.vertex - 1] += profile.sample(grid)
    return out


def disturbance_field(config: ScenarioConfig, grid: TimeGrid) -> np.ndarray:
    """Unknown forcing sampled on the grid, one row per vertex."""
    out = np.zeros((config.graph.n, grid.steps + 1))
    for profile in config.disturbances:
        out[profile.vertex - 1] += profile.sample(grid)
    return out
