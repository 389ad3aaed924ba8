"""Run configuration: YAML schema, structure builders, deterministic sampling.

Unknown keys anywhere in the config are hard errors; there is no silent typo
tolerance.  The schema is documented in the README next to an example file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import metrics
from .errors import ConfigError, DomainError
from .jets import BasePoint, DEFAULT_X_ORDER, DEFAULT_Y_ORDER
from .metrics import FinslerStructure
from .tolerances import Tolerances

CHECK_NAMES = ("validate", "classify", "curvature", "constant_flag",
               "symmetry", "theorem_audit")
FORMATS = ("json", "text", "both")

Y_ANNULUS = (0.5, 2.0)

_DEFAULT_BOXES = {"sphere": 0.8, "hyperbolic": 0.6}


def _require_keys(mapping: dict, allowed: set, path: str):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}; "
                          f"allowed: {sorted(allowed)}")


@dataclass
class RunConfig:
    structure: FinslerStructure
    dimension: int
    metric_echo: dict
    count: int
    seed: int
    box: np.ndarray  # (n, 2)
    checks: tuple
    tolerances: Tolerances
    x_order: int = DEFAULT_X_ORDER
    y_order: int = DEFAULT_Y_ORDER
    out_path: str | None = None
    out_format: str = "both"
    threads: int = 1

    def echo(self) -> dict:
        return {
            "metric": self.metric_echo,
            "dimension": self.dimension,
            "samples": {"count": self.count, "seed": self.seed,
                        "box": self.box.tolist(),
                        "y_annulus": list(Y_ANNULUS)},
            "checks": list(self.checks),
            "tolerances": self.tolerances.as_dict(),
            "orders": {"x": self.x_order, "y": self.y_order},
        }


def _base_metric_spec(cfg: dict, n: int, path: str):
    _require_keys(cfg, {"kind", "matrix", "entries"}, path)
    kind = cfg.get("kind")
    if kind in ("euclidean", "sphere", "hyperbolic"):
        return kind, None
    if kind == "constant":
        return kind, cfg.get("matrix")
    if kind == "diagonal":
        return kind, cfg.get("entries")
    raise ConfigError(f"{path}.kind: expected one of euclidean/constant/diagonal/"
                      f"sphere/hyperbolic, got {kind!r}")


def build_structure(metric_cfg: dict, n: int) -> FinslerStructure:
    _require_keys(metric_cfg, {"family", "a", "b", "c", "expression"}, "metric")
    family = metric_cfg.get("family")
    if family == "euclidean":
        return metrics.euclidean(n)
    if family == "sphere":
        return metrics.sphere_chart(n)
    if family == "hyperbolic":
        return metrics.hyperbolic_chart(n)
    if family == "riemannian":
        if "a" not in metric_cfg:
            raise ConfigError("metric.a is required for family: riemannian")
        kind, data = _base_metric_spec(metric_cfg["a"], n, "metric.a")
        return metrics.riemannian(n, kind, data)
    if family == "randers":
        a_kind, a_data = "euclidean", None
        if "a" in metric_cfg:
            a_kind, a_data = _base_metric_spec(metric_cfg["a"], n, "metric.a")
        if "b" not in metric_cfg:
            raise ConfigError("metric.b is required for family: randers")
        bcfg = metric_cfg["b"]
        _require_keys(bcfg, {"kind", "entries"}, "metric.b")
        if bcfg.get("kind") == "constant":
            return metrics.randers(n, a_kind, a_data, b=bcfg.get("entries"))
        if bcfg.get("kind") == "expressions":
            return metrics.randers(n, a_kind, a_data,
                                   b_expressions=bcfg.get("entries"))
        raise ConfigError("metric.b.kind must be constant or expressions")
    if family == "perturbed_quartic":
        return metrics.perturbed_quartic(n, float(metric_cfg.get("c", 0.1)))
    if family == "locally_minkowski":
        if "expression" in metric_cfg:
            return metrics.minkowski_custom(n, metric_cfg["expression"])
        return metrics.perturbed_quartic(n, float(metric_cfg.get("c", 0.1)))
    if family == "custom":
        if "expression" not in metric_cfg:
            raise ConfigError("metric.expression is required for family: custom")
        return metrics.custom(n, metric_cfg["expression"])
    raise ConfigError(
        f"metric.family: expected one of euclidean/sphere/hyperbolic/riemannian/"
        f"randers/perturbed_quartic/locally_minkowski/custom, got {family!r}")


def default_box(metric_cfg: dict, n: int) -> np.ndarray:
    half = _DEFAULT_BOXES.get(metric_cfg.get("family"), 1.0)
    if metric_cfg.get("family") == "riemannian":
        half = _DEFAULT_BOXES.get(metric_cfg.get("a", {}).get("kind"), 1.0)
    return np.array([[-half, half]] * n)


def load_config(path: str, overrides: dict | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path!r}: {exc}") from exc
    if raw is None:
        raise ConfigError(f"config {path!r} is empty")
    return parse_config(raw, overrides or {})


def parse_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    overrides = overrides or {}
    _require_keys(raw, {"metric", "dimension", "samples", "checks",
                        "tolerances", "orders", "output"}, "config")
    if "metric" not in raw:
        raise ConfigError("config.metric is required")
    n = raw.get("dimension", 2)
    if not (isinstance(n, int) and n >= 2):
        raise ConfigError("dimension must be an integer >= 2")

    structure = build_structure(raw["metric"], n)

    scfg = raw.get("samples", {})
    _require_keys(scfg, {"count", "seed", "box"}, "config.samples")
    count = overrides.get("samples", scfg.get("count", 50))
    seed = overrides.get("seed", scfg.get("seed", 0))
    if not (isinstance(count, int) and count >= 1):
        raise ConfigError("samples.count must be an integer >= 1")
    if not isinstance(seed, int):
        raise ConfigError("samples.seed must be an integer")
    if "box" in scfg:
        box = np.asarray(scfg["box"], dtype=float)
        if box.shape != (n, 2) or not np.all(box[:, 0] < box[:, 1]):
            raise ConfigError("samples.box must be n pairs [lo, hi] with lo < hi")
    else:
        box = default_box(raw["metric"], n)

    checks = tuple(raw.get("checks", list(CHECK_NAMES)))
    for c in checks:
        if c not in CHECK_NAMES:
            raise ConfigError(f"unknown check {c!r}; known: {list(CHECK_NAMES)}")
    if not checks:
        raise ConfigError("checks must not be empty")

    tol = Tolerances().override(raw.get("tolerances", {}))
    if overrides.get("tolerances"):
        tol = tol.override(overrides["tolerances"])

    ocfg = raw.get("orders", {})
    _require_keys(ocfg, {"x", "y"}, "config.orders")
    x_order = int(ocfg.get("x", DEFAULT_X_ORDER))
    y_order = int(ocfg.get("y", DEFAULT_Y_ORDER))
    needs_depth = {"curvature", "constant_flag", "symmetry", "theorem_audit"}
    if needs_depth & set(checks) and (x_order < 3 or y_order < 6):
        raise ConfigError("curvature/symmetry checks need orders.x >= 3 and orders.y >= 6")

    outcfg = raw.get("output", {})
    _require_keys(outcfg, {"path", "format"}, "config.output")
    out_path = overrides.get("out", outcfg.get("path"))
    out_format = overrides.get("format", outcfg.get("format", "both"))
    if out_format not in FORMATS:
        raise ConfigError(f"output.format must be one of {FORMATS}")

    threads = int(os.environ.get("FINSLERLAB_THREADS", "1"))
    if threads < 1:
        raise ConfigError("FINSLERLAB_THREADS must be >= 1")

    return RunConfig(
        structure=structure, dimension=n, metric_echo=dict(raw["metric"]),
        count=count, seed=seed, box=box, checks=checks, tolerances=tol,
        x_order=x_order, y_order=y_order, out_path=out_path,
        out_format=out_format, threads=threads,
    )


def sample_points(structure: FinslerStructure, count: int, seed: int,
                  box: np.ndarray) -> list:
    """Deterministic quasi-uniform points of the slit bundle over the chart box.

    x is uniform in the box; y is uniform on the annulus 0.5 <= |y| <= 2
    (radius immaterial by homogeneity, and the annulus stays away from the
    zero section).  Points outside the structure's domain are rejected and
    resampled; a rejection rate above 99% aborts.
    """
    if count < 1:
        raise ConfigError("sample count must be >= 1")
    n = structure.n
    rng = np.random.default_rng(seed)
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > max(1000, 200 * count) and len(out) < 0.01 * attempts:
            raise DomainError(
                "sampling rejection rate above 99%: chart box does not meet "
                "the structure's domain")
        x = rng.uniform(box[:, 0], box[:, 1])
        direction = rng.normal(size=n)
        norm = np.linalg.norm(direction)
        if norm < 1e-12:
            continue
        radius = rng.uniform(*Y_ANNULUS)
        y = direction / norm * radius
        if not structure.domain(x, y):
            continue
        try:
            out.append(BasePoint(x, y))
        except DomainError:
            continue
    return out
