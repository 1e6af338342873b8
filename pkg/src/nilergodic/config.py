"""YAML scenario configs: loading, schema validation and object construction.

Exact inputs are written as scalar strings (``"1/2 + 3/4*sqrt(2)"``) and
matrices as row-major arrays of them, so nothing is lost to float rounding.
A config path may also be given as ``bundled:NAME`` for a file shipped in
``nilergodic/scenarios``.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import yaml

from .experiments import ExperimentConfig
from .group import GroupElement
from .nilmanifold import TestFunction, n_coords
from .scalars import parse_scalar
from .suites import SUPPORTED_N

__all__ = [
    "ConfigError",
    "UnsupportedDimension",
    "COMMANDS",
    "bundled_scenarios",
    "resolve_config",
    "load_config",
    "check_dimension",
    "ergodic_inputs",
    "parse_matrix",
    "parse_functions",
    "experiment_from_config",
    "validate_report",
]

COMMANDS = ("verify-group", "verify-star", "verify-intertwine", "verify-lemma",
            "ergodic-check", "average", "limit", "compare")
BUNDLED_PREFIX = "bundled:"


class ConfigError(ValueError):
    """The config is malformed or inconsistent."""


class UnsupportedDimension(ConfigError):
    """The requested group dimension is outside the supported range."""


@lru_cache(maxsize=None)
def _schema(name: str) -> dict:
    text = resources.files("nilergodic").joinpath("schemas", name).read_text("utf-8")
    return json.loads(text)


def _validator(command: str) -> jsonschema.Draft202012Validator:
    full = _schema("config.schema.json")
    key = "experiment" if command in ("average", "limit", "compare") else command
    return jsonschema.Draft202012Validator({"$defs": full["$defs"], "$ref": f"#/$defs/{key}"})


def bundled_scenarios() -> list[str]:
    root = resources.files("nilergodic").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_config(spec: str) -> tuple[str, str]:
    """Return ``(label, text)`` for a path or ``bundled:NAME``."""
    if spec.startswith(BUNDLED_PREFIX):
        name = spec[len(BUNDLED_PREFIX):]
        if name.endswith(".yaml"):
            name = name[:-5]
        if name not in bundled_scenarios():
            raise ConfigError(f"no bundled scenario {name!r}; available: "
                              + ", ".join(bundled_scenarios()))
        path = resources.files("nilergodic").joinpath("scenarios", f"{name}.yaml")
        return spec, path.read_text("utf-8")
    path = Path(spec)
    try:
        return str(path), path.read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {spec}: {exc}") from exc


def load_config(spec: str, command: str | None = None) -> dict:
    """Parse and schema-validate a config for ``command``.

    When ``command`` is ``None`` the config must name its own command.
    """
    label, text = resolve_config(spec)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{label}: malformed YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{label}: top level must be a mapping")
    declared = data.get("command")
    if command is None:
        command = declared
    if command not in COMMANDS:
        raise ConfigError(f"{label}: unknown or missing command {command!r}")
    if declared is not None and declared != command:
        raise ConfigError(f"{label}: config is for {declared!r}, not {command!r}")
    errors = sorted(_validator(command).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        lines = [f"  at {'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}"
                 for e in errors[:10]]
        raise ConfigError(f"{label}: schema validation failed\n" + "\n".join(lines))
    data = dict(data)
    data["command"] = command
    return data


def check_dimension(n: int) -> int:
    if n not in SUPPORTED_N:
        raise UnsupportedDimension(f"unsupported dimension n={n}; expected "
                                   f"{SUPPORTED_N.start} <= n <= {SUPPORTED_N.stop - 1}")
    return n


def _infer_n(cfg: Mapping[str, Any]) -> int:
    if "n" in cfg:
        return check_dimension(int(cfg["n"]))
    a = cfg.get("a")
    if isinstance(a, list):
        return check_dimension(len(a))
    raise ConfigError("cannot infer n; give 'n' or a matrix 'a'")


def parse_matrix(value: Any, n: int, what: str = "matrix") -> GroupElement:
    """An exact ``GroupElement`` from ``"identity"`` or rows of scalar strings."""
    if value == "identity" or value is None:
        return GroupElement.identity(n)
    if len(value) != n or any(len(r) != n for r in value):
        raise ConfigError(f"{what}: expected a {n}x{n} matrix")
    try:
        rows = [[parse_scalar(v) for v in r] for r in value]
        return GroupElement(rows)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def parse_functions(specs, n: int) -> list[TestFunction]:
    d = n_coords(n)
    out = []
    for idx, spec in enumerate(specs, start=1):
        for term in spec["terms"]:
            if len(term["m"]) != d:
                raise ConfigError(f"f_{idx}: frequency {term['m']} needs {d} entries")
        out.append(TestFunction.from_config(n, spec))
    return out


def experiment_from_config(cfg: Mapping[str, Any], seed: int | None = None,
                           jobs: int | None = None) -> ExperimentConfig:
    n = _infer_n(cfg)
    a = parse_matrix(cfg["a"], n, "a")
    x = parse_matrix(cfg.get("x", "identity"), n, "x")
    functions = parse_functions(cfg["functions"], n)
    kwargs = {key: cfg[key] for key in ("n_steps", "m_samples", "estimator", "checkpoints",
                                         "tolerance", "bound", "jobs") if key in cfg}
    if seed is not None:
        kwargs["seed"] = seed
    elif "seed" in cfg:
        kwargs["seed"] = cfg["seed"]
    if jobs is not None:
        kwargs["jobs"] = jobs
    try:
        return ExperimentConfig(a=a, x=x, functions=functions, name=cfg.get("name", ""), **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def ergodic_inputs(cfg: Mapping[str, Any]) -> tuple[GroupElement, GroupElement | None]:
    n = _infer_n(cfg)
    a = parse_matrix(cfg["a"], n, "a")
    x = parse_matrix(cfg["x"], n, "x") if "x" in cfg else None
    return a, x


def validate_report(report: Mapping[str, Any]) -> None:
    """Raise ``jsonschema.ValidationError`` if ``report`` breaks the published schema."""
    jsonschema.validate(report, _schema("report.schema.json"),
                        cls=jsonschema.Draft202012Validator)
