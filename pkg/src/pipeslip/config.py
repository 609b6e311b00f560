"""Run configuration: INI-style sections of key = value, or the same layout in JSON.

Grammar (INI form)::

    [run]
    schema_version = 1
    seed = 0

    [linear]
    phi = 1.0
    xi = 1.0
    alpha = 1.0

Lists are comma separated (``phis = 100, 1000, 10000``). A JSON file holds an
object of sections with the same keys; list values may be JSON arrays.
Unknown sections or keys are rejected. Missing keys take the documented
defaults, and the fully resolved configuration is embedded in every output.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError

SCHEMA_VERSION = 1


def _float(value) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"not a number: {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"not a finite number: {value!r}")
    return out


def _int(value) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"not an integer: {value!r}")
    if isinstance(value, int):
        return value
    try:
        text = str(value).strip()
        return int(text)
    except ValueError:
        raise ConfigError(f"not an integer: {value!r}") from None


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _float_list(value) -> list:
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        text = str(value).strip()
        items = [] if not text else [part for part in text.split(",")]
    return [_float(item) for item in items]


def _optional_int(value):
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "auto", "none")):
        return None
    return _int(value)


def _choice(*options) -> Callable:
    def parse(value):
        text = str(value).strip()
        if text not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {value!r}")
        return text
    return parse


def _nonneg(parse):
    def check(value):
        out = parse(value)
        items = out if isinstance(out, list) else [out]
        if any(v < 0 for v in items):
            raise ConfigError(f"value must be nonnegative: {value!r}")
        return out
    return check


def _positive(parse):
    def check(value):
        out = parse(value)
        items = out if isinstance(out, list) else [out]
        if any(v is not None and v <= 0 for v in items):
            raise ConfigError(f"value must be positive: {value!r}")
        return out
    return check


FORCING_KEYS = {
    "forcing": (_choice("default", "polynomial"), "default"),
    "p_r": (_float_list, []),
    "p_z": (_float_list, []),
    "p_theta": (_float_list, []),
    "normalize": (_bool, True),
}

THRESHOLD_KEYS = {
    "eps1": (_float, 0.1),
    "delta": (_float, 0.1),
}

SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {"schema_version": (_int, SCHEMA_VERSION), "seed": (_int, 0)},
    "linear": {
        "phi": (_nonneg(_float), 1.0),
        "xi": (_float, 1.0),
        "alpha": (_nonneg(_float), 1.0),
        "n_points": (_optional_int, None),
        "profiles": (_bool, True),
        "gate_tol": (_positive(_float), 1e-7),
        "gap_tol": (_positive(_float), 1e-6),
        **FORCING_KEYS,
    },
    "swirl": {
        "phi": (_nonneg(_float), 1.0),
        "xi": (_float, 1.0),
        "alpha": (_positive(_float), 1.0),
        "n_points": (_optional_int, None),
        "profiles": (_bool, True),
        "gap_tol": (_positive(_float), 1e-6),
        **FORCING_KEYS,
    },
    "sweep": {
        "phis": (_nonneg(_float_list), [1.0]),
        "xis": (_float_list, [1.0]),
        "alphas": (_nonneg(_float_list), [1.0]),
        "n_points": (_optional_int, None),
        "include_swirl": (_bool, True),
        "gate_tol": (_positive(_float), 1e-7),
        "gap_tol": (_positive(_float), 1e-6),
        **FORCING_KEYS,
    },
    "thresholds": THRESHOLD_KEYS,
    "inequalities": {
        "n_samples": (_positive(_int), 1000),
        "n_points": (_int, 48),
        "max_degree": (_nonneg(_int), 6),
    },
    "regimes": {
        "phis": (_nonneg(_float_list), [1e4]),
        "xis": (_float_list, [1e-4, 1.0, 50.0]),
        "alphas": (_nonneg(_float_list), [0.0]),
    },
    "nonlinear": {
        "phi": (_nonneg(_float), 10.0),
        "alpha": (_nonneg(_float), 1.0),
        "period_length": (_positive(_float), 8.0 * math.pi),
        "n_modes": (_positive(_int), 17),
        "n_points": (_optional_int, None),
        "amplitude": (_nonneg(_float), 1e-3),
        "max_iters": (_positive(_int), 50),
        "tol": (_positive(_float), 1e-10),
        "swirl": (_bool, True),
        "field_output": (_bool, True),
        **FORCING_KEYS,
    },
}

COMMAND_SECTIONS = {
    "solve-linear": ("run", "linear"),
    "solve-swirl": ("run", "swirl"),
    "sweep": ("run", "sweep", "thresholds"),
    "inequalities": ("run", "inequalities"),
    "regimes": ("run", "regimes", "thresholds"),
    "solve-nonlinear": ("run", "nonlinear"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    sections: dict
    schema_version: int = SCHEMA_VERSION

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def as_dict(self) -> dict:
        return {"command": self.command, "schema_version": self.schema_version, **self.sections}


def read_raw(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
        if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError("JSON config must be an object of sections")
        return data
    parser = configparser.ConfigParser(interpolation=None, default_section="__unused__")
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    return {name: dict(parser[name]) for name in parser.sections()}


def resolve(command: str, raw: dict, seed: int | None = None) -> RunConfig:
    if command not in COMMAND_SECTIONS:
        raise ConfigError(f"unknown command {command!r}")
    allowed = COMMAND_SECTIONS[command]
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"sections not used by {command}: {', '.join(unknown)}")
    sections: dict[str, Any] = {}
    for name in allowed:
        schema = SCHEMA[name]
        given = raw.get(name, {})
        extra = sorted(set(given) - set(schema))
        if extra:
            raise ConfigError(f"unknown keys in [{name}]: {', '.join(extra)}")
        block = {}
        for key, (parse, default) in schema.items():
            try:
                block[key] = parse(given[key]) if key in given else default
            except ConfigError as exc:
                raise ConfigError(f"[{name}] {key}: {exc}") from None
        sections[name] = block
    version = sections["run"]["schema_version"]
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}; expected {SCHEMA_VERSION}")
    if seed is not None:
        sections["run"]["seed"] = int(seed)
    if "thresholds" in sections:
        for key, value in sections["thresholds"].items():
            if not 0.0 < value < 1.0:
                raise ConfigError(f"[thresholds] {key} must lie in (0, 1)")
    for name in ("linear", "swirl", "sweep", "nonlinear"):
        block = sections.get(name)
        if block and block["forcing"] == "polynomial" and not (block["p_r"] or block["p_z"] or block["p_theta"]):
            raise ConfigError(f"[{name}] polynomial forcing needs p_r, p_z or p_theta")
    return RunConfig(command=command, sections=sections, schema_version=version)


def load_config(command: str, path: str | Path | None, seed: int | None = None) -> RunConfig:
    raw = read_raw(path) if path is not None else {}
    return resolve(command, raw, seed)
