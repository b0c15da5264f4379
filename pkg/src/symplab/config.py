"""Scenario configuration read from INI files.

Each section is one run.  The ``scenario`` key defaults to the section
name, so ``[torus_periodic]`` with no further keys runs that scenario with
its defaults.  Keys::

    scenario, system, system.<param>, n_t, n_eps, N, mesh, mesh_spacing,
    t1, t2, T, alpha, beta, n, E, wraps, variations, seed, out,
    tol.<check name>

``alpha``, ``beta`` and ``wraps`` accept comma-separated lists.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


INT_KEYS = ("n_t", "n_eps", "N", "mesh", "n", "variations", "seed", "levels")
FLOAT_KEYS = ("t1", "t2", "T", "E", "mesh_spacing")
LIST_KEYS = {"alpha": float, "beta": float, "wraps": int}
GRID_KEYS = ("n_t", "n_eps", "N")
KNOWN_KEYS = set(INT_KEYS) | set(FLOAT_KEYS) | set(LIST_KEYS) | {"scenario", "system", "out"}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    scenario: str
    values: dict = field(default_factory=dict)
    system: Optional[str] = None
    system_params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[Path] = None

    def get(self, key, default=None):
        return self.values.get(key, default)

    def tol(self, check, default):
        return self.tolerances.get(check, default)

    def scaled(self, factor):
        """Copy with every grid size multiplied by ``factor`` (rounded, at least 2)."""
        if not factor > 0:
            raise ConfigError("grid scale must be positive")
        values = dict(self.values)
        for key in GRID_KEYS:
            if key in values:
                values[key] = max(2, int(round(values[key] * factor)))
        values["grid_scale"] = float(factor)
        return replace(self, values=values)

    def with_defaults(self, defaults):
        values = dict(defaults)
        values.update(self.values)
        return replace(self, values=values)

    def validate(self, known_scenarios):
        if self.scenario not in known_scenarios:
            raise ConfigError(f"[{self.name}] unknown scenario {self.scenario!r}; "
                              f"known: {', '.join(sorted(known_scenarios))}")
        for key in GRID_KEYS + ("mesh", "variations"):
            if key in self.values and self.values[key] < 2:
                raise ConfigError(f"[{self.name}] {key} must be at least 2")
        for check, value in self.tolerances.items():
            if not value > 0:
                raise ConfigError(f"[{self.name}] tolerance {check} must be positive")
        if "T" in self.values and not self.values["T"] > 0:
            raise ConfigError(f"[{self.name}] T must be positive")
        if self.seed < 0:
            raise ConfigError(f"[{self.name}] seed must be non-negative")
        return self

    def echo(self):
        """Plain-data summary of the inputs for reports."""
        out = {"name": self.name, "scenario": self.scenario, "seed": self.seed}
        if self.system:
            out["system"] = self.system
            out["system_params"] = dict(self.system_params)
        out.update({k: list(v) if isinstance(v, tuple) else v for k, v in self.values.items()})
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        return out


def _number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def _parse_section(name, section):
    values, params, tols = {}, {}, {}
    system = None
    scenario = section.get("scenario", name).strip()
    seed = 0
    out = None
    for key, raw in section.items():
        text = raw.strip()
        try:
            if key == "scenario":
                continue
            if key == "system":
                system = text
            elif key.startswith("system."):
                params[key[len("system."):]] = _number(text) if text[:1] in "+-.0123456789" else text
            elif key.startswith("tol."):
                tols[key[len("tol."):]] = float(text)
            elif key == "seed":
                seed = int(text)
            elif key == "out":
                out = Path(text)
            elif key in INT_KEYS:
                values[key] = int(text)
            elif key in FLOAT_KEYS:
                values[key] = float(text)
            elif key in LIST_KEYS:
                conv = LIST_KEYS[key]
                values[key] = tuple(conv(v) for v in text.split(",") if v.strip())
            else:
                raise ConfigError(f"[{name}] unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"[{name}] bad value for {key}: {text!r}") from None
    return ScenarioConfig(name, scenario, values, system, params, tols, seed, out)


def load_config(path):
    """All scenario sections of an INI file, in file order."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    sections = [_parse_section(name, parser[name]) for name in parser.sections()]
    if not sections:
        raise ConfigError(f"{path} defines no scenario sections")
    return sections


def parse_config_text(text):
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return [_parse_section(name, parser[name]) for name in parser.sections()]
