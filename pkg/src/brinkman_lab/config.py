"""
Plain ``[section]`` / ``key = value`` run configuration.

Every section has a fixed set of keys with defaults; unknown sections or
keys are rejected.  :meth:`RunConfig.to_text` writes every resolved value
back out, and parsing that text reproduces an equal ``RunConfig``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BrinkmanError, ConfigError
from .grid import Grid
from .growth import GrowthLaw
from .klevel import KLevelConfig
from .limit import Omega0


def _floats(text):
    text = str(text).strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _points(text):
    text = str(text).strip()
    if not text:
        return ()
    return tuple(_floats(chunk) for chunk in text.split(";"))


def _bool(text):
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(",".join(repr(v) for v in pt) for pt in value)
        return ",".join(repr(v) for v in value)
    return str(value)


# section -> key -> (parser, default); default None marks a required key
SCHEMA = {
    "grid": {"dim": (int, None), "extent": (float, None), "n_cells": (int, None)},
    "law": {
        "kind": (str, "linear"),
        "alpha_bar": (float, None),
        "p_max": (float, 1.0),
        "nu": (float, 1.0),
        "p_samples": (_floats, ()),
        "g_samples": (_floats, ()),
    },
    "elliptic": {"method": (str, "spectral"), "tol": (float, 1e-10), "max_iter": (int, 100_000)},
    "omega0": {"shape": (str, None), "centers": (_points, ()), "radii": (_floats, ())},
    "klevel": {
        "k": (float, 20.0),
        "t_end": (float, None),
        "cfl": (float, 0.9),
        "amplitude": (float, 0.2),
        "margin_cells": (float, 2.0),
        "dt_max": (float, 0.01),
        "advection": (str, "semi-lagrangian"),
        "track_support": (_bool, True),
        "snapshots": (_floats, ()),
    },
    "limit": {
        "t_end": (float, None),
        "cfl": (float, 0.9),
        "dt_max": (float, 0.01),
        "corrector": (_bool, False),
        "snapshots": (_floats, ()),
    },
    "converge": {
        "ks": (_floats, ()),
        "times": (_floats, ()),
        "delta": (float, 0.0),
        "p_norm": (float, 2.0),
        "tol_pos": (float, 0.0),
    },
    "output": {"dir": (str, "output"), "format": (str, "binary")},
    "run": {"seed": (int, 0)},
}

ALWAYS_REQUIRED = ("grid", "law", "omega0")


@dataclass(frozen=True)
class RunConfig:
    sections: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "output"

    def __getitem__(self, section):
        return self.sections[section]

    def has(self, section) -> bool:
        return section in self.sections

    def require(self, *names) -> None:
        missing = [n for n in names if n not in self.sections]
        if missing:
            raise ConfigError(f"missing config section(s): {', '.join(missing)}")

    def grid(self) -> Grid:
        g = self["grid"]
        try:
            return Grid(g["dim"], g["extent"], g["n_cells"])
        except BrinkmanError as exc:
            raise ConfigError(f"[grid]: {exc}") from exc

    def law(self) -> GrowthLaw:
        try:
            d = dict(self["law"])
            d["p_samples"] = ",".join(repr(v) for v in d["p_samples"])
            d["g_samples"] = ",".join(repr(v) for v in d["g_samples"])
            return GrowthLaw.from_dict(d)
        except (BrinkmanError, ValueError, KeyError) as exc:
            raise ConfigError(f"[law]: {exc}") from exc

    def omega0(self) -> Omega0:
        o = self["omega0"]
        try:
            return Omega0(o["shape"], o["centers"], o["radii"])
        except BrinkmanError as exc:
            raise ConfigError(f"[omega0]: {exc}") from exc

    def klevel_config(self) -> KLevelConfig:
        self.require("klevel")
        kl = self["klevel"]
        el = self.sections.get("elliptic", _defaults("elliptic"))
        try:
            return KLevelConfig(
                grid=self.grid(), law=self.law(), k=kl["k"], t_end=kl["t_end"],
                omega0=self.omega0(), cfl=kl["cfl"], amplitude=kl["amplitude"],
                margin_cells=kl["margin_cells"], dt_max=kl["dt_max"],
                advection=kl["advection"], track_support=kl["track_support"],
                elliptic_method=el["method"], elliptic_tol=el["tol"],
                elliptic_max_iter=el["max_iter"],
            )
        except BrinkmanError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"[klevel]: {exc}") from exc

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for name in SCHEMA:
            if name in self.sections:
                cp[name] = {k: _fmt(v) for k, v in self.sections[name].items()}
        lines = []
        for name in cp.sections():
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {v}" for k, v in cp[name].items())
            lines.append("")
        return "\n".join(lines)


def _defaults(section):
    return {k: d for k, (_, d) in SCHEMA[section].items()}


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc
    sections = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        spec = SCHEMA[name]
        values = {}
        for key, raw in cp[name].items():
            if key not in spec:
                raise ConfigError(f"unknown key {name}.{key}")
            try:
                values[key] = spec[key][0](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {name}.{key}: {raw!r}") from exc
        for key, (_, default) in spec.items():
            if key not in values:
                if default is None:
                    raise ConfigError(f"missing required key {name}.{key}")
                values[key] = default
        sections[name] = values
    for name in ALWAYS_REQUIRED:
        if name not in sections:
            raise ConfigError(f"missing config section [{name}]")
    seed = sections.get("run", {}).get("seed", 0)
    out = sections.get("output", {}).get("dir", "output")
    return RunConfig(sections, seed, out)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
