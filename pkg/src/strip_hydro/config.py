"""INI run configuration: [grid], [run] (alias [ans]), [initial], [tracker]."""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError, ValidationError
from .harness import RunConfig

# section -> key -> (RunConfig field, parser)
_SCHEMA = {
    "grid": {"nx": ("nx", int), "ny": ("ny", int), "lx": ("lx", float)},
    "run": {
        "dt": ("dt", float),
        "t_end": ("t_end", float),
        "eps": ("eps_list", None),
        "eps_list": ("eps_list", None),
        "divergence_tol": ("divergence_tol", float),
        "cadence": ("cadence", int),
        "output_dir": ("output_dir", str),
        "seed": ("seed", int),
    },
    "initial": {"delta": ("delta", float), "k0": ("k0", int), "a": ("a", float)},
    "tracker": {"lambda": ("lam", float), "mu": ("mu", float)},
}
_ALIASES = {"ans": "run", "hydro": "run"}


def _eps_list(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("eps list is empty")
    return tuple(float(p) for p in parts)


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    values = {}
    for section in cp.sections():
        name = _ALIASES.get(section.lower(), section.lower())
        if name not in _SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _SCHEMA[name]:
                raise ConfigError(f"{source}: unknown key '{key}' in [{section}]")
            fld, conv = _SCHEMA[name][key]
            try:
                values[fld] = _eps_list(raw) if fld == "eps_list" else conv(raw)
            except ValueError as exc:
                raise ConfigError(f"{source}: bad value for {key}: {raw!r}") from exc
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), str(path))


REFERENCE_CONFIG = """\
[grid]
nx = 64
ny = 129
lx = 6.283185307179586

[run]
dt = 5e-4
t_end = 1.0
eps = 0.2, 0.1, 0.05, 0.025
divergence_tol = 1e-8
cadence = 10

[initial]
delta = 1e-2
k0 = 1
a = 0.5

[tracker]
lambda = 4.0
mu = 16.0
"""
