"""Plain ``key = value`` run configuration files.

Blank lines and lines starting with ``#`` are ignored. Every key may appear at
most once; unknown keys are rejected. Missing keys take the defaults of
:class:`vkg.simulator.RunConfig`.
"""
from __future__ import annotations

import os

from .errors import ParseError, ValidationError
from .grid import GridSpec
from .io import fmt
from .simulator import RunConfig
from .spectral_core import SystemParams

ECHO_NAME = "effective_config.txt"

_FLOAT_KEYS = ("alpha", "kappa", "beta", "L", "dt", "t_end", "epsilon", "ic_width", "k0")
_INT_KEYS = ("n_modes", "stride", "seed")
_STR_KEYS = ("ic_kind", "out_dir")
KEYS = _FLOAT_KEYS[:4] + ("n_modes",) + _FLOAT_KEYS[4:] + ("stride", "seed") + _STR_KEYS

def _convert(key, text, lineno):
    try:
        if key in _FLOAT_KEYS:
            return float(text)
        if key in _INT_KEYS:
            return int(text)
    except ValueError:
        kind = "number" if key in _FLOAT_KEYS else "integer"
        raise ParseError(f"{key}: expected a {kind}, got {text!r}", lineno) from None
    if not text:
        raise ParseError(f"{key}: empty value", lineno)
    return text


def parse_text(text: str) -> dict:
    """Raw ``{key: typed value}`` mapping from configuration text."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        values[key] = _convert(key, value, lineno)
    return values


def build_config(values: dict) -> RunConfig:
    """Validated :class:`RunConfig` from a raw mapping; defaults fill the gaps."""
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown key")
    params = SystemParams(
        alpha=values.get("alpha", 1.0), kappa=values.get("kappa", 1.0), beta=values.get("beta", 1.0)
    )
    grid = GridSpec(values.get("L", 200.0), values.get("n_modes", 4096))
    rest = {k: values[k] for k in ("dt", "t_end", "epsilon", "ic_kind", "ic_width", "k0", "stride", "out_dir", "seed") if k in values}
    return RunConfig(params=params, grid=grid, **rest)


def parse_config(path, out_dir=None, echo: bool = True) -> RunConfig:
    """Read, validate and (optionally) echo a configuration file.

    ``out_dir`` overrides the file's own ``out_dir``. The effective configuration,
    with every default spelled out, is written to ``<out_dir>/effective_config.txt``.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    values = parse_text(text)
    if out_dir is not None:
        values["out_dir"] = str(out_dir)
    config = build_config(values)
    if echo:
        write_effective(config)
    return config


def to_text(config: RunConfig) -> str:
    p, g = config.params, config.grid
    items = [
        ("alpha", p.alpha), ("kappa", p.kappa), ("beta", p.beta),
        ("L", g.half_length), ("n_modes", g.n_modes),
        ("dt", config.dt), ("t_end", config.t_end), ("epsilon", config.epsilon),
        ("ic_kind", config.ic_kind), ("ic_width", config.ic_width),
        ("k0", config.k0), ("stride", config.stride), ("seed", config.seed),
        ("out_dir", config.out_dir),
    ]
    lines = ["# effective vkg configuration"]
    for key, value in items:
        if value is None:
            lines.append(f"# {key} = default ({fmt(config.cutoff)})")
        else:
            lines.append(f"{key} = {value if isinstance(value, str) else fmt(value)}")
    return "\n".join(lines) + "\n"


def write_effective(config: RunConfig) -> str:
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, ECHO_NAME)
    with open(path, "w") as fh:
        fh.write(to_text(config))
    return path
