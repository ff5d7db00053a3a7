"""Flat key=value run configuration with flag overrides.

Format: one ``key = value`` pair per line, ``#`` starts a comment (full line
or trailing), blank lines ignored.  Flags are strings like ``--p=4`` and take
precedence over file entries.  Defaults: rho = 0.1, T = 12, order = 2.

Unknown keys and type mismatches fail fast with messages naming the key and,
for file input, the line number.  Value ranges with a module precondition
that does not depend on the subcommand (rho > 0, p > 1, grid sizes >= 3, ...)
are validated here; subcommand-specific requirements (omega present, alpha
above the manufactured-solution floor, second-order scheme) are enforced by
the domain constructors the command invokes before any computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path
from typing import Sequence

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "KNOWN_KEYS"]


def _to_float(text: str) -> float:
    return float(text)


def _to_int(text: str) -> int:
    # reject floats masquerading as ints ("4.5") but allow "4"
    if text.strip().lstrip("+-").isdigit():
        return int(text)
    raise ValueError(text)


def _to_str(text: str) -> str:
    return text


def _to_float_tuple(text: str) -> tuple[float, ...]:
    items = [piece.strip() for piece in text.split(",") if piece.strip()]
    return tuple(float(piece) for piece in items)


def _to_grid_tuple(text: str) -> tuple[tuple[int, int], ...]:
    """Parse a refinement chain like ``64x33,128x65,256x129``."""
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        nt_text, sep, ntheta_text = piece.partition("x")
        if not sep:
            raise ValueError(piece)
        out.append((_to_int(nt_text), _to_int(ntheta_text)))
    if not out:
        raise ValueError(text)
    return tuple(out)


#: key -> (converter, human-readable expected type)
KNOWN_KEYS = {
    "omega": (_to_float, "a number"),
    "rho": (_to_float, "a number"),
    "k": (_to_float, "a number"),
    "p": (_to_float, "a number"),
    "nt": (_to_int, "an integer"),
    "ntheta": (_to_int, "an integer"),
    "T": (_to_float, "a number"),
    "order": (_to_int, "an integer"),
    "alpha": (_to_float, "a number"),
    "profile": (_to_str, "a profile name"),
    "levels": (_to_int, "an integer"),
    "source": (_to_str, "'manufactured' or 'zero'"),
    "grids": (_to_grid_tuple, "a chain like 64x33,128x65"),
    "p_values": (_to_float_tuple, "comma-separated numbers"),
    "omega_values": (_to_float_tuple, "comma-separated numbers"),
    "out": (_to_str, "a directory path"),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by the CLI subcommands and service."""

    omega: float | None = None
    rho: float = 0.1
    k: float = 0.0
    p: float = 2.0
    nt: int = 129
    ntheta: int = 65
    T: float = 12.0
    order: int = 2
    alpha: float = 5.0
    profile: str = "cos-bump"
    levels: int = 6
    source: str = "manufactured"
    grids: tuple[tuple[int, int], ...] = ((64, 33), (128, 65), (256, 129))
    p_values: tuple[float, ...] = ()
    omega_values: tuple[float, ...] = ()
    out: str = "."

    def require_omega(self) -> float:
        if self.omega is None:
            raise ConfigError(
                "omega is required: set it in the config file or pass --omega=<value>"
            )
        return self.omega


def _check_ranges(cfg: RunConfig) -> None:
    def bad(message: str) -> ConfigError:
        return ConfigError(f"invalid configuration: {message}")

    if cfg.omega is not None and not (0.0 < cfg.omega <= 2.0 * math.pi):
        raise bad(f"omega={cfg.omega} not in (0, 2*pi]")
    if not (cfg.rho > 0.0 and math.isfinite(cfg.rho)):
        raise bad(f"rho={cfg.rho} must be finite and > 0")
    if not (cfg.k >= 0.0 and math.isfinite(cfg.k)):
        raise bad(f"k={cfg.k} must be finite and >= 0")
    if not (cfg.p > 1.0 and math.isfinite(cfg.p)):
        raise bad(f"p={cfg.p} must be finite and > 1")
    if cfg.nt < 3 or cfg.ntheta < 3:
        raise bad(f"grid sizes need nt >= 3 and ntheta >= 3, got ({cfg.nt}, {cfg.ntheta})")
    if not (cfg.T > 0.0 and math.isfinite(cfg.T)):
        raise bad(f"T={cfg.T} must be finite and > 0")
    if cfg.order < 1:
        raise bad(f"order={cfg.order} must be >= 1")
    if cfg.levels < 1:
        raise bad(f"levels={cfg.levels} must be >= 1")
    if cfg.source not in ("manufactured", "zero"):
        raise bad(f"source={cfg.source!r} must be 'manufactured' or 'zero'")
    for nt, ntheta in cfg.grids:
        if nt < 3 or ntheta < 3:
            raise bad(f"grids entry ({nt}, {ntheta}) needs both sizes >= 3")
    for value in cfg.p_values:
        if not (value > 1.0 and math.isfinite(value)):
            raise bad(f"p_values entry {value} must be finite and > 1")
    for value in cfg.omega_values:
        if not (0.0 < value <= 2.0 * math.pi):
            raise bad(f"omega_values entry {value} not in (0, 2*pi]")


def _convert(key: str, text: str, where: str) -> object:
    converter, expected = KNOWN_KEYS[key]
    try:
        return converter(text)
    except ValueError:
        raise ConfigError(f"{where}: key {key} expects {expected}, got {text!r}") from None


def _split_pair(entry: str, where: str) -> tuple[str, str]:
    key, sep, value = entry.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"{where}: expected key=value, got {entry!r}")
    return key.strip(), value.strip()


def parse_config(path: str | Path | None = None, flags: Sequence[str] = ()) -> RunConfig:
    """Merge a config file (if given) with ``--key=value`` flag overrides.

    Flags win over file entries; defaults fill the rest.  Errors are
    :class:`~conebiharm.errors.ConfigError` naming the unknown key or the
    line/flag with a type mismatch.
    """
    data: dict[str, object] = {}

    if path is not None:
        source = Path(path)
        if not source.is_file():
            raise ConfigError(f"config file not found: {source}")
        for lineno, raw in enumerate(source.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            where = f"line {lineno}"
            key, value = _split_pair(line, where)
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown key: {key} ({where})")
            data[key] = _convert(key, value, where)

    for flag in flags:
        if not flag.startswith("--"):
            raise ConfigError(f"flag {flag!r} must look like --key=value")
        where = f"flag {flag}"
        key, value = _split_pair(flag[2:], where)
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key: {key} ({where})")
        data[key] = _convert(key, value, where)

    valid_names = {f.name for f in dataclass_fields(RunConfig)}
    assert set(KNOWN_KEYS) == valid_names, "key table out of sync with RunConfig"
    cfg = RunConfig(**data)  # type: ignore[arg-type]
    _check_ranges(cfg)
    return cfg
