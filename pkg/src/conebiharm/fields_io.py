"""Deterministic CSV serialization of grid fields.

File layout::

    # representation=<tag>
    # nt=<..> ntheta=<..> T=<..> omega=<..> rho=<..>
    t_or_r,theta,value
    <coord>,<theta>,<value>
    ...

Every number is printed with 17 significant digits, which round-trips any
float64 exactly, so write -> read reproduces the field bit for bit.  The
first column holds the radius r for sector-representation fields and the
strip coordinate t for strip-representation fields; rows run in grid order
with the theta index varying fastest.  The sector shift k is not a property
of a sampled field and is not stored; grids reconstructed from a file carry
k = 0.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .geometry import Representation, ScalarField, SectorSpec, StripGrid

__all__ = ["COLUMN_HEADER", "write_field_csv", "read_field_csv"]

COLUMN_HEADER = "t_or_r,theta,value"

_GRID_LINE = re.compile(
    r"# nt=(?P<nt>\S+) ntheta=(?P<ntheta>\S+) T=(?P<T>\S+)"
    r" omega=(?P<omega>\S+) rho=(?P<rho>\S+)$"
)
_REP_LINE = re.compile(r"# representation=(?P<tag>\S+)$")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _is_strip(rep: Representation) -> bool:
    return rep.value.startswith("strip")


def write_field_csv(field: ScalarField, path: str | Path) -> Path:
    """Write one field to ``path`` in the header + rows layout above."""
    grid = field.grid
    coord = grid.t if _is_strip(field.rep) else grid.r
    lines = [
        f"# representation={field.rep.value}",
        "# nt={} ntheta={} T={} omega={} rho={}".format(
            grid.nt, grid.ntheta, _fmt(grid.T), _fmt(grid.sector.omega), _fmt(grid.sector.rho)
        ),
        COLUMN_HEADER,
    ]
    values = field.values
    theta_texts = [_fmt(th) for th in grid.theta]
    for i in range(grid.nt):
        ci = _fmt(coord[i])
        row = values[i]
        lines.extend(f"{ci},{theta_texts[j]},{_fmt(row[j])}" for j in range(grid.ntheta))
    out = Path(path)
    out.write_text("\n".join(lines) + "\n")
    return out


def _parse_number(text: str, lineno: int, what: str, kind=float):
    try:
        return kind(text)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: {what} expects {'an integer' if kind is int else 'a number'},"
            f" got {text!r}"
        ) from None


def read_field_csv(path: str | Path) -> ScalarField:
    """Read a field file back into a :class:`ScalarField`.

    Raises :class:`~conebiharm.errors.ConfigError` naming the offending line
    for any malformed header, row, count mismatch, or coordinate that does
    not belong to the declared grid.
    """
    source = Path(path)
    text = source.read_text()
    lines = text.splitlines()
    if not lines or all(not ln.strip() for ln in lines):
        raise ConfigError(f"{source}: empty field file")

    m = _REP_LINE.match(lines[0])
    if m is None:
        raise ConfigError(f"line 1: expected '# representation=<tag>', got {lines[0]!r}")
    try:
        rep = Representation(m.group("tag"))
    except ValueError:
        raise ConfigError(f"line 1: unknown representation {m.group('tag')!r}") from None

    if len(lines) < 2 or (m := _GRID_LINE.match(lines[1])) is None:
        got = lines[1] if len(lines) > 1 else "<missing>"
        raise ConfigError(
            f"line 2: expected '# nt=.. ntheta=.. T=.. omega=.. rho=..', got {got!r}"
        )
    nt = _parse_number(m.group("nt"), 2, "nt", int)
    ntheta = _parse_number(m.group("ntheta"), 2, "ntheta", int)
    T = _parse_number(m.group("T"), 2, "T")
    omega = _parse_number(m.group("omega"), 2, "omega")
    rho = _parse_number(m.group("rho"), 2, "rho")

    if len(lines) < 3 or lines[2] != COLUMN_HEADER:
        got = lines[2] if len(lines) > 2 else "<missing>"
        raise ConfigError(f"line 3: expected column header {COLUMN_HEADER!r}, got {got!r}")

    grid = StripGrid(SectorSpec(omega=omega, rho=rho), T=T, nt=nt, ntheta=ntheta)
    coord = grid.t if _is_strip(rep) else grid.r

    rows = lines[3:]
    while rows and not rows[-1].strip():
        rows.pop()
    expected = nt * ntheta
    if len(rows) != expected:
        raise ConfigError(
            f"{source}: declared grid {nt}x{ntheta} needs {expected} rows, file has {len(rows)}"
        )

    values = np.empty(grid.shape)
    for idx, raw in enumerate(rows):
        lineno = idx + 4
        parts = raw.split(",")
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: expected 'coord,theta,value', got {raw!r}")
        c = _parse_number(parts[0], lineno, "coordinate")
        th = _parse_number(parts[1], lineno, "theta")
        val = _parse_number(parts[2], lineno, "value")
        i, j = divmod(idx, ntheta)
        if not _close(c, coord[i]) or not _close(th, grid.theta[j]):
            raise ConfigError(
                f"line {lineno}: coordinates ({parts[0]}, {parts[1]}) do not match "
                f"node ({_fmt(coord[i])}, {_fmt(grid.theta[j])}) of the declared grid"
            )
        values[i, j] = val
    return ScalarField(grid, values, rep)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))
