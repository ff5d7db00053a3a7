"""Sector geometry, log-radial strip grids, and exponent bookkeeping.

The computational domain is the plane sector

    S = { (r, theta) : 0 < r < rho, 0 < theta < omega },

mapped onto the half-strip Sigma = (0, inf) x (0, omega) by the log-radial
change of variables

    t = ln(rho / r),        r = rho * e^{-t},

so the vertex r -> 0 becomes t -> +inf and the arc r = rho becomes t = 0.
Radial scaling turns into translation: r d/dr = -d/dt.

A solution v on the sector and the strip unknown V1 are tied by

    V1(t, theta) = v(r, theta) / r^{nu+1}   at  r = rho * e^{-t},

with nu = 3 - 2/p in (1, 3) for p in (1, inf).  The weighted-space exponent
table gamma_0..gamma_4 (one exponent per radial derivative order) is carried
alongside nu in :class:`ExponentSet`.

Grids are uniform in (t, theta); the image radii r_i = rho * e^{-t_i} are
geometrically graded, so each unit of t covers a fixed number of dyadic
annuli (ln 2 of t per halving of r).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "SectorSpec",
    "ExponentSet",
    "StripGrid",
    "Representation",
    "ScalarField",
    "BlockField",
    "MaskedField",
    "log_map",
    "inverse_log_map",
    "weight_exponents",
    "to_strip",
    "from_strip",
]


@dataclass(frozen=True)
class SectorSpec:
    """Plane sector with opening ``omega``, radius ``rho``, and shift ``k``.

    Parameters
    ----------
    omega : float
        Opening angle in (0, 2*pi].
    rho : float
        Sector radius, > 0 (typically <= 1; the analysis normalizes to
        small rho).
    k : float
        Nonnegative coefficient of the second-order term in
        Delta^2 u - k Delta u = f.
    """

    omega: float
    rho: float = 0.1
    k: float = 0.0

    def __post_init__(self) -> None:
        if not (0.0 < self.omega <= 2.0 * math.pi):
            raise DomainError(f"sector opening omega={self.omega!r} not in (0, 2*pi]")
        if not (self.rho > 0.0 and math.isfinite(self.rho)):
            raise DomainError(f"sector radius rho={self.rho!r} must be finite and > 0")
        if not (self.k >= 0.0 and math.isfinite(self.k)):
            raise DomainError(f"lower-order coefficient k={self.k!r} must be finite and >= 0")


@dataclass(frozen=True)
class ExponentSet:
    """Integrability exponent ``p`` with its derived strip/weight exponents.

    nu = 3 - 2/p is the strip scaling exponent; gamma[i] is the radial weight
    attached to an i-th radial derivative in the weighted-membership table:

        gamma_0 = -4 + 1/p    (no radial derivative)
        gamma_1 = -3 + 1/p
        gamma_2 = -2 + 1/p
        gamma_3 =  2 - 1/p
        gamma_4 =  3 - 1/p    (four radial derivatives)
    """

    p: float
    nu: float = field(init=False)
    gamma: tuple[float, float, float, float, float] = field(init=False)

    def __post_init__(self) -> None:
        if not (self.p > 1.0 and math.isfinite(self.p)):
            raise DomainError(f"integrability exponent p={self.p!r} must be finite and > 1")
        nu = 3.0 - 2.0 / self.p
        inv = 1.0 / self.p
        object.__setattr__(self, "nu", nu)
        object.__setattr__(
            self,
            "gamma",
            (-4.0 + inv, -3.0 + inv, -2.0 + inv, 2.0 - inv, 3.0 - inv),
        )


def weight_exponents(p: float) -> ExponentSet:
    """Return the exponent table (nu, gamma_0..gamma_4) for integrability p."""
    return ExponentSet(p)


def log_map(r: np.ndarray | float, rho: float) -> np.ndarray | float:
    """Map sector radii to strip coordinates: t = ln(rho / r), r in (0, rho]."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0) or np.any(r_arr > rho * (1.0 + 1e-12)):
        raise DomainError(f"radii must lie in (0, rho={rho}]")
    out = np.log(rho / r_arr)
    return float(out) if np.ndim(r) == 0 else out


def inverse_log_map(t: np.ndarray | float, rho: float) -> np.ndarray | float:
    """Map strip coordinates back to radii: r = rho * e^{-t}, t >= 0."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -1e-12):
        raise DomainError("strip coordinate t must be >= 0")
    out = rho * np.exp(-t_arr)
    return float(out) if np.ndim(t) == 0 else out


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class StripGrid:
    """Uniform tensor grid on the strip [0, T] x [0, omega].

    Node i in t maps to radius r_i = rho * e^{-t_i}; node t=0 maps exactly
    to r = rho.  Trapezoid quadrature weights are provided per direction
    (they sum to T and omega respectively, so their tensor product integrates
    over the strip; sector integrals additionally need the Jacobian r = dr/dt
    magnitude, supplied by the caller or by the regularity module).
    """

    sector: SectorSpec
    T: float
    nt: int
    ntheta: int
    t: np.ndarray = field(init=False, repr=False, compare=False)
    theta: np.ndarray = field(init=False, repr=False, compare=False)
    r: np.ndarray = field(init=False, repr=False, compare=False)
    wt: np.ndarray = field(init=False, repr=False, compare=False)
    wtheta: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise DomainError(f"truncation length T={self.T!r} must be finite and > 0")
        if self.nt < 3 or self.ntheta < 3:
            raise DomainError(f"grid needs nt >= 3 and ntheta >= 3, got ({self.nt}, {self.ntheta})")
        t = np.linspace(0.0, self.T, self.nt)
        theta = np.linspace(0.0, self.sector.omega, self.ntheta)
        r = self.sector.rho * np.exp(-t)
        r[0] = self.sector.rho  # exact, not exp(-0.0) round-off territory
        wt = _trapezoid_weights(self.nt, self.ht)
        wth = _trapezoid_weights(self.ntheta, self.htheta)
        for name, arr in (("t", t), ("theta", theta), ("r", r), ("wt", wt), ("wtheta", wth)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def ht(self) -> float:
        return self.T / (self.nt - 1)

    @property
    def htheta(self) -> float:
        return self.sector.omega / (self.ntheta - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nt, self.ntheta)


class Representation(str, enum.Enum):
    """What a field's values mean at node (i, j).

    SECTOR_V  — v(r_i, theta_j), the physical solution.
    SECTOR_W  — w(r_i, theta_j) = v/r, the reduced unknown.
    STRIP_PHI — phi(t_i, theta_j) = w(rho e^{-t_i}, theta_j).
    STRIP_V1  — V1(t_i, theta_j) = v / r^{nu+1}.
    STRIP_V2  — V2(t_i, theta_j) = (d/dt - nu)^2 V1.
    """

    SECTOR_V = "sector_v"
    SECTOR_W = "sector_w"
    STRIP_PHI = "strip_phi"
    STRIP_V1 = "strip_v1"
    STRIP_V2 = "strip_v2"


@dataclass(frozen=True)
class ScalarField:
    """Immutable grid function: values[i, j] at (t_i or r_i, theta_j)."""

    grid: StripGrid
    values: np.ndarray
    rep: Representation

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != self.grid.shape:
            raise DomainError(
                f"field shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "rep", Representation(self.rep))


@dataclass(frozen=True)
class BlockField:
    """Pair (first, second) of scalar fields on one grid — a block unknown."""

    first: ScalarField
    second: ScalarField

    def __post_init__(self) -> None:
        if self.first.grid is not self.second.grid and self.first.grid != self.second.grid:
            raise DomainError("block components must share a grid")


@dataclass(frozen=True)
class MaskedField:
    """Operator output: values valid only where ``valid`` is True.

    Finite-difference operators cannot evaluate on the full grid — stencils
    need room — so the rim is tagged invalid and filled with NaN rather than
    silently zeroed.  Values must be finite exactly on the valid set.
    """

    grid: StripGrid
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True)
        mask = np.array(self.valid, dtype=bool, copy=True)
        if vals.shape != self.grid.shape or mask.shape != self.grid.shape:
            raise DomainError(
                f"masked field shapes {vals.shape}/{mask.shape} do not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals[mask])):
            raise DomainError("masked field must be finite on its valid set")
        vals[~mask] = np.nan
        vals.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "valid", mask)

    def valid_values(self) -> np.ndarray:
        return self.values[self.valid]


def to_strip(v_field: ScalarField, exps: ExponentSet) -> ScalarField:
    """Convert a sector solution field to the strip unknown V1 = v / r^{nu+1}."""
    if v_field.rep is not Representation.SECTOR_V:
        raise DomainError(f"to_strip expects a {Representation.SECTOR_V.value} field, got {v_field.rep.value}")
    scale = v_field.grid.r ** (exps.nu + 1.0)
    return ScalarField(v_field.grid, v_field.values / scale[:, None], Representation.STRIP_V1)


def from_strip(v1_field: ScalarField, exps: ExponentSet) -> ScalarField:
    """Convert the strip unknown V1 back to the sector solution v = r^{nu+1} V1."""
    if v1_field.rep is not Representation.STRIP_V1:
        raise DomainError(f"from_strip expects a {Representation.STRIP_V1.value} field, got {v1_field.rep.value}")
    scale = v1_field.grid.r ** (exps.nu + 1.0)
    return ScalarField(v1_field.grid, v1_field.values * scale[:, None], Representation.SECTOR_V)
