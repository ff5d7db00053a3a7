"""Clamped fourth-order problem Delta^2 u - k Delta u = f on a plane sector.

Core pieces:

* :mod:`conebiharm.geometry`     — sector/strip grids, exponent tables, field containers
* :mod:`conebiharm.pencil`       — transcendental root counting, tau, admissibility
* :mod:`conebiharm.operators`    — polar operators, block operators, discrete X-norm
* :mod:`conebiharm.strip_solver` — log-radial block system assembly, solve, reconstruction
* :mod:`conebiharm.regularity`   — weighted norms, dyadic exponent probes, claim verdicts
* :mod:`conebiharm.mms`          — manufactured solutions and convergence studies
* :mod:`conebiharm.service`      — request/response models and HTTP endpoints
* :mod:`conebiharm.cli`          — command-line front end
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import ConebiharmError, ConfigError, DomainError, NumericError
from .geometry import (
    BlockField,
    MaskedField,
    ExponentSet,
    Representation,
    ScalarField,
    SectorSpec,
    StripGrid,
    from_strip,
    inverse_log_map,
    log_map,
    to_strip,
    weight_exponents,
)

__all__ = [
    "__version__",
    "ConebiharmError",
    "ConfigError",
    "DomainError",
    "NumericError",
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
