"""Exception taxonomy shared across the package.

Three failure families map onto the CLI exit codes:

* ``DomainError``   — mathematically invalid input (bad sector opening, a slice
  that violates clamped boundary conditions, an out-of-range exponent).
  CLI exit code 2.
* ``ConfigError``   — malformed or inconsistent run configuration (unknown key,
  unparseable value, unsupported discretization order).  CLI exit code 2.
* ``NumericError``  — a numerical process failed (Newton stall, contour too
  close to a root after retries, sparse factorization breakdown).
  CLI exit code 3.
"""

from __future__ import annotations


class ConebiharmError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ConebiharmError):
    """Input lies outside the mathematical domain of the operation."""


class ConfigError(ConebiharmError):
    """Run configuration is malformed or names an unsupported option."""


class NumericError(ConebiharmError):
    """A numerical procedure failed to converge or lost its guarantees."""
