"""Transcendental characteristic equation: roots, tau, admissibility.

The characteristic function of the operator pencil factors as

    (sinh z + z) * (sinh z - z) = 0,      Re z > 0,

and each factor is tracked as its own branch:

* ``Branch.MINUS`` (label ``"sinh-z"``): roots satisfying sinh z = -z,
  i.e. zeros of the factor sinh(z) + z.  The smallest-|Im| root of the
  whole pencil lies on this branch, at z ~= 2.25073 + 4.21239 i.
* ``Branch.PLUS``  (label ``"sinh+z"``): roots satisfying sinh z = +z,
  i.e. zeros of sinh(z) - z; its first root is z ~= 2.76868 + 7.49768 i.

The quantity

    tau = min |Im z|  over all pencil roots with Re z > 0  ~= 4.21239

drives the admissibility condition omega * (3 - 2/p) < tau (strict): for
omega <= tau/3 every p in (1, inf) is admissible (case 1); otherwise
admissibility holds exactly for 1 < p < p_max = 2*omega / (3*omega - tau)
(case 2; for omega >= tau that bound is <= 1, so no p > 1 qualifies).

Root counting uses the argument principle — an adaptive trapezoid rule for
(1/2*pi*i) * contour_integral(f'/f) over rectangle boundaries, guarded by a
boundary-clearance test with small-inflation retries — and root finding
bisects rectangles until each holds a single root, then polishes with a
damped Newton iteration.
"""

from __future__ import annotations

import cmath
import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericError

__all__ = [
    "Branch",
    "Rect",
    "PencilRoot",
    "AdmissibilityReport",
    "count_roots",
    "find_roots",
    "compute_tau",
    "tau_root",
    "check_admissibility",
]

#: residual bound every returned root must satisfy
ROOT_RESIDUAL_BOUND = 1e-10

#: minimum |f| allowed on a counting contour before the rectangle is retried
BOUNDARY_CLEARANCE = 1e-6


class Branch(enum.Enum):
    """Which equation a root satisfies.

    MINUS — sinh z = -z (zeros of sinh z + z); contains the tau-defining root.
    PLUS  — sinh z = +z (zeros of sinh z - z).
    """

    MINUS = "sinh-z"
    PLUS = "sinh+z"

    @property
    def sign(self) -> float:
        """+1 for the factor sinh z + z, -1 for sinh z - z."""
        return 1.0 if self is Branch.MINUS else -1.0

    def f(self, z):
        """Factor value: sinh(z) + sign * z (vectorized over numpy arrays)."""
        return np.sinh(z) + self.sign * z

    def df(self, z):
        """Factor derivative: cosh(z) + sign."""
        return np.cosh(z) + self.sign


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in the complex plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self) -> None:
        if not (self.re_min <= self.re_max and self.im_min <= self.im_max):
            raise DomainError(f"degenerate rectangle bounds: {self}")
        if not all(map(math.isfinite, (self.re_min, self.re_max, self.im_min, self.im_max))):
            raise DomainError("rectangle bounds must be finite")

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= z.real <= self.re_max + pad
                and self.im_min - pad <= z.imag <= self.im_max + pad)

    def inflated(self, factor: float) -> "Rect":
        dw = 0.5 * self.width * factor
        dh = 0.5 * self.height * factor
        return Rect(self.re_min - dw, self.re_max + dw, self.im_min - dh, self.im_max + dh)


@dataclass(frozen=True)
class PencilRoot:
    """A polished pencil root with its branch and certificate data."""

    z: complex
    branch: Branch
    residual: float
    iterations: int

    def __post_init__(self) -> None:
        if self.z.real <= 0.0:
            raise DomainError(f"pencil roots are tracked in Re z > 0, got {self.z}")
        if self.residual > ROOT_RESIDUAL_BOUND:
            raise NumericError(
                f"root residual {self.residual:.3e} exceeds bound {ROOT_RESIDUAL_BOUND:.1e}"
            )


def _boundary_samples(rect: Rect, n_per_edge: int) -> np.ndarray:
    """Counterclockwise boundary polyline, each edge split into n_per_edge parts."""
    a, b = rect.re_min, rect.re_max
    c, d = rect.im_min, rect.im_max
    s = np.linspace(0.0, 1.0, n_per_edge + 1)
    bottom = a + s * (b - a) + 1j * c
    right = b + 1j * (c + s * (d - c))
    top = b + s * (a - b) + 1j * d
    left = a + 1j * (d + s * (c - d))
    # drop duplicated corners when concatenating; close the loop explicitly
    return np.concatenate([bottom[:-1], right[:-1], top[:-1], left])


def _winding_integral(rect: Rect, branch: Branch, n_per_edge: int) -> complex:
    """Trapezoid approximation of (1/2*pi*i) * contour_integral(f'/f dz)."""
    z = _boundary_samples(rect, n_per_edge)
    g = branch.df(z) / branch.f(z)
    dz = np.diff(z)
    integral = np.sum(0.5 * (g[:-1] + g[1:]) * dz)
    return integral / (2j * math.pi)


def count_roots(rect: Rect, branch: Branch, *, clearance: float = BOUNDARY_CLEARANCE,
                max_inflations: int = 8) -> int:
    """Count pencil roots of one branch inside a rectangle (argument principle).

    Zero-area rectangles count 0.  If the boundary passes too close to a root
    (min |f| on the contour <= ``clearance``), the rectangle is inflated by 1%
    and retried, up to ``max_inflations`` times; persistent failure raises
    :class:`NumericError`.  The trapezoid rule is refined until the winding
    number is stably integral.
    """
    if rect.width == 0.0 or rect.height == 0.0:
        return 0
    work = rect
    for _ in range(max_inflations + 1):
        # clearance probe; a root closer to the contour than the probe spacing
        # shows up later as a stabilization stall, handled the same way
        probe = branch.f(_boundary_samples(work, 256))
        if np.min(np.abs(probe)) > clearance:
            n = _stable_winding(work, branch)
            if n is not None:
                return n
        work = work.inflated(0.01)
    raise NumericError(
        f"contour of {rect} stays too close to a {branch.value} root "
        f"after {max_inflations} inflation retries"
    )


def _stable_winding(rect: Rect, branch: Branch) -> int | None:
    """Refine the trapezoid winding integral until stably integral, else None."""
    previous = None
    n_per_edge = 64
    while n_per_edge <= 2 ** 15:
        w = _winding_integral(rect, branch, n_per_edge)
        nearest = round(w.real)
        if previous is not None and abs(w - previous) < 1e-4 and abs(w - nearest) < 1e-3:
            return int(nearest)
        previous = w
        n_per_edge *= 2
    return None


def _newton_polish(z0: complex, branch: Branch, tol: float, max_iter: int = 100):
    """Damped Newton iteration on one factor; returns (z, residual, iterations)."""
    z = complex(z0)
    fz = complex(branch.f(z))
    for it in range(1, max_iter + 1):
        if abs(fz) <= tol:
            return z, abs(fz), it - 1
        dfz = complex(branch.df(z))
        if dfz == 0:
            break
        step = fz / dfz
        alpha = 1.0
        while alpha > 1e-6:
            trial = z - alpha * step
            f_trial = complex(branch.f(trial))
            if abs(f_trial) < abs(fz):
                z, fz = trial, f_trial
                break
            alpha *= 0.5
        else:
            break  # no descent along the Newton direction: stalled
    return z, abs(fz), max_iter


def find_roots(rect: Rect, branch: Branch, *, tol: float = 1e-12,
               _depth: int = 0) -> list[PencilRoot]:
    """Find all roots of one branch inside a rectangle.

    Bisects the rectangle until each piece holds at most one root (counted by
    the argument principle), then polishes each with damped Newton.  Every
    returned root carries |f(z)| <= ``ROOT_RESIDUAL_BOUND``; a Newton stall
    raises :class:`NumericError` carrying the last iterate.
    """
    n = count_roots(rect, branch)
    if n == 0:
        return []
    if n == 1:
        z, res, iters = _newton_polish(rect.center, branch, tol)
        if res <= min(tol * 100, ROOT_RESIDUAL_BOUND) and rect.contains(z, pad=1e-9):
            return [PencilRoot(z, branch, res, iters)]
        if _depth > 60:
            raise NumericError(
                f"Newton failed on {branch.value} in {rect}: last iterate {z}, residual {res:.3e}"
            )
        # center's basin led elsewhere: split and keep the half that counts 1
        return _bisect(rect, branch, tol, _depth)
    if _depth > 60:
        raise NumericError(f"bisection depth exhausted on {rect} with {n} roots")
    return _bisect(rect, branch, tol, _depth)


def _bisect(rect: Rect, branch: Branch, tol: float, depth: int) -> list[PencilRoot]:
    split_vertical = rect.width >= rect.height
    # a split line may graze a root; jitter the split fraction until both
    # halves count cleanly
    for frac in (0.5, 0.53, 0.47, 0.58, 0.42, 0.65, 0.35):
        if split_vertical:
            mid = rect.re_min + frac * rect.width
            halves = (Rect(rect.re_min, mid, rect.im_min, rect.im_max),
                      Rect(mid, rect.re_max, rect.im_min, rect.im_max))
        else:
            mid = rect.im_min + frac * rect.height
            halves = (Rect(rect.re_min, rect.re_max, rect.im_min, mid),
                      Rect(rect.re_min, rect.re_max, mid, rect.im_max))
        try:
            found: list[PencilRoot] = []
            for half in halves:
                found.extend(find_roots(half, branch, tol=tol, _depth=depth + 1))
            return _dedupe(found)
        except NumericError:
            continue
    raise NumericError(f"could not split {rect} cleanly around {branch.value} roots")


def _dedupe(roots: list[PencilRoot]) -> list[PencilRoot]:
    kept: list[PencilRoot] = []
    for root in sorted(roots, key=lambda r: (r.z.imag, r.z.real)):
        if all(abs(root.z - other.z) > 1e-8 for other in kept):
            kept.append(root)
    return kept


def _first_root_of_branch(branch: Branch) -> PencilRoot:
    """Smallest-|Im| root of one branch, by expanding upward rectangle scans."""
    # both factors vanish at z = 0, so keep the scan margin off the axes; a
    # modulus argument (|sinh z|^2 - |z|^2 = (sinh^2 x - x^2) - (y^2 - sin^2 y))
    # confines any root with 0 < Re z <= 0.03 to Im z <= 0.0304, a neighborhood
    # of the origin where neither factor has a nonzero root
    margin = 0.03
    y_hi = 6.0
    while y_hi <= 96.0:
        # roots obey |sinh z| = |z|, so Re z <= ln(2 |z|): a generous cap
        x_hi = max(4.0, math.log(4.0 * y_hi) + 1.0)
        roots = find_roots(Rect(margin, x_hi, margin, y_hi), branch)
        if roots:
            return min(roots, key=lambda r: r.z.imag)
        y_hi *= 2.0
    raise NumericError(f"no {branch.value} root found with Im z <= 96")


@functools.lru_cache(maxsize=1)
def tau_root() -> PencilRoot:
    """The pencil root of smallest |Im z| over both branches (memoized).

    Isolation certificate: each branch's expanding scan enumerates, by
    argument-principle counts, every root of that branch below its final scan
    ceiling, and a branch's ceiling is always >= the Im of its own first root
    >= the global minimum — so no root of either branch can hide below the
    returned one.  Outside the scanned x-range there is nothing to miss: roots
    obey |sinh z| = |z|, which forces Re z <= ln(2|z|) (well inside the scan
    cap), and the modulus identity cited in ``_first_root_of_branch`` empties
    the slivers next to the axes.  First call may race threads harmlessly:
    the computation is deterministic and idempotent.
    """
    candidates = [_first_root_of_branch(branch) for branch in Branch]
    return min(candidates, key=lambda r: r.z.imag)


def compute_tau() -> float:
    """Smallest |Im z| over all pencil roots with Re z > 0 (about 4.21239)."""
    return tau_root().z.imag


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the strict admissibility test omega * (3 - 2/p) < tau.

    ``case`` is 1 when omega <= tau/3 (every p in (1, inf) admissible,
    ``p_max`` is None) and 2 otherwise (``p_max = 2*omega / (3*omega - tau)``;
    a value <= 1 means no p > 1 is admissible, which happens for omega >= tau).
    """

    omega: float
    p: float
    nu: float
    lhs: float
    tau: float
    admissible: bool
    case: int
    p_max: float | None


def check_admissibility(omega: float, p: float) -> AdmissibilityReport:
    """Evaluate the admissibility inequality for an opening/integrability pair."""
    if not (0.0 < omega <= 2.0 * math.pi):
        raise DomainError(f"opening omega={omega!r} not in (0, 2*pi]")
    if not (p > 1.0 and math.isfinite(p)):
        raise DomainError(f"integrability exponent p={p!r} must be finite and > 1")
    tau = compute_tau()
    nu = 3.0 - 2.0 / p
    lhs = omega * nu
    if omega <= tau / 3.0:
        case, p_max = 1, None
    else:
        case, p_max = 2, 2.0 * omega / (3.0 * omega - tau)
    return AdmissibilityReport(
        omega=omega, p=p, nu=nu, lhs=lhs, tau=tau,
        admissible=bool(lhs < tau), case=case, p_max=p_max,
    )
