"""Finite-strip solver for the clamped fourth-order sector problem.

The sector equation

    Lambda2 v - k Lambda1 v = f,     v = dv/dtheta = 0 at theta = 0, omega,

is transformed to the strip [0, T] x [0, omega] via t = ln(rho/r) and the
substitution V1 = v / r^(nu+1), nu = 3 - 2/p.  With the conjugated Euler
derivative D = d/dt - nu (so that D^m V1 = r^(-nu) (r d/dr)^m (v/r)) and
V2 = D^2 V1, multiplying the equation by r^3 / r^nu yields the block system

    D^2 V1 - V2 = 0
    D^2 V2 + (d2+1)^2 V1 + 2 (d2-1) V2
        - k rho^2 e^(-2t) [ (d2+1) V1 - 2 D V1 + V2 ]  =  F2,

    F2(t, theta) = rho^(3-nu) e^((nu-3) t) f(rho e^(-t), theta),

where d2 = d^2/dtheta^2.  Boundary conditions: V1 = V2 = 0 at t = 0 and
t = T (the far end truncates the semi-infinite strip; its influence decays
exponentially and is measured by :func:`truncation_study`), and clamped
angular edges handled by the ghost-reflection closure of the clamped
derivative matrices.

Discretely the interior unknowns stack as x = [V1; V2] (t-major within each
component) and the blocks are Kronecker products of one-dimensional
matrices; the sparse system is factorized with SuperLU.

Recovery of the sector solution uses v = r^(nu+1) V1 and, for derivatives,
the Euler ladder W_m = d^m V1 / dt^m obtained from V1, V2 and first/second
differences of V2 through D^2 V1 = V2:

    W2 = V2 + 2 nu W1 - nu^2 W0,
    W3 = (d/dt) V2 + 2 nu W2 - nu^2 W1,
    W4 = (d^2/dt^2) V2 + 2 nu W3 - nu^2 W2,

after which  d^i v / dr^i = r^(nu+1-i) sum_m c[m] W_m  with the c[m] read
off the falling product  prod_{l=0}^{i-1} ((nu+1-l) - X),  X^m standing for
W_m (one factor of (nu+1-l) - X per radial derivative, since
r d/dr = -d/dt acts on r^(nu+1-l) as multiplication by nu+1-l).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, DomainError, NumericError
from .geometry import ExponentSet, MaskedField, Representation, ScalarField, StripGrid
from .operators import build_theta_derivatives, derivative_matrix
from .pencil import check_admissibility

__all__ = [
    "StripProblem",
    "StripSolution",
    "TruncationReport",
    "assemble",
    "build_rhs",
    "solve",
    "reconstruct_v",
    "reconstruct_derivative",
    "radial_power_coeffs",
    "truncation_study",
]


@dataclass(frozen=True)
class StripProblem:
    """A discretized strip boundary-value problem.

    ``order`` is the interior stencil order; only 2 is supported because the
    clamped angular closure (ghost reflection) is second order — requesting 4
    raises :class:`ConfigError` rather than silently degrading.
    """

    grid: StripGrid
    exps: ExponentSet
    order: int = 2

    def __post_init__(self) -> None:
        if self.order != 2:
            raise ConfigError(
                f"strip solver supports order 2 only (clamped angular closure); got {self.order}"
            )
        if self.grid.nt < 5 or self.grid.ntheta < 7:
            raise DomainError(
                f"grid too coarse for the block system: nt={self.grid.nt}, ntheta={self.grid.ntheta}"
            )

    @property
    def n_interior(self) -> tuple[int, int]:
        return self.grid.nt - 2, self.grid.ntheta - 2


def _interior_t_matrices(grid: StripGrid) -> tuple[np.ndarray, np.ndarray]:
    """First/second t-derivative matrices restricted to interior unknowns.

    Dropping the edge columns is exact because the stacked unknowns carry
    homogeneous Dirichlet values at t = 0 and t = T.
    """
    D1, _ = derivative_matrix(grid.t, 1, 2)
    D2, _ = derivative_matrix(grid.t, 2, 2)
    return D1[1:-1, 1:-1], D2[1:-1, 1:-1]


def assemble(problem: StripProblem) -> sp.csr_matrix:
    """Assemble the sparse block matrix for the interior unknowns [V1; V2]."""
    grid = problem.grid
    nu = problem.exps.nu
    k = grid.sector.k
    rho = grid.sector.rho
    mt, mth = problem.n_interior

    D1t, D2t = _interior_t_matrices(grid)
    It = np.eye(mt)
    Tt = D2t - 2.0 * nu * D1t + nu**2 * It  # (d/dt - nu)^2

    tset = build_theta_derivatives(grid.ntheta, grid.sector.omega, order=2)
    C2 = tset.clamped_m(2)[1:-1, 1:-1]
    C4 = tset.clamped_m(4)[1:-1, 1:-1]
    Ith = np.eye(mth)

    kron = lambda a, b: sp.kron(sp.csr_matrix(a), sp.csr_matrix(b), format="csr")
    n = mt * mth

    b11 = kron(Tt, Ith)
    b12 = -sp.identity(n, format="csr")
    b21 = kron(It, C4 + 2.0 * C2 + Ith)
    b22 = kron(Tt, Ith) + kron(It, 2.0 * (C2 - Ith))
    if k != 0.0:
        E = np.diag(np.exp(-2.0 * grid.t[1:-1]))
        scale = k * rho**2
        b21 = b21 - scale * kron(E, C2 + Ith) + 2.0 * scale * kron(E @ (D1t - nu * It), Ith)
        b22 = b22 - scale * kron(E, Ith)
    return sp.bmat([[b11, b12], [b21, b22]], format="csr")


def _source_values(problem: StripProblem, source) -> np.ndarray:
    grid = problem.grid
    if callable(source):
        vals = np.asarray(source(grid.r[:, None], grid.theta[None, :]), dtype=float)
        vals = np.broadcast_to(vals, grid.shape)
    else:
        vals = np.asarray(source, dtype=float)
        if vals.shape != grid.shape:
            raise DomainError(f"source array shape {vals.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(vals)):
        raise DomainError("source values must be finite")
    return vals


def build_rhs(problem: StripProblem, source) -> np.ndarray:
    """Interior right-hand side [0; F2] for a sector source f(r, theta).

    ``source`` is either a vectorized callable f(r, theta) or a full-grid
    array of f values; it is scaled to F2 = rho^(3-nu) e^((nu-3) t) f.
    """
    grid = problem.grid
    nu = problem.exps.nu
    f = _source_values(problem, source)
    f2 = grid.sector.rho ** (3.0 - nu) * np.exp((nu - 3.0) * grid.t)[:, None] * f
    interior = f2[1:-1, 1:-1].ravel()
    return np.concatenate([np.zeros_like(interior), interior])


@dataclass(frozen=True)
class StripSolution:
    """Solved strip fields with the algebraic residual of the linear solve."""

    problem: StripProblem
    v1: ScalarField
    v2: ScalarField
    residual: float


def solve(problem: StripProblem, source) -> StripSolution:
    """Solve the block system; inadmissible (omega, p) pairs only warn.

    The finite-strip problem is well posed for any opening, but outside the
    admissible range the unbounded-strip theory (and hence the decay
    interpretation of the solution) no longer applies — that situation is
    reported as a warning, not an error.
    """
    grid = problem.grid
    report = check_admissibility(grid.sector.omega, problem.exps.p)
    if not report.admissible:
        warnings.warn(
            "pair (omega, p) is outside the admissible range: "
            f"omega * (3 - 2/p) = {report.lhs:.6f} >= tau = {report.tau:.6f}; "
            "the truncated-strip solve proceeds but the decay theory does not apply",
            UserWarning,
            stacklevel=2,
        )

    A = assemble(problem)
    b = build_rhs(problem, source)
    try:
        lu = spla.splu(A.tocsc())
        x = lu.solve(b)
    except RuntimeError as exc:  # singular factor, pivot breakdown
        raise NumericError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericError("linear solve produced non-finite values")
    residual = float(
        np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300)
    )

    mt, mth = problem.n_interior
    half = mt * mth
    v1 = np.zeros(grid.shape)
    v2 = np.zeros(grid.shape)
    v1[1:-1, 1:-1] = x[:half].reshape(mt, mth)
    v2[1:-1, 1:-1] = x[half:].reshape(mt, mth)
    return StripSolution(
        problem=problem,
        v1=ScalarField(grid, v1, Representation.STRIP_V1),
        v2=ScalarField(grid, v2, Representation.STRIP_V2),
        residual=residual,
    )


# ---------------------------------------------------------------------------
# sector reconstruction
# ---------------------------------------------------------------------------


def reconstruct_v(solution: StripSolution) -> ScalarField:
    """Sector solution v = r^(nu+1) V1 (algebraic, valid on the whole grid)."""
    grid = solution.problem.grid
    nu = solution.problem.exps.nu
    vals = grid.r[:, None] ** (nu + 1.0) * solution.v1.values
    return ScalarField(grid, vals, Representation.SECTOR_V)


def radial_power_coeffs(nu: float, i: int) -> np.ndarray:
    """Coefficients c with  d^i v/dr^i = r^(nu+1-i) sum_m c[m] d^m V1/dt^m.

    Polynomial expansion of  prod_{l=0}^{i-1} ((nu+1-l) - X)  in powers of X;
    c[m] multiplies the m-th Euler derivative W_m.
    """
    if i < 0 or i > 4:
        raise DomainError(f"radial derivative order must be 0..4, got {i}")
    c = np.array([1.0])
    for l in range(i):
        c = np.convolve(c, np.array([nu + 1.0 - l, -1.0]))
    return c


def _euler_ladder(solution: StripSolution) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Euler derivatives W_0..W_4 of V1 with per-level valid t-row masks."""
    grid = solution.problem.grid
    nu = solution.problem.exps.nu
    v1 = solution.v1.values
    v2 = solution.v2.values
    D1, c1 = derivative_matrix(grid.t, 1, 2)
    D2, c2 = derivative_matrix(grid.t, 2, 2)

    w0 = v1
    w1 = D1 @ v1
    w2 = v2 + 2.0 * nu * w1 - nu**2 * w0
    w3 = D1 @ v2 + 2.0 * nu * w2 - nu**2 * w1
    w4 = D2 @ v2 + 2.0 * nu * w3 - nu**2 * w2
    allrows = np.ones(grid.nt, dtype=bool)
    masks = [allrows, c1, c1, c1, c1 & c2]
    return [w0, w1, w2, w3, w4], masks


def reconstruct_derivative(solution: StripSolution, i: int, j: int) -> MaskedField:
    """Mixed derivative d^i/dr^i d^j/dtheta^j of the sector solution v.

    Radial orders up to 4 via the Euler ladder, angular orders up to 4 via
    evaluation stencils; rows/columns where a required stencil is not
    centered are masked invalid.
    """
    if not (0 <= j <= 4):
        raise DomainError(f"angular derivative order must be 0..4, got {j}")
    grid = solution.problem.grid
    nu = solution.problem.exps.nu
    ws, wmasks = _euler_ladder(solution)
    c = radial_power_coeffs(nu, i)

    combo = sum(cm * ws[m] for m, cm in enumerate(c))
    tmask = np.ones(grid.nt, dtype=bool)
    for m in range(len(c)):
        tmask &= wmasks[m]

    if j == 0:
        vals = combo
        thmask = np.ones(grid.ntheta, dtype=bool)
    else:
        tset = build_theta_derivatives(grid.ntheta, grid.sector.omega, order=2)
        vals = combo @ tset.eval_m(j).T
        thmask = tset.eval_centered(j)

    vals = grid.r[:, None] ** (nu + 1.0 - i) * vals
    return MaskedField(grid, vals, tmask[:, None] & thmask[None, :])


# ---------------------------------------------------------------------------
# far-boundary truncation diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationReport:
    """Effect of moving the artificial far boundary from T to factor * T."""

    base_T: float
    extended_T: float
    t_cut: float
    rel_change: float


def truncation_study(problem: StripProblem, source, *, factor: int = 2,
                     t_cut: float | None = None) -> TruncationReport:
    """Re-solve on an extended strip at the same spacing and compare.

    The extended grid keeps ht (nt' - 1 = factor * (nt - 1)) so the shared
    nodes coincide exactly; the report gives the relative change of V1 on
    t <= t_cut (default T/2).  For sources that decay in t this change
    measures only the artificial far-boundary placement.
    """
    if not callable(source):
        raise DomainError("truncation_study needs a callable source to evaluate on the extended grid")
    if factor < 2:
        raise DomainError(f"extension factor must be >= 2, got {factor}")
    grid = problem.grid
    cut = 0.5 * grid.T if t_cut is None else float(t_cut)
    if not (0.0 < cut <= grid.T):
        raise DomainError(f"t_cut={cut} outside (0, T={grid.T}]")

    extended = StripProblem(
        grid=StripGrid(
            sector=grid.sector,
            T=factor * grid.T,
            nt=factor * (grid.nt - 1) + 1,
            ntheta=grid.ntheta,
        ),
        exps=problem.exps,
        order=problem.order,
    )
    base = solve(problem, source)
    wide = solve(extended, source)

    rows = grid.t <= cut + 1e-12
    a = base.v1.values[rows]
    b = wide.v1.values[: int(np.count_nonzero(rows))]
    scale = max(float(np.max(np.abs(a))), 1e-300)
    return TruncationReport(
        base_T=grid.T,
        extended_T=extended.grid.T,
        t_cut=cut,
        rel_change=float(np.max(np.abs(a - b)) / scale),
    )
