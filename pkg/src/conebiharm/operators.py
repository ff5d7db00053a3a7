"""Polar differential operators and their block/strip counterparts.

Scalar operators on the sector, evaluated nodewise by finite differences:

    Lambda1 v = v_rr + (1/r) v_r + (1/r^2) v_tt                (Laplacian)
    Lambda2 v = v_rrrr + (2/r^2) v_rrtt + (1/r^4) v_tttt       (bi-Laplacian)
              + (2/r) v_rrr - (2/r^3) v_rtt - (1/r^2) v_rr
              + (4/r^4) v_tt + (1/r^3) v_r

(subscript t here meaning the angular variable theta).  Radial derivatives
use per-node stencils generated on the geometrically graded radii; angular
derivatives use uniform-grid stencils.

With w = v/r the bi-Laplacian splits into two auxiliary combinations,

    Pi1 = (r d/dr)^2 [ (r d/dr)^2 w ],
    Pi2 = 2 (d2/dtheta2 - 1) (r d/dr)^2 w + (d2/dtheta2 + 1)^2 w,
    r^3 * Lambda2 v = Pi1 + Pi2,

which :func:`pi_identity_check` verifies numerically through two independent
discretizations: the left side in log-radial coordinates (where r d/dr is a
plain uniform-grid derivative), the right side through the eight-term
expansion above in r.

Block operators act on angular slices Psi = (psi1, psi2):

    A   Psi = ( psi2,  -(d2+1)^2 psi1 - 2 (d2-1) psi2 )     d2 = d^2/dtheta^2
    A0  Psi = ( 0,      (d2+1) psi1 + psi2 )
    B2  V   = ( 0,     -2 (d/dt - nu) V1 )                  (strip fields)

with psi1 (and, for A, psi2) clamped: value and first derivative vanish at
theta = 0 and theta = omega.  Clamped application eliminates ghost nodes by
even reflection (psi_{-1} = psi_1, from the centered first-derivative
condition), the classical second-order closure.  The discrete X-norm

    ||(psi1, psi2)||_X = ||psi1||_p + ||psi1'||_p + ||psi1''||_p + ||psi2||_p

shares its derivative matrices with A0, so ||A0 Psi||_X <= ||Psi||_X holds
exactly by Minkowski's inequality — not just up to discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import ExponentSet, MaskedField, Representation, ScalarField, StripGrid

__all__ = [
    "ThetaDerivativeSet",
    "BlockSlice",
    "IdentityReport",
    "VectorIdentityReport",
    "build_theta_derivatives",
    "derivative_matrix",
    "lambda1_apply",
    "lambda2_apply",
    "pi_identity_check",
    "vector_identity_check",
    "a_apply",
    "a0_apply",
    "b2_apply",
    "x_norm",
    "lp_norm",
]

#: absolute tolerance on clamped boundary values for domain membership
BC_TOLERANCE = 1e-8

_SUPPORTED_ORDERS = (2, 4)


def _stencil(x0: float, xs: np.ndarray, m: int) -> np.ndarray:
    """Weights w with sum_i w_i f(xs_i) ~ f^(m)(x0), exact on degree < len(xs).

    Solved from the local Taylor/Vandermonde system, scaled by the mean
    spacing for conditioning (windows here are <= 8 wide, which keeps the
    system benign).
    """
    scale = max(np.mean(np.abs(xs - x0)), 1e-300)
    d = (xs - x0) / scale
    n = len(xs)
    A = np.empty((n, n))
    A[0] = 1.0
    for k in range(1, n):
        A[k] = A[k - 1] * d / k
    b = np.zeros(n)
    b[m] = 1.0
    return np.linalg.solve(A, b) / scale**m


def _centered_width(m: int, order: int) -> int:
    """Smallest odd window giving a centered m-th derivative at this order."""
    w = m + order
    return w if w % 2 == 1 else w - 1


def derivative_matrix(x: np.ndarray, m: int, order: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Dense n x n differentiation matrix on arbitrary nodes, plus a row mask.

    Rows where the centered window fits carry centered stencils and are
    flagged True in the mask; remaining rows fall back to shifted windows of
    ``m + order`` nodes (still consistent at the stated order, but excluded
    from operator masks, where only centered rows count).
    """
    n = len(x)
    wc = _centered_width(m, order)
    ws = m + order
    if n < max(wc, ws):
        raise DomainError(f"need at least {max(wc, ws)} nodes for derivative {m} at order {order}")
    D = np.zeros((n, n))
    centered = np.zeros(n, dtype=bool)
    half = wc // 2
    for i in range(n):
        if half <= i < n - half:
            window = slice(i - half, i + half + 1)
            centered[i] = True
        else:
            lo = min(max(i - ws // 2, 0), n - ws)
            window = slice(lo, lo + ws)
        D[i, window] = _stencil(x[i], x[window], m)
    return D, centered


@dataclass(frozen=True)
class ThetaDerivativeSet:
    """Angular differentiation matrices d/dtheta .. d^4/dtheta^4.

    Two families:

    * evaluation matrices (``eval_m``): no boundary-condition assumptions;
      centered stencils where they fit (``eval_centered[m]`` row masks),
      shifted consistent stencils elsewhere;
    * clamped matrices (``clamped_m``): ghost nodes eliminated by the
      reflection closure for data with psi = psi' = 0 at both edges.  Built
      for order 2 only — a fourth-order clamped closure needs more boundary
      information than the clamped conditions supply — so requesting them
      from an order-4 set raises :class:`ConfigError`.
    """

    n: int
    omega: float
    order: int
    h: float
    _eval: tuple[np.ndarray, ...]
    _eval_centered: tuple[np.ndarray, ...]
    _clamped: tuple[np.ndarray, ...] | None

    def eval_m(self, m: int) -> np.ndarray:
        """Evaluation matrix for d^m/dtheta^m, m in 1..4."""
        return self._eval[m - 1]

    def eval_centered(self, m: int) -> np.ndarray:
        """Boolean row mask: True where eval_m row is a centered stencil."""
        return self._eval_centered[m - 1]

    def clamped_m(self, m: int) -> np.ndarray:
        """Clamped-application matrix for d^m/dtheta^m, m in 1..4."""
        if self._clamped is None:
            raise ConfigError(
                "clamped derivative matrices are only built at order 2; "
                f"this set was built at order {self.order}"
            )
        return self._clamped[m - 1]


def _clamped_matrices(n: int, h: float) -> tuple[np.ndarray, ...]:
    """Full-length clamped matrices via even-reflection ghost elimination.

    A ghost column g (index -1 or n) is replaced by its mirror interior
    column (index 1 or n-2): psi(-h) = psi(h) - 2h psi'(0) + O(h^3) and
    psi'(0) = 0 for clamped data.  Centered interior stencils otherwise.
    """
    out = []
    for m in (1, 2, 3, 4):
        wc = _centered_width(m, 2)
        half = wc // 2
        offsets = np.arange(-half, half + 1, dtype=float)
        base = _stencil(0.0, offsets * h, m)
        C = np.zeros((n, n))
        for i in range(n):
            for off, w in zip(range(-half, half + 1), base):
                j = i + off
                if j < 0:
                    j = -j  # reflect across theta = 0
                elif j > n - 1:
                    j = 2 * (n - 1) - j  # reflect across theta = omega
                C[i, j] += w
        out.append(C)
    return tuple(out)


@lru_cache(maxsize=64)
def _build_theta_cached(n: int, omega: float, order: int) -> ThetaDerivativeSet:
    theta = np.linspace(0.0, omega, n)
    evals, masks = [], []
    for m in (1, 2, 3, 4):
        D, centered = derivative_matrix(theta, m, order)
        D.setflags(write=False)
        centered.setflags(write=False)
        evals.append(D)
        masks.append(centered)
    clamped = None
    if order == 2:
        cl = _clamped_matrices(n, omega / (n - 1))
        for C in cl:
            C.setflags(write=False)
        clamped = cl
    return ThetaDerivativeSet(
        n=n, omega=omega, order=order, h=omega / (n - 1),
        _eval=tuple(evals), _eval_centered=tuple(masks), _clamped=clamped,
    )


def build_theta_derivatives(ntheta: int, omega: float, order: int = 2) -> ThetaDerivativeSet:
    """Build the angular derivative family for an ``ntheta``-node grid on [0, omega]."""
    if order not in _SUPPORTED_ORDERS:
        raise ConfigError(f"unsupported discretization order {order}; supported: {_SUPPORTED_ORDERS}")
    if ntheta < 7:
        raise DomainError(f"angular grid needs ntheta >= 7, got {ntheta}")
    if not (0.0 < omega <= 2.0 * math.pi):
        raise DomainError(f"opening omega={omega!r} not in (0, 2*pi]")
    return _build_theta_cached(ntheta, float(omega), order)


# ---------------------------------------------------------------------------
# scalar polar operators on sector fields
# ---------------------------------------------------------------------------


def _sector_values(field: ScalarField) -> np.ndarray:
    if field.rep is not Representation.SECTOR_V:
        raise DomainError(f"expected a {Representation.SECTOR_V.value} field, got {field.rep.value}")
    return field.values


def _radial_matrices(grid: StripGrid, ms: tuple[int, ...], width_order: int = 2):
    """Radial derivative matrices (per-node stencils on geometric radii)."""
    out = {}
    for m in ms:
        D, centered = derivative_matrix(grid.r, m, width_order)
        out[m] = (D, centered)
    return out


def _theta_eval(grid: StripGrid, order: int = 2) -> ThetaDerivativeSet:
    return build_theta_derivatives(grid.ntheta, grid.sector.omega, order)


def lambda1_apply(field: ScalarField) -> MaskedField:
    """Nodewise Laplacian in polar form: v_rr + v_r/r + v_tt/r^2.

    Second-order stencils (3-point; exact on radial quadratics).  Valid where
    centered windows fit in both directions — one ring of nodes is masked off.
    """
    grid = field.grid
    v = _sector_values(field)
    rad = _radial_matrices(grid, (1, 2))
    tset = _theta_eval(grid)
    r = grid.r[:, None]
    vals = rad[2][0] @ v + (rad[1][0] @ v) / r + (v @ tset.eval_m(2).T) / r**2
    valid = (rad[1][1] & rad[2][1])[:, None] & tset.eval_centered(2)[None, :]
    return MaskedField(grid, vals, valid)


def lambda2_apply(field: ScalarField) -> MaskedField:
    """Nodewise bi-Laplacian via the eight-term polar expansion.

    All radial derivatives use 5-point windows (exact through degree 4, so
    v = r^4 gives 64 to round-off); angular derivatives are centered
    second-order stencils.  The two outermost rings are masked off.
    """
    grid = field.grid
    v = _sector_values(field)
    # a common 5-point radial family: every radial term exact on polynomials
    # of degree <= 4 (orders chosen so each centered window is 5 wide)
    D1r, c1 = derivative_matrix(grid.r, 1, 4)
    D2r, c2 = derivative_matrix(grid.r, 2, 3)
    D3r, c3 = derivative_matrix(grid.r, 3, 2)
    D4r, c4 = derivative_matrix(grid.r, 4, 2)
    tset = _theta_eval(grid)
    D2t, D4t = tset.eval_m(2), tset.eval_m(4)
    r = grid.r[:, None]

    v_tt = v @ D2t.T
    vals = (
        D4r @ v
        + 2.0 * (D2r @ v_tt) / r**2
        + (v @ D4t.T) / r**4
        + 2.0 * (D3r @ v) / r
        - 2.0 * (D1r @ v_tt) / r**3
        - (D2r @ v) / r**2
        + 4.0 * v_tt / r**4
        + (D1r @ v) / r**3
    )
    rvalid = c1 & c2 & c3 & c4
    tvalid = tset.eval_centered(2) & tset.eval_centered(4)
    return MaskedField(grid, vals, rvalid[:, None] & tvalid[None, :])


def _uniform_t_matrix(grid: StripGrid, m: int) -> tuple[np.ndarray, np.ndarray]:
    return derivative_matrix(grid.t, m, 2)


@dataclass(frozen=True)
class IdentityReport:
    """Max discrepancy of a two-sided identity over the jointly valid nodes."""

    max_abs: float
    max_rel: float
    n_valid: int


def _identity_report(lhs: np.ndarray, rhs: np.ndarray, valid: np.ndarray) -> IdentityReport:
    if not np.any(valid):
        raise DomainError("identity check has no jointly valid nodes; grid too coarse")
    diff = np.abs(lhs[valid] - rhs[valid])
    scale = np.max(np.abs(rhs[valid]))
    return IdentityReport(
        max_abs=float(np.max(diff)),
        max_rel=float(np.max(diff) / max(scale, 1e-300)),
        n_valid=int(np.count_nonzero(valid)),
    )


def _erode(mask: np.ndarray, k: int = 1) -> np.ndarray:
    """Shrink a boolean row mask by k rows on each flank (no wrap-around)."""
    out = mask.copy()
    for _ in range(k):
        inner = out.copy()
        inner[1:] &= out[:-1]
        inner[:-1] &= out[1:]
        out = inner
    return out


def pi_identity_check(field: ScalarField) -> IdentityReport:
    """Verify r^3 * Lambda2 v = Pi1 + Pi2 through independent discretizations.

    Left side from the definitions on w = v/r in log-radial coordinates,
    where (r d/dr)^2 is a plain second derivative in t; right side is
    r^3 * lambda2_apply(v) with radial-space stencils.  The discrepancy is a
    genuine cross-validation signal that shrinks at the discretization order.
    """
    grid = field.grid
    v = _sector_values(field)
    w = v / grid.r[:, None]
    Dt2, ct = _uniform_t_matrix(grid, 2)
    tset = _theta_eval(grid)
    D2t, D4t = tset.eval_m(2), tset.eval_m(4)

    euler2 = Dt2 @ w                      # (r d/dr)^2 w
    pi1 = Dt2 @ euler2                    # (r d/dr)^2 (r d/dr)^2 w
    pi2 = 2.0 * (euler2 @ D2t.T - euler2) + (w @ D4t.T + 2.0 * (w @ D2t.T) + w)
    lhs = pi1 + pi2

    rhs_field = lambda2_apply(field)
    rhs = grid.r[:, None] ** 3 * rhs_field.values

    valid = (
        _erode(ct)[:, None]               # Dt2 applied twice
        & (tset.eval_centered(2) & tset.eval_centered(4))[None, :]
        & rhs_field.valid
    )
    return _identity_report(lhs, rhs, valid)


@dataclass(frozen=True)
class VectorIdentityReport:
    """Discrepancies of the two block-form identities for Psi = (w, (r d/dr)^2 w).

    ``first_row_max``   — max |(r d/dr)^2 psi1 - psi2|: structurally zero.
    ``biharmonic_rel``  — second row of (r d/dr)^2 Psi - A Psi vs (0, r^3 Lambda2 v).
    ``laplacian_rel``   — second row of (A0 + B0) Psi vs (0, r Lambda1 v).
    """

    first_row_max: float
    biharmonic_rel: float
    laplacian_rel: float
    n_valid: int


def vector_identity_check(w_field: ScalarField) -> VectorIdentityReport:
    """Check both block identities on a reduced field w = v/r with clamped angles."""
    grid = w_field.grid
    if w_field.rep is not Representation.SECTOR_W:
        raise DomainError(f"expected a {Representation.SECTOR_W.value} field, got {w_field.rep.value}")
    w = w_field.values
    _require_clamped_columns(w)
    v = grid.r[:, None] * w
    v_field = ScalarField(grid, v, Representation.SECTOR_V)

    Dt1, ct1 = _uniform_t_matrix(grid, 1)
    Dt2, ct2 = _uniform_t_matrix(grid, 2)
    tset = _theta_eval(grid)
    C2, C4 = tset.clamped_m(2), tset.clamped_m(4)

    psi2 = Dt2 @ w
    # identity 1, first row: (r d/dr)^2 psi1 - (A Psi)_1 = psi2 - psi2
    first_row = psi2 - psi2
    # identity 1, second row: (r d/dr)^2 psi2 + (d2+1)^2 psi1 + 2 (d2-1) psi2
    lhs1 = Dt2 @ psi2 + (w @ C4.T + 2.0 * (w @ C2.T) + w) + 2.0 * (psi2 @ C2.T - psi2)
    rhs1_field = lambda2_apply(v_field)
    rhs1 = grid.r[:, None] ** 3 * rhs1_field.values
    valid1 = _erode(ct2)[:, None] & rhs1_field.valid

    # identity 2, second row: (d2+1) psi1 + psi2 + 2 (r d/dr) psi1
    lhs2 = (w @ C2.T + w) + psi2 - 2.0 * (Dt1 @ w)
    rhs2_field = lambda1_apply(v_field)
    rhs2 = grid.r[:, None] * rhs2_field.values
    valid2 = (ct1 & ct2)[:, None] & rhs2_field.valid

    rep1 = _identity_report(lhs1, rhs1, valid1)
    rep2 = _identity_report(lhs2, rhs2, valid2)
    return VectorIdentityReport(
        first_row_max=float(np.max(np.abs(first_row))),
        biharmonic_rel=rep1.max_rel,
        laplacian_rel=rep2.max_rel,
        n_valid=min(rep1.n_valid, rep2.n_valid),
    )


def _require_clamped_columns(w: np.ndarray) -> None:
    worst = max(np.max(np.abs(w[:, 0])), np.max(np.abs(w[:, -1])))
    if worst > BC_TOLERANCE:
        raise DomainError(
            f"field is not clamped in theta: edge magnitude {worst:.3e} > {BC_TOLERANCE:.1e}"
        )


# ---------------------------------------------------------------------------
# block operators on angular slices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockSlice:
    """Angular slice (psi1, psi2) of a block unknown, edge nodes included."""

    psi1: np.ndarray
    psi2: np.ndarray

    def __post_init__(self) -> None:
        p1 = np.array(self.psi1, dtype=float, copy=True)
        p2 = np.array(self.psi2, dtype=float, copy=True)
        if p1.ndim != 1 or p1.shape != p2.shape:
            raise DomainError(f"slice components must be equal-length vectors, got {p1.shape}, {p2.shape}")
        if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
            raise DomainError("slice values must be finite")
        p1.setflags(write=False)
        p2.setflags(write=False)
        object.__setattr__(self, "psi1", p1)
        object.__setattr__(self, "psi2", p2)


def _check_slice(slice_: BlockSlice, tset: ThetaDerivativeSet, *, both_clamped: bool) -> None:
    if len(slice_.psi1) != tset.n:
        raise DomainError(f"slice length {len(slice_.psi1)} does not match tset n={tset.n}")
    bad1 = max(abs(slice_.psi1[0]), abs(slice_.psi1[-1]))
    if bad1 > BC_TOLERANCE:
        raise DomainError(f"psi1 violates clamped edge values: {bad1:.3e} > {BC_TOLERANCE:.1e}")
    if both_clamped:
        bad2 = max(abs(slice_.psi2[0]), abs(slice_.psi2[-1]))
        if bad2 > BC_TOLERANCE:
            raise DomainError(f"psi2 violates clamped edge values: {bad2:.3e} > {BC_TOLERANCE:.1e}")


def a_apply(slice_: BlockSlice, tset: ThetaDerivativeSet) -> BlockSlice:
    """Apply A: (psi1, psi2) -> (psi2, -(d2+1)^2 psi1 - 2 (d2-1) psi2).

    Requires both components clamped (value tolerance 1e-8 at the edges; the
    derivative conditions live in the ghost closure of the clamped matrices).
    """
    _check_slice(slice_, tset, both_clamped=True)
    C2, C4 = tset.clamped_m(2), tset.clamped_m(4)
    second = -(C4 @ slice_.psi1 + 2.0 * (C2 @ slice_.psi1) + slice_.psi1) \
        - 2.0 * (C2 @ slice_.psi2 - slice_.psi2)
    return BlockSlice(slice_.psi2, second)


def a0_apply(slice_: BlockSlice, tset: ThetaDerivativeSet) -> BlockSlice:
    """Apply A0: (psi1, psi2) -> (0, (d2+1) psi1 + psi2); psi1 clamped, psi2 free."""
    _check_slice(slice_, tset, both_clamped=False)
    C2 = tset.clamped_m(2)
    return BlockSlice(np.zeros_like(slice_.psi1), C2 @ slice_.psi1 + slice_.psi1 + slice_.psi2)


def b2_apply(v1: np.ndarray, grid: StripGrid, exps: ExponentSet) -> np.ndarray:
    """Second component of B2 V = (0, -2 (d/dt - nu) V1) on a strip field.

    Centered first differences in t, second-order one-sided stencils at the
    two ends (full-length output, no mask).
    """
    if v1.shape != grid.shape:
        raise DomainError(f"field shape {v1.shape} does not match grid {grid.shape}")
    Dt1, _ = derivative_matrix(grid.t, 1, 2)
    return -2.0 * (Dt1 @ v1 - exps.nu * v1)


def lp_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    """Discrete L^p norm with quadrature weights: (sum w |v|^p)^(1/p)."""
    if p < 1.0:
        raise DomainError(f"L^p norms need p >= 1, got {p}")
    return float(np.sum(weights * np.abs(values) ** p) ** (1.0 / p))


def x_norm(slice_: BlockSlice, p: float, tset: ThetaDerivativeSet) -> float:
    """Discrete X-norm: ||psi1||_p + ||psi1'||_p + ||psi1''||_p + ||psi2||_p.

    Derivatives of psi1 use the same clamped matrices as the block operators,
    which is what makes the discrete bound ||A0 Psi||_X <= ||Psi||_X exact.
    """
    _check_slice(slice_, tset, both_clamped=False)
    w = np.full(tset.n, tset.h)
    w[0] = w[-1] = 0.5 * tset.h
    C1, C2 = tset.clamped_m(1), tset.clamped_m(2)
    return (
        lp_norm(slice_.psi1, w, p)
        + lp_norm(C1 @ slice_.psi1, w, p)
        + lp_norm(C2 @ slice_.psi1, w, p)
        + lp_norm(slice_.psi2, w, p)
    )
