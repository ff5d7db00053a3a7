"""HTTP service facade: pydantic request/response models over the core modules.

Each computation is a plain handler function (``run_roots``, ``run_solve``,
...) taking a request model and returning a response model, so the same code
path serves three callers: the FastAPI routes below, the in-process CLI, and
tests.  Handlers never touch the filesystem — artifacts are written by the
CLI from the returned payloads.

Error mapping: configuration and domain errors become HTTP 422, numeric
failures become HTTP 500; both carry ``{"error": <class>, "message": ...}``.
Admissibility warnings raised during a solve are captured into the response
instead of leaking as process warnings.
"""

from __future__ import annotations

import warnings
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .errors import ConebiharmError, NumericError
from .geometry import ExponentSet, Representation, ScalarField, SectorSpec, StripGrid
from .mms import ManufacturedCase, convergence_study, make_case
from .pencil import Branch, Rect, check_admissibility, compute_tau, find_roots
from .regularity import DERIVATIVE_PAIRS, theorem_verdict
from .strip_solver import StripProblem, reconstruct_v, solve

__all__ = [
    "HealthResponse",
    "RootsRequest",
    "RootRow",
    "RootsResponse",
    "AdmissibleRequest",
    "AdmissibleRow",
    "AdmissibleResponse",
    "FieldPayload",
    "SolveRequest",
    "SolveResponse",
    "NormsRequest",
    "NormCheckRow",
    "ClaimRow",
    "NormsResponse",
    "MmsRequest",
    "MmsRow",
    "MmsResponse",
    "run_roots",
    "run_admissible",
    "run_solve",
    "run_norms",
    "run_mms",
    "create_app",
    "app",
]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HealthResponse(_Model):
    status: str
    version: str


# -- roots ---------------------------------------------------------------------


class RootsRequest(_Model):
    re_max: float = Field(default=12.0, gt=0.0)
    im_max: float = Field(default=14.0, gt=0.0)


class RootRow(_Model):
    branch: str
    re: float
    im: float
    residual: float
    iterations: int


class RootsResponse(_Model):
    tau: float
    roots: list[RootRow]


def run_roots(req: RootsRequest) -> RootsResponse:
    """Enumerate pencil roots in (0, re_max] x (0, im_max], plus tau.

    The scan window starts slightly off the axes: both transcendental factors
    vanish at z = 0, and no nonzero root lives that close to the origin.
    """
    rows: list[RootRow] = []
    window = Rect(0.05, req.re_max, 0.05, req.im_max)
    for branch in (Branch.MINUS, Branch.PLUS):
        for root in find_roots(window, branch):
            rows.append(
                RootRow(
                    branch=branch.name.lower(),
                    re=root.z.real,
                    im=root.z.imag,
                    residual=root.residual,
                    iterations=root.iterations,
                )
            )
    rows.sort(key=lambda r: (r.im, r.re, r.branch))
    return RootsResponse(tau=compute_tau(), roots=rows)


# -- admissibility ---------------------------------------------------------------


class AdmissibleRequest(_Model):
    omega: float
    p: float = 2.0
    p_values: list[float] = Field(default_factory=list)
    omega_values: list[float] = Field(default_factory=list)


class AdmissibleRow(_Model):
    omega: float
    p: float
    nu: float
    lhs: float
    tau: float
    admissible: bool
    case: int
    p_max: float | None


class AdmissibleResponse(_Model):
    result: AdmissibleRow
    sweep: list[AdmissibleRow]


def _admissible_row(omega: float, p: float) -> AdmissibleRow:
    report = check_admissibility(omega, p)
    return AdmissibleRow(
        omega=report.omega,
        p=report.p,
        nu=report.nu,
        lhs=report.lhs,
        tau=report.tau,
        admissible=report.admissible,
        case=report.case,
        p_max=report.p_max,
    )


def run_admissible(req: AdmissibleRequest) -> AdmissibleResponse:
    """Evaluate the opening/integrability admissibility test, with sweeps.

    The sweep holds one parameter fixed at the request value and varies the
    other over ``p_values`` and ``omega_values``.
    """
    result = _admissible_row(req.omega, req.p)
    sweep = [_admissible_row(req.omega, p) for p in req.p_values]
    sweep += [_admissible_row(omega, req.p) for omega in req.omega_values]
    return AdmissibleResponse(result=result, sweep=sweep)


# -- fields ---------------------------------------------------------------------


class FieldPayload(_Model):
    representation: str
    nt: int
    ntheta: int
    T: float
    omega: float
    rho: float
    values: list[list[float]]

    @classmethod
    def from_field(cls, field: ScalarField) -> "FieldPayload":
        grid = field.grid
        return cls(
            representation=field.rep.value,
            nt=grid.nt,
            ntheta=grid.ntheta,
            T=grid.T,
            omega=grid.sector.omega,
            rho=grid.sector.rho,
            values=field.values.tolist(),
        )

    def to_field(self) -> ScalarField:
        grid = StripGrid(
            SectorSpec(omega=self.omega, rho=self.rho),
            T=self.T,
            nt=self.nt,
            ntheta=self.ntheta,
        )
        return ScalarField(grid, np.asarray(self.values), Representation(self.representation))


# -- solve ----------------------------------------------------------------------


class SolveRequest(_Model):
    omega: float
    rho: float = 0.1
    k: float = 0.0
    p: float = 2.0
    nt: int = 129
    ntheta: int = 65
    T: float = 12.0
    order: int = 2
    source: Literal["manufactured", "zero"] = "manufactured"
    alpha: float = 5.0
    profile: str = "cos-bump"


class SolveResponse(_Model):
    residual: float
    admissible: bool
    warnings: list[str]
    v1: FieldPayload
    v2: FieldPayload
    v: FieldPayload


def _manufactured(req) -> ManufacturedCase:
    return make_case(req.alpha, req.omega, req.k, req.profile, rho=req.rho)


def run_solve(req: SolveRequest) -> SolveResponse:
    """Solve the block strip system and reconstruct the sector solution."""
    sector = SectorSpec(omega=req.omega, rho=req.rho, k=req.k)
    grid = StripGrid(sector, T=req.T, nt=req.nt, ntheta=req.ntheta)
    problem = StripProblem(grid=grid, exps=ExponentSet(req.p), order=req.order)
    if req.source == "manufactured":
        source = _manufactured(req).source
    else:
        source = np.zeros(grid.shape)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        solution = solve(problem, source)
        v = reconstruct_v(solution)
    notes = [str(w.message) for w in caught]
    return SolveResponse(
        residual=solution.residual,
        admissible=check_admissibility(req.omega, req.p).admissible,
        warnings=notes,
        v1=FieldPayload.from_field(solution.v1),
        v2=FieldPayload.from_field(solution.v2),
        v=FieldPayload.from_field(v),
    )


# -- norms / verdict --------------------------------------------------------------


class NormsRequest(_Model):
    omega: float
    rho: float = 0.1
    k: float = 0.0
    p: float = 2.0
    nt: int = 385
    ntheta: int = 33
    T: float = 12.0
    alpha: float = 5.0
    profile: str = "cos-bump"
    levels: int = 6


class NormCheckRow(_Model):
    i: int
    j: int
    gamma: float
    norm: float | None
    tail_fraction: float | None
    slope: float | None
    status: str


class ClaimRow(_Model):
    key: str
    statement: str
    status: str
    checks: list[NormCheckRow]


class NormsResponse(_Model):
    passed: bool
    claims: list[ClaimRow]
    report: list[NormCheckRow]


def _check_row(check) -> NormCheckRow:
    return NormCheckRow(
        i=check.i,
        j=check.j,
        gamma=check.gamma,
        norm=check.norm,
        tail_fraction=check.tail_fraction,
        slope=check.slope,
        status=check.status,
    )


def run_norms(req: NormsRequest) -> NormsResponse:
    """Run the per-claim regularity verdict on exact manufactured derivatives.

    The derivative fields are the closed-form mixed derivatives of the
    manufactured solution — the solution whose regularity the claims
    describe — sampled on the requested grid.
    """
    case = _manufactured(req)
    grid = StripGrid(case.sector, T=req.T, nt=req.nt, ntheta=req.ntheta)
    fields = {
        (i, j): ScalarField(
            grid,
            case.radial_derivative(i, grid.r)[:, None]
            * case.eta_derivative(j, grid.theta)[None, :],
            Representation.SECTOR_V,
        )
        for (i, j) in DERIVATIVE_PAIRS
    }
    verdict = theorem_verdict(fields, case.sector, ExponentSet(req.p), levels=req.levels)
    return NormsResponse(
        passed=verdict.passed,
        claims=[
            ClaimRow(
                key=c.key,
                statement=c.statement,
                status=c.status,
                checks=[_check_row(ch) for ch in c.checks],
            )
            for c in verdict.claims
        ],
        report=[_check_row(e) for e in verdict.report.entries],
    )


# -- manufactured convergence ------------------------------------------------------


class MmsRequest(_Model):
    omega: float
    rho: float = 0.1
    k: float = 0.0
    p: float = 2.0
    alpha: float = 5.0
    profile: str = "cos-bump"
    T: float = 6.0
    grids: list[tuple[int, int]] = Field(
        default_factory=lambda: [(64, 33), (128, 65), (256, 129)]
    )


class MmsRow(_Model):
    nt: int
    ntheta: int
    ht: float
    htheta: float
    error: float
    order: float | None
    flagged: bool


class MmsResponse(_Model):
    rows: list[MmsRow]
    warnings: list[str]


def run_mms(req: MmsRequest) -> MmsResponse:
    """Manufactured-solution convergence study over a refinement chain."""
    case = _manufactured(req)
    grids = tuple((nt, ntheta) for nt, ntheta in req.grids)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        reports = convergence_study(case, grids, p=req.p, T=req.T)
    notes = sorted({str(w.message) for w in caught})
    rows = [
        MmsRow(
            nt=r.nt,
            ntheta=r.ntheta,
            ht=r.ht,
            htheta=r.htheta,
            error=r.norm,
            order=r.order,
            flagged=r.flagged,
        )
        for r in reports
    ]
    return MmsResponse(rows=rows, warnings=notes)


# -- application ------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(title="conebiharm", version=__version__)

    @app.exception_handler(ConebiharmError)
    async def _domain_error(request: Request, exc: ConebiharmError) -> JSONResponse:
        status = 500 if isinstance(exc, NumericError) else 422
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/roots", response_model=RootsResponse)
    async def roots(req: RootsRequest) -> RootsResponse:
        return run_roots(req)

    @app.post("/admissible", response_model=AdmissibleResponse)
    async def admissible(req: AdmissibleRequest) -> AdmissibleResponse:
        return run_admissible(req)

    @app.post("/solve", response_model=SolveResponse)
    async def solve_endpoint(req: SolveRequest) -> SolveResponse:
        return run_solve(req)

    @app.post("/norms", response_model=NormsResponse)
    async def norms(req: NormsRequest) -> NormsResponse:
        return run_norms(req)

    @app.post("/mms", response_model=MmsResponse)
    async def mms(req: MmsRequest) -> MmsResponse:
        return run_mms(req)

    return app


app = create_app()
