"""Command-line front end: config ingestion, subcommands, CSV artifacts.

Usage::

    conebiharm <roots|admissible|solve|norms|mms> [--config PATH] [--key=value ...]

Any ``--key=value`` flag overrides the same key from the config file; see
:mod:`conebiharm.config` for the key table and defaults.  The environment
variable ``CONEBIHARM_OUT`` overrides the configured output directory.

The CLI is a thin client over the service handlers in
:mod:`conebiharm.service`: by default each subcommand calls the handler
in-process; with ``--server URL`` the same request is POSTed to a running
service and the response consumed identically, so artifacts are byte-for-byte
the same either way.

Exit status: 0 on success; 2 on configuration or domain errors; 3 on numeric
failure (including an unreachable or failing server).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Callable, Sequence, TypeVar

import httpx
from pydantic import BaseModel

from .config import RunConfig, parse_config
from .errors import ConebiharmError, ConfigError, NumericError
from .fields_io import write_field_csv
from .service import (
    AdmissibleRequest,
    AdmissibleResponse,
    AdmissibleRow,
    MmsRequest,
    MmsResponse,
    NormsRequest,
    NormsResponse,
    RootsRequest,
    RootsResponse,
    SolveRequest,
    SolveResponse,
    run_admissible,
    run_mms,
    run_norms,
    run_roots,
    run_solve,
)

__all__ = [
    "main",
    "cmd_roots",
    "cmd_admissible",
    "cmd_solve",
    "cmd_norms",
    "cmd_mms",
    "Client",
]

COMMANDS = ("roots", "admissible", "solve", "norms", "mms")

R = TypeVar("R", bound=BaseModel)


def _fmt_cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt_cell(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


class Client:
    """Executes a request in-process, or remotely when a server URL is set."""

    def __init__(self, server: str | None = None, timeout: float = 600.0):
        self.server = server.rstrip("/") if server else None
        self.timeout = timeout

    def call(self, path: str, request: BaseModel, handler: Callable[..., R],
             response_model: type[R]) -> R:
        if self.server is None:
            return handler(request)
        response = httpx.post(
            f"{self.server}{path}", json=request.model_dump(), timeout=self.timeout
        )
        if response.status_code >= 400:
            try:
                payload = response.json()
            except ValueError:
                payload = {}
            message = payload.get("message") or str(payload.get("detail", response.text))
            if response.status_code == 422:
                raise ConfigError(f"server rejected request: {message}")
            raise NumericError(f"server failed ({response.status_code}): {message}")
        return response_model.model_validate(response.json())


def cmd_roots(cfg: RunConfig, out: Path, client: Client) -> int:
    resp = client.call("/roots", RootsRequest(), run_roots, RootsResponse)
    _write_csv(
        out / "roots.csv",
        ("branch", "re", "im", "residual", "iterations"),
        [(r.branch, r.re, r.im, r.residual, r.iterations) for r in resp.roots],
    )
    _write_csv(out / "tau.csv", ("tau",), [(resp.tau,)])
    print(f"tau = {resp.tau:.12g}; {len(resp.roots)} roots -> {out / 'roots.csv'}")
    return 0


_ADMISSIBLE_COLS = ("omega", "p", "nu", "lhs", "tau", "admissible", "case", "p_max")


def _admissible_cells(row: AdmissibleRow) -> tuple:
    return (row.omega, row.p, row.nu, row.lhs, row.tau, row.admissible, row.case, row.p_max)


def cmd_admissible(cfg: RunConfig, out: Path, client: Client) -> int:
    req = AdmissibleRequest(
        omega=cfg.require_omega(),
        p=cfg.p,
        p_values=list(cfg.p_values),
        omega_values=list(cfg.omega_values),
    )
    resp = client.call("/admissible", req, run_admissible, AdmissibleResponse)
    _write_csv(out / "admissible.csv", _ADMISSIBLE_COLS, [_admissible_cells(resp.result)])
    if resp.sweep:
        _write_csv(
            out / "sweep.csv", _ADMISSIBLE_COLS, [_admissible_cells(r) for r in resp.sweep]
        )
    verdict = "admissible" if resp.result.admissible else "not admissible"
    print(
        f"omega={resp.result.omega:.12g} p={resp.result.p:.12g}: {verdict} "
        f"(omega*(3-2/p) = {resp.result.lhs:.6f} vs tau = {resp.result.tau:.6f})"
    )
    return 0


def cmd_solve(cfg: RunConfig, out: Path, client: Client) -> int:
    req = SolveRequest(
        omega=cfg.require_omega(),
        rho=cfg.rho,
        k=cfg.k,
        p=cfg.p,
        nt=cfg.nt,
        ntheta=cfg.ntheta,
        T=cfg.T,
        order=cfg.order,
        source=cfg.source,  # type: ignore[arg-type]
        alpha=cfg.alpha,
        profile=cfg.profile,
    )
    resp = client.call("/solve", req, run_solve, SolveResponse)
    for note in resp.warnings:
        print(f"warning: {note}", file=sys.stderr)
    for name, payload in (("strip_v1", resp.v1), ("strip_v2", resp.v2), ("sector_v", resp.v)):
        write_field_csv(payload.to_field(), out / f"{name}.csv")
    print(
        f"solved {req.nt}x{req.ntheta} grid, linear residual {resp.residual:.3e} "
        f"-> {out / 'sector_v.csv'}"
    )
    return 0


def cmd_norms(cfg: RunConfig, out: Path, client: Client) -> int:
    req = NormsRequest(
        omega=cfg.require_omega(),
        rho=cfg.rho,
        k=cfg.k,
        p=cfg.p,
        nt=cfg.nt,
        ntheta=cfg.ntheta,
        T=cfg.T,
        alpha=cfg.alpha,
        profile=cfg.profile,
        levels=cfg.levels,
    )
    resp = client.call("/norms", req, run_norms, NormsResponse)
    _write_csv(
        out / "norm_report.csv",
        ("i", "j", "gamma", "norm", "tail_fraction", "slope", "status"),
        [
            (e.i, e.j, e.gamma, e.norm, e.tail_fraction, e.slope, e.status)
            for e in resp.report
        ],
    )
    _write_csv(
        out / "verdict.csv",
        ("claim", "status", "statement"),
        [(c.key, c.status, c.statement) for c in resp.claims],
    )
    overall = "pass" if resp.passed else "fail"
    claims = " ".join(f"{c.key}={c.status}" for c in resp.claims)
    print(f"verdict: {overall} ({claims}) -> {out / 'verdict.csv'}")
    return 0


def cmd_mms(cfg: RunConfig, out: Path, client: Client) -> int:
    req = MmsRequest(
        omega=cfg.require_omega(),
        rho=cfg.rho,
        k=cfg.k,
        p=cfg.p,
        alpha=cfg.alpha,
        profile=cfg.profile,
        T=cfg.T,
        grids=[tuple(g) for g in cfg.grids],
    )
    resp = client.call("/mms", req, run_mms, MmsResponse)
    for note in resp.warnings:
        print(f"warning: {note}", file=sys.stderr)
    _write_csv(
        out / "convergence.csv",
        ("nt", "ntheta", "ht", "htheta", "error", "order", "flagged"),
        [(r.nt, r.ntheta, r.ht, r.htheta, r.error, r.order, r.flagged) for r in resp.rows],
    )
    last = resp.rows[-1]
    order_text = "n/a" if last.order is None else f"{last.order:.3f}"
    print(
        f"{len(resp.rows)} levels, final error {last.error:.3e}, final order {order_text} "
        f"-> {out / 'convergence.csv'}"
    )
    return 0


_DISPATCH = {
    "roots": cmd_roots,
    "admissible": cmd_admissible,
    "solve": cmd_solve,
    "norms": cmd_norms,
    "mms": cmd_mms,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="conebiharm",
        description="Clamped fourth-order sector problem: roots, admissibility, "
        "strip solves, weighted-regularity verdicts, convergence studies.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    help_lines = {
        "roots": "enumerate pencil roots and tau; writes roots.csv and tau.csv",
        "admissible": "evaluate omega*(3-2/p) < tau; writes admissible.csv (+ sweep.csv)",
        "solve": "solve the strip system; writes strip_v1/strip_v2/sector_v field CSVs",
        "norms": "weighted-norm report and per-claim verdict; writes norm_report/verdict CSVs",
        "mms": "manufactured convergence study; writes convergence.csv",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=help_lines[name], allow_abbrev=False)
        cmd.add_argument("--config", default=None, metavar="PATH", help="key=value config file")
        cmd.add_argument(
            "--server", default=None, metavar="URL", help="POST to a running service instead"
        )
    args, extra = parser.parse_known_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = parse_config(args.config, extra)
        out = Path(os.environ.get("CONEBIHARM_OUT") or cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[args.command](cfg, out, Client(args.server))
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConebiharmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"error: server request failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
