"""Command line front end: spectrum, compare, quasidisc, ahlfors, cq.

Every command writes one JSON document (or the per-n CSV table of
``compare --csv``) that embeds the tool version and the full run
configuration, so identical invocations produce byte-identical output.

Exit codes: 0 success, 2 invalid input, 3 convergence failure, 4 a stability
inequality failed beyond its numerical slack.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__, confmap, discspec, quasidisc, stability
from .errors import ConfspecError, ConvergenceFailure
from .jsonio import dumps, format_float, write_atomic
from .quadrature import SQUARE_NR, SQUARE_NTHETA, build_grid, default_grid_size

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONVERGENCE = 3
EXIT_VIOLATION = 4

TOOL = "confspec"
INJECTIVITY_WARNING = "injectivity of the supplied maps is assumed, not verified"


class UsageError(ConfspecError):
    pass


@dataclass
class RunConfig:
    command: str
    maps: list = field(default_factory=list)
    p: float | None = None
    n_eigs: int = 10
    m_max: int = discspec.DEFAULT_M_MAX
    k_max: int = discspec.DEFAULT_K_MAX
    nr: int | None = None
    ntheta: int | None = None
    out: str | None = None
    format: str = "json"
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


def _load_json_arg(value: str, what: str) -> Any:
    path = Path(value)
    try:
        if not value.lstrip().startswith(("{", "[")) and path.exists():
            return json.loads(path.read_text(encoding="utf-8"))
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: not valid JSON ({exc})") from exc


def _grid_for(cfg: RunConfig, maps):
    if cfg.nr is None or cfg.ntheta is None:
        nr, nt = default_grid_size()
        # fourth-root corner singularities of the square map need finer grids
        if any(m.label.startswith("disc_to_square") for m in maps):
            nr, nt = max(nr, SQUARE_NR), max(nt, SQUARE_NTHETA)
        cfg.nr = cfg.nr if cfg.nr is not None else nr
        cfg.ntheta = cfg.ntheta if cfg.ntheta is not None else nt
    return build_grid(cfg.nr, cfg.ntheta)


def _header(cfg: RunConfig) -> dict:
    return {"tool": TOOL, "version": __version__, "config": cfg.echo()}


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


# ---------------------------------------------------------------- commands


def cmd_spectrum(cfg: RunConfig) -> int:
    if len(cfg.maps) != 1:
        raise UsageError("spectrum needs exactly one --map")
    m = confmap.from_spec(cfg.maps[0])
    grid = _grid_for(cfg, [m])
    basis = discspec.build_basis(cfg.m_max, cfg.k_max)
    h = confmap.weight(m)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        spec = discspec.solve_weighted(basis, h, grid, cfg.n_eigs)
        fine = discspec.solve_weighted(basis, h, grid.doubled(), cfg.n_eigs)
    _warn(INJECTIVITY_WARNING)
    doc = _header(cfg)
    doc.update({
        "map": m.to_spec() | {"label": m.label},
        "spectrum": spec.to_json(),
        "kstar": discspec.kstar(spec),
        "error_estimates": {
            "method": "grid doubling",
            "lambda": np.abs(fine.eigenvalues - spec.eigenvalues).tolist(),
            "area": abs(confmap.area(m, grid.doubled()) - confmap.area(m, grid)),
        },
        "area": confmap.area(m, grid),
        "degenerate": spec.degenerate,
        "warnings": sorted({str(w.message) for w in caught}) + [INJECTIVITY_WARNING],
    })
    _emit(cfg, dumps(doc))
    return EXIT_OK


def _csv_text(report: stability.StabilityReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(stability.CSV_HEADER.split(","))
    for row in report.csv_rows():
        writer.writerow([row[0], *(format_float(x) for x in row[1:7]),
                         "true" if row[7] else "false"])
    return buf.getvalue()


def cmd_compare(cfg: RunConfig) -> int:
    if len(cfg.maps) != 2:
        raise UsageError("compare needs --map and --map2")
    if cfg.p is None:
        cfg.p = 4.0
    if not cfg.p > 2:
        raise UsageError(f"--p must be in (2, inf], got {cfg.p}")
    m1, m2 = (confmap.from_spec(s) for s in cfg.maps)
    grid = _grid_for(cfg, [m1, m2])
    basis = discspec.build_basis(cfg.m_max, cfg.k_max)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = stability.full_report(m1, m2, cfg.p, cfg.n_eigs, basis, grid)
    _warn(INJECTIVITY_WARNING)
    if cfg.format == "csv":
        _emit(cfg, _csv_text(report))
    else:
        doc = _header(cfg)
        doc["maps"] = [m1.to_spec() | {"label": m1.label}, m2.to_spec() | {"label": m2.label}]
        doc["report"] = report.to_dict()
        doc["warnings"] = sorted({str(w.message) for w in caught}) + [INJECTIVITY_WARNING]
        _emit(cfg, dumps(doc))
    if not report.all_satisfied:
        bad = [i + 1 for i, ok in enumerate(report.satisfied) if not ok]
        print(f"error: stability inequality violated for n = {bad}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_quasidisc(cfg: RunConfig) -> int:
    K = cfg.extra["K"]
    params = quasidisc.quasidisc_params(K, estimate_m=cfg.extra.get("estimate_m", False))
    doc = _header(cfg)
    doc.update(params.to_dict())
    _emit(cfg, dumps(doc))
    return EXIT_OK


def cmd_ahlfors(cfg: RunConfig) -> int:
    pts = cfg.extra["curve"]
    if not isinstance(pts, list):
        raise UsageError("--curve must be a JSON array of [x, y] pairs")
    try:
        arr = np.array(pts, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--curve must be a JSON array of [x, y] pairs ({exc})") from exc
    curve = quasidisc.DiscreteJordanCurve(arr)
    doc = _header(cfg)
    doc.update({
        "vertices": len(curve),
        "perimeter": curve.perimeter,
        "ahlfors_constant": quasidisc.ahlfors_constant(curve),
        "note": "arc diameters over sampled vertices; densify to refine",
    })
    _emit(cfg, dumps(doc))
    return EXIT_OK


def cmd_cq(cfg: RunConfig) -> int:
    q = cfg.extra["q"]
    est = stability.estimate_cq(q, cfg.extra["basis_size"], seed=cfg.seed)
    if not est.converged:
        doc = _header(cfg)
        doc["estimate"] = asdict(est)
        _emit(cfg, dumps(doc))
        return EXIT_CONVERGENCE
    doc = _header(cfg)
    doc["estimate"] = asdict(est)
    _emit(cfg, dumps(doc))
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "compare": cmd_compare,
    "quasidisc": cmd_quasidisc,
    "ahlfors": cmd_ahlfors,
    "cq": cmd_cq,
}


# ---------------------------------------------------------------- parsing


def _p_value(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--n", type=int, default=10, help="number of eigenvalues")
        p.add_argument("--m-max", type=int, default=discspec.DEFAULT_M_MAX)
        p.add_argument("--k-max", type=int, default=discspec.DEFAULT_K_MAX)
        p.add_argument("--nr", type=int, default=None)
        p.add_argument("--ntheta", type=int, default=None)

    def common(p):
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("spectrum", help="Dirichlet eigenvalues of phi(D)")
    sp.add_argument("--map", required=True, help="map spec: JSON text or path")
    solver_flags(sp)
    common(sp)

    cp = sub.add_parser("compare", help="stability report for two maps")
    cp.add_argument("--map", required=True)
    cp.add_argument("--map2", required=True)
    cp.add_argument("--p", type=_p_value, default=4.0, help="exponent in (2, inf]")
    cp.add_argument("--csv", action="store_true", help="per-n CSV table instead of JSON")
    solver_flags(cp)
    common(cp)

    qp = sub.add_parser("quasidisc", help="exponents and constants for K-quasidiscs")
    qp.add_argument("--K", type=float, required=True)
    qp.add_argument("--estimate-m", action="store_true",
                    help="also estimate M = C(4(2K^2-1))^2")
    common(qp)

    ap = sub.add_parser("ahlfors", help="three-point constant of a closed polyline")
    ap.add_argument("--curve", required=True, help="JSON array of [x, y] pairs, or path")
    common(ap)

    cq = sub.add_parser("cq", help="estimate the Sobolev constant C(q) of the disc")
    cq.add_argument("--q", type=float, required=True)
    cq.add_argument("--basis-size", type=int, default=32)
    common(cq)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command, out=args.out, seed=args.seed)
    if args.command in ("spectrum", "compare"):
        cfg.maps = [_load_json_arg(args.map, "--map")]
        if args.command == "compare":
            cfg.maps.append(_load_json_arg(args.map2, "--map2"))
            cfg.p = args.p
            cfg.format = "csv" if args.csv else "json"
        cfg.n_eigs, cfg.m_max, cfg.k_max = args.n, args.m_max, args.k_max
        cfg.nr, cfg.ntheta = args.nr, args.ntheta
    elif args.command == "quasidisc":
        cfg.extra = {"K": args.K, "estimate_m": args.estimate_m}
    elif args.command == "ahlfors":
        cfg.extra = {"curve": _load_json_arg(args.curve, "--curve")}
    elif args.command == "cq":
        cfg.extra = {"q": args.q, "basis_size": args.basis_size}
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except ConvergenceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfspecError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
