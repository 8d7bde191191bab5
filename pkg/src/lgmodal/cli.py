"""Command line entry point: ``lgmodal study run|case`` and ``lgmodal materials``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import replace

from . import study
from .eigen import SolverError, SolverSettings, freq_and_loss
from .fem_beam import build_system
from .materials import MaterialDatabase, MaterialError, builtin_database
from .oracle import dense_fixed_point_eig

log = logging.getLogger("lgmodal")


def _methods(text: str) -> tuple[str, ...]:
    out = tuple(m.strip().lower() for m in text.split(",") if m.strip())
    bad = [m for m in out if m not in study.ALL_METHODS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"methods must be a comma list from {','.join(study.ALL_METHODS)}")
    return out


def _section(text: str) -> tuple[float, float, float]:
    try:
        parts = tuple(float(p) for p in text.split("/"))
    except ValueError:
        parts = ()
    if len(parts) != 3 or min(parts) <= 0:
        raise argparse.ArgumentTypeError("section must look like h1/h2/h3 in mm, e.g. 10/0.76/10")
    return parts


def _add_solver_args(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--methods", type=_methods, default=d(study.ALL_METHODS), help="comma list (default: all)")
    p.add_argument("--modes", type=int, choices=(1, 2, 3), default=d(3))
    p.add_argument("--elements", type=int, default=d(200), help="elements per layer")
    p.add_argument("--tol", type=float, default=d(1e-5))
    p.add_argument("--max-iter", type=int, default=d(50))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lgmodal", description="Modal analysis of laminated glass beams.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    st = sub.add_parser("study", help="batch study or single case")
    st_sub = st.add_subparsers(dest="action", required=True)

    run = st_sub.add_parser("run", help="run the case matrix and write cases.csv / summary.json / qq_mode1.csv")
    run.add_argument("--config", help="JSON configuration file")
    _add_solver_args(run, defaults=False)
    run.add_argument("--jobs", type=int, default=None, help="worker processes (0 = all cores)")
    run.add_argument("--group-by", default=None, help=f"comma list from {','.join(study.GROUP_KEYS)}")
    run.add_argument("--out", default="results", help="output directory")

    case = st_sub.add_parser("case", help="run one configuration and print a table")
    case.add_argument("--bc", required=True, help="ss, cc or ff")
    case.add_argument("--section", type=_section, required=True, help="h1/h2/h3 in mm")
    case.add_argument("--material", required=True)
    case.add_argument("--temp", type=float, default=25.0, help="temperature in deg C")
    case.add_argument("--length", type=float, default=1.0)
    case.add_argument("--width", type=float, default=0.1)
    case.add_argument("--materials-file", help="extra materials JSON")
    case.add_argument("--oracle", action="store_true", help="also run the dense reference solver (small meshes)")
    case.add_argument("--json", action="store_true", help="print JSON instead of a table")
    _add_solver_args(case, defaults=True)

    mats = sub.add_parser("materials", help="list or dump the material database")
    mats.add_argument("--dump", metavar="FILE", help="write the built-in database as JSON")
    return parser


def _cmd_run(args) -> int:
    if args.config:
        config, cases, db = study.load_config(args.config)
    else:
        config, cases, db = study.StudyConfig(), study.generate_matrix(), builtin_database()
    overrides = {k: getattr(args, k) for k in ("methods", "modes", "elements", "tol", "max_iter", "jobs")
                 if getattr(args, k) is not None}
    if args.group_by:
        overrides["group_by"] = tuple(k.strip() for k in args.group_by.split(","))
    config = replace(config, **overrides)
    if "cnm" not in config.methods:
        log.warning("cnm not requested; errors versus cnm will be empty")

    t0 = time.perf_counter()
    results = study.run_study(cases, config, db)
    stats = study.summarize(results, config.group_by)
    paths = study.emit(results, stats, args.out)
    log.info("%d cases in %.1f s", len(results), time.perf_counter() - t0)
    for p in paths:
        print(p)
    if stats["failed_cells"]:
        print(f"warning: {stats['failed_cells']} method/mode cells failed (see 'reason' column)", file=sys.stderr)
    return 0


def _cmd_case(args) -> int:
    db = builtin_database()
    if args.materials_file:
        for m in MaterialDatabase.load(args.materials_file).materials.values():
            db.add(m)
    spec = study.CaseSpec(args.bc, args.section, args.material, args.temp, args.length, args.width)
    settings = SolverSettings(tol=args.tol, max_iter=args.max_iter, modes=args.modes)
    result = study.run_case(spec, args.methods, settings, args.elements, db)
    rows = [dict(method=r.method, mode=r.mode, f_hz=r.f_hz, eta=r.eta, iters=r.iters,
                 err_f=r.err_f_vs_cnm, err_eta=r.err_eta_vs_cnm, note=r.reason) for r in result.rows]

    if args.oracle:
        beam = spec.beam(db)
        system = build_system(beam, args.elements)
        oracle_settings = SolverSettings(tol=1e-10, max_iter=200, modes=args.modes)
        for k in range(1, args.modes + 1):
            try:
                pair = dense_fixed_point_eig(system, beam.chain, k, oracle_settings)
                f, eta = freq_and_loss(pair.omega_squared)
                rows.append(dict(method="oracle", mode=k, f_hz=f, eta=eta, iters=pair.iterations,
                                 err_f=math.nan, err_eta=math.nan, note=""))
            except (SolverError, ValueError) as exc:
                rows.append(dict(method="oracle", mode=k, f_hz=math.nan, eta=math.nan, iters=0,
                                 err_f=math.nan, err_eta=math.nan, note=str(exc)))

    if args.json:
        clean = study._json_clean({"case_id": spec.case_id, "rows": rows})
        print(json.dumps(clean, indent=2))
        return 0
    print(f"case {spec.case_id}  ({args.elements} elements per layer)")
    print(f"{'method':<7}{'mode':>5}{'f [Hz]':>13}{'eta':>12}{'iters':>7}{'err_f':>11}{'err_eta':>11}")
    for r in rows:
        print(f"{r['method']:<7}{r['mode']:>5}{r['f_hz']:>13.5f}{r['eta']:>12.6f}{r['iters']:>7}"
              f"{r['err_f']:>11.2e}{r['err_eta']:>11.2e}  {r['note']}")
    return 0


def _cmd_materials(args) -> int:
    db = builtin_database()
    if args.dump:
        db.dump(args.dump)
        print(args.dump)
        return 0
    for name, mat in db.materials.items():
        print(f"{name:<8} {type(mat).__name__}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "materials":
            return _cmd_materials(args)
        if args.action == "run":
            return _cmd_run(args)
        return _cmd_case(args)
    except (MaterialError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
