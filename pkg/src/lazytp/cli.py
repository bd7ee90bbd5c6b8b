"""Command-line interface: ``lazytp plan|validate|gen|bench``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .bench import lp_run_reduction, run_bench, write_csv
from .benchgen import FAMILIES, gen_carpool, gen_generator, gen_instance, gen_pump
from .errors import (MalformedPlan, NonconstantRate, NonlinearExpression, NonlinearUnderSchedule,
                     PddlError)
from .pddl import load
from .search import SearchConfig, plan
from .validator import validate

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_TIMEOUT = 3


def _search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=("lazy", "always-lp"), default="lazy")
    p.add_argument("--encoding", choices=("optimized", "full"), default=None,
                   help="LP encoding (default: optimized for lazy, full for always-lp)")
    p.add_argument("--timeout", type=float, default=1800.0, help="seconds")
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--bounds", choices=("conditions", "all", "off"), default="conditions",
                   help="which schedule-dependent fluents get fresh bounds after an LP")
    p.add_argument("--solver", choices=("simplex", "highs"), default="simplex")
    p.add_argument("--heuristic", choices=("relaxed", "goal-count", "blind"), default="relaxed")
    p.add_argument("--weight", type=float, default=None, help="weighted A* instead of greedy")
    p.add_argument("--seed", type=int, default=0)


def _config(args) -> SearchConfig:
    return SearchConfig(strategy=args.strategy, encoding=args.encoding, timeout=args.timeout,
                        epsilon=args.epsilon, bounds_mode=args.bounds, solver=args.solver,
                        heuristic=args.heuristic, weight=args.weight,
                        dump_lp=getattr(args, "dump_lp", None),
                        dump_stn=getattr(args, "dump_stn", None))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazytp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="search for a plan")
    p.add_argument("domain")
    p.add_argument("problem")
    _search_flags(p)
    p.add_argument("--stats", metavar="PATH", help="also write the stats JSON here")
    p.add_argument("--dump-lp", metavar="DIR", help="write every LP in LP file format")
    p.add_argument("--dump-stn", metavar="DIR", help="write each generated STN as DOT")
    p.add_argument("--output", "-o", metavar="PATH", help="write the plan here instead of stdout")

    v = sub.add_parser("validate", help="check a timed plan")
    v.add_argument("domain")
    v.add_argument("problem")
    v.add_argument("plan")

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("family", choices=FAMILIES)
    g.add_argument("--instance", type=int, help="take sizes from the family's instance ladder")
    g.add_argument("--trips", type=int)
    g.add_argument("--cars", type=int)
    g.add_argument("--locations", type=int, default=100)
    g.add_argument("--pumps", type=int)
    g.add_argument("--processes", type=int)
    g.add_argument("--tasks", type=int)
    g.add_argument("--tanks", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-dir", default=".")

    b = sub.add_parser("bench", help="run a family's instance ladder")
    b.add_argument("family", choices=FAMILIES)
    b.add_argument("--from", dest="first", type=int, default=1)
    b.add_argument("--to", dest="last", type=int, default=5)
    _search_flags(b)
    b.add_argument("--compare", action="store_true",
                   help="run lazy and always-lp on every instance")
    b.add_argument("--csv", metavar="PATH", help="write the table here instead of stdout")
    b.add_argument("--figure", metavar="PATH", help="render a PNG summary")
    return parser


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(args):
    return load(_read(args.domain), _read(args.problem), args.domain, args.problem)


def _cmd_plan(args, out, err) -> int:
    problem = _load(args)
    result = plan(problem, _config(args))
    stats = json.dumps(result.stats(), sort_keys=True)
    if result.status == "solved":
        text = result.plan_text()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            out.write(text)
    err.write(stats + "\n")
    if args.stats:
        with open(args.stats, "w") as fh:
            fh.write(stats + "\n")
    return {"solved": EXIT_OK, "timeout": EXIT_TIMEOUT}.get(result.status, EXIT_FAIL)


def _cmd_validate(args, out, err) -> int:
    problem = _load(args)
    verdict = validate(problem, _read(args.plan))
    out.write(verdict.report())
    return EXIT_OK if verdict.valid else EXIT_FAIL


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise _Usage("gen {} needs {}".format(
            args.family, ", ".join("--" + n for n in missing)))


class _Usage(Exception):
    pass


def _cmd_gen(args, out, err) -> int:
    if args.instance is not None:
        n = args.instance
        domain, problem = gen_instance(args.family, n, args.seed)
    elif args.family == "carpool":
        _need(args, "trips", "cars")
        n = args.trips
        domain, problem = gen_carpool(args.trips, args.cars, args.locations, args.seed)
    elif args.family == "pump":
        _need(args, "pumps", "processes", "tasks")
        n = args.tasks
        domain, problem = gen_pump(args.pumps, args.processes, args.tasks, args.seed)
    else:
        _need(args, "tanks")
        n = args.tanks
        domain, problem = gen_generator(args.tanks, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    for part, text in (("domain", domain), ("problem", problem)):
        path = os.path.join(args.out_dir, f"{args.family}-{n}-{part}.pddl")
        with open(path, "w") as fh:
            fh.write(text)
        out.write(path + "\n")
    return EXIT_OK


def _cmd_bench(args, out, err) -> int:
    base = _config(args)
    if args.compare:
        configs = [SearchConfig(**{**vars(base), "strategy": s, "encoding": None,
                                   "write_back": None})
                   for s in ("lazy", "always-lp")]
    else:
        configs = [base]

    def progress(row):
        err.write(f"{row.instance} {row.strategy}: {row.status}, {row.lp_runs} LP runs, "
                  f"{row.total_time_ms:.0f} ms\n")

    rows = run_bench(args.family, args.first, args.last, configs, args.seed, progress=progress)
    if args.csv:
        with open(args.csv, "w") as fh:
            write_csv(rows, fh)
    else:
        write_csv(rows, out)
    if args.compare:
        for name, r in lp_run_reduction(rows).items():
            err.write(f"{name}: lazy saves {100 * r:.1f}% of LP runs\n")
    if args.figure:
        from .report import plot_bench
        plot_bench(rows, args.figure, title=f"{args.family} {args.first}-{args.last}")
    if any(r.status == "timeout" for r in rows):
        return EXIT_TIMEOUT
    if any(r.status != "solved" or r.valid is False for r in rows):
        return EXIT_FAIL
    return EXIT_OK


_COMMANDS = {"plan": _cmd_plan, "validate": _cmd_validate, "gen": _cmd_gen, "bench": _cmd_bench}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return _COMMANDS[args.command](args, out, err)
    except (PddlError, MalformedPlan, _Usage, OSError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (NonlinearExpression, NonlinearUnderSchedule, NonconstantRate) as exc:
        err.write(f"error: unsupported problem: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
