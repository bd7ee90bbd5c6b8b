"""Run a family's instance ladder and collect per-instance planner statistics."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, TextIO

from .benchgen import gen_instance
from .pddl import load
from .search import SearchConfig, plan
from .validator import validate

COLUMNS = ("instance", "plan_happenings", "lp_runs", "lp_time_ms", "total_time_ms")
EXTRA_COLUMNS = ("strategy", "status", "valid")


@dataclass
class BenchRow:
    instance: str
    plan_happenings: int
    lp_runs: int
    lp_time_ms: float
    total_time_ms: float
    strategy: str
    status: str
    valid: Optional[bool]


def run_instance(family: str, n: int, config: SearchConfig, seed: int = 0,
                 check: bool = True) -> BenchRow:
    domain, problem = gen_instance(family, n, seed)
    grounded = load(domain, problem)
    result = plan(grounded, config)
    valid = None
    if check and result.status == "solved":
        valid = validate(grounded, result.plan).valid
    stats = result.stats()
    return BenchRow(f"{family}-{n}", stats["plan_happenings"], stats["lp_runs"],
                    stats["lp_time_ms"], stats["total_time_ms"], config.strategy,
                    stats["status"], valid)


def run_bench(family: str, first: int, last: int, configs: Iterable[SearchConfig],
              seed: int = 0, check: bool = True, progress=None) -> list[BenchRow]:
    configs = list(configs)
    rows = []
    for n in range(first, last + 1):
        for config in configs:
            row = run_instance(family, n, config, seed, check)
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows


def write_csv(rows: Iterable[BenchRow], fh: TextIO) -> None:
    writer = csv.DictWriter(fh, fieldnames=COLUMNS + EXTRA_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        record = asdict(row)
        record["valid"] = "" if row.valid is None else str(row.valid).lower()
        writer.writerow(record)


def lp_run_reduction(rows: Iterable[BenchRow]) -> dict:
    """Per instance, 1 - lazy/always-lp LP runs, for instances that ran both."""
    by_instance: dict = {}
    for row in rows:
        by_instance.setdefault(row.instance, {})[row.strategy] = row.lp_runs
    out = {}
    for name, runs in by_instance.items():
        if "lazy" in runs and runs.get("always-lp"):
            out[name] = 1.0 - runs["lazy"] / runs["always-lp"]
    return out
