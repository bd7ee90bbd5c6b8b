"""Text format for timed plans: ``time: (action args) [duration]`` per line."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .errors import MalformedPlan

_LINE = re.compile(r"^\s*([-+0-9.eE]+)\s*:\s*(\([^()]*\))\s*(?:\[\s*([-+0-9.eE]+)\s*\])?\s*$")


@dataclass(frozen=True)
class TimedStep:
    time: float
    label: str  # normalised "(name arg ...)"
    duration: Optional[float] = None


def normalise_label(label: str) -> str:
    inner = label.strip().lstrip("(").rstrip(")")
    return "(" + " ".join(inner.lower().split()) + ")"


def parse_plan(text: str) -> list[TimedStep]:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise MalformedPlan(f"line {lineno}: cannot read plan step {raw.strip()!r}")
        try:
            t = float(m.group(1))
            d = float(m.group(3)) if m.group(3) is not None else None
        except ValueError:
            raise MalformedPlan(f"line {lineno}: bad number in {raw.strip()!r}") from None
        steps.append(TimedStep(t, normalise_label(m.group(2)), d))
    return steps


def format_plan(steps) -> str:
    out = []
    for s in steps:
        line = f"{s.time:.9f}: {s.label}"
        if s.duration is not None:
            line += f" [{s.duration:.9f}]"
        out.append(line)
    return "".join(line + "\n" for line in out)
