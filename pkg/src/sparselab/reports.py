"""Report records for inequality checks and proof-replay traces.

A `CheckReport` is one verified inequality lhs <= constant-adjusted rhs; a
`PipelineTrace` is an ordered list of named steps (each shaped like a check)
plus a summary.  Steps that aggregate many sub-checks (one per interval, per
slice, ...) record the worst margin and how many instances it covers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ._rat import fmt, is_exact

__all__ = ["CheckReport", "PipelineTrace", "json_ready", "stable_json"]


def json_ready(x: Any) -> Any:
    """Recursively convert report values into JSON-stable primitives.

    Rationals become "num/den" strings (exactness survives the round trip),
    floats stay floats, containers are converted element-wise.
    """
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if is_exact(x):
        return fmt(x)
    if isinstance(x, float):
        return x
    if isinstance(x, dict):
        return {str(k): json_ready(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [json_ready(v) for v in x]
    if hasattr(x, "to_json"):
        return json_ready(x.to_json())
    return str(x)


def stable_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, no float mangling, newline-free."""
    return json.dumps(json_ready(obj), sort_keys=True, separators=(",", ":"))


@dataclass
class CheckReport:
    """One verified inequality: pass iff lhs <= rhs·(1+tol) at check time."""

    name: str
    lhs: Any
    rhs: Any
    constant: Any = None
    passed: bool = True
    witness: Any = None
    count: int = 1
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "lhs": json_ready(self.lhs),
            "rhs": json_ready(self.rhs),
            "constant": json_ready(self.constant),
            "pass": self.passed,
        }
        if self.witness is not None:
            out["witness"] = json_ready(self.witness)
        if self.count != 1:
            out["count"] = self.count
        if self.extras:
            out["extras"] = json_ready(self.extras)
        return out


@dataclass
class PipelineTrace:
    """Ordered proof-step record for the theorem verifiers."""

    steps: list[CheckReport] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add(self, step: CheckReport) -> CheckReport:
        self.steps.append(step)
        return step

    @property
    def green(self) -> bool:
        return all(s.passed for s in self.steps)

    def step(self, name: str) -> CheckReport:
        for s in self.steps:
            if s.name == name:
                return s
        raise KeyError(name)

    def failing_steps(self) -> list[str]:
        return [s.name for s in self.steps if not s.passed]

    def to_json(self) -> dict:
        return {
            "steps": [s.to_json() for s in self.steps],
            "summary": json_ready(self.summary),
        }

    def dumps(self) -> str:
        return stable_json(self.to_json())
