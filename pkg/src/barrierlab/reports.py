"""Report records shared by the validation/certification modules and
atomic file output helpers used by the CLI.

All artifacts are deterministic: JSON is dumped with sorted keys and the
default float repr, CSV rows use repr floats, and nothing depends on the
wall clock.  Files are written atomically (temp file + rename).
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckRecord:
    """Outcome of one inequality family scanned over a grid."""

    name: str
    max_violation: float
    argmax: float | tuple
    passed: bool

    def to_dict(self):
        arg = self.argmax
        if isinstance(arg, tuple):
            arg = list(arg)
        return {
            "name": self.name,
            "max_violation": self.max_violation,
            "argmax_r": arg,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Collection of inequality checks with an overall verdict."""

    checks: tuple
    tol_rel: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def worst(self) -> CheckRecord:
        return max(self.checks, key=lambda c: c.max_violation)

    def to_dict(self):
        return {
            "tol_rel": self.tol_rel,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


# The envelope module reports its sandwich lemmas with the same structure.
LemmaReport = ValidationReport


def make_check(name, violations, args, tol_rel) -> CheckRecord:
    """Build a record from an array of signed violations (<=0 means ok)."""
    import numpy as np

    violations = np.asarray(violations, dtype=float)
    k = int(np.argmax(violations))
    worst = float(violations[k])
    arg = args[k] if not isinstance(args, tuple) else tuple(a[k] for a in args)
    if hasattr(arg, "item"):
        arg = arg.item()
    return CheckRecord(name=name, max_violation=max(worst, 0.0),
                       argmax=arg, passed=worst <= tol_rel)


def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def atomic_write_csv(path, header, columns) -> None:
    """Write columns (sequences of equal length) under a header row."""
    rows = [",".join(header)]
    n = len(columns[0])
    for i in range(n):
        rows.append(",".join(repr(float(c[i])) for c in columns))
    atomic_write_text(path, "\n".join(rows) + "\n")
