"""Tabular experiment reports and their CSV serialization.

Every CSV starts with one comment line carrying the experiment name and the
run parameters (seed, kappa, ...) so downstream comparisons are
self-contained.  Bodies are byte-deterministic for a fixed config and seed;
a timestamp is added only on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return repr(f) if math.isfinite(f) else ("nan" if math.isnan(f) else repr(f))
    if isinstance(v, complex):
        return f"{v.real!r}{'+' if v.imag >= 0 else ''}{v.imag!r}j"
    return str(v)


@dataclass
class ExperimentReport:
    """Rows of named numeric columns plus a metadata header."""

    name: str
    meta: dict
    columns: tuple
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows], dtype=np.float64)

    def meta_line(self, timestamp: bool = False) -> str:
        parts = [f"experiment={self.name}"]
        parts += [f"{k}={_fmt(v)}" for k, v in self.meta.items()]
        if timestamp:
            parts.append(f"timestamp={datetime.now(timezone.utc).isoformat()}")
        return "# " + " ".join(parts)

    def write_csv(self, path, timestamp: bool = False) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.meta_line(timestamp) + "\n")
            fh.write(",".join(self.columns) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def max_over_median(values) -> float:
    """Spread statistic used by the stability gates."""
    v = np.asarray([x for x in values if math.isfinite(x)], dtype=np.float64)
    if len(v) == 0:
        return math.inf
    med = float(np.median(v))
    return float(v.max() / med) if med > 0 else math.inf


def spread(values) -> float:
    """max/min over finite positive values."""
    v = np.asarray([x for x in values if math.isfinite(x) and x > 0], dtype=np.float64)
    if len(v) == 0:
        return math.inf
    return float(v.max() / v.min())


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    return float(np.polyfit(lx, ly, 1)[0])
