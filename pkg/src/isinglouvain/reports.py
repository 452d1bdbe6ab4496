"""Run reports, partition files and QUBO-size summaries."""

from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .graph import Graph
from .partition import Partition

__all__ = [
    "RunReport",
    "SCHEMA_VERSION",
    "quartiles",
    "box_summary",
    "histogram",
    "write_partition",
    "read_partition",
    "reference_values",
]

SCHEMA_VERSION = 1


def quartiles(sizes) -> tuple[float, float, float]:
    """First quartile, median and third quartile.

    Linear interpolation at rank ``p * (n + 1)`` (the "exclusive" rule of
    :func:`statistics.quantiles`).
    """
    data = sorted(float(s) for s in sizes)
    if not data:
        raise ValueError("no data")
    if len(data) == 1:
        return data[0], data[0], data[0]
    q1, q2, q3 = statistics.quantiles(data, n=4, method="exclusive")
    # the exclusive rule extrapolates past the extremes for tiny samples
    return (max(q1, data[0]), q2, min(q3, data[-1]))


def box_summary(sizes) -> dict:
    """Quartiles, whisker bounds ``Q1 - 1.5 IQR`` / ``Q3 + 1.5 IQR`` and outliers."""
    q1, q2, q3 = quartiles(sizes)
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = [s for s in sizes if s < lo or s > hi]
    return {
        "count": len(sizes),
        "min": float(min(sizes)),
        "q1": q1,
        "median": q2,
        "q3": q3,
        "max": float(max(sizes)),
        "whisker_low": lo,
        "whisker_high": hi,
        "outliers": len(outliers),
    }


def histogram(sizes, bins: int = 10, width: int = 40) -> str:
    """Fixed-width text histogram."""
    arr = np.asarray(sizes, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        edges = np.array([lo - 0.5, hi + 0.5])
    else:
        edges = np.linspace(lo, hi, bins + 1)
    counts, edges = np.histogram(arr, bins=edges)
    peak = counts.max()
    lines = []
    for c, a, b in zip(counts, edges[:-1], edges[1:]):
        bar = "#" * int(round(width * c / peak)) if peak else ""
        lines.append(f"{a:9.1f} - {b:9.1f} | {bar:<{width}} {c}")
    return "\n".join(lines)


@dataclass
class RunReport:
    graph_name: str
    n: int
    m: float
    algorithm: str
    seed: int
    final_modularity: float
    num_clusters: int
    hyperparams: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    qubo_size_quartiles: list[float] | None = None

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "graph_name": self.graph_name,
            "n": self.n,
            "m": self.m,
            "algorithm": self.algorithm,
            "seed": self.seed,
            "hyperparams": self.hyperparams,
            "final_modularity": self.final_modularity,
            "num_clusters": self.num_clusters,
            "stats": self.stats,
            "qubo_size_quartiles": self.qubo_size_quartiles,
        }

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path: str | os.PathLike) -> RunReport:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict) or data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"{path}: not a schema {SCHEMA_VERSION} run report")
        try:
            return cls(
                graph_name=data["graph_name"],
                n=int(data["n"]),
                m=float(data["m"]),
                algorithm=data["algorithm"],
                seed=int(data["seed"]),
                final_modularity=float(data["final_modularity"]),
                num_clusters=int(data["num_clusters"]),
                hyperparams=data.get("hyperparams", {}),
                stats=data.get("stats", {}),
                qubo_size_quartiles=data.get("qubo_size_quartiles"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: malformed run report ({exc})") from exc


def write_partition(path: str | os.PathLike, g: Graph, p: Partition) -> None:
    """Write ``label cluster`` lines with clusters renumbered ``0..K-1``."""
    with open(path, "w", encoding="utf-8") as fh:
        for label, c in zip(g.labels, p.labels()):
            fh.write(f"{label} {c}\n")


def read_partition(path: str | os.PathLike, g: Graph) -> Partition:
    """Read a partition file written by :func:`write_partition`."""
    index = {str(label): i for i, label in enumerate(g.labels)}
    assignment = [-1] * g.n
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            parts = s.rsplit(None, 1)
            if len(parts) != 2 or parts[0] not in index:
                raise ValueError(f"{path}:{lineno}: bad partition line {s!r}")
            assignment[index[parts[0]]] = int(parts[1])
    if -1 in assignment:
        raise ValueError(f"{path}: partition does not cover every node")
    return Partition(g, assignment)


def reference_values() -> dict:
    """Published per-graph results shipped with the package, keyed by graph name."""
    text = (resources.files(__package__) / "data" / "reference_values.json").read_text(encoding="utf-8")
    return json.loads(text)["graphs"]
