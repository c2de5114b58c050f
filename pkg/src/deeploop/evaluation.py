"""Top-1 matching, precision-recall sweeps and runtime benchmarking."""
from __future__ import annotations

import csv
import statistics
import time
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .db import DescriptorDB
from .errors import DataError, ShapeError


@dataclass(frozen=True)
class GroundTruth:
    """Query i should retrieve database entry ``pairs[i]`` (identity pairing
    when ``pairs`` is None), give or take ``tolerance``.

    A pair value of None marks a query with no true match: any retrieval
    for it is a false positive.
    """

    tolerance: int = 2
    pairs: dict | None = None

    def __post_init__(self):
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")

    def target(self, query_idx: int) -> int:
        if self.pairs is None:
            return query_idx
        try:
            return self.pairs[query_idx]
        except KeyError:
            raise DataError(f"no ground truth for query {query_idx}") from None

    def is_correct(self, query_idx: int, match_id: int) -> bool:
        t = self.target(query_idx)
        return t is not None and abs(int(match_id) - t) <= self.tolerance

    @classmethod
    def from_csv(cls, path, tolerance: int = 0) -> GroundTruth:
        pairs = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    q, d = int(row[0]), int(row[1])
                except (ValueError, IndexError):
                    if not pairs and row[0].strip() == "query_idx":
                        continue
                    raise DataError(f"{path}: bad ground-truth row {row!r}") from None
                pairs[q] = d
        return cls(tolerance, pairs)


class Match(NamedTuple):
    query_idx: int
    best_id: int
    score: float


class PRPoint(NamedTuple):
    threshold: float
    precision: float
    recall: float


@dataclass(frozen=True)
class PRCurve:
    points: tuple[PRPoint, ...]

    def __len__(self):
        return len(self.points)

    @property
    def auc(self) -> float:
        return auc(self)

    @property
    def r(self) -> float:
        return max_recall_at_full_precision(self)


def match_all(query_descs, db: DescriptorDB) -> list[Match]:
    """Nearest database entry for every query descriptor."""
    q = np.asarray(query_descs)
    if q.ndim != 2 or q.shape[1] != db.dim:
        raise ShapeError(f"queries must be N x {db.dim}, got {q.shape}")
    out = []
    for i, v in enumerate(q):
        (best, score), = db.query(v, k=1)
        out.append(Match(i, best, score))
    return out


def pr_curve(matches: Sequence[Match], gt: GroundTruth) -> PRCurve:
    """Sweep the threshold over the distinct scores, highest first.

    A query counts as retrieved when its score >= threshold; precision is
    defined as 1 when nothing is retrieved.
    """
    if not matches:
        raise DataError("no matches to evaluate")
    scores = np.array([m.score for m in matches], dtype=np.float64)
    correct = np.array([gt.is_correct(m.query_idx, m.best_id) for m in matches])
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    tp = np.cumsum(correct[order])
    retrieved = np.arange(1, len(s) + 1)
    # last position of each run of equal scores
    ends = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    n = len(matches)
    pts = tuple(PRPoint(float(s[e]), float(tp[e] / retrieved[e]), float(tp[e] / n)) for e in ends)
    return PRCurve(pts)


def auc(curve: PRCurve) -> float:
    """Trapezoidal area under (recall, precision), starting from (0, first precision)."""
    if not curve.points:
        return 0.0
    pts = sorted(curve.points, key=lambda p: p.recall)
    r = [0.0] + [p.recall for p in pts]
    p = [pts[0].precision] + [p.precision for p in pts]
    return float(sum((r[i + 1] - r[i]) * (p[i + 1] + p[i]) / 2 for i in range(len(pts))))


def max_recall_at_full_precision(curve: PRCurve) -> float:
    full = [p.recall for p in curve.points if p.precision == 1.0]
    return max(full) if full else 0.0


def write_pr_csv(curve: PRCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("threshold,precision,recall\n")
        for p in curve.points:
            fh.write(f"{p.threshold:.9g},{p.precision:.9g},{p.recall:.9g}\n")
        fh.write(f"# auc,{curve.auc:.9g}\n")
        fh.write(f"# r,{curve.r:.9g}\n")
        fh.write("# precision_when_nothing_retrieved,1\n")


def read_pr_csv(path) -> PRCurve:
    pts = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "threshold":
                continue
            pts.append(PRPoint(float(row[0]), float(row[1]), float(row[2])))
    return PRCurve(tuple(pts))


# -- timing ------------------------------------------------------------------

WARMUP = 3
REFERENCE_QUERY_MS = 1.47
REFERENCE_DB_SIZE = 4541


class BenchRow(NamedTuple):
    phase: str
    mean_ms: float
    std_ms: float


def _time_calls(fn, items, repetitions, warmup):
    times, results = [], []
    for i in range(warmup + repetitions):
        item = items[i % len(items)]
        t0 = time.perf_counter()
        res = fn(item)
        dt = time.perf_counter() - t0
        results.append(res)
        if i >= warmup:
            times.append(dt * 1e3)
    return times, results


def bench(extract_fn: Callable, query_fn: Callable, images: Sequence, repetitions: int,
          phases: Sequence[str] = ("extract", "query"), warmup: int = WARMUP) -> list[BenchRow]:
    """Mean and sample standard deviation (ms) per phase, run serially.

    ``extract_fn(image)`` should cover the whole path from raw image to the
    descriptor being inserted and return the descriptor; ``query_fn(desc)``
    is timed on the descriptors the extract phase produced.
    """
    if repetitions < 5:
        raise ValueError("need at least 5 repetitions")
    if not images:
        raise ValueError("no images to time")
    rows = []
    descs = None
    for phase in phases:
        if phase == "extract":
            t, descs = _time_calls(extract_fn, images, repetitions, warmup)
        elif phase == "query":
            if descs is None:
                descs = [extract_fn(im) for im in images]
            t, _ = _time_calls(query_fn, descs, repetitions, warmup)
        else:
            raise ValueError(f"unknown phase {phase!r}")
        rows.append(BenchRow(phase, statistics.fmean(t), statistics.stdev(t)))
    return rows


def format_bench_csv(rows: Sequence[BenchRow], footer: bool = True) -> str:
    lines = ["phase,mean_ms,std_ms"] + [f"{r.phase},{r.mean_ms:.4f},{r.std_ms:.4f}" for r in rows]
    if footer:
        lines.append(f"# reference: {REFERENCE_QUERY_MS} ms mean query at {REFERENCE_DB_SIZE} entries "
                     "on an i7-6700HQ CPU (for context only)")
    return "\n".join(lines) + "\n"
