"""Online loop-closure detection over a keyframe stream.

Every ``keyframe_stride``-th frame is described, searched against the
database (minus the most recent ``exclusion_window`` keyframes) and then
inserted.  A best score >= tau is a hypothesis; ``consecutive_required``
consecutive hypotheses whose matches stay within ``frame_tolerance`` of the
first one's match close the loop.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, NamedTuple

import numpy as np

from .db import DescriptorDB
from .errors import DataError, FrameOrderError
from .evaluation import PRCurve

EventKind = Literal["none", "hypothesis", "closure"]


@dataclass(frozen=True)
class DetectorConfig:
    keyframe_stride: int = 7
    tau: float = 0.9
    consecutive_required: int = 3
    frame_tolerance: int = 6
    exclusion_window: int = 20
    min_db_size: int = 40
    # "keyframes": tolerance counts keyframes; "frames": raw frame indices
    tolerance_unit: Literal["keyframes", "frames"] = "keyframes"

    def __post_init__(self):
        for name in ("keyframe_stride", "consecutive_required", "frame_tolerance", "exclusion_window", "min_db_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.tolerance_unit not in ("keyframes", "frames"):
            raise ValueError(f"unknown tolerance unit {self.tolerance_unit!r}")


class LoopEvent(NamedTuple):
    frame_index: int
    keyframe: bool
    kind: EventKind = "none"
    match_id: int | None = None
    score: float | None = None


class QueryRecord(NamedTuple):
    """One keyframe's search: ``match_id``/``score`` are None when the search was skipped."""

    frame_index: int
    match_id: int | None
    score: float | None


@dataclass
class LoopDetector:
    extract: Callable[[object], np.ndarray]
    config: DetectorConfig = DetectorConfig()
    dim: int = 1064
    db: DescriptorDB = None
    log: list = field(default_factory=list)

    def __post_init__(self):
        if self.db is None:
            self.db = DescriptorDB(self.dim)
        self._run: list[QueryRecord] = []
        self._last_frame: int | None = None

    def _distance(self, a: int, b: int) -> float:
        d = abs(a - b)
        return d / self.config.keyframe_stride if self.config.tolerance_unit == "keyframes" else d

    def _search(self, desc) -> tuple[int | None, float | None]:
        cfg = self.config
        n = len(self.db) - cfg.exclusion_window
        if n < cfg.min_db_size:
            return None, None
        exclude = int(self.db.ids[n]) if n < len(self.db) else None
        (match, score), = self.db.query(desc, k=1, exclude_above=exclude)
        return match, score

    def process_frame(self, frame_index: int, img) -> LoopEvent:
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise FrameOrderError(f"frame {frame_index} after frame {self._last_frame}")
        self._last_frame = frame_index
        cfg = self.config
        if frame_index % cfg.keyframe_stride:
            return LoopEvent(frame_index, False)

        desc = self.extract(img)
        match, score = self._search(desc)
        self.db.insert(frame_index, desc)
        rec = QueryRecord(frame_index, match, score)
        self.log.append(rec)

        if match is None or score < cfg.tau:
            self._run = []
            return LoopEvent(frame_index, True, "none", match, score)
        if self._run and self._distance(match, self._run[0].match_id) > cfg.frame_tolerance:
            self._run = []
        self._run.append(rec)
        if len(self._run) >= cfg.consecutive_required:
            self._run = []
            return LoopEvent(frame_index, True, "closure", match, score)
        return LoopEvent(frame_index, True, "hypothesis", match, score)

    def run(self, frames, start: int = 0) -> list[LoopEvent]:
        return [self.process_frame(start + i, img) for i, img in enumerate(frames)]


def calibrate_tau(curve: PRCurve, eps: float = 1e-6) -> float:
    """Lowest threshold that still has precision 1 (maximal recall at full precision).

    With no such threshold, returns the top score + ``eps`` so nothing fires.
    """
    if not curve.points:
        raise DataError("empty precision-recall curve")
    perfect = [p for p in curve.points if p.precision == 1.0]
    if not perfect:
        return max(p.threshold for p in curve.points) + eps
    best = max(p.recall for p in perfect)
    return min(p.threshold for p in perfect if p.recall == best)


def write_event_log(events, path) -> None:
    with open(path, "w") as fh:
        fh.write("frame_index,keyframe_flag,match_id,score,event_kind\n")
        for e in events:
            mid = "" if e.match_id is None else str(e.match_id)
            sc = "" if e.score is None else f"{e.score:.6f}"
            fh.write(f"{e.frame_index},{int(e.keyframe)},{mid},{sc},{e.kind}\n")
