"""Log-derived behavioral measures: clicks, views, dwell, and usage heatmaps.

All functions are pure over ordered event lists; per-session computation
can run in parallel. Aggregation is descriptive only (mean and sample
standard deviation), mirroring how such measures are conventionally
reported.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

VIEWS = ("Global", "MiniMap", "Detailed")

EVENT_KINDS = frozenset(
    {
        "NodeClick",
        "EdgeClick",
        "SnippetView",
        "ViewArticle",
        "ViewArticleEnd",
        "LayerEnter",
        "LayerExit",
        "TaskStart",
        "TaskEnd",
    }
)

_COUNTED_KINDS = EVENT_KINDS


class AnalysisError(Exception):
    """A session log cannot be analyzed (missing markers, zero duration)."""


@dataclass(frozen=True)
class InteractionEvent:
    """One logged interaction; ``t_ms`` is milliseconds since session start."""

    session: str
    t_ms: int
    kind: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.t_ms < 0:
            raise AnalysisError(f"event t_ms must be >= 0, got {self.t_ms}")

    def to_dict(self) -> dict:
        # Fixed key order; payload keys sorted for byte-stable lines.
        return {
            "session": self.session,
            "t_ms": self.t_ms,
            "kind": self.kind,
            "payload": {k: self.payload[k] for k in sorted(self.payload)},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionEvent":
        return cls(
            session=d["session"], t_ms=d["t_ms"], kind=d["kind"], payload=d.get("payload", {})
        )


@dataclass(frozen=True)
class SessionMetrics:
    """Per-session measures derived from the interaction log."""

    session: str
    nc: int
    ec: int
    v: int
    vt_s: float
    duration_s: float
    view_fractions: dict[str, float]
    heatmap: np.ndarray  # shape (bins, len(VIEWS)); per-bin dwell fractions

    def to_dict(self) -> dict:
        return {
            "session": self.session,
            "nc": self.nc,
            "ec": self.ec,
            "v": self.v,
            "vt_s": self.vt_s,
            "duration_s": self.duration_s,
            "view_fractions": dict(self.view_fractions),
            "views": list(VIEWS),
            "heatmap": self.heatmap.tolist(),
        }


def _merge_intervals(intervals: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Union of intervals; overlapping time is counted once."""
    merged: list[tuple[int, int]] = []
    for s, e in sorted(intervals):
        if e <= s:
            continue
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def _total_ms(intervals: list[tuple[int, int]]) -> int:
    return sum(e - s for s, e in _merge_intervals(intervals))


def _reconstruct_intervals(
    events: list[InteractionEvent],
    open_kind: str,
    close_kind: str,
    key_of,
    end_ms: int,
) -> dict[str, list[tuple[int, int]]]:
    """Pair open/close events per key (LIFO); unclosed intervals end at task end."""
    open_stacks: dict[str, list[int]] = {}
    intervals: dict[str, list[tuple[int, int]]] = {}
    for ev in events:
        if ev.kind == open_kind:
            open_stacks.setdefault(key_of(ev), []).append(ev.t_ms)
        elif ev.kind == close_kind:
            stack = open_stacks.get(key_of(ev))
            if stack:
                start = stack.pop()
                intervals.setdefault(key_of(ev), []).append((start, ev.t_ms))
            else:
                logger.warning("unmatched %s at t=%d ignored", close_kind, ev.t_ms)
    for key, stack in open_stacks.items():
        for start in stack:
            intervals.setdefault(key, []).append((start, max(start, end_ms)))
    return intervals


def _task_bounds(events: list[InteractionEvent]) -> tuple[int, int]:
    start = next((e.t_ms for e in events if e.kind == "TaskStart"), None)
    end = next((e.t_ms for e in reversed(events) if e.kind == "TaskEnd"), None)
    if start is None or end is None:
        raise AnalysisError("session log must contain TaskStart and TaskEnd")
    return start, end


def session_metrics(events: list[InteractionEvent], bins: int = 100) -> SessionMetrics:
    """Compute NC, EC, V, VT, view-time fractions, and the usage heatmap.

    Events must be sorted by ``t_ms`` and belong to one session. View time
    sums disjointified article-view intervals; view dwell is reconstructed
    from LayerEnter/LayerExit pairs. Unknown kinds are skipped with a
    warning.
    """
    if any(events[i].t_ms > events[i + 1].t_ms for i in range(len(events) - 1)):
        raise AnalysisError("events must be sorted by t_ms")
    sessions = {e.session for e in events}
    if len(sessions) > 1:
        raise AnalysisError(f"events span multiple sessions: {sorted(sessions)}")
    known = [e for e in events if e.kind in _COUNTED_KINDS]
    for e in events:
        if e.kind not in _COUNTED_KINDS:
            logger.warning("unknown event kind %r skipped", e.kind)
    start_ms, end_ms = _task_bounds(known)

    nc = sum(1 for e in known if e.kind == "NodeClick")
    ec = sum(1 for e in known if e.kind == "EdgeClick")
    v = sum(1 for e in known if e.kind == "ViewArticle")

    article = _reconstruct_intervals(
        known, "ViewArticle", "ViewArticleEnd", lambda e: e.payload.get("doc", ""), end_ms
    )
    vt_ms = sum(_total_ms(iv) for iv in article.values())

    view_intervals = _view_intervals(known, end_ms)
    dwell_ms = {view: _total_ms(view_intervals[view]) for view in VIEWS}
    total_dwell = sum(dwell_ms.values())
    if total_dwell > 0:
        fractions = {view: dwell_ms[view] / total_dwell for view in VIEWS}
    else:
        fractions = {}

    duration_ms = end_ms - start_ms
    if duration_ms > 0:
        matrix = _heatmap_matrix(view_intervals, start_ms, end_ms, bins)
    else:
        matrix = np.zeros((bins, len(VIEWS)))
    return SessionMetrics(
        session=next(iter(sessions)) if sessions else "",
        nc=nc,
        ec=ec,
        v=v,
        vt_s=vt_ms / 1000.0,
        duration_s=duration_ms / 1000.0,
        view_fractions=fractions,
        heatmap=matrix,
    )


def _view_intervals(
    events: list[InteractionEvent], end_ms: int
) -> dict[str, list[tuple[int, int]]]:
    raw = _reconstruct_intervals(
        events, "LayerEnter", "LayerExit", lambda e: e.payload.get("view", ""), end_ms
    )
    return {view: _merge_intervals(raw.get(view, [])) for view in VIEWS}


def heatmap(events: list[InteractionEvent], bins: int = 100) -> np.ndarray:
    """Per-bin dwell fractions over ``bins`` equal slices of the task.

    Cell (b, view) is the fraction of bin b's interval spent in that view;
    intervals straddling a bin boundary are apportioned proportionally.
    """
    start_ms, end_ms = _task_bounds(events)
    if end_ms <= start_ms:
        raise AnalysisError("session has zero duration")
    return _heatmap_matrix(_view_intervals(events, end_ms), start_ms, end_ms, bins)


def _heatmap_matrix(
    view_intervals: dict[str, list[tuple[int, int]]],
    start_ms: int,
    end_ms: int,
    bins: int,
) -> np.ndarray:
    duration = end_ms - start_ms
    bin_width = duration / bins
    matrix = np.zeros((bins, len(VIEWS)))
    for col, view in enumerate(VIEWS):
        for s, e in view_intervals.get(view, []):
            s = max(s, start_ms) - start_ms
            e = min(e, end_ms) - start_ms
            if e <= s:
                continue
            first = int(s // bin_width)
            last = min(int(math.ceil(e / bin_width)), bins)
            for b in range(first, last):
                lo, hi = b * bin_width, (b + 1) * bin_width
                overlap = min(e, hi) - max(s, lo)
                if overlap > 0:
                    matrix[b, col] += overlap / bin_width
    return matrix


@dataclass(frozen=True)
class FieldStats:
    mean: float
    std: float


@dataclass(frozen=True)
class AggregateReport:
    """Mean and sample standard deviation per metric across sessions."""

    n: int
    fields: dict[str, FieldStats]
    view_fractions: dict[str, FieldStats]
    single_session: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "single_session": self.single_session,
            "fields": {k: {"mean": s.mean, "std": s.std} for k, s in self.fields.items()},
            "view_fractions": {
                k: {"mean": s.mean, "std": s.std} for k, s in self.view_fractions.items()
            },
        }


def _stats(values: list[float]) -> FieldStats:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return FieldStats(mean=float(arr.mean()), std=std)


def aggregate(metrics: list[SessionMetrics]) -> AggregateReport:
    """Mean (sample standard deviation) for every scalar field."""
    if not metrics:
        raise AnalysisError("cannot aggregate an empty metrics list")
    fields = {
        "nc": _stats([float(m.nc) for m in metrics]),
        "ec": _stats([float(m.ec) for m in metrics]),
        "v": _stats([float(m.v) for m in metrics]),
        "vt_s": _stats([m.vt_s for m in metrics]),
        "duration_s": _stats([m.duration_s for m in metrics]),
    }
    view_fractions = {
        view: _stats([m.view_fractions.get(view, 0.0) for m in metrics]) for view in VIEWS
    }
    return AggregateReport(
        n=len(metrics),
        fields=fields,
        view_fractions=view_fractions,
        single_session=len(metrics) == 1,
    )
