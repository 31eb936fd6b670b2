"""Runtime values flowing through the interpreter.

Videos are symbolic: a source handle plus a list of kept time spans and
accumulated effect annotations.  No pixels are ever touched; backends own
whatever pixel work their models need.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .registry import SemType

Span = tuple[float, float]


def normalize_spans(spans: list[Span] | tuple[Span, ...]) -> tuple[Span, ...]:
    """Sort, drop empty, and merge overlapping spans."""
    cleaned = sorted((float(s), float(e)) for s, e in spans if e > s)
    merged: list[Span] = []
    for start, end in cleaned:
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return tuple(merged)


def total_span_duration(spans: tuple[Span, ...]) -> float:
    return sum(end - start for start, end in spans)


def intersect_spans(spans: tuple[Span, ...], start: float, end: float) -> tuple[Span, ...]:
    out = []
    for s, e in spans:
        lo, hi = max(s, start), min(e, end)
        if hi > lo:
            out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True)
class Interval:
    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if self.start_s < 0 or self.end_s < self.start_s:
            raise ValueError(f"bad interval [{self.start_s}, {self.end_s}]")


@dataclass(frozen=True)
class Region:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"region {name}={v} outside [0, 1]")


@dataclass(frozen=True)
class PoseFrame:
    t_s: float
    keypoints: tuple[tuple[str, float, float], ...]  # (name, x, y), coordinates in [0,1]


@dataclass(frozen=True)
class PoseSeq:
    frames: tuple[PoseFrame, ...]


@dataclass(frozen=True)
class VideoRef:
    source: str
    duration_s: float
    spans: tuple[Span, ...]
    effects: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self) -> None:
        spans = normalize_spans(self.spans)
        object.__setattr__(self, "spans", spans)
        for start, end in spans:
            if start < 0 or end > self.duration_s + 1e-9:
                raise ValueError(f"span ({start}, {end}) outside [0, {self.duration_s}]")

    def with_spans(self, spans: tuple[Span, ...]) -> "VideoRef":
        return replace(self, spans=spans)

    def with_effect(self, kind: str, detail: str) -> "VideoRef":
        return replace(self, effects=self.effects + ((kind, detail),))


Value = VideoRef | Interval | Region | PoseSeq | str | float | bool


def full_video(source: str, duration_s: float) -> VideoRef:
    return VideoRef(source, duration_s, ((0.0, duration_s),))


def sem_type_of(value: Value) -> SemType:
    if isinstance(value, VideoRef):
        return SemType.VIDEO
    if isinstance(value, Interval):
        return SemType.INTERVAL
    if isinstance(value, Region):
        return SemType.REGION
    if isinstance(value, PoseSeq):
        return SemType.POSE_SEQUENCE
    if isinstance(value, bool):
        return SemType.BOOL
    if isinstance(value, (int, float)):
        return SemType.NUMBER
    if isinstance(value, str):
        return SemType.TEXT
    raise TypeError(f"not a runtime value: {value!r}")


def render_value(value: Value) -> str:
    """Stable one-line rendering for traces and logs."""
    if isinstance(value, VideoRef):
        spans = ", ".join(f"({s:g}, {e:g})" for s, e in value.spans)
        text = f"video({value.source}, spans=[{spans}]"
        if value.effects:
            text += ", effects=" + "+".join(kind for kind, _ in value.effects)
        return text + ")"
    if isinstance(value, Interval):
        return f"Interval({value.start_s:g}, {value.end_s:g})"
    if isinstance(value, Region):
        return f"Region({value.x:g}, {value.y:g}, {value.w:g}, {value.h:g})"
    if isinstance(value, PoseSeq):
        return f"poses({len(value.frames)} frames)"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return f"{value:g}"
    return repr(value)
