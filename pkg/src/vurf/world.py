"""Synthetic ground-truth worlds driving the deterministic model mocks.

A VideoDescriptor records what "happens" in a video: labelled events with
time intervals, named objects with regions, canned QA facts, and scripted
pose timelines.  The mock backends answer GROUNDING/VQA/TRACK/POSE/
CLASSIFYPOSE queries purely from this data, so every desk-scale test has
a known correct answer.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .values import Interval, PoseFrame, PoseSeq, Region, VideoRef

TOKEN_RE = re.compile(r"[a-z0-9]+")


class NoMatch(Exception):
    """A mock backend found nothing in the descriptor for the query."""


def tokens(text: str) -> set[str]:
    return set(TOKEN_RE.findall(text.lower()))


def overlap_score(query: str, label: str) -> float:
    """|query tokens ∩ label tokens| / |label tokens|; 0 for empty labels."""
    label_tokens = tokens(label)
    if not label_tokens:
        return 0.0
    return len(tokens(query) & label_tokens) / len(label_tokens)


@dataclass(frozen=True)
class Event:
    label: str
    start_s: float
    end_s: float
    actor: str = ""


@dataclass(frozen=True)
class WorldObject:
    name: str
    region: Region
    start_s: float
    end_s: float


@dataclass(frozen=True)
class QaFact:
    question_pattern: str
    answer: str


@dataclass(frozen=True)
class VideoDescriptor:
    id: str
    duration_s: float
    fps: float = 25.0
    events: tuple[Event, ...] = ()
    objects: tuple[WorldObject, ...] = ()
    qa_facts: tuple[QaFact, ...] = ()
    poses: dict[str, tuple[tuple[float, str], ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.duration_s <= 0 or self.fps <= 0:
            raise ValueError("duration_s and fps must be positive")
        for event in self.events:
            if not event.label:
                raise ValueError("event labels must be non-empty")
            if not 0 <= event.start_s <= event.end_s <= self.duration_s:
                raise ValueError(f"event {event.label!r} interval outside the video")
        for actor, timeline in self.poses.items():
            times = [t for t, _ in timeline]
            if times != sorted(set(times)):
                raise ValueError(f"pose timestamps for {actor!r} must be strictly increasing")

    def video(self) -> VideoRef:
        return VideoRef(self.id, self.duration_s, ((0.0, self.duration_s),))


# ---------------------------------------------------------------------------
# Descriptor files (.vworld.json)


def descriptor_from_json(data: dict) -> VideoDescriptor:
    return VideoDescriptor(
        id=data["id"],
        duration_s=float(data["duration_s"]),
        fps=float(data.get("fps", 25.0)),
        events=tuple(
            Event(e["label"], float(e["start_s"]), float(e["end_s"]), e.get("actor", ""))
            for e in data.get("events", [])
        ),
        objects=tuple(
            WorldObject(
                o["name"],
                Region(**{k: float(v) for k, v in o["region"].items()}),
                float(o.get("start_s", 0.0)),
                float(o.get("end_s", data["duration_s"])),
            )
            for o in data.get("objects", [])
        ),
        qa_facts=tuple(
            QaFact(f["question_pattern"], f["answer"]) for f in data.get("qa_facts", [])
        ),
        poses={
            actor: tuple((float(p["t"]), p["label"]) for p in timeline)
            for actor, timeline in data.get("poses", {}).items()
        },
    )


def descriptor_to_json(descriptor: VideoDescriptor) -> dict:
    return {
        "id": descriptor.id,
        "duration_s": descriptor.duration_s,
        "fps": descriptor.fps,
        "events": [
            {"label": e.label, "start_s": e.start_s, "end_s": e.end_s, "actor": e.actor}
            for e in descriptor.events
        ],
        "objects": [
            {
                "name": o.name,
                "region": {"x": o.region.x, "y": o.region.y, "w": o.region.w, "h": o.region.h},
                "start_s": o.start_s,
                "end_s": o.end_s,
            }
            for o in descriptor.objects
        ],
        "qa_facts": [
            {"question_pattern": f.question_pattern, "answer": f.answer}
            for f in descriptor.qa_facts
        ],
        "poses": {
            actor: [{"t": t, "label": label} for t, label in timeline]
            for actor, timeline in descriptor.poses.items()
        },
    }


def load_descriptor(path: str | Path) -> VideoDescriptor:
    return descriptor_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def save_descriptor(descriptor: VideoDescriptor, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(descriptor_to_json(descriptor), indent=2, sort_keys=True), encoding="utf-8"
    )


class WorldStore:
    """Descriptor lookup by video source handle."""

    def __init__(self, descriptors: list[VideoDescriptor] | tuple[VideoDescriptor, ...] = ()):
        self._by_id = {d.id: d for d in descriptors}

    def add(self, descriptor: VideoDescriptor) -> None:
        self._by_id[descriptor.id] = descriptor

    def resolve_id(self, descriptor_id: str) -> VideoDescriptor:
        return self._by_id[descriptor_id]

    def resolve(self, video: VideoRef) -> VideoDescriptor:
        base = video.source.split("+", 1)[0]  # merged videos keep the first source
        descriptor = self._by_id.get(base)
        if descriptor is None:
            raise NoMatch(f"no descriptor for video source {video.source!r}")
        return descriptor


# ---------------------------------------------------------------------------
# Mock model backends


def mock_grounding(descriptor: VideoDescriptor, query: str) -> Interval:
    """Interval of the event with maximal token overlap; earliest start wins ties."""
    best: tuple[float, float, Event] | None = None
    for event in descriptor.events:
        score = overlap_score(query, event.label)
        if score <= 0:
            continue
        key = (-score, event.start_s)
        if best is None or key < (best[0], best[1]):
            best = (-score, event.start_s, event)
    if best is None:
        raise NoMatch(f"no event in {descriptor.id!r} matches query {query!r}")
    event = best[2]
    return Interval(event.start_s, event.end_s)


def _span_overlap(spans: tuple[tuple[float, float], ...], start: float, end: float) -> float:
    return sum(max(0.0, min(e, end) - max(s, start)) for s, e in spans)


def mock_vqa(descriptor: VideoDescriptor, video: VideoRef, question: str) -> str:
    """Answer from the best-matching QA fact, else the dominant visible event."""
    if not video.spans:
        raise NoMatch("video has no remaining spans to examine")

    question_tokens = tokens(question)
    best_fact: tuple[int, int, QaFact] | None = None
    for index, fact in enumerate(descriptor.qa_facts):
        pattern_tokens = tokens(fact.question_pattern)
        if pattern_tokens and pattern_tokens <= question_tokens:
            key = (-len(pattern_tokens), index)
            if best_fact is None or key < (best_fact[0], best_fact[1]):
                best_fact = (-len(pattern_tokens), index, fact)
    if best_fact is not None:
        return best_fact[2].answer

    best_event: tuple[float, float, Event] | None = None
    for event in descriptor.events:
        visible = _span_overlap(video.spans, event.start_s, event.end_s)
        if visible <= 0:
            continue
        key = (-visible, event.start_s)
        if best_event is None or key < (best_event[0], best_event[1]):
            best_event = (-visible, event.start_s, event)
    if best_event is None:
        raise NoMatch(f"nothing visible in the given spans of {descriptor.id!r}")
    return best_event[2].label


# 17 named keypoints per pose label, deterministic; image coordinates with y
# increasing downward.
_KEYPOINT_NAMES = (
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
)

_POSE_LAYOUT = {
    # label -> (head_y, hip_y, ankle_y, x_spread)
    "standing": (0.15, 0.55, 0.9, 0.08),
    "sitting": (0.35, 0.6, 0.75, 0.12),
    "falling": (0.45, 0.6, 0.7, 0.3),
    "lying": (0.8, 0.8, 0.8, 0.42),
}

POSE_LABELS = tuple(_POSE_LAYOUT)


def pose_keypoints(label: str) -> tuple[tuple[str, float, float], ...]:
    """Canonical 17-keypoint frame for a scripted pose label."""
    if label not in _POSE_LAYOUT:
        raise NoMatch(f"unknown pose label {label!r}")
    head_y, hip_y, ankle_y, spread = _POSE_LAYOUT[label]
    mid_y = (head_y + hip_y) / 2
    knee_y = (hip_y + ankle_y) / 2
    cx = 0.5
    points = {
        "nose": (cx, head_y),
        "left_eye": (cx - 0.02, head_y - 0.02),
        "right_eye": (cx + 0.02, head_y - 0.02),
        "left_ear": (cx - 0.04, head_y),
        "right_ear": (cx + 0.04, head_y),
        "left_shoulder": (cx - spread / 2, mid_y - 0.1),
        "right_shoulder": (cx + spread / 2, mid_y - 0.1),
        "left_elbow": (cx - spread * 0.75, mid_y),
        "right_elbow": (cx + spread * 0.75, mid_y),
        "left_wrist": (cx - spread, mid_y + 0.08),
        "right_wrist": (cx + spread, mid_y + 0.08),
        "left_hip": (cx - spread / 3, hip_y),
        "right_hip": (cx + spread / 3, hip_y),
        "left_knee": (cx - spread / 3, knee_y),
        "right_knee": (cx + spread / 3, knee_y),
        "left_ankle": (cx - spread / 3, ankle_y),
        "right_ankle": (cx + spread / 3, ankle_y),
    }
    return tuple(
        (name, round(points[name][0], 4), round(points[name][1], 4)) for name in _KEYPOINT_NAMES
    )


def label_of_keypoints(keypoints: tuple[tuple[str, float, float], ...]) -> str | None:
    """Recover the scripted label from a canonical keypoint frame, if any."""
    for label in POSE_LABELS:
        if pose_keypoints(label) == keypoints:
            return label
    return None


def mock_pose(descriptor: VideoDescriptor, video: VideoRef) -> PoseSeq:
    """Scripted keypoint frames of all actors, restricted to the video's spans."""
    frames = []
    for timeline in descriptor.poses.values():
        for t, label in timeline:
            if any(s <= t < e for s, e in video.spans):
                frames.append(PoseFrame(t, pose_keypoints(label)))
    if not frames:
        raise NoMatch(f"no scripted pose frames inside the given spans of {descriptor.id!r}")
    return PoseSeq(tuple(sorted(frames, key=lambda f: f.t_s)))


def mock_classifypose(poses: PoseSeq, labels: str) -> str:
    """Majority recovered label among frames, restricted to the given vocabulary."""
    vocabulary = [part.strip() for part in labels.split(",") if part.strip()]
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    for index, frame in enumerate(poses.frames):
        label = label_of_keypoints(frame.keypoints)
        if label in vocabulary:
            counts[label] = counts.get(label, 0) + 1
            first_seen.setdefault(label, index)
    if not counts:
        raise NoMatch(f"no frame matches any of the labels {vocabulary!r}")
    return min(counts, key=lambda label: (-counts[label], first_seen[label]))


def mock_track(descriptor: VideoDescriptor, video: VideoRef, object_name: str) -> Region:
    """Region of the named object, matched by token overlap."""
    best: tuple[float, int, WorldObject] | None = None
    for index, obj in enumerate(descriptor.objects):
        score = overlap_score(object_name, obj.name)
        if score <= 0:
            continue
        key = (-score, index)
        if best is None or key < (best[0], best[1]):
            best = (-score, index, obj)
    if best is None:
        raise NoMatch(f"no object in {descriptor.id!r} matches {object_name!r}")
    return best[2].region


# ---------------------------------------------------------------------------
# Randomized descriptor families for sweep benchmarks

_ACTIONS = (
    "open the door",
    "pick up towel",
    "enter room",
    "sit on chair",
    "pour water",
    "wave hand",
    "read book",
    "close window",
)


def random_descriptor(rng: random.Random, descriptor_id: str) -> VideoDescriptor:
    """A plausible random world: a few non-overlapping events plus one QA fact."""
    duration = rng.choice([10.0, 12.0, 15.0, 20.0])
    n_events = rng.randint(2, 4)
    labels = rng.sample(_ACTIONS, n_events)
    starts = sorted(rng.uniform(0, duration - 2.0) for _ in range(n_events))
    events = []
    for i, (label, start) in enumerate(zip(labels, starts)):
        limit = starts[i + 1] if i + 1 < n_events else duration
        end = min(start + rng.uniform(0.5, 2.0), limit, duration)
        if end > start:
            events.append(Event(label, round(start, 1), round(end, 1), actor="person"))
    fact = QaFact("color of the wall", rng.choice(["white", "blue", "green"]))
    return VideoDescriptor(
        id=descriptor_id, duration_s=duration, events=tuple(events), qa_facts=(fact,)
    )
