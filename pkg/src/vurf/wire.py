"""Typed-value JSON encoding shared with remote backend servers.

Every runtime value crosses the wire as an object carrying a "type" tag
matching the semantic type names, e.g.:

    {"type": "Text", "value": "pick up towel"}
    {"type": "Interval", "start": 1.0, "end": 2.0}
    {"type": "Video", "source": "clip", "duration": 10.0,
     "spans": [[0.0, 10.0]], "effects": [["bgblur", "person"]]}
    {"type": "Region", "x": 0.1, "y": 0.2, "w": 0.5, "h": 0.5}
    {"type": "PoseSequence",
     "frames": [{"t": 0.5, "keypoints": [["nose", 0.5, 0.2], ...]}]}
    {"type": "Number", "value": 3.5}
    {"type": "Bool", "value": true}
"""

from __future__ import annotations

from .values import Interval, PoseFrame, PoseSeq, Region, Value, VideoRef


class WireFormatError(Exception):
    pass


def value_to_json(value: Value) -> dict:
    if isinstance(value, VideoRef):
        return {
            "type": "Video",
            "source": value.source,
            "duration": value.duration_s,
            "spans": [[s, e] for s, e in value.spans],
            "effects": [[kind, detail] for kind, detail in value.effects],
        }
    if isinstance(value, Interval):
        return {"type": "Interval", "start": value.start_s, "end": value.end_s}
    if isinstance(value, Region):
        return {"type": "Region", "x": value.x, "y": value.y, "w": value.w, "h": value.h}
    if isinstance(value, PoseSeq):
        return {
            "type": "PoseSequence",
            "frames": [
                {"t": f.t_s, "keypoints": [[n, x, y] for n, x, y in f.keypoints]}
                for f in value.frames
            ],
        }
    if isinstance(value, bool):
        return {"type": "Bool", "value": value}
    if isinstance(value, (int, float)):
        return {"type": "Number", "value": float(value)}
    if isinstance(value, str):
        return {"type": "Text", "value": value}
    raise WireFormatError(f"cannot encode {value!r}")


def value_from_json(data: object) -> Value:
    if not isinstance(data, dict) or "type" not in data:
        raise WireFormatError(f"expected a typed-value object, got {data!r}")
    tag = data["type"]
    try:
        if tag == "Video":
            return VideoRef(
                source=data["source"],
                duration_s=float(data["duration"]),
                spans=tuple((float(s), float(e)) for s, e in data["spans"]),
                effects=tuple((str(k), str(d)) for k, d in data.get("effects", [])),
            )
        if tag == "Interval":
            return Interval(float(data["start"]), float(data["end"]))
        if tag == "Region":
            return Region(float(data["x"]), float(data["y"]), float(data["w"]), float(data["h"]))
        if tag == "PoseSequence":
            return PoseSeq(
                tuple(
                    PoseFrame(
                        float(f["t"]),
                        tuple((str(n), float(x), float(y)) for n, x, y in f["keypoints"]),
                    )
                    for f in data["frames"]
                )
            )
        if tag == "Text":
            return str(data["value"])
        if tag == "Number":
            return float(data["value"])
        if tag == "Bool":
            return bool(data["value"])
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"malformed {tag} value: {exc}") from exc
    raise WireFormatError(f"unknown value type tag {tag!r}")
