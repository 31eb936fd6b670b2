"""Catalog of callable functions: typed signatures plus one-line usage text.

The registry is the single source of truth for what a program may call.
The validator checks programs against it, the correction loop embeds its
usage block into feedback prompts, and the interpreter binds each entry
to an executor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class SemType(Enum):
    VIDEO = "Video"
    INTERVAL = "Interval"
    REGION = "Region"
    POSE_SEQUENCE = "PoseSequence"
    TEXT = "Text"
    NUMBER = "Number"
    BOOL = "Bool"
    ANY = "Any"

    @classmethod
    def from_name(cls, name: str) -> "SemType":
        for member in cls:
            if member.value == name:
                return member
        raise RegistryFormatError(f"unknown semantic type {name!r}")


def unify(a: SemType, b: SemType) -> bool:
    """Any unifies with everything; all other pairs only with themselves."""
    return a is SemType.ANY or b is SemType.ANY or a is b


@dataclass(frozen=True)
class Param:
    name: str
    type: SemType
    required: bool = True


@dataclass(frozen=True)
class FunctionSignature:
    name: str
    params: tuple[Param, ...]
    returns: SemType
    usage: str

    def __post_init__(self) -> None:
        names = [p.name for p in self.params]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate parameter names in signature {self.name!r}")
        if not self.usage:
            raise ValueError(f"signature {self.name!r} has empty usage text")

    def param(self, name: str) -> Param | None:
        for p in self.params:
            if p.name == name:
                return p
        return None


class RegistryConflictError(Exception):
    """Raised when a merge would redefine a name with a different signature."""

    def __init__(self, name: str):
        super().__init__(f"registry merge conflict on function {name!r}")
        self.name = name


class RegistryFormatError(Exception):
    """Raised when a registry extension file does not match the schema."""


class Registry:
    """Immutable, case-sensitive name -> FunctionSignature map."""

    def __init__(self, signatures: list[FunctionSignature] | tuple[FunctionSignature, ...] = ()):
        entries: dict[str, FunctionSignature] = {}
        for sig in signatures:
            if sig.name in entries:
                raise ValueError(f"duplicate function name {sig.name!r}")
            entries[sig.name] = sig
        self._entries = entries

    def lookup(self, name: str) -> FunctionSignature | None:
        return self._entries.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        return sorted(self._entries)

    def signatures(self) -> list[FunctionSignature]:
        return [self._entries[name] for name in self.names()]


def builtin_catalog() -> Registry:
    """The built-in function catalog covering grounding, QA, pose, and editing."""
    v, ivl, reg, pose, txt, num = (
        SemType.VIDEO,
        SemType.INTERVAL,
        SemType.REGION,
        SemType.POSE_SEQUENCE,
        SemType.TEXT,
        SemType.NUMBER,
    )
    return Registry(
        [
            FunctionSignature(
                "GROUNDING",
                (Param("video", v), Param("query", txt)),
                ivl,
                "locate the time interval where the queried event happens",
            ),
            FunctionSignature(
                "TRIMAFTER",
                (Param("video", v), Param("interval", ivl)),
                v,
                "keep only the part of the video after the interval ends",
            ),
            FunctionSignature(
                "TRIMBEFORE",
                (Param("video", v), Param("interval", ivl)),
                v,
                "keep only the part of the video before the interval starts",
            ),
            FunctionSignature(
                "TRIM",
                (Param("video", v), Param("start", num), Param("end", num)),
                v,
                "keep only the part of the video between start and end seconds",
            ),
            FunctionSignature(
                "MERGE",
                (Param("video0", v), Param("video1", v)),
                v,
                "concatenate two videos into one",
            ),
            FunctionSignature(
                "CROP",
                (Param("video", v), Param("region", reg)),
                v,
                "crop the video to a rectangular region",
            ),
            FunctionSignature(
                "BGBLUR",
                (Param("video", v), Param("object", txt)),
                v,
                "blur the background around the named object",
            ),
            FunctionSignature(
                "COLORPOP",
                (Param("video", v), Param("object", txt)),
                v,
                "keep the named object in color and gray out the rest",
            ),
            FunctionSignature(
                "VQA",
                (Param("video", v), Param("question", txt)),
                txt,
                "answer a natural-language question about the video",
            ),
            FunctionSignature(
                "TRACK",
                (Param("video", v), Param("object", txt)),
                reg,
                "track the named object and return its bounding region",
            ),
            FunctionSignature(
                "POSE",
                (Param("video", v),),
                pose,
                "detect human body keypoints over time",
            ),
            FunctionSignature(
                "CLASSIFYPOSE",
                (Param("poses", pose), Param("labels", txt)),
                txt,
                "classify a pose sequence into one of the comma-separated labels",
            ),
        ]
    )


def merge(base: Registry, extension: Registry) -> Registry:
    """Union of two registries; identical redefinitions are allowed, others conflict."""
    merged = {sig.name: sig for sig in base.signatures()}
    for sig in extension.signatures():
        existing = merged.get(sig.name)
        if existing is not None and existing != sig:
            raise RegistryConflictError(sig.name)
        merged[sig.name] = sig
    return Registry(list(merged.values()))


def usage_block(registry: Registry) -> str:
    """Deterministic function list, one line per entry, alphabetically sorted.

    This exact text is embedded in correction and context-free prompts.
    """
    lines = []
    for sig in registry.signatures():
        params = ", ".join(
            f"{p.name}: {p.type.value}" + ("" if p.required else "?") for p in sig.params
        )
        lines.append(f"{sig.name}({params}) -> {sig.returns.value} — {sig.usage}")
    return "\n".join(lines)


def registry_from_json(data: dict) -> Registry:
    """Build a registry from the extension-file schema."""
    if not isinstance(data, dict) or not isinstance(data.get("functions"), list):
        raise RegistryFormatError('expected an object with a "functions" list')
    sigs = []
    for i, fn in enumerate(data["functions"]):
        try:
            params = tuple(
                Param(p["name"], SemType.from_name(p["type"]), bool(p.get("required", True)))
                for p in fn.get("params", [])
            )
            sigs.append(
                FunctionSignature(fn["name"], params, SemType.from_name(fn["returns"]), fn["usage"])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RegistryFormatError(f"functions[{i}]: {exc}") from exc
    return Registry(sigs)


def registry_to_json(registry: Registry) -> dict:
    return {
        "functions": [
            {
                "name": sig.name,
                "params": [
                    {"name": p.name, "type": p.type.value, "required": p.required}
                    for p in sig.params
                ],
                "returns": sig.returns.value,
                "usage": sig.usage,
            }
            for sig in registry.signatures()
        ]
    }


def load_extension(path: str | Path) -> Registry:
    """Load a registry extension file (JSON, see registry_from_json schema)."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RegistryFormatError(f"{path}: {exc}") from exc
    return registry_from_json(data)
