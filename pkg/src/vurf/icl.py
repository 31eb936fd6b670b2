"""In-context example sets: instruction/program pairs used for few-shot prompting."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import dsl
from .registry import Registry
from .validator import inferred_inputs, is_valid


@dataclass(frozen=True)
class InContextExample:
    id: str
    instruction: str
    program_text: str
    provenance: str = "curated"  # "curated" or "refined(<iteration>)"

    def program(self) -> dsl.Program:
        return dsl.parse_or_raise(self.program_text)


@dataclass(frozen=True)
class ExampleSet:
    examples: tuple[InContextExample, ...]
    registry_binding: str = "builtin"

    def __post_init__(self) -> None:
        ids = [ex.id for ex in self.examples]
        if len(ids) != len(set(ids)):
            raise ValueError("example ids must be unique")

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def without(self, example_id: str) -> "ExampleSet":
        return replace(self, examples=tuple(ex for ex in self.examples if ex.id != example_id))

    def ids(self) -> list[str]:
        return [ex.id for ex in self.examples]


def refined_provenance(iteration: int) -> str:
    return f"refined({iteration})"


def check_examples(examples: ExampleSet, registry: Registry) -> list[str]:
    """Return one message per example whose program fails to parse or validate."""
    problems = []
    for ex in examples:
        parsed = dsl.parse(ex.program_text)
        if isinstance(parsed, list):
            problems.append(f"{ex.id}: does not parse: {parsed[0]}")
            continue
        if not is_valid(parsed, registry, inferred_inputs(parsed)):
            problems.append(f"{ex.id}: does not validate against the registry")
    return problems


def load_examples(path: str | Path, registry_binding: str = "builtin") -> ExampleSet:
    """Read a JSON Lines file of {"id", "instruction", "program", "provenance"} objects."""
    examples = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            examples.append(
                InContextExample(
                    id=str(obj["id"]),
                    instruction=obj["instruction"],
                    program_text=obj["program"],
                    provenance=obj.get("provenance", "curated"),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{line_no}: bad example record: {exc}") from exc
    return ExampleSet(tuple(examples), registry_binding)


def save_examples(examples: ExampleSet, path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "id": ex.id,
                "instruction": ex.instruction,
                "program": ex.program_text,
                "provenance": ex.provenance,
            },
            sort_keys=True,
        )
        for ex in examples
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
