"""End-to-end evaluation over instruction suites: accuracy, ablations, sweeps."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import dsl
from .corrector import correct
from .gateway import ProviderConfig
from .generator import GenerationError, generate
from .icl import ExampleSet
from .interpreter import Bindings, ExecError, execute
from .registry import Registry
from .refiner import RefinementConfig, refine_set
from .validator import is_valid
from .values import render_value, sem_type_of
from .world import WorldStore, load_descriptor, tokens


@dataclass(frozen=True)
class EvalItem:
    id: str
    descriptor: str  # WorldStore id or path to a .vworld.json file
    question: str
    answer: str
    options: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.options is not None and self.answer not in self.options:
            raise ValueError(f"item {self.id!r}: answer must be one of the options")


@dataclass(frozen=True)
class AblationFlags:
    error_correction: bool = True
    self_refinement: bool = True
    refinement_iterations: int = 1
    correction_iterations: int = 3

    def __post_init__(self) -> None:
        if self.refinement_iterations < 0:
            raise ValueError("refinement_iterations must be >= 0")


@dataclass(frozen=True)
class ItemRecord:
    item_id: str
    generated_program: str | None
    corrected_program: str | None
    valid: bool
    predicted: str | None
    correct: bool
    failure: str | None = None


@dataclass(frozen=True)
class EvalReport:
    records: tuple[ItemRecord, ...]
    accuracy: float
    config: dict
    seed: int

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "seed": self.seed,
            "config": self.config,
            "records": [
                {
                    "id": r.item_id,
                    "generated_program": r.generated_program,
                    "corrected_program": r.corrected_program,
                    "valid": r.valid,
                    "predicted": r.predicted,
                    "correct": r.correct,
                    "failure": r.failure,
                }
                for r in self.records
            ],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        lines = ["id,valid,correct,predicted"]
        for r in self.records:
            predicted = (r.predicted or "").replace(",", ";")
            lines.append(f"{r.item_id},{int(r.valid)},{int(r.correct)},{predicted}")
        return "\n".join(lines) + "\n"


def normalize_answer(text: str) -> str:
    return " ".join(text.strip().lower().split())


def match_option(predicted: str, options: tuple[str, ...]) -> str | None:
    """Nearest option: normalized equality first, then best token overlap."""
    normalized = normalize_answer(predicted)
    for option in options:
        if normalize_answer(option) == normalized:
            return option
    predicted_tokens = tokens(predicted)
    best: tuple[float, int] | None = None
    best_option = None
    for index, option in enumerate(options):
        option_tokens = tokens(option)
        if not option_tokens:
            continue
        score = len(predicted_tokens & option_tokens) / len(option_tokens)
        if score > 0 and (best is None or (-score, index) < best):
            best = (-score, index)
            best_option = option
    return best_option


def instruction_for(item: EvalItem) -> str:
    if not item.options:
        return item.question
    letters = "abcdefghij"
    rendered = " ".join(f"{letters[i]}) {opt}" for i, opt in enumerate(item.options))
    return f"{item.question} Options: {rendered}"


def _evaluate_item(
    item: EvalItem,
    examples: ExampleSet,
    flags: AblationFlags,
    bindings: Bindings,
    registry: Registry,
    config: ProviderConfig,
    world: WorldStore,
) -> ItemRecord:
    instruction = instruction_for(item)
    try:
        program = generate(instruction, examples, registry, config)
    except GenerationError as exc:
        return ItemRecord(item.id, None, None, False, None, False, failure=f"generation: {exc}")
    generated_text = dsl.print_program(program)

    descriptor = _resolve_descriptor(item, world)
    if descriptor is None:
        return ItemRecord(
            item.id, generated_text, None, False, None, False,
            failure=f"descriptor {item.descriptor!r} not found",
        )
    inputs = {name: descriptor.video() for name in dsl.free_inputs(program)}
    input_types = {name: sem_type_of(value) for name, value in inputs.items()}

    final = program
    if flags.error_correction:
        report = correct(
            program, instruction, registry, input_types, config,
            max_iters=flags.correction_iterations,
        )
        final = report.final_program
        if report.error is not None:
            return ItemRecord(
                item.id, generated_text, dsl.print_program(final), False, None, False,
                failure=f"correction: {report.error}",
            )
    final_text = dsl.print_program(final)
    inputs = {name: descriptor.video() for name in dsl.free_inputs(final)}
    input_types = {name: sem_type_of(value) for name, value in inputs.items()}

    # An invalid final program is scored as a wrong prediction.
    if not is_valid(final, registry, input_types):
        return ItemRecord(item.id, generated_text, final_text, False, None, False)

    try:
        result, _ = execute(final, inputs, bindings, registry)
    except (ExecError, ValueError) as exc:
        return ItemRecord(
            item.id, generated_text, final_text, True, None, False, failure=f"execution: {exc}"
        )

    predicted = result if isinstance(result, str) else render_value(result)
    if item.options:
        matched = match_option(predicted, item.options)
        correct_flag = matched is not None and matched == item.answer
    else:
        correct_flag = normalize_answer(predicted) == normalize_answer(item.answer)
    return ItemRecord(item.id, generated_text, final_text, True, predicted, correct_flag)


def _resolve_descriptor(item: EvalItem, world: WorldStore):
    try:
        return world.resolve_id(item.descriptor)
    except KeyError:
        pass
    path = Path(item.descriptor)
    if path.exists():
        descriptor = load_descriptor(path)
        world.add(descriptor)
        return descriptor
    return None


def run_eval(
    items: list[EvalItem],
    examples: ExampleSet,
    flags: AblationFlags,
    bindings: Bindings,
    registry: Registry,
    config: ProviderConfig,
    world: WorldStore,
    seed: int = 0,
    workers: int = 1,
) -> EvalReport:
    """Evaluate every item; failures of any stage count as incorrect."""
    if not items:
        raise ValueError("items must be non-empty")

    effective = examples
    if flags.self_refinement and flags.refinement_iterations > 0:
        refinement = RefinementConfig(provider=config, iterations=flags.refinement_iterations)
        effective = refine_set(examples, refinement, registry)[-1]

    def evaluate(item: EvalItem) -> ItemRecord:
        return _evaluate_item(item, effective, flags, bindings, registry, config, world)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = tuple(pool.map(evaluate, items))
    else:
        records = tuple(evaluate(item) for item in items)

    accuracy = sum(r.correct for r in records) / len(records)
    config_snapshot = {
        "flags": {
            "error_correction": flags.error_correction,
            "self_refinement": flags.self_refinement,
            "refinement_iterations": flags.refinement_iterations,
            "correction_iterations": flags.correction_iterations,
        },
        "provider": config.kind,
        "examples": len(examples),
        "items": len(items),
    }
    return EvalReport(records, accuracy, config_snapshot, seed)


ABLATION_ROWS = (
    ("w/o error correction & self refinement", AblationFlags(False, False)),
    ("w/o error correction", AblationFlags(False, True)),
    ("w/o self refinement", AblationFlags(True, False)),
    ("with self refinement & error correction", AblationFlags(True, True)),
)


def ablation_matrix(
    items: list[EvalItem],
    examples: ExampleSet,
    bindings: Bindings,
    registry: Registry,
    config: ProviderConfig,
    world: WorldStore,
    seed: int = 0,
) -> list[tuple[str, float]]:
    """Accuracy for the four on/off combinations of the two mechanisms."""
    return [
        (label, run_eval(items, examples, flags, bindings, registry, config, world, seed).accuracy)
        for label, flags in ABLATION_ROWS
    ]


def refinement_sweep(
    items: list[EvalItem],
    examples: ExampleSet,
    bindings: Bindings,
    registry: Registry,
    config: ProviderConfig,
    world: WorldStore,
    max_iter: int,
    seed: int = 0,
) -> list[tuple[int, float]]:
    """Accuracy per refinement iteration count, evaluating set(0..max_iter)."""
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    refinement = RefinementConfig(provider=config, iterations=max_iter)
    sets = [examples] + refine_set(examples, refinement, registry)
    flags = AblationFlags(error_correction=False, self_refinement=False)
    table = []
    for iteration, example_set in enumerate(sets):
        report = run_eval(items, example_set, flags, bindings, registry, config, world, seed)
        table.append((iteration, report.accuracy))
    return table


def accuracy_table_to_csv(table: list[tuple[int, float]]) -> str:
    lines = ["iteration,accuracy"]
    lines.extend(f"{k},{acc:.4f}" for k, acc in table)
    return "\n".join(lines) + "\n"


def load_items(path: str | Path) -> list[EvalItem]:
    """Read a JSON Lines items file {"id","descriptor","question","options","answer"}."""
    items = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            options = obj.get("options")
            items.append(
                EvalItem(
                    id=str(obj["id"]),
                    descriptor=obj["descriptor"],
                    question=obj["question"],
                    answer=obj["answer"],
                    options=tuple(options) if options else None,
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{line_no}: bad item record: {exc}") from exc
    return items
