"""Validate-and-regenerate loop that repairs constraint-violating programs.

Each iteration validates deterministically, renders the violations plus
the function catalog into a feedback block, and asks the provider to
rewrite the program with that feedback as context.  The loop stops as
soon as validation is clean or the iteration budget runs out.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import dsl
from .gateway import PromptSpec, ProviderConfig
from .generator import GenerationError, _complete_and_parse, generate
from .icl import ExampleSet
from .registry import Registry, SemType
from .validator import Feedback, validate


@dataclass(frozen=True)
class CorrectionReport:
    initial_program: dsl.Program
    final_program: dsl.Program
    iterations_used: int
    per_iteration: tuple[tuple[Feedback, dsl.Program], ...]
    final_valid: bool
    error: GenerationError | None = None


def _regeneration_context(feedback: Feedback, program: dsl.Program) -> str:
    return (
        feedback.rendered
        + "\n\nPrevious program:\n"
        + dsl.print_program(program)
        + "\n\nRewrite the program so that it satisfies the constraints."
    )


def _judge_says_clean(
    program: dsl.Program, instruction: str, registry: Registry, config: ProviderConfig
) -> bool:
    """Ask the provider whether the program violates the constraints.

    Used only with llm_judge=True; a deterministic validator is strictly
    more reliable for statically decidable violations, so this path is
    off by default.
    """
    from .gateway import complete
    from .registry import usage_block

    spec = PromptSpec(
        instruction=instruction,
        in_context=(),
        extra_context=(
            "Program:\n"
            + dsl.print_program(program)
            + "\n\nAvailable functions:\n"
            + usage_block(registry)
            + "\n\nDoes the program violate these constraints? Answer yes or no."
        ),
    )
    try:
        answer = complete(spec, config).raw_text.strip().lower()
    except Exception:
        return False  # an unavailable judge never blocks the deterministic path
    return answer.startswith("no")


def correct(
    program: dsl.Program,
    instruction: str,
    registry: Registry,
    inputs: dict[str, SemType],
    config: ProviderConfig,
    max_iters: int = 3,
    llm_judge: bool = False,
) -> CorrectionReport:
    """Run up to max_iters feedback/regeneration rounds; record every step.

    With llm_judge=True the provider is first asked whether the program
    violates the constraints and a "no" stops the loop; final_valid is
    still computed deterministically, so a mistaken judge shows up as an
    invalid final program rather than a silent pass.
    """
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")

    initial = program
    current = program
    steps: list[tuple[Feedback, dsl.Program]] = []
    error: GenerationError | None = None

    for _ in range(max_iters):
        if llm_judge and _judge_says_clean(current, instruction, registry, config):
            break
        feedback = validate(current, registry, inputs)
        if feedback.empty:
            break
        spec = PromptSpec(
            instruction=instruction,
            in_context=(),
            extra_context=_regeneration_context(feedback, current),
        )
        try:
            current, _ = _complete_and_parse(spec, config)
        except GenerationError as exc:
            error = exc
            break
        steps.append((feedback, current))

    final_valid = error is None and validate(current, registry, inputs).empty
    return CorrectionReport(
        initial_program=initial,
        final_program=current,
        iterations_used=len(steps),
        per_iteration=tuple(steps),
        final_valid=final_valid,
        error=error,
    )


def generate_and_correct(
    instruction: str,
    examples: ExampleSet,
    registry: Registry,
    inputs: dict[str, SemType],
    config: ProviderConfig,
    max_iters: int,
) -> CorrectionReport | GenerationError:
    try:
        program = generate(instruction, examples, registry, config)
    except GenerationError as exc:
        return exc
    return correct(program, instruction, registry, inputs, config, max_iters)


def error_sweep(
    instructions: list[str],
    examples: ExampleSet,
    registry: Registry,
    config: ProviderConfig,
    iters_range: list[int],
    inputs: dict[str, SemType] | None = None,
    workers: int = 1,
) -> list[tuple[int, int]]:
    """Invalid-program counts after generate+correct, per correction budget.

    Failed generations count as invalid.  Aggregation is commutative
    counting, so worker parallelism never changes the result.
    """
    if not instructions:
        raise ValueError("instructions must be non-empty")
    bound_inputs = {"VIDEO": SemType.VIDEO} if inputs is None else inputs

    def run_one(instruction: str, k: int) -> bool:
        outcome = generate_and_correct(instruction, examples, registry, bound_inputs, config, k)
        return isinstance(outcome, GenerationError) or not outcome.final_valid

    table = []
    for k in iters_range:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                flags = list(pool.map(lambda ins: run_one(ins, k), instructions))
        else:
            flags = [run_one(ins, k) for ins in instructions]
        table.append((k, sum(flags)))
    return table


def sweep_to_csv(table: list[tuple[int, int]]) -> str:
    lines = ["iterations,invalid_count"]
    lines.extend(f"{k},{count}" for k, count in table)
    return "\n".join(lines) + "\n"
