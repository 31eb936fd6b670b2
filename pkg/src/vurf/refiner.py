"""Offline refinement of the in-context example set.

For each example instruction, two candidate programs are produced: one
generated with the rest of the set as context and one generated
example-free with only structural hints.  The provider then merges the
two into a refined program.  A refinement is accepted only if the merged
program parses, validates, and preserves the example's free inputs;
otherwise the example keeps its previous program, so a valid set can
never degrade.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from . import dsl
from .gateway import PromptSpec, ProviderConfig, complete, scrape_program
from .gateway import GatewayError
from .generator import GenerationError, generate, generate_context_free
from .icl import ExampleSet, InContextExample, refined_provenance
from .registry import Registry, usage_block
from .validator import inferred_inputs, is_valid

MAX_REFINEMENT_ITERATIONS = 10


@dataclass(frozen=True)
class RefinementConfig:
    provider: ProviderConfig
    iterations: int = 1
    acceptance_policy: str = "validate_or_keep"
    workers: int = 1

    def __post_init__(self) -> None:
        if not 1 <= self.iterations <= MAX_REFINEMENT_ITERATIONS:
            raise ValueError(f"iterations must be in 1..{MAX_REFINEMENT_ITERATIONS}")
        if self.acceptance_policy != "validate_or_keep":
            raise ValueError(f"unknown acceptance policy {self.acceptance_policy!r}")


@dataclass(frozen=True)
class RefinementRecord:
    instruction: str
    contextual_program: dsl.Program | None
    context_free_program: dsl.Program | None
    refined_program: dsl.Program
    iteration: int
    accepted: bool
    error: GenerationError | None = None


def merge_prompt_context(
    contextual: dsl.Program, context_free: dsl.Program, registry: Registry
) -> str:
    return (
        "Program A (structure to preserve):\n"
        + dsl.print_program(contextual)
        + "\n\nProgram B (reasoning to incorporate):\n"
        + dsl.print_program(context_free)
        + "\n\nAvailable functions:\n"
        + usage_block(registry)
        + "\n\nWrite a single improved program in the same language, "
        "keeping the structure of Program A and using only the available functions."
    )


def refine_example(
    example: InContextExample,
    examples: ExampleSet,
    registry: Registry,
    config: RefinementConfig,
    iteration: int = 1,
) -> RefinementRecord:
    """Produce one refined program for one example."""
    if example.id not in examples.ids():
        raise ValueError(f"example {example.id!r} is not in the given set")
    old_program = example.program()

    try:
        contextual = generate(
            example.instruction, examples.without(example.id), registry, config.provider
        )
    except GenerationError as exc:
        return RefinementRecord(
            example.instruction, None, None, old_program, iteration, accepted=False, error=exc
        )

    try:
        context_free = generate_context_free(example.instruction, registry, config.provider)
    except GenerationError as exc:
        return RefinementRecord(
            example.instruction, contextual, None, old_program, iteration, accepted=False, error=exc
        )

    spec = PromptSpec(
        instruction=example.instruction,
        in_context=(),
        extra_context=merge_prompt_context(contextual, context_free, registry),
    )
    refined: dsl.Program | None = None
    try:
        completion = complete(spec, config.provider)
        merged_text = scrape_program(completion.raw_text)
        parsed = dsl.parse(merged_text)
        if isinstance(parsed, dsl.Program):
            refined = parsed
    except GatewayError:
        refined = None

    accepted = (
        refined is not None
        and is_valid(refined, registry, inferred_inputs(refined))
        and dsl.free_inputs(refined) == dsl.free_inputs(old_program)
        and dsl.free_inputs(refined) == dsl.free_inputs(contextual)
    )
    return RefinementRecord(
        instruction=example.instruction,
        contextual_program=contextual,
        context_free_program=context_free,
        refined_program=refined if accepted else contextual,
        iteration=iteration,
        accepted=accepted,
    )


def refine_set(
    examples: ExampleSet,
    config: RefinementConfig,
    registry: Registry,
) -> list[ExampleSet]:
    """Refine the whole set for config.iterations rounds; return every intermediate set.

    Ids, ordering, and set size are preserved; examples whose refinement
    was not accepted keep their previous program.
    """
    if not len(examples):
        raise ValueError("example set must be non-empty")

    sets: list[ExampleSet] = []
    current = examples
    for t in range(1, config.iterations + 1):

        def refine_one(ex: InContextExample) -> InContextExample:
            record = refine_example(ex, current, registry, config, iteration=t)
            if record.accepted:
                return replace(
                    ex,
                    program_text=dsl.print_program(record.refined_program),
                    provenance=refined_provenance(t),
                )
            return ex

        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                refined = tuple(pool.map(refine_one, list(current)))
        else:
            refined = tuple(refine_one(ex) for ex in current)
        current = replace(current, examples=refined)
        sets.append(current)
    return sets
