"""Program generation from natural-language instructions via few-shot prompting."""

from __future__ import annotations

from . import dsl
from .gateway import (
    Completion,
    GatewayError,
    PromptSpec,
    ProviderConfig,
    complete,
    scrape_program,
)
from .icl import ExampleSet
from .registry import Registry, usage_block


class GenerationError(Exception):
    """Wraps a transport, scrape, or parse failure during generation."""

    def __init__(self, message: str, cause: Exception | list[dsl.ParseError] | None = None):
        super().__init__(message)
        self.cause = cause


def structural_hint(registry: Registry) -> str:
    """Context block substituting for examples in the example-free prompt."""
    return (
        "Structural requirements:\n"
        "Write one statement per line, each of the form OUTPUT=FUNCTION(name=value,...).\n"
        "String arguments use single quotes. Later statements may reference earlier outputs.\n"
        "The input video is bound to VIDEO (VIDEO0, VIDEO1, ... when there are several).\n"
        "Available functions:\n" + usage_block(registry)
    )


def _complete_and_parse(spec: PromptSpec, config: ProviderConfig) -> tuple[dsl.Program, Completion]:
    try:
        completion = complete(spec, config)
    except GatewayError as exc:
        raise GenerationError(f"provider call failed: {exc}", cause=exc) from exc
    try:
        program_text = scrape_program(completion.raw_text)
    except GatewayError as exc:
        raise GenerationError(f"completion is not scrapable: {exc}", cause=exc) from exc
    parsed = dsl.parse(program_text)
    if isinstance(parsed, list):
        raise GenerationError(
            "scraped program does not parse: " + "; ".join(str(e) for e in parsed),
            cause=parsed,
        )
    return parsed, completion


def generate(
    instruction: str,
    examples: ExampleSet,
    registry: Registry,
    config: ProviderConfig,
) -> dsl.Program:
    """Few-shot generation.  Returns the parsed program without validating it."""
    spec = PromptSpec(instruction=instruction, in_context=tuple(examples))
    program, _ = _complete_and_parse(spec, config)
    return program


def generate_context_free(
    instruction: str,
    registry: Registry,
    config: ProviderConfig,
) -> dsl.Program:
    """Example-free generation with a structural hint standing in for demonstrations."""
    spec = PromptSpec(
        instruction=instruction,
        in_context=(),
        extra_context=structural_hint(registry),
    )
    program, _ = _complete_and_parse(spec, config)
    return program
