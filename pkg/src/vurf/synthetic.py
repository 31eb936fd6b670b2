"""Deterministic synthetic scenarios for benchmarks, demos, and tests.

Everything here is constructed: worlds with known ground truth, scripted
providers with controlled fault models, and instruction suites sized for
desk-scale runs.  The builders are used by the benchmark CLI commands and
by the acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gateway import (
    Script,
    ScriptRule,
    match_any,
    match_substring,
    respond_fix_one_flagged,
    respond_fixed,
    respond_inject_invalid,
)
from .icl import ExampleSet, InContextExample
from .world import Event, QaFact, VideoDescriptor, WorldStore

# ---------------------------------------------------------------------------
# Golden single-query scenario: ground, trim, then ask.

GOLDEN_INSTRUCTION = "What does the man do after entering the room?"

GOLDEN_PROGRAM = (
    "A0=GROUNDING(video=VIDEO,query='man enters room')\n"
    "A1=TRIMAFTER(video=VIDEO,interval=A0)\n"
    "FINAL=VQA(video=A1,question='what does the man do')"
)

GOLDEN_ANSWER = "pick up towel"


def golden_descriptor() -> VideoDescriptor:
    return VideoDescriptor(
        id="golden-room",
        duration_s=10.0,
        events=(
            Event("enter room", 2.0, 3.5, actor="man"),
            Event("pick up towel", 4.0, 6.0, actor="man"),
        ),
    )


def golden_examples() -> ExampleSet:
    return ExampleSet(
        (
            InContextExample(
                id="ex-after-door",
                instruction="What does the woman do after opening the door?",
                program_text=(
                    "A0=GROUNDING(video=VIDEO,query='open door')\n"
                    "A1=TRIMAFTER(video=VIDEO,interval=A0)\n"
                    "FINAL=VQA(video=A1,question='what does the woman do')"
                ),
            ),
            InContextExample(
                id="ex-merge",
                instruction="Merge the two videos into one.",
                program_text="OUT0=MERGE(video0=VIDEO0,video1=VIDEO1)",
            ),
        )
    )


def golden_script() -> Script:
    return Script(
        [
            ScriptRule(
                match_substring("The program violates these constraints:"),
                respond_fix_one_flagged(),
                name="fix-one",
            ),
            ScriptRule(
                match_substring("after entering the room"),
                respond_fixed(GOLDEN_PROGRAM),
                name="golden",
            ),
            ScriptRule(
                match_substring("Merge the two videos"),
                respond_fixed("OUT0=MERGE(video0=VIDEO0,video1=VIDEO1)"),
                name="merge",
            ),
        ]
    )


# ---------------------------------------------------------------------------
# Error-correction benchmark: seeded fault injection, one fix per iteration.

INJECTION_BASE_PROGRAM = (
    "A0=GROUNDING(video=VIDEO,query='marker moment')\n"
    "A1=TRIMAFTER(video=VIDEO,interval=A0)\n"
    "FINAL=VQA(video=A1,question='what happens next')"
)


def injection_setup(n: int, seed: int, rate: float) -> tuple[list[str], Script]:
    """Instruction suite plus a provider that corrupts function names.

    Corruption is keyed to (seed, instruction): a corrupted instruction
    always yields the same 1..3 misspelled function names, and the
    correction rule repairs exactly one per iteration.
    """
    instructions = [f"what happens in clip {i:03d} after the marker?" for i in range(n)]
    script = Script(
        [
            ScriptRule(
                match_substring("The program violates these constraints:"),
                respond_fix_one_flagged(),
                name="fix-one",
            ),
            ScriptRule(
                match_any(),
                respond_inject_invalid(rate=rate, seed=seed, base=INJECTION_BASE_PROGRAM),
                name="inject",
            ),
        ]
    )
    return instructions, script


# ---------------------------------------------------------------------------
# Planted-flaw refinement scenario and the two-mechanism fault model.

FLAW_MARKER = "answer without grounding"

FLAWED_PROGRAM = f"FINAL=VQA(video=VIDEO,question='{FLAW_MARKER}')"

DECOMPOSITION_QUESTION = "what does the speaker do after the intro speech?"
FACT_QUESTION = "what color is the shirt?"
INJECTED_QUESTION = "after the intro speech ends, what does the speaker do in the flagged clip?"

CORRECT_DECOMPOSITION_PROGRAM = (
    "A0=GROUNDING(video=VIDEO,query='intro speech')\n"
    "A1=TRIMAFTER(video=VIDEO,interval=A0)\n"
    "FINAL=VQA(video=A1,question='what does the speaker do')"
)

FLAWED_DECOMPOSITION_PROGRAM = "FINAL=VQA(video=VIDEO,question='what does the speaker do')"

FACT_PROGRAM = "FINAL=VQA(video=VIDEO,question='what color is the shirt')"

CORRUPTED_DECOMPOSITION_PROGRAM = CORRECT_DECOMPOSITION_PROGRAM.replace(
    "=TRIMAFTER(", "=TRIMAFTERQ(", 1
)


def _eval_descriptor(descriptor_id: str) -> VideoDescriptor:
    # The long early event dominates whole-video QA, so a program that
    # skips grounding answers "intro speech" instead of "final answer".
    return VideoDescriptor(
        id=descriptor_id,
        duration_s=10.0,
        events=(
            Event("intro speech", 1.0, 5.0, actor="speaker"),
            Event("final answer", 6.0, 8.0, actor="speaker"),
        ),
        qa_facts=(QaFact("color shirt", "red"),),
    )


def _match_suffix(text: str):
    return lambda prompt: prompt.endswith(text)


def _instruction_suffix(instruction: str) -> str:
    return f"Instruction: {instruction}\nProgram:"


def respond_marker_sensitive(flawed: str, correct: str):
    """Respond with the flawed program while any flawed example is in context."""
    return lambda prompt, state: flawed if FLAW_MARKER in prompt else correct


def respond_merge_echo_a():
    """Identity merge: return Program A from the merge prompt verbatim."""

    def responder(prompt: str, state: dict) -> str:
        header = "Program A (structure to preserve):\n"
        start = prompt.index(header) + len(header)
        end = prompt.index("\n\nProgram B", start)
        return prompt[start:end]

    return responder


def _example_instruction(index: int) -> str:
    return f"summarize what follows the opening of example clip {index:02d}"


def planted_flaw_examples(n_examples: int = 20, n_flawed: int = 5) -> ExampleSet:
    """Example set where the first n_flawed programs skip grounding entirely."""
    examples = []
    for i in range(n_examples):
        examples.append(
            InContextExample(
                id=f"icl{i:02d}",
                instruction=_example_instruction(i),
                program_text=FLAWED_PROGRAM if i < n_flawed else CORRECT_DECOMPOSITION_PROGRAM,
            )
        )
    return ExampleSet(tuple(examples))


def _refinement_rules(examples: ExampleSet, identity_merge: bool) -> list[ScriptRule]:
    """Merge and context-free rules for every example instruction."""
    rules: list[ScriptRule] = []
    for index, example in enumerate(examples):
        suffix = _instruction_suffix(example.instruction)
        merge_responder = (
            respond_merge_echo_a()
            if identity_merge
            else respond_fixed(CORRECT_DECOMPOSITION_PROGRAM)
        )
        rules.append(
            ScriptRule(
                lambda p, _s=suffix: "Program A (structure to preserve):" in p and p.endswith(_s),
                merge_responder,
                name=f"merge-{index}",
            )
        )
        rules.append(
            ScriptRule(
                lambda p, _s=suffix: "Structural requirements:" in p and p.endswith(_s),
                respond_fixed(CORRECT_DECOMPOSITION_PROGRAM),
                name=f"context-free-{index}",
            )
        )
    return rules


def _contextual_rules(examples: ExampleSet) -> list[ScriptRule]:
    """Fallback rules: generating for an example instruction echoes its program."""
    return [
        ScriptRule(
            _match_suffix(_instruction_suffix(example.instruction)),
            respond_fixed(example.program_text),
            name=f"contextual-{index}",
        )
        for index, example in enumerate(examples)
    ]


@dataclass(frozen=True)
class SyntheticEval:
    examples: ExampleSet
    items: list
    world: WorldStore
    script: Script


def planted_flaw_setup(
    n_examples: int = 20,
    n_flawed: int = 5,
    n_items: int = 50,
    identity_merge: bool = False,
) -> SyntheticEval:
    """Refinement sweep scenario: flawed examples mislead a fraction of items.

    While any flawed example remains in the prompt, generations for
    decomposition-style questions skip grounding and answer wrongly; the
    remaining items hit a QA fact and are immune.  The context-free path
    produces the correct decomposition, so one refinement round repairs
    the whole set.
    """
    from .evalharness import EvalItem

    examples = planted_flaw_examples(n_examples, n_flawed)

    world = WorldStore()
    items = []
    n_decomposition = 2 * n_items // 5
    for i in range(n_items):
        descriptor = _eval_descriptor(f"clip{i:02d}")
        world.add(descriptor)
        if i < n_decomposition:
            question, answer = DECOMPOSITION_QUESTION, "final answer"
        else:
            question, answer = FACT_QUESTION, "red"
        items.append(
            EvalItem(id=f"item{i:02d}", descriptor=descriptor.id, question=question, answer=answer)
        )

    rules = _refinement_rules(examples, identity_merge)
    rules.append(
        ScriptRule(
            match_substring("The program violates these constraints:"),
            respond_fix_one_flagged(),
            name="fix-one",
        )
    )
    rules.append(
        ScriptRule(
            _match_suffix(_instruction_suffix(DECOMPOSITION_QUESTION)),
            respond_marker_sensitive(FLAWED_DECOMPOSITION_PROGRAM, CORRECT_DECOMPOSITION_PROGRAM),
            name="eval-decomposition",
        )
    )
    rules.append(
        ScriptRule(
            _match_suffix(_instruction_suffix(FACT_QUESTION)),
            respond_fixed(FACT_PROGRAM),
            name="eval-fact",
        )
    )
    rules.extend(_contextual_rules(examples))

    return SyntheticEval(examples, items, world, Script(rules))


def fault_model_setup(
    n_inject: int = 15,
    n_flaw: int = 15,
    n_plain: int = 20,
) -> SyntheticEval:
    """Two independent fault classes, one per repair mechanism.

    Injected items generate a corrupted (invalid) program that only error
    correction repairs.  Flaw-sensitive items generate a valid but wrong
    decomposition while flawed examples remain in context; only set
    refinement repairs those.  Plain items always succeed.
    """
    from .evalharness import EvalItem

    examples = planted_flaw_examples()

    world = WorldStore()
    items = []
    for i in range(n_inject + n_flaw + n_plain):
        descriptor = _eval_descriptor(f"fault{i:02d}")
        world.add(descriptor)
        if i < n_inject:
            question, answer = INJECTED_QUESTION, "final answer"
        elif i < n_inject + n_flaw:
            question, answer = DECOMPOSITION_QUESTION, "final answer"
        else:
            question, answer = FACT_QUESTION, "red"
        items.append(
            EvalItem(id=f"fault{i:02d}", descriptor=descriptor.id, question=question, answer=answer)
        )

    rules = _refinement_rules(examples, identity_merge=False)
    rules.append(
        ScriptRule(
            match_substring("The program violates these constraints:"),
            respond_fix_one_flagged(),
            name="fix-one",
        )
    )
    rules.append(
        ScriptRule(
            _match_suffix(_instruction_suffix(INJECTED_QUESTION)),
            respond_fixed(CORRUPTED_DECOMPOSITION_PROGRAM),
            name="eval-injected",
        )
    )
    rules.append(
        ScriptRule(
            _match_suffix(_instruction_suffix(DECOMPOSITION_QUESTION)),
            respond_marker_sensitive(FLAWED_DECOMPOSITION_PROGRAM, CORRECT_DECOMPOSITION_PROGRAM),
            name="eval-flaw",
        )
    )
    rules.append(
        ScriptRule(
            _match_suffix(_instruction_suffix(FACT_QUESTION)),
            respond_fixed(FACT_PROGRAM),
            name="eval-fact",
        )
    )
    rules.extend(_contextual_rules(examples))

    return SyntheticEval(examples, items, world, Script(rules))
