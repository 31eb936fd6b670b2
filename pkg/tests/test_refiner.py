import hashlib
import random

import pytest

from vurf import dsl
from vurf.gateway import ProviderConfig, Script, ScriptRule, match_any, match_substring, respond_fixed
from vurf.icl import check_examples
from vurf.refiner import (
    MAX_REFINEMENT_ITERATIONS,
    RefinementConfig,
    refine_example,
    refine_set,
)
from vurf.synthetic import (
    CORRECT_DECOMPOSITION_PROGRAM,
    FLAWED_PROGRAM,
    planted_flaw_examples,
    planted_flaw_setup,
    respond_merge_echo_a,
)


def _config(script, iterations=1):
    return RefinementConfig(provider=ProviderConfig(kind="scripted", script=script), iterations=iterations)


def test_identity_merge_is_a_fixed_point(registry):
    setup = planted_flaw_setup(identity_merge=True)
    config = _config(setup.script)
    example = setup.examples.examples[7]  # an unflawed example
    record = refine_example(example, setup.examples, registry, config)
    assert record.accepted is True
    assert record.refined_program == record.contextual_program
    assert dsl.print_program(record.refined_program) == example.program_text


def test_flawed_example_repaired_by_merge(registry):
    setup = planted_flaw_setup()
    config = _config(setup.script)
    example = setup.examples.examples[0]  # flawed
    assert example.program_text == FLAWED_PROGRAM
    record = refine_example(example, setup.examples, registry, config)
    assert record.accepted is True
    assert dsl.print_program(record.refined_program) == CORRECT_DECOMPOSITION_PROGRAM
    assert dsl.free_inputs(record.refined_program) == {"VIDEO"}


def test_invalid_merge_falls_back_to_contextual(registry):
    examples = planted_flaw_examples(n_examples=3, n_flawed=0)
    rules = [
        ScriptRule(
            match_substring("Program A (structure to preserve):"),
            respond_fixed("A=NOSUCHFN(video=VIDEO)"),
        ),
        ScriptRule(match_substring("Structural requirements:"), respond_fixed(CORRECT_DECOMPOSITION_PROGRAM)),
        ScriptRule(match_any(), respond_fixed(CORRECT_DECOMPOSITION_PROGRAM)),
    ]
    config = _config(Script(rules))
    record = refine_example(examples.examples[0], examples, registry, config)
    assert record.accepted is False
    assert record.refined_program == record.contextual_program


def test_generation_error_keeps_old_program(registry):
    examples = planted_flaw_examples(n_examples=2, n_flawed=0)
    config = _config(Script([]))  # every prompt misses
    record = refine_example(examples.examples[0], examples, registry, config)
    assert record.accepted is False
    assert record.error is not None
    assert dsl.print_program(record.refined_program) == examples.examples[0].program_text

    sets = refine_set(examples, config, registry)
    assert [ex.program_text for ex in sets[0]] == [ex.program_text for ex in examples]


def test_refine_example_requires_membership(registry):
    setup = planted_flaw_setup()
    other = planted_flaw_examples(n_examples=1).examples[0]
    from dataclasses import replace

    stranger = replace(other, id="not-in-set")
    with pytest.raises(ValueError):
        refine_example(stranger, setup.examples, registry, _config(setup.script))


def test_refine_set_preserves_ids_order_and_size(registry):
    setup = planted_flaw_setup()
    sets = refine_set(setup.examples, _config(setup.script, iterations=3), registry)
    assert len(sets) == 3
    for refined in sets:
        assert refined.ids() == setup.examples.ids()
        assert len(refined) == 20
        assert check_examples(refined, registry) == []


def test_refine_set_updates_provenance(registry):
    setup = planted_flaw_setup()
    sets = refine_set(setup.examples, _config(setup.script, iterations=2), registry)
    assert all(ex.provenance == "refined(1)" for ex in sets[0])
    assert all(ex.provenance == "refined(2)" for ex in sets[1])


def test_refine_set_fixes_all_flawed_examples_in_one_iteration(registry):
    setup = planted_flaw_setup()
    refined = refine_set(setup.examples, _config(setup.script), registry)[0]
    assert all(ex.program_text == CORRECT_DECOMPOSITION_PROGRAM for ex in refined)


def test_free_inputs_invariant_across_iterations(registry):
    setup = planted_flaw_setup()
    sets = refine_set(setup.examples, _config(setup.script, iterations=2), registry)
    for refined in sets:
        for before, after in zip(setup.examples, refined):
            assert dsl.free_inputs(before.program()) == dsl.free_inputs(after.program())


def test_iteration_bounds():
    provider = ProviderConfig(kind="scripted", script=Script([]))
    with pytest.raises(ValueError):
        RefinementConfig(provider=provider, iterations=0)
    with pytest.raises(ValueError):
        RefinementConfig(provider=provider, iterations=MAX_REFINEMENT_ITERATIONS + 1)


# --- conservation under arbitrary scripts -----------------------------------

_CHAOS_RESPONSES = [
    "I refuse to write programs today.",
    "A=NOSUCHFN(video=VIDEO)",
    "A=VQA(video=VIDEO,question='something')",
    CORRECT_DECOMPOSITION_PROGRAM,
    "OUT=MERGE(video0=VIDEO0,video1=VIDEO1)",  # changes free inputs: must be rejected
    "A=GROUNDING(video=VIDEO)",  # missing required param: invalid
    "```\nA=VQA(video=VIDEO,question='fenced')\n```",
    "A=F(x=",
]


def chaos_script(seed: int) -> Script:
    """Deterministic per-prompt chaos: response depends on (seed, prompt) only."""

    def responder(prompt: str, state: dict) -> str:
        digest = hashlib.sha256(f"{seed}|{prompt}".encode()).digest()
        return _CHAOS_RESPONSES[digest[0] % len(_CHAOS_RESPONSES)]

    return Script([ScriptRule(match_any(), responder)])


@pytest.mark.parametrize("seed", range(20))
def test_conservation_under_chaos_scripts(registry, seed):
    examples = planted_flaw_examples()
    rng = random.Random(seed)
    iterations = rng.choice([1, 2])
    sets = refine_set(examples, _config(chaos_script(seed), iterations=iterations), registry)
    assert len(sets) == iterations
    for refined in sets:
        assert len(refined) == 20
        assert refined.ids() == examples.ids()
        assert check_examples(refined, registry) == []
        for before, after in zip(examples, refined):
            assert dsl.free_inputs(before.program()) == dsl.free_inputs(after.program())


def test_merge_echo_a_extracts_program_block():
    prompt = (
        "Program A (structure to preserve):\nA=VQA(video=VIDEO,question='x')\n\n"
        "Program B (reasoning to incorporate):\nB=VQA(video=VIDEO,question='y')\n\nrest"
    )
    assert respond_merge_echo_a()(prompt, {}) == "A=VQA(video=VIDEO,question='x')"
