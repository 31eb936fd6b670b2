"""Acceptance suite: one test per release criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines.  Every tolerance and runtime budget is pinned here.
"""

import json
import random
import subprocess
import sys
import time

import pytest

from helpers import TOY_REGISTRY, enumerate_toy_programs, random_program
from vurf import dsl
from vurf.corrector import error_sweep
from vurf.evalharness import ablation_matrix, refinement_sweep
from vurf.gateway import ProviderConfig
from vurf.generator import generate
from vurf.icl import ExampleSet, check_examples
from vurf.interpreter import default_bindings, execute, pure_bindings
from vurf.refiner import RefinementConfig, refine_set
from vurf.registry import SemType, builtin_catalog
from vurf.synthetic import (
    GOLDEN_ANSWER,
    GOLDEN_INSTRUCTION,
    golden_descriptor,
    golden_examples,
    golden_script,
    injection_setup,
    planted_flaw_examples,
    planted_flaw_setup,
)
from vurf.validator import brute_force_oracle, is_valid
from vurf.values import Interval, VideoRef, total_span_duration
from vurf.world import WorldStore


def _report(criterion: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"{status}  {criterion}{suffix}")
    assert ok, f"{criterion}{suffix}"


def test_parser_round_trip_and_crash_fuzz():
    started = time.monotonic()
    rng = random.Random(0)
    for _ in range(10_000):
        program = random_program(rng)
        reparsed = dsl.parse(dsl.print_program(program))
        assert isinstance(reparsed, dsl.Program), dsl.print_program(program)
        assert reparsed == program

    for _ in range(10_000):
        raw = bytes(rng.randrange(256) for _ in range(rng.randrange(120)))
        result = dsl.parse(raw.decode("utf-8", errors="replace"))
        assert isinstance(result, (dsl.Program, list))
    for _ in range(5_000):
        text = "".join(chr(rng.randrange(1, 0x10000)) for _ in range(rng.randrange(100)))
        result = dsl.parse(text)
        assert isinstance(result, (dsl.Program, list))

    elapsed = time.monotonic() - started
    _report(
        "parser round-trip (10,000 fuzzed programs) and crash fuzz (15,000 inputs)",
        elapsed < 30.0,
        f"{elapsed:.1f}s",
    )


def test_validator_oracle_equivalence():
    started = time.monotonic()
    inputs = {"VIDEO": SemType.VIDEO}
    total = 0
    disagreements = 0
    for program in enumerate_toy_programs():
        total += 1
        if is_valid(program, TOY_REGISTRY, inputs) != brute_force_oracle(
            program, TOY_REGISTRY, inputs
        ):
            disagreements += 1
    elapsed = time.monotonic() - started
    _report(
        "validator agrees with brute-force oracle on exhaustive 1-2 statement programs",
        disagreements == 0 and total > 10_000 and elapsed < 10.0,
        f"{total} programs, {disagreements} disagreements, {elapsed:.1f}s",
    )


def test_golden_scenario_end_to_end():
    started = time.monotonic()
    registry = builtin_catalog()
    descriptor = golden_descriptor()
    store = WorldStore([descriptor])
    config = ProviderConfig(kind="scripted", script=golden_script())

    program = generate(GOLDEN_INSTRUCTION, golden_examples(), registry, config)
    assert [s.function_name for s in program.statements] == ["GROUNDING", "TRIMAFTER", "VQA"]

    result, trace = execute(
        program, {"VIDEO": descriptor.video()}, default_bindings(store), registry
    )
    elapsed = time.monotonic() - started
    ok = (
        result == GOLDEN_ANSWER
        and trace.steps[0].output == Interval(2.0, 3.5)
        and trace.steps[1].output.spans == ((3.5, 10.0),)
        and elapsed < 1.0
    )
    _report(
        "golden scenario: grounding interval (2.0, 3.5), trimmed span (3.5, 10], "
        f"answer {GOLDEN_ANSWER!r}",
        ok,
        f"{elapsed:.2f}s",
    )


def test_error_sweep_shape():
    started = time.monotonic()
    registry = builtin_catalog()

    instructions, script = injection_setup(n=400, seed=42, rate=0.3)
    config = ProviderConfig(kind="scripted", script=script)
    table = error_sweep(instructions, ExampleSet(()), registry, config, [0, 1, 2, 3])
    counts = [count for _, count in table]
    base_ok = counts == sorted(counts, reverse=True) and counts[3] == 0 and counts[0] > 0

    monotone_seeds = 0
    for seed in range(10):
        instructions, script = injection_setup(n=400, seed=seed, rate=0.3)
        config = ProviderConfig(kind="scripted", script=script)
        seed_counts = [
            count
            for _, count in error_sweep(instructions, ExampleSet(()), registry, config, [0, 1, 2, 3])
        ]
        if seed_counts == sorted(seed_counts, reverse=True):
            monotone_seeds += 1

    elapsed = time.monotonic() - started
    _report(
        "error sweep: invalid counts non-increasing, zero at three iterations, "
        "monotone for 10/10 seeds",
        base_ok and monotone_seeds == 10 and elapsed < 60.0,
        f"seed42 counts={counts}, monotone {monotone_seeds}/10, {elapsed:.1f}s",
    )


def test_refinement_sweep_shape():
    started = time.monotonic()
    registry = builtin_catalog()

    setup = planted_flaw_setup()
    config = ProviderConfig(kind="scripted", script=setup.script)
    table = refinement_sweep(
        setup.items, setup.examples, default_bindings(setup.world),
        registry, config, setup.world, max_iter=3,
    )
    accuracies = [accuracy for _, accuracy in table]
    improves = accuracies[1] > accuracies[0]
    plateaus = accuracies[1] == accuracies[2] == accuracies[3]

    control = planted_flaw_setup(identity_merge=True)
    control_config = ProviderConfig(kind="scripted", script=control.script)
    control_table = refinement_sweep(
        control.items, control.examples, default_bindings(control.world),
        registry, control_config, control.world, max_iter=3,
    )
    control_accuracies = [accuracy for _, accuracy in control_table]
    flat = len(set(control_accuracies)) == 1

    elapsed = time.monotonic() - started
    _report(
        "refinement sweep: accuracy strictly improves at iteration 1 then stays "
        "constant; identity-merge control is flat",
        improves and plateaus and flat and elapsed < 60.0,
        f"accuracies={accuracies}, control={control_accuracies}, {elapsed:.1f}s",
    )


def test_ablation_ordering():
    started = time.monotonic()
    registry = builtin_catalog()
    from vurf.synthetic import fault_model_setup

    setup = fault_model_setup()
    config = ProviderConfig(kind="scripted", script=setup.script)
    rows = dict(
        ablation_matrix(
            setup.items, setup.examples, default_bindings(setup.world),
            registry, config, setup.world,
        )
    )
    neither = rows["w/o error correction & self refinement"]
    ec_only = rows["w/o self refinement"]
    sr_only = rows["w/o error correction"]
    both = rows["with self refinement & error correction"]
    ordered = both >= ec_only >= neither and both >= sr_only >= neither
    elapsed = time.monotonic() - started
    _report(
        "ablation ordering: both mechanisms >= each single mechanism >= neither",
        ordered and elapsed < 120.0,
        f"neither={neither}, ec={ec_only}, sr={sr_only}, both={both}, {elapsed:.1f}s",
    )


def _chaos_script(seed: int):
    import hashlib

    from vurf.gateway import Script, ScriptRule, match_any
    from vurf.synthetic import CORRECT_DECOMPOSITION_PROGRAM

    responses = [
        "I refuse to write programs today.",
        "A=NOSUCHFN(video=VIDEO)",
        "A=VQA(video=VIDEO,question='something')",
        CORRECT_DECOMPOSITION_PROGRAM,
        "OUT=MERGE(video0=VIDEO0,video1=VIDEO1)",
        "A=GROUNDING(video=VIDEO)",
        "```\nA=VQA(video=VIDEO,question='fenced')\n```",
        "A=F(x=",
        "FINAL=TRIM(video=VIDEO,start=0,end=1)",
    ]

    def responder(prompt: str, state: dict) -> str:
        digest = hashlib.sha256(f"{seed}|{prompt}".encode()).digest()
        return responses[digest[0] % len(responses)]

    return Script([ScriptRule(match_any(), responder)])


def test_refiner_conservation_over_random_scripts():
    started = time.monotonic()
    registry = builtin_catalog()
    examples = planted_flaw_examples()
    violations = 0
    for seed in range(200):
        config = RefinementConfig(
            provider=ProviderConfig(kind="scripted", script=_chaos_script(seed)),
            iterations=1 + seed % 2,
        )
        for refined in refine_set(examples, config, registry):
            if len(refined) != 20:
                violations += 1
            if refined.ids() != examples.ids():
                violations += 1
            if check_examples(refined, registry):
                violations += 1
    elapsed = time.monotonic() - started
    _report(
        "refiner conservation: 200 random scripts, every set keeps 20 valid "
        "examples with ids preserved",
        violations == 0,
        f"{violations} violations, {elapsed:.1f}s",
    )


def _discretized(spans, duration, step=0.1):
    cells = int(round(duration / step))
    return {k for k in range(cells) if any(s <= (k + 0.5) * step < e for s, e in spans)}


def test_span_algebra_against_discretized_oracle():
    started = time.monotonic()
    rng = random.Random(1234)
    bindings = pure_bindings()
    trim = bindings.for_function("TRIM").call
    trim_after = bindings.for_function("TRIMAFTER").call
    trim_before = bindings.for_function("TRIMBEFORE").call
    failures = 0

    for _ in range(1_000):
        duration = rng.randint(50, 200) / 10.0
        spans = []
        cursor = 0.0
        while cursor < duration and len(spans) < 4:
            start = cursor + rng.randint(0, 30) / 10.0
            end = start + rng.randint(1, 40) / 10.0
            if end > duration:
                break
            spans.append((start, end))
            cursor = end + 0.1
        video = VideoRef("v", duration, tuple(spans))
        a = rng.randint(0, int(duration * 10)) / 10.0
        b = rng.randint(0, int(duration * 10)) / 10.0
        interval = Interval(min(a, b), max(a, b))
        cells = _discretized(video.spans, duration)

        trimmed = trim({"video": video, "start": interval.start_s, "end": interval.end_s})
        after = trim_after({"video": video, "interval": interval})
        before = trim_before({"video": video, "interval": interval})

        # Oracle agreement at 0.1 s resolution.
        mid = lambda k: (k + 0.5) * 0.1  # noqa: E731
        if _discretized(trimmed.spans, duration) != {
            k for k in cells if interval.start_s <= mid(k) < interval.end_s
        }:
            failures += 1
        if _discretized(after.spans, duration) != {k for k in cells if mid(k) > interval.end_s}:
            failures += 1
        if _discretized(before.spans, duration) != {k for k in cells if mid(k) < interval.start_s}:
            failures += 1

        # Laws: containment, idempotence, duration non-increase.
        if not all(
            any(s >= s0 - 1e-9 and e <= e0 + 1e-9 for s0, e0 in video.spans)
            for s, e in trimmed.spans
        ):
            failures += 1
        if trim_after({"video": after, "interval": interval}).spans != after.spans:
            failures += 1
        for result in (trimmed, after, before):
            if total_span_duration(result.spans) > total_span_duration(video.spans) + 1e-9:
                failures += 1

    elapsed = time.monotonic() - started
    _report(
        "span algebra: 1,000 randomized cases match the 0.1 s discretized oracle "
        "and satisfy containment, idempotence, and non-increase",
        failures == 0,
        f"{failures} failures, {elapsed:.1f}s",
    )


def test_cli_eval_determinism(tmp_path):
    started = time.monotonic()
    from vurf.synthetic import GOLDEN_PROGRAM
    from vurf.world import save_descriptor

    descriptor_path = tmp_path / "golden.vworld.json"
    save_descriptor(golden_descriptor(), descriptor_path)
    examples_path = tmp_path / "examples.jsonl"
    examples_path.write_text(
        json.dumps(
            {
                "id": "ex1",
                "instruction": "What does the woman do after opening the door?",
                "program": (
                    "A0=GROUNDING(video=VIDEO,query='open door')\n"
                    "A1=TRIMAFTER(video=VIDEO,interval=A0)\n"
                    "FINAL=VQA(video=A1,question='what does the woman do')"
                ),
            }
        )
        + "\n"
    )
    items_path = tmp_path / "items.jsonl"
    items_path.write_text(
        json.dumps(
            {
                "id": "golden",
                "descriptor": str(descriptor_path),
                "question": GOLDEN_INSTRUCTION,
                "answer": GOLDEN_ANSWER,
            }
        )
        + "\n"
    )
    script_path = tmp_path / "script.json"
    script_path.write_text(
        json.dumps(
            {
                "rules": [
                    {
                        "match": "The program violates these constraints:",
                        "behavior": {"kind": "fix_one_flagged"},
                    },
                    {"match": "after entering the room", "response": GOLDEN_PROGRAM},
                ]
            }
        )
    )

    reports = []
    for name in ("first.json", "second.json"):
        report_path = tmp_path / name
        proc = subprocess.run(
            [
                sys.executable, "-m", "vurf",
                "eval",
                "--items", str(items_path),
                "--examples", str(examples_path),
                "--flags", "ec,sr",
                "--seed", "42",
                "--script", str(script_path),
                "--report", str(report_path),
            ],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        reports.append(report_path.read_bytes())

    identical = reports[0] == reports[1]
    accuracy = json.loads(reports[0])["accuracy"]
    elapsed = time.monotonic() - started
    _report(
        "determinism: vurf eval --seed 42 twice produces byte-identical reports",
        identical and accuracy == 1.0,
        f"accuracy={accuracy}, {elapsed:.1f}s",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
