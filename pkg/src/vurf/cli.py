"""Command-line surface: run, validate, refine, eval, bench-errors.

Exit codes: 0 success, 1 I/O or usage error, 2 validation violations,
3 execution error, 4 generation or correction failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dsl
from .corrector import correct, error_sweep, sweep_to_csv
from .evalharness import AblationFlags, load_items, run_eval
from .gateway import ProviderConfig, remote_config_from_env
from .generator import GenerationError, generate
from .icl import load_examples, save_examples
from .interpreter import ExecError, default_bindings, execute
from .refiner import RefinementConfig, refine_set
from .registry import Registry, builtin_catalog, load_extension, merge
from .synthetic import injection_setup
from .validator import inferred_inputs, validate
from .values import render_value, sem_type_of
from .world import WorldStore, load_descriptor

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATIONS = 2
EXIT_EXEC = 3
EXIT_GENERATION = 4


def _add_provider_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--script", help="scripted provider rule file (JSON)")
    parser.add_argument("--llm-cache", help="completion cache directory")
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--max-retries", type=int, default=2)
    parser.add_argument("--timeout", type=float, default=30.0, help="provider timeout in seconds")


def _add_registry_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--registry-ext",
        action="append",
        default=[],
        help="registry extension JSON file (repeatable)",
    )


def _provider_config(args: argparse.Namespace) -> ProviderConfig:
    common = {
        "temperature": args.temperature,
        "max_retries": args.max_retries,
        "timeout_s": args.timeout,
        "cache_dir": args.llm_cache,
    }
    if args.script:
        return ProviderConfig(kind="scripted", script_path=args.script, **common)
    return remote_config_from_env(**common)


def _registry(args: argparse.Namespace) -> Registry:
    registry = builtin_catalog()
    for path in args.registry_ext:
        registry = merge(registry, load_extension(path))
    return registry


def _parse_iters_range(text: str) -> list[int]:
    if ".." in text:
        low, high = text.split("..", 1)
        return list(range(int(low), int(high) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def cmd_run(args: argparse.Namespace) -> int:
    descriptor = load_descriptor(args.descriptor)
    examples = load_examples(args.examples)
    registry = _registry(args)
    config = _provider_config(args)

    try:
        program = generate(args.query, examples, registry, config)
    except GenerationError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION

    store = WorldStore([descriptor])
    inputs = {name: descriptor.video() for name in dsl.free_inputs(program)}
    input_types = {name: sem_type_of(value) for name, value in inputs.items()}

    report = correct(
        program, args.query, registry, input_types, config,
        args.max_correct_iters, llm_judge=args.llm_judge,
    )
    final = report.final_program
    if not report.final_valid:
        feedback = validate(final, registry, input_types)
        print("could not produce a valid program; final feedback:", file=sys.stderr)
        print(feedback.rendered, file=sys.stderr)
        return EXIT_GENERATION

    inputs = {name: descriptor.video() for name in dsl.free_inputs(final)}
    try:
        result, trace = execute(final, inputs, default_bindings(store), registry)
    except ExecError as exc:
        print(f"execution failed: {exc}", file=sys.stderr)
        return EXIT_EXEC

    if args.trace:
        trace.save(args.trace)
    answer = result if isinstance(result, str) else render_value(result)
    if args.json:
        print(json.dumps({"answer": answer, "program": dsl.print_program(final)}, sort_keys=True))
    else:
        print(answer)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    source = Path(args.file).read_text(encoding="utf-8")
    registry = _registry(args)
    parsed = dsl.parse(source)
    if isinstance(parsed, list):
        for error in parsed:
            print(str(error), file=sys.stderr)
        return EXIT_USAGE
    feedback = validate(parsed, registry, inferred_inputs(parsed))
    if feedback.empty:
        return EXIT_OK
    for violation in feedback.violations:
        if args.json:
            print(
                json.dumps(
                    {
                        "line": violation.line_no,
                        "kind": violation.kind.value,
                        "detail": violation.detail,
                        "suggestion": violation.suggestion,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(violation.render())
    return EXIT_VIOLATIONS


def cmd_refine(args: argparse.Namespace) -> int:
    examples = load_examples(args.examples)
    registry = _registry(args)
    config = RefinementConfig(provider=_provider_config(args), iterations=args.iters)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sets = refine_set(examples, config, registry)
    for iteration, example_set in enumerate(sets, start=1):
        save_examples(example_set, out_dir / f"set_{iteration}.jsonl")
    print(f"wrote {len(sets)} refined sets to {out_dir}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    items = load_items(args.items)
    examples = load_examples(args.examples)
    registry = _registry(args)
    config = _provider_config(args)
    flag_names = {part.strip() for part in args.flags.split(",") if part.strip()}
    unknown = flag_names - {"ec", "sr"}
    if unknown:
        print(f"unknown flags: {sorted(unknown)} (expected ec and/or sr)", file=sys.stderr)
        return EXIT_USAGE
    flags = AblationFlags(
        error_correction="ec" in flag_names,
        self_refinement="sr" in flag_names,
        refinement_iterations=args.refine_iters,
        correction_iterations=args.correct_iters,
    )
    world = WorldStore()
    report = run_eval(
        items, examples, flags, default_bindings(world), registry, config, world,
        seed=args.seed, workers=args.workers,
    )
    if args.report:
        Path(args.report).write_text(report.to_json_text(), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    if args.json:
        print(report.to_json_text(), end="")
    else:
        print(f"accuracy={report.accuracy:.4f} over {len(report.records)} items")
    return EXIT_OK


def cmd_bench_errors(args: argparse.Namespace) -> int:
    instructions, script = injection_setup(args.n, args.seed, args.inject)
    config = ProviderConfig(kind="scripted", script=script)
    registry = _registry(args)
    from .icl import ExampleSet

    table = error_sweep(
        instructions,
        ExampleSet(()),
        registry,
        config,
        _parse_iters_range(args.iters),
        workers=args.workers,
    )
    csv_text = sweep_to_csv(table)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    if args.json:
        for k, count in table:
            print(json.dumps({"iterations": k, "invalid_count": count}))
    else:
        print(csv_text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vurf",
        description="Generate, check, refine, and execute video programs.",
    )
    parser.add_argument("--json", action="store_true", help="machine-parseable output")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="answer one query end to end against a descriptor")
    run.add_argument("--descriptor", required=True, help="world descriptor (.vworld.json)")
    run.add_argument("--query", required=True)
    run.add_argument("--examples", required=True, help="in-context examples (JSONL)")
    run.add_argument("--trace", help="write the execution trace to this JSON file")
    run.add_argument("--max-correct-iters", type=int, default=3)
    run.add_argument(
        "--llm-judge",
        action="store_true",
        help="ask the provider for a yes/no verdict before each correction round",
    )
    run.add_argument("--seed", type=int, default=0)
    _add_provider_args(run)
    _add_registry_args(run)
    run.set_defaults(handler=cmd_run)

    val = sub.add_parser("validate", help="statically check a program file")
    val.add_argument("file", help="program file (.vp)")
    _add_registry_args(val)
    val.set_defaults(handler=cmd_validate)

    ref = sub.add_parser("refine", help="refine an in-context example set")
    ref.add_argument("--examples", required=True)
    ref.add_argument("--iters", type=int, default=1)
    ref.add_argument("--out-dir", required=True)
    ref.add_argument("--seed", type=int, default=0)
    _add_provider_args(ref)
    _add_registry_args(ref)
    ref.set_defaults(handler=cmd_refine)

    ev = sub.add_parser("eval", help="evaluate a pipeline over an item suite")
    ev.add_argument("--items", required=True, help="eval items (JSONL)")
    ev.add_argument("--examples", required=True)
    ev.add_argument("--flags", default="ec,sr", help="comma list of mechanisms: ec, sr")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--refine-iters", type=int, default=1)
    ev.add_argument("--correct-iters", type=int, default=3)
    ev.add_argument("--report", help="write the full report JSON here")
    ev.add_argument("--csv", help="write a per-item CSV summary here")
    ev.add_argument("--workers", type=int, default=1)
    _add_provider_args(ev)
    _add_registry_args(ev)
    ev.set_defaults(handler=cmd_eval)

    bench = sub.add_parser("bench-errors", help="invalid-program counts vs correction budget")
    bench.add_argument("--n", type=int, default=400)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--inject", type=float, default=0.3)
    bench.add_argument("--iters", default="0..3", help="range like 0..3 or list like 0,1,2,3")
    bench.add_argument("--out", help="write the CSV here instead of stdout")
    bench.add_argument("--workers", type=int, default=1)
    _add_registry_args(bench)
    bench.set_defaults(handler=cmd_bench_errors)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
