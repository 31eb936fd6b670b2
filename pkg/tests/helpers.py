"""Shared generators for unit and acceptance tests."""

import itertools
import random

from vurf.dsl import BoolLit, NumLit, Program, Statement, StrLit, VarRef
from vurf.registry import FunctionSignature, Param, Registry, SemType

TOY_REGISTRY = Registry(
    [
        FunctionSignature("F", (Param("video", SemType.VIDEO),), SemType.VIDEO, "f"),
        FunctionSignature(
            "G",
            (Param("video", SemType.VIDEO), Param("query", SemType.TEXT)),
            SemType.INTERVAL,
            "g",
        ),
        FunctionSignature("H", (Param("interval", SemType.INTERVAL),), SemType.TEXT, "h"),
    ]
)


def enumerate_statements(out_var, fn_names, arg_names, values):
    """Every statement with 0..2 uniquely named args over the given pools."""
    for fn in fn_names:
        yield Statement(out_var, fn, ())
        for name, value in itertools.product(arg_names, values):
            yield Statement(out_var, fn, ((name, value),))
        for (n1, n2), (v1, v2) in itertools.product(
            itertools.permutations(arg_names, 2), itertools.product(values, repeat=2)
        ):
            yield Statement(out_var, fn, ((n1, v1), (n2, v2)))


def enumerate_toy_programs():
    """Exhaustive 1- and 2-statement programs over the toy registry pools."""
    fn_names = ["F", "G", "H", "NOPE"]
    arg_names = ["video", "query", "interval"]
    first_values = [VarRef("VIDEO"), StrLit("q")]
    second_values = [VarRef("VIDEO"), VarRef("OUT0"), StrLit("q")]
    firsts = list(enumerate_statements("OUT0", fn_names, arg_names, first_values))
    for stmt in firsts:
        yield Program((stmt,))
    for stmt1 in firsts:
        for stmt2 in enumerate_statements("OUT1", fn_names, arg_names, second_values):
            yield Program((stmt1, stmt2))


_STRING_POOL = [
    "man enters room",
    "run, then jump",
    "it's quoted",
    'double "quotes"',
    "back\\slash",
    "line\nbreak",
    "",
    "Ünïcodé 텍스트 ✓",
    "  leading and trailing  ",
]


def random_identifier(rng: random.Random) -> str:
    first = rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZ_abcdefghijklmnopqrstuvwxyz")
    rest = "".join(
        rng.choice("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_")
        for _ in range(rng.randrange(8))
    )
    return first + rest


def random_program(rng: random.Random) -> Program:
    """Grammar-directed fuzzing: any printable program the DSL can express."""
    n = rng.randint(1, 6)
    statements = []
    available = ["VIDEO", "VIDEO0", "VIDEO1"]
    for i in range(n):
        out = f"OUT{i}"
        fn = random_identifier(rng)
        args = []
        names = set()
        for _ in range(rng.randrange(4)):
            name = random_identifier(rng)
            if name in names:
                continue
            names.add(name)
            kind = rng.randrange(4)
            if kind == 0:
                args.append((name, VarRef(rng.choice(available))))
            elif kind == 1:
                text = rng.choice(_STRING_POOL) + (
                    "".join(chr(rng.randrange(32, 0x2FFF)) for _ in range(rng.randrange(4)))
                    if rng.random() < 0.3
                    else ""
                )
                args.append((name, StrLit(text.replace("\r", ""))))
            elif kind == 2:
                if rng.random() < 0.5:
                    args.append((name, NumLit(rng.randint(-(2**53) + 1, 2**53 - 1))))
                else:
                    args.append((name, NumLit(rng.randint(-10**6, 10**6) / 97.0)))
            else:
                args.append((name, BoolLit(rng.random() < 0.5)))
        statements.append(Statement(out, fn, tuple(args)))
        available.append(out)
    return Program(tuple(statements))
