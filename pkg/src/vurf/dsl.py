"""Line-oriented dataflow DSL for video programs: AST, parser, printer.

Programs are straight-line sequences of statements of the form

    OUTPUT0=FUNC0(video=VIDEO,query='man enters room')

Each statement assigns the result of one function call to a fresh output
variable.  Later statements may reference earlier outputs by name.  The
reserved input bindings VIDEO, VIDEO0, VIDEO1, ... are the only variables
a program may reference without defining.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
RESERVED_INPUT_RE = re.compile(r"VIDEO[0-9]*\Z")

# Quick per-line shape check used by scrapers; the real parser is below.
STATEMENT_LINE_RE = re.compile(r"\s*[A-Za-z_]\w*\s*=\s*[A-Za-z_]\w*\(.*\)\s*$")


class ParseErrorKind(Enum):
    UNEXPECTED_TOKEN = "UnexpectedToken"
    UNTERMINATED_STRING = "UnterminatedString"
    MISSING_EQUALS = "MissingEquals"
    MISSING_PAREN = "MissingParen"
    EMPTY_PROGRAM = "EmptyProgram"
    DUPLICATE_ASSIGNMENT = "DuplicateAssignment"
    USE_BEFORE_DEF = "UseBeforeDef"


@dataclass(frozen=True)
class ParseError:
    line_no: int
    column: int
    kind: ParseErrorKind
    message: str

    def __str__(self) -> str:
        return f"{self.line_no}:{self.column}: {self.kind.value}: {self.message}"


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class StrLit:
    text: str


@dataclass(frozen=True)
class NumLit:
    value: int | float


@dataclass(frozen=True)
class BoolLit:
    value: bool


ArgValue = VarRef | StrLit | NumLit | BoolLit


@dataclass(frozen=True)
class Statement:
    output_var: str
    function_name: str
    args: tuple[tuple[str, ArgValue], ...]
    line_no: int = field(default=0, compare=False)

    def arg_map(self) -> dict[str, ArgValue]:
        return dict(self.args)


@dataclass(frozen=True)
class Program:
    statements: tuple[Statement, ...]
    source_text: str | None = field(default=None, compare=False)


def is_reserved_input(name: str) -> bool:
    """True for the input bindings a program may use without defining."""
    return RESERVED_INPUT_RE.match(name) is not None


class _LineParser:
    """Single-statement recursive-descent parser with column tracking."""

    def __init__(self, line: str, line_no: int):
        self.line = line
        self.line_no = line_no
        self.pos = 0
        self.errors: list[ParseError] = []

    def error(self, kind: ParseErrorKind, message: str, column: int | None = None) -> None:
        col = (self.pos if column is None else column) + 1
        self.errors.append(ParseError(self.line_no, col, kind, message))

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def peek(self) -> str:
        return self.line[self.pos] if self.pos < len(self.line) else ""

    def ident(self) -> str | None:
        m = IDENT_RE.match(self.line, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group()

    def statement(self) -> Statement | None:
        self.skip_ws()
        start = self.pos
        out = self.ident()
        if out is None:
            self.error(ParseErrorKind.UNEXPECTED_TOKEN, "expected an output variable name", start)
            return None
        self.skip_ws()
        if self.peek() != "=":
            self.error(ParseErrorKind.MISSING_EQUALS, f"expected '=' after output variable {out!r}")
            return None
        self.pos += 1
        self.skip_ws()
        fn = self.ident()
        if fn is None:
            self.error(ParseErrorKind.UNEXPECTED_TOKEN, "expected a function name after '='")
            return None
        self.skip_ws()
        if self.peek() != "(":
            self.error(ParseErrorKind.MISSING_PAREN, f"expected '(' after function name {fn!r}")
            return None
        self.pos += 1
        args = self.arg_list()
        if args is None:
            return None
        self.skip_ws()
        if self.pos < len(self.line):
            self.error(ParseErrorKind.UNEXPECTED_TOKEN, f"unexpected trailing text {self.line[self.pos:]!r}")
            return None
        return Statement(out, fn, tuple(args), self.line_no)

    def arg_list(self) -> list[tuple[str, ArgValue]] | None:
        args: list[tuple[str, ArgValue]] = []
        seen: set[str] = set()
        self.skip_ws()
        if self.peek() == ")":
            self.pos += 1
            return args
        while True:
            self.skip_ws()
            name = self.ident()
            if name is None:
                self.error(ParseErrorKind.UNEXPECTED_TOKEN, "expected an argument name")
                return None
            self.skip_ws()
            if self.peek() != "=":
                self.error(ParseErrorKind.MISSING_EQUALS, f"expected '=' after argument name {name!r}")
                return None
            self.pos += 1
            self.skip_ws()
            value = self.value()
            if value is None:
                return None
            if name in seen:
                self.error(ParseErrorKind.UNEXPECTED_TOKEN, f"duplicate argument name {name!r}")
                return None
            seen.add(name)
            args.append((name, value))
            self.skip_ws()
            ch = self.peek()
            if ch == ",":
                self.pos += 1
                continue
            if ch == ")":
                self.pos += 1
                return args
            if ch == "":
                self.error(ParseErrorKind.MISSING_PAREN, "expected ')' to close the argument list")
            else:
                self.error(ParseErrorKind.UNEXPECTED_TOKEN, f"expected ',' or ')' but found {ch!r}")
            return None

    def value(self) -> ArgValue | None:
        ch = self.peek()
        if ch in "'\"":
            return self.string(ch)
        if ch.isdigit() or (ch == "-" and self.pos + 1 < len(self.line) and self.line[self.pos + 1].isdigit()):
            return self.number()
        name = self.ident()
        if name is None:
            self.error(ParseErrorKind.UNEXPECTED_TOKEN, "expected an argument value")
            return None
        if name == "true":
            return BoolLit(True)
        if name == "false":
            return BoolLit(False)
        return VarRef(name)

    def string(self, quote: str) -> StrLit | None:
        start = self.pos
        self.pos += 1
        out: list[str] = []
        while self.pos < len(self.line):
            ch = self.line[self.pos]
            if ch == "\\":
                if self.pos + 1 >= len(self.line):
                    break
                esc = self.line[self.pos + 1]
                if esc == "n":
                    out.append("\n")
                elif esc in ("'", '"', "\\"):
                    out.append(esc)
                else:
                    self.error(ParseErrorKind.UNEXPECTED_TOKEN, f"unknown escape sequence '\\{esc}'", self.pos)
                    return None
                self.pos += 2
                continue
            if ch == quote:
                self.pos += 1
                return StrLit("".join(out))
            out.append(ch)
            self.pos += 1
        self.error(ParseErrorKind.UNTERMINATED_STRING, "string literal is never closed", start)
        return None

    def number(self) -> NumLit | None:
        m = re.compile(r"-?[0-9]+(\.[0-9]+)?([eE][+-]?[0-9]+)?").match(self.line, self.pos)
        if m is None:
            self.error(ParseErrorKind.UNEXPECTED_TOKEN, "malformed number")
            return None
        self.pos = m.end()
        text = m.group()
        is_float = "." in text or "e" in text or "E" in text
        return NumLit(float(text) if is_float else int(text))


def parse(source: str) -> Program | list[ParseError]:
    """Parse DSL text into a Program, or return every error found.

    Collects all lexical, syntactic, and structural errors (duplicate
    assignment, use of a variable that is neither a reserved input nor an
    earlier output) instead of stopping at the first one.
    """
    errors: list[ParseError] = []
    statements: list[Statement] = []
    # Physical lines are delimited by \n only; exotic Unicode line breaks
    # inside string literals must survive untouched.
    for line_no, raw in enumerate(source.split("\n"), start=1):
        if raw.endswith("\r"):
            raw = raw[:-1]
        line = raw.strip(" \t\r")
        if not line or line.startswith("#"):
            continue
        lp = _LineParser(raw, line_no)
        stmt = lp.statement()
        errors.extend(lp.errors)
        if stmt is not None:
            statements.append(stmt)

    if not statements and not errors:
        errors.append(ParseError(1, 1, ParseErrorKind.EMPTY_PROGRAM, "program contains no statements"))

    assigned: set[str] = set()
    for stmt in statements:
        for name, value in stmt.args:
            if isinstance(value, VarRef) and value.name not in assigned and not is_reserved_input(value.name):
                errors.append(
                    ParseError(
                        stmt.line_no,
                        1,
                        ParseErrorKind.USE_BEFORE_DEF,
                        f"variable {value.name!r} is not a reserved input and is not defined by an earlier statement",
                    )
                )
        if stmt.output_var in assigned:
            errors.append(
                ParseError(
                    stmt.line_no,
                    1,
                    ParseErrorKind.DUPLICATE_ASSIGNMENT,
                    f"output variable {stmt.output_var!r} is already assigned",
                )
            )
        assigned.add(stmt.output_var)

    if errors:
        return errors
    return Program(tuple(statements), source_text=source)


def parse_or_raise(source: str) -> Program:
    """Parse and raise ValueError carrying the error list on failure."""
    result = parse(source)
    if isinstance(result, list):
        raise ValueError("; ".join(str(e) for e in result))
    return result


def _print_value(value: ArgValue) -> str:
    if isinstance(value, VarRef):
        return value.name
    if isinstance(value, StrLit):
        escaped = value.text.replace("\\", "\\\\").replace("'", "\\'").replace("\n", "\\n")
        return f"'{escaped}'"
    if isinstance(value, NumLit):
        return repr(value.value)
    if isinstance(value, BoolLit):
        return "true" if value.value else "false"
    raise TypeError(f"not an ArgValue: {value!r}")


def print_program(program: Program) -> str:
    """Render the canonical form: one statement per line, no spaces, single quotes."""
    lines = []
    for stmt in program.statements:
        args = ",".join(f"{name}={_print_value(value)}" for name, value in stmt.args)
        lines.append(f"{stmt.output_var}={stmt.function_name}({args})")
    return "\n".join(lines)


def result_var(program: Program) -> str:
    """The output variable of the last statement; its value is the program result."""
    if not program.statements:
        raise ValueError("program has no statements")
    return program.statements[-1].output_var


def free_inputs(program: Program) -> set[str]:
    """Variables referenced as arguments but never assigned by the program."""
    assigned = {stmt.output_var for stmt in program.statements}
    free: set[str] = set()
    for stmt in program.statements:
        for _, value in stmt.args:
            if isinstance(value, VarRef) and value.name not in assigned:
                free.add(value.name)
    return free
