"""Static checks of programs against a registry, with LLM-ready feedback.

Type information propagates through the statement list in order: each
output variable takes its function's declared return type.  Every
statically decidable constraint violation is collected and rendered into
a single feedback block addressed to the LLM.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .dsl import ArgValue, BoolLit, NumLit, Program, StrLit, VarRef
from .registry import Registry, SemType, unify, usage_block


class ViolationKind(Enum):
    UNKNOWN_FUNCTION = "UnknownFunction"
    UNKNOWN_PARAM = "UnknownParam"
    MISSING_REQUIRED_PARAM = "MissingRequiredParam"
    ARG_TYPE_MISMATCH = "ArgTypeMismatch"
    RESULT_TYPE_UNKNOWN = "ResultTypeUnknown"
    UNBOUND_INPUT = "UnboundInput"


@dataclass(frozen=True)
class Violation:
    line_no: int
    kind: ViolationKind
    detail: str
    suggestion: str | None = None

    def render(self) -> str:
        text = f"line {self.line_no}: {self.detail}."
        if self.suggestion:
            text += f" {self.suggestion}"
        return text


@dataclass(frozen=True)
class Feedback:
    violations: tuple[Violation, ...]
    rendered: str

    @property
    def empty(self) -> bool:
        return not self.violations


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def nearest_name(name: str, registry: Registry, max_distance: int = 3) -> str | None:
    """Closest catalog name by case-insensitive edit distance, if within bound."""
    best: tuple[int, str] | None = None
    for candidate in registry.names():
        dist = levenshtein(name.lower(), candidate.lower())
        if dist <= max_distance and (best is None or (dist, candidate) < best):
            best = (dist, candidate)
    return best[1] if best else None


def _literal_type(value: ArgValue) -> SemType | None:
    if isinstance(value, StrLit):
        return SemType.TEXT
    if isinstance(value, NumLit):
        return SemType.NUMBER
    if isinstance(value, BoolLit):
        return SemType.BOOL
    return None


def render_feedback(violations: list[Violation], registry: Registry) -> str:
    if not violations:
        return ""
    lines = ["The program violates these constraints:"]
    lines.extend(f"- {v.render()}" for v in violations)
    lines.append("Available functions:")
    lines.append(usage_block(registry))
    return "\n".join(lines)


def validate(program: Program, registry: Registry, inputs: dict[str, SemType]) -> Feedback:
    """Collect every constraint violation; empty feedback means the program is valid."""
    violations: list[Violation] = []
    env: dict[str, SemType | None] = {}
    reported_unbound: set[str] = set()

    for stmt in program.statements:
        sig = registry.lookup(stmt.function_name)

        for name, value in stmt.args:
            if isinstance(value, VarRef) and value.name not in env:
                if value.name in inputs:
                    env[value.name] = inputs[value.name]
                elif value.name not in reported_unbound:
                    violations.append(
                        Violation(
                            stmt.line_no,
                            ViolationKind.UNBOUND_INPUT,
                            f"input variable '{value.name}' is not bound",
                        )
                    )
                    reported_unbound.add(value.name)
                    # Treat as Any afterwards so one missing binding is reported once.
                    env[value.name] = SemType.ANY

        if sig is None:
            suggestion = nearest_name(stmt.function_name, registry)
            violations.append(
                Violation(
                    stmt.line_no,
                    ViolationKind.UNKNOWN_FUNCTION,
                    f"unknown function '{stmt.function_name}'",
                    f"Did you mean '{suggestion}'?" if suggestion else None,
                )
            )
            env[stmt.output_var] = None
            continue

        supplied = {name for name, _ in stmt.args}
        for param in sig.params:
            if param.required and param.name not in supplied:
                violations.append(
                    Violation(
                        stmt.line_no,
                        ViolationKind.MISSING_REQUIRED_PARAM,
                        f"call to '{sig.name}' is missing required parameter '{param.name}'",
                    )
                )

        for name, value in stmt.args:
            param = sig.param(name)
            if param is None:
                violations.append(
                    Violation(
                        stmt.line_no,
                        ViolationKind.UNKNOWN_PARAM,
                        f"function '{sig.name}' has no parameter '{name}'",
                    )
                )
                continue
            if isinstance(value, VarRef):
                actual = env.get(value.name)
                if actual is None:
                    violations.append(
                        Violation(
                            stmt.line_no,
                            ViolationKind.RESULT_TYPE_UNKNOWN,
                            f"argument '{name}' references '{value.name}' whose type is unknown",
                        )
                    )
                    continue
            else:
                actual = _literal_type(value)
            if actual is not None and not unify(actual, param.type):
                violations.append(
                    Violation(
                        stmt.line_no,
                        ViolationKind.ARG_TYPE_MISMATCH,
                        f"argument '{name}' of '{sig.name}' expects {param.type.value} "
                        f"but got {actual.value}",
                    )
                )

        env[stmt.output_var] = sig.returns

    return Feedback(tuple(violations), render_feedback(violations, registry))


def is_valid(program: Program, registry: Registry, inputs: dict[str, SemType]) -> bool:
    return validate(program, registry, inputs).empty


def inferred_inputs(program: Program) -> dict[str, SemType]:
    """Assume every free input of a program is a video binding."""
    from .dsl import free_inputs

    return {name: SemType.VIDEO for name in free_inputs(program)}


def brute_force_oracle(program: Program, registry: Registry, inputs: dict[str, SemType]) -> bool:
    """Naive validity check used only as a test oracle.

    Re-derives every fact by quadratic rescans of the statement list
    instead of propagating a type environment.  Must agree with is_valid
    on the verdict for any parsed program.
    """
    stmts = list(program.statements)
    for i, stmt in enumerate(stmts):
        sig = registry.lookup(stmt.function_name)
        if sig is None:
            return False
        for param in sig.params:
            if param.required and all(name != param.name for name, _ in stmt.args):
                return False
        for name, value in stmt.args:
            param = sig.param(name)
            if param is None:
                return False
            if isinstance(value, VarRef):
                actual: SemType | None = None
                produced = False
                for j in range(i):
                    if stmts[j].output_var == value.name:
                        produced = True
                        producer_sig = registry.lookup(stmts[j].function_name)
                        actual = producer_sig.returns if producer_sig else None
                if not produced:
                    if value.name not in inputs:
                        return False
                    actual = inputs[value.name]
            else:
                actual = _literal_type(value)
            if actual is not None and not unify(actual, param.type):
                return False
    return True
