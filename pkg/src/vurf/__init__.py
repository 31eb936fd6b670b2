"""vurf: natural-language video queries compiled to executable dataflow programs.

An LLM (or a deterministic scripted stand-in) turns an instruction into a
small straight-line program; a static validator and a feedback loop repair
it; an interpreter runs it against pluggable backends: pure span algebra,
descriptor-driven mocks with known ground truth, or remote model servers.
"""

from .dsl import ParseError, Program, Statement, free_inputs, parse, print_program, result_var
from .registry import Registry, SemType, builtin_catalog
from .validator import Feedback, Violation, is_valid, validate

__all__ = [
    "Feedback",
    "ParseError",
    "Program",
    "Registry",
    "SemType",
    "Statement",
    "Violation",
    "builtin_catalog",
    "free_inputs",
    "is_valid",
    "parse",
    "print_program",
    "result_var",
    "validate",
]

__version__ = "0.1.0"
