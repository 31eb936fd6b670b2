"""Statement-by-statement program execution against bound backends.

Execution is a fold over the statement list: each step resolves its
arguments from the environment, re-checks runtime types, calls the bound
executor, and appends to the trace.  Backends come in three kinds: pure
span algebra (editing functions), descriptor-driven mocks (model
functions), and remote HTTP servers speaking the typed-value protocol.
"""

from __future__ import annotations

import json
import math
import time
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import dsl
from .registry import Registry, SemType, unify
from .validator import validate
from .values import (
    Interval,
    Region,
    Value,
    VideoRef,
    intersect_spans,
    render_value,
    sem_type_of,
)
from .wire import WireFormatError, value_from_json, value_to_json
from .world import NoMatch, WorldStore, mock_classifypose, mock_grounding, mock_pose, mock_track, mock_vqa


class BackendFailure(Exception):
    pass


class RemoteTimeout(Exception):
    pass


class ProtocolError(Exception):
    pass


@dataclass(frozen=True)
class StepTrace:
    line_no: int
    function: str
    args_rendered: dict[str, str]
    output: Value
    output_rendered: str
    backend: str
    wall_time_s: float


@dataclass(frozen=True)
class ExecutionTrace:
    steps: tuple[StepTrace, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "steps": [
                {
                    "line": s.line_no,
                    "function": s.function,
                    "backend": s.backend,
                    "args": s.args_rendered,
                    "output": s.output_rendered,
                    "output_value": value_to_json(s.output),
                    "wall_time_s": s.wall_time_s,
                }
                for s in self.steps
            ]
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2), encoding="utf-8")


class ExecError(Exception):
    def __init__(self, line_no: int, function: str, cause: str, message: str, trace: ExecutionTrace):
        super().__init__(f"line {line_no}: {function}: {cause}: {message}")
        self.line_no = line_no
        self.function = function
        self.cause = cause  # "BackendFailure" | "TypeRuntimeMismatch" | "Timeout"
        self.trace = trace


Executor = Callable[[dict[str, Value]], Value]


@dataclass(frozen=True)
class Binding:
    kind: str  # "builtin_pure" | "mock_world" | "remote(<endpoint>)"
    call: Executor


class Bindings:
    """Function name -> executor map; later merges win on conflicts."""

    def __init__(self, entries: dict[str, Binding] | None = None):
        self._entries: dict[str, Binding] = dict(entries or {})

    def for_function(self, name: str) -> Binding | None:
        return self._entries.get(name)

    def merged_with(self, other: "Bindings") -> "Bindings":
        merged = dict(self._entries)
        merged.update(other._entries)
        return Bindings(merged)

    def names(self) -> list[str]:
        return sorted(self._entries)


# ---------------------------------------------------------------------------
# Pure span-algebra executors for the editing functions


def _trim(args: dict[str, Value]) -> Value:
    video: VideoRef = args["video"]
    return video.with_spans(intersect_spans(video.spans, float(args["start"]), float(args["end"])))


def _trim_after(args: dict[str, Value]) -> Value:
    video: VideoRef = args["video"]
    interval: Interval = args["interval"]
    return video.with_spans(intersect_spans(video.spans, interval.end_s, math.inf))


def _trim_before(args: dict[str, Value]) -> Value:
    video: VideoRef = args["video"]
    interval: Interval = args["interval"]
    return video.with_spans(intersect_spans(video.spans, -math.inf, interval.start_s))


def _merge(args: dict[str, Value]) -> Value:
    v0: VideoRef = args["video0"]
    v1: VideoRef = args["video1"]
    offset = v0.duration_s
    shifted = tuple((s + offset, e + offset) for s, e in v1.spans)
    return VideoRef(
        source=f"{v0.source}+{v1.source}",
        duration_s=v0.duration_s + v1.duration_s,
        spans=v0.spans + shifted,
        effects=v0.effects + v1.effects,
    )


def _crop(args: dict[str, Value]) -> Value:
    video: VideoRef = args["video"]
    region: Region = args["region"]
    return video.with_effect("crop", f"{region.x:g},{region.y:g},{region.w:g},{region.h:g}")


def _bgblur(args: dict[str, Value]) -> Value:
    return args["video"].with_effect("bgblur", str(args["object"]))


def _colorpop(args: dict[str, Value]) -> Value:
    return args["video"].with_effect("colorpop", str(args["object"]))


def pure_bindings() -> Bindings:
    executors: dict[str, Executor] = {
        "TRIM": _trim,
        "TRIMAFTER": _trim_after,
        "TRIMBEFORE": _trim_before,
        "MERGE": _merge,
        "CROP": _crop,
        "BGBLUR": _bgblur,
        "COLORPOP": _colorpop,
    }
    return Bindings({name: Binding("builtin_pure", fn) for name, fn in executors.items()})


def mock_bindings(store: WorldStore) -> Bindings:
    """Descriptor-driven executors for the model-backed functions."""

    def grounding(args: dict[str, Value]) -> Value:
        return mock_grounding(store.resolve(args["video"]), str(args["query"]))

    def vqa(args: dict[str, Value]) -> Value:
        video: VideoRef = args["video"]
        return mock_vqa(store.resolve(video), video, str(args["question"]))

    def pose(args: dict[str, Value]) -> Value:
        video: VideoRef = args["video"]
        return mock_pose(store.resolve(video), video)

    def classifypose(args: dict[str, Value]) -> Value:
        return mock_classifypose(args["poses"], str(args["labels"]))

    def track(args: dict[str, Value]) -> Value:
        video: VideoRef = args["video"]
        return mock_track(store.resolve(video), video, str(args["object"]))

    executors: dict[str, Executor] = {
        "GROUNDING": grounding,
        "VQA": vqa,
        "POSE": pose,
        "CLASSIFYPOSE": classifypose,
        "TRACK": track,
    }
    return Bindings({name: Binding("mock_world", fn) for name, fn in executors.items()})


def default_bindings(store: WorldStore) -> Bindings:
    return pure_bindings().merged_with(mock_bindings(store))


# ---------------------------------------------------------------------------
# Remote backend over the typed-value HTTP protocol


def _default_http(method: str, url: str, payload: dict | None, timeout: float):
    import requests

    try:
        if method == "GET":
            response = requests.get(url, timeout=timeout)
        else:
            response = requests.post(url, json=payload, timeout=timeout)
    except requests.Timeout as exc:
        raise RemoteTimeout(str(exc)) from exc
    except requests.RequestException as exc:
        raise BackendFailure(str(exc)) from exc
    if response.status_code >= 400:
        raise BackendFailure(f"HTTP {response.status_code}: {response.text[:200]}")
    try:
        return response.json()
    except ValueError as exc:
        raise ProtocolError(f"non-JSON response from {url}") from exc


class RemoteBackend:
    """Client for a backend server exposing /functions and /invoke."""

    def __init__(self, endpoint: str, timeout_s: float = 30.0, http=None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout_s = timeout_s
        self._http = http or _default_http
        self._manifest = self._fetch_manifest()

    def _fetch_manifest(self) -> dict[str, dict]:
        data = self._http("GET", f"{self.endpoint}/functions", None, self.timeout_s)
        if not isinstance(data, dict) or not isinstance(data.get("functions"), list):
            raise ProtocolError("manifest is not a registry-extension document")
        return {fn["name"]: fn for fn in data["functions"] if isinstance(fn, dict) and "name" in fn}

    def functions(self) -> list[str]:
        return sorted(self._manifest)

    def manifest_json(self) -> dict:
        return {"functions": list(self._manifest.values())}

    def call(self, function: str, args: dict[str, Value]) -> Value:
        if function not in self._manifest:
            raise ProtocolError(f"server does not advertise function {function!r}")
        request_id = str(uuid.uuid4())
        payload = {
            "function": function,
            "args": {name: value_to_json(value) for name, value in args.items()},
            "request_id": request_id,
        }
        data = self._http("POST", f"{self.endpoint}/invoke", payload, self.timeout_s)
        if not isinstance(data, dict) or "ok" not in data:
            raise ProtocolError(f"malformed invoke response: {data!r}")
        if data.get("request_id") != request_id:
            raise ProtocolError("response request_id does not echo the request")
        if not data["ok"]:
            error = data.get("error") or {}
            raise BackendFailure(f"{error.get('kind', 'Unknown')}: {error.get('message', '')}")
        try:
            value = value_from_json(data["value"])
        except (KeyError, WireFormatError) as exc:
            raise ProtocolError(f"undecodable value in response: {exc}") from exc
        declared = self._manifest[function].get("returns")
        if declared and declared != "Any" and sem_type_of(value).value != declared:
            raise ProtocolError(
                f"server returned {sem_type_of(value).value} but manifest declares {declared}"
            )
        return value

    def bindings(self) -> Bindings:
        kind = f"remote({self.endpoint})"
        return Bindings(
            {
                name: Binding(kind, lambda args, _name=name: self.call(_name, args))
                for name in self._manifest
            }
        )


def call_remote(
    endpoint: str, function: str, args: dict[str, Value], timeout_s: float = 30.0, http=None
) -> Value:
    """One-shot remote invocation: manifest check, then a typed invoke round-trip."""
    return RemoteBackend(endpoint, timeout_s, http).call(function, args)


# ---------------------------------------------------------------------------
# The interpreter itself


def _literal_to_value(value: dsl.ArgValue) -> Value:
    if isinstance(value, dsl.StrLit):
        return value.text
    if isinstance(value, dsl.NumLit):
        return float(value.value)
    if isinstance(value, dsl.BoolLit):
        return value.value
    raise TypeError(f"not a literal: {value!r}")


def execute(
    program: dsl.Program,
    inputs: dict[str, Value],
    bindings: Bindings,
    registry: Registry,
) -> tuple[Value, ExecutionTrace]:
    """Run a valid program; return the result value and the full trace.

    Preconditions (ValueError): the program validates against the registry
    with the given input types, and every function has a binding.
    """
    input_types = {name: sem_type_of(value) for name, value in inputs.items()}
    feedback = validate(program, registry, input_types)
    if not feedback.empty:
        raise ValueError(f"program does not validate: {feedback.violations[0].render()}")
    missing = [s.function_name for s in program.statements if bindings.for_function(s.function_name) is None]
    if missing:
        raise ValueError(f"no backend bound for function(s): {sorted(set(missing))}")

    env: dict[str, Value] = dict(inputs)
    steps: list[StepTrace] = []

    for stmt in program.statements:
        signature = registry.lookup(stmt.function_name)
        assert signature is not None
        binding = bindings.for_function(stmt.function_name)
        assert binding is not None

        def fail(cause: str, message: str):
            raise ExecError(stmt.line_no, stmt.function_name, cause, message, ExecutionTrace(tuple(steps)))

        args: dict[str, Value] = {}
        for name, raw in stmt.args:
            args[name] = env[raw.name] if isinstance(raw, dsl.VarRef) else _literal_to_value(raw)

        # Runtime type tags are re-checked even though static validation
        # passed: values produced by remote backends are not trusted.
        for name, value in args.items():
            param = signature.param(name)
            if param is not None and not unify(sem_type_of(value), param.type):
                fail(
                    "TypeRuntimeMismatch",
                    f"argument '{name}' is {sem_type_of(value).value}, expected {param.type.value}",
                )

        started = time.monotonic()
        try:
            output = binding.call(args)
        except ExecError:
            raise
        except RemoteTimeout as exc:
            fail("Timeout", str(exc))
        except (NoMatch, BackendFailure, ProtocolError) as exc:
            fail("BackendFailure", str(exc))
        except Exception as exc:  # noqa: BLE001 - backends may raise anything
            fail("BackendFailure", f"{type(exc).__name__}: {exc}")
        elapsed = time.monotonic() - started

        if not unify(sem_type_of(output), signature.returns):
            fail(
                "TypeRuntimeMismatch",
                f"backend returned {sem_type_of(output).value}, expected {signature.returns.value}",
            )

        env[stmt.output_var] = output
        steps.append(
            StepTrace(
                line_no=stmt.line_no,
                function=stmt.function_name,
                args_rendered={name: render_value(value) for name, value in args.items()},
                output=output,
                output_rendered=render_value(output),
                backend=binding.kind,
                wall_time_s=elapsed,
            )
        )

    result = env[dsl.result_var(program)]
    return result, ExecutionTrace(tuple(steps))
