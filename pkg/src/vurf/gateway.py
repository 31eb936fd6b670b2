"""Provider abstraction for the LLM: prompt assembly, scraping, caching.

Two providers exist.  The remote provider speaks a generic JSON
chat-completion protocol over HTTP.  The scripted provider is a
deterministic fake driven by ordered match -> response rules, which makes
every downstream pipeline reproducible in tests and benchmarks.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import dsl
from .icl import InContextExample

DEFAULT_SYSTEM_PREAMBLE = (
    "You write programs in a small line-oriented dataflow language. "
    "Each line has the form OUTPUT=FUNCTION(name=value,...). "
    "Use only the listed functions when a function list is given. "
    "Reply with the program only, one statement per line."
)

ENV_URL = "VURF_LLM_URL"
ENV_KEY = "VURF_LLM_KEY"
ENV_MODEL = "VURF_LLM_MODEL"


class GatewayError(Exception):
    pass


class TransportError(GatewayError):
    pass


class AuthError(GatewayError):
    pass


class ScrapeError(GatewayError):
    pass


class ScriptMiss(GatewayError):
    """The scripted provider has no rule for a prompt.  Always a test bug."""


class SchemaError(GatewayError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class PromptSpec:
    instruction: str
    in_context: tuple[InContextExample, ...] = ()
    system_preamble: str = DEFAULT_SYSTEM_PREAMBLE
    extra_context: str | None = None

    def __post_init__(self) -> None:
        if not self.instruction:
            raise ValueError("instruction must be non-empty")


def render_prompt(spec: PromptSpec) -> str:
    """Deterministic prompt text; examples appear verbatim, in order."""
    parts = []
    if spec.system_preamble:
        parts.append(spec.system_preamble)
    for ex in spec.in_context:
        parts.append(f"Instruction: {ex.instruction}\nProgram:\n{ex.program_text}")
    if spec.extra_context:
        parts.append(spec.extra_context)
    parts.append(f"Instruction: {spec.instruction}\nProgram:")
    return "\n\n".join(parts)


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "scripted"  # "scripted" | "remote"
    script: "Script | None" = None
    script_path: str | None = None
    endpoint: str | None = None
    api_key: str | None = None
    model: str | None = None
    temperature: float = 0.0
    max_retries: int = 2
    timeout_s: float = 30.0
    backoff_s: float = 0.5
    cache_dir: str | None = None

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.kind not in ("scripted", "remote"):
            raise ValueError(f"unknown provider kind {self.kind!r}")


def remote_config_from_env(**overrides) -> ProviderConfig:
    return ProviderConfig(
        kind="remote",
        endpoint=os.environ.get(ENV_URL),
        api_key=os.environ.get(ENV_KEY),
        model=os.environ.get(ENV_MODEL, "gpt-3.5-turbo"),
        **overrides,
    )


@dataclass(frozen=True)
class Completion:
    raw_text: str
    extracted_program_text: str | None
    provider_latency_s: float
    cache_hit: bool


# ---------------------------------------------------------------------------
# Scraping


FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)

_ARG_SPLIT_RE = re.compile(
    r"""((?:[^,'"]|'(?:[^'\\]|\\.)*'|"(?:[^"\\]|\\.)*")+)"""
)
_BARE_VALUE_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?: +[A-Za-z0-9_]+)+\Z")


def quote_bare_tokens(line: str) -> str:
    """Repair step: quote unquoted multi-word argument values.

    Models sometimes emit `question=what happens next` instead of a
    quoted string; single bare words stay untouched (they are variable
    references).
    """
    m = re.match(r"(\s*\w+\s*=\s*\w+\()(.*)(\)\s*)$", line)
    if m is None:
        return line
    head, body, tail = m.groups()
    repaired = []
    for part in _ARG_SPLIT_RE.findall(body):
        name, eq, value = part.partition("=")
        value = value.strip()
        if eq and _BARE_VALUE_RE.match(value):
            value = "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
            repaired.append(f"{name.strip()}={value}")
        else:
            repaired.append(part.strip())
    return head + ",".join(repaired) + tail.strip()


def scrape_program(raw_text: str) -> str:
    """Extract program text from a completion.

    Prefers the first fenced code block; otherwise takes the longest run
    of consecutive lines shaped like statements.  Unquoted multi-word
    argument values are quoted as a repair step.  Raises ScrapeError when
    nothing program-like is present.
    """
    fence = FENCE_RE.search(raw_text)
    if fence:
        content = fence.group(1).strip("\n")
        lines = [quote_bare_tokens(line) for line in content.splitlines()]
        if any(dsl.STATEMENT_LINE_RE.match(line) for line in lines):
            return "\n".join(lines)
        raise ScrapeError("fenced block contains no program statements")

    best: list[str] = []
    run: list[str] = []
    for line in raw_text.splitlines() + [""]:
        line = quote_bare_tokens(line)
        if dsl.STATEMENT_LINE_RE.match(line):
            run.append(line.strip())
        else:
            if len(run) > len(best):
                best = run
            run = []
    if not best:
        raise ScrapeError("completion contains no program statements")
    return "\n".join(best)


def try_extract(raw_text: str) -> str | None:
    try:
        text = scrape_program(raw_text)
    except ScrapeError:
        return None
    return text if isinstance(dsl.parse(text), dsl.Program) else None


# ---------------------------------------------------------------------------
# Scripted provider


Matcher = Callable[[str], bool]
Responder = Callable[[str, dict], str]


@dataclass
class ScriptRule:
    matcher: Matcher
    responder: Responder
    name: str = ""


class Script:
    """Ordered rule list with shared mutable state; first matching rule wins."""

    def __init__(self, rules: Sequence[ScriptRule]):
        self.rules = list(rules)
        self.state: dict = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.rules)

    def respond(self, prompt: str) -> str:
        with self._lock:
            for rule in self.rules:
                if rule.matcher(prompt):
                    return rule.responder(prompt, self.state)
        excerpt = prompt if len(prompt) < 200 else prompt[:200] + "..."
        raise ScriptMiss(f"no scripted rule matches prompt: {excerpt!r}")


def match_substring(needle: str) -> Matcher:
    return lambda prompt: needle in prompt


def match_regex(pattern: str) -> Matcher:
    compiled = re.compile(pattern)
    return lambda prompt: compiled.search(prompt) is not None


def match_any() -> Matcher:
    return lambda prompt: True


def respond_fixed(text: str) -> Responder:
    return lambda prompt, state: text


def respond_sequence(texts: Sequence[str], key: str) -> Responder:
    """Serve texts in order across calls, sticking on the last one."""
    items = list(texts)

    def responder(prompt: str, state: dict) -> str:
        index = state.get(key, 0)
        state[key] = index + 1
        return items[min(index, len(items) - 1)]

    return responder


SUGGESTION_RE = re.compile(r"unknown function '(\w+)'\. Did you mean '(\w+)'\?")
INSTRUCTION_RE = re.compile(r"^Instruction: (.*)$", re.MULTILINE)


def last_instruction(prompt: str) -> str:
    matches = INSTRUCTION_RE.findall(prompt)
    return matches[-1] if matches else ""


def respond_fix_one_flagged() -> Responder:
    """Cooperative correction: apply exactly one nearest-name suggestion per call."""

    def responder(prompt: str, state: dict) -> str:
        program_text = scrape_program(prompt)
        for bad, good in SUGGESTION_RE.findall(prompt):
            pattern = re.compile(rf"(?<==){re.escape(bad)}(?=\()")
            if pattern.search(program_text):
                return pattern.sub(good, program_text, count=1)
        return program_text

    return responder


def corrupt_function_names(program_text: str, rng: random.Random, max_bad: int = 3) -> str:
    """Misspell 1..max_bad distinct function names (edit distance 1 each)."""
    program = dsl.parse_or_raise(program_text)
    n_bad = rng.randint(1, min(max_bad, len(program.statements)))
    indices = sorted(rng.sample(range(len(program.statements)), n_bad))
    lines = dsl.print_program(program).splitlines()
    for i in indices:
        stmt = program.statements[i]
        lines[i] = lines[i].replace(f"={stmt.function_name}(", f"={stmt.function_name}Q(", 1)
    return "\n".join(lines)


def respond_inject_invalid(
    rate: float,
    seed: int,
    base: str | None = None,
    base_for: Callable[[str], str] | None = None,
) -> Responder:
    """Seeded fault injection keyed to the prompt's final instruction.

    The corrupt-or-not decision and the corruption itself derive from
    (seed, instruction) only, so repeated calls for the same instruction
    are identical regardless of call order.
    """
    if base is None and base_for is None:
        raise ValueError("inject_invalid needs a base program or a base_for mapping")

    def responder(prompt: str, state: dict) -> str:
        instruction = last_instruction(prompt)
        text = base_for(instruction) if base_for is not None else base
        assert text is not None
        rng = random.Random(f"{seed}|{instruction}")
        if rng.random() < rate:
            return corrupt_function_names(text, rng)
        return text

    return responder


def _rule_from_json(obj: dict, path: str, index: int) -> ScriptRule:
    where = f"rules[{index}]"
    if not isinstance(obj, dict):
        raise SchemaError(path, f"{where}: rule must be an object")

    match = obj.get("match")
    if isinstance(match, str):
        matcher = match_substring(match)
    elif isinstance(match, dict) and "substring" in match:
        matcher = match_substring(match["substring"])
    elif isinstance(match, dict) and "regex" in match:
        try:
            matcher = match_regex(match["regex"])
        except re.error as exc:
            raise SchemaError(path, f"{where}.match.regex: {exc}") from exc
    elif isinstance(match, dict) and match.get("any"):
        matcher = match_any()
    else:
        raise SchemaError(path, f"{where}.match: expected a substring, regex, or any matcher")

    has = [k for k in ("response", "responses", "behavior") if k in obj]
    if len(has) != 1:
        raise SchemaError(path, f"{where}: exactly one of response/responses/behavior required")

    if "response" in obj:
        if not isinstance(obj["response"], str):
            raise SchemaError(path, f"{where}.response: expected a string")
        responder = respond_fixed(obj["response"])
    elif "responses" in obj:
        seq = obj["responses"]
        if not isinstance(seq, list) or not seq or not all(isinstance(t, str) for t in seq):
            raise SchemaError(path, f"{where}.responses: expected a non-empty list of strings")
        responder = respond_sequence(seq, key=f"rule{index}.calls")
    else:
        behavior = obj["behavior"]
        if not isinstance(behavior, dict) or "kind" not in behavior:
            raise SchemaError(path, f"{where}.behavior: expected an object with a kind")
        kind = behavior["kind"]
        if kind == "fix_one_flagged":
            responder = respond_fix_one_flagged()
        elif kind == "inject_invalid":
            try:
                responder = respond_inject_invalid(
                    rate=float(behavior["rate"]),
                    seed=int(behavior["seed"]),
                    base=behavior["base"],
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(path, f"{where}.behavior: {exc}") from exc
        else:
            raise SchemaError(path, f"{where}.behavior.kind: unknown kind {kind!r}")

    return ScriptRule(matcher, responder, name=obj.get("name", f"rule{index}"))


def load_script(path: str | Path) -> Script:
    """Load a scripted-provider rule file (JSON)."""
    text_path = str(path)
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(text_path, str(exc)) from exc
    if not isinstance(data, dict) or not isinstance(data.get("rules"), list):
        raise SchemaError(text_path, 'expected an object with a "rules" list')
    rules = [_rule_from_json(obj, text_path, i) for i, obj in enumerate(data["rules"])]
    return Script(rules)


# ---------------------------------------------------------------------------
# Remote provider


def _default_post(url: str, payload: dict, headers: dict, timeout: float):
    import requests

    try:
        response = requests.post(url, json=payload, headers=headers, timeout=timeout)
    except requests.RequestException as exc:
        raise TransportError(str(exc)) from exc
    body: object
    try:
        body = response.json()
    except ValueError:
        body = response.text
    return response.status_code, body


def remote_complete(prompt: str, config: ProviderConfig, post=None) -> str:
    """POST a chat-completion request, retrying transport failures with backoff."""
    if not config.endpoint:
        raise TransportError(f"no endpoint configured (set {ENV_URL})")
    post = post or _default_post
    payload = {
        "model": config.model or "default",
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    }
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"

    last_error: Exception | None = None
    for attempt in range(config.max_retries + 1):
        try:
            status, body = post(config.endpoint, payload, headers, config.timeout_s)
            if status in (401, 403):
                raise AuthError(f"provider rejected credentials (HTTP {status})")
            if status >= 400:
                raise TransportError(f"HTTP {status}: {body}")
            try:
                return body["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed completion response: {body!r}") from exc
        except AuthError:
            raise
        except TransportError as exc:
            last_error = exc
            if attempt < config.max_retries and config.backoff_s > 0:
                time.sleep(config.backoff_s * (2**attempt))
    raise TransportError(
        f"gave up after {config.max_retries + 1} attempts: {last_error}"
    ) from last_error


# ---------------------------------------------------------------------------
# Cache and entry point


class CompletionCache:
    """Content-addressed completion store, one JSON file per key."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _file(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> str | None:
        with self._lock:
            f = self._file(key)
            if not f.exists():
                return None
            return json.loads(f.read_text(encoding="utf-8"))["raw_text"]

    def put(self, key: str, raw_text: str) -> None:
        with self._lock:
            self._file(key).write_text(json.dumps({"raw_text": raw_text}), encoding="utf-8")


def cache_key(prompt: str, config: ProviderConfig) -> str:
    material = json.dumps(
        {
            "prompt": prompt,
            "kind": config.kind,
            "model": config.model,
            "temperature": config.temperature,
        },
        sort_keys=True,
    )
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


def _load_configured_script(config: ProviderConfig) -> Script:
    if config.script is not None:
        return config.script
    if config.script_path:
        return load_script(config.script_path)
    raise ScriptMiss("scripted provider has no script loaded")


def complete(spec: PromptSpec, config: ProviderConfig, post=None) -> Completion:
    """Render the prompt, consult the cache, and call the configured provider."""
    prompt = render_prompt(spec)
    cache = CompletionCache(config.cache_dir) if config.cache_dir else None
    key = cache_key(prompt, config)

    if cache is not None:
        cached = cache.get(key)
        if cached is not None:
            return Completion(cached, try_extract(cached), 0.0, cache_hit=True)

    started = time.monotonic()
    if config.kind == "scripted":
        raw = _load_configured_script(config).respond(prompt)
    else:
        raw = remote_complete(prompt, config, post=post)
    latency = time.monotonic() - started

    if cache is not None:
        cache.put(key, raw)
    return Completion(raw, try_extract(raw), latency, cache_hit=False)
