"""Turn an input annotation plus duration into a validated decomposition.

Two backends: a chat-completion LLM endpoint driven by a three-part prompt
(instruction template, worked examples, known-actions list), and a
deterministic rule table for offline use. Both produce decompositions that
pass the same validator; the LLM path retries with the violation list
appended until the response validates or retries run out.
"""

from __future__ import annotations

import json
import os
import re
import socket
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    MalformedResponseError,
    TransportError,
    UnknownActionError,
    ValidationExhaustedError,
)
from .motion import Decomposition, SubMovement, TimeInterval
from .synthetic import DEFAULT_COMPOSITES, CompositeSpec

DEFAULT_MIN_DURATION_S = 2.0


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    severity: str  # "error" | "warning"

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code}: {self.message}"


def errors_only(violations: list[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]


def validate_decomposition(
    candidate: dict | Decomposition,
    duration_s: float,
    min_duration_s: float = DEFAULT_MIN_DURATION_S,
) -> list[Violation]:
    """All constraint violations of a candidate decomposition; never raises.

    Hard constraints (errors): non-empty, numeric fields, start < end,
    start >= 0, end within the total duration, at least one item starting at
    second 0. Items shorter than min_duration_s only warn, since brief
    sub-movements are discouraged rather than forbidden.
    """
    if isinstance(candidate, Decomposition):
        items = [
            {"text": sm.text, "start": sm.interval.start_s, "end": sm.interval.end_s}
            for sm in candidate.items
        ]
    else:
        items = candidate.get("decomposition", [])

    violations: list[Violation] = []
    if not isinstance(items, list) or not items:
        violations.append(Violation("non-empty", "decomposition must contain at least one action", "error"))
        return violations

    starts = []
    for i, entry in enumerate(items):
        if not isinstance(entry, dict):
            violations.append(Violation("bad-item", f"item {i} is not an object", "error"))
            continue
        text = entry.get("text")
        start, end = entry.get("start"), entry.get("end")
        if not isinstance(text, str) or not text.strip():
            violations.append(Violation("bad-item", f"item {i} has no text", "error"))
        ok_numbers = True
        for name, value in (("start", start), ("end", end)):
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not np.isfinite(value):
                violations.append(Violation("bad-item", f"item {i} field {name!r} is not a finite number", "error"))
                ok_numbers = False
        if not ok_numbers:
            continue
        if start < 0:
            violations.append(Violation("negative-start", f"item {i} starts at {start} < 0", "error"))
        if not start < end:
            violations.append(
                Violation("start-before-end", f"item {i}: start second {start} must be strictly less than end second {end}", "error")
            )
        if end > duration_s + 1e-9:
            violations.append(
                Violation("exceeds-duration", f"item {i} ends at {end}s beyond the total duration {duration_s}s", "error")
            )
        if start < end and (end - start) < min_duration_s - 1e-9:
            violations.append(
                Violation("min-duration", f"item {i} lasts {end - start:.3g}s, less than {min_duration_s}s", "warning")
            )
        starts.append(start)
    if starts and min(starts) > 1e-9:
        violations.append(Violation("zero-start", "at least one action must start from second 0", "error"))
    return violations


def decomposition_from_items(items: list[dict], duration_s: float) -> Decomposition:
    subs = tuple(
        SubMovement(text=e["text"], interval=TimeInterval(float(e["start"]), float(e["end"])))
        for e in items
    )
    return Decomposition(items=subs, total_duration_s=float(duration_s))


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------

SCHEMA_LINE = (
    'Provide valid JSON output. The output data schema should be like this: '
    '{"decomposition": [{"text": "string", "start": number, "end": number}, '
    '{"text": "string", "start": number, "end": number}, ...]}'
)


def _load_asset(name: str) -> str:
    return resources.files("mocomp.assets").joinpath(name).read_text()


@dataclass(frozen=True)
class PromptBundle:
    """The three prompt components: instruction template, worked examples,
    and the known-actions list available for decompositions."""

    instructions: str
    examples: tuple[dict, ...]
    known_actions: tuple[str, ...]

    def __post_init__(self):
        if not self.known_actions:
            raise ConfigError("known_actions must be non-empty")
        if SCHEMA_LINE.split(":")[0] not in self.instructions:
            raise ConfigError("instructions are missing the JSON schema line")
        # dedupe while preserving order
        seen, unique = set(), []
        for a in self.known_actions:
            if a not in seen:
                seen.add(a)
                unique.append(a)
        object.__setattr__(self, "known_actions", tuple(unique))
        object.__setattr__(self, "examples", tuple(self.examples))


def default_prompt_bundle(known_actions: list[str] | tuple[str, ...]) -> PromptBundle:
    instructions = _load_asset("instructions.txt")
    examples = tuple(json.loads(_load_asset("decomposition_examples.json")))
    return PromptBundle(instructions=instructions, examples=examples, known_actions=tuple(known_actions))


def build_prompt(bundle: PromptBundle, input_text: str, duration_s: float) -> dict:
    """Chat-completion messages embedding the instructions verbatim, the
    serialized examples, the known-actions list, and the input annotation
    with its (0, duration) time bounds. Byte-deterministic."""
    examples_block = "\n".join(json.dumps(e, sort_keys=True) for e in bundle.examples)
    known_block = "\n".join(bundle.known_actions)
    system = (
        f"{bundle.instructions.rstrip()}\n\n"
        f"# known_actions\n{known_block}\n\n"
        f"# decomposition_examples\n{examples_block}\n"
    )
    user = json.dumps({"text": input_text, "start": 0, "end": duration_s}, sort_keys=True)
    return {
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ]
    }


# ---------------------------------------------------------------------------
# LLM backend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LlmConfig:
    endpoint: str
    model: str
    credential_env: str = "MOCOMP_LLM_API_KEY"
    timeout_s: float = 30.0
    max_retries: int = 2

    def __post_init__(self):
        if self.max_retries < 0:
            raise ConfigError(f"max_retries must be >= 0, got {self.max_retries}")


_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```\s*$", re.DOTALL)


def _strip_code_fences(text: str) -> str:
    m = _FENCE_RE.match(text.strip())
    return m.group(1) if m else text


def _post_chat(config: LlmConfig, api_key: str, messages: list[dict]) -> str:
    payload = {"model": config.model, "messages": messages, "temperature": 0}
    req = urllib.request.Request(
        config.endpoint,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json", "Authorization": f"Bearer {api_key}"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(req, timeout=config.timeout_s) as resp:
            body = resp.read()
    except (urllib.error.URLError, socket.timeout, TimeoutError, ConnectionError, OSError) as exc:
        raise TransportError(f"LLM endpoint {config.endpoint} unreachable: {exc}") from exc
    try:
        data = json.loads(body.decode())
        return data["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError, UnicodeDecodeError) as exc:
        raise MalformedResponseError(f"endpoint returned no chat completion content: {exc}") from exc


def _parse_decomposition_json(content: str) -> list[dict]:
    content = _strip_code_fences(content)
    try:
        data = json.loads(content)
    except json.JSONDecodeError as exc:
        raise MalformedResponseError(f"response is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "decomposition" not in data:
        raise MalformedResponseError('response JSON is missing the "decomposition" key')
    items = data["decomposition"]
    if not isinstance(items, list):
        raise MalformedResponseError('"decomposition" must be a list')
    return items


def decompose_llm(
    config: LlmConfig,
    bundle: PromptBundle,
    input_text: str,
    duration_s: float,
    min_duration_s: float = DEFAULT_MIN_DURATION_S,
) -> Decomposition:
    """Ask the endpoint for a decomposition, validate, and retry with the
    violation list appended until it passes or max_retries is spent."""
    api_key = os.environ.get(config.credential_env)
    if not api_key:
        raise ConfigError(f"credential environment variable {config.credential_env} is not set")
    messages = list(build_prompt(bundle, input_text, duration_s)["messages"])
    last_errors: list[Violation] = []
    for _ in range(config.max_retries + 1):
        content = _post_chat(config, api_key, messages)
        items = _parse_decomposition_json(content)
        violations = validate_decomposition({"decomposition": items}, duration_s, min_duration_s)
        last_errors = errors_only(violations)
        if not last_errors:
            return decomposition_from_items(items, duration_s)
        messages.append({"role": "assistant", "content": content})
        messages.append(
            {
                "role": "user",
                "content": "The decomposition violates these constraints:\n"
                + "\n".join(str(v) for v in last_errors)
                + "\nProvide a corrected JSON decomposition.",
            }
        )
    raise ValidationExhaustedError(
        f"no valid decomposition after {config.max_retries + 1} attempts", last_errors
    )


# ---------------------------------------------------------------------------
# Rule-based backend
# ---------------------------------------------------------------------------

_CANON_RE = re.compile(r"[^a-z0-9 ]+")


def canonicalize(text: str) -> str:
    return " ".join(_CANON_RE.sub(" ", text.lower()).split())


@dataclass(frozen=True)
class RuleTable:
    """Deterministic decomposer: complex label -> timed basic components,
    with intervals as fractions of the requested duration."""

    rules: dict[str, tuple[tuple[str, float, float], ...]]
    known_actions: tuple[str, ...] = ()

    def __post_init__(self):
        if self.known_actions:
            known = set(self.known_actions)
            for key, comps in self.rules.items():
                for label, _, _ in comps:
                    if label not in known:
                        raise ConfigError(f"rule {key!r} references unknown action {label!r}")


def default_rule_table(
    composites: tuple[CompositeSpec, ...] = DEFAULT_COMPOSITES,
    known_actions: tuple[str, ...] = (),
) -> RuleTable:
    rules: dict[str, tuple[tuple[str, float, float], ...]] = {}
    for comp in composites:
        for key in comp.annotations:
            rules[canonicalize(key)] = comp.components
    return RuleTable(rules=rules, known_actions=tuple(known_actions))


def decompose_rules(table: RuleTable, input_text: str, duration_s: float) -> Decomposition:
    """Scale the matched rule's interval fractions by the duration. Pure."""
    key = canonicalize(input_text)
    if key not in table.rules:
        raise UnknownActionError(f"no decomposition rule for {input_text!r}")
    items = tuple(
        SubMovement(text=label, interval=TimeInterval(f0 * duration_s, f1 * duration_s))
        for label, f0, f1 in table.rules[key]
    )
    return Decomposition(items=items, total_duration_s=duration_s)
