"""Chat-model interface: prompt construction, an HTTP client speaking the
chat-completions wire format, and deterministic offline mocks."""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import requests

from .boolexpr import (
    And,
    BoolExpr,
    Not,
    Or,
    SymbolMap,
    Var,
    equivalent,
    parse,
    to_text,
)
from .objects import COLOR_WORDS, SHAPE_WORDS, Attribute, Color, Shape
from .retrieval import InContextExample, tokenize

log = logging.getLogger(__name__)

SYSTEM_PROMPT = (
    "We are going to map sentences to Boolean expressions. The Boolean "
    "expression variable Symbols are numbered 0 to 8, e.g. Symbol_0, "
    "Symbol_1... The operators are and : &, or : |, not : ~. I will now "
    "give a new sentence and you will come up with an expression. Now wait "
    "for a new sentence command. Respond with a list of 10 candidate "
    "Boolean expressions. Respond only with the list of Boolean "
    "expressions. Never say anything else."
)

MAX_EXAMPLE_TURNS = 10


@dataclass(frozen=True)
class ChatPrompt:
    system: str
    examples: tuple[tuple[str, str], ...]  # (user, assistant) turns
    command: str

    def messages(self) -> list[dict]:
        msgs = [{"role": "system", "content": self.system}]
        for user, assistant in self.examples:
            msgs.append({"role": "user", "content": user})
            msgs.append({"role": "assistant", "content": assistant})
        msgs.append({"role": "user", "content": self.command})
        return msgs


def build_prompt(instruction: str, examples: Sequence[InContextExample]) -> ChatPrompt:
    if len(examples) > MAX_EXAMPLE_TURNS:
        raise ValueError(f"at most {MAX_EXAMPLE_TURNS} example turns allowed")
    return ChatPrompt(
        system=SYSTEM_PROMPT,
        examples=tuple((ex.instruction, ex.expression) for ex in examples),
        command=instruction,
    )


class TransportError(RuntimeError):
    """Chat endpoint unreachable after bounded retries."""


class ChatModel:
    """complete() must return exactly n candidate strings."""

    def complete(self, prompt: ChatPrompt, n: int, temperature: float) -> list[str]:
        raise NotImplementedError


class HttpChatModel(ChatModel):
    """Client for an OpenAI-style chat-completions endpoint.

    Endpoint and token come from GRIDLANG_CHAT_BASE / GRIDLANG_CHAT_KEY
    (falling back to OPENAI_API_BASE / OPENAI_API_KEY). All requests and
    responses are logged; optionally appended to a JSON-lines transcript.
    """

    def __init__(
        self,
        model: str,
        base_url: Optional[str] = None,
        api_key: Optional[str] = None,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff: float = 1.0,
        transcript_path: Optional[str] = None,
    ):
        self.model = model
        self.base_url = (
            base_url
            or os.environ.get("GRIDLANG_CHAT_BASE")
            or os.environ.get("OPENAI_API_BASE")
            or "https://api.openai.com/v1"
        ).rstrip("/")
        self.api_key = (
            api_key
            or os.environ.get("GRIDLANG_CHAT_KEY")
            or os.environ.get("OPENAI_API_KEY", "")
        )
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.transcript_path = transcript_path

    def _log(self, payload: dict, response: dict | None, error: str | None) -> None:
        record = {"request": payload, "response": response, "error": error}
        log.debug("chat transport: %s", record)
        if self.transcript_path:
            with open(self.transcript_path, "a") as f:
                f.write(json.dumps(record) + "\n")

    def complete(self, prompt: ChatPrompt, n: int, temperature: float) -> list[str]:
        payload = {
            "model": self.model,
            "messages": prompt.messages(),
            "n": n,
            "temperature": temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error = None
        for attempt in range(self.max_retries):
            try:
                resp = requests.post(
                    f"{self.base_url}/chat/completions",
                    json=payload,
                    headers=headers,
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                doc = resp.json()
                self._log(payload, doc, None)
                return self._extract(doc, n)
            except (requests.RequestException, ValueError, KeyError) as exc:
                last_error = exc
                self._log(payload, None, str(exc))
                if attempt < self.max_retries - 1:
                    time.sleep(self.backoff * (2 ** attempt))
        raise TransportError(f"chat endpoint failed after retries: {last_error}")

    @staticmethod
    def _extract(doc: dict, n: int) -> list[str]:
        contents = [c["message"]["content"] for c in doc["choices"]]
        if len(contents) == 1 and n > 1:
            # single choice carrying a newline-separated candidate list
            lines = [l.strip() for l in contents[0].splitlines() if l.strip()]
            if len(lines) > 1:
                contents = lines
        contents = [c.strip() for c in contents]
        contents = contents[:n] + [""] * max(0, n - len(contents))
        return contents


# ---------------------------------------------------------------------------
# Offline mocks


class OracleMock(ChatModel):
    """Knows the ground-truth expression per instruction; each candidate is
    independently corrupted with probability `noise_rate` (operator flip,
    symbol swap, or an extra conjunct), regardless of temperature - the
    noise knob models parser quality, not sampling."""

    def __init__(
        self,
        truth: dict[str, str],
        noise_rate: float = 0.0,
        rng: np.random.Generator | None = None,
        symbol_map: SymbolMap | None = None,
    ):
        self.truth = dict(truth)
        self.noise_rate = noise_rate
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.symbol_map = symbol_map

    def complete(self, prompt: ChatPrompt, n: int, temperature: float) -> list[str]:
        truth = self.truth.get(prompt.command)
        if truth is None:
            return [""] * n
        return [
            self._corrupt(truth) if self.rng.random() < self.noise_rate else truth
            for _ in range(n)
        ]

    def _corrupt(self, text: str) -> str:
        # with a symbol map available, insist the corruption changes what the
        # expression denotes, not merely how it is written
        if self.symbol_map is not None:
            truth = parse(text)
            for _ in range(20):
                cand = self._corrupt_once(text)
                if not equivalent(parse(cand), truth, self.symbol_map):
                    return cand
            return cand
        return self._corrupt_once(text)

    def _corrupt_once(self, text: str) -> str:
        expr = parse(text)
        mode = self.rng.integers(3)
        if mode == 0:
            flipped = _flip_one_operator(expr, self.rng)
            if flipped is not None:
                return to_text(flipped)
            mode = self.rng.integers(1, 3)
        if mode == 1:
            return to_text(_swap_one_symbol(expr, self.rng))
        extra: BoolExpr = Var(int(self.rng.integers(9)))
        if self.rng.random() < 0.5:
            extra = Not(extra)
        return to_text(And(expr, extra))


def _flip_one_operator(expr: BoolExpr, rng: np.random.Generator) -> BoolExpr | None:
    ops = _binary_paths(expr)
    if not ops:
        return None
    return _flip_at(expr, ops[rng.integers(len(ops))])


def _binary_paths(expr: BoolExpr, path: tuple = ()) -> list[tuple]:
    if isinstance(expr, Var):
        return []
    if isinstance(expr, Not):
        return _binary_paths(expr.child, path + ("child",))
    found = [path]
    found += _binary_paths(expr.left, path + ("left",))
    found += _binary_paths(expr.right, path + ("right",))
    return found


def _flip_at(expr: BoolExpr, path: tuple) -> BoolExpr:
    if not path:
        assert isinstance(expr, (And, Or))
        cls = Or if isinstance(expr, And) else And
        return cls(expr.left, expr.right)
    head, rest = path[0], path[1:]
    if head == "child":
        assert isinstance(expr, Not)
        return Not(_flip_at(expr.child, rest))
    assert isinstance(expr, (And, Or))
    if head == "left":
        return type(expr)(_flip_at(expr.left, rest), expr.right)
    return type(expr)(expr.left, _flip_at(expr.right, rest))


def _swap_one_symbol(expr: BoolExpr, rng: np.random.Generator) -> BoolExpr:
    if isinstance(expr, Var):
        new = int(rng.integers(8))
        if new >= expr.index:
            new += 1
        return Var(new)
    if isinstance(expr, Not):
        return Not(_swap_one_symbol(expr.child, rng))
    if rng.random() < 0.5:
        return type(expr)(_swap_one_symbol(expr.left, rng), expr.right)
    return type(expr)(expr.left, _swap_one_symbol(expr.right, rng))


class HeuristicMock(ChatModel):
    """Keyword-rule parser that only trusts an attribute word it has seen in
    a retrieved in-context example's instruction; unseen words are guessed
    (randomly at temperature > 0), emulating learning from context."""

    def __init__(self, symbol_map: SymbolMap, rng: np.random.Generator | None = None):
        self.symbol_map = symbol_map
        self.rng = rng if rng is not None else np.random.default_rng(0)

    def _symbol_for(self, word: str, covered: set[str], temperature: float) -> int:
        if word in covered:
            if word in COLOR_WORDS:
                return self.symbol_map.symbol(Attribute(color=Color[word.upper()]))
            return self.symbol_map.symbol(Attribute(shape=Shape[word.upper()]))
        if temperature > 0:
            return int(self.rng.integers(9))
        return sum(ord(ch) for ch in word) % 9  # stable wrong-ish guess

    def complete(self, prompt: ChatPrompt, n: int, temperature: float) -> list[str]:
        instruction = prompt.command
        words = set(tokenize(instruction))
        color = next((w for w in COLOR_WORDS if w in words), None)
        shape = next((w for w in SHAPE_WORDS if w in words), None)
        covered = set()
        for user, _ in prompt.examples:
            covered.update(tokenize(user))

        out = []
        for _ in range(n):
            parts: list[BoolExpr] = []
            for word, negated in (
                (color, color is not None and f"not {color}" in instruction),
                (shape, shape is not None and f"not a {shape}" in instruction),
            ):
                if word is None:
                    continue
                node: BoolExpr = Var(self._symbol_for(word, covered, temperature))
                if negated:
                    node = Not(node)
                parts.append(node)
            if not parts:
                out.append("")
            elif len(parts) == 1:
                out.append(to_text(parts[0]))
            elif " or " in instruction:
                out.append(to_text(Or(parts[0], parts[1])))
            else:
                out.append(to_text(And(parts[0], parts[1])))
        return out
