"""BM25-indexed store of verified (instruction, expression) examples."""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass


@dataclass(frozen=True)
class InContextExample:
    instruction: str
    expression: str
    token_length: int


def tokenize(text: str) -> list[str]:
    return re.findall(r"\w+", text.lower())


class ExampleStore:
    """At most one example per instruction, ranked by Okapi BM25 over
    lowercase word tokens.

    Uses the non-negative idf variant log(1 + (N - df + 0.5)/(df + 0.5)),
    so a shared rare term always outranks no overlap.
    """

    def __init__(self, k1: float = 1.5, b: float = 0.75):
        self.k1 = k1
        self.b = b
        self._examples: dict[str, InContextExample] = {}
        self._order: dict[str, int] = {}  # insertion order, for tie-breaks
        self._next_rank = 0
        self._index_dirty = True
        self._doc_tokens: dict[str, Counter] = {}
        self._idf: dict[str, float] = {}
        self._avgdl = 0.0

    def __len__(self) -> int:
        return len(self._examples)

    def __contains__(self, instruction: str) -> bool:
        return instruction in self._examples

    def get(self, instruction: str) -> InContextExample | None:
        return self._examples.get(instruction)

    def instructions(self) -> list[str]:
        return sorted(self._examples, key=lambda k: self._order[k])

    def add(self, example: InContextExample) -> None:
        if example.instruction not in self._order:
            self._order[example.instruction] = self._next_rank
            self._next_rank += 1
        self._examples[example.instruction] = example
        self._index_dirty = True

    def _rebuild(self) -> None:
        self._doc_tokens = {
            k: Counter(tokenize(k)) for k in self._examples
        }
        n = len(self._doc_tokens)
        df = Counter()
        for tf in self._doc_tokens.values():
            df.update(tf.keys())
        self._idf = {
            t: math.log(1.0 + (n - d + 0.5) / (d + 0.5)) for t, d in df.items()
        }
        total = sum(sum(tf.values()) for tf in self._doc_tokens.values())
        self._avgdl = total / n if n else 0.0
        self._index_dirty = False

    def score(self, query: str, instruction: str) -> float:
        if self._index_dirty:
            self._rebuild()
        tf = self._doc_tokens[instruction]
        dl = sum(tf.values())
        norm = self.k1 * (1 - self.b + self.b * dl / self._avgdl)
        s = 0.0
        for t in tokenize(query):
            f = tf.get(t, 0)
            if f == 0:
                continue
            s += self._idf[t] * f * (self.k1 + 1) / (f + norm)
        return s

    def retrieve(self, query: str, k: int) -> list[InContextExample]:
        """Top-k by BM25 score; ties resolve by insertion order."""
        if not self._examples:
            return []
        ranked = sorted(
            self._examples,
            key=lambda ins: (-self.score(query, ins), self._order[ins]),
        )
        return [self._examples[ins] for ins in ranked[:k]]

    # -- persistence (JSON lines, reloadable mid-run) -----------------------

    def dump(self, path: str) -> None:
        with open(path, "w") as f:
            for ins in self.instructions():
                ex = self._examples[ins]
                f.write(json.dumps(
                    {"instruction": ex.instruction, "expression": ex.expression}
                ) + "\n")

    @classmethod
    def load(cls, path: str, k1: float = 1.5, b: float = 0.75) -> "ExampleStore":
        from .boolexpr import expr_length, parse

        store = cls(k1=k1, b=b)
        with open(path) as f:
            for line in f:
                if not line.strip():
                    continue
                doc = json.loads(line)
                expr = parse(doc["expression"])
                store.add(InContextExample(
                    doc["instruction"], doc["expression"], expr_length(expr)
                ))
        return store
