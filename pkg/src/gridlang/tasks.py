"""The 162-task suite: instructions, ground-truth expressions, denotations.

18 (color, shape) pairs x 8 two-attribute templates, plus 9 attributes x 2
single-attribute templates: 144 + 18 = 162 tasks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .boolexpr import And, BoolExpr, Not, Or, SymbolMap, Var, denotation, to_text
from .objects import Attribute, Color, ObjectSpec, Shape


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    instruction: str
    truth_expr: BoolExpr
    denotation: frozenset[ObjectSpec]


@dataclass(frozen=True)
class TaskSplit:
    train: tuple[TaskSpec, ...]
    test: tuple[TaskSpec, ...]
    seed: int


def _pair_templates(c: str, s: str) -> list[tuple[str, str]]:
    """(instruction, expression pattern) per two-attribute template; the
    pattern uses C/S placeholders resolved to symbols by the caller."""
    return [
        (f"pick up a {c} {s}", "C & S"),
        (f"pick up a {s} that is not {c}", "~C & S"),
        (f"pick up a {c} object that is not a {s}", "C & ~S"),
        (f"pick up an object that is not {c} and not a {s}", "~C & ~S"),
        (f"pick up a {s} or a {c} object", "C | S"),
        (f"pick up a {s} or an object that is not {c}", "~C | S"),
        (f"pick up a {c} object or not a {s}", "C | ~S"),
        (f"pick up an object that is not {c} or not a {s}", "~C | ~S"),
    ]


def _build(pattern: str, c_sym: int, s_sym: int) -> BoolExpr:
    neg_c = pattern.startswith("~C")
    neg_s = "~S" in pattern
    left: BoolExpr = Not(Var(c_sym)) if neg_c else Var(c_sym)
    right: BoolExpr = Not(Var(s_sym)) if neg_s else Var(s_sym)
    return Or(left, right) if "|" in pattern else And(left, right)


def generate_tasks(symbol_map: SymbolMap) -> list[TaskSpec]:
    tasks = []
    for color in Color:
        for shape in Shape:
            c_sym = symbol_map.symbol(Attribute(color=color))
            s_sym = symbol_map.symbol(Attribute(shape=shape))
            c, s = color.name.lower(), shape.name.lower()
            for t_i, (instruction, pattern) in enumerate(_pair_templates(c, s)):
                expr = _build(pattern, c_sym, s_sym)
                tasks.append(
                    TaskSpec(
                        task_id=f"pair-{c}-{s}-{t_i}",
                        instruction=instruction,
                        truth_expr=expr,
                        denotation=denotation(expr, symbol_map),
                    )
                )
    for color in Color:
        c = color.name.lower()
        sym = symbol_map.symbol(Attribute(color=color))
        for t_i, (instruction, expr) in enumerate(
            [
                (f"pick up a {c} object", Var(sym)),
                (f"pick up an object that is not {c}", Not(Var(sym))),
            ]
        ):
            tasks.append(
                TaskSpec(
                    task_id=f"single-{c}-{t_i}",
                    instruction=instruction,
                    truth_expr=expr,
                    denotation=denotation(expr, symbol_map),
                )
            )
    for shape in Shape:
        s = shape.name.lower()
        sym = symbol_map.symbol(Attribute(shape=shape))
        for t_i, (instruction, expr) in enumerate(
            [
                (f"pick up a {s}", Var(sym)),
                (f"pick up an object that is not a {s}", Not(Var(sym))),
            ]
        ):
            tasks.append(
                TaskSpec(
                    task_id=f"single-{s}-{t_i}",
                    instruction=instruction,
                    truth_expr=expr,
                    denotation=denotation(expr, symbol_map),
                )
            )
    return tasks


def split_tasks(suite: list[TaskSpec], seed: int) -> TaskSplit:
    if len(suite) % 2 != 0:
        raise ValueError("suite size must be even")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(suite))
    half = len(suite) // 2
    train = tuple(suite[i] for i in sorted(order[:half]))
    test = tuple(suite[i] for i in sorted(order[half:]))
    return TaskSplit(train=train, test=test, seed=seed)


def sample_task(tasks, rng: np.random.Generator) -> TaskSpec:
    if not tasks:
        raise ValueError("task set is empty")
    return tasks[rng.integers(len(tasks))]


def suite_to_json(suite: list[TaskSpec]) -> str:
    docs = [
        {
            "task_id": t.task_id,
            "instruction": t.instruction,
            "expression": to_text(t.truth_expr),
            "denotation": [
                {"color": o.color.name.lower(), "shape": o.shape.name.lower()}
                for o in sorted(t.denotation)
            ],
        }
        for t in suite
    ]
    return json.dumps(docs, indent=2)
