"""Highlight classes, macrogroups, coverage tasks and the task adapter."""

from __future__ import annotations

import enum
import json
from typing import Iterable, Sequence

import numpy as np


class InvalidLabel(ValueError):
    pass


class Macrogroup(str, enum.Enum):
    NONE = "None"
    LEXICAL = "Lexical"
    IDENTIFIER = "Identifier"
    DECLARATOR = "Declarator"
    ANNOTATION = "Annotation"


class HighlightClass(enum.IntEnum):
    UNHIGHLIGHTED = 0
    KEYWORD = 1
    LITERAL = 2
    CHAR_STRING_LITERAL = 3
    COMMENT = 4
    TYPE_IDENTIFIER = 5
    FUNCTION_IDENTIFIER = 6
    FIELD_IDENTIFIER = 7
    CLASS_DECLARATOR = 8
    FUNCTION_DECLARATOR = 9
    VARIABLE_DECLARATOR = 10
    ANNOTATION_DECLARATOR = 11

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def macrogroup(self) -> Macrogroup:
        return MACROGROUP_OF[self]


N_CLASSES = len(HighlightClass)

MACROGROUP_OF = {
    HighlightClass.UNHIGHLIGHTED: Macrogroup.NONE,
    HighlightClass.KEYWORD: Macrogroup.LEXICAL,
    HighlightClass.LITERAL: Macrogroup.LEXICAL,
    HighlightClass.CHAR_STRING_LITERAL: Macrogroup.LEXICAL,
    HighlightClass.COMMENT: Macrogroup.LEXICAL,
    HighlightClass.TYPE_IDENTIFIER: Macrogroup.IDENTIFIER,
    HighlightClass.FUNCTION_IDENTIFIER: Macrogroup.IDENTIFIER,
    HighlightClass.FIELD_IDENTIFIER: Macrogroup.IDENTIFIER,
    HighlightClass.CLASS_DECLARATOR: Macrogroup.DECLARATOR,
    HighlightClass.FUNCTION_DECLARATOR: Macrogroup.DECLARATOR,
    HighlightClass.VARIABLE_DECLARATOR: Macrogroup.DECLARATOR,
    HighlightClass.ANNOTATION_DECLARATOR: Macrogroup.ANNOTATION,
}


class CoverageTask(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"

    @property
    def macrogroups(self) -> frozenset[Macrogroup]:
        return TASK_MACROGROUPS[self]

    @classmethod
    def parse(cls, value: "str | CoverageTask") -> "CoverageTask":
        if isinstance(value, cls):
            return value
        return cls(str(value).upper())


# Cumulative in macrogroup order. Edit this one table to change task composition.
_GROUP_ORDER = (Macrogroup.LEXICAL, Macrogroup.IDENTIFIER, Macrogroup.DECLARATOR, Macrogroup.ANNOTATION)
TASK_MACROGROUPS = {
    task: frozenset(_GROUP_ORDER[: i + 1]) for i, task in enumerate(CoverageTask)
}

TASKS = tuple(CoverageTask)


def _build_table(task: CoverageTask) -> np.ndarray:
    table = np.zeros(N_CLASSES, dtype=np.int64)
    for hc in HighlightClass:
        if hc.macrogroup in task.macrogroups:
            table[hc] = hc
    table.setflags(write=False)
    return table


_TABLES = {task: _build_table(task) for task in CoverageTask}


def task_table(task: "CoverageTask | str") -> np.ndarray:
    """Lookup array mapping each T4 code to its code under ``task``."""
    return _TABLES[CoverageTask.parse(task)]


def adapt(labels: Iterable[int], task: "CoverageTask | str") -> list[int]:
    """Coarsen T4 labels to ``task``; out-of-task classes become unhighlighted."""
    table = task_table(task)
    out = []
    for code in labels:
        if not 0 <= code < N_CLASSES:
            raise InvalidLabel(f"label {code!r} outside [0, {N_CLASSES - 1}]")
        out.append(int(table[code]))
    return out


def adapt_array(labels: np.ndarray, task: "CoverageTask | str") -> np.ndarray:
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
        raise InvalidLabel(f"labels outside [0, {N_CLASSES - 1}]")
    return task_table(task)[labels]


def class_table() -> list[dict]:
    return [
        {"code": int(hc), "name": hc.label, "macrogroup": hc.macrogroup.value}
        for hc in HighlightClass
    ]


def class_table_json(indent: int | None = 2) -> str:
    doc = {
        "classes": class_table(),
        "tasks": {t.value: sorted(g.value for g in t.macrogroups) for t in CoverageTask},
    }
    return json.dumps(doc, indent=indent)


def class_names(codes: Sequence[int]) -> list[str]:
    return [HighlightClass(c).label for c in codes]
