"""Helpers shared by the grammar-directed program generators."""

from __future__ import annotations

import json
import random
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

CLASS_NAMES = (
    "Payment", "Account", "Order", "Node", "Tree", "Parser", "Buffer", "Config",
    "Client", "Server", "Item", "Cache", "Widget", "Record", "Matrix", "Vector",
    "Engine", "Stream", "Ledger", "Graph", "Queue", "Session", "Invoice", "Shape",
)
VAR_NAMES = (
    "x", "y", "i", "j", "n", "k", "count", "total", "value", "name", "data", "index",
    "size", "left", "right", "head", "tail", "result", "item", "key", "buf", "acc",
    "flag", "limit", "offset", "width", "height", "sum", "tmp", "cursor", "depth", "score",
)
FUNC_NAMES = (
    "get", "put", "run", "update", "compute", "parse", "build", "reset", "apply",
    "find", "add", "remove", "load", "save", "check", "process", "render", "merge",
    "split", "init", "flush", "scan", "visit", "emit", "resolve", "encode", "decode", "step",
)
ANNOTATION_NAMES = (
    "Override", "Deprecated", "Test", "Inject", "Nullable", "Cached", "Entity",
    "Retry", "Timed", "Memo", "Export", "Route",
)
GENERIC_NAMES = ("List", "Map", "Set", "Optional", "Box")
TYPE_PARAMS = ("T", "U", "K", "V", "E")
EXCEPTION_NAMES = ("IOError", "ParseError", "Timeout", "Failure", "KeyError", "ValueError")
MODULE_NAMES = ("os", "sys", "json", "util", "core.models", "app.config", "net.http", "io")
ENUM_NAMES = ("RED", "GREEN", "IDLE", "BUSY", "DONE", "FAIL", "LOW", "HIGH", "OPEN", "CLOSED", "MAX_LEN")
TYPEDEF_NAMES = ("Count", "Byte", "Handle", "Size", "Word", "Flags")
STRINGS = (
    "hello", "id", "", "error", "ok", "name=%s", "total: ", "\\n", "done", "a,b", "x", "path/to",
)
COMMENTS = (
    "TODO handle overflow", "fast path", "see below", "invariant: n >= 0", "cache the result",
    "keep in sync", "edge case", "default branch", "retry later", "note",
)


@lru_cache(maxsize=None)
def load_weights() -> dict:
    with resources.files("deeplight.data").joinpath("generator.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


class GenContext:
    """Random source plus the language's weight table for one generation run."""

    def __init__(self, lang: str, seed: int, weights: Mapping | None = None):
        self.rng = random.Random(f"{lang}:{seed}")
        self.w = weights if weights is not None else load_weights()[lang]

    def p(self, key: str) -> bool:
        return self.rng.random() < self.w[key]

    def count(self, key: str) -> int:
        lo, hi = self.w[key]
        return self.rng.randint(lo, hi)

    def pick(self, seq: Sequence):
        return self.rng.choice(seq)

    def weighted(self, table_key: str, exclude: Sequence[str] = ()) -> str:
        table = self.w[table_key]
        keys = [k for k in table if k not in exclude and table[k] > 0]
        return self.rng.choices(keys, weights=[table[k] for k in keys])[0]

    def int_lit(self) -> str:
        return str(self.rng.choice((0, 1, 2, 3, 7, 10, 16, 42, 100, 255, 1024)))


class Writer:
    def __init__(self, indent: str = "    "):
        self.lines: list[str] = []
        self.level = 0
        self.indent = indent

    def line(self, text: str) -> None:
        self.lines.append(self.indent * self.level + text)

    def blank(self) -> None:
        self.lines.append("")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"
