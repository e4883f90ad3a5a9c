"""Language registry: dispatch lex/parse/resolve/generate by language id."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from types import ModuleType
from typing import Callable, Sequence

from . import minicee, minijay, minisnake
from .base import AstNode, ParseError, Span, Token, TokenTypes


class LanguageId(str, enum.Enum):
    MINIJAY = "minijay"
    MINISNAKE = "minisnake"
    MINICEE = "minicee"

    @property
    def index(self) -> int:
        return _ORDER.index(self)

    @classmethod
    def parse(cls, value: "LanguageId | str") -> "LanguageId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown language {value!r}; expected one of {[l.value for l in cls]}") from None


_ORDER = (LanguageId.MINIJAY, LanguageId.MINISNAKE, LanguageId.MINICEE)
LANGUAGES = _ORDER


class GenerationExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class Frontend:
    lang: LanguageId
    module: ModuleType

    @property
    def types(self) -> TokenTypes:
        return self.module.TYPES

    @property
    def token_type_count(self) -> int:
        return len(self.module.TYPES)

    def lex(self, source: str) -> list[Token]:
        return self.module.lex(source)

    def parse(self, tokens: Sequence[Token]) -> AstNode:
        return self.module.parse(tokens)

    def resolve(self, tokens: Sequence[Token], ast: AstNode) -> list[int]:
        return self.module.resolve(tokens, ast)

    def generate(self, seed: int, depth_budget: int, weights=None) -> str:
        return self.module.generate(seed, depth_budget, weights)


_FRONTENDS = {
    LanguageId.MINIJAY: Frontend(LanguageId.MINIJAY, minijay),
    LanguageId.MINISNAKE: Frontend(LanguageId.MINISNAKE, minisnake),
    LanguageId.MINICEE: Frontend(LanguageId.MINICEE, minicee),
}


def get(lang: "LanguageId | str") -> Frontend:
    return _FRONTENDS[LanguageId.parse(lang)]


def lex(lang, source: str) -> list[Token]:
    return get(lang).lex(source)


def parse(lang, tokens: Sequence[Token]) -> AstNode:
    return get(lang).parse(tokens)


def bf_resolve(lang, tokens: Sequence[Token], ast: AstNode) -> list[int]:
    return get(lang).resolve(tokens, ast)


def generate_program(lang, seed: int, depth_budget: int) -> str:
    return get(lang).generate(seed, depth_budget)


def manifest() -> dict[str, list[dict]]:
    """Token-type inventory per language, in registration order."""
    return {
        lang.value: [
            {"type_id": t.type_id, "name": t.name, "is_whitespace": t.is_whitespace}
            for t in get(lang).types.types
        ]
        for lang in _ORDER
    }


def manifest_json() -> str:
    return json.dumps(manifest(), indent=2) + "\n"


def sequence_key(tokens: Sequence[Token]) -> bytes:
    h = hashlib.sha256()
    for t in tokens:
        h.update(f"{t.type_id}\x00{t.text}\x01".encode("utf-8"))
    return h.digest()


@dataclass
class OracleSample:
    """One generated program with its lexer, parser and resolver outputs."""

    lang: LanguageId
    seed: int
    source: str
    tokens: list[Token]
    labels: list[int]


DEFAULT_DEPTH = 3


def build_corpus(lang, count: int, seed: int, depth_budget: int = DEFAULT_DEPTH,
                 generator: Callable[[int, int], str] | None = None) -> list[OracleSample]:
    """``count`` syntactically distinct labeled programs, ordered by generation seed.

    Program seeds are derived as ``seed * 1_000_003 + attempt`` so corpora built with
    different seeds draw from disjoint seed streams.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    fe = get(lang)
    gen = generator or fe.generate
    seen: set[bytes] = set()
    out: list[OracleSample] = []
    limit = 100 * count
    attempt = 0
    while len(out) < count:
        if attempt >= limit:
            raise GenerationExhausted(
                f"{fe.lang.value}: only {len(out)} unique programs after {limit} attempts")
        program_seed = seed * 1_000_003 + attempt
        attempt += 1
        source = gen(program_seed, depth_budget)
        tokens = fe.lex(source)
        key = sequence_key(tokens)
        if key in seen:
            continue
        ast = fe.parse(tokens)
        seen.add(key)
        out.append(OracleSample(fe.lang, program_seed, source, tokens, fe.resolve(tokens, ast)))
    return out


__all__ = [
    "AstNode", "Frontend", "GenerationExhausted", "LANGUAGES", "LanguageId", "OracleSample",
    "ParseError", "Span", "Token", "bf_resolve", "build_corpus", "generate_program", "get", "lex",
    "manifest", "manifest_json", "parse", "sequence_key",
]
