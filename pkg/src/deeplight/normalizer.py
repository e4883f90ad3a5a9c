"""Token Normalization and the fixed model input vocabulary.

Slot 0 is padding. Slots ``[1, 1+S)`` hold one id per shared rule. Each language then
gets a region as wide as its whole token-type inventory, so a type's fallback id is
``base + type_id`` whether or not normalization is on. With TN off the shared region
is reserved but never produced, which keeps SL and SL+TN models the same width.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .frontends import LanguageId, Token, manifest as frontend_manifest

DEFAULT_TOTAL_SIZE = 315
PAD_ID = 0

Manifest = Mapping[str, Sequence[Mapping]]


class VocabularyOverflow(ValueError):
    def __init__(self, needed: int, total_size: int):
        self.needed = needed
        self.total_size = total_size
        self.deficit = needed - total_size
        super().__init__(f"vocabulary needs {needed} slots but total_size is {total_size} "
                         f"(short by {self.deficit})")


class UnknownTokenType(KeyError):
    pass


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizationRule:
    shared_id: int
    name: str
    members: tuple[tuple[str, int], ...]


def load_rules_json(text: str) -> list[dict]:
    data = json.loads(text)
    rules = data["rules"] if isinstance(data, dict) else data
    if not isinstance(rules, list):
        raise RuleError("rule table must be a list")
    return rules


def default_rules() -> list[dict]:
    return load_rules_json(resources.files("deeplight.data").joinpath("tn_rules.json").read_text("utf-8"))


def read_rules(path: str | Path) -> list[dict]:
    return load_rules_json(Path(path).read_text(encoding="utf-8"))


def compile_rules(rules: Sequence[Mapping], manifest: Manifest) -> list[NormalizationRule]:
    """Resolve rule members given by type name into (lang, type_id) pairs."""
    names = {lang: {t["name"]: t["type_id"] for t in types} for lang, types in manifest.items()}
    seen: dict[tuple[str, int], str] = {}
    out = []
    for i, rule in enumerate(rules):
        members = []
        for lang, type_names in rule["members"].items():
            if lang not in names:
                raise RuleError(f"rule {rule['name']!r}: unknown language {lang!r}")
            if isinstance(type_names, str):
                type_names = [type_names]
            for tname in type_names:
                if tname not in names[lang]:
                    raise RuleError(f"rule {rule['name']!r}: {lang} has no token type {tname!r}")
                key = (lang, names[lang][tname])
                if key in seen:
                    raise RuleError(f"{lang}.{tname} appears in rules {seen[key]!r} and {rule['name']!r}")
                seen[key] = rule["name"]
                members.append(key)
        if not members:
            raise RuleError(f"rule {rule['name']!r} has no members")
        out.append(NormalizationRule(1 + i, rule["name"], tuple(members)))
    return out


class Vocabulary:
    """Immutable id layout plus one lookup table per language."""

    def __init__(self, total_size: int, shared_size: int, bases: dict[str, int], counts: dict[str, int],
                 rules: list[NormalizationRule], tn_enabled: bool):
        self.total_size = total_size
        self.pad_id = PAD_ID
        self.shared_size = shared_size
        self.bases = dict(bases)
        self.counts = dict(counts)
        self.rules = tuple(rules)
        self.tn_enabled = tn_enabled
        self._tables: dict[str, np.ndarray] = {}
        for lang, base in bases.items():
            table = np.arange(base, base + counts[lang], dtype=np.int32)
            if tn_enabled:
                for rule in rules:
                    for rlang, type_id in rule.members:
                        if rlang == lang:
                            table[type_id] = rule.shared_id
            table.setflags(write=False)
            self._tables[lang] = table

    @property
    def shared_region(self) -> tuple[int, int]:
        return 1, 1 + self.shared_size

    def table(self, lang: "LanguageId | str") -> np.ndarray:
        key = lang.value if isinstance(lang, LanguageId) else lang
        try:
            return self._tables[key]
        except KeyError:
            raise UnknownTokenType(f"language {key!r} not in vocabulary") from None

    def layout(self) -> dict:
        return {
            "total_size": self.total_size,
            "pad_id": self.pad_id,
            "shared_size": self.shared_size,
            "tn_enabled": self.tn_enabled,
            "languages": [{"lang": l, "base": self.bases[l], "count": self.counts[l]} for l in self.bases],
            "rules": [{"shared_id": r.shared_id, "name": r.name, "members": [list(m) for m in r.members]}
                      for r in self.rules],
        }

    def layout_json(self) -> str:
        return json.dumps(self.layout(), sort_keys=True, separators=(",", ":"))

    def layout_hash(self) -> str:
        return hashlib.sha256(self.layout_json().encode("utf-8")).hexdigest()

    def max_id(self) -> int:
        return max(int(t.max()) for t in self._tables.values())


def build_vocabulary(manifest: Manifest | None = None, rules: Sequence[Mapping] | None = None,
                     tn_enabled: bool = True, total_size: int = DEFAULT_TOTAL_SIZE) -> Vocabulary:
    manifest = frontend_manifest() if manifest is None else manifest
    rules = default_rules() if rules is None else rules
    compiled = compile_rules(rules, manifest)
    shared = len(compiled)
    bases, counts = {}, {}
    cursor = 1 + shared
    for lang in manifest:
        bases[lang] = cursor
        counts[lang] = len(manifest[lang])
        cursor += counts[lang]
    if cursor > total_size:
        raise VocabularyOverflow(cursor, total_size)
    return Vocabulary(total_size, shared, bases, counts, compiled, tn_enabled)


def encode_token(vocab: Vocabulary, lang, type_id: int) -> int:
    table = vocab.table(lang)
    if not 0 <= type_id < len(table):
        raise UnknownTokenType(f"type id {type_id} out of range for {lang}")
    return int(table[type_id])


def encode_types(vocab: Vocabulary, lang, type_ids: np.ndarray) -> np.ndarray:
    table = vocab.table(lang)
    if type_ids.size and (type_ids.min() < 0 or type_ids.max() >= len(table)):
        raise UnknownTokenType(f"type id out of range for {lang}")
    return table[type_ids]


def encode_sequence(vocab: Vocabulary, lang, tokens: Iterable[Token]) -> np.ndarray:
    ids = np.fromiter((t.type_id for t in tokens), dtype=np.int64)
    return encode_types(vocab, lang, ids)


def vocabulary_from_layout(layout: Mapping) -> Vocabulary:
    rules = [NormalizationRule(r["shared_id"], r["name"], tuple((m[0], int(m[1])) for m in r["members"]))
             for r in layout["rules"]]
    bases = {e["lang"]: e["base"] for e in layout["languages"]}
    counts = {e["lang"]: e["count"] for e in layout["languages"]}
    return Vocabulary(layout["total_size"], layout["shared_size"], bases, counts, rules, layout["tn_enabled"])


