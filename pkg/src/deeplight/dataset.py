"""Oracle datasets: corpora, folds, multi-language merges, few-shot draws, snippets, JSONL I/O."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import frontends
from .frontends import LanguageId, Span, Token
from .hc import N_CLASSES

DESK_CORPUS_SIZE = 2000
FULL_CORPUS_SIZE = 20000
DESK_SNIPPETS_PER_FOLD = 200
FULL_SNIPPETS_PER_FOLD = 5000
DEFAULT_LENGTH_DIST = (6.0, 3.0, 1, 20)
FEWSHOT_SIZES = (10, 30, 50)
N_FOLDS = 3


class CorpusTooSmall(ValueError):
    pass


class EmptySource(ValueError):
    pass


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class LeakageError(AssertionError):
    pass


def derive_seed(seed: int, *names: object) -> int:
    """Stable sub-seed for a named random stream."""
    text = ":".join([str(seed), *map(str, names)])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


@dataclass(frozen=True)
class Origin:
    id: str
    from_line: int
    to_line: int


@dataclass(eq=False)
class LabeledSequence:
    lang: str
    sample_id: str
    tokens: list[Token]
    labels: list[int]
    invalid: bool = False
    origin: Origin | None = None

    def __post_init__(self):
        if len(self.tokens) != len(self.labels):
            raise ValueError(f"{self.sample_id}: {len(self.tokens)} tokens but {len(self.labels)} labels")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledSequence):
            return NotImplemented
        return (self.lang, self.sample_id, self.tokens, list(self.labels), self.invalid, self.origin) == (
            other.lang, other.sample_id, other.tokens, list(other.labels), other.invalid, other.origin)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def text(self) -> str:
        return "".join(t.text for t in self.tokens)

    @cached_property
    def type_ids(self) -> np.ndarray:
        return np.fromiter((t.type_id for t in self.tokens), dtype=np.int64, count=len(self.tokens))

    @cached_property
    def label_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)

    @cached_property
    def mask(self) -> np.ndarray:
        return np.fromiter((not t.is_whitespace for t in self.tokens), dtype=bool, count=len(self.tokens))


@dataclass(frozen=True)
class FoldSplit:
    fold: int
    train: tuple[str, ...]
    validation: tuple[str, ...]
    test: tuple[str, ...]
    snippets: tuple[str, ...] = ()


@dataclass(frozen=True)
class FewShotSubset:
    lang: str
    fold: int
    size: int
    ids: tuple[str, ...]


def sample_id(lang: str, index: int) -> str:
    return f"{lang}-{index:05d}"


def build_language_corpus(lang, count: int, seed: int, depth_budget: int = frontends.DEFAULT_DEPTH
                          ) -> list[LabeledSequence]:
    lang = LanguageId.parse(lang).value
    samples = frontends.build_corpus(lang, count, seed, depth_budget)
    return [LabeledSequence(lang, sample_id(lang, i), s.tokens, s.labels) for i, s in enumerate(samples)]


# -- folds --------------------------------------------------------------------------

def split_sizes(n: int) -> tuple[int, int, int]:
    """(test, train, validation) per fold: floor 33% test, floor 10% of the rest for validation."""
    test = n * 33 // 100
    rest = n - test
    val = rest * 10 // 100
    return test, rest - val, val


def split_folds(ids: Sequence[str], n_folds: int = N_FOLDS, seed: int = 0) -> list[FoldSplit]:
    """Disjoint test blocks of a seeded permutation; everything else trains or validates.

    With floor rounding, ``n - n_folds * test`` items land in no test set; they are
    training data in every fold.
    """
    n = len(ids)
    if n == 0:
        raise CorpusTooSmall("corpus is empty")
    if len(set(ids)) != n:
        raise ValueError("duplicate sample ids")
    test_n, train_n, val_n = split_sizes(n)
    if min(test_n, train_n, val_n) == 0:
        raise CorpusTooSmall(f"{n} samples give test/train/validation = {test_n}/{train_n}/{val_n}")
    if n_folds * test_n > n:
        raise CorpusTooSmall(f"{n_folds} disjoint test sets of {test_n} do not fit in {n} samples")
    perm = list(ids)
    random.Random(derive_seed(seed, "folds")).shuffle(perm)
    out = []
    for k in range(n_folds):
        test = perm[k * test_n:(k + 1) * test_n]
        rest = perm[:k * test_n] + perm[(k + 1) * test_n:]
        random.Random(derive_seed(seed, "validation", k)).shuffle(rest)
        out.append(FoldSplit(k, tuple(rest[val_n:]), tuple(rest[:val_n]), tuple(test)))
    return out


# -- multi-language and few-shot ----------------------------------------------------

def merge_multilang(train_sets: Mapping[str, Sequence[LabeledSequence]], fold: int, seed: int
                    ) -> list[LabeledSequence]:
    """Concatenate per-language training sets in registration order, then shuffle."""
    order = [l.value for l in frontends.LANGUAGES if l.value in train_sets]
    order += [l for l in train_sets if l not in order]
    stream = [s for lang in order for s in train_sets[lang]]
    random.Random(derive_seed(seed, "merge", fold)).shuffle(stream)
    return stream


def sample_fewshot(train_ids: Sequence[str], size: int, seed: int) -> list[str]:
    """``size`` uniform draws with replacement."""
    if not train_ids:
        raise EmptySource("few-shot source is empty")
    if size < 1:
        raise ValueError("size must be >= 1")
    return random.Random(seed).choices(list(train_ids), k=size)


# -- snippets -----------------------------------------------------------------------

def _window_length(rng: random.Random, dist: Sequence[float]) -> int:
    mean, std, lo, hi = dist
    return int(min(max(round(rng.gauss(mean, std)), lo), hi))


def slice_lines(seq: LabeledSequence, from_line: int, to_line: int) -> tuple[list[Token], list[int]]:
    """Tokens that start inside the inclusive line window, with their labels."""
    toks, labs = [], []
    for t, y in zip(seq.tokens, seq.labels):
        if from_line <= t.span.line <= to_line:
            toks.append(t)
            labs.append(y)
    return toks, labs


def line_count(seq: LabeledSequence) -> int:
    return max((t.span.line for t in seq.tokens), default=0)


def generate_snippets(test_set: Sequence[LabeledSequence], count: int, length_dist: Sequence[float] = DEFAULT_LENGTH_DIST,
                      seed: int = 0, id_prefix: str = "snip") -> list[LabeledSequence]:
    if count < 1:
        raise ValueError("count must be >= 1")
    pool = [s for s in test_set if s.tokens]
    if not pool:
        raise EmptySource("no test samples to cut snippets from")
    mean, std, lo, hi = length_dist
    if not 1 <= lo <= hi:
        raise ValueError("length bounds must satisfy 1 <= min <= max")
    rng = random.Random(seed)
    out: list[LabeledSequence] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 100 * count:
            raise EmptySource("could not cut non-empty snippets from the test set")
        src = rng.choice(pool)
        n_lines = line_count(src)
        length = min(_window_length(rng, length_dist), n_lines)
        start = rng.randint(1, n_lines - length + 1)
        end = start + length - 1
        toks, labs = slice_lines(src, start, end)
        if not any(not t.is_whitespace for t in toks):
            continue
        out.append(LabeledSequence(src.lang, f"{id_prefix}-{len(out):05d}", toks, labs, True,
                                   Origin(src.sample_id, start, end)))
    return out


# -- audits -------------------------------------------------------------------------

def audit_leakage(split: FoldSplit, extra_train: Iterable[str] = (),
                  snippets: Iterable[LabeledSequence] = ()) -> None:
    test = set(split.test)
    for name, ids in (("train", split.train), ("validation", split.validation), ("few-shot", extra_train)):
        leaked = test.intersection(ids)
        if leaked:
            raise LeakageError(f"fold {split.fold}: {len(leaked)} {name} ids in test, e.g. {sorted(leaked)[0]}")
    if set(split.train) & set(split.validation):
        raise LeakageError(f"fold {split.fold}: train and validation overlap")
    for s in snippets:
        if s.origin is None or s.origin.id not in test:
            raise LeakageError(f"fold {split.fold}: snippet {s.sample_id} not cut from a test sample")


# -- per-language bundle ------------------------------------------------------------

@dataclass
class LanguageDataset:
    lang: str
    seed: int
    corpus: list[LabeledSequence]
    folds: list[FoldSplit]
    snippets: list[list[LabeledSequence]]
    length_dist: tuple = DEFAULT_LENGTH_DIST
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {s.sample_id: s for s in self.corpus}

    def get(self, ids: Iterable[str]) -> list[LabeledSequence]:
        return [self._index[i] for i in ids]

    def train(self, fold: int) -> list[LabeledSequence]:
        return self.get(self.folds[fold].train)

    def validation(self, fold: int) -> list[LabeledSequence]:
        return self.get(self.folds[fold].validation)

    def test(self, fold: int) -> list[LabeledSequence]:
        return self.get(self.folds[fold].test)

    def fewshot(self, fold: int, size: int) -> FewShotSubset:
        ids = sample_fewshot(self.folds[fold].train, size, derive_seed(self.seed, self.lang, "fewshot", fold, size))
        return FewShotSubset(self.lang, fold, size, tuple(ids))

    def audit(self) -> None:
        for split, snips in zip(self.folds, self.snippets):
            audit_leakage(split, snippets=snips)


def build_language_dataset(lang, count: int = DESK_CORPUS_SIZE, seed: int = 7, n_folds: int = N_FOLDS,
                           snippets_per_fold: int = DESK_SNIPPETS_PER_FOLD,
                           length_dist: Sequence[float] = DEFAULT_LENGTH_DIST) -> LanguageDataset:
    lang = LanguageId.parse(lang).value
    corpus = build_language_corpus(lang, count, seed)
    splits = split_folds([s.sample_id for s in corpus], n_folds, derive_seed(seed, lang))
    index = {s.sample_id: s for s in corpus}
    snippets, folds = [], []
    for split in splits:
        snips = generate_snippets([index[i] for i in split.test], snippets_per_fold, length_dist,
                                  derive_seed(seed, lang, "snippets", split.fold),
                                  id_prefix=f"{lang}-f{split.fold}-snip")
        snippets.append(snips)
        folds.append(FoldSplit(split.fold, split.train, split.validation, split.test,
                               tuple(s.sample_id for s in snips)))
    ds = LanguageDataset(lang, seed, corpus, folds, snippets, tuple(length_dist))
    ds.audit()
    return ds


# -- JSON Lines ---------------------------------------------------------------------

def _record(s: LabeledSequence) -> dict:
    return {
        "lang": s.lang,
        "id": s.sample_id,
        "invalid": s.invalid,
        "origin": None if s.origin is None else
        {"id": s.origin.id, "from_line": s.origin.from_line, "to_line": s.origin.to_line},
        "tokens": [{"t": t.type_id, "x": t.text, "w": t.is_whitespace, "l": t.span.line, "c": t.span.col}
                   for t in s.tokens],
        "y": [int(y) for y in s.labels],
    }


def dumps_record(s: LabeledSequence) -> str:
    return json.dumps(_record(s), ensure_ascii=False, separators=(",", ":"))


def _parse_record(obj: object) -> LabeledSequence:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    origin = obj["origin"]
    if origin is not None:
        origin = Origin(str(origin["id"]), int(origin["from_line"]), int(origin["to_line"]))
    tokens = []
    for tok in obj["tokens"]:
        text = tok["x"]
        if not isinstance(text, str):
            raise ValueError("token text must be a string")
        tokens.append(Token(int(tok["t"]), text, Span(int(tok["l"]), int(tok.get("c", 0)), len(text)), bool(tok["w"])))
    labels = [int(y) for y in obj["y"]]
    if any(not 0 <= y < N_CLASSES for y in labels):
        raise ValueError("label out of range")
    if not isinstance(obj["invalid"], bool):
        raise ValueError("'invalid' must be a boolean")
    return LabeledSequence(str(obj["lang"]), str(obj["id"]), tokens, labels, obj["invalid"], origin)


def write_dataset(path: str | Path, seqs: Iterable[LabeledSequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in seqs:
            fh.write(dumps_record(s))
            fh.write("\n")


def read_dataset(path: str | Path) -> list[LabeledSequence]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.endswith("\n"):
                raise FormatError("missing line terminator", lineno)
            try:
                out.append(_parse_record(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise FormatError(str(exc) or type(exc).__name__, lineno) from None
    return out


def write_language_dataset(ds: LanguageDataset, out_dir: str | Path) -> list[Path]:
    root = Path(out_dir) / ds.lang
    root.mkdir(parents=True, exist_ok=True)
    written = [root / "corpus.jsonl"]
    write_dataset(written[0], ds.corpus)
    for split, snips in zip(ds.folds, ds.snippets):
        p = root / f"snippets-fold{split.fold}.jsonl"
        write_dataset(p, snips)
        written.append(p)
    fewshot = {str(k): {str(n): list(ds.fewshot(k, n).ids) for n in FEWSHOT_SIZES} for k in range(len(ds.folds))}
    manifest = {
        "lang": ds.lang,
        "seed": ds.seed,
        "count": len(ds.corpus),
        "length_dist": list(ds.length_dist),
        "folds": [{"fold": f.fold, "train": list(f.train), "validation": list(f.validation),
                   "test": list(f.test), "snippets": list(f.snippets)} for f in ds.folds],
        "fewshot": fewshot,
    }
    p = root / "manifest.json"
    p.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    written.append(p)
    return written


def read_language_dataset(root: str | Path, lang) -> LanguageDataset:
    lang = LanguageId.parse(lang).value
    base = Path(root) / lang
    try:
        manifest = json.loads((base / "manifest.json").read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{base / 'manifest.json'}: {exc.msg}", exc.lineno) from None
    corpus = read_dataset(base / "corpus.jsonl")
    folds, snippets = [], []
    for f in manifest["folds"]:
        folds.append(FoldSplit(f["fold"], tuple(f["train"]), tuple(f["validation"]), tuple(f["test"]),
                               tuple(f["snippets"])))
        snippets.append(read_dataset(base / f"snippets-fold{f['fold']}.jsonl"))
    return LanguageDataset(lang, manifest["seed"], corpus, folds, snippets, tuple(manifest["length_dist"]))
