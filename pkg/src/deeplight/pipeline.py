"""Training scenarios, the evaluation metric, and the experiment grid."""

from __future__ import annotations

import csv
import io
import logging
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import mean
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import nn
from .dataset import (FEWSHOT_SIZES, LabeledSequence, LanguageDataset, audit_leakage, derive_seed,
                      merge_multilang)
from .frontends import LANGUAGES
from .hc import CoverageTask, TASKS, adapt_array, task_table
from .normalizer import Vocabulary, build_vocabulary, encode_types

log = logging.getLogger(__name__)

SCHEDULE = ((2, 1e-3), (2, 1e-4))
KINDS = ("SL", "ML", "FS")
SPLITS = ("valid", "snippets")
CSV_COLUMNS = ("scenario", "size", "tn", "fold", "train_langs", "eval_lang", "task", "split", "n_tokens", "accuracy")


class EmptyEvalSet(ValueError):
    pass


def lr_trace(schedule: Sequence[tuple[int, float]] = SCHEDULE) -> list[float]:
    return [lr for epochs, lr in schedule for _ in range(epochs)]


# -- scenarios ----------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    kind: str
    size: int = 32
    tn: bool = False
    base_lang: str | None = None
    shots: int | None = None
    fold: int = 0
    task: str = "T4"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.size not in nn.MODEL_SIZES:
            raise ValueError(f"size must be one of {nn.MODEL_SIZES}")
        if self.kind in ("SL", "FS") and not self.base_lang:
            raise ValueError(f"{self.kind} needs a base language")
        if self.kind == "FS" and not self.shots:
            raise ValueError("FS needs a shot count")
        CoverageTask.parse(self.task)

    @property
    def name(self) -> str:
        """Canonical family name, e.g. ``SL32+TN``, ``ML128``, ``10-FS32+TN-minijay``."""
        core = f"{self.kind}{self.size}{'+TN' if self.tn else ''}"
        if self.kind == "FS":
            return f"{self.shots}-{core}-{self.base_lang}"
        return core

    @property
    def model_name(self) -> str:
        parts = [self.name]
        if self.kind == "SL":
            parts.append(self.base_lang)
        parts.append(f"fold{self.fold}")
        if CoverageTask.parse(self.task) is not CoverageTask.T4:
            parts.append(CoverageTask.parse(self.task).value)
        return "-".join(parts)

    @property
    def file_name(self) -> str:
        return self.model_name + ".dlsh"

    def base(self) -> "Scenario":
        """The SL scenario an FS scenario fine-tunes from."""
        return replace(self, kind="SL", shots=None)

    def model_seed(self) -> int:
        return derive_seed(self.seed, "model", self.kind, self.size, self.tn, self.base_lang, self.shots,
                           self.fold, self.task) % (2 ** 32)


# -- encoded data -------------------------------------------------------------------

@dataclass
class Encoded:
    """Model-ready arrays for one sequence: input ids, labels under a task, metric mask."""

    sample_id: str
    lang: str
    ids: np.ndarray
    labels: np.ndarray
    mask: np.ndarray


def encode(seqs: Iterable[LabeledSequence], vocab: Vocabulary, task="T4") -> list[Encoded]:
    table = task_table(task)
    out = []
    for s in seqs:
        ids = encode_types(vocab, s.lang, s.type_ids)
        out.append(Encoded(s.sample_id, s.lang, ids, table[s.label_array], s.mask))
    return out


class EncodedCache:
    """Encodings shared across the cells of one grid unit."""

    def __init__(self, datasets: Mapping[str, LanguageDataset], vocab: Vocabulary, task: str):
        self.datasets = datasets
        self.vocab = vocab
        self.task = task
        self._by_id: dict[tuple[str, str], Encoded] = {}
        self._snippets: dict[tuple[str, int], list[Encoded]] = {}

    def get(self, lang: str, ids: Iterable[str]) -> list[Encoded]:
        ds = self.datasets[lang]
        out = []
        for sid in ids:
            enc = self._by_id.get((lang, sid))
            if enc is None:
                enc = encode([ds.get([sid])[0]], self.vocab, self.task)[0]
                self._by_id[(lang, sid)] = enc
            out.append(enc)
        return out

    def snippets(self, lang: str, fold: int) -> list[Encoded]:
        key = (lang, fold)
        if key not in self._snippets:
            self._snippets[key] = encode(self.datasets[lang].snippets[fold], self.vocab, self.task)
        return self._snippets[key]


# -- training -----------------------------------------------------------------------

@dataclass
class EpochLog:
    epoch: int
    lr: float
    loss: float
    val_accuracy: float | None


def train(model: nn.CnnShModel, stream: Sequence[Encoded], seed: int,
          schedule: Sequence[tuple[int, float]] = SCHEDULE, validation: Sequence[Encoded] = (),
          task="T4", shuffle: bool = True) -> list[EpochLog]:
    """Per-sequence Adam over ``stream`` under the fixed learning-rate schedule.

    The stream is reshuffled every epoch from a seeded rng. Validation is monitored
    only; it never changes the schedule.
    """
    state = nn.AdamState.for_model(model)
    rng = np.random.default_rng(seed)
    order_rng = random.Random(seed)
    history = []
    for epoch, lr in enumerate(lr_trace(schedule)):
        order = list(range(len(stream)))
        if shuffle:
            order_rng.shuffle(order)
        total, count = 0.0, 0
        for i in order:
            item = stream[i]
            loss, grads = nn.loss_and_grad(model, item.ids, item.labels, item.mask, rng)
            nn.adam_step(model, grads, state, lr)
            total += loss
            count += 1
        model.check_finite()
        val = accuracy(model, validation, task) if validation else None
        history.append(EpochLog(epoch, lr, total / max(count, 1), val))
        log.debug("epoch %d lr=%g loss=%.4f val=%s", epoch, lr, total / max(count, 1), val)
    return history


def new_model(scenario: Scenario, vocab: Vocabulary) -> nn.CnnShModel:
    return nn.CnnShModel.init(nn.ModelConfig(vocab_size=vocab.total_size, hidden=scenario.size,
                                             seed=scenario.model_seed()))


def train_sl(datasets: Mapping[str, LanguageDataset], scenario: Scenario, vocab: Vocabulary,
             cache: EncodedCache | None = None, schedule=SCHEDULE) -> tuple[nn.CnnShModel, list[EpochLog]]:
    cache = cache or EncodedCache(datasets, vocab, scenario.task)
    ds = datasets[scenario.base_lang]
    split = ds.folds[scenario.fold]
    model = new_model(scenario, vocab)
    hist = train(model, cache.get(ds.lang, split.train), scenario.model_seed(), schedule,
                 cache.get(ds.lang, split.validation), scenario.task)
    return model, hist


def train_ml(datasets: Mapping[str, LanguageDataset], scenario: Scenario, vocab: Vocabulary,
             cache: EncodedCache | None = None, schedule=SCHEDULE) -> tuple[nn.CnnShModel, list[EpochLog]]:
    cache = cache or EncodedCache(datasets, vocab, scenario.task)
    k = scenario.fold
    per_lang = {lang: ds.train(k) for lang, ds in datasets.items()}
    merged = merge_multilang(per_lang, k, derive_seed(scenario.seed, "ml"))
    stream = [cache.get(s.lang, [s.sample_id])[0] for s in merged]
    validation = [e for lang, ds in datasets.items() for e in cache.get(lang, ds.folds[k].validation)]
    model = new_model(scenario, vocab)
    hist = train(model, stream, scenario.model_seed(), schedule, validation, scenario.task)
    return model, hist


def fewshot_stream(datasets: Mapping[str, LanguageDataset], scenario: Scenario) -> dict[str, list[str]]:
    out = {}
    for lang, ds in datasets.items():
        if lang == scenario.base_lang:
            continue
        subset = ds.fewshot(scenario.fold, scenario.shots)
        audit_leakage(ds.folds[scenario.fold], extra_train=subset.ids)
        out[lang] = list(subset.ids)
    return out


def finetune_fs(base: nn.CnnShModel, datasets: Mapping[str, LanguageDataset], scenario: Scenario,
                vocab: Vocabulary, cache: EncodedCache | None = None, schedule=SCHEDULE,
                base_layout_hash: str | None = None) -> tuple[nn.CnnShModel, list[EpochLog]]:
    if base_layout_hash is not None and base_layout_hash != vocab.layout_hash():
        raise nn.VocabularyMismatch("base model and few-shot data use different vocabulary layouts")
    cache = cache or EncodedCache(datasets, vocab, scenario.task)
    shots = fewshot_stream(datasets, scenario)
    stream = [e for lang, ids in shots.items() for e in cache.get(lang, ids)]
    random.Random(derive_seed(scenario.seed, "fs", scenario.fold, scenario.base_lang)).shuffle(stream)
    validation = [e for lang in shots for e in cache.get(lang, datasets[lang].folds[scenario.fold].validation)]
    model = base.copy()
    hist = train(model, stream, scenario.model_seed(), schedule, validation, scenario.task)
    return model, hist


# -- evaluation ---------------------------------------------------------------------

def predict_items(model: nn.CnnShModel, items: Sequence[Encoded]) -> list[np.ndarray]:
    return nn.predict_batch(model, [e.ids for e in items])


def count_correct(preds: Sequence[np.ndarray], items: Sequence[Encoded], task="T4") -> tuple[int, int]:
    """(correct, total) over non-whitespace tokens, both sides adapted to ``task``."""
    table = task_table(task)
    correct = total = 0
    for e, p in zip(items, preds):
        m = e.mask
        correct += int(np.count_nonzero(table[p[m]] == table[e.labels[m]]))
        total += int(np.count_nonzero(m))
    return correct, total


def counts(model: nn.CnnShModel, items: Sequence[Encoded], task="T4") -> tuple[int, int]:
    return count_correct(predict_items(model, items), items, task)


def accuracy(model: nn.CnnShModel, items: Sequence[Encoded], task="T4") -> float:
    correct, total = counts(model, items, task)
    if total == 0:
        raise EmptyEvalSet("no non-whitespace tokens to evaluate")
    return correct / total


def evaluate(model: nn.CnnShModel, seqs: Sequence[LabeledSequence], task, vocab: Vocabulary) -> float:
    if not seqs:
        raise EmptyEvalSet("evaluation set is empty")
    return accuracy(model, encode(seqs, vocab, "T4"), task)


def score_predictions(preds: Sequence[np.ndarray], seqs: Sequence[LabeledSequence], task) -> tuple[int, int]:
    """Metric core on raw predictions, for checking the counting rule in isolation."""
    correct = total = 0
    for p, s in zip(preds, seqs):
        m = s.mask
        correct += int(np.count_nonzero(adapt_array(np.asarray(p)[m], task) == adapt_array(s.label_array[m], task)))
        total += int(np.count_nonzero(m))
    return correct, total


# -- grid ---------------------------------------------------------------------------

@dataclass
class Cell:
    scenario: str
    size: int
    tn: bool
    fold: int
    train_langs: str
    eval_lang: str
    task: str
    split: str
    n_tokens: int
    accuracy: float | None
    error: str | None = None

    def row(self) -> list[str]:
        acc = "" if self.accuracy is None else f"{self.accuracy:.6f}"
        return [self.scenario, str(self.size), "1" if self.tn else "0", str(self.fold), self.train_langs,
                self.eval_lang, self.task, self.split, str(self.n_tokens), acc]


@dataclass
class Plan:
    langs: tuple[str, ...] = tuple(l.value for l in LANGUAGES)
    kinds: tuple[str, ...] = KINDS
    sizes: tuple[int, ...] = (32,)
    tn: tuple[bool, ...] = (False, True)
    folds: tuple[int, ...] = (0, 1, 2)
    tasks: tuple[str, ...] = tuple(t.value for t in TASKS)
    shots: tuple[int, ...] = FEWSHOT_SIZES
    splits: tuple[str, ...] = SPLITS
    projected: bool = False
    seed: int = 0
    schedule: tuple[tuple[int, float], ...] = SCHEDULE

    def __post_init__(self):
        if not (self.langs and self.kinds and self.sizes and self.tn and self.folds and self.tasks and self.splits):
            raise ValueError("empty plan")
        if "FS" in self.kinds and not self.shots:
            raise ValueError("FS requested without shot counts")
        if any(k not in KINDS for k in self.kinds):
            raise ValueError(f"kinds must be drawn from {KINDS}")
        if any(s not in SPLITS for s in self.splits):
            raise ValueError(f"splits must be drawn from {SPLITS}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "Plan":
        kw = dict(d)
        for key in ("langs", "kinds", "sizes", "tn", "folds", "tasks", "shots", "splits"):
            if key in kw:
                kw[key] = tuple(kw[key])
        if "schedule" in kw:
            kw["schedule"] = tuple((int(e), float(lr)) for e, lr in kw["schedule"])
        return cls(**kw)

    def train_tasks(self) -> tuple[str, ...]:
        return ("T4",) if self.projected else self.tasks

    def eval_tasks(self, train_task: str) -> tuple[str, ...]:
        return self.tasks if self.projected else (train_task,)

    def units(self) -> list[tuple[int, str, bool, int]]:
        return [(fold, task, tn, size) for fold in self.folds for task in self.train_tasks()
                for tn in self.tn for size in self.sizes]

    def expected_cells(self) -> int:
        n_langs = len(self.langs)
        per_unit = 0
        if "SL" in self.kinds:
            per_unit += n_langs
        if "ML" in self.kinds:
            per_unit += 1
        if "FS" in self.kinds:
            per_unit += n_langs * len(self.shots)
        evals = n_langs * len(self.splits) * (len(self.tasks) if self.projected else 1)
        return len(self.units()) * per_unit * evals


def _task_label(train_task: str, eval_task: str, projected: bool) -> str:
    return f"{eval_task}@{train_task}" if projected else eval_task


def _eval_cells(model: nn.CnnShModel, scenario: Scenario, train_langs: str, plan: Plan,
                cache: EncodedCache) -> list[Cell]:
    cells = []
    for lang in plan.langs:
        ds = cache.datasets[lang]
        for split in plan.splits:
            items = cache.get(lang, ds.folds[scenario.fold].test) if split == "valid" else cache.snippets(lang, scenario.fold)
            try:
                preds = predict_items(model, items)
            except Exception as exc:  # recorded, grid continues
                preds, failure = None, f"{type(exc).__name__}: {exc}"
            for task in plan.eval_tasks(scenario.task):
                label = _task_label(scenario.task, task, plan.projected)
                correct, total = count_correct(preds, items, task) if preds is not None else (0, 0)
                if preds is not None and total > 0:
                    cells.append(Cell(scenario.name, scenario.size, scenario.tn, scenario.fold, train_langs, lang,
                                      label, split, total, correct / total))
                else:
                    error = failure if preds is None else "EmptyEvalSet: no non-whitespace tokens"
                    cells.append(Cell(scenario.name, scenario.size, scenario.tn, scenario.fold, train_langs, lang,
                                      label, split, 0, None, error))
    return cells


def _failed_cells(scenario: Scenario, train_langs: str, plan: Plan, exc: Exception) -> list[Cell]:
    msg = f"{type(exc).__name__}: {exc}"
    return [Cell(scenario.name, scenario.size, scenario.tn, scenario.fold, train_langs, lang,
                 _task_label(scenario.task, task, plan.projected), split, 0, None, msg)
            for lang in plan.langs for split in plan.splits for task in plan.eval_tasks(scenario.task)]


@dataclass
class UnitResult:
    cells: list[Cell]
    timings: dict[str, float] = field(default_factory=dict)
    models: dict[str, bytes] = field(default_factory=dict)


def run_unit(datasets: Mapping[str, LanguageDataset], plan: Plan, unit: tuple[int, str, bool, int],
             model_dir: str | None = None) -> UnitResult:
    """Train and evaluate every scenario sharing one (fold, task, tn, size)."""
    fold, task, tn, size = unit
    vocab = build_vocabulary(tn_enabled=tn)
    layout_hash = vocab.layout_hash()
    datasets = {lang: datasets[lang] for lang in plan.langs}
    cache = EncodedCache(datasets, vocab, task)
    result = UnitResult([])

    def save(model: nn.CnnShModel, sc: Scenario, hist: list[EpochLog]) -> None:
        if model_dir is None:
            return
        Path(model_dir).mkdir(parents=True, exist_ok=True)
        meta = {"scenario": sc.name, "task": sc.task, "fold": sc.fold, "tn": sc.tn,
                "val_accuracy": [h.val_accuracy for h in hist]}
        nn.save_model(Path(model_dir) / sc.file_name, model, layout_hash, meta)
        (Path(model_dir) / (sc.model_name + ".layout.json")).write_text(vocab.layout_json() + "\n")

    sl_models: dict[str, nn.CnnShModel] = {}
    base_langs = plan.langs if ("SL" in plan.kinds or "FS" in plan.kinds) else ()
    for lang in base_langs:
        sc = Scenario("SL", size, tn, lang, None, fold, task, plan.seed)
        t0 = time.perf_counter()
        try:
            model, hist = train_sl(datasets, sc, vocab, cache, plan.schedule)
        except Exception as exc:
            log.exception("training %s failed", sc.model_name)
            if "SL" in plan.kinds:
                result.cells.extend(_failed_cells(sc, lang, plan, exc))
            continue
        result.timings[sc.model_name] = time.perf_counter() - t0
        sl_models[lang] = model
        save(model, sc, hist)
        if "SL" in plan.kinds:
            result.cells.extend(_eval_cells(model, sc, lang, plan, cache))
    if "FS" in plan.kinds:
        for lang in plan.langs:
            for shots in plan.shots:
                sc = Scenario("FS", size, tn, lang, shots, fold, task, plan.seed)
                others = "+".join(f"{shots}:{o}" for o in plan.langs if o != lang)
                train_langs = f"{lang}+{others}"
                if lang not in sl_models:
                    result.cells.extend(_failed_cells(sc, train_langs, plan, RuntimeError("base model missing")))
                    continue
                try:
                    model, hist = finetune_fs(sl_models[lang], datasets, sc, vocab, cache, plan.schedule)
                except Exception as exc:
                    log.exception("fine-tuning %s failed", sc.model_name)
                    result.cells.extend(_failed_cells(sc, train_langs, plan, exc))
                    continue
                save(model, sc, hist)
                result.cells.extend(_eval_cells(model, sc, train_langs, plan, cache))
    if "ML" in plan.kinds:
        sc = Scenario("ML", size, tn, None, None, fold, task, plan.seed)
        train_langs = "+".join(plan.langs)
        t0 = time.perf_counter()
        try:
            model, hist = train_ml(datasets, sc, vocab, cache, plan.schedule)
            result.timings[sc.model_name] = time.perf_counter() - t0
            save(model, sc, hist)
            result.cells.extend(_eval_cells(model, sc, train_langs, plan, cache))
        except Exception as exc:
            log.exception("training %s failed", sc.model_name)
            result.cells.extend(_failed_cells(sc, train_langs, plan, exc))
    return result


def jobs_from_env(default: int = 1) -> int:
    raw = os.environ.get("DEEPLIGHT_JOBS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"DEEPLIGHT_JOBS must be an integer, got {raw!r}") from None


def run_grid(datasets: Mapping[str, LanguageDataset], plan: Plan, out_dir: str | Path | None = None,
             jobs: int | None = None, save_models: bool = False,
             progress: Callable[[str], None] | None = None) -> list[Cell]:
    for lang in plan.langs:
        if lang not in datasets:
            raise KeyError(f"no dataset for {lang}")
        datasets[lang].audit()
    jobs = jobs_from_env() if jobs is None else jobs
    model_dir = str(Path(out_dir) / "models") if (out_dir is not None and save_models) else None
    units = plan.units()
    results: list[UnitResult]
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_unit, datasets, plan, u, model_dir) for u in units]
            results = [f.result() for f in futures]
    else:
        results = []
        for u in units:
            t0 = time.perf_counter()
            results.append(run_unit(datasets, plan, u, model_dir))
            if progress:
                progress(f"fold={u[0]} task={u[1]} tn={u[2]} size={u[3]} done in {time.perf_counter() - t0:.1f}s")
    cells = [c for r in results for c in r.cells]
    if out_dir is not None:
        write_reports(cells, plan, out_dir)
    return cells


# -- reports ------------------------------------------------------------------------

def cells_csv(cells: Iterable[Cell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in cells:
        w.writerow(c.row())
    return buf.getvalue()


def read_cells_csv(text: str) -> list[Cell]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [Cell(r["scenario"], int(r["size"]), r["tn"] == "1", int(r["fold"]), r["train_langs"], r["eval_lang"],
                 r["task"], r["split"], int(r["n_tokens"]), float(r["accuracy"]) if r["accuracy"] else None)
            for r in rows]


def fold_means(cells: Iterable[Cell]) -> dict[tuple, float]:
    """Arithmetic mean over folds per (scenario, size, tn, train_langs, eval_lang, task, split)."""
    groups: dict[tuple, list[float]] = {}
    for c in cells:
        if c.accuracy is None:
            continue
        key = (c.scenario, c.size, c.tn, c.train_langs, c.eval_lang, c.task, c.split)
        groups.setdefault(key, []).append(c.accuracy)
    return {k: mean(v) for k, v in groups.items()}


def base_lang_of(cell: Cell) -> str:
    return cell.train_langs.split("+")[0]


def rq1_summary(cells: Iterable[Cell]) -> dict[tuple, dict[str, float]]:
    """BASE and UNSEEN means for SL scenarios, keyed by (scenario, task, split)."""
    acc: dict[tuple, dict[str, list[float]]] = {}
    for c in cells:
        if not c.scenario.startswith("SL") or c.accuracy is None:
            continue
        kind = "BASE" if c.eval_lang == base_lang_of(c) else "UNSEEN"
        acc.setdefault((c.scenario, c.task, c.split), {}).setdefault(kind, []).append(c.accuracy)
    return {k: {kind: mean(v) for kind, v in d.items()} for k, d in acc.items()}


def family_of(cell: Cell) -> str:
    """Scenario family without the base language, e.g. ``10-FS32+TN``."""
    if "-FS" in cell.scenario:
        return cell.scenario.rsplit("-", 1)[0]
    return cell.scenario


def unseen_means(cells: Iterable[Cell]) -> dict[tuple, float]:
    """Mean over (base, target != base) cells per (family, task, split); ML uses all languages."""
    acc: dict[tuple, list[float]] = {}
    for c in cells:
        if c.accuracy is None:
            continue
        if not c.scenario.startswith("ML") and c.eval_lang == base_lang_of(c):
            continue
        acc.setdefault((family_of(c), c.task, c.split), []).append(c.accuracy)
    return {k: mean(v) for k, v in acc.items()}


def format_table(cells: Sequence[Cell], plan: Plan) -> str:
    """Model x language x task table of fold-mean accuracies (percent), valid and snippet splits."""
    means = fold_means(cells)
    tasks = sorted({c.task for c in cells}, key=lambda t: (t.split("@")[-1], t))
    lines = []
    for split in plan.splits:
        lines.append(f"== {split} ==")
        header = f"{'model':<28}{'train':<34}{'eval':<11}" + "".join(f"{t:>9}" for t in tasks)
        lines.append(header)
        rows = sorted({(k[0], k[1], k[2], k[3], k[4]) for k in means if k[6] == split},
                      key=lambda r: (r[1], r[0], r[3], r[4]))
        for scen, size, tn, train_langs, eval_lang in rows:
            vals = []
            for t in tasks:
                v = means.get((scen, size, tn, train_langs, eval_lang, t, split))
                vals.append(f"{100 * v:9.2f}" if v is not None else f"{'-':>9}")
            lines.append(f"{scen:<28}{train_langs[:33]:<34}{eval_lang:<11}" + "".join(vals))
        lines.append("")
    rq1 = rq1_summary(cells)
    if rq1:
        lines.append("== RQ1: SL models on their own language (BASE) and on the others (UNSEEN) ==")
        lines.append(f"{'model':<12}{'split':<10}{'row':<8}" + "".join(f"{t:>9}" for t in tasks))
        for scen in sorted({k[0] for k in rq1}):
            for split in plan.splits:
                for kind in ("BASE", "UNSEEN"):
                    vals = []
                    for t in tasks:
                        v = rq1.get((scen, t, split), {}).get(kind)
                        vals.append(f"{100 * v:9.2f}" if v is not None else f"{'-':>9}")
                    lines.append(f"{scen:<12}{split:<10}{kind:<8}" + "".join(vals))
        lines.append("")
    failed = [c for c in cells if c.error]
    if failed:
        lines.append(f"{len(failed)} cells failed; first: {failed[0].error}")
    return "\n".join(lines) + "\n"


def write_reports(cells: Sequence[Cell], plan: Plan, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(cells_csv(cells), encoding="utf-8")
    (out / "report.txt").write_text(format_table(cells, plan), encoding="utf-8")


# -- latency benchmark --------------------------------------------------------------

@dataclass
class BenchReport:
    hidden: int
    n_inputs: int
    n_tokens: int
    tokens_per_second: float
    p50_ms: float
    p99_ms: float

    def as_dict(self) -> dict:
        return {"hidden": self.hidden, "n_inputs": self.n_inputs, "n_tokens": self.n_tokens,
                "tokens_per_second": self.tokens_per_second, "p50_ms": self.p50_ms, "p99_ms": self.p99_ms}


def bench(model: nn.CnnShModel, inputs: Sequence[np.ndarray], repeats: int = 1) -> BenchReport:
    """Single-request latency: one forward + argmax per input, timed individually."""
    if not inputs:
        raise EmptyEvalSet("no benchmark inputs")
    lat = []
    for _ in range(repeats):
        for ids in inputs:
            t0 = time.perf_counter()
            nn.predict(model, ids)
            lat.append(time.perf_counter() - t0)
    n_tokens = sum(len(i) for i in inputs) * repeats
    total = sum(lat)
    arr = np.array(lat) * 1000
    return BenchReport(model.config.hidden, len(inputs), n_tokens, n_tokens / total if total > 0 else float("inf"),
                       float(np.percentile(arr, 50)), float(np.percentile(arr, 99)))


# -- on-the-fly highlighting --------------------------------------------------------

def highlight_labels(model: nn.CnnShModel, vocab: Vocabulary, lang: str, tokens: Sequence) -> list[int]:
    """Lexer tokens to predicted classes; no parsing anywhere on this path."""
    if not tokens:
        return []
    ids = encode_types(vocab, lang, np.fromiter((t.type_id for t in tokens), dtype=np.int64, count=len(tokens)))
    preds = nn.predict(model, ids)
    return [0 if t.is_whitespace else int(p) for t, p in zip(tokens, preds)]
