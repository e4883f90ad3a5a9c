"""deeplight command line: gen, train, eval, grid, highlight, bench."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Sequence

from . import dataset as D
from . import frontends, nn, pipeline as P
from .hc import TASKS
from .normalizer import (DEFAULT_TOTAL_SIZE, VocabularyOverflow, build_vocabulary, default_rules, read_rules,
                         vocabulary_from_layout)
from .render import DEFAULT_THEME, load_theme, render

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
LANG_NAMES = tuple(l.value for l in frontends.LANGUAGES)
TASK_NAMES = tuple(t.value for t in TASKS)

RQ_PRESETS: dict[int, dict[str, Any]] = {
    1: {"kinds": ("SL",), "tn": (False, True)},
    2: {"kinds": ("SL", "ML"), "tn": (False,)},
    3: {"kinds": ("SL", "FS", "ML"), "tn": (False,)},
    4: {"kinds": ("SL", "FS"), "tn": (False, True)},
}

log = logging.getLogger("deeplight")


class UsageError(Exception):
    pass


# -- settings: flags > env > config file > default --------------------------------

ENV_KEYS = {"data": "DEEPLIGHT_DATA", "seed": "DEEPLIGHT_SEED", "jobs": "DEEPLIGHT_JOBS", "rules": "DEEPLIGHT_RULES"}


def load_config(path: str | None) -> dict:
    path = path or os.environ.get("DEEPLIGHT_CONFIG")
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def setting(args: argparse.Namespace, key: str, config: dict, default=None, cast=str):
    value = getattr(args, key, None)
    source = "flag"
    if value is None and key in ENV_KEYS and os.environ.get(ENV_KEYS[key]):
        value, source = os.environ[ENV_KEYS[key]], "env"
    if value is None and key in config:
        value, source = config[key], "config"
    if value is None:
        value, source = default, "default"
    if value is not None and cast is not None:
        try:
            value = cast(value)
        except (TypeError, ValueError):
            raise UsageError(f"bad value for {key} from {source}: {value!r}") from None
    args.resolved[key] = value
    return value


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def length_dist(text: str) -> tuple[float, float, int, int]:
    try:
        mean, std, lo, hi = text.split(",")
        out = (float(mean), float(std), int(lo), int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError("expected MEAN,STD,MIN,MAX") from None
    if not 1 <= out[2] <= out[3]:
        raise argparse.ArgumentTypeError("need 1 <= MIN <= MAX")
    return out


def parse_langs(text: str) -> tuple[str, ...]:
    if text == "all":
        return LANG_NAMES
    langs = tuple(dict.fromkeys(t.strip() for t in text.split(",") if t.strip()))
    bad = [l for l in langs if l not in LANG_NAMES]
    if bad or not langs:
        raise argparse.ArgumentTypeError(f"languages must be 'all' or drawn from {', '.join(LANG_NAMES)}")
    return langs


def write_run_manifest(out_dir: Path, args: argparse.Namespace) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"command": args.command, "settings": {k: v for k, v in sorted(args.resolved.items())}}
    (out_dir / f"{args.command}.run.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def rules_for(args, config) -> list[dict]:
    path = setting(args, "rules", config, None)
    return default_rules() if path is None else read_rules(path)


# -- commands -----------------------------------------------------------------------

def cmd_gen(args, config) -> int:
    seed = setting(args, "seed", config, 7, int)
    out = Path(setting(args, "out", config, "data"))
    langs = args.langs
    count = args.count
    out.mkdir(parents=True, exist_ok=True)
    (out / "token_types.json").write_text(frontends.manifest_json(), encoding="utf-8")
    rows = []
    for lang in langs:
        ds = D.build_language_dataset(lang, count, seed, snippets_per_fold=args.snippets, length_dist=args.length_dist)
        D.write_language_dataset(ds, out)
        f0 = ds.folds[0]
        rows.append((lang, len(ds.corpus), len(f0.train), len(f0.validation), len(f0.test), len(ds.snippets[0])))
    args.resolved.update({"langs": list(langs), "count": count, "snippets": args.snippets,
                          "length_dist": list(args.length_dist)})
    write_run_manifest(out, args)
    print(f"{'lang':<11}{'corpus':>8}{'train':>8}{'val':>6}{'test':>6}{'snips':>7}   (per fold)")
    for r in rows:
        print(f"{r[0]:<11}{r[1]:>8}{r[2]:>8}{r[3]:>6}{r[4]:>6}{r[5]:>7}")
    return EXIT_OK


def _load_datasets(data: Path, langs: Sequence[str]) -> dict[str, D.LanguageDataset]:
    out = {}
    for lang in langs:
        if not (data / lang / "manifest.json").exists():
            raise FileNotFoundError(f"no dataset for {lang} under {data} (run 'deeplight gen' first)")
        out[lang] = D.read_language_dataset(data, lang)
    return out


def _vocab(tn: bool, rules) -> Any:
    return build_vocabulary(rules=rules, tn_enabled=tn, total_size=DEFAULT_TOTAL_SIZE)


def _save(model, sc: P.Scenario, vocab, hist, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    meta = {"scenario": sc.name, "kind": sc.kind, "base_lang": sc.base_lang, "shots": sc.shots, "fold": sc.fold,
            "task": sc.task, "tn": sc.tn, "val_accuracy": [h.val_accuracy for h in hist]}
    path = out / sc.file_name
    nn.save_model(path, model, vocab.layout_hash(), meta)
    (out / f"{sc.model_name}.layout.json").write_text(vocab.layout_json() + "\n", encoding="utf-8")
    (out / f"{sc.model_name}.log.json").write_text(json.dumps(
        [{"epoch": h.epoch, "lr": h.lr, "loss": h.loss, "val_accuracy": h.val_accuracy} for h in hist],
        indent=1) + "\n", encoding="utf-8")
    return path


def layout_path_for(model_path: Path) -> Path:
    return model_path.with_name(model_path.name[:-len(".dlsh")] + ".layout.json") \
        if model_path.name.endswith(".dlsh") else model_path.with_suffix(".layout.json")


def load_model_and_vocab(model_path: Path, layout: Path | None = None):
    layout = layout or layout_path_for(model_path)
    try:
        vocab = vocabulary_from_layout(json.loads(layout.read_text(encoding="utf-8")))
    except FileNotFoundError:
        raise FileNotFoundError(f"layout file {layout} not found") from None
    loaded = nn.load_model(model_path, vocab.layout_hash())
    return loaded, vocab


def cmd_train(args, config) -> int:
    data = Path(setting(args, "data", config, "data"))
    out = Path(setting(args, "out", config, "models"))
    seed = setting(args, "seed", config, 0, int)
    rules = rules_for(args, config)
    kind = args.kind.upper()
    if kind in ("SL", "FS") and not args.lang:
        raise UsageError(f"--kind {args.kind} needs --lang/--base")
    if kind == "FS" and not args.shots:
        raise UsageError("--kind fs needs --shots")
    sc = P.Scenario(kind, args.size, args.tn, args.lang if kind != "ML" else None,
                    args.shots if kind == "FS" else None, args.fold, args.task, seed)
    langs = LANG_NAMES if kind != "SL" else (args.lang,)
    datasets = _load_datasets(data, langs)
    for ds in datasets.values():
        ds.audit()
    vocab = _vocab(args.tn, rules)
    if kind == "SL":
        model, hist = P.train_sl(datasets, sc, vocab, schedule=P.SCHEDULE)
    elif kind == "ML":
        model, hist = P.train_ml(datasets, sc, vocab, schedule=P.SCHEDULE)
    else:
        base_path = out / sc.base().file_name
        if not base_path.exists():
            raise FileNotFoundError(f"base model {base_path} not found; train it with --kind sl first")
        loaded, base_vocab = load_model_and_vocab(base_path)
        model, hist = P.finetune_fs(loaded.model, datasets, sc, vocab, schedule=P.SCHEDULE,
                                    base_layout_hash=loaded.layout_hash)
    path = _save(model, sc, vocab, hist, out)
    args.resolved.update({"kind": kind, "size": args.size, "tn": args.tn, "lang": args.lang, "shots": args.shots,
                          "fold": args.fold, "task": args.task})
    write_run_manifest(out, args)
    for h in hist:
        val = "-" if h.val_accuracy is None else f"{100 * h.val_accuracy:.2f}%"
        print(f"epoch {h.epoch + 1}  lr={h.lr:g}  loss={h.loss:.4f}  val={val}")
    print(f"saved {path}")
    return EXIT_OK


def cmd_eval(args, config) -> int:
    data = Path(setting(args, "data", config, "data"))
    datasets = _load_datasets(data, args.langs)
    cells: list[P.Cell] = []
    for mp in args.model:
        loaded, vocab = load_model_and_vocab(Path(mp))
        meta = loaded.meta
        train_task = meta.get("task", "T4")
        sc_name = meta.get("scenario", Path(mp).stem)
        fold = int(meta.get("fold", args.fold if args.fold is not None else 0))
        train_langs = meta.get("base_lang") or "+".join(LANG_NAMES)
        cache = P.EncodedCache(datasets, vocab, train_task)
        for lang in args.langs:
            for split in args.splits:
                items = cache.get(lang, datasets[lang].folds[fold].test) if split == "valid" else cache.snippets(lang, fold)
                preds = P.predict_items(loaded.model, items)
                for task in args.tasks:
                    correct, total = P.count_correct(preds, items, task)
                    label = task if task == train_task else f"{task}@{train_task}"
                    cells.append(P.Cell(sc_name, loaded.model.config.hidden, bool(meta.get("tn", False)), fold,
                                        train_langs, lang, label, split, total, correct / total if total else None))
    text = P.cells_csv(cells)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def plan_from_args(args, config) -> P.Plan:
    base: dict[str, Any] = {}
    if args.plan:
        try:
            base = json.loads(Path(args.plan).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read plan {args.plan}: {exc}") from None
        if not base:
            raise UsageError("plan file is empty")
    if args.rq:
        base.update(RQ_PRESETS[args.rq])
    if not base and not any([args.kinds, args.sizes, args.tasks, args.folds]):
        raise UsageError("empty plan: pass --plan FILE or --rq N (optionally with --kinds/--sizes/...)")
    for key in ("kinds", "sizes", "folds", "tasks", "shots"):
        val = getattr(args, key)
        if val:
            base[key] = tuple(val)
    if args.langs:
        base["langs"] = tuple(args.langs)
    if args.projected:
        base["projected"] = True
    base["seed"] = setting(args, "seed", config, base.get("seed", 0), int)
    try:
        return P.Plan.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def cmd_grid(args, config) -> int:
    plan = plan_from_args(args, config)
    data = Path(setting(args, "data", config, "data"))
    out = Path(setting(args, "out", config, "grid"))
    jobs = setting(args, "jobs", config, 1, int)
    datasets = _load_datasets(data, plan.langs)
    cells = P.run_grid(datasets, plan, out, jobs=jobs, save_models=args.save_models,
                       progress=lambda m: print(m, file=sys.stderr))
    args.resolved["plan"] = {k: getattr(plan, k) for k in plan.__dataclass_fields__}
    write_run_manifest(out, args)
    sys.stdout.write(P.format_table(cells, plan))
    if cells and all(c.accuracy is None for c in cells):
        print("every cell failed", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_highlight(args, config) -> int:
    loaded, vocab = load_model_and_vocab(Path(args.model), Path(args.layout) if args.layout else None)
    theme = load_theme(args.theme) if args.theme else DEFAULT_THEME
    source = sys.stdin.read() if args.file == "-" else Path(args.file).read_text(encoding="utf-8")
    tokens = frontends.lex(args.lang, source)
    labels = P.highlight_labels(loaded.model, vocab, args.lang, tokens)
    sys.stdout.write(render(tokens, labels, args.format, theme))
    return EXIT_OK


def cmd_bench(args, config) -> int:
    data = Path(setting(args, "data", config, "data"))
    reports = []
    for mp in args.model:
        loaded, vocab = load_model_and_vocab(Path(mp))
        ds = D.read_language_dataset(data, args.lang)
        snippets = [s for fold in ds.snippets for s in fold][:args.count]
        if not snippets:
            raise D.EmptySource(f"no snippets for {args.lang}")
        inputs = [P.encode([s], vocab)[0].ids for s in snippets]
        rep = P.bench(loaded.model, inputs, repeats=args.repeats).as_dict()
        rep["model"] = str(mp)
        reports.append(rep)
    text = json.dumps({"lang": args.lang, "reports": reports}, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deeplight", description="On-the-fly syntax highlighting by learned abstraction.")
    p.add_argument("--config", help="JSON file with default settings (flags and env take precedence)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate corpora, folds, snippets and few-shot draws")
    g.add_argument("--langs", type=parse_langs, default=LANG_NAMES, help="'all' or a comma list")
    g.add_argument("--count", type=positive_int, default=D.DESK_CORPUS_SIZE)
    g.add_argument("--snippets", type=positive_int, default=D.DESK_SNIPPETS_PER_FOLD, help="snippets per fold")
    g.add_argument("--length-dist", type=length_dist, default=D.DEFAULT_LENGTH_DIST, help="MEAN,STD,MIN,MAX lines")
    g.add_argument("--seed", type=int)
    g.add_argument("--out")

    t = sub.add_parser("train", help="train one SL, ML or FS model")
    t.add_argument("--kind", choices=("sl", "ml", "fs"), required=True)
    t.add_argument("--size", type=int, choices=nn.MODEL_SIZES, default=32)
    t.add_argument("--tn", action="store_true", help="enable token normalization")
    t.add_argument("--lang", "--base", dest="lang", choices=LANG_NAMES)
    t.add_argument("--shots", type=positive_int)
    t.add_argument("--fold", type=int, choices=range(D.N_FOLDS), default=0)
    t.add_argument("--task", choices=TASK_NAMES, default="T4")
    t.add_argument("--data")
    t.add_argument("--out")
    t.add_argument("--seed", type=int)
    t.add_argument("--rules")

    e = sub.add_parser("eval", help="evaluate saved models")
    e.add_argument("--model", nargs="+", required=True)
    e.add_argument("--langs", type=parse_langs, default=LANG_NAMES)
    e.add_argument("--tasks", nargs="+", choices=TASK_NAMES, default=list(TASK_NAMES))
    e.add_argument("--splits", nargs="+", choices=P.SPLITS, default=list(P.SPLITS))
    e.add_argument("--fold", type=int, choices=range(D.N_FOLDS))
    e.add_argument("--data")
    e.add_argument("--out")

    r = sub.add_parser("grid", help="run an experiment grid")
    r.add_argument("--plan", help="JSON plan file")
    r.add_argument("--rq", type=int, choices=sorted(RQ_PRESETS))
    r.add_argument("--kinds", nargs="+", choices=P.KINDS)
    r.add_argument("--sizes", nargs="+", type=int, choices=nn.MODEL_SIZES)
    r.add_argument("--folds", nargs="+", type=int, choices=range(D.N_FOLDS))
    r.add_argument("--tasks", nargs="+", choices=TASK_NAMES)
    r.add_argument("--shots", nargs="+", type=positive_int)
    r.add_argument("--langs", type=parse_langs)
    r.add_argument("--projected", action="store_true", help="train T4 only and adapt to every task")
    r.add_argument("--save-models", action="store_true")
    r.add_argument("--jobs", type=positive_int)
    r.add_argument("--data")
    r.add_argument("--out")
    r.add_argument("--seed", type=int)

    h = sub.add_parser("highlight", help="highlight a file with a trained model (lexer + model, no parser)")
    h.add_argument("file", help="source file, or - for stdin")
    h.add_argument("--lang", choices=LANG_NAMES, required=True)
    h.add_argument("--model", required=True)
    h.add_argument("--layout", help="layout JSON (default: next to the model)")
    h.add_argument("--format", choices=("ansi", "html"), default="ansi")
    h.add_argument("--theme", help="JSON theme file")

    b = sub.add_parser("bench", help="single-thread latency of saved models on snippet inputs")
    b.add_argument("--model", nargs="+", required=True)
    b.add_argument("--lang", choices=LANG_NAMES, required=True)
    b.add_argument("--count", type=positive_int, default=200)
    b.add_argument("--repeats", type=positive_int, default=3)
    b.add_argument("--data")
    b.add_argument("--out")
    return p


COMMANDS = {"gen": cmd_gen, "train": cmd_train, "eval": cmd_eval, "grid": cmd_grid,
            "highlight": cmd_highlight, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.resolved = {}
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"deeplight {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError, nn.VocabularyMismatch, nn.FormatError, D.FormatError,
            VocabularyOverflow, frontends.GenerationExhausted) as exc:
        print(f"deeplight {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
