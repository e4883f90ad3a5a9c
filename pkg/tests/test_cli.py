import html
import json
import re

import pytest

from deeplight import cli
from deeplight import dataset as D
from deeplight import frontends as F
from deeplight import nn
from deeplight.frontends import minicee, minijay, minisnake
from deeplight.frontends.base import Parser
from deeplight.normalizer import build_vocabulary


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("ws")
    data, models = root / "data", root / "models"
    assert cli.main(["gen", "--count", "60", "--snippets", "8", "--seed", "3", "--out", str(data)]) == 0
    assert cli.main(["train", "--kind", "sl", "--lang", "minijay", "--data", str(data), "--out", str(models)]) == 0
    return root, data, models


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_writes_every_language(workspace):
    _, data, _ = workspace
    for lang in cli.LANG_NAMES:
        files = sorted(p.name for p in (data / lang).iterdir())
        assert files == ["corpus.jsonl", "manifest.json", "snippets-fold0.jsonl", "snippets-fold1.jsonl",
                         "snippets-fold2.jsonl"]
        assert len(json.loads((data / lang / "manifest.json").read_text())["folds"]) == 3
    assert (data / "token_types.json").exists() and (data / "gen.run.json").exists()


def test_gen_rerun_is_identical(workspace, tmp_path, capsys):
    _, data, _ = workspace
    assert run(capsys, "gen", "--count", "60", "--snippets", "8", "--seed", "3", "--out", str(tmp_path))[0] == 0
    for lang in cli.LANG_NAMES:
        for p in (data / lang).iterdir():
            assert (tmp_path / lang / p.name).read_bytes() == p.read_bytes()


@pytest.mark.parametrize("argv", [
    ["gen", "--count", "0"],
    ["train", "--kind", "sl", "--size", "48", "--lang", "minijay"],
    ["train", "--kind", "fs", "--lang", "minijay"],
    ["train", "--kind", "sl"],
    ["grid"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, capsys, tmp_path):
    assert run(capsys, *argv, *(["--data", str(tmp_path)] if argv[0] in ("train", "grid") else []))[0] == 2


def test_invalid_size_lists_choices(capsys):
    code, _, err = run(capsys, "train", "--kind", "sl", "--size", "48", "--lang", "minijay")
    assert code == 2 and "32, 64, 128" in err


def test_missing_data_exits_1(capsys, tmp_path):
    code, _, err = run(capsys, "train", "--kind", "sl", "--lang", "minijay", "--data", str(tmp_path / "none"))
    assert code == 1 and "gen" in err


def test_train_names_and_fs(workspace, capsys):
    _, data, models = workspace
    assert (models / "SL32-minijay-fold0.dlsh").exists()
    assert (models / "SL32-minijay-fold0.layout.json").exists()
    log = json.loads((models / "SL32-minijay-fold0.log.json").read_text())
    assert [e["lr"] for e in log] == [1e-3, 1e-3, 1e-4, 1e-4]
    assert all(e["val_accuracy"] is not None for e in log)
    # FS needs a base trained with the same flag
    assert run(capsys, "train", "--kind", "fs", "--tn", "--base", "minijay", "--shots", "10",
               "--data", str(data), "--out", str(models))[0] == 1
    assert run(capsys, "train", "--kind", "sl", "--tn", "--lang", "minijay", "--data", str(data),
               "--out", str(models))[0] == 0
    assert run(capsys, "train", "--kind", "fs", "--tn", "--base", "minijay", "--shots", "10",
               "--data", str(data), "--out", str(models))[0] == 0
    assert (models / "10-FS32+TN-minijay-fold0.dlsh").exists()


def test_eval_emits_csv(workspace, capsys, tmp_path):
    _, data, models = workspace
    out = tmp_path / "e.csv"
    code, text, _ = run(capsys, "eval", "--model", str(models / "SL32-minijay-fold0.dlsh"), "--data", str(data),
                        "--tasks", "T1", "T4", "--out", str(out))
    assert code == 0 and out.read_text() == text
    rows = text.strip().splitlines()
    assert rows[0] == "scenario,size,tn,fold,train_langs,eval_lang,task,split,n_tokens,accuracy"
    assert len(rows) == 1 + 3 * 2 * 2


def test_grid_rq1_preset(workspace, capsys, tmp_path):
    _, data, _ = workspace
    code, text, _ = run(capsys, "grid", "--rq", "1", "--folds", "0", "--tasks", "T4", "--data", str(data),
                        "--out", str(tmp_path))
    assert code == 0
    assert "BASE" in text and "UNSEEN" in text and "SL32+TN" in text
    assert (tmp_path / "report.csv").exists() and (tmp_path / "grid.run.json").exists()


def test_highlight_never_parses(workspace, capsys, tmp_path, monkeypatch):
    _, data, models = workspace

    def forbidden(*a, **k):
        raise AssertionError("parser called on the highlight path")

    for mod in (minijay, minisnake, minicee):
        monkeypatch.setattr(mod, "parse", forbidden)
    monkeypatch.setattr(F, "parse", forbidden)
    monkeypatch.setattr(Parser, "__init__", forbidden)
    snippet = D.read_dataset(data / "minijay" / "snippets-fold0.jsonl")[0]
    src = tmp_path / "s.jay"
    src.write_text(snippet.text + "} ) class {", encoding="utf-8")
    code, out, _ = run(capsys, "highlight", str(src), "--lang", "minijay",
                       "--model", str(models / "SL32-minijay-fold0.dlsh"), "--format", "html")
    assert code == 0
    assert html.unescape(re.sub(r"</?span[^>]*>", "", out)) == src.read_text(encoding="utf-8")


def test_highlight_empty_file(workspace, capsys, tmp_path):
    _, _, models = workspace
    src = tmp_path / "e.jay"
    src.write_text("")
    assert run(capsys, "highlight", str(src), "--lang", "minijay",
               "--model", str(models / "SL32-minijay-fold0.dlsh")) == (0, "", "")


def test_highlight_layout_mismatch(workspace, capsys, tmp_path):
    _, _, models = workspace
    layout = tmp_path / "other.json"
    layout.write_text(build_vocabulary(tn_enabled=True).layout_json())
    src = tmp_path / "a.jay"
    src.write_text("class A {}")
    code, _, err = run(capsys, "highlight", str(src), "--lang", "minijay", "--layout", str(layout),
                       "--model", str(models / "SL32-minijay-fold0.dlsh"))
    assert code == 1 and "layout" in err


def test_bench_report_fields(workspace, capsys, tmp_path):
    _, data, models = workspace
    big = tmp_path / "h128.dlsh"
    vocab = build_vocabulary(tn_enabled=False)
    nn.save_model(big, nn.CnnShModel.init(nn.ModelConfig(hidden=128)), vocab.layout_hash())
    (tmp_path / "h128.layout.json").write_text(vocab.layout_json())
    code, text, _ = run(capsys, "bench", "--model", str(models / "SL32-minijay-fold0.dlsh"), str(big),
                        "--lang", "minijay", "--count", "20", "--repeats", "1", "--data", str(data))
    assert code == 0
    reps = json.loads(text)["reports"]
    assert [r["hidden"] for r in reps] == [32, 128]
    for r in reps:
        assert all(r[k] > 0 for k in ("n_inputs", "n_tokens", "tokens_per_second", "p50_ms", "p99_ms"))


def test_config_precedence(workspace, tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 1, "out": str(tmp_path / "from_config")}))
    monkeypatch.setenv("DEEPLIGHT_SEED", "2")
    argv = ["--config", str(cfg), "gen", "--langs", "minicee", "--count", "40", "--snippets", "2"]
    assert run(capsys, *argv, "--seed", "3")[0] == 0
    manifest = json.loads((tmp_path / "from_config" / "gen.run.json").read_text())
    assert manifest["settings"]["seed"] == 3
    assert run(capsys, *argv)[0] == 0
    manifest = json.loads((tmp_path / "from_config" / "gen.run.json").read_text())
    assert manifest["settings"]["seed"] == 2
