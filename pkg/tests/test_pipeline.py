import numpy as np
import pytest

from deeplight import dataset as D
from deeplight import frontends as F
from deeplight import nn
from deeplight import pipeline as P
from deeplight.frontends.base import Span, Token
from deeplight.normalizer import build_vocabulary

LANGS = [l.value for l in F.LANGUAGES]
QUICK = ((1, 1e-3),)


@pytest.fixture(scope="module")
def datasets():
    return {lang: D.build_language_dataset(lang, count=60, seed=5, snippets_per_fold=8) for lang in LANGS}


@pytest.fixture(scope="module")
def vocab():
    return build_vocabulary(tn_enabled=False)


def test_lr_trace():
    assert P.lr_trace() == [1e-3, 1e-3, 1e-4, 1e-4]


@pytest.mark.parametrize("sc,name,file", [
    (P.Scenario("SL", 32, False, "minijay"), "SL32", "SL32-minijay-fold0.dlsh"),
    (P.Scenario("SL", 32, True, "minicee", fold=2), "SL32+TN", "SL32+TN-minicee-fold2.dlsh"),
    (P.Scenario("ML", 128), "ML128", "ML128-fold0.dlsh"),
    (P.Scenario("FS", 32, False, "minijay", 10), "10-FS32-minijay", "10-FS32-minijay-fold0.dlsh"),
    (P.Scenario("FS", 32, True, "minijay", 10), "10-FS32+TN-minijay", "10-FS32+TN-minijay-fold0.dlsh"),
    (P.Scenario("SL", 64, False, "minisnake", task="T2"), "SL64", "SL64-minisnake-fold0-T2.dlsh"),
])
def test_scenario_naming(sc, name, file):
    assert sc.name == name
    assert sc.file_name == file


@pytest.mark.parametrize("kw", [dict(kind="XX"), dict(kind="SL"), dict(kind="FS", base_lang="minijay"),
                                dict(kind="ML", size=48), dict(kind="ML", task="T9")])
def test_scenario_validation(kw):
    with pytest.raises(ValueError):
        P.Scenario(**kw)


def test_single_sample_memorization(datasets, vocab):
    # one sample, fixed schedule, 4 epochs; the sample is repeated so an epoch holds enough steps
    e = P.encode([datasets["minijay"].corpus[1]], vocab)[0]
    model = nn.CnnShModel.init(nn.ModelConfig(seed=1))
    P.train(model, [e] * 100, seed=1)
    loss, _ = nn.loss_and_grad(model, e.ids, e.labels, e.mask, training=False)
    assert loss < 0.1


def test_training_is_deterministic(datasets, vocab):
    sc = P.Scenario("SL", 32, False, "minisnake")
    a, ha = P.train_sl(datasets, sc, vocab, schedule=QUICK)
    b, hb = P.train_sl(datasets, sc, vocab, schedule=QUICK)
    assert a.digest() == b.digest()
    assert ha == hb and ha[0].val_accuracy is not None


def test_ml_sees_each_training_id_once_per_epoch(datasets, vocab, monkeypatch):
    seen = []
    real = nn.loss_and_grad

    def spy(model, ids, labels, mask, rng=None, training=True):
        seen.append(ids.tobytes())
        return real(model, ids, labels, mask, rng, training)

    monkeypatch.setattr(nn, "loss_and_grad", spy)
    P.train_ml(datasets, P.Scenario("ML", 32), vocab, schedule=QUICK)
    expected = [e.ids.tobytes() for lang in LANGS
                for e in P.encode(datasets[lang].train(0), vocab)]
    assert sorted(seen) == sorted(expected)


def test_fewshot_stream_excludes_base(datasets):
    sc = P.Scenario("FS", 32, False, "minijay", 10)
    stream = P.fewshot_stream(datasets, sc)
    assert sorted(stream) == ["minicee", "minisnake"]
    assert sum(len(v) for v in stream.values()) == 20


def test_finetune_rejects_layout_mismatch(datasets, vocab):
    base = nn.CnnShModel.init(nn.ModelConfig())
    other = build_vocabulary(tn_enabled=True).layout_hash()
    with pytest.raises(nn.VocabularyMismatch):
        P.finetune_fs(base, datasets, P.Scenario("FS", 32, False, "minijay", 10), vocab, schedule=QUICK,
                      base_layout_hash=other)


def test_finetune_starts_from_a_copy(datasets, vocab):
    base = nn.CnnShModel.init(nn.ModelConfig(seed=2))
    digest = base.digest()
    tuned, hist = P.finetune_fs(base, datasets, P.Scenario("FS", 32, False, "minijay", 10), vocab, schedule=QUICK)
    assert base.digest() == digest != tuned.digest()
    assert len(hist) == 1


# -- metric -------------------------------------------------------------------------

def tok(text, ws=False):
    return Token(0, text, Span(1, 1, len(text)), ws)


def test_counting_oracle_forty_percent():
    # 10 non-whitespace tokens, 4 unhighlighted; 5 whitespace tokens that must not count
    labels = [0, 0, 0, 0, 1, 2, 5, 6, 9, 10] + [0] * 5
    tokens = [tok("x")] * 10 + [tok(" ", True)] * 5
    seq = D.LabeledSequence("minijay", "a", tokens, labels)
    preds = [np.zeros(15, dtype=np.int64)]
    assert P.score_predictions(preds, [seq], "T4") == (4, 10)
    # under T1 the identifier/declarator classes collapse to unhighlighted
    assert P.score_predictions(preds, [seq], "T1") == (8, 10)


def test_whitespace_only_contributes_nothing():
    seq = D.LabeledSequence("minijay", "w", [tok(" ", True)] * 3, [0, 0, 0])
    assert P.score_predictions([np.array([3, 3, 3])], [seq], "T4") == (0, 0)


def test_ground_truth_predictor_scores_one(datasets, vocab):
    items = P.encode(datasets["minicee"].test(0), vocab)
    assert P.count_correct([e.labels for e in items], items) == (sum(int(e.mask.sum()) for e in items),) * 2


def test_metric_is_order_invariant(datasets, vocab):
    model = nn.CnnShModel.init(nn.ModelConfig(seed=4))
    items = P.encode(datasets["minicee"].test(0), vocab)
    assert P.counts(model, items) == P.counts(model, items[::-1])
    assert 0.0 <= P.accuracy(model, items, "T2") <= 1.0


def test_projected_task_matches_adapting_both_sides(datasets, vocab):
    model = nn.CnnShModel.init(nn.ModelConfig(seed=4))
    items = P.encode(datasets["minijay"].test(0), vocab)
    preds = P.predict_items(model, items)
    for task in ("T1", "T2", "T3"):
        assert P.count_correct(preds, items, task) == P.score_predictions(preds, datasets["minijay"].test(0), task)


def test_empty_eval_set(vocab):
    model = nn.CnnShModel.init(nn.ModelConfig())
    with pytest.raises(P.EmptyEvalSet):
        P.evaluate(model, [], "T4", vocab)
    seq = D.LabeledSequence("minijay", "w", [Token(0, " ", Span(1, 1, 1), True)], [0])
    with pytest.raises(P.EmptyEvalSet):
        P.evaluate(model, [seq], "T4", vocab)


# -- grid ---------------------------------------------------------------------------

def test_cell_count_by_enumeration():
    plan = P.Plan(folds=(0, 1, 2), tn=(False, True))
    scenarios = 0
    for tn in plan.tn:
        scenarios += len(plan.langs)                       # SL per base language
        scenarios += 1                                     # ML
        scenarios += len(plan.langs) * len(plan.shots)     # FS per base and size
    per_task_models = scenarios * len(plan.tasks)
    assert plan.expected_cells() == per_task_models * 3 * 3 * 2
    projected = P.Plan(projected=True)
    assert projected.expected_cells() == scenarios * 3 * 3 * 4 * 2


def test_grid_runs_and_is_deterministic(datasets, tmp_path):
    plan = P.Plan(folds=(0,), tn=(False,), tasks=("T1", "T4"), shots=(10,), schedule=QUICK)
    a = P.run_grid(datasets, plan, tmp_path / "a", jobs=1)
    b = P.run_grid(datasets, plan, tmp_path / "b", jobs=1)
    assert len(a) == plan.expected_cells()
    assert all(c.accuracy is not None for c in a)
    assert (tmp_path / "a" / "report.csv").read_bytes() == (tmp_path / "b" / "report.csv").read_bytes()
    text = (tmp_path / "a" / "report.txt").read_text()
    assert "BASE" in text and "UNSEEN" in text
    back = P.read_cells_csv(P.cells_csv(a))
    assert [(c.scenario, c.eval_lang, c.task, c.split, c.n_tokens) for c in back] == \
        [(c.scenario, c.eval_lang, c.task, c.split, c.n_tokens) for c in a]
    assert all(abs(x.accuracy - y.accuracy) < 1e-6 for x, y in zip(back, a))
    ml = [c for c in a if c.scenario == "ML32"]
    assert {(c.eval_lang, c.task) for c in ml} == {(l, t) for l in LANGS for t in ("T1", "T4")}


def test_projected_grid_labels(datasets):
    plan = P.Plan(langs=("minijay", "minicee"), kinds=("SL",), folds=(0,), tn=(False,), projected=True,
                  splits=("valid",), schedule=QUICK)
    cells = P.run_grid(datasets, plan, jobs=1)
    assert {c.task for c in cells} == {"T1@T4", "T2@T4", "T3@T4", "T4@T4"}
    assert len(cells) == plan.expected_cells()


def test_failed_cells_are_recorded(datasets, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("no")

    monkeypatch.setattr(P, "train_ml", boom)
    plan = P.Plan(kinds=("ML",), folds=(0,), tn=(False,), tasks=("T4",), schedule=QUICK)
    cells = P.run_grid(datasets, plan, jobs=1)
    assert cells and all(c.accuracy is None and "RuntimeError" in c.error for c in cells)


def test_fold_means_are_arithmetic():
    cells = [P.Cell("SL32", 32, False, k, "minijay", "minijay", "T4", "valid", 10, acc)
             for k, acc in enumerate((0.5, 0.7, 0.9))]
    assert list(P.fold_means(cells).values()) == [pytest.approx(0.7)]


def test_bench_report(datasets, vocab):
    inputs = [e.ids for e in P.encode(datasets["minijay"].snippets[0], vocab)]
    rep = P.bench(nn.CnnShModel.init(nn.ModelConfig()), inputs).as_dict()
    assert rep["n_inputs"] == len(inputs) and rep["hidden"] == 32
    assert all(rep[k] > 0 for k in ("n_tokens", "tokens_per_second", "p50_ms", "p99_ms"))
