import itertools
import json

import numpy as np
import pytest

from deeplight.hc import (
    N_CLASSES, TASKS, CoverageTask, HighlightClass, InvalidLabel, Macrogroup,
    adapt, adapt_array, class_table_json, task_table,
)

ALL = list(range(N_CLASSES))


def test_twelve_classes_with_stable_codes():
    assert N_CLASSES == 12
    assert HighlightClass.UNHIGHLIGHTED == 0
    assert HighlightClass.ANNOTATION_DECLARATOR == 11
    assert [hc.label for hc in HighlightClass][:4] == ["unhighlighted", "keyword", "literal", "char_string_literal"]


def test_tasks_are_cumulative():
    groups = [t.macrogroups for t in TASKS]
    for smaller, larger in zip(groups, groups[1:]):
        assert smaller < larger
    assert CoverageTask.T1.macrogroups == {Macrogroup.LEXICAL}
    assert CoverageTask.T4.macrogroups == {Macrogroup.LEXICAL, Macrogroup.IDENTIFIER,
                                           Macrogroup.DECLARATOR, Macrogroup.ANNOTATION}


@pytest.mark.parametrize("task", TASKS)
def test_adapter_idempotent_exhaustive(task):
    once = adapt(ALL, task)
    assert adapt(once, task) == once


@pytest.mark.parametrize("a,b", list(itertools.product(TASKS, TASKS)))
def test_adapter_composition_exhaustive(a, b):
    # coarsening twice equals coarsening once to the smaller task
    smaller = min(a, b, key=lambda t: len(t.macrogroups))
    assert adapt(adapt(ALL, a), b) == adapt(ALL, smaller)


def test_t4_is_identity_and_t1_keeps_lexical_only():
    assert adapt(ALL, "T4") == ALL
    assert adapt(ALL, "T1") == [0, 1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0]
    assert adapt(ALL, "T2") == [0, 1, 2, 3, 4, 5, 6, 7, 0, 0, 0, 0]
    assert adapt(ALL, "T3") == ALL[:11] + [0]


@pytest.mark.parametrize("task", TASKS)
def test_in_task_codes_fixed_and_others_dropped(task):
    for code, out in zip(ALL, adapt(ALL, task)):
        if HighlightClass(code).macrogroup in task.macrogroups:
            assert out == code
        else:
            assert out == 0


def test_array_form_matches_list_form():
    labels = np.array(ALL * 3)
    for t in TASKS:
        assert adapt_array(labels, t).tolist() == adapt(labels.tolist(), t)


@pytest.mark.parametrize("bad", [-1, 12, 99])
def test_out_of_range_labels_rejected(bad):
    with pytest.raises(InvalidLabel):
        adapt([0, bad], "T2")
    with pytest.raises(InvalidLabel):
        adapt_array(np.array([bad]), "T2")


def test_tables_are_read_only():
    with pytest.raises(ValueError):
        task_table("T1")[0] = 3


def test_class_table_json_round_trip():
    doc = json.loads(class_table_json())
    assert len(doc["classes"]) == 12
    assert doc["tasks"]["T1"] == ["Lexical"]
    assert CoverageTask.parse("t3") is CoverageTask.T3
