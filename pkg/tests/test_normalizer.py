import tracemalloc

import numpy as np
import pytest
from hypothesis import given, strategies as st

from deeplight import frontends as F
from deeplight.normalizer import (
    PAD_ID, RuleError, UnknownTokenType, VocabularyOverflow, build_vocabulary, compile_rules,
    default_rules, encode_sequence, encode_token, encode_types, vocabulary_from_layout,
)

LANGS = [l.value for l in F.LANGUAGES]
MAN = F.manifest()


@pytest.fixture(scope="module")
def tn():
    return build_vocabulary(tn_enabled=True)


@pytest.fixture(scope="module")
def plain():
    return build_vocabulary(tn_enabled=False)


def tid(lang, name):
    return F.get(lang).types.by_name[name]


def test_layout_arithmetic(tn):
    counts = {lang: len(MAN[lang]) for lang in LANGS}
    s = len(default_rules())
    assert tn.shared_region == (1, 1 + s)
    assert tn.bases["minijay"] == 1 + s
    assert tn.bases["minisnake"] == tn.bases["minijay"] + counts["minijay"]
    assert tn.bases["minicee"] == tn.bases["minisnake"] + counts["minisnake"]
    assert tn.max_id() == tn.bases["minicee"] + counts["minicee"] - 1 < 315


def test_three_sixty_type_languages_with_48_rules_fit():
    man = {f"l{i}": [{"type_id": t, "name": f"T{t}", "is_whitespace": t == 0} for t in range(60)] for i in range(3)}
    rules = [{"name": f"r{t}", "members": {"l0": f"T{t}", "l1": f"T{t}"}} for t in range(48)]
    v = build_vocabulary(man, rules)
    assert 1 + 48 + 3 * 60 <= 315
    assert v.max_id() == 1 + 48 + 180 - 1


def test_overflow_reports_exact_deficit():
    with pytest.raises(VocabularyOverflow) as err:
        build_vocabulary(total_size=10)
    needed = 1 + len(default_rules()) + sum(len(MAN[l]) for l in LANGS)
    assert err.value.deficit == needed - 10


def test_layout_is_deterministic_and_serializable(tn, plain):
    again = build_vocabulary(tn_enabled=True)
    assert again.layout_json() == tn.layout_json()
    assert again.layout_hash() == tn.layout_hash()
    assert plain.layout_hash() != tn.layout_hash()
    clone = vocabulary_from_layout(tn.layout())
    for lang in LANGS:
        assert np.array_equal(clone.table(lang), tn.table(lang))


def test_tn_off_reserves_the_shared_region(tn, plain):
    assert plain.shared_region == tn.shared_region
    assert plain.bases == tn.bases
    for lang in LANGS:
        assert plain.table(lang).min() >= plain.shared_region[1]


def test_shared_operator_and_identifier(tn):
    plus = {encode_token(tn, l, tid(l, "PLUS")) for l in ("minijay", "minicee")}
    ident = {encode_token(tn, l, tid(l, "IDENT")) for l in LANGS}
    assert len(plus) == 1 and len(ident) == 1
    assert plus < set(range(*tn.shared_region))


def test_unmapped_types_use_their_language_region(tn, plain):
    indent = encode_token(tn, "minisnake", tid("minisnake", "INDENT"))
    assert indent == tn.bases["minisnake"] + tid("minisnake", "INDENT")
    jay_class = encode_token(plain, "minijay", tid("minijay", "KW_CLASS"))
    snake_class = encode_token(plain, "minisnake", tid("minisnake", "KW_CLASS"))
    assert jay_class != snake_class
    assert encode_token(tn, "minijay", tid("minijay", "KW_CLASS")) == encode_token(tn, "minisnake", tid("minisnake", "KW_CLASS"))


def test_class_payment_encoding(tn):
    ids = encode_sequence(tn, "minijay", F.lex("minijay", "class Payment {}"))
    names = {r.shared_id: r.name for r in tn.rules}
    assert [names[i] for i in ids] == ["class", "whitespace", "identifier", "whitespace", "{", "}"]


def test_empty_sequence(tn):
    assert encode_sequence(tn, "minicee", []).tolist() == []


def test_pad_never_produced(tn, plain):
    for v in (tn, plain):
        for lang in LANGS:
            assert PAD_ID not in v.table(lang)


def test_unknown_type_and_language(tn):
    with pytest.raises(UnknownTokenType):
        encode_token(tn, "minijay", 10_000)
    with pytest.raises(UnknownTokenType):
        encode_types(tn, "minijay", np.array([-1]))
    with pytest.raises(UnknownTokenType):
        tn.table("cobol")


def test_rules_reject_duplicates_and_unknown_names():
    with pytest.raises(RuleError):
        compile_rules([{"name": "a", "members": {"minijay": "PLUS"}},
                       {"name": "b", "members": {"minijay": "PLUS"}}], MAN)
    with pytest.raises(RuleError):
        compile_rules([{"name": "a", "members": {"minijay": "NOPE"}}], MAN)
    with pytest.raises(RuleError):
        compile_rules([{"name": "a", "members": {}}], MAN)


@pytest.mark.parametrize("enabled", [True, False])
def test_injective_within_each_language(enabled):
    v = build_vocabulary(tn_enabled=enabled)
    for lang in LANGS:
        table = v.table(lang)
        assert len(set(table.tolist())) == len(table)


PAIRS = st.tuples(st.sampled_from(LANGS), st.integers(0, 80), st.sampled_from(LANGS), st.integers(0, 80))


@given(PAIRS)
def test_collisions_only_through_rules(pair):
    v = build_vocabulary(tn_enabled=True)
    la, ta, lb, tb = pair
    if ta >= len(MAN[la]) or tb >= len(MAN[lb]) or (la, ta) == (lb, tb):
        return
    if encode_token(v, la, ta) == encode_token(v, lb, tb):
        rule = next(r for r in v.rules if (la, ta) in r.members)
        assert (lb, tb) in rule.members and la != lb


# Shared-construct pair: same logic written in two languages with only shared token types.
PAIRED = "if (a == 1) { return b + 2; } else { x = y * (z - 3); }"


def test_paired_fixture_identical_under_tn(tn, plain):
    jay = F.lex("minijay", PAIRED)
    cee = F.lex("minicee", PAIRED)
    assert [t.text for t in jay] == [t.text for t in cee]
    assert np.array_equal(encode_sequence(tn, "minijay", jay), encode_sequence(tn, "minicee", cee))
    a, b = encode_sequence(plain, "minijay", jay), encode_sequence(plain, "minicee", cee)
    assert len(a) == len(b) and np.all(a != b)


def test_encoding_is_a_single_lookup(tn):
    ids = np.random.default_rng(0).integers(0, len(MAN["minijay"]), 100_000)
    assert np.array_equal(encode_types(tn, "minijay", ids), tn.table("minijay")[ids])
    tracemalloc.start()
    out = encode_types(tn, "minijay", ids)
    peak = tracemalloc.get_traced_memory()[1]
    tracemalloc.stop()
    assert peak <= out.nbytes + 4096
