import json
from collections import Counter
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from deeplight import frontends as F
from deeplight.frontends.base import ParseError
from deeplight.hc import N_CLASSES, HighlightClass

LANGS = [l.value for l in F.LANGUAGES]
FIXTURE = Path(__file__).parent / "fixtures" / "hand_labels.json"


def names(lang, tokens):
    fe = F.get(lang)
    return [fe.types.name(t.type_id) for t in tokens]


def labelled(lang, source):
    toks = F.lex(lang, source)
    return toks, F.bf_resolve(lang, toks, F.parse(lang, toks))


def test_registration_order():
    assert LANGS == ["minijay", "minisnake", "minicee"]
    assert [l.index for l in F.LANGUAGES] == [0, 1, 2]


# -- lexing -------------------------------------------------------------------------

def test_class_payment_tokens():
    toks = F.lex("minijay", "class Payment {}")
    assert names("minijay", toks) == ["KW_CLASS", "WS", "IDENT", "WS", "LBRACE", "RBRACE"]
    assert toks[2].text == "Payment"


@pytest.mark.parametrize("lang", LANGS)
def test_empty_source(lang):
    assert F.lex(lang, "") == []


def test_snake_single_block_has_one_indent_and_dedent():
    kinds = Counter(names("minisnake", F.lex("minisnake", "def f():\n  pass\n")))
    assert kinds["INDENT"] == 1 and kinds["DEDENT"] == 1


@pytest.mark.parametrize("lang,src,kind", [
    ("minijay", 'x = "abc', "STRING_LIT"),
    ("minijay", "a /* open", "BLOCK_COMMENT"),
    ("minicee", "s = 'q", "CHAR_LIT"),
    ("minisnake", 'x = "abc', "STRING_LIT"),
])
def test_unterminated_literal_runs_to_end(lang, src, kind):
    toks = [t for t in F.lex(lang, src) if t.text]
    fe = F.get(lang)
    assert fe.types.name(toks[-1].type_id) == kind
    assert src.endswith(toks[-1].text)


@pytest.mark.parametrize("lang", LANGS)
def test_unknown_characters_become_error_tokens(lang):
    toks = F.lex(lang, "a ` b")
    assert "ERROR" in names(lang, toks)


def check_lex_covers(lang, source):
    fe = F.get(lang)
    toks = fe.lex(source)
    assert "".join(t.text for t in toks) == source
    for t in toks:
        assert 0 <= t.type_id < fe.token_type_count
        assert t.is_whitespace == (t.type_id == fe.types.whitespace_id)
        synthetic = fe.types.types[t.type_id].synthetic
        assert t.span.len == (0 if synthetic else len(t.text))
        if not synthetic:
            assert t.span.len >= 1


@pytest.mark.parametrize("lang", LANGS)
@settings(max_examples=150, deadline=None)
@given(source=st.text(alphabet=st.characters(codec="utf-8"), max_size=80))
def test_lex_is_total_and_covers_input(lang, source):
    check_lex_covers(lang, source)


CODEY = st.text(alphabet=list("abcxy01 \n\t(){}[]:;.,=+-*/<>!&|\"'#@?_\\"), max_size=120)


@pytest.mark.parametrize("lang", LANGS)
@settings(max_examples=200, deadline=None)
@given(source=CODEY)
def test_lex_total_on_code_like_noise(lang, source):
    check_lex_covers(lang, source)


def test_spans_are_one_based_line_and_column():
    toks = F.lex("minicee", "int a;\n  b = 1;")
    b = next(t for t in toks if t.text == "b")
    assert (b.span.line, b.span.col, b.span.len) == (2, 3, 1)


# -- indentation against a line-based reference ------------------------------------

def reference_layout(lines):
    """Synthetic markers from a whole-line view of a bracket-free MiniSnake text."""
    out, stack = [], [0]
    for ln, line in enumerate(lines, 1):
        body = line.lstrip(" ")
        if not body or body.startswith("#"):
            continue
        indent = len(line) - len(body)
        if indent > stack[-1]:
            stack.append(indent)
            out.append(("INDENT", ln))
        else:
            while indent < stack[-1]:
                stack.pop()
                out.append(("DEDENT", ln))
            if indent > stack[-1]:
                stack.append(indent)
                out.append(("INDENT", ln))
        out.append(("NEWLINE", ln))
    out.extend(("DEDENT", None) for _ in stack[1:])
    return out


LINE = st.tuples(st.integers(0, 8), st.sampled_from(["x = 1", "pass", "# note", "", "return y", "f()"]))


@settings(max_examples=300, deadline=None)
@given(st.lists(LINE, max_size=12), st.booleans())
def test_indentation_matches_reference(spec, trailing_newline):
    lines = [" " * n + stmt if stmt else " " * n for n, stmt in spec]
    source = "\n".join(lines) + ("\n" if trailing_newline and lines else "")
    toks = F.lex("minisnake", source)
    got = []
    for t, name in zip(toks, names("minisnake", toks)):
        if name in ("INDENT", "DEDENT", "NEWLINE"):
            got.append((name, t.span.line))
    expected = reference_layout(lines)
    tail = sum(1 for k, ln in expected if ln is None)
    assert [k for k, _ in got] == [k for k, _ in expected]
    assert got[:len(got) - tail] == expected[:len(expected) - tail]


def test_newlines_inside_brackets_are_ignored():
    toks = F.lex("minisnake", "x = f(1,\n      2)\ny = {1:\n 2}\n")
    assert Counter(names("minisnake", toks))["NEWLINE"] == 2
    assert "INDENT" not in names("minisnake", toks)


# -- parsing ------------------------------------------------------------------------

def test_minijay_class_with_field():
    ast = F.parse("minijay", F.lex("minijay", "class A { int x; }"))
    kinds = [n.kind for n in ast.walk()]
    assert kinds.count("ClassDecl") == 1 and kinds.count("FieldDecl") == 1


def test_minijay_missing_class_name():
    with pytest.raises(ParseError) as err:
        F.parse("minijay", F.lex("minijay", "class {"))
    assert err.value.position == 1
    assert err.value.expected == "identifier"


def test_minicee_main():
    ast = F.parse("minicee", F.lex("minicee", "int main() { return 0; }"))
    assert [n.kind for n in ast.walk()].count("FuncDecl") == 1


@pytest.mark.parametrize("lang,src", [
    ("minijay", "x = ;"), ("minijay", "}"), ("minisnake", "def (:"), ("minisnake", "  x = 1\n"),
    ("minicee", "int f( {"), ("minicee", "struct;"),
])
def test_invalid_code_raises_parse_error(lang, src):
    with pytest.raises(ParseError):
        F.parse(lang, F.lex(lang, src))


@pytest.mark.parametrize("lang", LANGS)
@settings(max_examples=150, deadline=None)
@given(source=CODEY)
def test_parse_either_succeeds_or_raises_parse_error(lang, source):
    try:
        F.parse(lang, F.lex(lang, source))
    except ParseError:
        pass


@pytest.mark.parametrize("lang,src", [
    ("minijay", "class M { List<Map<String, Item>> m; void f() { Fn g = (a, b) -> a; for (Item i : xs) { } } }"),
    ("minijay", "class M { int f(Object o) { try { return o instanceof Item ? 1 : 2; } catch (Oops e) { throw e; } } }"),
    ("minisnake", "with open(p) as fh:\n    a, b = fh.read(), {1: 2}\n"),
    ("minisnake", "try:\n    raise Oops(code=1)\nexcept Oops as e:\n    pass\nfinally:\n    done()\n"),
    ("minicee", "typedef int Count;\nCount c = 3;\nint (*cb)(int, char);\n"),
    ("minicee", "void f(int n) { do { n--; } while (n > 0); int a[2] = {1, 2}; }"),
])
def test_extended_constructs_parse(lang, src):
    toks, labels = labelled(lang, src)
    assert len(labels) == len(toks)


def test_typedef_names_become_types():
    toks, labels = labelled("minicee", "typedef int Count;\nCount c = (Count) 3;\n")
    counts = [l for t, l in zip(toks, labels) if t.text == "Count"]
    assert counts == [HighlightClass.TYPE_IDENTIFIER] * 3


# -- resolver -----------------------------------------------------------------------

def test_payment_is_class_declarator():
    toks, labels = labelled("minijay", "class Payment {}")
    assert labels[2] == HighlightClass.CLASS_DECLARATOR


def test_variable_and_callee():
    toks, labels = labelled("minijay", "class A { void m() { int x = f(); } }")
    by_text = {t.text: l for t, l in zip(toks, labels)}
    assert by_text["x"] == HighlightClass.VARIABLE_DECLARATOR
    assert by_text["f"] == HighlightClass.FUNCTION_IDENTIFIER


def test_callee_beats_member_access():
    # "a.f()": f is both a member and a callee; callee wins
    toks, labels = labelled("minijay", "class A { void m() { a.f(); a.g = 1; } }")
    by_text = {t.text: l for t, l in zip(toks, labels)}
    assert by_text["f"] == HighlightClass.FUNCTION_IDENTIFIER
    assert by_text["g"] == HighlightClass.FIELD_IDENTIFIER
    assert by_text["a"] == HighlightClass.UNHIGHLIGHTED


def test_declarator_beats_type_position():
    toks, labels = labelled("minisnake", "class A(B):\n    pass\n")
    assert [l for t, l in zip(toks, labels) if t.text in "AB" and t.text] == [
        HighlightClass.CLASS_DECLARATOR, HighlightClass.TYPE_IDENTIFIER]


@pytest.mark.parametrize("case", json.loads(FIXTURE.read_text())["cases"], ids=lambda c: c["lang"])
def test_hand_labelled_fixture(case):
    toks, labels = labelled(case["lang"], case["source"])
    got = [[t.text, HighlightClass(l).label] for t, l in zip(toks, labels) if l]
    assert got == case["highlighted"]


# -- generated corpora --------------------------------------------------------------

@pytest.fixture(scope="module")
def corpora():
    return {lang: F.build_corpus(lang, 150, seed=3) for lang in LANGS}


@pytest.mark.parametrize("lang", LANGS)
def test_generated_programs_round_trip(lang, corpora):
    fe = F.get(lang)
    for s in corpora[lang]:
        assert "".join(t.text for t in s.tokens) == s.source
        ast = fe.parse(s.tokens)
        assert fe.resolve(s.tokens, ast) == s.labels == fe.resolve(s.tokens, fe.parse(s.tokens))


@pytest.mark.parametrize("lang", LANGS)
def test_label_legality(lang, corpora):
    fe = F.get(lang)
    for s in corpora[lang]:
        for t, l in zip(s.tokens, s.labels):
            assert 0 <= l < N_CLASSES
            if t.is_whitespace or fe.types.types[t.type_id].synthetic:
                assert l == 0


@pytest.mark.parametrize("lang", LANGS)
def test_leaves_cover_significant_tokens_once(lang, corpora):
    fe = F.get(lang)
    skip = {fe.types.by_name[n] for n in ("WS", "COMMENT", "LINE_COMMENT", "BLOCK_COMMENT") if n in fe.types.by_name}
    for s in corpora[lang][:40]:
        ast = fe.parse(s.tokens)
        covered = Counter(i for leaf in ast.leaves() for i in leaf.token_refs)
        for i, t in enumerate(s.tokens):
            if t.type_id not in skip:
                assert covered[i] == 1, (i, t)


def test_annotations_only_where_supported(corpora):
    seen = {lang: any(HighlightClass.ANNOTATION_DECLARATOR in s.labels for s in corpora[lang]) for lang in LANGS}
    assert seen == {"minijay": True, "minisnake": True, "minicee": False}
    assert not any("@" in s.source for s in corpora["minicee"])


@pytest.mark.parametrize("lang", LANGS)
def test_every_class_is_produced(lang, corpora):
    seen = {l for s in corpora[lang] for l in s.labels}
    expected = set(range(N_CLASSES)) - ({HighlightClass.ANNOTATION_DECLARATOR} if lang == "minicee" else set())
    assert seen == expected


@pytest.mark.parametrize("lang", LANGS)
def test_generation_is_deterministic(lang):
    assert F.generate_program(lang, 1, 3) == F.generate_program(lang, 1, 3)
    assert F.generate_program(lang, 1, 3) != F.generate_program(lang, 2, 3)


@pytest.mark.parametrize("lang", LANGS)
def test_seeds_1_to_500_are_mostly_distinct(lang):
    keys = {F.sequence_key(F.lex(lang, F.generate_program(lang, s, 3))) for s in range(1, 501)}
    assert len(keys) >= 480


def test_build_corpus_count_and_uniqueness(corpora):
    for samples in corpora.values():
        assert len(samples) == 150
        assert len({F.sequence_key(s.tokens) for s in samples}) == 150


def test_duplicates_are_rejected():
    fixed = F.generate_program("minijay", 5, 3)
    with pytest.raises(F.GenerationExhausted):
        F.build_corpus("minijay", 2, seed=0, generator=lambda seed, depth: fixed)
    other = F.generate_program("minijay", 6, 3)
    out = F.build_corpus("minijay", 2, seed=0, generator=lambda seed, depth: (fixed, fixed, other)[seed % 3])
    assert [s.source for s in out] == [fixed, other]


def test_manifest_lists_every_type():
    man = F.manifest()
    for lang in LANGS:
        assert [t["type_id"] for t in man[lang]] == list(range(F.get(lang).token_type_count))
        assert sum(t["is_whitespace"] for t in man[lang]) == 1
