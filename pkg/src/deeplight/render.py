"""Turn tokens plus predicted classes into ANSI or HTML."""

from __future__ import annotations

import html
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .frontends import Token
from .hc import HighlightClass

DEFAULT_ANSI = {
    HighlightClass.KEYWORD: "1;35",
    HighlightClass.LITERAL: "36",
    HighlightClass.CHAR_STRING_LITERAL: "32",
    HighlightClass.COMMENT: "90",
    HighlightClass.TYPE_IDENTIFIER: "33",
    HighlightClass.FUNCTION_IDENTIFIER: "34",
    HighlightClass.FIELD_IDENTIFIER: "96",
    HighlightClass.CLASS_DECLARATOR: "1;33",
    HighlightClass.FUNCTION_DECLARATOR: "1;34",
    HighlightClass.VARIABLE_DECLARATOR: "1;37",
    HighlightClass.ANNOTATION_DECLARATOR: "95",
}


@dataclass(frozen=True)
class Theme:
    ansi: Mapping[HighlightClass, str]
    css_prefix: str = "hc-"

    def __post_init__(self):
        missing = [hc.label for hc in HighlightClass
                   if hc is not HighlightClass.UNHIGHLIGHTED and hc not in self.ansi]
        if missing:
            raise ValueError(f"theme has no style for {', '.join(missing)}")

    def sgr(self, code: int) -> str | None:
        hc = HighlightClass(code)
        return None if hc is HighlightClass.UNHIGHLIGHTED else self.ansi[hc]

    def css_class(self, code: int) -> str | None:
        hc = HighlightClass(code)
        return None if hc is HighlightClass.UNHIGHLIGHTED else self.css_prefix + hc.label


DEFAULT_THEME = Theme(DEFAULT_ANSI)


def load_theme(path: str | Path) -> Theme:
    """JSON object mapping class names (e.g. ``"keyword"``) to SGR parameter strings."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    styles = doc.get("ansi", doc)
    by_label = {hc.label: hc for hc in HighlightClass}
    ansi = dict(DEFAULT_ANSI)
    for name, sgr in styles.items():
        if name not in by_label:
            raise ValueError(f"unknown highlight class {name!r} in theme")
        if by_label[name] is not HighlightClass.UNHIGHLIGHTED:
            ansi[by_label[name]] = str(sgr)
    return Theme(ansi, doc.get("css_prefix", "hc-"))


def render_ansi(tokens: Sequence[Token], labels: Sequence[int], theme: Theme = DEFAULT_THEME) -> str:
    out = []
    for tok, code in zip(tokens, labels):
        if not tok.text:
            continue
        sgr = None if tok.is_whitespace else theme.sgr(code)
        out.append(tok.text if sgr is None else f"\x1b[{sgr}m{tok.text}\x1b[0m")
    return "".join(out)


def render_html(tokens: Sequence[Token], labels: Sequence[int], theme: Theme = DEFAULT_THEME) -> str:
    out = []
    for tok, code in zip(tokens, labels):
        if not tok.text:
            continue
        text = html.escape(tok.text, quote=False)
        css = None if tok.is_whitespace else theme.css_class(code)
        out.append(text if css is None else f'<span class="{css}">{text}</span>')
    return "".join(out)


def render(tokens: Sequence[Token], labels: Sequence[int], fmt: str, theme: Theme = DEFAULT_THEME) -> str:
    if fmt == "ansi":
        return render_ansi(tokens, labels, theme)
    if fmt == "html":
        return render_html(tokens, labels, theme)
    raise ValueError(f"unknown format {fmt!r}")
