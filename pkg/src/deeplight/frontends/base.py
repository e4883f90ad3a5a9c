"""Shared frontend machinery: tokens, AST nodes, lexer/parser/resolver scaffolding."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from ..hc import HighlightClass


@dataclass(frozen=True, slots=True)
class Span:
    line: int
    col: int
    len: int


@dataclass(frozen=True, slots=True)
class Token:
    type_id: int
    text: str
    span: Span
    is_whitespace: bool


@dataclass(eq=False)
class AstNode:
    kind: str
    children: list["AstNode"] = field(default_factory=list)
    token_refs: list[int] = field(default_factory=list)
    # Named references into ``children`` (a node or a list of nodes) for the resolver.
    fields: dict = field(default_factory=dict)

    @property
    def is_leaf(self) -> bool:
        return not self.children and len(self.token_refs) == 1 and self.kind.startswith("tok:")

    def walk(self) -> Iterator["AstNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> Iterator["AstNode"]:
        return (n for n in self.walk() if n.is_leaf)


class ParseError(Exception):
    """Invalid derivation. ``position`` counts significant (non-trivia) tokens."""

    def __init__(self, position: int, expected: str, token_index: int | None = None, found: str | None = None):
        self.position = position
        self.expected = expected
        self.token_index = token_index
        self.found = found
        where = f"token {position}"
        if found is not None:
            where += f" ({found!r})"
        super().__init__(f"parse error at {where}: expected {expected}")


class Role(enum.IntEnum):
    """Grammatical roles an identifier can pick up; lower value wins."""

    CLASS_DECL = 0
    FUNC_DECL = 1
    VAR_DECL = 2
    ANNOTATION = 3
    CALLEE = 4
    MEMBER = 5
    TYPE = 6


ROLE_CLASS = {
    Role.CLASS_DECL: HighlightClass.CLASS_DECLARATOR,
    Role.FUNC_DECL: HighlightClass.FUNCTION_DECLARATOR,
    Role.VAR_DECL: HighlightClass.VARIABLE_DECLARATOR,
    Role.ANNOTATION: HighlightClass.ANNOTATION_DECLARATOR,
    Role.CALLEE: HighlightClass.FUNCTION_IDENTIFIER,
    Role.MEMBER: HighlightClass.FIELD_IDENTIFIER,
    Role.TYPE: HighlightClass.TYPE_IDENTIFIER,
}


@dataclass(frozen=True)
class TokenType:
    type_id: int
    name: str
    is_whitespace: bool = False
    synthetic: bool = False


class TokenTypes:
    """Ordered token-type inventory for one language."""

    def __init__(self, names: Sequence[str], whitespace: str = "WS", synthetic: Iterable[str] = ()):
        if len(set(names)) != len(names):
            raise ValueError("duplicate token type names")
        synthetic = set(synthetic)
        self.types = tuple(
            TokenType(i, n, is_whitespace=(n == whitespace), synthetic=(n in synthetic))
            for i, n in enumerate(names)
        )
        self.by_name = {t.name: t.type_id for t in self.types}
        self.whitespace_id = self.by_name[whitespace]

    def __len__(self) -> int:
        return len(self.types)

    def __getitem__(self, name: str) -> int:
        return self.by_name[name]

    def name(self, type_id: int) -> str:
        return self.types[type_id].name


class RegexLexer:
    """Maximal-munch lexer driven by an ordered (type name, regex) table.

    Alternatives are tried in table order, so longer operators must precede their
    prefixes. Keywords are recognised by looking up identifier text. Any character
    no rule matches becomes a one-character ERROR token, so lexing never fails.
    """

    def __init__(self, types: TokenTypes, rules: Sequence[tuple[str, str]], keywords: Mapping[str, str],
                 ident: str = "IDENT", error: str = "ERROR"):
        self.types = types
        parts = [f"(?P<g{i}>{pattern})" for i, (_, pattern) in enumerate(rules)]
        self._master = re.compile("|".join(parts), re.DOTALL)
        self._group_type = {f"g{i}": types[name] for i, (name, _) in enumerate(rules)}
        self._keywords = {text: types[name] for text, name in keywords.items()}
        self._ident = types[ident]
        self._error = types[error]
        self._ws = types.whitespace_id

    def raw_tokens(self, source: str) -> list[Token]:
        tokens: list[Token] = []
        pos, line, col = 0, 1, 1
        n = len(source)
        match = self._master.match
        while pos < n:
            m = match(source, pos)
            if m is None or m.end() == pos:
                text = source[pos]
                type_id = self._error
            else:
                text = m.group()
                type_id = self._group_type[m.lastgroup]
                if type_id == self._ident:
                    type_id = self._keywords.get(text, type_id)
            tokens.append(Token(type_id, text, Span(line, col, len(text)), type_id == self._ws))
            newlines = text.count("\n")
            if newlines:
                line += newlines
                col = len(text) - text.rfind("\n")
            else:
                col += len(text)
            pos += len(text)
        return tokens


def ops_pattern(ops: Iterable[tuple[str, str]]) -> list[tuple[str, str]]:
    """Operator rules sorted longest-first for maximal munch."""
    return [(name, re.escape(text)) for name, text in sorted(ops, key=lambda p: -len(p[1]))]


class Parser:
    """Recursive-descent helper over the significant (non-trivia) token subsequence."""

    def __init__(self, tokens: Sequence[Token], types: TokenTypes, trivia: Iterable[str]):
        self.tokens = tokens
        self.types = types
        trivia_ids = {types[n] for n in trivia}
        self.sig = [i for i, t in enumerate(tokens) if t.type_id not in trivia_ids]
        self.pos = 0
        self._t = {t.type_id: t.name for t in types.types}

    # -- lookahead --
    def peek_name(self, ahead: int = 0) -> str | None:
        j = self.pos + ahead
        if j >= len(self.sig):
            return None
        return self._t[self.tokens[self.sig[j]].type_id]

    def at(self, *names: str) -> bool:
        return self.peek_name() in names

    def at_end(self) -> bool:
        return self.pos >= len(self.sig)

    # -- consumption --
    def error(self, expected: str) -> ParseError:
        if self.at_end():
            return ParseError(self.pos, expected, None, None)
        idx = self.sig[self.pos]
        return ParseError(self.pos, expected, idx, self.tokens[idx].text)

    def leaf(self) -> AstNode:
        idx = self.sig[self.pos]
        self.pos += 1
        return AstNode("tok:" + self._t[self.tokens[idx].type_id], [], [idx])

    def expect(self, *names: str, what: str | None = None) -> AstNode:
        if not self.at(*names):
            raise self.error(what or " or ".join(names))
        return self.leaf()

    def accept(self, *names: str) -> AstNode | None:
        return self.leaf() if self.at(*names) else None


def node(kind: str, children: Sequence[AstNode | None], **fields) -> AstNode:
    """Build an internal node; token_refs is the in-order concatenation of the children's."""
    kids = [c for c in children if c is not None]
    refs: list[int] = []
    for c in kids:
        refs.extend(c.token_refs)
    return AstNode(kind, kids, refs, {k: v for k, v in fields.items() if v is not None})


# -- brute-force resolution ---------------------------------------------------------

RoleRules = Mapping[str, Sequence[tuple[str, Role]]]


def name_token(target: AstNode, ident_kind: str = "tok:IDENT") -> int | None:
    """Token index an identifier role lands on: a bare name, or the name of a member access."""
    if target.kind == ident_kind:
        return target.token_refs[0]
    if target.kind == "Member":
        return name_token(target.fields["name"], ident_kind)
    if target.kind == "TypeRef" and "name" in target.fields:
        return name_token(target.fields["name"], ident_kind)
    return None


def resolve_roles(ast: AstNode, rules: RoleRules) -> dict[int, Role]:
    roles: dict[int, Role] = {}
    for n in ast.walk():
        for field_name, role in rules.get(n.kind, ()):
            targets = n.fields.get(field_name)
            if targets is None:
                continue
            if isinstance(targets, AstNode):
                targets = [targets]
            for target in targets:
                idx = name_token(target)
                if idx is None:
                    continue
                prev = roles.get(idx)
                if prev is None or role < prev:
                    roles[idx] = role
    return roles


def label_tokens(tokens: Sequence[Token], ast: AstNode, lexical: Mapping[int, HighlightClass],
                 rules: RoleRules, ident_id: int) -> list[int]:
    """T4 labels: lexical class by token type, then grammatical roles on identifiers."""
    labels = [int(lexical.get(t.type_id, HighlightClass.UNHIGHLIGHTED)) for t in tokens]
    for idx, role in resolve_roles(ast, rules).items():
        if tokens[idx].type_id == ident_id:
            labels[idx] = int(ROLE_CLASS[role])
    return labels


Generator = Callable[[int, int], str]
