"""MiniSnake: a small Python-flavoured language with indentation-delimited suites."""

from __future__ import annotations

from typing import Sequence

from ..hc import HighlightClass as HC
from . import _gen
from .base import (AstNode, Parser, RegexLexer, Role, Span, Token, TokenTypes, label_tokens, node,
                   ops_pattern)

KEYWORDS = {
    "def": "KW_DEF", "class": "KW_CLASS", "if": "KW_IF", "elif": "KW_ELIF", "else": "KW_ELSE",
    "while": "KW_WHILE", "for": "KW_FOR", "in": "KW_IN", "return": "KW_RETURN", "pass": "KW_PASS",
    "break": "KW_BREAK", "continue": "KW_CONTINUE", "and": "KW_AND", "or": "KW_OR", "not": "KW_NOT",
    "True": "KW_TRUE", "False": "KW_FALSE", "None": "KW_NONE", "import": "KW_IMPORT",
    "from": "KW_FROM", "as": "KW_AS", "lambda": "KW_LAMBDA", "with": "KW_WITH", "try": "KW_TRY",
    "except": "KW_EXCEPT", "finally": "KW_FINALLY", "raise": "KW_RAISE", "is": "KW_IS",
}

OPERATORS = [
    ("PLUS", "+"), ("MINUS", "-"), ("STAR", "*"), ("SLASH", "/"), ("PERCENT", "%"),
    ("ASSIGN", "="), ("EQ", "=="), ("NE", "!="), ("LT", "<"), ("GT", ">"), ("LE", "<="),
    ("GE", ">="), ("LPAREN", "("), ("RPAREN", ")"), ("LBRACKET", "["), ("RBRACKET", "]"),
    ("COMMA", ","), ("DOT", "."), ("COLON", ":"), ("ARROW", "->"), ("PLUS_ASSIGN", "+="),
    ("MINUS_ASSIGN", "-="), ("LBRACE", "{"), ("RBRACE", "}"),
]

TYPES = TokenTypes(
    ["WS", "ERROR", "IDENT", "INT_LIT", "STRING_LIT", "COMMENT", "NEWLINE", "INDENT", "DEDENT", "AT"]
    + list(KEYWORDS.values())
    + [name for name, _ in OPERATORS],
    synthetic=("NEWLINE", "INDENT", "DEDENT"),
)

_RULES = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"#[^\n]*"),
    ("STRING_LIT", r'"(?:[^"\\]|\\.|\\\Z)*(?:"|\Z)' + "|" + r"'(?:[^'\\]|\\.|\\\Z)*(?:'|\Z)"),
    ("INT_LIT", r"[0-9]+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("AT", r"@"),
] + ops_pattern(OPERATORS)

_RAW = RegexLexer(TYPES, _RULES, KEYWORDS)

LEXICAL = {TYPES[k]: HC.KEYWORD for k in KEYWORDS.values()}
LEXICAL.update({
    TYPES["KW_TRUE"]: HC.LITERAL, TYPES["KW_FALSE"]: HC.LITERAL, TYPES["KW_NONE"]: HC.LITERAL,
    TYPES["INT_LIT"]: HC.LITERAL, TYPES["STRING_LIT"]: HC.CHAR_STRING_LITERAL,
    TYPES["COMMENT"]: HC.COMMENT,
})

ROLE_RULES = {
    "ClassDef": [("name", Role.CLASS_DECL)],
    "FuncDef": [("name", Role.FUNC_DECL)],
    "Param": [("name", Role.VAR_DECL)],
    "For": [("name", Role.VAR_DECL)],
    "Comprehension": [("name", Role.VAR_DECL)],
    "Assign": [("target", Role.VAR_DECL)],
    "Import": [("name", Role.VAR_DECL)],
    "With": [("name", Role.VAR_DECL)],
    "Except": [("name", Role.VAR_DECL)],
    "Keyword": [("name", Role.MEMBER)],
    "AnnAssign": [("name", Role.VAR_DECL)],
    "Decorator": [("name", Role.ANNOTATION)],
    "Call": [("callee", Role.CALLEE)],
    "Member": [("name", Role.MEMBER)],
    "TypeRef": [("name", Role.TYPE)],
}

_WS, _COMMENT = TYPES["WS"], TYPES["COMMENT"]
_NEWLINE, _INDENT, _DEDENT = TYPES["NEWLINE"], TYPES["INDENT"], TYPES["DEDENT"]
_OPEN = {TYPES["LPAREN"], TYPES["LBRACKET"], TYPES["LBRACE"]}
_CLOSE = {TYPES["RPAREN"], TYPES["RBRACKET"], TYPES["RBRACE"]}


def _synthetic(type_id: int, line: int, col: int) -> Token:
    return Token(type_id, "", Span(line, col, 0), False)


def lex(source: str) -> list[Token]:
    """Raw maximal-munch tokens plus NEWLINE/INDENT/DEDENT markers.

    A logical line ends at the first newline outside brackets after a significant
    token; blank and comment-only lines never change the indentation level.
    """
    out: list[Token] = []
    stack = [0]
    depth = 0
    has_content = False
    for tok in _RAW.raw_tokens(source):
        if tok.type_id == _WS:
            nl = tok.text.find("\n")
            if nl >= 0 and has_content and depth == 0:
                col = tok.span.col + nl
                out.append(_synthetic(_NEWLINE, tok.span.line, col))
                has_content = False
            out.append(tok)
            continue
        if tok.type_id == _COMMENT:
            out.append(tok)
            continue
        if not has_content and depth == 0:
            indent = tok.span.col - 1
            if indent > stack[-1]:
                stack.append(indent)
                out.append(_synthetic(_INDENT, tok.span.line, tok.span.col))
            else:
                while indent < stack[-1]:
                    stack.pop()
                    out.append(_synthetic(_DEDENT, tok.span.line, tok.span.col))
                if indent > stack[-1]:
                    stack.append(indent)
                    out.append(_synthetic(_INDENT, tok.span.line, tok.span.col))
        has_content = True
        if tok.type_id in _OPEN:
            depth += 1
        elif tok.type_id in _CLOSE and depth > 0:
            depth -= 1
        out.append(tok)
    if out:
        last = out[-1]
        line = last.span.line + last.text.count("\n")
        col = (len(last.text) - last.text.rfind("\n")) if "\n" in last.text else last.span.col + last.span.len
    else:
        line, col = 1, 1
    if has_content:
        out.append(_synthetic(_NEWLINE, line, col))
    for _ in stack[1:]:
        out.append(_synthetic(_DEDENT, line, col))
    return out


_COMPARE = ("EQ", "NE", "LT", "GT", "LE", "GE", "KW_IN", "KW_IS")
_ATOMS = ("IDENT", "INT_LIT", "STRING_LIT", "KW_TRUE", "KW_FALSE", "KW_NONE")


class _SnakeParser(Parser):
    def module(self) -> AstNode:
        stmts = []
        while not self.at_end():
            if self.at("NEWLINE"):
                stmts.append(self.leaf())
                continue
            stmts.append(self.statement())
        return node("Module", stmts)

    def targets(self) -> list[AstNode]:
        out = [self.expect("IDENT", what="loop variable")]
        while self.at("COMMA"):
            out += [self.leaf(), self.expect("IDENT", what="loop variable")]
        return out

    def statement(self) -> AstNode:
        name = self.peek_name()
        if name in ("AT", "KW_DEF", "KW_CLASS"):
            return self.definition()
        if name == "KW_IF":
            parts = [self.leaf(), self.expr(), self.expect("COLON"), self.suite()]
            while self.at("KW_ELIF"):
                parts += [self.leaf(), self.expr(), self.expect("COLON"), self.suite()]
            if self.at("KW_ELSE"):
                parts += [self.leaf(), self.expect("COLON"), self.suite()]
            return node("If", parts)
        if name == "KW_WHILE":
            return node("While", [self.leaf(), self.expr(), self.expect("COLON"), self.suite()])
        if name == "KW_FOR":
            kw = self.leaf()
            targets = self.targets()
            parts = [kw, *targets, self.expect("KW_IN"), self.expr(), self.expect("COLON"), self.suite()]
            return node("For", parts, name=targets[::2])
        if name == "KW_WITH":
            parts = [self.leaf(), self.expr()]
            alias = None
            if self.at("KW_AS"):
                parts.append(self.leaf())
                alias = self.expect("IDENT", what="name")
                parts.append(alias)
            parts += [self.expect("COLON"), self.suite()]
            return node("With", parts, name=alias)
        if name == "KW_TRY":
            return self.try_stmt()
        stmt = self.simple()
        stmt_nl = self.expect("NEWLINE", what="end of line")
        return node("Line", [stmt, stmt_nl])

    def try_stmt(self) -> AstNode:
        parts = [self.leaf(), self.expect("COLON"), self.suite()]
        handlers = 0
        while self.at("KW_EXCEPT"):
            hparts = [self.leaf()]
            alias = None
            if self.at("IDENT"):
                hparts.append(self.type_ref())
                if self.at("KW_AS"):
                    hparts.append(self.leaf())
                    alias = self.expect("IDENT", what="name")
                    hparts.append(alias)
            hparts += [self.expect("COLON"), self.suite()]
            parts.append(node("Except", hparts, name=alias))
            handlers += 1
        if self.at("KW_FINALLY"):
            parts += [self.leaf(), self.expect("COLON"), self.suite()]
            handlers += 1
        if not handlers:
            raise self.error("except or finally")
        return node("Try", parts)

    def definition(self) -> AstNode:
        decorators = []
        while self.at("AT"):
            at = self.leaf()
            name = self.expect("IDENT", what="decorator name")
            parts = [at, name]
            if self.at("LPAREN"):
                parts += [self.leaf(), *self.call_args(), self.expect("RPAREN")]
            parts.append(self.expect("NEWLINE", what="end of line"))
            decorators.append(node("Decorator", parts, name=name))
        if self.at("KW_CLASS"):
            kw = self.leaf()
            name = self.expect("IDENT", what="class name")
            parts = [*decorators, kw, name]
            if self.at("LPAREN"):
                parts.append(self.leaf())
                if self.at("IDENT"):
                    parts.append(self.type_ref())
                parts.append(self.expect("RPAREN"))
            parts += [self.expect("COLON"), self.suite()]
            return node("ClassDef", parts, name=name)
        kw = self.expect("KW_DEF", what="def")
        name = self.expect("IDENT", what="function name")
        parts = [*decorators, kw, name, self.expect("LPAREN")]
        if not self.at("RPAREN"):
            while True:
                pname = self.expect("IDENT", what="parameter name")
                pparts = [pname]
                if self.at("COLON"):
                    pparts += [self.leaf(), self.type_ref()]
                if self.at("ASSIGN"):
                    pparts += [self.leaf(), self.expr()]
                parts.append(node("Param", pparts, name=pname))
                if not self.at("COMMA"):
                    break
                parts.append(self.leaf())
        parts.append(self.expect("RPAREN"))
        if self.at("ARROW"):
            parts += [self.leaf(), self.type_ref()]
        parts += [self.expect("COLON"), self.suite()]
        return node("FuncDef", parts, name=name)

    def suite(self) -> AstNode:
        parts = [self.expect("NEWLINE", what="end of line"), self.expect("INDENT", what="indented block")]
        parts.append(self.statement())
        while not self.at("DEDENT"):
            if self.at_end():
                raise self.error("dedent")
            parts.append(self.statement())
        parts.append(self.leaf())
        return node("Suite", parts)

    def type_ref(self) -> AstNode:
        name = self.expect("IDENT", what="type")
        parts = [name]
        if self.at("LBRACKET"):
            parts += [self.leaf(), self.type_ref()]
            while self.at("COMMA"):
                parts += [self.leaf(), self.type_ref()]
            parts.append(self.expect("RBRACKET"))
        return node("TypeRef", parts, name=name)

    def dotted(self) -> list[AstNode]:
        out = [self.expect("IDENT", what="module name")]
        while self.at("DOT"):
            out += [self.leaf(), self.expect("IDENT", what="module name")]
        return out

    def import_stmt(self) -> AstNode:
        kw = self.leaf()
        parts = [kw]
        bound = []
        if kw.kind == "tok:KW_FROM":
            parts += [*self.dotted(), self.expect("KW_IMPORT")]
        while True:
            if kw.kind == "tok:KW_FROM":
                name = self.expect("IDENT", what="imported name")
                parts.append(name)
            else:
                name = None
                parts += self.dotted()
            if self.at("KW_AS"):
                parts.append(self.leaf())
                name = self.expect("IDENT", what="name")
                parts.append(name)
            if name is not None:
                bound.append(name)
            if not self.at("COMMA"):
                break
            parts.append(self.leaf())
        return node("Import", parts, name=bound)

    def simple(self) -> AstNode:
        name = self.peek_name()
        if name in ("KW_PASS", "KW_BREAK", "KW_CONTINUE"):
            return node("Jump", [self.leaf()])
        if name in ("KW_RETURN", "KW_RAISE"):
            parts = [self.leaf()]
            if not self.at("NEWLINE"):
                parts.append(self.expr())
            return node("Return" if name == "KW_RETURN" else "Raise", parts)
        if name in ("KW_IMPORT", "KW_FROM"):
            return self.import_stmt()
        if name == "IDENT" and self.peek_name(1) == "COLON":
            target = self.leaf()
            parts = [target, self.leaf(), self.type_ref()]
            if self.at("ASSIGN"):
                parts += [self.leaf(), self.expr()]
            return node("AnnAssign", parts, name=target)
        targets = self.expr_list()
        if self.at("ASSIGN"):
            plain = [t for t in targets if t.kind == "tok:IDENT"]
            return node("Assign", [*targets, self.leaf(), *self.expr_list()], target=plain)
        if self.at("PLUS_ASSIGN", "MINUS_ASSIGN"):
            return node("AugAssign", [*targets, self.leaf(), self.expr()])
        return node("ExprStmt", targets)

    def expr_list(self) -> list[AstNode]:
        out = [self.expr()]
        while self.at("COMMA"):
            out += [self.leaf(), self.expr()]
        return out

    # -- expressions --
    def expr(self) -> AstNode:
        if self.at("KW_LAMBDA"):
            parts = [self.leaf()]
            while self.at("IDENT"):
                pname = self.leaf()
                parts.append(node("Param", [pname], name=pname))
                if not self.at("COMMA"):
                    break
                parts.append(self.leaf())
            parts += [self.expect("COLON"), self.expr()]
            return node("Lambda", parts)
        left = self.and_test()
        while self.at("KW_OR"):
            left = node("Binary", [left, self.leaf(), self.and_test()])
        return left

    def and_test(self) -> AstNode:
        left = self.not_test()
        while self.at("KW_AND"):
            left = node("Binary", [left, self.leaf(), self.not_test()])
        return left

    def not_test(self) -> AstNode:
        if self.at("KW_NOT"):
            return node("Unary", [self.leaf(), self.not_test()])
        left = self.arith()
        while self.at(*_COMPARE) or (self.at("KW_NOT") and self.peek_name(1) == "KW_IN"):
            ops = [self.leaf()]
            if ops[0].kind == "tok:KW_NOT":
                ops.append(self.leaf())
            elif ops[0].kind == "tok:KW_IS" and self.at("KW_NOT"):
                ops.append(self.leaf())
            left = node("Binary", [left, *ops, self.arith()])
        return left

    def arith(self) -> AstNode:
        left = self.term()
        while self.at("PLUS", "MINUS"):
            left = node("Binary", [left, self.leaf(), self.term()])
        return left

    def term(self) -> AstNode:
        left = self.factor()
        while self.at("STAR", "SLASH", "PERCENT"):
            left = node("Binary", [left, self.leaf(), self.factor()])
        return left

    def factor(self) -> AstNode:
        if self.at("MINUS"):
            return node("Unary", [self.leaf(), self.factor()])
        e = self.atom()
        while True:
            if self.at("DOT"):
                dot = self.leaf()
                name = self.expect("IDENT", what="attribute name")
                e = node("Member", [e, dot, name], obj=e, name=name)
            elif self.at("LPAREN"):
                e = node("Call", [e, self.leaf(), *self.call_args(), self.expect("RPAREN")], callee=e)
            elif self.at("LBRACKET"):
                e = node("Index", [e, self.leaf(), self.expr(), self.expect("RBRACKET")])
            else:
                return e

    def call_args(self) -> list[AstNode]:
        out = []
        while not self.at("RPAREN"):
            if self.at("IDENT") and self.peek_name(1) == "ASSIGN":
                name = self.leaf()
                out.append(node("Keyword", [name, self.leaf(), self.expr()], name=name))
            else:
                out.append(self.expr())
            if not self.at("COMMA"):
                break
            out.append(self.leaf())
        return out

    def args(self, close: str) -> list[AstNode]:
        out = []
        if self.at(close):
            return out
        while True:
            out.append(self.expr())
            if not self.at("COMMA"):
                return out
            out.append(self.leaf())

    def list_display(self) -> AstNode:
        lb = self.leaf()
        if self.at("RBRACKET"):
            return node("List", [lb, self.leaf()])
        first = self.expr()
        if not self.at("KW_FOR"):
            parts = [lb, first]
            if self.at("COMMA"):
                parts += [self.leaf(), *self.args("RBRACKET")]
            return node("List", [*parts, self.expect("RBRACKET")])
        kw = self.leaf()
        targets = self.targets()
        parts = [lb, first, kw, *targets, self.expect("KW_IN"), self.expr()]
        if self.at("KW_IF"):
            parts += [self.leaf(), self.expr()]
        parts.append(self.expect("RBRACKET"))
        return node("Comprehension", parts, name=targets[::2])

    def dict_display(self) -> AstNode:
        parts = [self.leaf()]
        while not self.at("RBRACE"):
            parts += [self.expr(), self.expect("COLON"), self.expr()]
            if not self.at("COMMA"):
                break
            parts.append(self.leaf())
        parts.append(self.expect("RBRACE"))
        return node("Dict", parts)

    def atom(self) -> AstNode:
        if self.at(*_ATOMS):
            return self.leaf()
        if self.at("LPAREN"):
            return node("Paren", [self.leaf(), self.expr(), self.expect("RPAREN")])
        if self.at("LBRACKET"):
            return self.list_display()
        if self.at("LBRACE"):
            return self.dict_display()
        raise self.error("expression")


def parse(tokens: Sequence[Token]) -> AstNode:
    return _SnakeParser(tokens, TYPES, trivia=("WS", "COMMENT")).module()


def resolve(tokens: Sequence[Token], ast: AstNode) -> list[int]:
    return label_tokens(tokens, ast, LEXICAL, ROLE_RULES, TYPES["IDENT"])


# -- generator ----------------------------------------------------------------------

_TYPE_HINTS = ("int", "str", "bool", "float", "list", "dict")


class _SnakeGen:
    def __init__(self, seed: int, depth: int, weights=None):
        self.c = _gen.GenContext("minisnake", seed, weights)
        self.depth = depth
        self.out = _gen.Writer()
        self.classes: list[str] = []

    def run(self) -> str:
        c = self.c
        if c.p("p_file_comment"):
            self.out.line(f"# {c.pick(_gen.COMMENTS)}")
        imports = c.count("imports")
        for _ in range(imports):
            self.import_line()
        for i in range(c.count("items")):
            if i or imports:
                self.out.blank()
            kind = c.weighted("item_weights")
            if kind == "def":
                self.funcdef(method=False)
            elif kind == "class":
                self.classdef()
            else:
                self.statement(self.depth, in_loop=False, in_func=False)
        return self.out.text()

    def import_line(self) -> None:
        c = self.c
        module = c.pick(_gen.MODULE_NAMES)
        if c.p("p_from_import"):
            names = []
            for _ in range(c.rng.randint(1, 2)):
                name = c.pick(_gen.FUNC_NAMES + _gen.CLASS_NAMES)
                names.append(f"{name} as {c.pick(_gen.VAR_NAMES)}" if c.p("p_alias") else name)
            self.out.line(f"from {module} import {', '.join(names)}")
        elif c.p("p_alias"):
            self.out.line(f"import {module} as {c.pick(_gen.VAR_NAMES)}")
        else:
            self.out.line(f"import {module}")

    def decorators(self) -> None:
        c = self.c
        if c.p("p_decorator"):
            name = c.pick(_gen.ANNOTATION_NAMES).lower()
            if c.p("p_decorator_args"):
                self.out.line(f"@{name}({self.arg(0)})")
            else:
                self.out.line(f"@{name}")

    def type_hint(self) -> str:
        c = self.c
        if c.p("p_generic_hint"):
            outer = c.pick(("list", "dict", "set", "tuple"))
            arity = 2 if outer in ("dict", "tuple") else 1
            return f"{outer}[{', '.join(self.type_hint() for _ in range(arity))}]"
        return c.pick(_TYPE_HINTS + tuple(self.classes or _gen.CLASS_NAMES[:4]))

    def classdef(self) -> None:
        c, out = self.c, self.out
        self.decorators()
        name = c.pick(_gen.CLASS_NAMES)
        self.classes.append(name)
        base = f"({c.pick(_gen.CLASS_NAMES)})" if c.p("p_base") else ""
        out.line(f"class {name}{base}:")
        out.level += 1
        for _ in range(c.count("methods")):
            if c.p("p_class_attr"):
                out.line(f"{c.pick(_gen.VAR_NAMES)} = {self.expr(0)}")
            else:
                self.funcdef(method=True)
        out.level -= 1

    def funcdef(self, method: bool) -> None:
        c, out = self.c, self.out
        self.decorators()
        params = ["self"] if method else []
        defaults = False
        for _ in range(c.count("params")):
            p = c.pick(_gen.VAR_NAMES)
            if c.p("p_param_hint"):
                p += f": {self.type_hint()}"
            if defaults or c.p("p_default"):
                defaults = True
                p += f" = {self.expr(0)}" if ":" in p else f"={self.expr(0)}"
            params.append(p)
        ret = f" -> {self.type_hint()}" if c.p("p_return_hint") else ""
        out.line(f"def {c.pick(_gen.FUNC_NAMES)}({', '.join(params)}){ret}:")
        self.body(self.depth, in_loop=False, in_func=True)

    def body(self, depth: int, in_loop: bool, in_func: bool) -> None:
        self.out.level += 1
        real = 0
        for _ in range(self.c.count("stmts")):
            real += self.statement(depth, in_loop, in_func)
        if not real:
            self.out.line("pass")
        self.out.level -= 1

    def lvalue(self) -> str:
        c = self.c
        if c.rng.random() < 0.7:
            return c.pick(_gen.VAR_NAMES)
        return f"{c.pick(('self',) + _gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}"

    def names(self, lo: int = 1, hi: int = 2) -> str:
        return ", ".join(self.c.rng.sample(_gen.VAR_NAMES, self.c.rng.randint(lo, hi)))

    def statement(self, depth: int, in_loop: bool, in_func: bool) -> int:
        """Emit one statement; returns 0 for comment-only lines."""
        c, out = self.c, self.out
        exclude = [] if depth > 1 else ["if", "while", "for", "with", "try"]
        if not in_loop:
            exclude.append("jump")
        if not in_func:
            exclude.append("return")
        kind = c.weighted("stmt_weights", exclude)
        e = depth - 1
        tail = f"  # {c.pick(_gen.COMMENTS)}" if c.p("p_trailing_comment") else ""
        if kind == "assign":
            out.line(f"{self.lvalue()} = {self.expr(e)}{tail}")
        elif kind == "unpack":
            targets = self.names(2, 3)
            values = ", ".join(self.expr(e) for _ in targets.split(", "))
            out.line(f"{targets} = {values if c.p('p_unpack_values') else self.call(e)}{tail}")
        elif kind == "annassign":
            out.line(f"{c.pick(_gen.VAR_NAMES)}: {self.type_hint()} = {self.expr(e)}{tail}")
        elif kind == "augassign":
            out.line(f"{self.lvalue()} {c.pick(('+=', '-='))} {self.expr(e)}{tail}")
        elif kind == "call":
            out.line(self.call(e) + tail)
        elif kind == "if":
            out.line(f"if {self.expr(e)}:")
            self.body(depth - 1, in_loop, in_func)
            if c.p("p_elif"):
                out.line(f"elif {self.expr(e)}:")
                self.body(depth - 1, in_loop, in_func)
            if c.p("p_else"):
                out.line("else:")
                self.body(depth - 1, in_loop, in_func)
        elif kind == "while":
            out.line(f"while {self.expr(e)}:")
            self.body(depth - 1, True, in_func)
        elif kind == "for":
            out.line(f"for {self.names()} in {self.expr(e)}:")
            self.body(depth - 1, True, in_func)
        elif kind == "with":
            alias = f" as {c.pick(_gen.VAR_NAMES)}" if c.p("p_alias") else ""
            out.line(f"with {self.call(0)}{alias}:")
            self.body(depth - 1, in_loop, in_func)
        elif kind == "try":
            out.line("try:")
            self.body(depth - 1, in_loop, in_func)
            for _ in range(c.count("excepts")):
                r = c.rng.random()
                exc = c.pick(_gen.EXCEPTION_NAMES)
                head = "except" if r < 0.15 else f"except {exc}" if r < 0.5 else f"except {exc} as e"
                out.line(head + ":")
                self.body(depth - 1, in_loop, in_func)
            if c.p("p_finally"):
                out.line("finally:")
                self.body(depth - 1, in_loop, in_func)
        elif kind == "raise":
            out.line(f'raise {c.pick(_gen.EXCEPTION_NAMES)}("{c.pick(_gen.STRINGS)}")')
        elif kind == "return":
            out.line(f"return {self.expr(e)}" if c.p("p_return_value") else "return")
        elif kind == "jump":
            out.line(c.pick(("break", "continue", "pass")))
        elif kind == "comment":
            out.line(f"# {c.pick(_gen.COMMENTS)}")
            return 0
        else:  # pragma: no cover
            raise KeyError(kind)
        return 1

    def arg(self, depth: int) -> str:
        c = self.c
        if c.p("p_kwarg"):
            return f"{c.pick(_gen.VAR_NAMES)}={self.expr(depth)}"
        return self.expr(depth)

    def call(self, depth: int) -> str:
        c = self.c
        args = [self.expr(depth - 1) for _ in range(c.count("args"))]
        if args and c.p("p_kwarg"):
            args[-1] = f"{c.pick(_gen.VAR_NAMES)}={args[-1]}"
        args = ", ".join(args)
        r = c.rng.random()
        if r < 0.4:
            return f"{c.pick(_gen.FUNC_NAMES)}({args})"
        if r < 0.6:
            return f"{c.pick(self.classes or _gen.CLASS_NAMES)}({args})"
        if r < 0.85:
            return f"{c.pick(('self',) + _gen.VAR_NAMES)}.{c.pick(_gen.FUNC_NAMES)}({args})"
        return f"{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.FUNC_NAMES)}({args})"

    def expr(self, depth: int, operand: bool = False) -> str:
        c = self.c
        exclude = () if depth > 0 else ("call", "binary", "unary", "paren", "index", "list", "lambda",
                                         "comprehension", "dict", "membership")
        if operand:
            exclude += ("lambda", "membership")
        kind = c.weighted("expr_weights", exclude)
        d = depth - 1
        if kind == "int":
            return c.int_lit()
        if kind == "string":
            q = c.pick(('"', "'"))
            return f"{q}{c.pick(_gen.STRINGS)}{q}"
        if kind == "bool":
            return c.pick(("True", "False"))
        if kind == "null":
            return "None"
        if kind == "name":
            return c.pick(_gen.VAR_NAMES)
        if kind == "member":
            return f"{c.pick(('self',) + _gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}"
        if kind == "call":
            return self.call(depth)
        if kind == "binary":
            op = c.pick(("+", "-", "*", "/", "%", "==", "!=", "<", ">", "<=", ">=", "and", "or"))
            right = self.expr(d, True)
            if op not in ("and", "or") and right.startswith("not "):
                right = f"({right})"
            return f"{self.expr(d, True)} {op} {right}"
        if kind == "unary":
            return c.pick(("not ", "-")) + self.expr(0)
        if kind == "paren":
            return f"({self.expr(d)})"
        if kind == "index":
            return f"{c.pick(_gen.VAR_NAMES)}[{self.expr(d)}]"
        if kind == "list":
            return "[" + ", ".join(self.expr(d) for _ in range(c.count("args"))) + "]"
        if kind == "lambda":
            return f"lambda {self.names(0, 2)}: {self.expr(d)}".replace("lambda :", "lambda:")
        if kind == "comprehension":
            cond = f" if {self.expr(0)}" if c.p("p_comp_if") else ""
            return f"[{self.expr(d, True)} for {self.names()} in {self.expr(0)}{cond}]"
        if kind == "dict":
            items = (f"{self.expr(0)}: {self.expr(d)}" for _ in range(c.count("args")))
            return "{" + ", ".join(items) + "}"
        if kind == "membership":
            if c.p("p_is_none"):
                return f"{c.pick(_gen.VAR_NAMES)} {c.pick(('is', 'is not'))} None"
            return f"{c.pick(_gen.VAR_NAMES)} {c.pick(('in', 'not in'))} {self.expr(0)}"
        raise KeyError(kind)  # pragma: no cover


def generate(seed: int, depth_budget: int, weights=None) -> str:
    if depth_budget < 1:
        raise ValueError("depth_budget must be >= 1")
    return _SnakeGen(seed, depth_budget, weights).run()
