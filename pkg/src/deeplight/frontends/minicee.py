"""MiniCee: a small C-flavoured language with structs, pointers and typed functions."""

from __future__ import annotations

from typing import Sequence

from ..hc import HighlightClass as HC
from . import _gen
from .base import (AstNode, Parser, RegexLexer, Role, Token, TokenTypes, label_tokens, node,
                   ops_pattern)

KEYWORDS = {
    "struct": "KW_STRUCT", "int": "KW_INT", "char": "KW_CHAR", "void": "KW_VOID", "if": "KW_IF",
    "else": "KW_ELSE", "while": "KW_WHILE", "for": "KW_FOR", "return": "KW_RETURN",
    "break": "KW_BREAK", "continue": "KW_CONTINUE", "sizeof": "KW_SIZEOF", "NULL": "KW_NULL",
    "typedef": "KW_TYPEDEF", "enum": "KW_ENUM", "switch": "KW_SWITCH", "case": "KW_CASE",
    "default": "KW_DEFAULT", "const": "KW_CONST", "unsigned": "KW_UNSIGNED", "static": "KW_STATIC",
    "do": "KW_DO",
}

OPERATORS = [
    ("PLUS", "+"), ("MINUS", "-"), ("STAR", "*"), ("SLASH", "/"), ("PERCENT", "%"),
    ("ASSIGN", "="), ("EQ", "=="), ("NE", "!="), ("LT", "<"), ("GT", ">"), ("LE", "<="),
    ("GE", ">="), ("AND", "&&"), ("OR", "||"), ("NOT", "!"), ("AMP", "&"), ("LPAREN", "("),
    ("RPAREN", ")"), ("LBRACE", "{"), ("RBRACE", "}"), ("LBRACKET", "["), ("RBRACKET", "]"),
    ("SEMI", ";"), ("COMMA", ","), ("DOT", "."), ("ARROW", "->"), ("PLUS_ASSIGN", "+="),
    ("MINUS_ASSIGN", "-="), ("INC", "++"), ("DEC", "--"), ("QUESTION", "?"), ("COLON", ":"),
]

TYPES = TokenTypes(
    ["WS", "ERROR", "IDENT", "INT_LIT", "STRING_LIT", "CHAR_LIT", "LINE_COMMENT", "BLOCK_COMMENT"]
    + list(KEYWORDS.values())
    + [name for name, _ in OPERATORS]
)

_RULES = [
    ("WS", r"[ \t\r\n]+"),
    ("BLOCK_COMMENT", r"/\*.*?(?:\*/|\Z)"),
    ("LINE_COMMENT", r"//[^\n]*"),
    ("STRING_LIT", r'"(?:[^"\\]|\\.|\\\Z)*(?:"|\Z)'),
    ("CHAR_LIT", r"'(?:[^'\\]|\\.|\\\Z)*(?:'|\Z)"),
    ("INT_LIT", r"[0-9]+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
] + ops_pattern(OPERATORS)

LEXER = RegexLexer(TYPES, _RULES, KEYWORDS)

LEXICAL = {TYPES[k]: HC.KEYWORD for k in KEYWORDS.values()}
LEXICAL.update({
    TYPES["KW_NULL"]: HC.LITERAL, TYPES["INT_LIT"]: HC.LITERAL,
    TYPES["STRING_LIT"]: HC.CHAR_STRING_LITERAL, TYPES["CHAR_LIT"]: HC.CHAR_STRING_LITERAL,
    TYPES["LINE_COMMENT"]: HC.COMMENT, TYPES["BLOCK_COMMENT"]: HC.COMMENT,
})

ROLE_RULES = {
    "StructDecl": [("name", Role.CLASS_DECL)],
    "EnumDecl": [("name", Role.CLASS_DECL), ("consts", Role.VAR_DECL)],
    "Typedef": [("name", Role.TYPE)],
    "FuncDecl": [("name", Role.FUNC_DECL)],
    "VarDecl": [("name", Role.VAR_DECL)],
    "Param": [("name", Role.VAR_DECL)],
    "Call": [("callee", Role.CALLEE)],
    "Member": [("name", Role.MEMBER)],
    "TypeRef": [("name", Role.TYPE)],
}

_BASE_TYPES = ("KW_INT", "KW_CHAR", "KW_VOID")
_QUALIFIERS = ("KW_CONST", "KW_UNSIGNED", "KW_STATIC")
_ASSIGN_OPS = ("ASSIGN", "PLUS_ASSIGN", "MINUS_ASSIGN")
_BINARY_LEVELS = (
    ("OR",), ("AND",), ("EQ", "NE"), ("LT", "GT", "LE", "GE"), ("PLUS", "MINUS"),
    ("STAR", "SLASH", "PERCENT"),
)


class _CeeParser(Parser):
    """Recursive descent with a typedef table: ``Name *p;`` is a declaration only if
    ``Name`` was introduced by an earlier ``typedef``, exactly as in C."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.typedefs: set[str] = set()

    def _text(self, ahead: int = 0) -> str | None:
        j = self.pos + ahead
        return self.tokens[self.sig[j]].text if j < len(self.sig) else None

    def program(self) -> AstNode:
        items = []
        while not self.at_end():
            if self.at("KW_STRUCT") and self.peek_name(2) == "LBRACE":
                items.append(self.struct_decl())
            elif self.at("KW_ENUM") and self.peek_name(2) == "LBRACE":
                items.append(self.enum_decl())
            elif self.at("KW_TYPEDEF"):
                items.append(self.typedef())
            else:
                items.append(self.declaration(top=True))
        return node("Program", items)

    def struct_decl(self) -> AstNode:
        kw = self.leaf()
        name = self.expect("IDENT", what="identifier")
        parts = [kw, name, self.expect("LBRACE")]
        while not self.at("RBRACE"):
            if self.at_end():
                raise self.error("}")
            parts.append(self.var_decl())
        parts += [self.leaf(), self.expect("SEMI")]
        return node("StructDecl", parts, name=name)

    def enum_decl(self) -> AstNode:
        kw = self.leaf()
        name = self.expect("IDENT", what="identifier")
        parts = [kw, name, self.expect("LBRACE")]
        consts = []
        while not self.at("RBRACE"):
            consts.append(self.expect("IDENT", what="enumerator"))
            parts.append(consts[-1])
            if self.at("ASSIGN"):
                parts += [self.leaf(), self.expect("INT_LIT", what="enumerator value")]
            if not self.at("COMMA"):
                break
            parts.append(self.leaf())
        parts += [self.expect("RBRACE"), self.expect("SEMI")]
        return node("EnumDecl", parts, name=name, consts=consts)

    def typedef(self) -> AstNode:
        kw = self.leaf()
        tref = self.type_ref()
        name = self.expect("IDENT", what="type name")
        self.typedefs.add(self.tokens[name.token_refs[0]].text)
        return node("Typedef", [kw, tref, name, self.expect("SEMI")], name=name)

    def at_type(self, ahead: int = 0) -> bool:
        name = self.peek_name(ahead)
        if name in _BASE_TYPES or name in _QUALIFIERS or name in ("KW_STRUCT", "KW_ENUM"):
            return True
        return name == "IDENT" and self._text(ahead) in self.typedefs

    def type_ref(self) -> AstNode:
        parts = []
        while self.at(*_QUALIFIERS):
            parts.append(self.leaf())
        name = None
        if self.at(*_BASE_TYPES):
            parts.append(self.leaf())
        elif self.at("KW_STRUCT", "KW_ENUM"):
            parts.append(self.leaf())
            name = self.expect("IDENT", what="type name")
            parts.append(name)
        elif self.at("IDENT") and self._text() in self.typedefs:
            name = self.leaf()
            parts.append(name)
        elif not (parts and parts[-1].kind == "tok:KW_UNSIGNED"):
            raise self.error("type")
        while self.at("STAR"):
            parts.append(self.leaf())
        return node("TypeRef", parts, name=name)

    def _declarator(self) -> tuple[AstNode, list[AstNode]]:
        """Declared name plus the tokens around it (function-pointer syntax included)."""
        if not (self.at("LPAREN") and self.peek_name(1) == "STAR"):
            name = self.expect("IDENT", what="identifier")
            return name, [name]
        parts = [self.leaf(), self.leaf()]
        name = self.expect("IDENT", what="identifier")
        parts += [name, self.expect("RPAREN"), self.expect("LPAREN")]
        if not self.at("RPAREN"):
            parts.append(self.type_ref())
            while self.at("COMMA"):
                parts += [self.leaf(), self.type_ref()]
        parts.append(self.expect("RPAREN"))
        return name, parts

    def declaration(self, top: bool = False) -> AstNode:
        tref = self.type_ref()
        name, dparts = self._declarator()
        if top and len(dparts) == 1 and self.at("LPAREN"):
            parts = [tref, name, self.leaf()]
            if self.at("KW_VOID") and self.peek_name(1) == "RPAREN":
                parts.append(self.leaf())
            elif not self.at("RPAREN"):
                while True:
                    ptype = self.type_ref()
                    pname = self.expect("IDENT", what="parameter name")
                    parts.append(node("Param", [ptype, pname], name=pname))
                    if not self.at("COMMA"):
                        break
                    parts.append(self.leaf())
            parts.append(self.expect("RPAREN"))
            parts.append(self.leaf() if self.at("SEMI") else self.block())
            return node("FuncDecl", parts, name=name)
        return self._var_rest(tref, name, dparts, semi=True)

    def var_decl(self, semi: bool = True) -> AstNode:
        tref = self.type_ref()
        name, dparts = self._declarator()
        return self._var_rest(tref, name, dparts, semi)

    def _var_rest(self, tref: AstNode, name: AstNode, dparts: list[AstNode], semi: bool) -> AstNode:
        parts = [tref, *dparts]
        if self.at("LBRACKET"):
            parts += [self.leaf(), self.expect("INT_LIT", what="array size"), self.expect("RBRACKET")]
        if self.at("ASSIGN"):
            parts.append(self.leaf())
            parts.append(self.initializer() if self.at("LBRACE") else self.expr())
        if semi:
            parts.append(self.expect("SEMI"))
        return node("VarDecl", parts, name=name)

    def initializer(self) -> AstNode:
        parts = [self.leaf()]
        while not self.at("RBRACE"):
            parts.append(self.expr())
            if not self.at("COMMA"):
                break
            parts.append(self.leaf())
        parts.append(self.expect("RBRACE"))
        return node("Init", parts)

    def block(self) -> AstNode:
        parts = [self.expect("LBRACE")]
        while not self.at("RBRACE"):
            if self.at_end():
                raise self.error("}")
            parts.append(self.statement())
        parts.append(self.leaf())
        return node("Block", parts)

    def simple(self, semi: bool = False) -> AstNode:
        parts = [self.expr()]
        if self.at(*_ASSIGN_OPS):
            kind = "Assign"
            parts += [self.leaf(), self.expr()]
        elif self.at("INC", "DEC"):
            kind = "Step"
            parts.append(self.leaf())
        else:
            kind = "ExprStmt"
        if semi:
            parts.append(self.expect("SEMI"))
        return node(kind, parts)

    def switch(self) -> AstNode:
        parts = [self.leaf(), self.expect("LPAREN"), self.expr(), self.expect("RPAREN"), self.expect("LBRACE")]
        while not self.at("RBRACE"):
            if self.at("KW_CASE"):
                parts += [self.leaf(), self.binary(0), self.expect("COLON")]
            elif self.at("KW_DEFAULT"):
                parts += [self.leaf(), self.expect("COLON")]
            elif self.at_end():
                raise self.error("}")
            else:
                parts.append(self.statement())
        parts.append(self.leaf())
        return node("Switch", parts)

    def statement(self) -> AstNode:
        name = self.peek_name()
        if name == "LBRACE":
            return self.block()
        if name == "KW_IF":
            parts = [self.leaf(), self.expect("LPAREN"), self.expr(), self.expect("RPAREN"), self.statement()]
            if self.at("KW_ELSE"):
                parts += [self.leaf(), self.statement()]
            return node("If", parts)
        if name == "KW_WHILE":
            return node("While", [self.leaf(), self.expect("LPAREN"), self.expr(), self.expect("RPAREN"),
                                  self.statement()])
        if name == "KW_DO":
            return node("DoWhile", [self.leaf(), self.statement(), self.expect("KW_WHILE"),
                                    self.expect("LPAREN"), self.expr(), self.expect("RPAREN"),
                                    self.expect("SEMI")])
        if name == "KW_SWITCH":
            return self.switch()
        if name == "KW_FOR":
            parts = [self.leaf(), self.expect("LPAREN")]
            parts.append(self.var_decl(semi=False) if self.at_type() else self.simple())
            parts += [self.expect("SEMI"), self.expr(), self.expect("SEMI"), self.simple(),
                      self.expect("RPAREN"), self.statement()]
            return node("For", parts)
        if name == "KW_RETURN":
            parts = [self.leaf()]
            if not self.at("SEMI"):
                parts.append(self.expr())
            parts.append(self.expect("SEMI"))
            return node("Return", parts)
        if name in ("KW_BREAK", "KW_CONTINUE"):
            return node("Jump", [self.leaf(), self.expect("SEMI")])
        if self.at_type():
            return self.var_decl()
        return self.simple(semi=True)

    def expr(self) -> AstNode:
        cond = self.binary(0)
        if not self.at("QUESTION"):
            return cond
        q = self.leaf()
        then = self.expr()
        return node("Ternary", [cond, q, then, self.expect("COLON"), self.expr()])

    def binary(self, level: int) -> AstNode:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.at(*_BINARY_LEVELS[level]):
            op = self.leaf()
            left = node("Binary", [left, op, self.binary(level + 1)])
        return left

    def unary(self) -> AstNode:
        if self.at("NOT", "MINUS", "STAR", "AMP"):
            return node("Unary", [self.leaf(), self.unary()])
        if self.at("LPAREN") and self.at_type(1):
            return node("Cast", [self.leaf(), self.type_ref(), self.expect("RPAREN"), self.unary()])
        e = self.primary()
        while True:
            if self.at("DOT", "ARROW"):
                op = self.leaf()
                name = self.expect("IDENT", what="field name")
                e = node("Member", [e, op, name], obj=e, name=name)
            elif self.at("LPAREN"):
                e = node("Call", [e, self.leaf(), *self.args(), self.expect("RPAREN")], callee=e)
            elif self.at("LBRACKET"):
                e = node("Index", [e, self.leaf(), self.expr(), self.expect("RBRACKET")])
            else:
                return e

    def args(self) -> list[AstNode]:
        out = []
        if self.at("RPAREN"):
            return out
        while True:
            out.append(self.expr())
            if not self.at("COMMA"):
                return out
            out.append(self.leaf())

    def primary(self) -> AstNode:
        if self.at("INT_LIT", "STRING_LIT", "CHAR_LIT", "KW_NULL", "IDENT"):
            return self.leaf()
        if self.at("LPAREN"):
            return node("Paren", [self.leaf(), self.expr(), self.expect("RPAREN")])
        if self.at("KW_SIZEOF"):
            kw, lp = self.leaf(), self.expect("LPAREN")
            inner = self.type_ref() if self.at_type() else self.expr()
            return node("Sizeof", [kw, lp, inner, self.expect("RPAREN")])
        raise self.error("expression")


def lex(source: str) -> list[Token]:
    return LEXER.raw_tokens(source)


def parse(tokens: Sequence[Token]) -> AstNode:
    return _CeeParser(tokens, TYPES, trivia=("WS", "LINE_COMMENT", "BLOCK_COMMENT")).program()


def resolve(tokens: Sequence[Token], ast: AstNode) -> list[int]:
    return label_tokens(tokens, ast, LEXICAL, ROLE_RULES, TYPES["IDENT"])


# -- generator ----------------------------------------------------------------------

_CHARS = ("'a'", "'0'", "'\\n'", "' '", "'x'", "'\\0'")


class _CeeGen:
    def __init__(self, seed: int, depth: int, weights=None):
        self.c = _gen.GenContext("minicee", seed, weights)
        self.depth = depth
        self.out = _gen.Writer()
        self.structs: list[str] = []
        self.enums: dict[str, tuple[str, ...]] = {}
        self.typedefs: list[str] = []

    def run(self) -> str:
        c, out = self.c, self.out
        if c.p("p_file_comment"):
            out.line(f"/* {c.pick(_gen.COMMENTS)} */")
        for _ in range(c.count("structs")):
            self.struct_decl()
            out.blank()
        for _ in range(c.count("enums")):
            self.enum_decl()
            out.blank()
        for _ in range(c.count("typedefs")):
            self.typedef()
        for _ in range(c.count("globals")):
            prefix = c.pick(("static ", "const ")) if c.p("p_qualifier") else ""
            out.line(prefix + self.var_decl(0) + ";")
        for _ in range(c.count("functions")):
            if out.lines and out.lines[-1]:
                out.blank()
            self.function()
        return out.text()

    def base_type(self, allow_void: bool = False) -> str:
        c = self.c
        r = c.rng.random()
        if self.typedefs and r < c.w["p_typedef_type"]:
            return c.pick(self.typedefs) + " "
        if r < c.w["p_struct_type"] and (self.structs or c.p("p_foreign_struct")):
            return f"struct {c.pick(self.structs or _gen.CLASS_NAMES)} "
        if self.enums and c.p("p_enum_type"):
            return f"enum {c.pick(list(self.enums))} "
        t = c.pick(("int", "char") + (("void",) if allow_void else ()))
        if t != "void" and c.p("p_unsigned"):
            t = "unsigned " + t
        return t + " "

    def type_name(self, allow_void: bool = False) -> str:
        t = self.base_type(allow_void).rstrip()
        if self.c.p("p_pointer") and (not t.endswith("void") or allow_void):
            t += " *"
        return t

    def _decl(self, tname: str, name: str) -> str:
        return f"{tname}{name}" if tname.endswith("*") else f"{tname} {name}"

    def struct_decl(self) -> None:
        c, out = self.c, self.out
        name = c.pick(_gen.CLASS_NAMES)
        out.line(f"struct {name} {{")
        out.level += 1
        for _ in range(c.count("fields")):
            out.line(self._decl(self.type_name(), c.pick(_gen.VAR_NAMES)) + ";")
        out.level -= 1
        out.line("};")
        self.structs.append(name)

    def enum_decl(self) -> None:
        c, out = self.c, self.out
        name = c.pick(_gen.CLASS_NAMES)
        consts = tuple(c.rng.sample(_gen.ENUM_NAMES, c.rng.randint(2, 4)))
        items = [f"{k} = {c.int_lit()}" if c.p("p_enum_value") else k for k in consts]
        if c.p("p_enum_multiline"):
            out.line(f"enum {name} {{")
            out.level += 1
            for item in items:
                out.line(item + ",")
            out.level -= 1
            out.line("};")
        else:
            out.line(f"enum {name} {{ {', '.join(items)} }};")
        self.enums[name] = consts

    def typedef(self) -> None:
        c = self.c
        r = c.rng.random()
        if self.structs and r < 0.6:
            target = c.pick(self.structs)
            if c.p("p_pointer"):
                alias = target + "Ref"
                self.out.line(f"typedef struct {target} *{alias};")
            else:
                alias = target + c.pick(("", "T"))
                self.out.line(f"typedef struct {target} {alias};")
        else:
            alias = c.pick(_gen.TYPEDEF_NAMES)
            self.out.line(f"typedef {c.pick(('int', 'unsigned char', 'char *', 'unsigned int'))} {alias};")
        if alias not in self.typedefs:
            self.typedefs.append(alias)

    def var_decl(self, depth: int) -> str:
        c = self.c
        name = c.pick(_gen.VAR_NAMES)
        if c.p("p_fnptr"):
            args = ", ".join(self.type_name() for _ in range(c.rng.randint(1, 2)))
            return f"{self.type_name(True)} (*{name})({args})"
        text = self._decl(self.type_name(), name)
        if c.p("p_array"):
            text += f"[{c.int_lit()}]"
            if c.p("p_array_init"):
                text += " = {" + ", ".join(self.expr(0) for _ in range(c.count("args"))) + "}"
        elif c.p("p_local_init"):
            text += f" = {self.expr(depth)}"
        return text

    def function(self) -> None:
        c, out = self.c, self.out
        params = [self._decl(self.type_name(), c.pick(_gen.VAR_NAMES)) for _ in range(c.count("params"))]
        plist = ", ".join(params) if params else ("void" if c.p("p_void_params") else "")
        static = "static " if c.p("p_static_fn") else ""
        head = f"{static}{self._decl(self.type_name(True), c.pick(_gen.FUNC_NAMES))}({plist})"
        if c.p("p_prototype"):
            out.line(head + ";")
            return
        out.line(head + " {")
        self.body(self.depth, in_loop=False)
        out.line("}")

    def body(self, depth: int, in_loop: bool) -> None:
        self.out.level += 1
        for _ in range(self.c.count("stmts")):
            self.statement(depth, in_loop)
        self.out.level -= 1

    def lvalue(self) -> str:
        c = self.c
        r = c.rng.random()
        if r < 0.55:
            return c.pick(_gen.VAR_NAMES)
        if r < 0.75:
            return f"{c.pick(_gen.VAR_NAMES)}->{c.pick(_gen.VAR_NAMES)}"
        if r < 0.9:
            return f"{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}"
        return f"*{c.pick(_gen.VAR_NAMES)}"

    def statement(self, depth: int, in_loop: bool) -> None:
        c, out = self.c, self.out
        exclude = [] if depth > 1 else ["if", "while", "for", "do", "switch"]
        if not in_loop:
            exclude.append("jump")
        kind = c.weighted("stmt_weights", exclude)
        e = depth - 1
        if kind == "local":
            out.line(self.var_decl(e) + ";")
        elif kind == "assign":
            out.line(f"{self.lvalue()} {c.pick(('=', '=', '+=', '-='))} {self.expr(e)};")
        elif kind == "call":
            out.line(self.call(e) + ";")
        elif kind == "if":
            out.line(f"if ({self.expr(e)}) {{")
            self.body(depth - 1, in_loop)
            if c.p("p_else"):
                out.line("} else {")
                self.body(depth - 1, in_loop)
            out.line("}")
        elif kind == "while":
            out.line(f"while ({self.expr(e)}) {{")
            self.body(depth - 1, True)
            out.line("}")
        elif kind == "do":
            out.line("do {")
            self.body(depth - 1, True)
            out.line(f"}} while ({self.expr(e)});")
        elif kind == "for":
            v = c.pick(_gen.VAR_NAMES)
            out.line(f"for (int {v} = 0; {v} < {self.expr(0)}; {v}++) {{")
            self.body(depth - 1, True)
            out.line("}")
        elif kind == "switch":
            out.line(f"switch ({self.operand()}) {{")
            labels = self.case_labels()
            for label in labels:
                out.line(label)
                self.body(depth - 1, True)
                if c.p("p_case_break"):
                    out.level += 1
                    out.line("break;")
                    out.level -= 1
            out.line("}")
        elif kind == "return":
            out.line(f"return {self.expr(e)};" if c.p("p_return_value") else "return;")
        elif kind == "step":
            out.line(f"{self.lvalue()}{c.pick(('++', '--'))};")
        elif kind == "jump":
            out.line(c.pick(("break;", "continue;")))
        elif kind == "comment":
            text = c.pick(_gen.COMMENTS)
            out.line(f"// {text}" if c.rng.random() < 0.6 else f"/* {text} */")
        else:  # pragma: no cover
            raise KeyError(kind)

    def case_labels(self) -> list[str]:
        c = self.c
        n = c.count("cases")
        if self.enums and c.p("p_enum_case"):
            values = list(c.pick(list(self.enums.values())))[:n]
        else:
            values = c.rng.sample(["0", "1", "2", "3", "'a'", "'x'", "10"], n)
        labels = [f"case {v}:" for v in values]
        if c.p("p_default"):
            labels.append("default:")
        return labels

    def call(self, depth: int) -> str:
        c = self.c
        args = ", ".join(self.expr(depth - 1) for _ in range(c.count("args")))
        r = c.rng.random()
        if r < 0.75:
            return f"{c.pick(_gen.FUNC_NAMES)}({args})"
        return f"{c.pick(_gen.VAR_NAMES)}->{c.pick(_gen.FUNC_NAMES)}({args})"

    def operand(self) -> str:
        c = self.c
        r = c.rng.random()
        if r < 0.6:
            return c.pick(_gen.VAR_NAMES)
        return f"{c.pick(_gen.VAR_NAMES)}{c.pick(('->', '.'))}{c.pick(_gen.VAR_NAMES)}"

    def expr(self, depth: int, operand: bool = False) -> str:
        c = self.c
        exclude = () if depth > 0 else ("call", "binary", "unary", "paren", "index", "sizeof", "ternary",
                                         "cast")
        if operand:
            exclude += ("ternary",)
        if not self.enums:
            exclude += ("enum_const",)
        kind = c.weighted("expr_weights", exclude)
        d = depth - 1
        if kind == "int":
            return c.int_lit()
        if kind == "string":
            return f'"{c.pick(_gen.STRINGS)}"'
        if kind == "char":
            return c.pick(_CHARS)
        if kind == "null":
            return "NULL"
        if kind == "name":
            return c.pick(_gen.VAR_NAMES)
        if kind == "enum_const":
            return c.pick(c.pick(list(self.enums.values())))
        if kind == "member":
            op = c.pick(("->", "."))
            return f"{c.pick(_gen.VAR_NAMES)}{op}{c.pick(_gen.VAR_NAMES)}"
        if kind == "call":
            return self.call(depth)
        if kind == "binary":
            op = c.pick(("+", "-", "*", "/", "%", "==", "!=", "<", ">", "<=", ">=", "&&", "||"))
            return f"{self.expr(d, True)} {op} {self.expr(d, True)}"
        if kind == "unary":
            return c.pick(("!", "-", "*", "&")) + self.expr(0)
        if kind == "paren":
            return f"({self.expr(d)})"
        if kind == "index":
            return f"{c.pick(_gen.VAR_NAMES)}[{self.expr(d)}]"
        if kind == "sizeof":
            return f"sizeof({self.type_name()})"
        if kind == "ternary":
            return f"{self.operand()} ? {self.expr(d, True)} : {self.expr(d)}"
        if kind == "cast":
            return f"({self.type_name()}) {self.operand()}"
        raise KeyError(kind)  # pragma: no cover


def generate(seed: int, depth_budget: int, weights=None) -> str:
    if depth_budget < 1:
        raise ValueError("depth_budget must be >= 1")
    return _CeeGen(seed, depth_budget, weights).run()
