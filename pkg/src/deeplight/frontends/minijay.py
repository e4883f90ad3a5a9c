"""MiniJay: a small Java-flavoured language with classes, typed members and annotations."""

from __future__ import annotations

from typing import Sequence

from ..hc import HighlightClass as HC
from . import _gen
from .base import (AstNode, Parser, RegexLexer, Role, Token, TokenTypes, label_tokens, node,
                   ops_pattern)

KEYWORDS = {
    "class": "KW_CLASS", "interface": "KW_INTERFACE", "extends": "KW_EXTENDS",
    "implements": "KW_IMPLEMENTS", "public": "KW_PUBLIC", "private": "KW_PRIVATE",
    "static": "KW_STATIC", "final": "KW_FINAL", "if": "KW_IF", "else": "KW_ELSE", "while": "KW_WHILE",
    "for": "KW_FOR", "return": "KW_RETURN", "new": "KW_NEW", "this": "KW_THIS", "int": "KW_INT",
    "boolean": "KW_BOOLEAN", "void": "KW_VOID", "true": "KW_TRUE", "false": "KW_FALSE",
    "null": "KW_NULL", "break": "KW_BREAK", "continue": "KW_CONTINUE", "try": "KW_TRY",
    "catch": "KW_CATCH", "finally": "KW_FINALLY", "throw": "KW_THROW", "throws": "KW_THROWS",
    "instanceof": "KW_INSTANCEOF",
}

OPERATORS = [
    ("PLUS", "+"), ("MINUS", "-"), ("STAR", "*"), ("SLASH", "/"), ("PERCENT", "%"),
    ("ASSIGN", "="), ("EQ", "=="), ("NE", "!="), ("LT", "<"), ("GT", ">"), ("LE", "<="),
    ("GE", ">="), ("AND", "&&"), ("OR", "||"), ("NOT", "!"), ("LPAREN", "("), ("RPAREN", ")"),
    ("LBRACE", "{"), ("RBRACE", "}"), ("LBRACKET", "["), ("RBRACKET", "]"), ("SEMI", ";"),
    ("COMMA", ","), ("DOT", "."), ("PLUS_ASSIGN", "+="), ("MINUS_ASSIGN", "-="), ("INC", "++"),
    ("DEC", "--"), ("COLON", ":"), ("QUESTION", "?"), ("ARROW", "->"),
]

TYPES = TokenTypes(
    ["WS", "ERROR", "IDENT", "INT_LIT", "STRING_LIT", "LINE_COMMENT", "BLOCK_COMMENT", "AT"]
    + list(dict.fromkeys(KEYWORDS.values()))
    + [name for name, _ in OPERATORS]
)

_RULES = [
    ("WS", r"[ \t\r\n]+"),
    ("BLOCK_COMMENT", r"/\*.*?(?:\*/|\Z)"),
    ("LINE_COMMENT", r"//[^\n]*"),
    ("STRING_LIT", r'"(?:[^"\\]|\\.|\\\Z)*(?:"|\Z)'),
    ("INT_LIT", r"[0-9]+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("AT", r"@"),
] + ops_pattern(OPERATORS)

LEXER = RegexLexer(TYPES, _RULES, KEYWORDS)

LEXICAL = {TYPES[k]: HC.KEYWORD for k in KEYWORDS.values()}
LEXICAL.update({
    TYPES["KW_TRUE"]: HC.LITERAL, TYPES["KW_FALSE"]: HC.LITERAL, TYPES["KW_NULL"]: HC.LITERAL,
    TYPES["INT_LIT"]: HC.LITERAL, TYPES["STRING_LIT"]: HC.CHAR_STRING_LITERAL,
    TYPES["LINE_COMMENT"]: HC.COMMENT, TYPES["BLOCK_COMMENT"]: HC.COMMENT,
})

ROLE_RULES = {
    "ClassDecl": [("name", Role.CLASS_DECL), ("super", Role.TYPE)],
    "MethodDecl": [("name", Role.FUNC_DECL)],
    "FieldDecl": [("name", Role.VAR_DECL)],
    "VarDecl": [("name", Role.VAR_DECL)],
    "Param": [("name", Role.VAR_DECL)],
    "Annotation": [("name", Role.ANNOTATION)],
    "Call": [("callee", Role.CALLEE)],
    "Member": [("name", Role.MEMBER)],
    "TypeRef": [("name", Role.TYPE)],
}

_PRIMITIVES = ("KW_INT", "KW_BOOLEAN")
_MODIFIERS = ("KW_PUBLIC", "KW_PRIVATE", "KW_STATIC", "KW_FINAL")
_ASSIGN_OPS = ("ASSIGN", "PLUS_ASSIGN", "MINUS_ASSIGN")
_BINARY_LEVELS = (
    ("OR",), ("AND",), ("EQ", "NE"), ("LT", "GT", "LE", "GE", "KW_INSTANCEOF"), ("PLUS", "MINUS"),
    ("STAR", "SLASH", "PERCENT"),
)
# Tokens that can open the operand of a cast; ``(a) - b`` stays a subtraction.
_CAST_FOLLOW = ("IDENT", "INT_LIT", "STRING_LIT", "LPAREN", "KW_THIS", "KW_NEW", "KW_TRUE",
                "KW_FALSE", "KW_NULL", "NOT")


class _JayParser(Parser):
    def program(self) -> AstNode:
        decls = []
        while not self.at_end():
            decls.append(self.class_decl(self.annotations(), self.modifiers()))
        return node("Program", decls)

    def annotations(self) -> list[AstNode]:
        out = []
        while self.at("AT"):
            at = self.leaf()
            name = self.expect("IDENT", what="annotation name")
            parts = [at, name]
            if self.at("LPAREN"):
                parts.append(self.leaf())
                if not self.at("RPAREN"):
                    parts.append(self.expr())
                parts.append(self.expect("RPAREN"))
            out.append(node("Annotation", parts, name=name))
        return out

    def modifiers(self) -> list[AstNode]:
        out = []
        while self.at(*_MODIFIERS):
            out.append(self.leaf())
        return out

    def type_list(self, parts: list[AstNode]) -> None:
        parts.append(self.type_ref())
        while self.at("COMMA"):
            parts += [self.leaf(), self.type_ref()]

    def class_decl(self, annots, mods) -> AstNode:
        kw = self.expect("KW_CLASS", "KW_INTERFACE", what="class")
        name = self.expect("IDENT", what="identifier")
        parts = [*annots, *mods, kw, name]
        if self.at("LT"):
            parts += self.type_args()
        sup = None
        if self.at("KW_EXTENDS"):
            parts.append(self.leaf())
            sup = self.type_ref()
            parts.append(sup)
            while self.at("COMMA"):
                parts += [self.leaf(), self.type_ref()]
        if self.at("KW_IMPLEMENTS"):
            parts.append(self.leaf())
            self.type_list(parts)
        parts.append(self.expect("LBRACE"))
        while not self.at("RBRACE"):
            if self.at_end():
                raise self.error("}")
            parts.append(self.member())
        parts.append(self.leaf())
        return node("ClassDecl", parts, name=name, super=sup)

    def member(self) -> AstNode:
        annots, mods = self.annotations(), self.modifiers()
        if self.at("KW_CLASS", "KW_INTERFACE"):
            return self.class_decl(annots, mods)
        rtype = self.leaf() if self.at("KW_VOID") else self.type_ref()
        name = self.expect("IDENT", what="member name")
        if self.at("LPAREN"):
            parts = [*annots, *mods, rtype, name, self.leaf()]
            if not self.at("RPAREN"):
                while True:
                    pmods = self.modifiers()
                    ptype = self.type_ref()
                    pname = self.expect("IDENT", what="parameter name")
                    parts.append(node("Param", [*pmods, ptype, pname], name=pname))
                    if not self.at("COMMA"):
                        break
                    parts.append(self.leaf())
            parts.append(self.expect("RPAREN"))
            if self.at("KW_THROWS"):
                parts.append(self.leaf())
                self.type_list(parts)
            parts.append(self.leaf() if self.at("SEMI") else self.block())
            return node("MethodDecl", parts, name=name)
        parts = [*annots, *mods, rtype, name]
        if self.at("ASSIGN"):
            parts += [self.leaf(), self.expr()]
        parts.append(self.expect("SEMI"))
        return node("FieldDecl", parts, name=name)

    def type_args(self) -> list[AstNode]:
        parts = [self.leaf()]
        if not self.at("GT"):
            self.type_list(parts)
        parts.append(self.expect("GT"))
        return parts

    def type_ref(self) -> AstNode:
        if self.at(*_PRIMITIVES):
            parts = [self.leaf()]
            name = None
        elif self.at("IDENT"):
            name = self.leaf()
            parts = [name]
            if self.at("LT"):
                parts += self.type_args()
        else:
            raise self.error("type")
        while self.at("LBRACKET") and self.peek_name(1) == "RBRACKET":
            parts += [self.leaf(), self.leaf()]
        return node("TypeRef", parts, name=name)

    def _scan_type(self, k: int) -> int:
        """Lookahead offset just past a type starting at offset ``k``, or -1."""
        name = self.peek_name(k)
        if name in _PRIMITIVES:
            k += 1
        elif name == "IDENT":
            k += 1
            if self.peek_name(k) == "LT":
                k += 1
                while self.peek_name(k) != "GT":
                    k = self._scan_type(k)
                    if k < 0:
                        return -1
                    if self.peek_name(k) == "COMMA":
                        k += 1
                    elif self.peek_name(k) != "GT":
                        return -1
                k += 1
        else:
            return -1
        while self.peek_name(k) == "LBRACKET" and self.peek_name(k + 1) == "RBRACKET":
            k += 2
        return k

    def block(self) -> AstNode:
        parts = [self.expect("LBRACE")]
        while not self.at("RBRACE"):
            if self.at_end():
                raise self.error("}")
            parts.append(self.statement())
        parts.append(self.leaf())
        return node("Block", parts)

    def _starts_var_decl(self) -> bool:
        k = 1 if self.at("KW_FINAL") else 0
        k = self._scan_type(k)
        return k > 0 and self.peek_name(k) == "IDENT"

    def var_decl(self, semi: bool = True) -> AstNode:
        mods = self.modifiers()
        vtype = self.type_ref()
        name = self.expect("IDENT", what="variable name")
        return self._var_rest([*mods, vtype, name], name, semi)

    def _var_rest(self, parts: list[AstNode], name: AstNode, semi: bool) -> AstNode:
        if self.at("ASSIGN"):
            parts += [self.leaf(), self.expr()]
        if semi:
            parts.append(self.expect("SEMI"))
        return node("VarDecl", parts, name=name)

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

    def for_stmt(self) -> AstNode:
        parts = [self.leaf(), self.expect("LPAREN")]
        if self._starts_var_decl():
            mods = self.modifiers()
            vtype = self.type_ref()
            name = self.expect("IDENT", what="variable name")
            if self.at("COLON"):
                var = node("VarDecl", [*mods, vtype, name], name=name)
                parts += [var, self.leaf(), self.expr(), self.expect("RPAREN"), self.statement()]
                return node("ForEach", parts)
            parts.append(self._var_rest([*mods, vtype, name], name, semi=False))
        else:
            parts.append(self.simple())
        parts += [self.expect("SEMI"), self.expr(), self.expect("SEMI"), self.simple(),
                  self.expect("RPAREN"), self.statement()]
        return node("For", parts)

    def try_stmt(self) -> AstNode:
        parts = [self.leaf(), self.block()]
        handlers = 0
        while self.at("KW_CATCH"):
            kw, lp = self.leaf(), self.expect("LPAREN")
            ptype = self.type_ref()
            pname = self.expect("IDENT", what="exception name")
            parts += [kw, lp, node("Param", [ptype, pname], name=pname), self.expect("RPAREN"), self.block()]
            handlers += 1
        if self.at("KW_FINALLY"):
            parts += [self.leaf(), self.block()]
            handlers += 1
        if not handlers:
            raise self.error("catch or finally")
        return node("Try", parts)

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
        if name == "KW_FOR":
            return self.for_stmt()
        if name == "KW_TRY":
            return self.try_stmt()
        if name in ("KW_RETURN", "KW_THROW"):
            parts = [self.leaf()]
            if name == "KW_THROW" or not self.at("SEMI"):
                parts.append(self.expr())
            parts.append(self.expect("SEMI"))
            return node("Return" if name == "KW_RETURN" else "Throw", parts)
        if name in ("KW_BREAK", "KW_CONTINUE"):
            return node("Jump", [self.leaf(), self.expect("SEMI")])
        if self._starts_var_decl():
            return self.var_decl()
        return self.simple(semi=True)

    # -- expressions --
    def _lambda_params(self) -> int:
        """Offset of ``->`` if a lambda parameter list starts here, else -1."""
        if self.at("IDENT"):
            return 1 if self.peek_name(1) == "ARROW" else -1
        if not self.at("LPAREN"):
            return -1
        k = 1
        if self.peek_name(k) == "IDENT":
            k += 1
            while self.peek_name(k) == "COMMA" and self.peek_name(k + 1) == "IDENT":
                k += 2
        if self.peek_name(k) == "RPAREN" and self.peek_name(k + 1) == "ARROW":
            return k + 1
        return -1

    def expr(self) -> AstNode:
        if self._lambda_params() > 0:
            return self.lambda_expr()
        cond = self.binary(0)
        if not self.at("QUESTION"):
            return cond
        q = self.leaf()
        then = self.expr()
        return node("Ternary", [cond, q, then, self.expect("COLON"), self.expr()])

    def lambda_expr(self) -> AstNode:
        parts = []
        if self.at("IDENT"):
            name = self.leaf()
            parts.append(node("Param", [name], name=name))
        else:
            parts.append(self.leaf())
            while self.at("IDENT"):
                name = self.leaf()
                parts.append(node("Param", [name], name=name))
                if self.at("COMMA"):
                    parts.append(self.leaf())
            parts.append(self.expect("RPAREN"))
        parts += [self.expect("ARROW"), self.expr()]
        return node("Lambda", parts)

    def binary(self, level: int) -> AstNode:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.at(*_BINARY_LEVELS[level]):
            op = self.leaf()
            right = self.type_ref() if op.kind == "tok:KW_INSTANCEOF" else self.binary(level + 1)
            left = node("Binary", [left, op, right])
        return left

    def _at_cast(self) -> bool:
        if not self.at("LPAREN"):
            return False
        k = self._scan_type(1)
        if k < 0 or self.peek_name(k) != "RPAREN":
            return False
        return self.peek_name(1) in _PRIMITIVES or self.peek_name(k + 1) in _CAST_FOLLOW

    def unary(self) -> AstNode:
        if self.at("NOT", "MINUS"):
            return node("Unary", [self.leaf(), self.unary()])
        if self._at_cast():
            return node("Cast", [self.leaf(), self.type_ref(), self.expect("RPAREN"), self.unary()])
        return self.postfix(self.primary())

    def postfix(self, e: AstNode) -> AstNode:
        while True:
            if self.at("DOT"):
                dot = self.leaf()
                name = self.expect("IDENT", what="member name")
                e = node("Member", [e, dot, name], obj=e, name=name)
            elif self.at("LPAREN"):
                parts = [e, self.leaf(), *self.args(), self.expect("RPAREN")]
                e = node("Call", parts, callee=e)
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
        if self.at("INT_LIT", "STRING_LIT", "KW_TRUE", "KW_FALSE", "KW_NULL", "KW_THIS", "IDENT"):
            return self.leaf()
        if self.at("LPAREN"):
            return node("Paren", [self.leaf(), self.expr(), self.expect("RPAREN")])
        if self.at("KW_NEW"):
            kw = self.leaf()
            if not self.at("IDENT"):
                raise self.error("class name")
            tref = self.type_ref()
            parts = [kw, tref, self.expect("LPAREN"), *self.args(), self.expect("RPAREN")]
            return node("New", parts, type=tref)
        raise self.error("expression")


def lex(source: str) -> list[Token]:
    return LEXER.raw_tokens(source)


def parse(tokens: Sequence[Token]) -> AstNode:
    p = _JayParser(tokens, TYPES, trivia=("WS", "LINE_COMMENT", "BLOCK_COMMENT"))
    return p.program()


def resolve(tokens: Sequence[Token], ast: AstNode) -> list[int]:
    return label_tokens(tokens, ast, LEXICAL, ROLE_RULES, TYPES["IDENT"])


# -- generator ----------------------------------------------------------------------

class _JayGen:
    def __init__(self, seed: int, depth: int, weights=None):
        self.c = _gen.GenContext("minijay", seed, weights)
        self.depth = depth
        self.out = _gen.Writer()
        self.classes: list[str] = []
        self.type_params: tuple[str, ...] = ()

    def run(self) -> str:
        c = self.c
        if c.p("p_file_comment"):
            self.out.line(f"/* {c.pick(_gen.COMMENTS)} */")
        for i in range(c.count("classes")):
            if i:
                self.out.blank()
            if c.p("p_interface"):
                self.interface_decl()
            else:
                self.class_decl()
        return self.out.text()

    def annotation(self) -> str:
        c = self.c
        name = c.pick(_gen.ANNOTATION_NAMES)
        if c.p("p_annotation_args"):
            return f"@{name}({self.expr(0)})"
        return f"@{name}"

    def class_ref(self) -> str:
        c = self.c
        if c.p("p_generic"):
            generic = c.pick(_gen.GENERIC_NAMES)
            arity = 2 if generic == "Map" else 1
            return f"{generic}<{', '.join(self.type_name(boxed=True) for _ in range(arity))}>"
        pool = self.classes + list(self.type_params) if self.classes else _gen.CLASS_NAMES
        return c.pick(pool)

    def type_name(self, allow_void: bool = False, boxed: bool = False) -> str:
        c = self.c
        choices = (["String", "class", "class"] if boxed
                   else ["int", "boolean", "String", "class"] + (["void"] if allow_void else []))
        t = c.pick(choices)
        if t == "class":
            t = self.class_ref()
        if t != "void" and not boxed and c.p("p_array"):
            t += "[]"
        return t

    def heading(self, kw: str) -> str:
        c = self.c
        name = c.pick(_gen.CLASS_NAMES)
        self.classes.append(name)
        head = ("public " if c.p("p_public") else "") + f"{kw} {name}"
        self.type_params = ()
        if c.p("p_type_params"):
            self.type_params = tuple(c.rng.sample(_gen.TYPE_PARAMS, c.rng.randint(1, 2)))
            head += f"<{', '.join(self.type_params)}>"
        return head

    def class_decl(self) -> None:
        c, out = self.c, self.out
        if c.p("p_annotation"):
            out.line(self.annotation())
        head = self.heading("class")
        if c.p("p_extends"):
            head += f" extends {self.class_ref()}"
        if c.p("p_implements"):
            head += " implements " + ", ".join(self.class_ref() for _ in range(c.rng.randint(1, 2)))
        out.line(head + " {")
        out.level += 1
        for _ in range(c.count("members")):
            if c.p("p_field"):
                self.field()
            else:
                self.method()
        out.level -= 1
        out.line("}")

    def interface_decl(self) -> None:
        c, out = self.c, self.out
        head = self.heading("interface")
        if c.p("p_extends"):
            head += f" extends {self.class_ref()}"
        out.line(head + " {")
        out.level += 1
        for _ in range(c.count("members")):
            out.line(self.signature() + ";")
        out.level -= 1
        out.line("}")

    def modifiers(self) -> str:
        c = self.c
        mods = []
        if c.p("p_visibility"):
            mods.append(c.pick(("public", "private")))
        if c.p("p_static"):
            mods.append("static")
        if c.p("p_final"):
            mods.append("final")
        return " ".join(mods) + (" " if mods else "")

    def field(self) -> None:
        c = self.c
        if c.p("p_member_annotation"):
            self.out.line(self.annotation())
        text = f"{self.modifiers()}{self.type_name()} {c.pick(_gen.VAR_NAMES)}"
        if c.p("p_field_init"):
            text += f" = {self.expr(self.depth - 1)}"
        self.out.line(text + ";")

    def signature(self) -> str:
        c = self.c
        params = []
        for _ in range(c.count("params")):
            final = "final " if c.p("p_final") else ""
            params.append(f"{final}{self.type_name()} {c.pick(_gen.VAR_NAMES)}")
        text = f"{self.type_name(True)} {c.pick(_gen.FUNC_NAMES)}({', '.join(params)})"
        if c.p("p_throws"):
            text += f" throws {c.pick(_gen.EXCEPTION_NAMES)}"
        return text

    def method(self) -> None:
        c, out = self.c, self.out
        if c.p("p_member_annotation"):
            out.line(self.annotation())
        out.line(f"{self.modifiers()}{self.signature()} {{")
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
        if r < 0.6:
            return c.pick(_gen.VAR_NAMES)
        if r < 0.85:
            return f"this.{c.pick(_gen.VAR_NAMES)}"
        return f"{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}"

    def statement(self, depth: int, in_loop: bool) -> None:
        c, out = self.c, self.out
        exclude = [] if depth > 1 else ["if", "while", "for", "foreach", "try"]
        if not in_loop:
            exclude.append("jump")
        kind = c.weighted("stmt_weights", exclude)
        e = depth - 1
        if kind == "local":
            final = "final " if c.p("p_final") else ""
            text = f"{final}{self.type_name()} {c.pick(_gen.VAR_NAMES)}"
            if c.p("p_local_init"):
                text += f" = {self.expr(e)}"
            out.line(text + ";")
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
        elif kind == "for":
            v = c.pick(_gen.VAR_NAMES)
            out.line(f"for (int {v} = 0; {v} < {self.expr(0)}; {v}++) {{")
            self.body(depth - 1, True)
            out.line("}")
        elif kind == "foreach":
            out.line(f"for ({self.type_name()} {c.pick(_gen.VAR_NAMES)} : {self.expr(0)}) {{")
            self.body(depth - 1, True)
            out.line("}")
        elif kind == "try":
            out.line("try {")
            self.body(depth - 1, in_loop)
            for _ in range(c.count("catches")):
                out.line(f"}} catch ({c.pick(_gen.EXCEPTION_NAMES)} {c.pick(('e', 'err', 'ex'))}) {{")
                self.body(depth - 1, in_loop)
            if c.p("p_finally"):
                out.line("} finally {")
                self.body(depth - 1, in_loop)
            out.line("}")
        elif kind == "throw":
            out.line(f'throw new {c.pick(_gen.EXCEPTION_NAMES)}("{c.pick(_gen.STRINGS)}");')
        elif kind == "return":
            out.line(f"return {self.expr(e)};" if c.p("p_return_value") else "return;")
        elif kind == "step":
            out.line(f"{self.lvalue()}{c.pick(('++', '--'))};")
        elif kind == "jump":
            out.line(c.pick(("break;", "continue;")))
        elif kind == "comment":
            out.line(f"// {c.pick(_gen.COMMENTS)}")
        else:  # pragma: no cover - config typo
            raise KeyError(kind)

    def call(self, depth: int) -> str:
        c = self.c
        args = ", ".join(self.expr(depth - 1) for _ in range(c.count("args")))
        r = c.rng.random()
        if r < 0.35:
            return f"{c.pick(_gen.FUNC_NAMES)}({args})"
        if r < 0.6:
            return f"{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.FUNC_NAMES)}({args})"
        if r < 0.75:
            return f"this.{c.pick(_gen.FUNC_NAMES)}({args})"
        if r < 0.88:
            return f"{c.pick(self.classes or _gen.CLASS_NAMES)}.{c.pick(_gen.FUNC_NAMES)}({args})"
        return f"{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.FUNC_NAMES)}({args})"

    def operand(self) -> str:
        c = self.c
        r = c.rng.random()
        if r < 0.5:
            return c.pick(_gen.VAR_NAMES)
        if r < 0.8:
            return f"{c.pick(('this',) + _gen.VAR_NAMES)}.{c.pick(_gen.VAR_NAMES)}"
        return f"{c.pick(_gen.VAR_NAMES)}.{c.pick(_gen.FUNC_NAMES)}()"

    def expr(self, depth: int, operand: bool = False) -> str:
        c = self.c
        exclude = () if depth > 0 else ("call", "new", "binary", "unary", "paren", "index", "ternary",
                                         "lambda", "cast", "instanceof")
        if operand:
            exclude += ("ternary", "lambda", "instanceof")
        kind = c.weighted("expr_weights", exclude)
        d = depth - 1
        if kind == "int":
            return c.int_lit()
        if kind == "string":
            return f'"{c.pick(_gen.STRINGS)}"'
        if kind == "bool":
            return c.pick(("true", "false"))
        if kind == "null":
            return "null"
        if kind == "name":
            return c.pick(_gen.VAR_NAMES)
        if kind == "member":
            obj = c.pick(("this",) + _gen.VAR_NAMES)
            return f"{obj}.{c.pick(_gen.VAR_NAMES)}"
        if kind == "call":
            return self.call(depth)
        if kind == "new":
            args = ", ".join(self.expr(d) for _ in range(c.count("args")))
            cls = self.class_ref()
            if "<" in cls and c.p("p_diamond"):
                cls = cls[:cls.index("<")] + "<>"
            return f"new {cls}({args})"
        if kind == "binary":
            op = c.pick(("+", "-", "*", "/", "%", "==", "!=", "<", ">", "<=", ">=", "&&", "||"))
            return f"{self.expr(d, True)} {op} {self.expr(d, True)}"
        if kind == "unary":
            return c.pick(("!", "-")) + self.expr(0)
        if kind == "paren":
            return f"({self.expr(d)})"
        if kind == "index":
            return f"{c.pick(_gen.VAR_NAMES)}[{self.expr(d)}]"
        if kind == "ternary":
            return f"{self.operand()} ? {self.expr(d)} : {self.expr(d)}"
        if kind == "lambda":
            params = c.rng.sample(_gen.VAR_NAMES, c.rng.randint(0, 2))
            head = params[0] if len(params) == 1 and c.p("p_bare_lambda") else f"({', '.join(params)})"
            return f"{head} -> {self.expr(d)}"
        if kind == "cast":
            return f"({self.type_name()}) {self.operand()}"
        if kind == "instanceof":
            return f"{self.operand()} instanceof {self.class_ref()}"
        raise KeyError(kind)  # pragma: no cover


def generate(seed: int, depth_budget: int, weights=None) -> str:
    if depth_budget < 1:
        raise ValueError("depth_budget must be >= 1")
    return _JayGen(seed, depth_budget, weights).run()
