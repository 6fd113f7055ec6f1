"""Recursive-descent parser for MiniObj source text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import ast as A
from .errors import ParseError

KEYWORDS = {
    "class", "const", "init", "def", "private", "static", "var", "if", "else",
    "while", "return", "new", "true", "false", "null", "this",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){};:,.])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# binary precedence, loosest first
_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail([text])
        return self.advance()

    def expect_ident(self) -> str:
        if self.tok.kind != "ident":
            self.fail(["identifier"])
        return self.advance().text

    def fail(self, expected: list[str]):
        t = self.tok
        found = t.text if t.kind != "eof" else "end of input"
        raise ParseError(f"unexpected {found!r}", t.line, t.col, expected)

    def mark(self, node, tok: Token):
        node.line, node.col = tok.line, tok.col
        return node

    # -- declarations -------------------------------------------------------

    def program(self) -> A.Program:
        classes = []
        while self.tok.kind != "eof":
            classes.append(self.class_decl())
        return A.Program(classes)

    def class_decl(self) -> A.ClassDecl:
        start = self.expect("class")
        name = self.expect_ident()
        self.expect("{")
        fields, consts, ctors, methods = [], [], [], []
        while not self.at("}"):
            t = self.tok
            if self.at("const"):
                self.advance()
                cname = self.expect_ident()
                self.expect(":")
                ty = self.type_name()
                if ty != "Int":
                    raise ParseError("constants must be Int", t.line, t.col)
                self.expect("=")
                neg = False
                if self.at("-"):
                    self.advance()
                    neg = True
                if self.tok.kind != "int":
                    self.fail(["integer literal"])
                value = int(self.advance().text)
                self.expect(";")
                consts.append(self.mark(A.ConstDecl(cname, -value if neg else value), t))
                continue
            private = static = False
            if self.at("private"):
                self.advance()
                private = True
            if self.at("static"):
                self.advance()
                static = True
            if self.at("init"):
                if static:
                    self.fail(["def"])
                self.advance()
                params = self.params()
                body = self.block()
                ctors.append(self.mark(A.Constructor(params, body, private), t))
            elif self.at("def"):
                self.advance()
                mname = self.expect_ident()
                params = self.params()
                self.expect(":")
                ret = self.type_name(allow_void=True)
                body = self.block()
                methods.append(self.mark(A.Method(mname, params, ret, body, private, static), t))
            elif self.tok.kind == "ident" and not private and not static:
                fname = self.advance().text
                self.expect(":")
                ty = self.type_name()
                self.expect(";")
                fields.append(self.mark(A.FieldDecl(fname, ty), t))
            else:
                self.fail(["field", "const", "init", "def"])
        self.expect("}")
        return self.mark(A.ClassDecl(name, fields, consts, ctors, methods), start)

    def type_name(self, allow_void: bool = False) -> str:
        if self.tok.kind != "ident":
            self.fail(["type"])
        t = self.advance()
        if t.text == "Void" and not allow_void:
            raise ParseError("Void is only a return type", t.line, t.col)
        return t.text

    def params(self) -> list[A.Param]:
        self.expect("(")
        out: list[A.Param] = []
        if not self.at(")"):
            while True:
                t = self.tok
                name = self.expect_ident()
                self.expect(":")
                out.append(self.mark(A.Param(name, self.type_name()), t))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return out

    # -- statements ---------------------------------------------------------

    def block(self) -> A.Block:
        t = self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.statement())
        self.expect("}")
        return self.mark(A.Block(stmts), t)

    def statement(self) -> A.Stmt:
        t = self.tok
        if self.at("var"):
            self.advance()
            name = self.expect_ident()
            self.expect(":")
            ty = self.type_name()
            self.expect("=")
            init = self.expr()
            self.expect(";")
            return self.mark(A.VarDecl(name, ty, init), t)
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return self.mark(A.While(cond, self.block()), t)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return self.mark(A.Return(value), t)
        if self.at("{"):
            return self.block()
        e = self.expr()
        if self.at("="):
            if not isinstance(e, (A.Name, A.FieldAccess)):
                raise ParseError("invalid assignment target", t.line, t.col)
            self.advance()
            value = self.expr()
            self.expect(";")
            return self.mark(A.Assign(e, value), t)
        if not isinstance(e, (A.Call, A.New)):
            raise ParseError("expression statement must be a call", t.line, t.col, ["="])
        self.expect(";")
        return self.mark(A.ExprStmt(e), t)

    def if_stmt(self) -> A.If:
        t = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse: Optional[A.Block | A.If] = None
        if self.at("else"):
            self.advance()
            orelse = self.if_stmt() if self.at("if") else self.block()
        return self.mark(A.If(cond, then, orelse), t)

    # -- expressions --------------------------------------------------------

    def expr(self, level: int = 0) -> A.Expr:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = _LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.advance()
            right = self.expr(level + 1)
            left = self.mark(A.Binary(t.text, left, right), t)
            if level in (2, 3) and self.tok.kind == "op" and self.tok.text in ops:
                # comparisons do not chain
                self.fail([")", ";"])
        return left

    def unary(self) -> A.Expr:
        if self.at("!", "-"):
            t = self.advance()
            return self.mark(A.Unary(t.text, self.unary()), t)
        return self.postfix()

    def postfix(self) -> A.Expr:
        e = self.primary()
        while self.at("."):
            t = self.advance()
            name = self.expect_ident()
            if self.at("("):
                e = self.mark(A.Call(e, name, self.args()), t)
            else:
                e = self.mark(A.FieldAccess(e, name), t)
        return e

    def args(self) -> list[A.Expr]:
        self.expect("(")
        out: list[A.Expr] = []
        if not self.at(")"):
            while True:
                out.append(self.expr())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return out

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return self.mark(A.IntLit(int(t.text)), t)
        if self.at("true", "false"):
            self.advance()
            return self.mark(A.BoolLit(t.text == "true"), t)
        if self.at("null"):
            self.advance()
            return self.mark(A.NullLit(), t)
        if self.at("this"):
            self.advance()
            return self.mark(A.This(), t)
        if self.at("new"):
            self.advance()
            cls = self.expect_ident()
            return self.mark(A.New(cls, self.args()), t)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return self.mark(A.Call(None, t.text, self.args()), t)
            return self.mark(A.Name(t.text), t)
        self.fail(["expression"])


def parse_source(source: str) -> A.Program:
    """Parse without type checking; node ids are assigned."""
    program = Parser(source).program()
    A.number_nodes(program)
    return program
