"""Concrete and abstract syntax of the assertion language.

Precedence, loosest first: quantifiers (body extends to the right), ``<==>``,
``==>`` (right-associative), ``||``, ``xor``, ``&&``, ``!``, comparisons
(non-associative), ``+ -``, ``* / %``, unary ``-``, postfix ``.f`` and
``.has(e)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

LOGIC_OPS = ("<==>", "==>", "||", "xor", "&&")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/", "%")
QUANTIFIERS = ("all", "exists")
KEYWORDS = {"all", "exists", "xor", "old", "reach", "true", "false", "null"}


class AssertionSyntaxError(Exception):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"at {pos}: {message}")


# -- AST --------------------------------------------------------------------


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Null:
    pass


@dataclass(frozen=True)
class Var:
    """A bare name: this, result, a parameter, constant, bound variable or field of this."""

    name: str


@dataclass(frozen=True)
class Nav:
    obj: "Expr"
    field: str


@dataclass(frozen=True)
class Old:
    expr: "Expr"


@dataclass(frozen=True)
class Reach:
    start: "Expr"
    fields: tuple[str, ...]


@dataclass(frozen=True)
class Has:
    set: "Expr"
    elem: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Quant:
    quantifier: str
    type: str
    var: str
    body: "Expr"


Expr = Union[IntConst, BoolConst, Null, Var, Nav, Old, Reach, Has, Not, Neg, BinOp, Quant]
Assertion = Expr


def subterms(e: Expr):
    """Pre-order iteration over ``e`` and its subexpressions."""
    yield e
    if isinstance(e, (Nav,)):
        yield from subterms(e.obj)
    elif isinstance(e, (Old, Not, Neg)):
        yield from subterms(e.expr if isinstance(e, Old) else e.operand)
    elif isinstance(e, Reach):
        yield from subterms(e.start)
    elif isinstance(e, Has):
        yield from subterms(e.set)
        yield from subterms(e.elem)
    elif isinstance(e, BinOp):
        yield from subterms(e.left)
        yield from subterms(e.right)
    elif isinstance(e, Quant):
        yield from subterms(e.body)


def uses_old(e: Expr) -> bool:
    return any(isinstance(t, Old) for t in subterms(e))


# -- tokens -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><==>|==>|==|!=|<=|>=|&&|\|\||[<>!+\-*/%(),.:]))"
)


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, op, eof
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            raise AssertionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        out.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(Token("eof", "", n))
    return out


def _word(t: Token) -> bool:
    return t.kind in ("int", "ident")


def normalize(text: str) -> str:
    """Canonical spacing: single spaces between tokens, none inside calls,
    parentheses and navigations."""
    toks = [t for t in tokenize(text) if t.kind != "eof"]
    parts: list[str] = []
    prev: Optional[Token] = None
    prev_unary = False
    for t in toks:
        s = t.text
        unary = s == "-" and (prev is None or (prev.kind == "op" and prev.text not in (")",))
                              or (prev.kind == "ident" and prev.text in ("xor",)))
        if prev is not None:
            glue = (
                s in (",", ")", ".", ":")
                or prev.text in ("(", ".", "!") and prev.kind == "op"
                or prev_unary
                or (s == "(" and prev.kind == "ident" and prev.text not in ("xor", "all", "exists"))
            )
            if not glue:
                parts.append(" ")
        parts.append(s)
        prev, prev_unary = t, unary
    return "".join(parts)


# -- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "ident") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail("expected identifier")
        self.advance()
        return t.text

    def fail(self, msg: str):
        t = self.tok
        found = t.text or "end of input"
        raise AssertionSyntaxError(f"{msg}, found {found!r}", t.pos)

    def top(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail("unexpected trailing input")
        return e

    def expr(self) -> Expr:
        if self.at(*QUANTIFIERS):
            return self.quantified()
        return self.iff()

    def quantified(self) -> Quant:
        q = self.advance().text
        ty = self.ident()
        var = self.ident()
        self.expect(":")
        return Quant(q, ty, var, self.expr())

    def iff(self) -> Expr:
        left = self.implies()
        while self.at("<==>"):
            self.advance()
            left = BinOp("<==>", left, self.implies())
        return left

    def implies(self) -> Expr:
        left = self.disj()
        if self.at("==>"):
            self.advance()
            return BinOp("==>", left, self.implies_rhs())
        return left

    def implies_rhs(self) -> Expr:
        if self.at(*QUANTIFIERS):
            return self.quantified()
        return self.implies()

    def _left_assoc(self, op: str, sub) -> Expr:
        left = sub()
        while self.at(op):
            self.advance()
            if self.at(*QUANTIFIERS):
                return BinOp(op, left, self.quantified())
            left = BinOp(op, left, sub())
        return left

    def disj(self) -> Expr:
        return self._left_assoc("||", self.xor)

    def xor(self) -> Expr:
        return self._left_assoc("xor", self.conj)

    def conj(self) -> Expr:
        return self._left_assoc("&&", self.negation)

    def negation(self) -> Expr:
        if self.at("!"):
            self.advance()
            if self.at(*QUANTIFIERS):
                return Not(self.quantified())
            return Not(self.negation())
        return self.comparison()

    def comparison(self) -> Expr:
        left = self.additive()
        if self.tok.kind == "op" and self.tok.text in CMP_OPS:
            op = self.advance().text
            left = BinOp(op, left, self.additive())
            if self.tok.kind == "op" and self.tok.text in CMP_OPS:
                self.fail("comparisons do not chain")
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            left = BinOp(op, left, self.multiplicative())
        return left

    def multiplicative(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/", "%"):
            op = self.advance().text
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            if self.tok.kind == "int":
                return self.postfix(IntConst(-int(self.advance().text)))
            return Neg(self.unary())
        return self.postfix(self.primary())

    def postfix(self, e: Expr) -> Expr:
        while self.at("."):
            self.advance()
            name = self.ident()
            if name == "has" and self.at("("):
                self.advance()
                elem = self.expr()
                self.expect(")")
                e = Has(e, elem)
            else:
                e = Nav(e, name)
        return e

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return IntConst(int(t.text))
        if t.kind == "ident":
            if t.text in ("true", "false"):
                self.advance()
                return BoolConst(t.text == "true")
            if t.text == "null":
                self.advance()
                return Null()
            if t.text == "old":
                self.advance()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Old(e)
            if t.text == "reach":
                self.advance()
                self.expect("(")
                start = self.expr()
                fields = []
                while self.at(","):
                    self.advance()
                    fields.append(self.ident())
                if not fields:
                    self.fail("reach needs at least one field")
                self.expect(")")
                return Reach(start, tuple(fields))
            return Var(self.ident())
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected expression")


def parse_assertion(text: str) -> Assertion:
    """Parse assertion text; raises :class:`AssertionSyntaxError`."""
    return _Parser(text).top()


# -- printer ----------------------------------------------------------------

_PREC = {"<==>": 1, "==>": 2, "||": 3, "xor": 4, "&&": 5}
_PREC.update({op: 7 for op in CMP_OPS})
_PREC.update({"+": 8, "-": 8, "*": 9, "/": 9, "%": 9})
_NOT, _NEG, _ATOM = 6, 10, 11


def _prec(e: Expr) -> int:
    if isinstance(e, Quant):
        return 0
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Not):
        return _NOT
    if isinstance(e, Neg) or (isinstance(e, IntConst) and e.value < 0):
        return _NEG
    return _ATOM


def _wrap(e: Expr, min_prec: int) -> str:
    s = format_assertion(e)
    return f"({s})" if _prec(e) < min_prec else s


def format_assertion(e: Expr) -> str:
    """Canonical text with the minimum parentheses needed to re-parse."""
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, BoolConst):
        return "true" if e.value else "false"
    if isinstance(e, Null):
        return "null"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Nav):
        return f"{_wrap(e.obj, _ATOM)}.{e.field}"
    if isinstance(e, Old):
        return f"old({format_assertion(e.expr)})"
    if isinstance(e, Reach):
        return f"reach({format_assertion(e.start)}, {', '.join(e.fields)})"
    if isinstance(e, Has):
        return f"{_wrap(e.set, _ATOM)}.has({format_assertion(e.elem)})"
    if isinstance(e, Not):
        return f"!{_wrap(e.operand, _NOT)}"
    if isinstance(e, Neg):
        inner = _wrap(e.operand, _NEG)
        if inner.startswith("-"):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Quant):
        return f"{e.quantifier} {e.type} {e.var}: {format_assertion(e.body)}"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        if e.op == "==>":
            left, right = _wrap(e.left, p + 1), _wrap(e.right, p)
        elif e.op in CMP_OPS:
            left, right = _wrap(e.left, p + 1), _wrap(e.right, p + 1)
        else:
            left, right = _wrap(e.left, p), _wrap(e.right, p + 1)
        if isinstance(e.left, Quant):
            left = f"({format_assertion(e.left)})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an assertion node: {e!r}")
