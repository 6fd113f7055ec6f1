"""Sound syntactic simplification of assertions.

``simplify`` folds literal arithmetic and comparisons, comparisons of a term
with itself, arithmetic identities and boolean constants. A subterm is only
dropped when it cannot fault, so the simplified assertion has the same
outcome as the original on every record, Error included.

Class constants are folded when their values are supplied. ``this`` is
treated as non-null: an assertion mentioning it only type-checks for an
instance method, where it is always bound to an object.
"""

from __future__ import annotations

from typing import Mapping, Optional

from ..minilang.interp import int_div, int_mod, wrap
from .syntax import BinOp, BoolConst, Expr, Has, IntConst, Nav, Neg, Not, Null, Old, Quant, Reach, Var

_SELF_TRUE = {"==", "<=", ">="}
_SELF_FALSE = {"!=", "<", ">"}
_THIS = frozenset({"this"})


def total(e: Expr, safe: frozenset = _THIS) -> bool:
    """True if evaluating ``e`` can never fault.

    ``safe`` names the variables that are never null: ``this`` and any
    enclosing quantifier variables. Conservative: division, quantifiers and
    navigations through anything but a safe variable may fault.
    """
    if isinstance(e, (IntConst, BoolConst, Null)):
        return True
    if isinstance(e, Var):
        return True  # bare names; a missing root is a shape error caught by typing
    if isinstance(e, Nav):
        return isinstance(e.obj, Var) and e.obj.name in safe
    if isinstance(e, Old):
        # a quantified object may not exist in the pre-state
        return total(e.expr, safe & _THIS)
    if isinstance(e, (Not, Neg)):
        return total(e.operand, safe)
    if isinstance(e, BinOp):
        return e.op not in ("/", "%") and total(e.left, safe) and total(e.right, safe)
    return False


def _cmp(op: str, a, b) -> bool:
    return {"==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def simplify(e: Expr, constants: Optional[Mapping[str, int]] = None) -> Expr:
    """Simplified equivalent of ``e``; ``constants`` maps class constant
    names to their values."""
    return _Simplifier(dict(constants or {})).run(e, _THIS, frozenset(), False)


def trivial(e: Expr, constants: Optional[Mapping[str, int]] = None) -> bool:
    """True if ``e`` simplifies to a boolean literal."""
    return isinstance(simplify(e, constants), BoolConst)


class _Simplifier:
    def __init__(self, constants: dict[str, int]):
        self.constants = constants

    def run(self, e: Expr, safe: frozenset, bound: frozenset, lax: bool) -> Expr:
        """``lax`` treats every subterm as fault-free; only sound where a
        fault and the folded value lead to the same final outcome."""

        def run(x: Expr, s: frozenset, b: frozenset) -> Expr:
            return self.run(x, s, b, lax)

        if isinstance(e, Var):
            if e.name not in bound and e.name in self.constants:
                return IntConst(self.constants[e.name])
            return e
        if isinstance(e, Not):
            return self._not(run(e.operand, safe, bound))
        if isinstance(e, Neg):
            x = run(e.operand, safe, bound)
            if isinstance(x, IntConst):
                return IntConst(wrap(-x.value))
            return Neg(x)
        if isinstance(e, Old):
            return Old(run(e.expr, safe, bound))
        if isinstance(e, Quant):
            inner_safe, inner_bound = safe | {e.var}, bound | {e.var}
            # a binding whose body faults is skipped, so a body that is
            # True-or-fault makes `all` hold and False-or-fault makes
            # `exists` fail
            probe = self.run(e.body, inner_safe, inner_bound, True)
            if isinstance(probe, BoolConst) and probe.value == (e.quantifier == "all"):
                return probe
            return Quant(e.quantifier, e.type, e.var, run(e.body, inner_safe, inner_bound))
        if isinstance(e, Has):
            return Has(run(e.set, safe, bound), run(e.elem, safe, bound))
        if isinstance(e, Reach):
            return Reach(run(e.start, safe, bound), e.fields)
        if isinstance(e, Nav):
            return Nav(run(e.obj, safe, bound), e.field)
        if not isinstance(e, BinOp):
            return e
        return self._binop(e.op, run(e.left, safe, bound), run(e.right, safe, bound), safe, lax)

    @staticmethod
    def _not(x: Expr) -> Expr:
        if isinstance(x, BoolConst):
            return BoolConst(not x.value)
        if isinstance(x, Not):
            return x.operand
        return Not(x)

    def _binop(self, op: str, a: Expr, b: Expr, safe: frozenset, lax: bool) -> Expr:
        def tot(x: Expr) -> bool:
            return lax or total(x, safe)

        ia, ib = isinstance(a, IntConst), isinstance(b, IntConst)
        if op in ("+", "-", "*", "/", "%"):
            if ia and ib:
                if op in ("/", "%") and b.value == 0:
                    return BinOp(op, a, b)
                fn = {"+": lambda x, y: wrap(x + y), "-": lambda x, y: wrap(x - y),
                      "*": lambda x, y: wrap(x * y), "/": int_div, "%": int_mod}[op]
                return IntConst(fn(a.value, b.value))
            if ib and ((op in ("+", "-") and b.value == 0) or (op in ("*", "/") and b.value == 1)):
                return a
            if ia and ((op == "+" and a.value == 0) or (op == "*" and a.value == 1)):
                return b
            if op == "*" and ((ia and a.value == 0 and tot(b)) or (ib and b.value == 0 and tot(a))):
                return IntConst(0)
            if op == "%" and ib and b.value in (1, -1) and tot(a):
                return IntConst(0)
            if op == "-" and a == b and tot(a):
                return IntConst(0)
            return BinOp(op, a, b)
        if op in _SELF_TRUE | _SELF_FALSE:
            if ia and ib:
                return BoolConst(_cmp(op, a.value, b.value))
            if a == b and tot(a):
                return BoolConst(op in _SELF_TRUE)
            if op in ("==", "!=") and {a, b} == {Var("this"), Null()}:
                return BoolConst(op == "!=")
            return BinOp(op, a, b)
        ca, cb = isinstance(a, BoolConst), isinstance(b, BoolConst)
        if op == "&&":
            if ca:
                return b if a.value else a
            if cb and tot(a):
                return a if b.value else b
        elif op == "||":
            if ca:
                return a if a.value else b
            if cb and tot(a):
                return b if b.value else a
        elif op == "==>":
            if ca:
                return b if a.value else BoolConst(True)
            if cb:
                if b.value and tot(a):
                    return b
                if not b.value:
                    return self._not(a)
            if a == b and tot(a):
                return BoolConst(True)
        elif op in ("xor", "<==>"):
            if ca and cb:
                return BoolConst((a.value != b.value) if op == "xor" else (a.value == b.value))
            if a == b and tot(a):
                return BoolConst(op == "<==>")
            for c, other in ((a, b), (b, a)):
                if isinstance(c, BoolConst):
                    keep = c.value if op == "<==>" else not c.value
                    return other if keep else self._not(other)
        return BinOp(op, a, b)
