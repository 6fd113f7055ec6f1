"""Three-valued evaluation of assertions over execution records.

Assertions are compiled once into nested Python closures and then applied
to many records. A fault anywhere in evaluation yields an ``Error`` outcome
unless a short-circuit operator skipped the faulting operand. Inside a
quantifier body, a fault for one binding of the variable only drops that
binding from the domain.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, Optional

from ..minilang.interp import int_div, int_mod, wrap
from ..statecap import ExecutionRecord, PathError, Snapshot, reach
from .syntax import (BinOp, BoolConst, Expr, Has, IntConst, Nav, Neg, Not, Null, Old, Quant, Reach, Var,
                     format_assertion)


@dataclass(frozen=True)
class EvalOutcome:
    status: str  # "True", "False" or "Error"
    kind: Optional[str] = None  # NullDeref, DivByZero, UnknownSymbol, TypeMismatch
    text: Optional[str] = None

    @property
    def holds(self) -> bool:
        return self.status == "True"

    def __str__(self) -> str:
        if self.status == "Error":
            return f"Error{{{self.kind}}} at {self.text}"
        return self.status


TRUE = EvalOutcome("True")
FALSE = EvalOutcome("False")


class _Fault(Exception):
    def __init__(self, kind: str, node: Expr):
        self.kind = kind
        self.node = node


class _Env:
    __slots__ = ("post", "pre", "bound")

    def __init__(self, pre: Snapshot, post: Snapshot):
        self.pre = pre
        self.post = post
        self.bound: dict[str, object] = {}


Closure = Callable[[_Env], object]

_CMP = {"==": operator.eq, "!=": operator.ne, "<": operator.lt, "<=": operator.le,
        ">": operator.gt, ">=": operator.ge}


class _Compiler:
    def __init__(self, roots: frozenset, constants: frozenset):
        self.roots = roots
        self.constants = constants

    def compile(self, e: Expr, bound: frozenset, old: bool) -> Closure:
        snap = operator.attrgetter("pre" if old else "post")
        if isinstance(e, IntConst):
            v = wrap(e.value)
            return lambda env: v
        if isinstance(e, BoolConst):
            b = e.value
            return lambda env: b
        if isinstance(e, Null):
            return lambda env: None
        if isinstance(e, Var):
            return self.var(e, bound, old, snap)
        if isinstance(e, Nav):
            return self.nav(self.compile(e.obj, bound, old), e.field, e, snap)
        if isinstance(e, Old):
            return self.compile(e.expr, bound, True)
        if isinstance(e, Reach):
            start = self.compile(e.start, bound, old)
            fields = e.fields

            def reach_(env):
                s = start(env)
                sn = snap(env)
                if s is not None and s.oid not in sn.objects:
                    raise _Fault("UnknownSymbol", e)
                try:
                    return reach(sn, s, fields)
                except PathError:
                    raise _Fault("UnknownSymbol", e) from None
            return reach_
        if isinstance(e, Has):
            sf = self.compile(e.set, bound, old)
            ef = self.compile(e.elem, bound, old)
            return lambda env: ef(env) in sf(env)
        if isinstance(e, Not):
            f = self.compile(e.operand, bound, old)
            return lambda env: not f(env)
        if isinstance(e, Neg):
            f = self.compile(e.operand, bound, old)
            return lambda env: wrap(-f(env))
        if isinstance(e, Quant):
            return self.quant(e, bound, old, snap)
        if isinstance(e, BinOp):
            return self.binop(e, bound, old)
        raise TypeError(f"not an assertion node: {e!r}")

    def var(self, e: Var, bound: frozenset, old: bool, snap) -> Closure:
        name = e.name
        if name in bound:
            if not old:
                return lambda env: env.bound[name]

            def bound_pre(env):
                v = env.bound[name]
                if v is not None and v.oid not in env.pre.objects:
                    raise _Fault("UnknownSymbol", e)
                return v
            return bound_pre
        if name in self.roots:
            def root(env):
                try:
                    return snap(env).roots[name]
                except KeyError:
                    raise _Fault("UnknownSymbol", e) from None
            return root
        if name in self.constants:
            return lambda env: env.post.constants[name]
        if "this" in self.roots:
            return self.nav(self.var(Var("this"), bound, old, snap), name, e, snap)

        def unknown(env):
            raise _Fault("UnknownSymbol", e)
        return unknown

    def nav(self, objf: Closure, name: str, e: Expr, snap) -> Closure:
        def nav_(env):
            v = objf(env)
            if v is None:
                raise _Fault("NullDeref", e)
            try:
                return snap(env).objects[v.oid].fields[name]
            except KeyError:
                raise _Fault("UnknownSymbol", e) from None
        return nav_

    def quant(self, e: Quant, bound: frozenset, old: bool, snap) -> Closure:
        body = self.compile(e.body, bound | {e.var}, old)
        var, cls = e.var, e.type
        universal = e.quantifier == "all"

        def quant_(env):
            saved = env.bound.get(var, _MISSING)
            try:
                for ref in snap(env).instances(cls):
                    env.bound[var] = ref
                    try:
                        value = body(env)
                    except _Fault:
                        continue
                    if value is not universal:
                        return not universal
                return universal
            finally:
                if saved is _MISSING:
                    env.bound.pop(var, None)
                else:
                    env.bound[var] = saved
        return quant_

    def binop(self, e: BinOp, bound: frozenset, old: bool) -> Closure:
        op = e.op
        lf = self.compile(e.left, bound, old)
        rf = self.compile(e.right, bound, old)
        if op == "&&":
            return lambda env: lf(env) and rf(env)
        if op == "||":
            return lambda env: lf(env) or rf(env)
        if op == "==>":
            return lambda env: (not lf(env)) or rf(env)
        if op == "xor":
            return lambda env: lf(env) != rf(env)
        if op == "<==>":
            return lambda env: lf(env) == rf(env)
        if op in _CMP:
            cmp = _CMP[op]
            return lambda env: cmp(lf(env), rf(env))
        if op == "+":
            return lambda env: wrap(lf(env) + rf(env))
        if op == "-":
            return lambda env: wrap(lf(env) - rf(env))
        if op == "*":
            return lambda env: wrap(lf(env) * rf(env))
        div = int_div if op == "/" else int_mod

        def divide(env):
            a = lf(env)
            b = rf(env)
            if b == 0:
                raise _Fault("DivByZero", e)
            return div(a, b)
        return divide


_MISSING = object()


def record_shape(record: ExecutionRecord) -> tuple[frozenset, frozenset]:
    return frozenset(record.post.roots), frozenset(record.post.constants)


class CompiledAssertion:
    """An assertion compiled for records with a given root/constant shape."""

    __slots__ = ("assertion", "_fn")

    def __init__(self, assertion: Expr, shape: tuple[frozenset, frozenset]):
        self.assertion = assertion
        self._fn = _Compiler(*shape).compile(assertion, frozenset(), False)

    def outcome(self, record: ExecutionRecord) -> EvalOutcome:
        try:
            value = self._fn(_Env(record.pre, record.post))
        except _Fault as f:
            return EvalOutcome("Error", f.kind, format_assertion(f.node))
        except (TypeError, AttributeError):
            return EvalOutcome("Error", "TypeMismatch", format_assertion(self.assertion))
        return TRUE if value is True else FALSE

    def holds(self, record: ExecutionRecord) -> bool:
        """True iff the outcome is True; Error counts as not holding."""
        try:
            return self._fn(_Env(record.pre, record.post)) is True
        except (_Fault, TypeError, AttributeError):
            return False


_cache: dict[tuple, CompiledAssertion] = {}


def compile_for(assertion: Expr, record: ExecutionRecord) -> CompiledAssertion:
    key = (assertion, record_shape(record))
    hit = _cache.get(key)
    if hit is None:
        if len(_cache) > 4096:
            _cache.clear()
        hit = _cache[key] = CompiledAssertion(assertion, key[1])
    return hit


def evaluate(assertion: Expr, record: ExecutionRecord) -> EvalOutcome:
    """Evaluate ``assertion`` on ``record``; never raises on evaluation faults."""
    return compile_for(assertion, record).outcome(record)
