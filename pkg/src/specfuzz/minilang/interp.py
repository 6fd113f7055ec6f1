"""Big-step tree-walking interpreter for checked MiniObj programs."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional, Union

from . import ast as A
from .errors import RunFailure

DEFAULT_BUDGET = 10_000
MAX_CALL_DEPTH = 200

_MOD = 2**64
_HALF = 2**63

# each MiniObj call costs a bounded number of Python frames; make room for
# MAX_CALL_DEPTH nested calls
if sys.getrecursionlimit() < 12_000:
    sys.setrecursionlimit(12_000)


@dataclass(frozen=True)
class Ref:
    """Reference to a heap object."""

    oid: int

    def __repr__(self) -> str:
        return f"@{self.oid}"


Value = Union[int, bool, None, Ref]


def wrap(v: int) -> int:
    """Two's-complement 64-bit wrap-around."""
    return (v + _HALF) % _MOD - _HALF


def int_div(a: int, b: int) -> int:
    """Truncating division (Java semantics); caller guarantees b != 0."""
    q = abs(a) // abs(b)
    return wrap(q if (a < 0) == (b < 0) else -q)


def int_mod(a: int, b: int) -> int:
    """Remainder with the sign of the dividend; caller guarantees b != 0."""
    r = abs(a) % abs(b)
    return -r if a < 0 else r


def default_value(ty: str) -> Value:
    if ty == "Int":
        return 0
    if ty == "Bool":
        return False
    return None


@dataclass
class Obj:
    cls: str
    fields: dict[str, Value]


@dataclass
class Heap:
    objects: dict[int, Obj] = field(default_factory=dict)
    next_id: int = 1

    def copy(self) -> "Heap":
        return Heap({k: Obj(o.cls, dict(o.fields)) for k, o in self.objects.items()}, self.next_id)

    def alloc(self, decl: A.ClassDecl) -> Ref:
        oid = self.next_id
        self.next_id += 1
        self.objects[oid] = Obj(decl.name, {f.name: default_value(f.type) for f in decl.fields})
        return Ref(oid)

    def get(self, ref: Ref) -> Obj:
        return self.objects[ref.oid]


class _Return(Exception):
    def __init__(self, value: Value):
        self.value = value


class Interpreter:
    """Executes calls against a heap; the step counter spans nested calls."""

    def __init__(self, program: A.Program, heap: Heap, budget: int = DEFAULT_BUDGET):
        if budget <= 0:
            raise ValueError("step budget must be positive")
        self.program = program
        self.heap = heap
        self.budget = budget
        self.steps = 0
        self.depth = 0
        self.consts = {c.name: {k.name: k.value for k in c.consts} for c in program.classes}

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise RunFailure("BudgetExceeded", f"more than {self.budget} steps")

    # -- calls --------------------------------------------------------------

    def construct(self, cls: str, args: list[Value]) -> Ref:
        decl = self.program.cls(cls)
        ctor = decl.ctor(len(args))
        ref = self.heap.alloc(decl)
        self.invoke(decl, ctor.params, ctor.body, ref, args)
        return ref

    def call(self, cls: str, method: str, receiver: Optional[Ref], args: list[Value]) -> Value:
        decl = self.program.cls(cls)
        m = decl.method(method)
        if not m.static:
            if receiver is None:
                raise RunFailure("NullDeref", f"call of {method} on null")
            decl = self.program.cls(self.heap.get(receiver).cls)
        result = self.invoke(decl, m.params, m.body, None if m.static else receiver, args)
        if m.ret != "Void" and result is _NO_VALUE:
            raise RunFailure("MissingReturn", f"{cls}.{method}")
        return None if result is _NO_VALUE else result

    def invoke(self, decl: A.ClassDecl, params: list[A.Param], body: A.Block,
               this: Optional[Ref], args: list[Value]) -> Value:
        self.depth += 1
        if self.depth > MAX_CALL_DEPTH:
            raise RunFailure("StackOverflow", f"call depth above {MAX_CALL_DEPTH}")
        self.tick()
        frame = _Frame(decl, this, {p.name: a for p, a in zip(params, args)})
        try:
            self.block(body, frame)
        except _Return as r:
            return r.value
        finally:
            self.depth -= 1
        return _NO_VALUE

    # -- statements ---------------------------------------------------------

    def block(self, b: A.Block, f: "_Frame") -> None:
        for s in b.stmts:
            self.stmt(s, f)

    def stmt(self, s: A.Stmt, f: "_Frame") -> None:
        self.tick()
        t = type(s)
        if t is A.Assign:
            value = self.expr(s.value, f)
            target = s.target
            if type(target) is A.Name:
                if target.kind == "local":
                    f.locals[target.name] = value
                else:
                    self.heap.get(f.this).fields[target.name] = value
            else:
                obj = self.deref(self.expr(target.obj, f), target.name)
                obj.fields[target.name] = value
        elif t is A.If:
            if self.expr(s.cond, f):
                self.block(s.then, f)
            elif s.orelse is not None:
                self.stmt(s.orelse, f)
        elif t is A.While:
            while self.expr(s.cond, f):
                self.block(s.body, f)
                self.tick()
        elif t is A.Return:
            raise _Return(None if s.value is None else self.expr(s.value, f))
        elif t is A.ExprStmt:
            self.expr(s.expr, f)
        elif t is A.VarDecl:
            f.locals[s.name] = self.expr(s.init, f)
        elif t is A.Block:
            self.block(s, f)

    # -- expressions --------------------------------------------------------

    def deref(self, v: Value, what: str) -> Obj:
        if v is None:
            raise RunFailure("NullDeref", f"access of {what} on null")
        return self.heap.get(v)

    def expr(self, e: A.Expr, f: "_Frame") -> Value:
        t = type(e)
        if t is A.Binary:
            op = e.op
            if op == "&&":
                return self.expr(e.left, f) and self.expr(e.right, f)
            if op == "||":
                return self.expr(e.left, f) or self.expr(e.right, f)
            a = self.expr(e.left, f)
            b = self.expr(e.right, f)
            if op == "==":
                return a == b
            if op == "!=":
                return a != b
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
            if op == "+":
                return wrap(a + b)
            if op == "-":
                return wrap(a - b)
            if op == "*":
                return wrap(a * b)
            if b == 0:
                raise RunFailure("DivByZero", f"{op} by zero")
            return int_div(a, b) if op == "/" else int_mod(a, b)
        if t is A.Name:
            kind = e.kind
            if kind == "local":
                return f.locals[e.name]
            if kind == "field":
                return self.heap.get(f.this).fields[e.name]
            return self.consts[f.decl.name][e.name]
        if t is A.IntLit:
            return wrap(e.value)
        if t is A.FieldAccess:
            return self.deref(self.expr(e.obj, f), e.name).fields[e.name]
        if t is A.BoolLit:
            return e.value
        if t is A.NullLit:
            return None
        if t is A.This:
            return f.this
        if t is A.Unary:
            v = self.expr(e.operand, f)
            return (not v) if e.op == "!" else wrap(-v)
        if t is A.Call:
            args = [self.expr(a, f) for a in e.args]
            if e.static:
                return self.call(e.target_class, e.method, None, args)
            receiver = f.this if e.obj is None else self.expr(e.obj, f)
            return self.call(e.target_class, e.method, receiver, args)
        if t is A.New:
            return self.construct(e.cls, [self.expr(a, f) for a in e.args])
        raise TypeError(f"unknown expression {t.__name__}")  # pragma: no cover


class _NoValue:
    __slots__ = ()


_NO_VALUE = _NoValue()


@dataclass
class _Frame:
    decl: A.ClassDecl
    this: Optional[Ref]
    locals: dict[str, Value]


def run_method(program: A.Program, receiver: Optional[Ref], method: str, args: list[Value],
               heap: Heap, step_budget: int = DEFAULT_BUDGET, cls: Optional[str] = None) -> tuple[Value, Heap]:
    """Run one method call on a copy of ``heap``.

    ``cls`` names the declaring class for static calls; for instance calls it
    defaults to the receiver's class. Raises :class:`RunFailure` when the call
    does not complete.
    """
    heap = heap.copy()
    if cls is None:
        if receiver is None:
            raise ValueError("static calls need cls")
        cls = heap.get(receiver).cls
    interp = Interpreter(program, heap, step_budget)
    result = interp.call(cls, method, receiver, list(args))
    return result, heap


def construct(program: A.Program, cls: str, args: list[Value], heap: Heap,
              step_budget: int = DEFAULT_BUDGET) -> tuple[Ref, Heap]:
    """Allocate and initialise a ``cls`` object on a copy of ``heap``."""
    heap = heap.copy()
    ref = Interpreter(program, heap, step_budget).construct(cls, list(args))
    return ref, heap
