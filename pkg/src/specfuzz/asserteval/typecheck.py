"""Static typing of assertions against a MiniObj class and method."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..minilang import ast as A
from .syntax import (ARITH_OPS, CMP_OPS, LOGIC_OPS, BinOp, BoolConst, Expr, Has, IntConst, Nav, Neg, Not,
                     Null, Old, Quant, Reach, Var)

NULL = "null"


def set_type(cls: str) -> str:
    return f"set<{cls}>"


def set_elem(ty: str) -> Optional[str]:
    return ty[4:-1] if ty.startswith("set<") else None


class AssertionTypeError(Exception):
    def __init__(self, message: str, kind: str = "TypeError"):
        self.kind = kind
        super().__init__(message)


@dataclass(frozen=True)
class TypeContext:
    """Names visible to a postcondition of ``cls.method``.

    ``roots`` maps this, parameters and result to their declared types.
    """

    program: A.Program
    cls: str
    roots: dict[str, str]
    constants: frozenset[str] = field(default_factory=frozenset)


def context_for(program: A.Program, cls: str, method: Optional[str] = None) -> TypeContext:
    """Context for a postcondition of ``method``, or for class-level
    assertions over ``this`` when ``method`` is None."""
    decl = program.cls(cls)
    if decl is None:
        raise AssertionTypeError(f"unknown class {cls}", "UnknownClass")
    roots: dict[str, str] = {}
    if method is None:
        roots["this"] = cls
    else:
        m = decl.method(method)
        if m is None:
            raise AssertionTypeError(f"{cls} has no method {method}", "UnknownMethod")
        if not m.static:
            roots["this"] = cls
        for p in m.params:
            roots[p.name] = p.type
        if m.ret != "Void":
            roots["result"] = m.ret
    return TypeContext(program, cls, roots, frozenset(k.name for k in decl.consts))


def _is_ref(ty: str) -> bool:
    return ty not in ("Int", "Bool") and set_elem(ty) is None


class _Checker:
    def __init__(self, ctx: TypeContext):
        self.ctx = ctx
        self.program = ctx.program

    def field_type(self, cls: str, name: str) -> str:
        decl = self.program.cls(cls)
        ty = decl.field_type(name) if decl is not None else None
        if ty is None:
            raise AssertionTypeError(f"{cls} has no field {name}", "UnknownSymbol")
        return ty

    def check(self, e: Expr, bound: dict[str, str], in_old: bool) -> str:
        if isinstance(e, IntConst):
            return "Int"
        if isinstance(e, BoolConst):
            return "Bool"
        if isinstance(e, Null):
            return NULL
        if isinstance(e, Var):
            name = e.name
            if name in bound:
                return bound[name]
            if name in self.ctx.roots:
                if in_old and name == "result":
                    raise AssertionTypeError("result is not readable inside old()")
                return self.ctx.roots[name]
            if name in self.ctx.constants:
                return "Int"
            if "this" in self.ctx.roots and self.program.cls(self.ctx.cls).field_type(name) is not None:
                return self.field_type(self.ctx.cls, name)
            raise AssertionTypeError(f"unknown symbol {name}", "UnknownSymbol")
        if isinstance(e, Nav):
            obj = self.check(e.obj, bound, in_old)
            if not _is_ref(obj) or obj == NULL:
                raise AssertionTypeError(f"navigation .{e.field} on {obj}")
            return self.field_type(obj, e.field)
        if isinstance(e, Old):
            if in_old:
                raise AssertionTypeError("nested old()")
            return self.check(e.expr, bound, True)
        if isinstance(e, Reach):
            start = self.check(e.start, bound, in_old)
            if not _is_ref(start) or start == NULL:
                raise AssertionTypeError(f"reach from {start}")
            for f in e.fields:
                if self.field_type(start, f) != start:
                    raise AssertionTypeError(f"reach field {f} is not a recursive field of {start}")
            return set_type(start)
        if isinstance(e, Has):
            s = self.check(e.set, bound, in_old)
            elem = set_elem(s)
            if elem is None:
                raise AssertionTypeError(f"has() on {s}")
            t = self.check(e.elem, bound, in_old)
            if t not in (elem, NULL):
                raise AssertionTypeError(f"has() of {t} in {s}")
            return "Bool"
        if isinstance(e, Not):
            self.expect(e.operand, "Bool", bound, in_old)
            return "Bool"
        if isinstance(e, Neg):
            self.expect(e.operand, "Int", bound, in_old)
            return "Int"
        if isinstance(e, Quant):
            if e.quantifier not in ("all", "exists"):
                raise AssertionTypeError(f"unknown quantifier {e.quantifier}")
            if self.program.cls(e.type) is None:
                raise AssertionTypeError(f"unknown class {e.type}", "UnknownSymbol")
            inner = dict(bound)
            inner[e.var] = e.type
            self.expect(e.body, "Bool", inner, in_old)
            return "Bool"
        if isinstance(e, BinOp):
            op = e.op
            if op in LOGIC_OPS:
                self.expect(e.left, "Bool", bound, in_old)
                self.expect(e.right, "Bool", bound, in_old)
                return "Bool"
            if op in ARITH_OPS:
                self.expect(e.left, "Int", bound, in_old)
                self.expect(e.right, "Int", bound, in_old)
                return "Int"
            if op in CMP_OPS:
                lt = self.check(e.left, bound, in_old)
                rt = self.check(e.right, bound, in_old)
                if op in ("==", "!="):
                    if lt == rt and set_elem(lt) is None:
                        return "Bool"
                    if _is_ref(lt) and _is_ref(rt) and NULL in (lt, rt):
                        return "Bool"
                elif lt == rt == "Int":
                    return "Bool"
                raise AssertionTypeError(f"cannot compare {lt} {op} {rt}")
        raise AssertionTypeError(f"unsupported node {type(e).__name__}")

    def expect(self, e: Expr, ty: str, bound: dict[str, str], in_old: bool) -> None:
        got = self.check(e, bound, in_old)
        if got != ty:
            raise AssertionTypeError(f"expected {ty}, found {got}")


def type_of(e: Expr, ctx: TypeContext) -> str:
    return _Checker(ctx).check(e, {}, False)


def check_assertion(e: Expr, ctx: TypeContext) -> None:
    """Raise :class:`AssertionTypeError` unless ``e`` is a Bool assertion in ``ctx``."""
    ty = type_of(e, ctx)
    if ty != "Bool":
        raise AssertionTypeError(f"assertion has type {ty}, expected Bool")
