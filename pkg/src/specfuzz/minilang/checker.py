"""Name resolution and type checking for MiniObj programs."""

from __future__ import annotations

from typing import Optional

from . import ast as A
from .errors import DuplicateNameError, TypeCheckError

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


def _err(node: A.Node, msg: str) -> TypeCheckError:
    return TypeCheckError(msg, node.nid, node.line, node.col)


def _dup(node: A.Node, what: str, name: str) -> DuplicateNameError:
    return DuplicateNameError(f"duplicate {what} {name!r}", node.nid, node.line, node.col)


class _Scope:
    def __init__(self, cls: A.ClassDecl, static: bool, ret: Optional[str]):
        self.cls = cls
        self.static = static
        self.ret = ret
        self.locals: dict[str, str] = {}


class Checker:
    def __init__(self, program: A.Program):
        self.program = program

    # -- helpers ------------------------------------------------------------

    def is_class(self, ty: str) -> bool:
        return self.program.cls(ty) is not None

    def check_type(self, node: A.Node, ty: str, allow_void: bool = False) -> None:
        if ty in A.PRIMITIVES or (allow_void and ty == "Void") or self.is_class(ty):
            return
        raise _err(node, f"unknown type {ty!r}")

    def assignable(self, src: str, dst: str) -> bool:
        if src == dst:
            return True
        return src == "null" and dst not in A.PRIMITIVES

    # -- entry --------------------------------------------------------------

    def run(self) -> None:
        seen: set[str] = set()
        for c in self.program.classes:
            if c.name in seen:
                raise _dup(c, "class", c.name)
            if c.name in A.PRIMITIVES or c.name == "Void":
                raise _err(c, f"class name {c.name!r} is reserved")
            seen.add(c.name)
        for c in self.program.classes:
            self.declarations(c)
        for c in self.program.classes:
            for ctor in c.ctors:
                self.body(c, ctor.params, ctor.body, static=False, ret=None)
            for m in c.methods:
                ret = None if m.ret == "Void" else m.ret
                self.body(c, m.params, m.body, static=m.static, ret=ret)
                if ret is not None and not _returns(m.body.stmts):
                    raise _err(m, f"method {m.name!r} may finish without returning a value")

    def declarations(self, c: A.ClassDecl) -> None:
        members: set[str] = set()
        for f in c.fields:
            if f.name in members:
                raise _dup(f, "member", f.name)
            members.add(f.name)
            self.check_type(f, f.type)
        for k in c.consts:
            if k.name in members:
                raise _dup(k, "member", k.name)
            if not INT_MIN <= k.value <= INT_MAX:
                raise _err(k, "constant out of 64-bit range")
            members.add(k.name)
        names: set[str] = set()
        for m in c.methods:
            if m.name in names:
                raise _dup(m, "method", m.name)
            names.add(m.name)
            self.check_type(m, m.ret, allow_void=True)
            self.params(m.params)
        arities: set[int] = set()
        for ctor in c.ctors:
            if len(ctor.params) in arities:
                raise _dup(ctor, "constructor arity", str(len(ctor.params)))
            arities.add(len(ctor.params))
            self.params(ctor.params)
        if not c.ctors:
            implicit = A.Constructor([], A.Block([]), private=False)
            implicit.implicit = True
            c.ctors.append(implicit)

    def params(self, params: list[A.Param]) -> None:
        names: set[str] = set()
        for p in params:
            if p.name in names:
                raise _dup(p, "parameter", p.name)
            names.add(p.name)
            self.check_type(p, p.type)

    # -- bodies -------------------------------------------------------------

    def body(self, c: A.ClassDecl, params: list[A.Param], body: A.Block, static: bool, ret: Optional[str]) -> None:
        scope = _Scope(c, static, ret)
        for p in params:
            scope.locals[p.name] = p.type
        self.block(body, scope)

    def block(self, block: A.Block, scope: _Scope) -> None:
        for s in block.stmts:
            self.stmt(s, scope)

    def stmt(self, s: A.Stmt, scope: _Scope) -> None:
        if isinstance(s, A.Block):
            self.block(s, scope)
        elif isinstance(s, A.VarDecl):
            if s.name in scope.locals:
                raise _dup(s, "local", s.name)
            self.check_type(s, s.type)
            self.expect(s.init, s.type, scope)
            scope.locals[s.name] = s.type
        elif isinstance(s, A.Assign):
            if isinstance(s.target, A.Name):
                ty = self.name_type(s.target, scope)
                if s.target.kind not in ("local", "field"):
                    raise _err(s.target, f"cannot assign to {s.target.name!r}")
            else:
                ty = self.expr(s.target, scope)
            self.expect(s.value, ty, scope)
        elif isinstance(s, A.If):
            self.expect(s.cond, "Bool", scope)
            self.block(s.then, scope)
            if s.orelse is not None:
                self.stmt(s.orelse, scope)
        elif isinstance(s, A.While):
            self.expect(s.cond, "Bool", scope)
            self.block(s.body, scope)
        elif isinstance(s, A.Return):
            if scope.ret is None:
                if s.value is not None:
                    raise _err(s, "returning a value from a Void method or constructor")
            else:
                if s.value is None:
                    raise _err(s, "missing return value")
                self.expect(s.value, scope.ret, scope)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr, scope)
        else:  # pragma: no cover
            raise _err(s, f"unknown statement {type(s).__name__}")

    # -- expressions --------------------------------------------------------

    def expect(self, e: A.Expr, ty: str, scope: _Scope) -> None:
        got = self.expr(e, scope)
        if not self.assignable(got, ty):
            raise _err(e, f"expected {ty}, got {got}")

    def name_type(self, e: A.Name, scope: _Scope) -> str:
        if e.name in scope.locals:
            e.kind = "local"
            return scope.locals[e.name]
        ftype = scope.cls.field_type(e.name)
        if ftype is not None:
            if scope.static:
                raise _err(e, f"field {e.name!r} used in static context")
            e.kind = "field"
            return ftype
        for k in scope.cls.consts:
            if k.name == e.name:
                e.kind = "const"
                return "Int"
        if self.is_class(e.name):
            e.kind = "class"
            return "class:" + e.name
        raise _err(e, f"unknown name {e.name!r}")

    def expr(self, e: A.Expr, scope: _Scope) -> str:
        ty = self._expr(e, scope)
        e.static_type = ty
        return ty

    def _expr(self, e: A.Expr, scope: _Scope) -> str:
        if isinstance(e, A.IntLit):
            if not INT_MIN <= e.value <= INT_MAX + 1:
                raise _err(e, "integer literal out of 64-bit range")
            return "Int"
        if isinstance(e, A.BoolLit):
            return "Bool"
        if isinstance(e, A.NullLit):
            return "null"
        if isinstance(e, A.This):
            if scope.static:
                raise _err(e, "'this' used in static context")
            return scope.cls.name
        if isinstance(e, A.Name):
            ty = self.name_type(e, scope)
            if ty.startswith("class:"):
                raise _err(e, f"class {e.name!r} used as a value")
            return ty
        if isinstance(e, A.FieldAccess):
            owner = self.expr(e.obj, scope)
            decl = self.program.cls(owner)
            if decl is None:
                raise _err(e, f"field access on non-object type {owner}")
            ftype = decl.field_type(e.name)
            if ftype is None:
                raise _err(e, f"class {owner} has no field {e.name!r}")
            return ftype
        if isinstance(e, A.Call):
            return self.call(e, scope)
        if isinstance(e, A.New):
            decl = self.program.cls(e.cls)
            if decl is None:
                raise _err(e, f"unknown class {e.cls!r}")
            ctor = decl.ctor(len(e.args))
            if ctor is None:
                raise _err(e, f"no constructor of {e.cls} takes {len(e.args)} arguments")
            if ctor.private and decl is not scope.cls:
                raise _err(e, f"constructor of {e.cls} is private")
            for a, p in zip(e.args, ctor.params):
                self.expect(a, p.type, scope)
            return e.cls
        if isinstance(e, A.Unary):
            if e.op == "!":
                self.expect(e.operand, "Bool", scope)
                return "Bool"
            if self.expr(e.operand, scope) != "Int":
                raise _err(e, "unary minus on non-Int")
            return "Int"
        if isinstance(e, A.Binary):
            return self.binary(e, scope)
        raise _err(e, f"unknown expression {type(e).__name__}")  # pragma: no cover

    def binary(self, e: A.Binary, scope: _Scope) -> str:
        if e.op in A.LOGICAL_OPS:
            self.expect(e.left, "Bool", scope)
            self.expect(e.right, "Bool", scope)
            e.operand_type = "Bool"
            return "Bool"
        lt = self.expr(e.left, scope)
        rt = self.expr(e.right, scope)
        if e.op in A.ARITHMETIC_OPS:
            if lt != "Int" or rt != "Int":
                raise _err(e, f"operator {e.op} needs Int operands")
            e.operand_type = "Int"
            return "Int"
        if e.op in ("==", "!="):
            if lt == rt == "Int" or lt == rt == "Bool":
                e.operand_type = lt
                return "Bool"
            if lt not in A.PRIMITIVES and rt not in A.PRIMITIVES:
                if lt != rt and "null" not in (lt, rt):
                    raise _err(e, f"cannot compare {lt} with {rt}")
                e.operand_type = "ref"
                return "Bool"
            raise _err(e, f"cannot compare {lt} with {rt}")
        if lt != "Int" or rt != "Int":
            raise _err(e, f"operator {e.op} needs Int operands")
        e.operand_type = "Int"
        return "Bool"

    def call(self, e: A.Call, scope: _Scope) -> str:
        if e.obj is None:
            decl = scope.cls
            m = decl.method(e.method)
            if m is None:
                raise _err(e, f"unknown method {e.method!r}")
            if not m.static and scope.static:
                raise _err(e, f"instance method {e.method!r} called from static context")
            e.static = m.static
        elif isinstance(e.obj, A.Name) and e.obj.name not in scope.locals \
                and scope.cls.field_type(e.obj.name) is None and self.is_class(e.obj.name):
            e.obj.kind = "class"
            decl = self.program.cls(e.obj.name)
            m = decl.method(e.method)
            if m is None or not m.static:
                raise _err(e, f"{decl.name} has no static method {e.method!r}")
            e.static = True
        else:
            owner = self.expr(e.obj, scope)
            decl = self.program.cls(owner)
            if decl is None:
                raise _err(e, f"method call on non-object type {owner}")
            m = decl.method(e.method)
            if m is None:
                raise _err(e, f"class {owner} has no method {e.method!r}")
            if m.static:
                raise _err(e, f"static method {e.method!r} called on an instance")
            e.static = False
        if m.private and decl is not scope.cls:
            raise _err(e, f"method {decl.name}.{m.name} is private")
        if len(e.args) != len(m.params):
            raise _err(e, f"{m.name} takes {len(m.params)} arguments, got {len(e.args)}")
        for a, p in zip(e.args, m.params):
            self.expect(a, p.type, scope)
        e.target_class = decl.name
        return m.ret


def _returns(stmts: list[A.Stmt]) -> bool:
    """True when every path through ``stmts`` ends in a return."""
    for s in stmts:
        if isinstance(s, A.Return):
            return True
        if isinstance(s, A.Block) and _returns(s.stmts):
            return True
        if isinstance(s, A.If) and s.orelse is not None:
            other = s.orelse.stmts if isinstance(s.orelse, A.Block) else [s.orelse]
            if _returns(s.then.stmts) and _returns(other):
                return True
    return False


def check_program(program: A.Program) -> A.Program:
    Checker(program).run()
    return program
