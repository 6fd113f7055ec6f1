"""Canonical MiniObj pretty-printer.

Output re-parses to a structurally identical program, so
``print(parse(print(p))) == print(p)`` for every program.
"""

from __future__ import annotations

from . import ast as A

_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY = 7
_POSTFIX = 8
_NONASSOC = {"==", "!=", "<", "<=", ">", ">="}

INDENT = "    "


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY
    if isinstance(e, A.IntLit) and e.value < 0:
        return _UNARY
    return _POSTFIX + 1


def format_expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.This):
        return "this"
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.FieldAccess):
        return f"{_wrap(e.obj, _POSTFIX)}.{e.name}"
    if isinstance(e, A.Call):
        args = ", ".join(format_expr(a) for a in e.args)
        if e.obj is None:
            return f"{e.method}({args})"
        return f"{_wrap(e.obj, _POSTFIX)}.{e.method}({args})"
    if isinstance(e, A.New):
        return f"new {e.cls}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        inner = _wrap(e.operand, _UNARY)
        if e.op == "-" and inner.startswith("-"):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        # left-associative: the right operand needs parens at equal precedence
        left = _wrap(e.left, p + 1 if e.op in _NONASSOC else p)
        right = _wrap(e.right, p + 1)
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e: A.Expr, min_prec: int) -> str:
    s = format_expr(e)
    return f"({s})" if _prec(e) < min_prec else s


def _params(params: list[A.Param]) -> str:
    return ", ".join(f"{p.name}: {p.type}" for p in params)


def _stmt_lines(s: A.Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, A.Block):
        return [pad + "{", *_block_body(s, depth + 1), pad + "}"]
    if isinstance(s, A.VarDecl):
        return [f"{pad}var {s.name}: {s.type} = {format_expr(s.init)};"]
    if isinstance(s, A.Assign):
        return [f"{pad}{format_expr(s.target)} = {format_expr(s.value)};"]
    if isinstance(s, A.Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {format_expr(s.value)};"]
    if isinstance(s, A.ExprStmt):
        return [f"{pad}{format_expr(s.expr)};"]
    if isinstance(s, A.While):
        return [f"{pad}while ({format_expr(s.cond)}) {{", *_block_body(s.body, depth + 1), pad + "}"]
    if isinstance(s, A.If):
        return _if_lines(s, depth, pad)
    raise TypeError(f"not a statement: {s!r}")


def format_stmt(s: A.Stmt) -> str:
    """One-line rendering of a statement, for reports."""
    return " ".join(line.strip() for line in _stmt_lines(s, 0))


def _if_lines(s: A.If, depth: int, head: str) -> list[str]:
    pad = INDENT * depth
    lines = [f"{head}if ({format_expr(s.cond)}) {{", *_block_body(s.then, depth + 1)]
    if s.orelse is None:
        lines.append(pad + "}")
    elif isinstance(s.orelse, A.If):
        lines.extend(_if_lines(s.orelse, depth, pad + "} else "))
    else:
        lines.append(pad + "} else {")
        lines.extend(_block_body(s.orelse, depth + 1))
        lines.append(pad + "}")
    return lines


def _block_body(b: A.Block, depth: int) -> list[str]:
    out: list[str] = []
    for s in b.stmts:
        out.extend(_stmt_lines(s, depth))
    return out


def format_class(c: A.ClassDecl) -> list[str]:
    lines = [f"class {c.name} {{"]
    for f in c.fields:
        lines.append(f"{INDENT}{f.name}: {f.type};")
    for k in c.consts:
        lines.append(f"{INDENT}const {k.name}: Int = {k.value};")
    for ctor in c.ctors:
        if ctor.implicit:
            continue
        mods = "private " if ctor.private else ""
        lines.append("")
        lines.append(f"{INDENT}{mods}init({_params(ctor.params)}) {{")
        lines.extend(_block_body(ctor.body, 2))
        lines.append(INDENT + "}")
    for m in c.methods:
        mods = ("private " if m.private else "") + ("static " if m.static else "")
        lines.append("")
        lines.append(f"{INDENT}{mods}def {m.name}({_params(m.params)}): {m.ret} {{")
        lines.extend(_block_body(m.body, 2))
        lines.append(INDENT + "}")
    lines.append("}")
    return lines


def format_program(p: A.Program) -> str:
    chunks = ["\n".join(format_class(c)) for c in p.classes]
    return "\n\n".join(chunks) + ("\n" if chunks else "")
