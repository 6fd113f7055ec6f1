"""First-order AST mutants of a MiniObj class.

Operators:

ROR  relational operator replacement, plus replacing the comparison by
     ``true``/``false``
AOR  arithmetic operator replacement
COR  ``&&``/``||`` swap, and either operand replaced by ``true``/``false``
LVR  literal value replacement
UOI  negation of a boolean expression
STD  statement deletion (assignments, call statements, void returns)
EVR  expression value replacement: an Int or object value that is returned,
     assigned or passed as an argument becomes ``0`` or ``null``

Every mutant is pretty-printed and re-parsed, so it always type-checks and
its node ids are those of a freshly parsed program.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .minilang import ast as A
from .minilang import format_expr, format_program, parse_program
from .minilang.printer import format_stmt
from .minilang.errors import MiniObjError
from .minilang.interp import wrap

OPERATORS = ("AOR", "COR", "EVR", "LVR", "ROR", "STD", "UOI")

_INT_REL = ("<", "<=", ">", ">=", "==", "!=")


class UnknownClass(MiniObjError):
    pass


@dataclass
class Mutant:
    id: str
    operator: str
    node: int
    member: str  # enclosing constructor or method
    line: int
    original: str
    replacement: str
    program: A.Program
    source: str

    def describe(self) -> dict:
        return {"id": self.id, "operator": self.operator, "node": self.node, "member": self.member,
                "line": self.line, "original": self.original, "replacement": self.replacement}


# an edit is (operator, node, replacement node or None for deletion)
_Edit = tuple[str, A.Node, Optional[A.Node]]


def _bool(v: bool) -> A.BoolLit:
    return A.BoolLit(v)


def _edits(node: A.Node, parent_stmt_ok: bool, void: bool) -> Iterator[_Edit]:
    if isinstance(node, A.Binary):
        op = node.op
        if op in _INT_REL:
            if node.operand_type == "Int":
                others = [o for o in _INT_REL if o != op]
            else:
                others = ["!=" if op == "==" else "=="]
            for o in others:
                yield "ROR", node, A.Binary(o, node.left, node.right)
            yield "ROR", node, _bool(True)
            yield "ROR", node, _bool(False)
        elif op in A.ARITHMETIC_OPS:
            for o in A.ARITHMETIC_OPS:
                if o != op:
                    yield "AOR", node, A.Binary(o, node.left, node.right)
        elif op in ("&&", "||"):
            yield "COR", node, A.Binary("||" if op == "&&" else "&&", node.left, node.right)
            for v in (True, False):
                yield "COR", node, A.Binary(op, _bool(v), node.right)
            for v in (True, False):
                yield "COR", node, A.Binary(op, node.left, _bool(v))
        if op in _INT_REL or op in ("&&", "||"):
            yield "UOI", node, A.Unary("!", node)
    elif isinstance(node, A.IntLit):
        v = node.value
        seen = set()
        for r in (0, 1, -1, wrap(v + 1), wrap(v - 1)):
            if r != v and r not in seen:
                seen.add(r)
                yield "LVR", node, A.IntLit(r)
    elif isinstance(node, A.BoolLit):
        yield "LVR", node, _bool(not node.value)
    elif isinstance(node, (A.If, A.While)):
        cond = node.cond
        if not isinstance(cond, (A.Binary, A.BoolLit)) and not (isinstance(cond, A.Unary) and cond.op == "!"):
            yield "UOI", cond, A.Unary("!", cond)
    if parent_stmt_ok:
        if isinstance(node, A.Assign) or (isinstance(node, A.ExprStmt) and isinstance(node.expr, A.Call)):
            yield "STD", node, None
        elif isinstance(node, A.Return) and node.value is None and void:
            yield "STD", node, None


def _value_slots(node: A.Node) -> list[A.Node]:
    if isinstance(node, A.Return):
        return [node.value] if node.value is not None else []
    if isinstance(node, A.Assign):
        return [node.value]
    if isinstance(node, A.VarDecl):
        return [node.init]
    if isinstance(node, (A.Call, A.New)):
        return list(node.args)
    return []


def _evr(node: A.Node) -> Iterator[_Edit]:
    for v in _value_slots(node):
        ty = v.static_type
        if ty == "Int" and not (isinstance(v, A.IntLit) and v.value == 0):
            yield "EVR", v, A.IntLit(0)
        elif ty not in ("Int", "Bool", "null", "") and not isinstance(v, A.NullLit):
            yield "EVR", v, A.NullLit()


def _members(decl: A.ClassDecl) -> list[tuple[str, A.Node, bool]]:
    out: list[tuple[str, A.Node, bool]] = []
    for c in decl.ctors:
        if not c.implicit:
            out.append((f"init/{len(c.params)}", c, True))
    for m in decl.methods:
        out.append((m.name, m, m.ret == "Void"))
    return out


def _candidate_edits(decl: A.ClassDecl) -> list[tuple[str, str, _Edit]]:
    found: list[tuple[str, str, _Edit]] = []
    for member, node, void in _members(decl):
        stmts_in_blocks = {s.nid for b in A.walk(node) if isinstance(b, A.Block) for s in b.stmts}
        for n in A.walk(node.body):
            for edit in _edits(n, n.nid in stmts_in_blocks, void):
                found.append((member, edit[0], edit))
            for edit in _evr(n):
                found.append((member, edit[0], edit))
    return found


def _apply(program: A.Program, target: str, edit: _Edit) -> Optional[A.Program]:
    op, node, new = edit
    clone = copy.deepcopy(program)
    cdecl = clone.cls(target)
    if new is None:
        ok = A.remove_stmt(cdecl, node.nid)
    else:
        # replacement subtrees may share children with the original; copy them
        ok = A.replace_node(cdecl, node.nid, copy.deepcopy(new))
    if not ok:  # pragma: no cover - nodes come from the same program
        return None
    try:
        return parse_program(format_program(clone))
    except MiniObjError:
        return None


def _fragment(n: Optional[A.Node]) -> str:
    if n is None:
        return "<deleted>"
    try:
        return format_expr(n)
    except TypeError:
        return format_stmt(n)


def generate_mutants(program: A.Program, target: str, operators: Iterable[str] = OPERATORS) -> list[Mutant]:
    """All first-order mutants of ``target``'s constructors and methods,
    ordered by (node id, operator, replacement index) and numbered from m0001.

    Mutants whose printed source equals the original or an earlier mutant
    are dropped.
    """
    decl = program.cls(target)
    if decl is None:
        raise UnknownClass(target)
    wanted = set(operators)
    unknown = wanted - set(OPERATORS)
    if unknown:
        raise ValueError(f"unknown operators: {sorted(unknown)}")
    edits = [(m, op, e) for m, op, e in _candidate_edits(decl) if op in wanted]
    # stable sort keeps the per-node replacement order
    keyed = sorted(enumerate(edits), key=lambda ie: (ie[1][2][1].nid, ie[1][1], ie[0]))
    seen = {format_program(program)}
    out: list[Mutant] = []
    for _, (member, op, edit) in keyed:
        mutated = _apply(program, target, edit)
        if mutated is None:
            continue
        src = format_program(mutated)
        if src in seen:
            continue
        seen.add(src)
        node = edit[1]
        out.append(Mutant(f"m{len(out) + 1:04d}", op, node.nid, member, node.line,
                          _fragment(node), _fragment(edit[2]), mutated, src))
    return out


def export_mutants(mutants: list[Mutant], out_dir: str | Path, subject: Optional[A.Program] = None,
                   target: Optional[str] = None) -> Path:
    """Write one ``<id>.mo`` per mutant plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for m in mutants:
        (out / f"{m.id}.mo").write_text(m.source, encoding="utf-8")
    manifest = {"class": target, "mutants": [dict(m.describe(), file=f"{m.id}.mo") for m in mutants]}
    if subject is not None:
        (out / "original.mo").write_text(format_program(subject), encoding="utf-8")
        manifest["original"] = "original.mo"
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return out


@dataclass
class LoadedMutant:
    id: str
    operator: str
    program: A.Program
    info: dict


def load_mutants(directory: str | Path) -> tuple[list[LoadedMutant], Optional[A.Program], Optional[str]]:
    """Read a directory written by :func:`export_mutants`."""
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text(encoding="utf-8"))
    mutants = [
        LoadedMutant(e["id"], e["operator"], parse_program((d / e["file"]).read_text(encoding="utf-8")), e)
        for e in manifest["mutants"]
    ]
    original = None
    if manifest.get("original"):
        original = parse_program((d / manifest["original"]).read_text(encoding="utf-8"))
    return mutants, original, manifest.get("class")
