"""MiniObj abstract syntax.

Nodes are plain mutable dataclasses so the checker can annotate name
resolution in place; after loading, a Program is treated as read-only.
Every node carries ``nid``, assigned in pre-order by :func:`number_nodes`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union

PRIMITIVES = ("Int", "Bool")
RETURN_PRIMITIVES = ("Int", "Bool", "Void")

RELATIONAL_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITHMETIC_OPS = ("+", "-", "*", "/", "%")
LOGICAL_OPS = ("&&", "||")


@dataclass(eq=False)
class Node:
    nid: int = field(default=-1, init=False, compare=False)
    line: int = field(default=0, init=False, compare=False, repr=False)
    col: int = field(default=0, init=False, compare=False, repr=False)
    static_type: str = field(default="", init=False, compare=False, repr=False)  # set on expressions by the checker


# -- expressions ------------------------------------------------------------


@dataclass(eq=False)
class IntLit(Node):
    value: int


@dataclass(eq=False)
class BoolLit(Node):
    value: bool


@dataclass(eq=False)
class NullLit(Node):
    pass


@dataclass(eq=False)
class This(Node):
    pass


@dataclass(eq=False)
class Name(Node):
    name: str
    # set by the checker: "local", "field", "const" or "class"
    kind: str = field(default="", compare=False, repr=False)


@dataclass(eq=False)
class FieldAccess(Node):
    obj: "Expr"
    name: str


@dataclass(eq=False)
class Call(Node):
    obj: Optional["Expr"]
    method: str
    args: list["Expr"]
    # set by the checker: owning class and whether the call is static
    target_class: str = field(default="", compare=False, repr=False)
    static: bool = field(default=False, compare=False, repr=False)


@dataclass(eq=False)
class New(Node):
    cls: str
    args: list["Expr"]


@dataclass(eq=False)
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass(eq=False)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"
    # set by the checker: static type of the operands ("Int", "Bool", "ref")
    operand_type: str = field(default="", compare=False, repr=False)


Expr = Union[IntLit, BoolLit, NullLit, This, Name, FieldAccess, Call, New, Unary, Binary]


# -- statements -------------------------------------------------------------


@dataclass(eq=False)
class Block(Node):
    stmts: list["Stmt"]


@dataclass(eq=False)
class VarDecl(Node):
    name: str
    type: str
    init: Expr


@dataclass(eq=False)
class Assign(Node):
    target: Expr  # Name or FieldAccess
    value: Expr


@dataclass(eq=False)
class If(Node):
    cond: Expr
    then: Block
    orelse: Optional[Union[Block, "If"]] = None


@dataclass(eq=False)
class While(Node):
    cond: Expr
    body: Block


@dataclass(eq=False)
class Return(Node):
    value: Optional[Expr] = None


@dataclass(eq=False)
class ExprStmt(Node):
    expr: Expr


Stmt = Union[VarDecl, Assign, If, While, Return, ExprStmt, Block]


# -- declarations -----------------------------------------------------------


@dataclass(eq=False)
class Param(Node):
    name: str
    type: str


@dataclass(eq=False)
class FieldDecl(Node):
    name: str
    type: str


@dataclass(eq=False)
class ConstDecl(Node):
    name: str
    value: int


@dataclass(eq=False)
class Constructor(Node):
    params: list[Param]
    body: Block
    private: bool = False
    implicit: bool = field(default=False, compare=False)


@dataclass(eq=False)
class Method(Node):
    name: str
    params: list[Param]
    ret: str
    body: Block
    private: bool = False
    static: bool = False


@dataclass(eq=False)
class ClassDecl(Node):
    name: str
    fields: list[FieldDecl]
    consts: list[ConstDecl]
    ctors: list[Constructor]
    methods: list[Method]

    def field_type(self, name: str) -> Optional[str]:
        for f in self.fields:
            if f.name == name:
                return f.type
        return None

    def method(self, name: str) -> Optional[Method]:
        for m in self.methods:
            if m.name == name:
                return m
        return None

    def ctor(self, arity: int) -> Optional[Constructor]:
        for c in self.ctors:
            if len(c.params) == arity:
                return c
        return None

    def public_ctors(self) -> list[Constructor]:
        return [c for c in self.ctors if not c.private]

    def public_methods(self) -> list[Method]:
        return [m for m in self.methods if not m.private]

    def recursive_fields(self) -> list[str]:
        return [f.name for f in self.fields if f.type == self.name]


@dataclass(eq=False)
class Program(Node):
    classes: list[ClassDecl]

    def __post_init__(self) -> None:
        self._index = {c.name: c for c in self.classes}

    def cls(self, name: str) -> Optional[ClassDecl]:
        return self._index.get(name)

    def constants(self) -> dict[str, int]:
        env: dict[str, int] = {}
        for c in self.classes:
            for k in c.consts:
                env[k.name] = k.value
        return env


# -- traversal --------------------------------------------------------------


def children(node: Node) -> Iterator[Node]:
    """Yield direct child nodes in source order."""
    for f in fields(node):
        if not f.init:
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, list):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def number_nodes(program: Program) -> None:
    for i, n in enumerate(walk(program)):
        n.nid = i


def find_node(root: Node, nid: int) -> Optional[Node]:
    for n in walk(root):
        if n.nid == nid:
            return n
    return None


def replace_node(root: Node, nid: int, new: Node) -> bool:
    """Replace the node with id ``nid`` below ``root`` in place."""
    for parent in walk(root):
        for f in fields(parent):
            if not f.init:
                continue
            value = getattr(parent, f.name)
            if isinstance(value, Node) and value.nid == nid:
                setattr(parent, f.name, new)
                return True
            if isinstance(value, list):
                for i, item in enumerate(value):
                    if isinstance(item, Node) and item.nid == nid:
                        value[i] = new
                        return True
    return False


def remove_stmt(root: Node, nid: int) -> bool:
    """Delete the statement with id ``nid`` from its enclosing block."""
    for n in walk(root):
        if isinstance(n, Block):
            for i, s in enumerate(n.stmts):
                if s.nid == nid:
                    del n.stmts[i]
                    return True
    return False
