"""The base assertion grammar and its instantiation for a target class.

A grammar maps non-terminals (``<Name>``) to ordered alternatives; each
alternative is a tuple of symbols, either non-terminals or terminal text.
Terminal text may span several assertion tokens (``reach(this, next)``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .asserteval.syntax import tokenize
from .minilang import ast as A

START = "<FuzzedSpec>"
NUM_CMP_OPS = ("==", "!=", ">", "<", "<=", ">=")
NUM_BIN_OPS = ("+", "-", "*", "/", "%")
LOGIC_OPS = ("||", "xor", "==>", "<==>")
LITERAL_POOL = (-1, 0, 1)

# schema symbols of B that only become concrete once a class is known
HOLES = frozenset({"<Typed_Var>", "<NumVar>", "<NumConst>", "<BoolVar>", "<type_SetExpr>", "<type_Var>"})

_NT_RE = re.compile(r"^<[A-Za-z_][A-Za-z0-9_]*>$")

Alternative = tuple[str, ...]


def is_nonterminal(sym: str) -> bool:
    return bool(_NT_RE.match(sym))


class GrammarError(Exception):
    pass


class UnknownClass(GrammarError):
    pass


@dataclass(frozen=True)
class TypedTerminal:
    text: str
    type: str  # Int, Bool, a class name, or set<Class>
    provenance: str  # field-path, old, parameter, result, constant, literal, reach, quantified-variable


@dataclass
class Grammar:
    start: str
    productions: dict[str, list[Alternative]]
    terminals: dict[str, list[TypedTerminal]] = field(default_factory=dict)
    constants: dict[str, int] = field(default_factory=dict)  # class constant values

    def nonterminals(self) -> list[str]:
        return list(self.productions)

    def alternatives(self, nt: str) -> list[Alternative]:
        return self.productions[nt]

    def has_alternative(self, nt: str, alt: Iterable[str]) -> bool:
        return tuple(alt) in self.productions.get(nt, ())

    def typed_terminals(self) -> list[TypedTerminal]:
        return [t for ts in self.terminals.values() for t in ts]

    def to_json(self) -> dict:
        out: dict = {"start": self.start, "productions": {k: [list(a) for a in v] for k, v in self.productions.items()}}
        if self.terminals:
            out["terminals"] = {k: [[t.text, t.type, t.provenance] for t in v] for k, v in self.terminals.items()}
        if self.constants:
            out["constants"] = dict(self.constants)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Grammar":
        prods = {k: [tuple(a) for a in v] for k, v in d["productions"].items()}
        terms = {k: [TypedTerminal(*t) for t in v] for k, v in d.get("terminals", {}).items()}
        return cls(d["start"], prods, terms, dict(d.get("constants", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


# -- well-formedness --------------------------------------------------------


def undefined_symbols(g: Grammar, allow: frozenset = frozenset()) -> set[str]:
    return {s for alts in g.productions.values() for a in alts for s in a
            if is_nonterminal(s) and s not in g.productions and s not in allow}


def productive_symbols(g: Grammar) -> set[str]:
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for nt, alts in g.productions.items():
            if nt in productive:
                continue
            if any(all(not is_nonterminal(s) or s in productive for s in a) for a in alts):
                productive.add(nt)
                changed = True
    return productive


def reachable_symbols(g: Grammar) -> set[str]:
    seen = {g.start}
    stack = [g.start]
    while stack:
        nt = stack.pop()
        for a in g.productions.get(nt, ()):
            for s in a:
                if is_nonterminal(s) and s not in seen:
                    seen.add(s)
                    stack.append(s)
    return seen


def prune(g: Grammar) -> Grammar:
    """Drop alternatives using non-productive symbols, then unreachable symbols."""
    productive = productive_symbols(g)
    prods = {
        nt: [a for a in alts if all(not is_nonterminal(s) or s in productive for s in a)]
        for nt, alts in g.productions.items() if nt in productive
    }
    g2 = Grammar(g.start, prods, g.terminals)
    live = reachable_symbols(g2)
    return Grammar(g.start, {k: v for k, v in prods.items() if k in live},
                   {k: v for k, v in g.terminals.items() if k in live}, dict(g.constants))


def validate(g: Grammar) -> None:
    """Raise :class:`GrammarError` unless every symbol is defined, reachable and productive."""
    if g.start not in g.productions:
        raise GrammarError(f"start symbol {g.start} has no production")
    missing = undefined_symbols(g)
    if missing:
        raise GrammarError(f"undefined non-terminals: {sorted(missing)}")
    dead = set(g.productions) - productive_symbols(g)
    if dead:
        raise GrammarError(f"non-productive non-terminals: {sorted(dead)}")
    unreachable = set(g.productions) - reachable_symbols(g)
    if unreachable:
        raise GrammarError(f"unreachable non-terminals: {sorted(unreachable)}")


# -- base grammar -----------------------------------------------------------


def _alts(*xs: str) -> list[Alternative]:
    return [(x,) for x in xs]


def base_grammar() -> Grammar:
    """The class-independent grammar B. Schema symbols in :data:`HOLES` have
    no productions until a class instantiates them."""
    p: dict[str, list[Alternative]] = {
        START: [("<QuantifiedExpr>",), ("<BooleanExpr>",)],
        "<QuantifiedExpr>": [("<Quantifier>", "<Typed_Var>", ":", "<BooleanExpr>")],
        "<Quantifier>": _alts("all", "exists"),
        "<BooleanExpr>": [("<NumCmpExpr>",), ("<LogicCmpExpr>",), ("<MembershipExpr>",), ("!", "<BooleanExpr>")],
        "<NumCmpExpr>": [
            ("<NumExpr>", "<NumCmpOp>", "<NumExpr>"),
            ("<NumExpr>", "<NumCmpOp>", "<NumExpr>", "<NumBinOp>", "<NumExpr>"),
        ],
        "<NumExpr>": [("<NumVar>",), ("<NumConst>",)],
        "<LogicCmpExpr>": [
            ("<BooleanExpr>", "<LogicOp>", "<NumCmpExpr>"),
            ("(", "<BoolVar>", "<LogicOp>", "<BoolVar>", ")", "<LogicOp>", "<NumCmpExpr>"),
            ("(", "<NumCmpExpr>", ")", "<LogicOp>", "(", "<NumCmpExpr>", ")"),
        ],
        "<MembershipExpr>": [("<type_SetExpr>", ".has(", "<type_Var>", ")")],
        "<NumCmpOp>": _alts(*NUM_CMP_OPS),
        "<NumBinOp>": _alts(*NUM_BIN_OPS),
        "<LogicOp>": _alts(*LOGIC_OPS),
        # conjunction is only used to join a quantifier's range and body
        "<QLogicOp>": _alts("==>", "&&"),
    }
    return Grammar(START, p)


# -- extraction -------------------------------------------------------------


@dataclass
class _Terms:
    num: list[TypedTerminal] = field(default_factory=list)
    bool: list[TypedTerminal] = field(default_factory=list)
    refs: dict[str, list[TypedTerminal]] = field(default_factory=dict)

    def add(self, t: TypedTerminal) -> None:
        if t.type == "Int":
            bucket = self.num
        elif t.type == "Bool":
            bucket = self.bool
        else:
            bucket = self.refs.setdefault(t.type, [])
        if all(x.text != t.text for x in bucket):
            bucket.append(t)


def _navigations(program: A.Program, root: str, cls: str, depth: int) -> list[tuple[str, str, int]]:
    """(text, type, length) for ``root`` and every field path from it of
    length <= depth, breadth-first in declaration order."""
    out = [(root, cls, 0)]
    frontier = [(root, cls)]
    for length in range(1, depth + 1):
        nxt = []
        for text, ty in frontier:
            decl = program.cls(ty)
            for f in decl.fields:
                path = f"{text}.{f.name}"
                out.append((path, f.type, length))
                if f.type not in A.PRIMITIVES:
                    nxt.append((path, f.type))
        frontier = nxt
    return out


def _recursive_classes(program: A.Program, roots: Iterable[str]) -> list[str]:
    """Classes reachable from ``roots`` through field types that declare a
    recursive field, alphabetically."""
    seen: set[str] = set()
    stack = [r for r in roots if program.cls(r) is not None]
    while stack:
        c = stack.pop()
        if c in seen:
            continue
        seen.add(c)
        for f in program.cls(c).fields:
            if f.type not in A.PRIMITIVES:
                stack.append(f.type)
    return sorted(c for c in seen if program.cls(c).recursive_fields())


def _fresh_var(taken: set[str]) -> str:
    for name in ["l", "m", "n", "k"] + [f"l{i}" for i in range(1, 100)]:
        if name not in taken:
            return name
    raise GrammarError("no fresh variable name")  # pragma: no cover


def extract_grammar(program: A.Program, target: str, nav_depth: int = 2) -> Grammar:
    """Instantiate B for class ``target``.

    Typed terminals come from field navigations of length <= ``nav_depth``
    from ``this``, parameters and ``result``, ``old`` wrappings of the
    pre-state-readable ones, class constants and a small literal pool. Each
    class reachable from the target that has a recursive field gets set
    expressions ``reach(e, f)`` and quantified expressions over its objects.
    """
    if nav_depth < 1:
        raise GrammarError("nav_depth must be positive")
    decl = program.cls(target)
    if decl is None:
        raise UnknownClass(target)

    methods = decl.public_methods()
    instance = any(not m.static for m in methods)
    terms = _Terms()
    # class-typed navigations usable as reach() starts
    starts: dict[str, list[str]] = {}

    def add_root(root: str, ty: str, provenance: str, pre_readable: bool) -> None:
        if ty in A.PRIMITIVES:
            terms.add(TypedTerminal(root, ty, provenance))
            return
        for text, t, length in _navigations(program, root, ty, nav_depth):
            prov = provenance if length == 0 else "field-path"
            terms.add(TypedTerminal(text, t, prov))
            if pre_readable and length > 0:
                terms.add(TypedTerminal(f"old({text})", t, "old"))
            if t not in A.PRIMITIVES and length < nav_depth:
                starts.setdefault(t, []).append(text)

    if instance and decl.fields:
        add_root("this", target, "field-path", True)
    elif instance:
        terms.add(TypedTerminal("this", target, "field-path"))
    for m in methods:
        for p in m.params:
            add_root(p.name, p.type, "parameter", True)
    for m in methods:
        if m.ret != "Void":
            add_root("result", m.ret, "result", False)

    consts = [TypedTerminal(str(v), "Int", "literal") for v in LITERAL_POOL]
    consts += [TypedTerminal(k.name, "Int", "constant") for k in decl.consts]

    g = base_grammar()
    p = g.productions
    p.pop("<Quantifier>")
    p.pop("<QLogicOp>")
    terminals: dict[str, list[TypedTerminal]] = {"<NumVar>": terms.num, "<NumConst>": consts, "<BoolVar>": terms.bool}
    p["<NumVar>"] = [(t.text,) for t in terms.num]
    p["<NumConst>"] = [(t.text,) for t in consts]
    p["<BoolVar>"] = [(t.text,) for t in terms.bool]
    p["<BooleanExpr>"] = [("<NumCmpExpr>",), ("<LogicCmpExpr>",), ("<MembershipExpr>",), ("<RefCmpExpr>",),
                          ("!", "(", "<BooleanExpr>", ")")]
    p["<MembershipExpr>"] = []
    p["<RefCmpExpr>"] = []
    p["<RefCmpOp>"] = _alts("==", "!=")
    p["<QuantifiedExpr>"] = []

    for cls, refs in sorted(terms.refs.items()):
        var_nt, ref_nt = f"<{cls}_Var>", f"<{cls}_RefExpr>"
        p[var_nt] = [(t.text,) for t in refs]
        p[ref_nt] = [(var_nt,), ("null",)]
        terminals[var_nt] = refs
        p["<RefCmpExpr>"].append((var_nt, "<RefCmpOp>", ref_nt))

    taken = {f.name for c in program.classes for f in c.fields} | {k.name for k in decl.consts}
    taken |= {p_.name for m in methods for p_ in m.params} | {c.name for c in program.classes}
    taken |= {"this", "result"}

    for cls in _recursive_classes(program, [target] + [p_.type for m in methods for p_ in m.params]):
        cdecl = program.cls(cls)
        rec = cdecl.recursive_fields()
        field_sets = [(f,) for f in rec] + ([tuple(rec)] if len(rec) > 1 else [])
        var = _fresh_var(taken)
        set_nt = f"<{cls}_SetExpr>"
        sets = [
            TypedTerminal(f"reach({s}, {', '.join(fs)})", f"set<{cls}>", "reach")
            for s in starts.get(cls, []) for fs in field_sets
        ]
        p[set_nt] = [(t.text,) for t in sets]
        terminals[set_nt] = sets
        if f"<{cls}_Var>" in p:
            p["<MembershipExpr>"].append((set_nt, ".has(", f"<{cls}_Var>", ")"))

        qnum = [TypedTerminal(text, "Int", "quantified-variable")
                for text, ty, length in _navigations(program, var, cls, nav_depth) if ty == "Int"]
        typed_nt, range_nt, qvar_nt = f"<{cls}_TypedVar>", f"<{cls}_Range>", f"<{cls}_QVar>"
        body_nt, qnum_nt, qexpr_nt = f"<{cls}_QBody>", f"<{cls}_QNumVar>", f"<{cls}_QNumExpr>"
        p[typed_nt] = [(f"{cls} {var}",)]
        p[qvar_nt] = [(var,)]
        p[range_nt] = [(set_nt, ".has(", qvar_nt, ")")]
        p[body_nt] = [(qnum_nt, "<NumCmpOp>", qexpr_nt)]
        p[qnum_nt] = [(t.text,) for t in qnum]
        p[qexpr_nt] = [(qnum_nt,), ("<NumVar>",), ("<NumConst>",)]
        terminals[typed_nt] = [TypedTerminal(var, cls, "quantified-variable")]
        terminals[qnum_nt] = qnum
        # the range is joined by implication under all and conjunction under exists
        p["<QuantifiedExpr>"] += [
            ("all", typed_nt, ":", range_nt, "==>", body_nt),
            ("exists", typed_nt, ":", range_nt, "&&", body_nt),
        ]

    return prune(Grammar(START, p, terminals, {k.name: k.value for k in decl.consts}))


# -- recognition ------------------------------------------------------------


def _token_texts(text: str) -> tuple[str, ...]:
    return tuple(t.text for t in tokenize(text) if t.kind != "eof")


class Recognizer:
    """Earley recognizer for L(grammar) over assertion tokens."""

    def __init__(self, g: Grammar):
        self.start = g.start
        rules: dict[str, list[tuple[str, ...]]] = {}
        for nt, alts in g.productions.items():
            rules[nt] = []
            for a in alts:
                syms: list[str] = []
                for s in a:
                    syms.extend([s] if is_nonterminal(s) else _token_texts(s))
                rules[nt].append(tuple(syms))
        self.rules = rules

    def accepts(self, text: str) -> bool:
        toks = _token_texts(text)
        n = len(toks)
        chart: list[set] = [set() for _ in range(n + 1)]
        top = "<$>"
        rules = dict(self.rules)
        rules[top] = [(self.start,)]
        chart[0].add((top, 0, 0, 0))
        for i in range(n + 1):
            agenda = list(chart[i])
            while agenda:
                nt, alt, dot, origin = agenda.pop()
                rhs = rules[nt][alt]
                if dot < len(rhs):
                    sym = rhs[dot]
                    if is_nonterminal(sym):
                        for k in range(len(rules.get(sym, ()))):
                            item = (sym, k, 0, i)
                            if item not in chart[i]:
                                chart[i].add(item)
                                agenda.append(item)
                        # nullable completion is not needed: no empty alternatives
                    elif i < n and toks[i] == sym:
                        chart[i + 1].add((nt, alt, dot + 1, origin))
                else:
                    for pnt, palt, pdot, porigin in list(chart[origin]):
                        prhs = rules[pnt][palt]
                        if pdot < len(prhs) and prhs[pdot] == nt:
                            item = (pnt, palt, pdot + 1, porigin)
                            if item not in chart[i]:
                                chart[i].add(item)
                                agenda.append(item)
        return (top, 0, 1, 0) in chart[n]


def load_grammar(path: str) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return Grammar.from_json(json.load(fh))


def summary(g: Grammar, limit: Optional[int] = None) -> str:
    """Human-readable BNF listing."""
    lines = []
    for nt, alts in g.productions.items():
        shown = alts if limit is None else alts[:limit]
        rhs = " | ".join(" ".join(s if is_nonterminal(s) else repr(s) for s in a) for a in shown)
        if limit is not None and len(alts) > limit:
            rhs += f" | ... ({len(alts) - limit} more)"
        lines.append(f"{nt} ::= {rhs}")
    return "\n".join(lines)
