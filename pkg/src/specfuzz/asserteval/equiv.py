"""Bounded-exhaustive equivalence and entailment between assertions.

A domain enumerates synthetic execution records: every integer input in a
range, or every list-shaped heap up to a node bound. Two assertions are
equivalent on a domain iff they hold on exactly the same records, with
Error counted as not holding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from ..minilang.interp import Ref
from ..statecap import ExecutionRecord, SnapObject, Snapshot
from .evaluator import CompiledAssertion
from .syntax import Expr, uses_old

DEFAULT_CAP = 5_000_000


class DomainTooLarge(Exception):
    pass


@dataclass(frozen=True)
class Equivalent:
    checked: int

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Counterexample:
    record: ExecutionRecord
    left: bool
    right: bool

    def __bool__(self) -> bool:
        return False


class IntDomain:
    """Every combination of integer parameters (and optionally ``result``)
    for a static method."""

    def __init__(self, cls: str, method: str, params: dict[str, Sequence[int]],
                 result: Optional[Sequence[int]] = None, constants: Optional[dict[str, int]] = None):
        self.cls = cls
        self.method = method
        self.params = {k: list(v) for k, v in params.items()}
        self.result = None if result is None else list(result)
        self.constants = dict(constants or {})

    def __len__(self) -> int:
        n = 1
        for v in self.params.values():
            n *= len(v)
        return n * (len(self.result) if self.result is not None else 1)

    @property
    def shape(self) -> tuple[frozenset, frozenset]:
        roots = set(self.params)
        if self.result is not None:
            roots.add("result")
        return frozenset(roots), frozenset(self.constants)

    def __iter__(self) -> Iterator[ExecutionRecord]:
        names = list(self.params)
        results = self.result if self.result is not None else [None]
        returns = self.result is not None
        for combo in itertools.product(*(self.params[n] for n in names)):
            args = dict(zip(names, combo))
            pre = Snapshot(args, {}, self.constants)
            for r in results:
                post_roots = dict(args)
                if returns:
                    post_roots["result"] = r
                yield ExecutionRecord(self.cls, self.method, pre, args, Snapshot(post_roots, {}, self.constants),
                                      r, returns)


def _list_shapes(max_nodes: int, values: Sequence[int], cyclic: bool, first_oid: int = 1,
                 min_nodes: int = 1) -> Iterator[list[tuple[int, Optional[int]]]]:
    """Singly linked chains as [(value, next_oid|None)] indexed from ``first_oid``."""
    for k in range(min_nodes, max_nodes + 1):
        tails: list[Optional[int]] = [None]
        if cyclic:
            tails += [first_oid + j for j in range(k)]
        for vals in itertools.product(values, repeat=k):
            for tail in tails:
                yield [(vals[i], first_oid + i + 1 if i + 1 < k else tail) for i in range(k)]


def _count_shapes(max_nodes: int, n_values: int, cyclic: bool, min_nodes: int = 1) -> int:
    return sum(n_values ** k * ((k + 1) if cyclic else 1) for k in range(min_nodes, max_nodes + 1))


class ListDomain:
    """Receivers that are linked chains of one class with an Int field and a
    recursive field, paired with every combination of parameter values.

    With ``pre_max_nodes`` unset the pre-state equals the post-state;
    otherwise every pre-state chain up to that size is combined with every
    post-state chain, sharing object identities by position.
    """

    def __init__(self, cls: str, method: str, elem_field: str, next_field: str, max_nodes: int,
                 values: Sequence[int], params: Optional[dict[str, Sequence[int]]] = None,
                 cyclic: bool = True, pre_max_nodes: Optional[int] = None,
                 constants: Optional[dict[str, int]] = None):
        self.cls = cls
        self.method = method
        self.elem_field = elem_field
        self.next_field = next_field
        self.max_nodes = max_nodes
        self.values = list(values)
        self.params = {k: list(v) for k, v in (params or {}).items()}
        self.cyclic = cyclic
        self.pre_max_nodes = pre_max_nodes
        self.constants = dict(constants or {})

    def __len__(self) -> int:
        n = _count_shapes(self.max_nodes, len(self.values), self.cyclic)
        if self.pre_max_nodes is not None:
            n *= _count_shapes(self.pre_max_nodes, len(self.values), self.cyclic)
        for v in self.params.values():
            n *= len(v)
        return n

    @property
    def shape(self) -> tuple[frozenset, frozenset]:
        return frozenset({"this", *self.params}), frozenset(self.constants)

    def _objects(self, chain: list[tuple[int, Optional[int]]]) -> dict[int, SnapObject]:
        e, f = self.elem_field, self.next_field
        return {i + 1: SnapObject(self.cls, {e: v, f: None if nxt is None else Ref(nxt)})
                for i, (v, nxt) in enumerate(chain)}

    def __iter__(self) -> Iterator[ExecutionRecord]:
        names = list(self.params)
        combos = [dict(zip(names, c)) for c in itertools.product(*(self.params[n] for n in names))]
        this = Ref(1)
        for post_chain in _list_shapes(self.max_nodes, self.values, self.cyclic):
            post_objs = self._objects(post_chain)
            if self.pre_max_nodes is None:
                pres = [post_objs]
            else:
                pres = [self._objects(c) for c in _list_shapes(self.pre_max_nodes, self.values, self.cyclic)]
            for pre_objs in pres:
                for args in combos:
                    roots = {"this": this, **args}
                    pre = Snapshot(roots, pre_objs, self.constants)
                    post = pre if pre_objs is post_objs else Snapshot(dict(roots), post_objs, self.constants)
                    yield ExecutionRecord(self.cls, self.method, pre, args, post, None, False)


def _check_size(domain, cap: int) -> None:
    size = len(domain)
    if size > cap:
        raise DomainTooLarge(f"domain has {size} records, cap is {cap}")


def bounded_equiv(a: Expr, b: Expr, domain, cap: int = DEFAULT_CAP):
    """:class:`Equivalent` if ``a`` and ``b`` agree on every record of
    ``domain``, else the first :class:`Counterexample`."""
    _check_size(domain, cap)
    fa = CompiledAssertion(a, domain.shape)
    fb = CompiledAssertion(b, domain.shape)
    n = 0
    for rec in domain:
        n += 1
        x, y = fa.holds(rec), fb.holds(rec)
        if x != y:
            return Counterexample(rec, x, y)
    return Equivalent(n)


def entails(premises: Sequence[Expr], conclusions: Sequence[Expr], domain,
            cap: int = DEFAULT_CAP) -> list[Optional[ExecutionRecord]]:
    """For each conclusion, None if it holds on every record where all
    premises hold, else a counterexample record."""
    _check_size(domain, cap)
    ps = [CompiledAssertion(p, domain.shape) for p in premises]
    cs = [CompiledAssertion(c, domain.shape) for c in conclusions]
    refuted: list[Optional[ExecutionRecord]] = [None] * len(cs)
    open_ = list(range(len(cs)))
    for rec in domain:
        if not open_:
            break
        if all(p.holds(rec) for p in ps):
            for i in list(open_):
                if not cs[i].holds(rec):
                    refuted[i] = rec
                    open_.remove(i)
    return refuted


def needs_pre_variation(*assertions: Expr) -> bool:
    """Pre-states only matter for assertions that read them."""
    return any(uses_old(a) for a in assertions)
