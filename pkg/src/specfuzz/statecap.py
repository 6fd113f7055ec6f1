"""Pre/post state capture around method calls, and heap navigation.

A :class:`Snapshot` is a frozen copy of the objects reachable from a call's
root bindings. Pre and post snapshots of one call share object identities,
which is what lets ``old(...)`` correlate objects across the call.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Optional, Sequence

from .minilang import ast as A
from .minilang.errors import RunFailure
from .minilang.interp import DEFAULT_BUDGET, Heap, Interpreter, Ref, Value

ORIGINAL = "original"


class PathError(Exception):
    """Navigation failure; ``kind`` is NullOnPath, UnknownField or UnknownRoot."""

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}")


@dataclass(frozen=True)
class SnapObject:
    cls: str
    fields: dict[str, Value]


class Snapshot:
    """Closed, read-only object graph plus root bindings."""

    __slots__ = ("roots", "objects", "constants", "_by_class", "_reach")

    def __init__(self, roots: dict[str, Value], objects: dict[int, SnapObject],
                 constants: Optional[dict[str, int]] = None):
        self.roots = roots
        self.objects = objects
        self.constants = constants if constants is not None else {}
        self._by_class: Optional[dict[str, tuple[Ref, ...]]] = None
        self._reach: dict[tuple, frozenset] = {}

    def __repr__(self) -> str:
        return f"Snapshot(roots={self.roots!r}, objects={len(self.objects)})"

    def instances(self, cls: str) -> tuple[Ref, ...]:
        """Objects of class ``cls`` in the graph, in identity order."""
        if self._by_class is None:
            groups: dict[str, list[Ref]] = {}
            for oid in sorted(self.objects):
                groups.setdefault(self.objects[oid].cls, []).append(Ref(oid))
            self._by_class = {k: tuple(v) for k, v in groups.items()}
        return self._by_class.get(cls, ())

    def get(self, ref: Ref) -> SnapObject:
        return self.objects[ref.oid]


def capture(heap: Heap, roots: dict[str, Value], constants: dict[str, int]) -> Snapshot:
    """Deep-copy the subgraph of ``heap`` reachable from ``roots``."""
    objects: dict[int, SnapObject] = {}
    queue = deque(v.oid for v in roots.values() if isinstance(v, Ref))
    while queue:
        oid = queue.popleft()
        if oid in objects:
            continue
        obj = heap.objects[oid]
        objects[oid] = SnapObject(obj.cls, dict(obj.fields))
        for v in obj.fields.values():
            if isinstance(v, Ref) and v.oid not in objects:
                queue.append(v.oid)
    return Snapshot(dict(roots), objects, constants)


@dataclass(frozen=True, eq=False)
class ExecutionRecord:
    cls: str
    method: str
    pre: Snapshot
    args: dict[str, Value]
    post: Snapshot
    result: Value = None
    returns: bool = False  # False for Void methods
    test: int = 0
    call: int = 0
    mutant: str = ORIGINAL

    @property
    def rid(self) -> str:
        return f"t{self.test}.c{self.call}"


# -- navigation -------------------------------------------------------------


def reach(snapshot: Snapshot, start: Value, fields: Sequence[str]) -> frozenset:
    """Smallest set containing ``start`` (if non-null) and closed under ``fields``."""
    if start is None:
        return frozenset()
    key = (start.oid, tuple(fields))
    hit = snapshot._reach.get(key)
    if hit is not None:
        return hit
    seen = {start}
    queue = [start]
    objects = snapshot.objects
    while queue:
        ref = queue.pop()
        obj = objects[ref.oid]
        for f in fields:
            try:
                nxt = obj.fields[f]
            except KeyError:
                raise PathError("UnknownField", f"{obj.cls} has no field {f!r}") from None
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    out = frozenset(seen)
    snapshot._reach[key] = out
    return out


def resolve_path(snapshot: Snapshot, root: str, path: Sequence[str] = ()) -> Value:
    if root not in snapshot.roots:
        raise PathError("UnknownRoot", root)
    v = snapshot.roots[root]
    walked = root
    for f in path:
        if v is None:
            raise PathError("NullOnPath", walked)
        obj = snapshot.objects[v.oid]
        if f not in obj.fields:
            raise PathError("UnknownField", f"{obj.cls} has no field {f!r}")
        v = obj.fields[f]
        walked += "." + f
    return v


# -- execution --------------------------------------------------------------


def materialize(interp: Interpreter, arg: Any) -> Value:
    """Turn a test-case argument description into a runtime value.

    Ints, bools and None stand for themselves; ``{"new": C, "args": [...]}``
    constructs a fresh object.
    """
    if isinstance(arg, dict):
        args = [materialize(interp, a) for a in arg.get("args", [])]
        interp.steps = 0
        return interp.construct(arg["new"], args)
    return arg


def trace_case(program: A.Program, cls: str, ctor_args: Sequence[Any], calls: Sequence[tuple[str, Sequence[Any]]],
               methods: Optional[Iterable[str]] = None, step_budget: int = DEFAULT_BUDGET,
               test: int = 0, mutant: str = ORIGINAL) -> tuple[list[ExecutionRecord], Optional[RunFailure]]:
    """Run one test case and record every call to a method in ``methods``.

    Returns the records of the completed calls and the failure that stopped
    the case, if any. A call that fails produces no record.
    """
    wanted = None if methods is None else set(methods)
    heap = Heap()
    interp = Interpreter(program, heap, step_budget)
    decl = program.cls(cls)
    constants = {k.name: k.value for k in decl.consts}
    records: list[ExecutionRecord] = []
    try:
        args = [materialize(interp, a) for a in ctor_args]
        interp.steps = 0
        receiver = interp.construct(cls, args)
        for index, (name, raw_args) in enumerate(calls):
            m = decl.method(name)
            values = [materialize(interp, a) for a in raw_args]
            bound = {p.name: v for p, v in zip(m.params, values)}
            record_it = wanted is None or name in wanted
            roots: dict[str, Value] = {} if m.static else {"this": receiver}
            roots.update(bound)
            pre = capture(heap, roots, constants) if record_it else None
            interp.steps = 0
            result = interp.call(cls, name, None if m.static else receiver, values)
            if record_it:
                post_roots = dict(roots)
                returns = m.ret != "Void"
                if returns:
                    post_roots["result"] = result
                post = capture(heap, post_roots, constants)
                records.append(ExecutionRecord(cls, name, pre, bound, post, result, returns, test, index, mutant))
    except RunFailure as failure:
        return records, failure
    return records, None


def record_execution(program: A.Program, cls: str, ctor_args: Sequence[Any],
                     prefix: Sequence[tuple[str, Sequence[Any]]], final: tuple[str, Sequence[Any]],
                     step_budget: int = DEFAULT_BUDGET) -> ExecutionRecord:
    """Build the receiver with ``ctor_args`` and ``prefix``, then record ``final``.

    Raises :class:`RunFailure` if any step of the sequence fails.
    """
    calls = list(prefix) + [final]
    records, failure = trace_case(program, cls, ctor_args, calls, None, step_budget)
    if failure is not None:
        raise failure
    return records[-1]


# -- canonical identity -----------------------------------------------------


def _canon_value(v: Value, ids: dict[int, int]) -> Any:
    if isinstance(v, Ref):
        return ("r", ids[v.oid])
    return v if v is None else (type(v).__name__[0], v)


def _number(snap: Snapshot, ids: dict[int, int]) -> None:
    queue = deque(v.oid for _, v in sorted(snap.roots.items()) if isinstance(v, Ref))
    visited: set[int] = set()
    while queue:
        oid = queue.popleft()
        if oid in visited:
            continue
        visited.add(oid)
        if oid not in ids:
            ids[oid] = len(ids)
        obj = snap.objects[oid]
        for _, v in sorted(obj.fields.items()):
            if isinstance(v, Ref) and v.oid not in visited:
                queue.append(v.oid)


def _canon_snapshot(snap: Snapshot, ids: dict[int, int]) -> tuple:
    roots = tuple((k, _canon_value(v, ids)) for k, v in sorted(snap.roots.items()))
    objs = tuple(sorted(
        (ids[oid], o.cls, tuple((k, _canon_value(v, ids)) for k, v in sorted(o.fields.items())))
        for oid, o in snap.objects.items()
    ))
    return roots, objs


def record_key(rec: ExecutionRecord) -> tuple:
    """Hashable key equal for records that differ only by object identities.

    Assertion outcomes are invariant under identity renaming, so records with
    equal keys evaluate identically.
    """
    ids: dict[int, int] = {}
    _number(rec.pre, ids)
    _number(rec.post, ids)
    return (
        rec.cls, rec.method,
        _canon_snapshot(rec.pre, ids), _canon_snapshot(rec.post, ids),
        tuple((k, _canon_value(v, ids)) for k, v in sorted(rec.args.items())),
        rec.returns, _canon_value(rec.result, ids) if rec.returns else None,
    )


# -- serialization ----------------------------------------------------------


def value_to_json(v: Value) -> Any:
    return {"ref": v.oid} if isinstance(v, Ref) else v


def value_from_json(v: Any) -> Value:
    return Ref(v["ref"]) if isinstance(v, dict) else v


def snapshot_to_json(s: Snapshot) -> dict:
    return {
        "roots": {k: value_to_json(v) for k, v in s.roots.items()},
        "objects": {
            str(oid): {"class": o.cls, "fields": {k: value_to_json(v) for k, v in o.fields.items()}}
            for oid, o in sorted(s.objects.items())
        },
        "constants": dict(s.constants),
    }


def snapshot_from_json(d: dict) -> Snapshot:
    objects = {
        int(oid): SnapObject(o["class"], {k: value_from_json(v) for k, v in o["fields"].items()})
        for oid, o in d["objects"].items()
    }
    return Snapshot({k: value_from_json(v) for k, v in d["roots"].items()}, objects, dict(d.get("constants", {})))


def record_to_json(r: ExecutionRecord) -> dict:
    out = {
        "class": r.cls,
        "method": r.method,
        "test": r.test,
        "call": r.call,
        "mutant": r.mutant,
        "args": {k: value_to_json(v) for k, v in r.args.items()},
        "pre": snapshot_to_json(r.pre),
        "post": snapshot_to_json(r.post),
    }
    if r.returns:
        out["result"] = value_to_json(r.result)
    return out


def record_from_json(d: dict) -> ExecutionRecord:
    returns = "result" in d
    return ExecutionRecord(
        d["class"], d["method"], snapshot_from_json(d["pre"]),
        {k: value_from_json(v) for k, v in d["args"].items()},
        snapshot_from_json(d["post"]),
        value_from_json(d["result"]) if returns else None, returns,
        d.get("test", 0), d.get("call", 0), d.get("mutant", ORIGINAL),
    )


def dump_records(records: Iterable[ExecutionRecord]) -> str:
    return "".join(json.dumps(record_to_json(r), sort_keys=True, separators=(",", ":")) + "\n" for r in records)


def load_records(text: str) -> Iterator[ExecutionRecord]:
    for line in text.splitlines():
        if line.strip():
            yield record_from_json(json.loads(line))
