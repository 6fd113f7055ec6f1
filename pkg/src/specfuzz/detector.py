"""Dynamic invariant detection over recorded executions.

A candidate survives when it evaluates True on every record of the target
method. Records that differ only in object identities are evaluated once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .asserteval.evaluator import CompiledAssertion, record_shape
from .asserteval.syntax import AssertionSyntaxError, Expr, parse_assertion
from .asserteval.typecheck import AssertionTypeError, check_assertion, context_for
from .minilang import ast as A
from .minilang.interp import DEFAULT_BUDGET
from .statecap import ORIGINAL, ExecutionRecord, record_key, trace_case
from .testgen import TestSuite


class NoRecordsForMethod(Exception):
    pass


@dataclass
class Survivor:
    text: str
    assertion: Expr
    records: int  # records evaluated, counting identity-equivalent repeats
    true: int


@dataclass
class Rejection:
    text: str
    witness: str  # record id
    outcome: str


@dataclass
class LikelyInvariantSet:
    cls: str
    method: str
    survivors: list[Survivor]
    rejected: list[Rejection]
    dropped: dict[str, list[str]]  # reason -> candidate texts
    records: list[ExecutionRecord]
    unique_records: int
    failed_cases: int = 0

    def texts(self) -> list[str]:
        return [s.text for s in self.survivors]

    def to_json(self, **extra) -> dict:
        out = dict(extra)
        out.update({
            "class": self.cls,
            "method": self.method,
            "records": len(self.records),
            "unique_records": self.unique_records,
            "survivors": [{"assertion": s.text, "records": s.records, "true": s.true} for s in self.survivors],
            "rejected": len(self.rejected),
            "dropped": {k: len(v) for k, v in sorted(self.dropped.items())},
        })
        return out


def collect_records(program: A.Program, suite: TestSuite, method: str, step_budget: int = DEFAULT_BUDGET,
                    mutant: str = ORIGINAL) -> tuple[list[ExecutionRecord], int]:
    """Records of ``method`` over the whole suite, plus the number of cases
    that stopped on a run failure."""
    records: list[ExecutionRecord] = []
    failed = 0
    for i, case in enumerate(suite.cases):
        recs, failure = trace_case(program, suite.cls, case.ctor_args, case.call_pairs(), (method,),
                                   step_budget, test=i, mutant=mutant)
        records.extend(recs)
        failed += failure is not None
    return records, failed


def dedupe(records: Iterable[ExecutionRecord]) -> tuple[list[ExecutionRecord], list[int]]:
    """Identity-distinct records with their multiplicities, first occurrence order."""
    index: dict[tuple, int] = {}
    unique: list[ExecutionRecord] = []
    counts: list[int] = []
    for r in records:
        k = record_key(r)
        i = index.get(k)
        if i is None:
            index[k] = len(unique)
            unique.append(r)
            counts.append(1)
        else:
            counts[i] += 1
    return unique, counts


def parse_candidates(program: A.Program, cls: str, method: str, texts: Iterable[str]
                     ) -> tuple[list[tuple[str, Expr]], dict[str, list[str]]]:
    """Parse and type-check candidates for ``cls.method``; returns the
    accepted (text, ast) pairs and the dropped texts by reason."""
    ctx = context_for(program, cls, method)
    ok: list[tuple[str, Expr]] = []
    dropped: dict[str, list[str]] = {}
    seen: set[str] = set()
    for text in texts:
        if text in seen:
            continue
        seen.add(text)
        try:
            a = parse_assertion(text)
            check_assertion(a, ctx)
        except AssertionSyntaxError:
            dropped.setdefault("SyntaxError", []).append(text)
            continue
        except AssertionTypeError as e:
            reason = "UnknownSymbol" if e.kind == "UnknownSymbol" else "TypeError"
            dropped.setdefault(reason, []).append(text)
            continue
        ok.append((text, a))
    return ok, dropped


def detect(program: A.Program, suite: TestSuite, candidates: Sequence[str], method: str,
           step_budget: int = DEFAULT_BUDGET, records: Optional[list[ExecutionRecord]] = None
           ) -> LikelyInvariantSet:
    """Filter ``candidates`` down to those holding on every record of ``method``."""
    cls = suite.cls
    failed = 0
    if records is None:
        records, failed = collect_records(program, suite, method, step_budget)
    if not records:
        raise NoRecordsForMethod(f"{cls}.{method}")
    unique, counts = dedupe(records)
    total = sum(counts)
    shape = record_shape(unique[0])
    parsed, dropped = parse_candidates(program, cls, method, candidates)

    survivors: list[Survivor] = []
    rejected: list[Rejection] = []
    # records that falsified something recently are tried first
    order = list(range(len(unique)))
    for text, a in parsed:
        f = CompiledAssertion(a, shape)
        bad = None
        for pos, i in enumerate(order):
            if not f.holds(unique[i]):
                bad = i
                if pos:
                    order.insert(0, order.pop(pos))
                break
        if bad is None:
            survivors.append(Survivor(text, a, total, total))
        else:
            rejected.append(Rejection(text, unique[bad].rid, str(f.outcome(unique[bad]))))
    return LikelyInvariantSet(cls, method, survivors, rejected, dropped, records, len(unique), failed)


def load_survivors(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
