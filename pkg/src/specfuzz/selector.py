"""Mutation-based selection of likely invariants.

The suite is replayed on every mutant and each surviving assertion is
evaluated on the mutant's records. An assertion kills a mutant when it is
falsified (False or Error) on at least one of that mutant's records.
Assertions that kill nothing are discarded as weak; the rest are grouped
by kill vector and ranked by how often they fail.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .asserteval.evaluator import CompiledAssertion, record_shape
from .asserteval.syntax import parse_assertion
from .detector import collect_records
from .minilang import ast as A
from .minilang.interp import DEFAULT_BUDGET
from .statecap import ExecutionRecord, record_key
from .testgen import TestSuite

THREADS_ENV = "SPECFUZZ_THREADS"


@dataclass
class MutantColumn:
    id: str
    records: int
    failed_cases: int
    cells: dict[int, list[str]]  # row -> falsifying record ids


@dataclass
class KillMatrix:
    assertions: list[str]
    mutants: list[str]  # mutants with at least one record
    excluded: list[str]  # mutants that produced no record
    cells: dict[tuple[int, str], list[str]] = field(default_factory=dict)

    def cell(self, row: int, mutant: str) -> list[str]:
        return self.cells.get((row, mutant), [])

    def kill_vector(self, row: int) -> frozenset[str]:
        return frozenset(m for m in self.mutants if self.cells.get((row, m)))

    def failures(self, row: int) -> int:
        return sum(len(self.cells.get((row, m), ())) for m in self.mutants)

    def to_json(self) -> dict:
        return {
            "assertions": self.assertions,
            "mutants": self.mutants,
            "excluded_mutants": self.excluded,
            "kill_vectors": [sorted(self.kill_vector(i)) for i in range(len(self.assertions))],
            "failures": [self.failures(i) for i in range(len(self.assertions))],
        }


class _Evaluator:
    """Evaluates all rows on a record, memoized by identity-free record key."""

    def __init__(self, assertions: Sequence[str], seed_keys: Iterable[tuple] = ()):
        self.asts = [parse_assertion(t) for t in assertions]
        self.compiled: dict[tuple, list[CompiledAssertion]] = {}
        self.cache: dict[tuple, tuple[int, ...]] = {k: () for k in seed_keys}

    def falsified(self, rec: ExecutionRecord) -> tuple[int, ...]:
        key = record_key(rec)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        shape = record_shape(rec)
        fs = self.compiled.get(shape)
        if fs is None:
            fs = self.compiled[shape] = [CompiledAssertion(a, shape) for a in self.asts]
        out = tuple(i for i, f in enumerate(fs) if not f.holds(rec))
        self.cache[key] = out
        return out


def _column(mutant_id: str, program: A.Program, suite: TestSuite, method: str, ev: _Evaluator,
            step_budget: int) -> MutantColumn:
    records, failed = collect_records(program, suite, method, step_budget, mutant=mutant_id)
    cells: dict[int, list[str]] = {}
    for rec in records:
        for row in ev.falsified(rec):
            cells.setdefault(row, []).append(rec.rid)
    return MutantColumn(mutant_id, len(records), failed, cells)


_worker_state: dict = {}


def _worker_init(assertions, seed_keys, suite, method, step_budget):
    _worker_state.update(ev=_Evaluator(assertions, seed_keys), suite=suite, method=method, budget=step_budget)


def _worker_column(job):
    mutant_id, program = job
    s = _worker_state
    return _column(mutant_id, program, s["suite"], s["method"], s["ev"], s["budget"])


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def compute_kill_matrix(mutants: Sequence[tuple[str, A.Program]], suite: TestSuite, survivors: Sequence[str],
                        method: str, original_records: Optional[Sequence[ExecutionRecord]] = None,
                        step_budget: int = DEFAULT_BUDGET, threads: Optional[int] = None) -> KillMatrix:
    """Replay ``suite`` on each (id, program) mutant and record falsifications.

    ``original_records`` are the records the survivors were detected on; a
    mutant record identical to one of them is known to falsify nothing.
    """
    seed_keys = [record_key(r) for r in original_records] if original_records else []
    threads = thread_count() if threads is None else threads
    if threads > 1 and len(mutants) > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_worker_init,
                                 initargs=(list(survivors), seed_keys, suite, method, step_budget)) as pool:
            columns = list(pool.map(_worker_column, list(mutants)))
    else:
        ev = _Evaluator(survivors, seed_keys)
        columns = [_column(mid, prog, suite, method, ev, step_budget) for mid, prog in mutants]
    matrix = KillMatrix(list(survivors), [], [])
    for col in columns:
        if col.records == 0:
            matrix.excluded.append(col.id)
            continue
        matrix.mutants.append(col.id)
        for row, rids in col.cells.items():
            matrix.cells[(row, col.id)] = rids
    return matrix


def filter_weak(matrix: KillMatrix) -> tuple[list[int], list[int]]:
    """(kept rows, discarded rows): discarded rows kill no mutant."""
    kept, weak = [], []
    for i in range(len(matrix.assertions)):
        (kept if matrix.kill_vector(i) else weak).append(i)
    return kept, weak


@dataclass
class Cluster:
    kill_vector: list[str]
    members: list[tuple[str, int]]  # (assertion, F) in rank order

    @property
    def representative(self) -> str:
        return self.members[0][0]

    def to_json(self) -> dict:
        return {
            "representative": self.representative,
            "failures": self.members[0][1],
            "kill_vector": self.kill_vector,
            "members": [{"assertion": a, "failures": f} for a, f in self.members],
        }


@dataclass
class RankedReport:
    clusters: list[Cluster]
    weak: list[str]
    survivors: int

    @property
    def representatives(self) -> list[str]:
        return [c.representative for c in self.clusters]

    def summary(self) -> dict:
        n = self.survivors
        kept = sum(len(c.members) for c in self.clusters)
        counts = {"survivors": n, "irrelevant": len(self.weak), "equivalent": kept - len(self.clusters),
                  "reported": len(self.clusters)}

        def pct(k: int) -> float:
            return round(100.0 * k / n, 2) if n else 0.0
        counts["percent"] = {k: pct(counts[k]) for k in ("irrelevant", "equivalent", "reported")}
        return counts

    def to_json(self) -> dict:
        return {
            "summary": self.summary(),
            "representatives": self.representatives,
            "clusters": [c.to_json() for c in self.clusters],
            "irrelevant": self.weak,
        }


def _rank_key(text: str, f: int) -> tuple:
    return (-f, len(text), text)


def cluster_and_rank(matrix: KillMatrix, kept: Optional[Sequence[int]] = None) -> RankedReport:
    """Group kept rows by kill vector; rank members by failure count, then
    shorter text, then text; one representative per cluster."""
    if kept is None:
        kept, weak = filter_weak(matrix)
    else:
        weak = [i for i in range(len(matrix.assertions)) if i not in set(kept)]
    groups: dict[frozenset, list[tuple[str, int]]] = {}
    for row in kept:
        kv = matrix.kill_vector(row)
        if not kv:
            raise ValueError(f"row {row} has an empty kill vector")
        groups.setdefault(kv, []).append((matrix.assertions[row], matrix.failures(row)))
    clusters = []
    for kv, members in groups.items():
        members.sort(key=lambda m: _rank_key(*m))
        clusters.append(Cluster(sorted(kv), members))
    clusters.sort(key=lambda c: _rank_key(*c.members[0]))
    return RankedReport(clusters, [matrix.assertions[i] for i in weak], len(matrix.assertions))


def select(mutants: Sequence[tuple[str, A.Program]], suite: TestSuite, survivors: Sequence[str], method: str,
           original_records: Optional[Sequence[ExecutionRecord]] = None,
           step_budget: int = DEFAULT_BUDGET) -> tuple[KillMatrix, RankedReport]:
    matrix = compute_kill_matrix(mutants, suite, survivors, method, original_records, step_budget)
    kept, _ = filter_weak(matrix)
    return matrix, cluster_and_rank(matrix, kept)
