"""Feedback-directed random test generation.

A test case constructs the target class and then issues a random sequence
of public method calls. Cases that fail on the original program are thrown
away and regenerated.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .minilang import ast as A
from .minilang.errors import MiniObjError
from .minilang.interp import DEFAULT_BUDGET
from .statecap import trace_case

MAX_ARG_DEPTH = 2


class GenerationError(MiniObjError):
    pass


class NoConstructor(GenerationError):
    pass


class GenerationExhausted(GenerationError):
    pass


@dataclass
class Call:
    method: str
    args: list[Any]


@dataclass
class TestCase:
    __test__ = False  # not a pytest class
    ctor_args: list[Any]
    calls: list[Call]

    def call_pairs(self) -> list[tuple[str, list[Any]]]:
        return [(c.method, c.args) for c in self.calls]

    def to_json(self) -> dict:
        return {"ctor_args": self.ctor_args, "calls": [{"method": c.method, "args": c.args} for c in self.calls]}

    @classmethod
    def from_json(cls, d: dict) -> "TestCase":
        return cls(list(d.get("ctor_args", [])), [Call(c["method"], list(c.get("args", []))) for c in d["calls"]])


@dataclass
class TestSuite:
    __test__ = False
    cls: str
    cases: list[TestCase]
    seed: Optional[int] = None
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.cases)

    def to_json(self) -> dict:
        return {"class": self.cls, "seed": self.seed, "params": self.params,
                "cases": [c.to_json() for c in self.cases]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, d: Any, default_class: Optional[str] = None) -> "TestSuite":
        """Accepts the suite object or a bare list of cases."""
        if isinstance(d, list):
            if default_class is None:
                raise ValueError("a bare case list needs a class name")
            return cls(default_class, [TestCase.from_json(c) for c in d])
        return cls(d.get("class") or default_class, [TestCase.from_json(c) for c in d["cases"]],
                   d.get("seed"), d.get("params", {}))


def load_suite(path: str, default_class: Optional[str] = None) -> TestSuite:
    with open(path, encoding="utf-8") as fh:
        return TestSuite.from_json(json.load(fh), default_class)


class _Gen:
    def __init__(self, program: A.Program, rng: random.Random, int_range: tuple[int, int]):
        self.program = program
        self.rng = rng
        self.lo, self.hi = int_range

    def value(self, ty: str, depth: int = 0) -> Any:
        if ty == "Int":
            return self.rng.randint(self.lo, self.hi)
        if ty == "Bool":
            return self.rng.random() < 0.5
        ctors = self.program.cls(ty).public_ctors()
        if not ctors or depth >= MAX_ARG_DEPTH:
            return None
        ctor = ctors[self.rng.randrange(len(ctors))]
        return {"new": ty, "args": [self.value(p.type, depth + 1) for p in ctor.params]}

    def call(self, m: A.Method) -> Call:
        return Call(m.name, [self.value(p.type) for p in m.params])


def _runs_clean(program: A.Program, cls: str, case: TestCase, budget: int) -> bool:
    _, failure = trace_case(program, cls, case.ctor_args, case.call_pairs(), methods=(), step_budget=budget)
    return failure is None


def generate_suite(program: A.Program, target: str, max_sequences: int = 500,
                   seq_len_range: tuple[int, int] = (1, 8), int_range: tuple[int, int] = (-100, 100),
                   seed: int = 0, step_budget: int = DEFAULT_BUDGET,
                   max_attempts: Optional[int] = None) -> TestSuite:
    """Random constructor-then-calls cases that all complete on ``program``."""
    decl = program.cls(target)
    if decl is None:
        raise GenerationError(f"unknown class {target}")
    ctors = decl.public_ctors()
    if not ctors:
        raise NoConstructor(target)
    methods = decl.public_methods()
    lo_len, hi_len = seq_len_range
    if not 0 <= lo_len <= hi_len:
        raise ValueError("bad sequence length range")
    params = {"max_sequences": max_sequences, "seq_len": [lo_len, hi_len], "int_range": list(int_range),
              "step_budget": step_budget}
    if max_sequences == 0:
        return TestSuite(target, [], seed, params)
    if max_attempts is None:
        max_attempts = 20 * max_sequences + 100

    rng = random.Random(seed)
    gen = _Gen(program, rng, int_range)

    def fresh_case(forced: Optional[A.Method] = None) -> TestCase:
        ctor = ctors[rng.randrange(len(ctors))]
        args = [gen.value(p.type) for p in ctor.params]
        k = rng.randint(lo_len, hi_len) if methods else 0
        calls = [gen.call(methods[rng.randrange(len(methods))]) for _ in range(k)]
        if forced is not None:
            pos = rng.randint(0, len(calls))
            calls.insert(pos, gen.call(forced))
        return TestCase(args, calls)

    cases: list[TestCase] = []
    attempts = 0
    while len(cases) < max_sequences:
        if attempts >= max_attempts:
            raise GenerationExhausted(f"{len(cases)} of {max_sequences} valid cases after {attempts} attempts")
        attempts += 1
        case = fresh_case()
        if _runs_clean(program, target, case, step_budget):
            cases.append(case)

    # coverage floor: make sure every public method is called somewhere
    covered = {c.method for case in cases for c in case.calls}
    for m in methods:
        if m.name in covered:
            continue
        for _ in range(max(1, max_attempts - attempts)):
            attempts += 1
            case = fresh_case(forced=m)
            if _runs_clean(program, target, case, step_budget):
                victim = _replaceable(cases, m.name)
                cases[victim] = case
                covered = {c.method for case in cases for c in case.calls}
                break
            if attempts >= max_attempts:
                break
    return TestSuite(target, cases, seed, params)


def _replaceable(cases: Sequence[TestCase], adding: str) -> int:
    """Index of the last case whose removal loses no method coverage."""
    counts: dict[str, int] = {}
    for case in cases:
        for name in {c.method for c in case.calls}:
            counts[name] = counts.get(name, 0) + 1
    for i in range(len(cases) - 1, -1, -1):
        if all(counts[n] > 1 for n in {c.method for c in cases[i].calls}):
            return i
    return len(cases) - 1
