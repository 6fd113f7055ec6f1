"""End-to-end driver: testgen, grammar, fuzz, detect, mutate, select.

Stage seeds are split from one master seed with :func:`stage_seed`, so a
single integer fixes every random choice of a run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from . import __version__
from .asserteval.simplify import trivial
from .asserteval.syntax import AssertionSyntaxError, parse_assertion
from .detector import LikelyInvariantSet, detect
from .fuzzer import fuzz_candidates
from .grammar import Grammar, extract_grammar
from .minilang import ast as A
from .minilang import load_program, parse_program
from .minilang.errors import MiniObjError
from .minilang.interp import DEFAULT_BUDGET
from .mutation import OPERATORS, Mutant, export_mutants, generate_mutants
from .selector import KillMatrix, RankedReport, compute_kill_matrix, cluster_and_rank, filter_weak
from .testgen import TestSuite, generate_suite

log = logging.getLogger(__name__)

STAGES = ("testgen", "grammar", "fuzz", "detect", "mutants", "select")
SEEDED_STAGES = ("testgen", "fuzz")


def stage_seed(master: int, stage: str) -> int:
    """First 8 bytes (big-endian) of sha256("<master>:<stage>")."""
    digest = hashlib.sha256(f"{master}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


class ConfigError(ValueError):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {type(cause).__name__}: {cause}")


@dataclass
class PipelineConfig:
    subject: str
    cls: str
    method: Optional[str] = None  # defaults to the class's only public method
    candidates: int = 2000
    suite_size: int = 500
    nav_depth: int = 2
    seed: int = 0
    seeds: dict[str, int] = field(default_factory=dict)  # per-stage overrides
    step_budget: int = DEFAULT_BUDGET
    seq_len: tuple[int, int] = (1, 8)
    int_range: tuple[int, int] = (-100, 100)
    operators: tuple[str, ...] = OPERATORS
    inject: tuple[str, ...] = ()
    drop_trivial: bool = True
    select: bool = True
    out_dir: Optional[str] = None

    def validate(self) -> None:
        for name in ("candidates", "suite_size", "nav_depth", "step_budget"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        lo, hi = self.seq_len
        if not 1 <= lo <= hi:
            raise ConfigError("sequence length range must satisfy 1 <= min <= max")
        if self.int_range[0] > self.int_range[1]:
            raise ConfigError("empty integer range")
        unknown = set(self.seeds) - set(SEEDED_STAGES)
        if unknown:
            raise ConfigError(f"no seeded stage named {sorted(unknown)}")
        bad = set(self.operators) - set(OPERATORS)
        if bad:
            raise ConfigError(f"unknown mutation operators {sorted(bad)}")

    def seed_for(self, stage: str) -> int:
        return self.seeds.get(stage, stage_seed(self.seed, stage))

    def seed_table(self) -> dict[str, int]:
        return {s: self.seed_for(s) for s in SEEDED_STAGES}

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("out_dir")
        d["class"] = d.pop("cls")
        d["seq_len"] = list(self.seq_len)
        d["int_range"] = list(self.int_range)
        d["operators"] = list(self.operators)
        d["inject"] = list(self.inject)
        d["stage_seeds"] = self.seed_table()
        return d


@dataclass
class PipelineResult:
    config: PipelineConfig
    program: A.Program
    method: str
    suite: TestSuite
    grammar: Grammar
    fuzzed: list[str]
    candidates: list[str]  # fuzzed plus injected
    trivial: list[str]  # derivations refused by the trivial filter
    detection: LikelyInvariantSet
    mutants: list[Mutant] = field(default_factory=list)
    matrix: Optional[KillMatrix] = None
    report: Optional[RankedReport] = None
    timings: dict[str, float] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        c = {"fuzzed": len(self.fuzzed), "trivial": len(self.trivial), "candidates": len(self.candidates),
             "records": len(self.detection.records), "survivors": len(self.detection.survivors)}
        if self.report is not None:
            c["mutants"] = len(self.mutants)
            c["kept"] = c["survivors"] - len(self.report.weak)
            c["representatives"] = len(self.report.clusters)
        return c

    def report_json(self) -> dict:
        """Deterministic run report: no timings or paths beyond the config."""
        out: dict[str, Any] = {"specfuzz": __version__, "config": self.config.to_json(), "method": self.method,
                               "counts": self.counts()}
        if self.report is None:
            out["mode"] = "survivors"
            out["survivors"] = self.detection.texts()
            return out
        out["mode"] = "selected"
        out.update(self.report.to_json())
        out["mutants"] = [m.describe() for m in self.mutants]
        out["excluded_mutants"] = self.matrix.excluded if self.matrix else []
        return out

    def report_text(self) -> str:
        return json.dumps(self.report_json(), indent=1, sort_keys=True) + "\n"


def default_method(program: A.Program, cls: str) -> str:
    decl = program.cls(cls)
    names = [m.name for m in decl.public_methods()]
    if len(names) != 1:
        raise ConfigError(f"{cls} has {len(names)} public methods; pass a method name")
    return names[0]


def nontrivial(constants: Optional[dict[str, int]] = None) -> Callable[[str], bool]:
    """Fuzzer filter refusing candidates whose truth value is fixed without
    reading any program state (they simplify to ``true`` or ``false``)."""
    def accept(text: str) -> bool:
        try:
            return not trivial(parse_assertion(text), constants)
        except AssertionSyntaxError:
            return True  # the detector reports it
    return accept


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def run_pipeline(config: PipelineConfig, source: Optional[str] = None,
                 progress: Optional[Callable[[str], None]] = None) -> PipelineResult:
    """Run every stage in order. ``source`` overrides reading ``config.subject``.

    Raises :class:`ConfigError` before any stage runs, or :class:`StageError`
    naming the failing stage. Artifacts written before a failure are kept.
    """
    config.validate()
    out = Path(config.out_dir) if config.out_dir else None
    timings: dict[str, float] = {}
    seeds = config.seed_table()

    def stage(name: str, fn: Callable[[], Any]) -> Any:
        if progress:
            progress(name)
        t0 = time.perf_counter()
        try:
            return fn()
        except (ConfigError, StageError):
            raise
        except Exception as e:
            raise StageError(name, e) from e
        finally:
            timings[name] = round(time.perf_counter() - t0, 3)

    try:
        program = parse_program(source) if source is not None else load_program(config.subject)
    except OSError as e:
        raise ConfigError(f"cannot read {config.subject}: {e.strerror}") from e
    except MiniObjError as e:
        raise ConfigError(f"{config.subject}: {e}") from e
    if program.cls(config.cls) is None:
        raise ConfigError(f"unknown class {config.cls}")
    method = config.method or default_method(program, config.cls)
    if program.cls(config.cls).method(method) is None:
        raise ConfigError(f"unknown method {config.cls}.{method}")

    suite = stage("testgen", lambda: generate_suite(
        program, config.cls, config.suite_size, config.seq_len, config.int_range, seeds["testgen"],
        config.step_budget))
    if out:
        _write(out / "suite.json", suite.dumps())

    grammar = stage("grammar", lambda: extract_grammar(program, config.cls, config.nav_depth))
    if out:
        _write(out / "grammar.json", grammar.dumps())

    accept = nontrivial(grammar.constants) if config.drop_trivial else None
    fuzz = stage("fuzz", lambda: fuzz_candidates(grammar, config.candidates, seeds["fuzz"], accept=accept))
    fuzzed = fuzz.candidates
    candidates = fuzzed + [t for t in config.inject if t not in set(fuzzed)]
    if out:
        _write(out / "candidates.txt", "".join(t + "\n" for t in candidates))

    detection = stage("detect", lambda: detect(program, suite, candidates, method, config.step_budget))
    if out:
        _write(out / "survivors.json", _dump(detection.to_json(subject=config.subject, seeds=seeds)))

    result = PipelineResult(config, program, method, suite, grammar, fuzzed, candidates, fuzz.rejected, detection,
                            timings=timings)
    if config.select:
        mutants = stage("mutants", lambda: generate_mutants(program, config.cls, config.operators))
        if out:
            export_mutants(mutants, out / "mutants", program, config.cls)

        def _select():
            matrix = compute_kill_matrix([(m.id, m.program) for m in mutants], suite, detection.texts(), method,
                                         detection.records, config.step_budget)
            keep, _ = filter_weak(matrix)
            return matrix, cluster_and_rank(matrix, keep)
        result.mutants = mutants
        result.matrix, result.report = stage("select", _select)

    if out:
        _write(out / "report.json", result.report_text())
        manifest = {
            "specfuzz": __version__, "python": platform.python_version(), "config": config.to_json(),
            "seeds": seeds, "counts": result.counts(), "wall_time": timings,
            "fuzz": {"attempts": fuzz.attempts, "aborted": fuzz.aborted, "duplicates": fuzz.duplicates,
                     "exhausted": fuzz.exhausted},
            "artifacts": sorted(p.relative_to(out).as_posix() for p in out.iterdir()),
        }
        _write(out / "manifest.json", _dump(manifest))
    return result
