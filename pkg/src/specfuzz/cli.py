"""Command-line interface.

Each stage has a subcommand reading and writing plain JSON or text files;
``run`` chains them. Exit codes: 0 success, 2 bad configuration or input,
3 a stage failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .detector import NoRecordsForMethod, collect_records, detect
from .fuzzer import fuzz_candidates
from .grammar import extract_grammar, load_grammar, summary
from .minilang import load_program
from .minilang.errors import MiniObjError
from .minilang.interp import DEFAULT_BUDGET
from .mutation import OPERATORS, export_mutants, generate_mutants, load_mutants
from .pipeline import ConfigError, PipelineConfig, StageError, default_method, nontrivial, run_pipeline
from .selector import cluster_and_rank, compute_kill_matrix, filter_weak
from .testgen import generate_suite, load_suite

EXIT_OK, EXIT_CONFIG, EXIT_STAGE = 0, 2, 3

log = logging.getLogger("specfuzz")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _program(path: str):
    try:
        return load_program(path)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from e
    except MiniObjError as e:
        raise ConfigError(f"{path}: {e}") from e


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# -- subcommands ------------------------------------------------------------


def cmd_grammar(a: argparse.Namespace) -> int:
    program = _program(a.subject)
    if program.cls(a.cls) is None:
        raise ConfigError(f"unknown class {a.cls}")
    g = extract_grammar(program, a.cls, a.depth)
    _emit(summary(g) + "\n" if a.text else g.dumps(), a.out)
    return EXIT_OK


def cmd_fuzz(a: argparse.Namespace) -> int:
    g = load_grammar(a.grammar)
    accept = None if a.keep_trivial else nontrivial(g.constants)
    res = fuzz_candidates(g, a.n, a.seed, a.max_attempts, accept=accept)
    _emit("".join(t + "\n" for t in res.candidates), a.out)
    log.info("%d candidates from %d derivations (%d duplicates, %d trivial, %d aborted)",
             len(res.candidates), res.attempts, res.duplicates, len(res.rejected), res.aborted)
    return EXIT_OK


def cmd_testgen(a: argparse.Namespace) -> int:
    program = _program(a.subject)
    if program.cls(a.cls) is None:
        raise ConfigError(f"unknown class {a.cls}")
    suite = generate_suite(program, a.cls, a.n, (a.min_len, a.max_len), (a.int_min, a.int_max), a.seed,
                           a.step_budget)
    _emit(suite.dumps(), a.out)
    return EXIT_OK


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_detect(a: argparse.Namespace) -> int:
    program = _program(a.subject)
    suite = load_suite(a.suite, a.cls)
    method = a.method or default_method(program, suite.cls)
    candidates = _read_lines(a.candidates)
    result = detect(program, suite, candidates, method, a.step_budget)
    _emit(_dump(result.to_json(subject=a.subject)), a.out)
    log.info("%d of %d candidates survived on %d records", len(result.survivors), len(candidates),
             len(result.records))
    return EXIT_OK


def cmd_mutants(a: argparse.Namespace) -> int:
    program = _program(a.subject)
    if program.cls(a.cls) is None:
        raise ConfigError(f"unknown class {a.cls}")
    ops = a.operators.split(",") if a.operators else OPERATORS
    mutants = generate_mutants(program, a.cls, ops)
    if a.out:
        export_mutants(mutants, a.out, program, a.cls)
    manifest = [m.describe() for m in mutants]
    sys.stdout.write(_dump({"class": a.cls, "mutants": manifest}) if not a.out else
                     "".join(f"{m.id} {m.operator} line {m.line}: {m.original} -> {m.replacement}\n"
                             for m in mutants))
    return EXIT_OK


def cmd_select(a: argparse.Namespace) -> int:
    with open(a.survivors, encoding="utf-8") as fh:
        surv = json.load(fh)
    loaded, original, cls = load_mutants(a.mutants)
    if original is None:
        if not surv.get("subject"):
            raise ConfigError("neither the mutant directory nor the survivors file names the subject")
        original = _program(surv["subject"])
    suite = load_suite(a.suite, surv.get("class") or cls)
    method = surv["method"]
    texts = [s["assertion"] for s in surv["survivors"]]
    records, _ = collect_records(original, suite, method, a.step_budget)
    matrix = compute_kill_matrix([(m.id, m.program) for m in loaded], suite, texts, method, records,
                                 a.step_budget)
    kept, _ = filter_weak(matrix)
    report = cluster_and_rank(matrix, kept)
    out = report.to_json()
    out["method"] = method
    out["mutants"] = [m.info for m in loaded]
    out["excluded_mutants"] = matrix.excluded
    _emit(_dump(out), a.out)
    return EXIT_OK


def _summary_table(result) -> str:
    c = result.counts()
    rows = [("candidates", c["candidates"]), ("survivors", c["survivors"])]
    if result.report is not None:
        rows += [("kept", c["kept"]), ("representatives", c["representatives"])]
    lines = [f"{result.config.cls}.{result.method}"]
    lines += [f"  {k:<16}{v:>6}" for k, v in rows]
    if result.report is not None:
        pct = result.report.summary()["percent"]
        lines.append("  " + "  ".join(f"{k} {v:.1f}%" for k, v in pct.items()))
        lines.append("representatives:")
        lines += [f"  {i + 1:>2}. {c.representative}   (F={c.members[0][1]}, cluster of {len(c.members)})"
                  for i, c in enumerate(result.report.clusters)]
    return "\n".join(lines) + "\n"


def cmd_run(a: argparse.Namespace) -> int:
    seeds = {}
    for item in a.stage_seed or ():
        name, _, value = item.partition("=")
        try:
            seeds[name] = int(value)
        except ValueError:
            raise ConfigError(f"bad --stage-seed {item!r}; expected STAGE=INT") from None
    inject = list(a.inject or ())
    if a.inject_file:
        inject += _read_lines(a.inject_file)
    cfg = PipelineConfig(
        subject=a.subject, cls=a.cls, method=a.method, candidates=a.candidates, suite_size=a.suite_size,
        nav_depth=a.depth, seed=a.seed, seeds=seeds, step_budget=a.step_budget,
        operators=tuple(a.operators.split(",")) if a.operators else OPERATORS,
        inject=tuple(inject), drop_trivial=not a.keep_trivial, select=not a.no_select, out_dir=a.out_dir,
    )
    cfg.validate()
    try:
        source = Path(a.subject).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {a.subject}: {e.strerror}") from e
    result = run_pipeline(cfg, source, progress=lambda s: log.info("stage %s", s))
    if a.out_dir:
        sys.stdout.write(_summary_table(result))
    else:
        sys.stdout.write(result.report_text())
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specfuzz", description="Infer likely specifications of MiniObj classes.")
    p.add_argument("--version", action="version", version=f"specfuzz {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def subject(sp, cls=True):
        sp.add_argument("--subject", required=True, help="MiniObj source file")
        if cls:
            sp.add_argument("--class", dest="cls", required=True, help="target class")

    def budget(sp):
        sp.add_argument("--step-budget", type=_positive, default=DEFAULT_BUDGET, help="interpreter steps per call")

    g = sub.add_parser("grammar", help="extract the assertion grammar of a class")
    subject(g)
    g.add_argument("--depth", type=_positive, default=2, help="field navigation depth")
    g.add_argument("--text", action="store_true", help="print productions instead of JSON")
    g.add_argument("--out")
    g.set_defaults(func=cmd_grammar)

    f = sub.add_parser("fuzz", help="derive candidate assertions from a grammar")
    f.add_argument("--grammar", required=True)
    f.add_argument("--n", type=_positive, default=2000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--max-attempts", type=_positive)
    f.add_argument("--keep-trivial", action="store_true", help="do not refuse constant-valued candidates")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fuzz)

    t = sub.add_parser("testgen", help="generate a random test suite")
    subject(t)
    t.add_argument("--n", type=_positive, default=500, help="number of test cases")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--min-len", type=_positive, default=1)
    t.add_argument("--max-len", type=_positive, default=8)
    t.add_argument("--int-min", type=int, default=-100)
    t.add_argument("--int-max", type=int, default=100)
    budget(t)
    t.add_argument("--out")
    t.set_defaults(func=cmd_testgen)

    d = sub.add_parser("detect", help="keep the candidates that hold on every recorded call")
    d.add_argument("--subject", required=True)
    d.add_argument("--class", dest="cls", help="class, if the suite file does not name it")
    d.add_argument("--method")
    d.add_argument("--suite", required=True)
    d.add_argument("--candidates", required=True, help="one assertion per line")
    budget(d)
    d.add_argument("--out")
    d.set_defaults(func=cmd_detect)

    m = sub.add_parser("mutants", help="generate first-order mutants")
    subject(m)
    m.add_argument("--operators", help=f"comma-separated subset of {','.join(OPERATORS)}")
    m.add_argument("--out", help="directory for the mutant sources and manifest.json")
    m.set_defaults(func=cmd_mutants)

    s = sub.add_parser("select", help="cluster and rank survivors by the mutants they kill")
    s.add_argument("--survivors", required=True)
    s.add_argument("--mutants", required=True, help="directory written by the mutants command")
    s.add_argument("--suite", required=True)
    budget(s)
    s.add_argument("--out")
    s.set_defaults(func=cmd_select)

    r = sub.add_parser("run", help="run the whole pipeline")
    subject(r)
    r.add_argument("--method")
    r.add_argument("--seed", type=int, default=0, help="master seed")
    r.add_argument("--stage-seed", action="append", metavar="STAGE=INT", help="override a derived stage seed")
    r.add_argument("--candidates", type=int, default=2000)
    r.add_argument("--suite-size", type=int, default=500)
    r.add_argument("--depth", type=int, default=2)
    budget(r)
    r.add_argument("--operators", help=f"comma-separated subset of {','.join(OPERATORS)}")
    r.add_argument("--inject", action="append", metavar="ASSERTION", help="add a candidate to the fuzzed pool")
    r.add_argument("--inject-file", help="file of extra candidates, one per line")
    r.add_argument("--keep-trivial", action="store_true")
    r.add_argument("--no-select", action="store_true", help="stop after detection and report the survivors")
    r.add_argument("--out-dir", help="write every stage artifact here")
    r.set_defaults(func=cmd_run)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="specfuzz: %(message)s")
    try:
        return a.func(a)
    except ConfigError as e:
        print(f"specfuzz: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as e:
        print(f"specfuzz: {e}", file=sys.stderr)
        return EXIT_STAGE
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as e:
        print(f"specfuzz: bad input: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (MiniObjError, NoRecordsForMethod) as e:
        print(f"specfuzz: {a.command} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
