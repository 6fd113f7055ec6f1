"""End-to-end acceptance checks.

Each test stores a one-line verdict in ``conftest.ACCEPTANCE``; the session
summary prints them as ``criterion N: PASS/FAIL``. Full pipeline runs are
cached so criteria sharing a configuration reuse them.

Run alone with ``pytest tests/test_acceptance.py`` or ``python3 -m
tests.test_acceptance``.
"""

from __future__ import annotations

import random
import subprocess
import sys
import time
from functools import lru_cache

import pytest

from specfuzz.asserteval import (ListDomain, bounded_equiv, entails, evaluate, format_assertion, parse_assertion)
from specfuzz.asserteval.equiv import IntDomain, needs_pre_variation
from specfuzz.asserteval.syntax import Not, Quant
from specfuzz.detector import collect_records
from specfuzz.fuzzer import MAX_NONTERMINALS, MAX_STEPS, DerivationAbort, DerivationStats, derive_one, fuzz_candidates
from specfuzz.grammar import extract_grammar
from specfuzz.pipeline import PipelineConfig, PipelineResult, run_pipeline
from specfuzz.statecap import trace_case
from specfuzz.testgen import generate_suite

from .conftest import ACCEPTANCE, fixture_path

SEEDS = range(10)
SENTINEL = 2**63 - 1
TAUTOLOGY = "x >= y || x <= y"
FRAME = "c.value == old(c.value)"

MIN_TRUTH = ["result == x || result == y", "result <= x", "result <= y"]
SLIST_TRUTH = {
    "sortedness": "all SList l: reach(this, next).has(l) ==> l.elem <= l.next.elem",
    "sentinel": "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL",
    "inserted": "exists SList l: reach(this, next).has(l) && l.elem == data",
}


def verdict(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (ok, detail)
    assert ok, f"criterion {n}: {detail}"


@lru_cache(maxsize=None)
def timed_run(fixture: str, cls: str, method: str, seed: int, inject: tuple[str, ...] = ()):
    cfg = PipelineConfig(str(fixture_path(fixture)), cls, method, seed=seed, inject=inject)
    t0 = time.perf_counter()
    result = run_pipeline(cfg)
    return result, time.perf_counter() - t0


def min_run(seed: int, inject: tuple[str, ...] = ()) -> tuple[PipelineResult, float]:
    return timed_run("min.mo", "MinOps", "min", seed, inject)


def slist_run(seed: int) -> tuple[PipelineResult, float]:
    return timed_run("slist.mo", "SList", "insert", seed)


def composite_run(seed: int) -> tuple[PipelineResult, float]:
    return timed_run("composite.mo", "Composite", "addChild", seed, (FRAME,))


# -- 1 ----------------------------------------------------------------------


def test_min_ground_truth_entailment():
    r = range(-50, 51)
    domain = IntDomain("MinOps", "min", {"x": r, "y": r}, result=r)
    truth = [parse_assertion(t) for t in MIN_TRUTH]
    good, slow, missing = [], [], {}
    for seed in SEEDS:
        result, secs = min_run(seed)
        verdicts = entails([parse_assertion(t) for t in result.report.representatives], truth, domain)
        if all(v is None for v in verdicts):
            good.append(seed)
        for t, v in zip(MIN_TRUTH, verdicts):
            if v is not None:
                missing[t] = missing.get(t, 0) + 1
        if secs > 60:
            slow.append(seed)
    ok = len(good) >= 8 and not slow
    verdict(1, ok, f"{len(good)}/10 seeds entail all conjuncts (need 8); misses per conjunct {missing}; "
                   f"seeds over 60 s: {slow}")


# -- 2 ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _list_domains():
    values = [0, 1, 2, 3, 4, SENTINEL]
    params = {"data": [0, 1, 2, 3, 4]}
    consts = {"SENTINEL": SENTINEL}
    wide = ListDomain("SList", "insert", "elem", "next", 5, values, params, constants=consts)
    # pre-states vary independently of post-states only for old()
    varied = ListDomain("SList", "insert", "elem", "next", 3, values, params, pre_max_nodes=3, constants=consts)
    return wide, varied


def list_equivalent(a, b) -> bool:
    wide, varied = _list_domains()
    if not bounded_equiv(a, b, wide):
        return False
    return not needs_pre_variation(a, b) or bool(bounded_equiv(a, b, varied))


def test_slist_ground_truth_coverage():
    truth = {k: parse_assertion(v) for k, v in SLIST_TRUTH.items()}
    good, slow, found_by = [], [], {k: 0 for k in truth}
    for seed in SEEDS:
        result, secs = slist_run(seed)
        reps = [parse_assertion(t) for t in result.report.representatives]
        hits = {k for k, g in truth.items() if any(list_equivalent(a, g) for a in reps)}
        for k in hits:
            found_by[k] += 1
        if len(hits) == len(truth):
            good.append(seed)
        if secs > 300:
            slow.append(seed)
    verdict(2, len(good) >= 7 and not slow,
            f"{len(good)}/10 seeds cover all three; per property {found_by}; seeds over 5 min: {slow}")


# -- 3 ----------------------------------------------------------------------


def test_survivor_bands():
    m = len(min_run(0)[0].detection.survivors)
    s = len(slist_run(0)[0].detection.survivors)
    spread = sorted(len(slist_run(seed)[0].detection.survivors) for seed in SEEDS)
    verdict(3, 30 <= m <= 120 and 250 <= s <= 700,
            f"min {m} in [30,120], SList.insert {s} in [250,700] at seed 0 (SList over seeds {spread[0]}..{spread[-1]})")


# -- 4 ----------------------------------------------------------------------


def test_reduction_rate():
    bad, rates = [], []
    for seed in SEEDS:
        report = slist_run(seed)[0].report
        s = report.summary()
        rate = 100.0 * s["reported"] / s["survivors"]
        rates.append(rate)
        if not (rate <= 10 and s["percent"]["reported"] <= 10 and 10 <= s["percent"]["irrelevant"] <= 40):
            bad.append((seed, round(rate, 1), s["percent"]))
    verdict(4, not bad, f"reduction {min(rates):.1f}..{max(rates):.1f}% reported over 10 seeds; out of band: {bad}")


# -- 5 ----------------------------------------------------------------------


def test_tautology_discarded():
    failures = []
    for seed in SEEDS:
        result, _ = min_run(seed, (TAUTOLOGY,))
        row = result.detection.texts().index(TAUTOLOGY) if TAUTOLOGY in result.detection.texts() else None
        if row is None:
            failures.append((seed, "did not survive detection"))
            continue
        if result.matrix.kill_vector(row) or TAUTOLOGY not in result.report.weak:
            failures.append((seed, "not discarded"))
    verdict(5, not failures, f"survives and is discarded on {10 - len(failures)}/10 seeds {failures or ''}")


# -- 6 ----------------------------------------------------------------------


def _falsified(texts, records) -> dict[str, int]:
    parsed = {t: parse_assertion(t) for t in texts}
    return {t: sum(1 for r in records if not evaluate(a, r).holds) for t, a in parsed.items()}


def recheck(result: PipelineResult, full: bool) -> list[str]:
    """Brute-force audit of one run; returns a list of problems.

    With ``full`` every cluster member is re-evaluated on every mutant.
    Otherwise the representative and the last member of each cluster are,
    and the remaining members are checked against the matrix.
    """
    problems = []
    report, matrix = result.report, result.matrix
    original, _ = collect_records(result.program, result.suite, result.method)
    reported = report.representatives
    for t, bad in _falsified(reported, original).items():
        if bad:
            problems.append(f"{t!r} fails on {bad} original records")

    audit = [m for c in report.clusters for m, _ in (c.members if full else {c.members[0], c.members[-1]})]
    vectors = {t: set() for t in audit}
    failures = {t: 0 for t in audit}
    for mutant in result.mutants:
        recs, _ = collect_records(mutant.program, result.suite, result.method, mutant=mutant.id)
        if not recs:
            if mutant.id not in matrix.excluded:
                problems.append(f"{mutant.id} has no records but is in the matrix")
            continue
        for t, bad in _falsified(audit, recs).items():
            if bad:
                vectors[t].add(mutant.id)
                failures[t] += bad

    row = {t: i for i, t in enumerate(matrix.assertions)}
    for c in report.clusters:
        for t, f in c.members:
            vec, fail = (vectors[t], failures[t]) if t in vectors else (set(matrix.kill_vector(row[t])),
                                                                        matrix.failures(row[t]))
            if vec != set(c.kill_vector):
                problems.append(f"{t!r} kill vector differs from its cluster")
            if fail != f:
                problems.append(f"{t!r} has F={fail}, report says {f}")
            if fail > failures.get(c.representative, c.members[0][1]):
                problems.append(f"{t!r} outranks representative {c.representative!r}")
    return problems


def test_cluster_soundness():
    problems, runs = [], 0
    for seed in SEEDS:
        for result, full in ((min_run(seed)[0], True), (min_run(seed, (TAUTOLOGY,))[0], True),
                             (slist_run(seed)[0], False)):
            problems += [f"{result.method} seed {seed}: {p}" for p in recheck(result, full)]
            runs += 1
    problems += [f"addChild: {p}" for p in recheck(composite_run(0)[0], True)]
    runs += 1
    verdict(6, not problems, f"{runs} runs audited, {len(problems)} problems {problems[:3] or ''}")


# -- 7 ----------------------------------------------------------------------


def test_fuzzer_contract(slist_program):
    grammar = extract_grammar(slist_program, "SList", 2)
    seed, n = 20240, 10_000
    t0 = time.perf_counter()
    fuzz = fuzz_candidates(grammar, n, seed, max_attempts=n)
    secs = time.perf_counter() - t0

    # replay the same derivation seeds with the bounds instrumented
    master = random.Random(seed)
    unique, over, stats = [], 0, DerivationStats()
    for _ in range(fuzz.attempts):
        try:
            text = derive_one(grammar, random.Random(master.getrandbits(64)), stats)
        except DerivationAbort as e:
            over += e.steps > MAX_STEPS
            continue
        over += stats.steps > MAX_STEPS or stats.max_nonterminals > MAX_NONTERMINALS
        unique.append(text)
    expected = list(dict.fromkeys(unique))
    unparsed = 0
    for t in fuzz.candidates:
        try:
            parse_assertion(t)
        except Exception:
            unparsed += 1
    ok = (fuzz.attempts == n and fuzz.candidates == expected and len(set(fuzz.candidates)) == len(fuzz.candidates)
          and not unparsed and not over and secs <= 10)
    verdict(7, ok, f"{n} derivations in {secs:.1f} s: {len(fuzz.candidates)} unique, {fuzz.aborted} aborted, "
                   f"{unparsed} unparsable, {over} over the bounds")


# -- 8 ----------------------------------------------------------------------


def test_duality_and_short_circuit(slist_program):
    grammar = extract_grammar(slist_program, "SList", 2)
    suite = generate_suite(slist_program, "SList", 80, seed=8)
    records = []
    for i, case in enumerate(suite.cases):
        recs, _ = trace_case(slist_program, "SList", case.ctor_args, case.call_pairs(), ("insert",), test=i)
        records.extend(recs)
    rng = random.Random(8)
    pairs = mismatches = 0
    while pairs < 1500:
        try:
            e = parse_assertion(derive_one(grammar, rng.getrandbits(64)))
        except DerivationAbort:
            continue
        rec = rng.choice(records)
        text = format_assertion(e)
        pairs += 1
        checks = [
            (f"false && ({text})", "False"),
            (f"true || ({text})", "True"),
            (f"false ==> ({text})", "True"),
        ]
        for t, want in checks:
            mismatches += evaluate(parse_assertion(t), rec).status != want
        mismatches += evaluate(Not(Not(e)), rec) != evaluate(e, rec)
        if not isinstance(e, Quant):
            body = f"reach(this, next).has(l) ==> (l.elem <= l.next.elem || ({text}))"
            a = evaluate(parse_assertion(f"all SList l: {body}"), rec)
            b = evaluate(parse_assertion(f"!(exists SList l: !({body}))"), rec)
            mismatches += "Error" not in (a.status, b.status) and a.status != b.status
        else:
            dual = Quant("exists" if e.quantifier == "all" else "all", e.type, e.var, Not(e.body))
            a, b = evaluate(e, rec), evaluate(Not(dual), rec)
            mismatches += "Error" not in (a.status, b.status) and a.status != b.status
    verdict(8, mismatches == 0, f"{pairs} assertion/record pairs, {mismatches} violations")


# -- 9 ----------------------------------------------------------------------


def test_determinism(tmp_path):
    def run(name: str) -> bytes:
        out = tmp_path / name
        subprocess.run([sys.executable, "-m", "specfuzz", "run", "--subject", str(fixture_path("slist.mo")),
                        "--class", "SList", "--method", "insert", "--seed", "1", "--candidates", "600",
                        "--suite-size", "150", "--out-dir", str(out)], check=True, capture_output=True)
        return (out / "report.json").read_bytes()
    a, b = run("first"), run("second")
    verdict(9, a == b, f"two CLI runs, report.json {len(a)} bytes, identical={a == b}")


# -- 10 ---------------------------------------------------------------------


def test_frame_assertion_is_irrelevant():
    result, _ = composite_run(0)
    survived = FRAME in result.detection.texts()
    weak = FRAME in result.report.weak
    verdict(10, survived and weak,
            f"{FRAME!r} survives={survived}, irrelevant={weak} over {len(result.mutants)} mutants")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(pytest.main([__file__, "-v"]))
