from __future__ import annotations

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from specfuzz.asserteval import (AssertionSyntaxError, AssertionTypeError, BinOp, BoolConst, Counterexample,
                                 DomainTooLarge, Equivalent, IntConst, IntDomain, ListDomain, Not, Quant, Var,
                                 bounded_equiv, context_for, entails, evaluate, format_assertion, normalize,
                                 parse_assertion, subterms, type_of)
from specfuzz.asserteval.simplify import simplify, total, trivial
from specfuzz.fuzzer import DerivationAbort, derive_one
from specfuzz.grammar import extract_grammar
from specfuzz.minilang.interp import Ref
from specfuzz.statecap import ExecutionRecord, SnapObject, Snapshot, record_execution, trace_case
from specfuzz.testgen import generate_suite

SENTINEL = 2**63 - 1
SORTED = "all SList l: reach(this, next).has(l) ==> l.elem <= l.next.elem"
SORTED_DUAL = "!(exists SList l: reach(this, next).has(l) && l.elem > l.next.elem)"
HAS_SENTINEL = "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL"

FIXTURE_ASSERTIONS = [
    "all SList l: reach(this, next).has(l) ==> l.elem == old(l.elem)",
    "true",
    "(result == x || result == y) && (result <= x) && (result <= y)",
    SORTED, SORTED_DUAL, HAS_SENTINEL,
    "exists SList l: reach(this, next).has(l) && l.elem == data",
    "x >= y || x <= y",
    "!(this.next.elem - 1 * data >= old(this.elem)) xor -1 < SENTINEL",
    "reach(this.next, next).has(old(this.next)) ==> this.next != null",
    "(x < y) <==> (result == x)",
    "-x % 1 == 0",
]


@pytest.fixture(scope="module")
def slist_records(slist_program):
    suite = generate_suite(slist_program, "SList", 60, seed=11)
    out = []
    for i, case in enumerate(suite.cases):
        recs, _ = trace_case(slist_program, "SList", case.ctor_args, case.call_pairs(), ("insert",), test=i)
        out.extend(recs)
    return out


@pytest.fixture(scope="module")
def slist_grammar(slist_program):
    return extract_grammar(slist_program, "SList", 2)


def min_record(x: int, y: int, result: int) -> ExecutionRecord:
    args = {"x": x, "y": y}
    return ExecutionRecord("MinOps", "min", Snapshot(args, {}), args, Snapshot({**args, "result": result}, {}),
                           result, True)


def two_node_list() -> ExecutionRecord:
    objs = {1: SnapObject("SList", {"elem": 5, "next": Ref(2)}),
            2: SnapObject("SList", {"elem": SENTINEL, "next": None})}
    snap = Snapshot({"this": Ref(1), "data": 5}, objs, {"SENTINEL": SENTINEL})
    return ExecutionRecord("SList", "insert", snap, {"data": 5}, snap)


class MinRecords:
    """Real executions of min over a square of inputs."""

    def __init__(self, program, lo: int, hi: int):
        self.records = [record_execution(program, "MinOps", [], [], ("min", [x, y]))
                        for x in range(lo, hi + 1) for y in range(lo, hi + 1)]
        self.shape = (frozenset({"x", "y", "result"}), frozenset())

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


class TestParse:
    def test_universal(self):
        a = parse_assertion(FIXTURE_ASSERTIONS[0])
        assert isinstance(a, Quant) and a.quantifier == "all" and a.type == "SList" and a.var == "l"

    def test_bool_literal(self):
        assert parse_assertion("true") == BoolConst(True)

    def test_min_postcondition_is_conjunction(self):
        a = parse_assertion(FIXTURE_ASSERTIONS[2])
        assert isinstance(a, BinOp) and a.op == "&&"

    @pytest.mark.parametrize("text", FIXTURE_ASSERTIONS)
    def test_round_trip(self, text):
        once = format_assertion(parse_assertion(text))
        assert format_assertion(parse_assertion(once)) == once
        assert parse_assertion(once) == parse_assertion(text)

    def test_normalize_whitespace(self):
        assert normalize("reach( this ,next ).has( l )") == "reach(this, next).has(l)"

    @pytest.mark.parametrize("text", ["old(this.elem", "all SList: true", "x ==", "1 2"])
    def test_syntax_errors(self, text):
        with pytest.raises(AssertionSyntaxError):
            parse_assertion(text)

    @pytest.mark.parametrize("text", [
        "old(old(this.elem)) == 1",
        "reach(this, next).has(data)",
        "this.elem + true == 1",
        "x == 1",
        "exists Foo l: true",
    ])
    def test_type_errors(self, slist_program, text):
        with pytest.raises(AssertionTypeError):
            type_of(parse_assertion(text), context_for(slist_program, "SList", "insert"))


class TestEvaluate:
    def test_min_record(self):
        assert evaluate(parse_assertion("x >= result"), min_record(3, 7, 3)).status == "True"

    def test_sentinel_on_insert_records(self, slist_records):
        a = parse_assertion(HAS_SENTINEL)
        assert slist_records
        for rec in slist_records:
            # oracle: walk the list by hand
            ref, seen = rec.post.roots["this"], []
            while ref is not None:
                seen.append(rec.post.get(ref).fields["elem"])
                ref = rec.post.get(ref).fields["next"]
            assert SENTINEL in seen
            assert evaluate(a, rec).status == "True"

    def test_null_path(self):
        out = evaluate(parse_assertion("this.next.next.elem == 0"), two_node_list())
        assert (out.status, out.kind) == ("Error", "NullDeref")
        assert out.text == "this.next.next.elem"

    def test_div_by_zero(self):
        out = evaluate(parse_assertion("x / (y - y) == 0"), min_record(1, 2, 1))
        assert (out.status, out.kind) == ("Error", "DivByZero")

    def test_unknown_symbol(self):
        out = evaluate(parse_assertion("data > 0"), min_record(1, 2, 1))
        assert (out.status, out.kind) == ("Error", "UnknownSymbol")

    def test_old_reads_pre_state(self, slist_program):
        rec = record_execution(slist_program, "SList", [], [("insert", [4])], ("insert", [2]))
        assert evaluate(parse_assertion("old(this.elem) == 4 && this.elem == 2"), rec).status == "True"

    def test_implication_short_circuits(self):
        rec = two_node_list()
        assert evaluate(parse_assertion("this.elem > 9 ==> this.next.next.elem == 0"), rec).status == "True"
        assert evaluate(parse_assertion("this.elem < 9 ==> this.next.next.elem == 0"), rec).status == "Error"

    def test_xor_is_strict(self):
        out = evaluate(parse_assertion("true xor this.next.next.elem == 0"), two_node_list())
        assert out.status == "Error"

    def test_faulting_binding_is_skipped(self):
        # l.next.elem faults on the sentinel node; the other binding decides
        rec = two_node_list()
        assert evaluate(parse_assertion(SORTED), rec).status == "True"
        assert evaluate(parse_assertion("exists SList l: reach(this, next).has(l) && l.next.elem == 5"),
                        rec).status == "False"

    def test_wrapping_arithmetic(self):
        assert evaluate(parse_assertion("result + 1 < result"), min_record(0, 0, SENTINEL)).status == "True"


class TestEquivalence:
    def test_sortedness_dual(self):
        dom = ListDomain("SList", "insert", "elem", "next", 4, [0, 1, 2, 3], constants={"SENTINEL": SENTINEL})
        res = bounded_equiv(parse_assertion(SORTED), parse_assertion(SORTED_DUAL), dom)
        assert isinstance(res, Equivalent) and res.checked == len(dom)

    def test_tautology(self):
        r = range(-5, 6)
        res = bounded_equiv(parse_assertion("x >= y || x <= y"), parse_assertion("true"),
                            IntDomain("MinOps", "min", {"x": r, "y": r}))
        assert res and res.checked == 121

    def test_strict_vs_nonstrict(self, min_program):
        res = bounded_equiv(parse_assertion("result <= x"), parse_assertion("result < x"),
                            MinRecords(min_program, -3, 3))
        assert isinstance(res, Counterexample) and not res
        # exhaustive oracle: the strict form fails exactly when result == x
        assert res.record.result == res.record.args["x"]
        assert res.left and not res.right

    def test_cap(self):
        r = range(100)
        with pytest.raises(DomainTooLarge):
            bounded_equiv(BoolConst(True), BoolConst(True), IntDomain("C", "m", {"a": r, "b": r}), cap=50)

    def test_entails(self):
        r = range(-4, 5)
        dom = IntDomain("MinOps", "min", {"x": r, "y": r}, result=r)
        gt = [parse_assertion(t) for t in ("result == x || result == y", "result <= x", "result <= y")]
        full = [parse_assertion(FIXTURE_ASSERTIONS[2])]
        assert entails(full, gt, dom) == [None, None, None]
        weak = entails([parse_assertion("result <= x"), parse_assertion("result <= y")], gt, dom)
        assert weak[0] is not None and weak[1:] == [None, None]


class TestSimplify:
    @pytest.mark.parametrize("text", ["x >= y || x <= y", SORTED, "result <= x", "this.next.elem == this.next.elem"])
    def test_not_trivial(self, text):
        assert not trivial(parse_assertion(text), {"SENTINEL": SENTINEL})

    @pytest.mark.parametrize("text", [
        "0 < SENTINEL", "this != null", "1 + 1 == 2", "x == x", "!(result != result)",
        "all SList l: reach(this, next).has(l) ==> l.next.elem <= l.next.elem",
        "x * 0 == 0 || y > 1",
    ])
    def test_trivial(self, text):
        assert trivial(parse_assertion(text), {"SENTINEL": SENTINEL})

    def test_keeps_faulting_self_comparison(self):
        a = parse_assertion("this.next.elem == this.next.elem")
        assert not total(a.left)
        assert simplify(a) == a

    def test_constant_shadowed_by_binder(self):
        a = parse_assertion("exists SList SENTINEL: reach(this, next).has(SENTINEL) && SENTINEL != null")
        s = simplify(a, {"SENTINEL": 3})
        assert isinstance(s, Quant)
        assert Var("SENTINEL") in set(subterms(s))
        assert IntConst(3) not in set(subterms(s))


def random_assertion(grammar, seed: int):
    try:
        return parse_assertion(derive_one(grammar, seed))
    except DerivationAbort:
        return None


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_simplify_preserves_outcome(slist_grammar, slist_records, seed, pick):
    a = random_assertion(slist_grammar, seed)
    assume(a is not None)
    rec = slist_records[pick % len(slist_records)]
    s = simplify(a, rec.post.constants)
    assert evaluate(a, rec).holds == evaluate(s, rec).holds


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6), st.sampled_from(["reach(this, next)", "reach(this.next, next)"]))
def test_quantifier_duality(slist_grammar, slist_records, seed, pick, domain):
    body = random_assertion(slist_grammar, seed)
    assume(body is not None and not isinstance(body, Quant))
    rec = slist_records[pick % len(slist_records)]
    guard = f"{domain}.has(l) ==> "
    body_text = format_assertion(body)
    # the quantified variable is used through the guard and an extra test
    lhs = parse_assertion(f"all SList l: {guard}(l.elem <= l.next.elem || ({body_text}))")
    rhs = parse_assertion(f"!(exists SList l: !({guard}(l.elem <= l.next.elem || ({body_text}))))")
    a, b = evaluate(lhs, rec), evaluate(rhs, rec)
    if "Error" not in (a.status, b.status):
        assert a.status == b.status


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_short_circuit(slist_grammar, slist_records, seed, pick):
    e = random_assertion(slist_grammar, seed)
    assume(e is not None)
    rec = slist_records[pick % len(slist_records)]
    text = format_assertion(e)
    assert evaluate(parse_assertion(f"false && ({text})"), rec).status == "False"
    assert evaluate(parse_assertion(f"true || ({text})"), rec).status == "True"
    assert evaluate(parse_assertion(f"false ==> ({text})"), rec).status == "True"
    assert evaluate(Not(Not(e)), rec) == evaluate(e, rec)
