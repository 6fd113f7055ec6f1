from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specfuzz.minilang import (DuplicateNameError, Heap, ParseError, RunFailure, TypeCheckError, ast, construct,
                               format_program, parse_program, run_method, wrap)
from specfuzz.minilang.interp import int_div, int_mod

from .conftest import FIXTURES

SENTINEL = 2**63 - 1

LOOP = """
class Loop {
    n: Int;
    init() { n = 0; }
    def spin(k: Int): Int {
        var i: Int = 0;
        while (true) {
            i = i + 1;
        }
        return i;
    }
    def count(k: Int): Int {
        var i: Int = 0;
        while (i < k) {
            i = i + 1;
        }
        return i;
    }
}
"""


def list_values(heap: Heap, ref) -> list[int]:
    out = []
    while ref is not None:
        obj = heap.get(ref)
        out.append(obj.fields["elem"])
        ref = obj.fields["next"]
    return out


class TestParse:
    def test_min_has_one_static_method(self, min_program):
        assert [c.name for c in min_program.classes] == ["MinOps"]
        (m,) = min_program.cls("MinOps").methods
        assert (m.name, m.static, m.ret) == ("min", True, "Int")
        assert [(p.name, p.type) for p in m.params] == [("x", "Int"), ("y", "Int")]

    def test_empty_source(self):
        assert parse_program("").classes == []

    def test_slist_recursive_field(self, slist_program):
        decl = slist_program.cls("SList")
        assert decl.field_type("next") == "SList"
        assert decl.recursive_fields() == ["next"]
        assert slist_program.constants() == {"SENTINEL": SENTINEL}

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_program("class A {\n  x: Int\n}")
        assert err.value.line == 3 and err.value.expected == [";"]

    def test_type_error_names_node(self):
        with pytest.raises(TypeCheckError) as err:
            parse_program("class A { def f(): Int { return true; } }")
        assert err.value.nid >= 0

    def test_unknown_type(self):
        with pytest.raises(TypeCheckError):
            parse_program("class A { x: Nope; }")

    @pytest.mark.parametrize("src", [
        "class A { x: Int; x: Bool; }",
        "class A { def f(a: Int, a: Int): Void { } }",
        "class A { } class A { }",
    ])
    def test_duplicate_names(self, src):
        with pytest.raises(DuplicateNameError):
            parse_program(src)

    def test_node_ids_are_preorder(self, slist_program):
        ids = [n.nid for n in ast.walk(slist_program)]
        assert ids == list(range(len(ids)))

    @pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("*.mo")))
    def test_print_round_trip(self, name):
        once = format_program(parse_program((FIXTURES / name).read_text()))
        assert format_program(parse_program(once)) == once


class TestRun:
    def test_min(self, min_program):
        assert run_method(min_program, None, "min", [3, 7], Heap(), 10_000, cls="MinOps")[0] == 3

    def test_slist_insert_into_empty(self, slist_program):
        ref, heap = construct(slist_program, "SList", [], Heap())
        _, heap = run_method(slist_program, ref, "insert", [5], heap)
        # hand-simulated: data <= SENTINEL, so the head becomes 5 and the old
        # sentinel moves to a fresh second node
        assert list_values(heap, ref) == [5, SENTINEL]

    def test_slist_keeps_order(self, slist_program):
        ref, heap = construct(slist_program, "SList", [], Heap())
        for v in (10, 5, 7):
            _, heap = run_method(slist_program, ref, "insert", [v], heap)
        assert list_values(heap, ref) == [5, 7, 10, SENTINEL]

    def test_budget_exceeded(self):
        p = parse_program(LOOP)
        ref, heap = construct(p, "Loop", [], Heap())
        with pytest.raises(RunFailure) as err:
            run_method(p, ref, "spin", [0], heap, 10_000)
        assert err.value.kind == "BudgetExceeded"

    def test_null_deref(self):
        p = parse_program("class N { next: N; init() { next = null; } def f(): Int { return next.f(); } }")
        ref, heap = construct(p, "N", [], Heap())
        with pytest.raises(RunFailure) as err:
            run_method(p, ref, "f", [], heap)
        assert err.value.kind == "NullDeref"

    def test_div_by_zero(self):
        p = parse_program("class D { static def f(a: Int): Int { return 1 / a; } }")
        with pytest.raises(RunFailure) as err:
            run_method(p, None, "f", [0], Heap(), cls="D")
        assert err.value.kind == "DivByZero"

    def test_input_heap_untouched(self, slist_program):
        ref, heap = construct(slist_program, "SList", [], Heap())
        before = {k: (o.cls, dict(o.fields)) for k, o in heap.objects.items()}
        run_method(slist_program, ref, "insert", [1], heap)
        assert {k: (o.cls, dict(o.fields)) for k, o in heap.objects.items()} == before


class TestArithmetic:
    def test_wrap(self):
        assert wrap(2**63) == -(2**63)
        assert wrap(-(2**63) - 1) == 2**63 - 1

    @pytest.mark.parametrize("a,b,q,r", [(7, 2, 3, 1), (-7, 2, -3, -1), (7, -2, -3, 1), (-7, -2, 3, -1)])
    def test_truncating_division(self, a, b, q, r):
        assert (int_div(a, b), int_mod(a, b)) == (q, r)

    @given(st.integers(-(2**63), 2**63 - 1), st.integers(-(2**63), 2**63 - 1).filter(bool))
    def test_div_mod_identity(self, a, b):
        assert wrap(int_div(a, b) * b + int_mod(a, b)) == a


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=6))
def test_run_is_deterministic(slist_program, values):
    def go():
        ref, heap = construct(slist_program, "SList", [], Heap())
        for v in values:
            _, heap = run_method(slist_program, ref, "insert", [v], heap)
        return {k: (o.cls, dict(o.fields)) for k, o in heap.objects.items()}
    assert go() == go()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 40), st.integers(1, 4000))
def test_budget_monotonicity(k, budget):
    p = parse_program(LOOP)
    ref, heap = construct(p, "Loop", [], Heap())
    try:
        small = run_method(p, ref, "count", [k], heap, budget)[0]
    except RunFailure:
        return
    for bigger in (budget + 1, budget * 2, 10_000):
        assert run_method(p, ref, "count", [k], heap, bigger)[0] == small
