from __future__ import annotations

import json

import pytest

from specfuzz.asserteval import context_for, parse_assertion, type_of
from specfuzz.fuzzer import DerivationAbort, derive_one
from specfuzz.grammar import (START, Grammar, Recognizer, UnknownClass, base_grammar, extract_grammar, is_nonterminal,
                              productive_symbols, prune, reachable_symbols, undefined_symbols, validate)

SLIST_EXAMPLE = "exists SList l: reach(this, next).has(l) && l.elem == SENTINEL"


@pytest.fixture(scope="module")
def slist_grammar(slist_program):
    return extract_grammar(slist_program, "SList", 2)


@pytest.fixture(scope="module")
def min_grammar(min_program):
    return extract_grammar(min_program, "MinOps", 2)


def terminal_texts(g: Grammar, nt: str) -> set[str]:
    return {a[0] for a in g.productions.get(nt, []) if len(a) == 1 and not is_nonterminal(a[0])}


class TestBase:
    def test_start_symbol(self):
        assert base_grammar().start == "<FuzzedSpec>" == START

    def test_numeric_comparison(self):
        assert base_grammar().has_alternative("<NumCmpExpr>", ["<NumExpr>", "<NumCmpOp>", "<NumExpr>"])

    def test_operator_pools(self):
        g = base_grammar()
        assert terminal_texts(g, "<NumCmpOp>") == {"==", "!=", ">", "<", "<=", ">="}
        assert terminal_texts(g, "<NumBinOp>") == {"+", "-", "*", "/", "%"}
        assert terminal_texts(g, "<LogicOp>") == {"||", "xor", "==>", "<==>"}
        assert terminal_texts(g, "<Quantifier>") == {"all", "exists"}

    def test_class_independent(self):
        assert base_grammar().typed_terminals() == []


class TestExtract:
    def test_slist_derives_example(self, slist_grammar):
        assert Recognizer(slist_grammar).accepts(SLIST_EXAMPLE)

    def test_slist_int_terminals(self, slist_grammar):
        ints = {t.text for t in slist_grammar.typed_terminals() if t.type == "Int"}
        # by hand: Int navigations of depth <= 2 from this, their old()
        # wrappings, the parameter and the constant
        assert {"this.elem", "this.next.elem", "old(this.elem)", "old(this.next.elem)", "data",
                "SENTINEL"} <= ints
        assert "result" not in ints  # insert returns nothing

    def test_slist_constants(self, slist_grammar):
        assert slist_grammar.constants == {"SENTINEL": 2**63 - 1}
        assert terminal_texts(slist_grammar, "<NumConst>") == {"-1", "0", "1", "SENTINEL"}

    def test_min_is_pruned(self, min_grammar):
        assert terminal_texts(min_grammar, "<NumVar>") == {"x", "y", "result"}
        assert "<QuantifiedExpr>" not in min_grammar.productions
        assert "<MembershipExpr>" not in min_grammar.productions
        assert min_grammar.productions[START] == [("<BooleanExpr>",)]

    def test_unknown_class(self, min_program):
        with pytest.raises(UnknownClass):
            extract_grammar(min_program, "Nope", 2)

    @pytest.mark.parametrize("name", ["slist_grammar", "min_grammar"])
    def test_well_formed(self, name, request):
        g = request.getfixturevalue(name)
        validate(g)
        assert not undefined_symbols(g)
        assert set(g.productions) == productive_symbols(g) == reachable_symbols(g)

    def test_json_round_trip(self, slist_grammar):
        back = Grammar.from_json(json.loads(slist_grammar.dumps()))
        assert back == slist_grammar

    def test_prune_drops_useless(self):
        g = Grammar(START, {START: [("<A>",), ("'x'",)], "<A>": [("<A>",)], "<B>": [("y",)]})
        assert set(prune(g).productions) == {START}

    def test_depth_inclusion(self, slist_program):
        for d in (1, 2):
            small, big = extract_grammar(slist_program, "SList", d), extract_grammar(slist_program, "SList", d + 1)
            for nt, alts in small.productions.items():
                assert set(alts) <= set(big.productions[nt]), nt

    def test_terminals_type_check(self, slist_program, slist_grammar):
        ctx = context_for(slist_program, "SList", "insert")
        for t in slist_grammar.typed_terminals():
            if t.provenance == "quantified-variable":
                inner = f"{t.text} == {t.text}" if t.type == "Int" else f"{t.text} == null"
                text = f"exists SList l: reach(this, next).has(l) && {inner}"
                assert type_of(parse_assertion(text), ctx) == "Bool"
            else:
                assert type_of(parse_assertion(t.text), ctx) == t.type, t.text


def test_fuzzed_sample_parses(slist_grammar, min_grammar):
    for g in (slist_grammar, min_grammar):
        done = 0
        for seed in range(3000):
            try:
                text = derive_one(g, seed)
            except DerivationAbort:
                continue
            parse_assertion(text)
            done += 1
            if done == 1000:
                break
        assert done == 1000
