from __future__ import annotations

import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specfuzz.asserteval import normalize, parse_assertion
from specfuzz.fuzzer import (MAX_NONTERMINALS, MAX_STEPS, DerivationAbort, DerivationStats, derive_one,
                             fuzz_candidates)
from specfuzz.grammar import START, Grammar, Recognizer, extract_grammar


@pytest.fixture(scope="module")
def slist_grammar(slist_program):
    return extract_grammar(slist_program, "SList", 2)


@pytest.fixture(scope="module")
def min_grammar(min_program):
    return extract_grammar(min_program, "MinOps", 2)


def test_single_production():
    g = Grammar(START, {START: [("true",)]})
    for seed in range(5):
        stats = DerivationStats()
        assert derive_one(g, seed, stats) == "true"
        assert stats.steps == 1


def test_two_string_language_exhausts(caplog):
    g = Grammar(START, {START: [("true",), ("false",)]})
    with caplog.at_level(logging.WARNING):
        res = fuzz_candidates(g, 2000, 0)
    assert sorted(res.candidates) == ["false", "true"]
    assert res.exhausted and res.attempts == 20_000
    assert "2 of 2000" in caplog.text


def test_runaway_grammar_aborts():
    # every alternative keeps a non-terminal, so no derivation can finish
    g = Grammar(START, {START: [("a", START)]})
    with pytest.raises(DerivationAbort) as err:
        derive_one(g, 0)
    assert err.value.steps == MAX_STEPS


def test_restricted_phase_picks_cheapest():
    # the wide alternative would exceed the bound; only 'x' stays under it
    wide = tuple(["<A>"] * (MAX_NONTERMINALS + 1))
    g = Grammar(START, {START: [wide, ("<A>",)], "<A>": [("x",)]})
    for seed in range(20):
        assert derive_one(g, seed) == "x"


def test_deterministic(slist_grammar):
    a = fuzz_candidates(slist_grammar, 300, 42)
    b = fuzz_candidates(slist_grammar, 300, 42)
    assert a.candidates == b.candidates
    assert fuzz_candidates(slist_grammar, 300, 43).candidates != a.candidates


def test_prefix_stable(min_grammar):
    # asking for fewer candidates yields a prefix of the longer run
    long = fuzz_candidates(min_grammar, 200, 7).candidates
    assert fuzz_candidates(min_grammar, 50, 7).candidates == long[:50]


def test_min_sample(min_grammar):
    res = fuzz_candidates(min_grammar, 2000, 1)
    assert len(res.candidates) <= 2000
    assert len(set(res.candidates)) == len(res.candidates)
    for text in res.candidates[:1000]:
        parse_assertion(text)


def test_accept_filter(min_grammar):
    res = fuzz_candidates(min_grammar, 100, 3, accept=lambda t: "result" in t)
    assert len(res.candidates) == 100
    assert all("result" in t for t in res.candidates)
    assert res.rejected and not any("result" in t for t in res.rejected)
    assert not set(res.candidates) & set(res.rejected)


def test_bad_n(min_grammar):
    with pytest.raises(ValueError):
        fuzz_candidates(min_grammar, 0, 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_derivation_bounds_and_membership(slist_grammar, seed):
    stats = DerivationStats()
    try:
        text = derive_one(slist_grammar, seed, stats)
    except DerivationAbort:
        assert stats.steps <= MAX_STEPS
        return
    assert stats.steps <= MAX_STEPS
    assert stats.max_nonterminals <= MAX_NONTERMINALS
    assert normalize(text) == text
    assert Recognizer(slist_grammar).accepts(text)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 150))
def test_unique_and_in_language(slist_grammar, seed, n):
    res = fuzz_candidates(slist_grammar, n, seed)
    assert len(res.candidates) == n
    assert len({normalize(t) for t in res.candidates}) == n
    rec = Recognizer(slist_grammar)
    assert all(rec.accepts(t) for t in res.candidates[:20])
