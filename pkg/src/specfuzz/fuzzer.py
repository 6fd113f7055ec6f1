"""Generative grammar-based fuzzing of candidate assertions.

Derivations expand the leftmost non-terminal. An alternative is chosen
uniformly among those that keep the string at no more than
``MAX_NONTERMINALS`` non-terminals; when none does, the choice is restricted
to the alternatives introducing the fewest. A derivation that takes more
than ``MAX_STEPS`` expansions is abandoned.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .asserteval.syntax import normalize
from .grammar import Grammar, is_nonterminal

log = logging.getLogger(__name__)

MAX_NONTERMINALS = 5
MAX_STEPS = 100


class DerivationAbort(Exception):
    def __init__(self, reason: str, steps: int):
        self.reason = reason
        self.steps = steps
        super().__init__(f"{reason} after {steps} steps")


@dataclass
class DerivationStats:
    """Filled in by :func:`derive_one` when passed; used to audit the bounds."""

    steps: int = 0
    max_nonterminals: int = 0


class _Compiled:
    """Per-grammar lookup tables: alternatives with their non-terminal counts."""

    def __init__(self, g: Grammar):
        self.start = g.start
        self.table = {nt: [(alt, sum(1 for s in alt if is_nonterminal(s))) for alt in alts]
                      for nt, alts in g.productions.items()}


_compiled_cache: dict[int, tuple[Grammar, _Compiled]] = {}


def _compiled(g: Grammar) -> _Compiled:
    hit = _compiled_cache.get(id(g))
    if hit is None or hit[0] is not g:
        hit = (g, _Compiled(g))
        _compiled_cache[id(g)] = hit
    return hit[1]


def derive_one(grammar: Grammar, seed: int | random.Random, stats: Optional[DerivationStats] = None) -> str:
    """One derivation from the start symbol; returns normalized assertion text.

    Raises :class:`DerivationAbort` when the step limit is hit or no
    alternative keeps the non-terminal count within bounds.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    c = _compiled(grammar)
    table = c.table
    symbols: list[str] = [c.start]
    pending = 1  # non-terminals in symbols
    steps = 0
    pos = 0  # everything left of pos is terminal
    peak = 1
    while pending:
        if steps >= MAX_STEPS:
            raise DerivationAbort("step limit", steps)
        while not is_nonterminal(symbols[pos]):
            pos += 1
        options = table[symbols[pos]]
        allowed = [o for o in options if pending - 1 + o[1] <= MAX_NONTERMINALS]
        if not allowed:
            fewest = min(o[1] for o in options)
            if pending - 1 + fewest > MAX_NONTERMINALS:
                raise DerivationAbort("non-terminal limit", steps)
            allowed = [o for o in options if o[1] == fewest]
        alt, k = allowed[rng.randrange(len(allowed))] if len(allowed) > 1 else allowed[0]
        symbols[pos:pos + 1] = alt
        pending += k - 1
        steps += 1
        peak = max(peak, pending)
    if stats is not None:
        stats.steps = steps
        stats.max_nonterminals = peak
    return normalize(" ".join(symbols))


@dataclass
class FuzzResult:
    candidates: list[str]
    attempts: int
    aborted: int
    exhausted: bool  # fewer than n unique candidates were found
    seed: int = 0
    duplicates: int = field(default=0)
    rejected: list[str] = field(default_factory=list)  # unique derivations refused by ``accept``


def fuzz_candidates(grammar: Grammar, n: int, seed: int, max_attempts: Optional[int] = None,
                    accept: Optional[Callable[[str], bool]] = None) -> FuzzResult:
    """Up to ``n`` unique candidates in generation order.

    Each derivation draws its own seed from a master generator, so the output
    is a pure function of the arguments. A new derivation for which
    ``accept`` returns False is recorded as rejected and not counted.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if max_attempts is None:
        max_attempts = 10 * n
    master = random.Random(seed)
    seen: set[str] = set()
    out: list[str] = []
    rejected: list[str] = []
    attempts = aborted = dups = 0
    while len(out) < n and attempts < max_attempts:
        attempts += 1
        try:
            text = derive_one(grammar, random.Random(master.getrandbits(64)))
        except DerivationAbort:
            aborted += 1
            continue
        if text in seen:
            dups += 1
            continue
        seen.add(text)
        if accept is not None and not accept(text):
            rejected.append(text)
            continue
        out.append(text)
    exhausted = len(out) < n
    if exhausted:
        log.warning("fuzzer produced %d of %d candidates in %d attempts", len(out), n, attempts)
    return FuzzResult(out, attempts, aborted, exhausted, seed, dups, rejected)
