"""The assertion language: parsing, typing, evaluation and bounded equivalence."""

from .equiv import (Counterexample, DomainTooLarge, Equivalent, IntDomain, ListDomain, bounded_equiv, entails,
                    needs_pre_variation)
from .evaluator import FALSE, TRUE, CompiledAssertion, EvalOutcome, evaluate
from .syntax import (AssertionSyntaxError, BinOp, BoolConst, Expr, Has, IntConst, Nav, Neg, Not, Null, Old,
                     Quant, Reach, Var, format_assertion, normalize, parse_assertion, subterms, tokenize,
                     uses_old)
from .typecheck import AssertionTypeError, TypeContext, check_assertion, context_for, type_of

__all__ = [
    "parse_assertion", "format_assertion", "normalize", "tokenize", "evaluate", "CompiledAssertion",
    "EvalOutcome", "TRUE", "FALSE", "bounded_equiv", "entails", "Equivalent", "Counterexample",
    "DomainTooLarge", "IntDomain", "ListDomain", "needs_pre_variation", "AssertionSyntaxError",
    "AssertionTypeError", "TypeContext", "context_for", "check_assertion", "type_of", "subterms", "uses_old",
    "BinOp", "BoolConst", "Expr", "Has", "IntConst", "Nav", "Neg", "Not", "Null", "Old", "Quant", "Reach", "Var",
]
