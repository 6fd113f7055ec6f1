"""MiniObj: the small object-oriented subject language analysed by specfuzz."""

from __future__ import annotations

from pathlib import Path

from . import ast
from .checker import check_program
from .errors import DuplicateNameError, MiniObjError, ParseError, RunFailure, TypeCheckError
from .interp import DEFAULT_BUDGET, Heap, Obj, Ref, Value, construct, run_method, wrap
from .parser import parse_source
from .printer import format_expr, format_program

__all__ = [
    "ast", "parse_program", "load_program", "format_program", "format_expr",
    "run_method", "construct", "Heap", "Obj", "Ref", "Value", "wrap", "DEFAULT_BUDGET",
    "MiniObjError", "ParseError", "TypeCheckError", "DuplicateNameError", "RunFailure",
]


def parse_program(source: str) -> ast.Program:
    """Parse and type-check MiniObj source."""
    return check_program(parse_source(source))


def load_program(path: str | Path) -> ast.Program:
    return parse_program(Path(path).read_text(encoding="utf-8"))
