from __future__ import annotations

from typing import Optional


class MiniObjError(Exception):
    """Base class for MiniObj load errors."""


class ParseError(MiniObjError):
    def __init__(self, message: str, line: int, col: int, expected: Optional[list[str]] = None):
        self.line = line
        self.col = col
        self.expected = list(expected or [])
        detail = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{detail}")


class TypeCheckError(MiniObjError):
    def __init__(self, message: str, nid: int = -1, line: int = 0, col: int = 0):
        self.nid = nid
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: node {nid}: {message}")


class DuplicateNameError(TypeCheckError):
    pass


class RunFailure(Exception):
    """A MiniObj execution that did not complete.

    ``kind`` is one of ``BudgetExceeded``, ``NullDeref``, ``DivByZero``,
    ``StackOverflow`` or ``MissingReturn``.
    """

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        self.detail = detail
        super().__init__(f"{kind}: {detail}" if detail else kind)
