"""Shared error type.

Every hard failure in the toolchain raises StackError carrying a stable,
grep-able code (E-IO, E-SCHEMA, E-CYCLE, ...). The CLI maps any StackError
to exit code 1; recoverable findings travel as Diagnostic values instead.
"""


class StackError(Exception):
    def __init__(self, code: str, message: str, path: str | None = None):
        self.code = code
        self.message = message
        self.path = path  # JSON-pointer-ish location for file/schema errors
        detail = f"{code}: {message}"
        if path:
            detail += f" (at {path})"
        super().__init__(detail)
