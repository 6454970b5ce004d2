"""Shared exception root for the harness.

Every module defines its own specific exceptions; they all derive from
:class:`QobenchError` so callers (notably the CLI) can catch harness failures
without swallowing unrelated bugs.
"""


class QobenchError(Exception):
    """Base class for all errors raised by qobench."""
