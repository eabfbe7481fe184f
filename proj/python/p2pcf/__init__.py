"""Consequence finding over networks of propositional peers."""

from ._core import (
    Error,
    InputError,
    Network,
    ProtocolError,
    ResourceLimitError,
    entails,
    is_satisfiable,
    prime_implicates,
    rewritings,
)

__all__ = [
    "Error",
    "InputError",
    "Network",
    "ProtocolError",
    "ResourceLimitError",
    "entails",
    "is_satisfiable",
    "prime_implicates",
    "rewritings",
]
