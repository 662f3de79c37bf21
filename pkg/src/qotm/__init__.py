"""qotm: conjugate-coding one-time memories from a stateless token, with the
full semidefinite-programming security analysis and attack simulations at
desk scale."""

from .protocol import (
    Query,
    QuantumKey,
    ResponseSymbol,
    SecretKey,
    Symbol,
    Token,
    classify,
    honest_measure,
    keygen,
    make_rng,
    partition_sets,
    run_honest,
    token_response,
)

__version__ = "0.1.0"

__all__ = [
    "Query",
    "QuantumKey",
    "ResponseSymbol",
    "SecretKey",
    "Symbol",
    "Token",
    "classify",
    "honest_measure",
    "keygen",
    "make_rng",
    "partition_sets",
    "run_honest",
    "token_response",
    "__version__",
]
