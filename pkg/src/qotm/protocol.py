"""Conjugate-coding one-time-memory protocol: keys, stateless token, honest receiver.

Conventions used throughout the package:

* Bit strings of length ``k`` are stored as Python ints read MSB-first, so the
  string ``b_1 b_2 ... b_k`` has integer value ``sum(b_i * 2**(k-i))``.  With
  this choice a measured string is directly the basis-state index of the
  corresponding ``k``-qubit register.
* The 2n-bit secret key ``z`` lists, per qubit ``i`` (1-indexed), first the
  basis bit (``0`` = rectilinear ``+``, ``1`` = diagonal ``x``) and then the
  value bit, i.e. ``z = theta_1 x_1 theta_2 x_2 ...``.
* A query string ``ytilde`` is the (n+1)-bit concatenation ``b . y`` with the
  choice bit ``b` in front (most significant).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

SQRT_HALF = 2.0 ** -0.5

# single-qubit states, keyed by tag
_STATES = {
    "0": np.array([1.0, 0.0]),
    "1": np.array([0.0, 1.0]),
    "+": np.array([SQRT_HALF, SQRT_HALF]),
    "-": np.array([SQRT_HALF, -SQRT_HALF]),
}


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; identical streams on every platform."""
    return np.random.Generator(np.random.Philox(seed))


class Symbol(IntEnum):
    """Token response alphabet: accepted / rejected 0- and 1-queries.

    The integer values double as the basis-state index of the 4-dimensional
    response registers used by :mod:`qotm.security_sdp`.
    """

    ACC0 = 0
    ACC1 = 1
    REJ0 = 2
    REJ1 = 3

    @property
    def accepted(self) -> bool:
        return self in (Symbol.ACC0, Symbol.ACC1)

    def render(self) -> str:
        # rejections render as "⊥" for humans; JSON keeps the symbol name
        return {Symbol.ACC0: "0", Symbol.ACC1: "1"}.get(self, "⊥")


@dataclass(frozen=True)
class SecretKey:
    """Classical secret ``z``: per-qubit basis mask and value mask (MSB = qubit 1)."""

    n: int
    theta: int  # bit set => diagonal basis for that qubit
    x: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        top = 1 << self.n
        if not (0 <= self.theta < top and 0 <= self.x < top):
            raise ValueError("masks out of range for n qubits")

    @classmethod
    def from_z(cls, z: str) -> "SecretKey":
        if len(z) % 2 or not z or set(z) - {"0", "1"}:
            raise ValueError("z must be a nonempty even-length bit string")
        n = len(z) // 2
        theta = int(z[0::2], 2)
        x = int(z[1::2], 2)
        return cls(n, theta, x)

    @property
    def z(self) -> str:
        bits = []
        for i in range(self.n):
            bits.append(str((self.theta >> (self.n - 1 - i)) & 1))
            bits.append(str((self.x >> (self.n - 1 - i)) & 1))
        return "".join(bits)

    @property
    def theta_str(self) -> str:
        return "".join(
            "x" if (self.theta >> (self.n - 1 - i)) & 1 else "+" for i in range(self.n)
        )

    @property
    def plus_mask(self) -> int:
        return ~self.theta & ((1 << self.n) - 1)

    def tags(self) -> tuple[str, ...]:
        out = []
        for i in range(self.n):
            diag = (self.theta >> (self.n - 1 - i)) & 1
            bit = (self.x >> (self.n - 1 - i)) & 1
            out.append(("+", "-")[bit] if diag else ("0", "1")[bit])
        return tuple(out)


@dataclass(frozen=True)
class QuantumKey:
    """Product-state quantum key; one tag per qubit from {0, 1, +, -}."""

    n: int
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.tags) != self.n:
            raise ValueError("tag list length must equal n")
        if set(self.tags) - set(_STATES):
            raise ValueError("tags must be drawn from {0, 1, +, -}")

    @classmethod
    def from_secret(cls, key: SecretKey) -> "QuantumKey":
        return cls(key.n, key.tags())

    def statevector(self) -> np.ndarray:
        """Dense 2**n statevector (materialised on demand; qubit 1 most significant)."""
        out = np.array([1.0])
        for tag in self.tags:
            out = np.kron(out, _STATES[tag])
        return out


@dataclass(frozen=True)
class Query:
    """Classical token query: choice bit b and an n-bit candidate string y."""

    b: int
    y: int
    n: int

    def __post_init__(self):
        if self.b not in (0, 1):
            raise ValueError("b must be 0 or 1")
        if not (0 <= self.y < (1 << self.n)):
            raise ValueError("y out of range")

    @property
    def ytilde(self) -> int:
        return (self.b << self.n) | self.y


@dataclass(frozen=True)
class ResponseSymbol:
    symbol: Symbol
    payload: int  # returned secret bit; 0 by convention on rejection


@dataclass(frozen=True)
class Token:
    """Stateless hardware token: a pure function of (z, s0, s1) and the query."""

    key: SecretKey
    s0: int
    s1: int

    def __post_init__(self):
        if self.s0 not in (0, 1) or self.s1 not in (0, 1):
            raise ValueError("secret bits must be 0 or 1")

    @property
    def n(self) -> int:
        return self.key.n

    def respond(self, q: Query) -> ResponseSymbol:
        return token_response(self, q)


def classify(key: SecretKey, ytilde: int) -> Symbol:
    """Response symbol for query string ``ytilde = b . y`` under secret key z."""
    n = key.n
    if not (0 <= ytilde < (1 << (n + 1))):
        raise ValueError("ytilde out of range for n+1 bits")
    b = ytilde >> n
    y = ytilde & ((1 << n) - 1)
    mism = y ^ key.x
    if b == 0:
        # all rectilinear positions must match x; vacuous checks accept
        return Symbol.ACC0 if (mism & key.plus_mask) == 0 else Symbol.REJ0
    return Symbol.ACC1 if (mism & key.theta) == 0 else Symbol.REJ1


def token_response(tok: Token, q: Query) -> ResponseSymbol:
    if q.n != tok.n:
        raise ValueError("query length does not match token")
    sym = classify(tok.key, q.ytilde)
    if sym == Symbol.ACC0:
        return ResponseSymbol(sym, tok.s0)
    if sym == Symbol.ACC1:
        return ResponseSymbol(sym, tok.s1)
    return ResponseSymbol(sym, 0)


def partition_sets(key: SecretKey) -> dict[Symbol, frozenset[int]]:
    """Partition of all (n+1)-bit query strings by their response symbol."""
    buckets: dict[Symbol, set[int]] = {s: set() for s in Symbol}
    for ytilde in range(1 << (key.n + 1)):
        buckets[classify(key, ytilde)].add(ytilde)
    return {s: frozenset(v) for s, v in buckets.items()}


def keygen(n: int, rng: np.random.Generator) -> tuple[SecretKey, QuantumKey]:
    """Uniform secret key z in {0,1}^{2n} plus the quantum key it determines."""
    if n < 1:
        raise ValueError("n must be >= 1")
    theta = int(rng.integers(0, 1 << n))
    x = int(rng.integers(0, 1 << n))
    key = SecretKey(n, theta, x)
    return key, QuantumKey.from_secret(key)


def honest_measure(qkey: QuantumKey, b: int, rng: np.random.Generator) -> int:
    """Measure every qubit in the Z (b=0) or X (b=1) basis; returns the n-bit string.

    Product states make this exact per-qubit sampling: a qubit whose tag lives
    in the measured basis yields its encoded bit deterministically, the other
    tags yield a uniform bit.
    """
    if b not in (0, 1):
        raise ValueError("b must be 0 or 1")
    n = qkey.n
    y = 0
    coins = rng.integers(0, 2, size=n)
    for i, tag in enumerate(qkey.tags):
        diag = tag in ("+", "-")
        bit = 1 if tag in ("1", "-") else 0
        if (b == 0 and not diag) or (b == 1 and diag):
            out = bit
        else:
            out = int(coins[i])
        y = (y << 1) | out
    return y


def run_honest(n: int, s0: int, s1: int, b: int, rng: np.random.Generator) -> int:
    """One full honest protocol run; returns the extracted secret bit s_b."""
    key, qkey = keygen(n, rng)
    tok = Token(key, s0, s1)
    y = honest_measure(qkey, b, rng)
    resp = tok.respond(Query(b, y, n))
    if not resp.symbol.accepted:
        raise AssertionError("honest run was rejected; this should be impossible")
    return resp.payload
