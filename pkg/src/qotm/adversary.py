"""Attack constructions against the token and against toy relaxations of it.

Two families live here:

* Monte-Carlo strategies against the real protocol (naive measurement reuse,
  Breidbart intermediate-basis measurement, and the brute-force break at
  n = 1).  These are constructive lower bounds that bracket the cheating
  probability computed by :mod:`qotm.security_sdp`.
* Statevector attacks against "measure-and-access" toy memories: coherent
  rewinding when the token is a reversible oracle, and the measure/rewind
  attack that succeeds with probability at least 1/Delta^2 when a secret bit
  has at most Delta valid keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import protocol
from .protocol import Query, SecretKey, Symbol, Token, keygen

# Per-qubit success probability of the Breidbart measurement in either basis.
BREIDBART_COS2 = (2.0 + math.sqrt(2.0)) / 4.0

# statevector work stays desk-scale
MAX_STATEVECTOR_QUBITS = 12

INVALID_KEY = 2  # key-map output marking an invalid key


@dataclass(frozen=True)
class AttackStats:
    """Empirical outcome of a repeated attack."""

    trials: int
    successes: int

    def __post_init__(self):
        if not (0 <= self.successes <= self.trials):
            raise ValueError("successes must lie in [0, trials]")

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.trials)


def naive_reuse_rate(n: int) -> float:
    """Exact success probability (3/4)^n of the measurement-reuse strategy."""
    return 0.75 ** n


def breidbart_rate(n: int) -> float:
    """Exact success probability cos^2(pi/8)^n of the Breidbart strategy."""
    return BREIDBART_COS2 ** n


def naive_reuse_attack(
    n: int, s0: int, s1: int, trials: int, rng: np.random.Generator
) -> AttackStats:
    """Measure all qubits in Z, query (0, y), then reuse the same y as (1, y).

    The first query always accepts; success means the second accepts too.
    Expected rate (3/4)^n: a rectilinear qubit is never checked by the second
    query, a diagonal qubit matches with probability 1/2.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    successes = 0
    for _ in range(trials):
        key, qkey = keygen(n, rng)
        tok = Token(key, s0, s1)
        y = protocol.honest_measure(qkey, 0, rng)
        first = protocol.token_response(tok, Query(0, y, n))
        if first.symbol is not Symbol.ACC0:
            raise AssertionError("Z-basis measurement must pass the 0-query")
        second = protocol.token_response(tok, Query(1, y, n))
        if second.symbol is Symbol.ACC1:
            successes += 1
    return AttackStats(trials, successes)


def breidbart_attack(
    n: int, s0: int, s1: int, trials: int, rng: np.random.Generator
) -> AttackStats:
    """Measure each qubit in the intermediate (Breidbart) basis, then query twice.

    The basis bisects Z and X, so the inferred bit is correct in *both* bases
    with probability cos^2(pi/8) per qubit; the same guessed string is
    submitted as a 0-query and as a 1-query.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    coins = rng.random((trials, n))
    successes = 0
    for t in range(trials):
        key, qkey = keygen(n, rng)
        tok = Token(key, s0, s1)
        y = 0
        for i, tag in enumerate(qkey.tags):
            p0 = BREIDBART_COS2 if tag in ("0", "+") else 1.0 - BREIDBART_COS2
            y = (y << 1) | (0 if coins[t, i] < p0 else 1)
        ok0 = protocol.token_response(tok, Query(0, y, n)).symbol is Symbol.ACC0
        ok1 = protocol.token_response(tok, Query(1, y, n)).symbol is Symbol.ACC1
        if ok0 and ok1:
            successes += 1
    return AttackStats(trials, successes)


def exhaust_attack_n1(
    s0: int, s1: int, trials: int, rng: np.random.Generator
) -> AttackStats:
    """Break the n = 1 construction with three queries.

    Measure the single qubit in Z and make an honest 0-query, then brute-force
    the only two candidate diagonal keys with two 1-queries.  Succeeds always.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    successes = 0
    for _ in range(trials):
        key, qkey = keygen(1, rng)
        tok = Token(key, s0, s1)
        y = protocol.honest_measure(qkey, 0, rng)
        r0 = protocol.token_response(tok, Query(0, y, 1))
        got0 = r0.payload if r0.symbol is Symbol.ACC0 else None
        got1 = None
        for cand in (0, 1):
            r1 = protocol.token_response(tok, Query(1, cand, 1))
            if r1.symbol is Symbol.ACC1:
                got1 = r1.payload
        if got0 == s0 and got1 == s1:
            successes += 1
    return AttackStats(trials, successes)


@dataclass(frozen=True)
class ToyMaInstance:
    """A measure-and-access memory with bounded key sets.

    ``f`` maps an n-bit measured key to the stored secret bit, or to
    ``INVALID_KEY`` off the key sets.  ``psi`` is the initial state handed to
    the receiver; the extraction unitaries satisfy the certainty property:
    ``U_i @ psi`` is supported on the valid keys of bit i.
    """

    n: int
    s0: int
    s1: int
    k0: tuple[int, ...]
    k1: tuple[int, ...]
    f: np.ndarray
    psi: np.ndarray
    u0: np.ndarray
    u1: np.ndarray

    @property
    def delta0(self) -> int:
        return len(self.k0)

    @property
    def delta1(self) -> int:
        return len(self.k1)


def make_toy_ma(
    n: int, delta0: int, delta1: int, s0: int, s1: int, rng: np.random.Generator
) -> ToyMaInstance:
    """Random toy instance: uniform superposition over K0, U0 = identity,
    U1 = a unitary completion mapping psi exactly onto the uniform
    superposition over K1."""
    if n < 1 or n > MAX_STATEVECTOR_QUBITS:
        raise ValueError(f"n must be in [1, {MAX_STATEVECTOR_QUBITS}]")
    if delta0 < 1 or delta1 < 1 or delta0 + delta1 > (1 << n):
        raise ValueError("need delta0, delta1 >= 1 with delta0 + delta1 <= 2**n")
    dim = 1 << n
    keys = rng.permutation(dim)
    k0 = tuple(sorted(int(k) for k in keys[:delta0]))
    k1 = tuple(sorted(int(k) for k in keys[delta0 : delta0 + delta1]))
    f = np.full(dim, INVALID_KEY, dtype=np.int64)
    f[list(k0)] = s0
    f[list(k1)] = s1
    psi = np.zeros(dim)
    psi[list(k0)] = 1.0 / math.sqrt(delta0)
    phi1 = np.zeros(dim)
    phi1[list(k1)] = 1.0 / math.sqrt(delta1)
    u0 = np.eye(dim)
    # Gram-Schmidt completion of the map psi -> phi1 into a full unitary:
    # random bases orthogonal to psi / phi1 are paired up column by column.
    u1 = _unitary_extension(psi, phi1, rng)
    return ToyMaInstance(n, s0, s1, k0, k1, f, psi, u0, u1)


def _orthonormal_completion(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Columns: v followed by an orthonormal basis of its complement."""
    dim = v.shape[0]
    m = np.empty((dim, dim))
    m[:, 0] = v
    m[:, 1:] = rng.standard_normal((dim, dim - 1))
    q, r = np.linalg.qr(m)
    # fix the signs so the first column is exactly +v
    q = q * np.where(np.diag(r) >= 0, 1.0, -1.0)
    return q


def _unitary_extension(
    src: np.ndarray, dst: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    qs = _orthonormal_completion(src, rng)
    qd = _orthonormal_completion(dst, rng)
    return qd @ qs.T


def bounded_key_attack(
    inst: ToyMaInstance, trials: int, rng: np.random.Generator
) -> AttackStats:
    """Measure-and-rewind attack: extract s0 honestly, undo U0, go for s1.

    Per trial: apply U0 and measure the key register (the result y' is a valid
    key for s0 by the certainty property), apply U0^dagger to the collapsed
    state, then U1, measure again and feed the result to f.  Success means the
    second call returns s1; the rate is at least 1/max(delta0, delta1)^2.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    first = inst.u0 @ inst.psi
    p_first = np.abs(first) ** 2
    p_first = p_first / p_first.sum()
    support = np.flatnonzero(p_first > 1e-15)
    if any(inst.f[k] != inst.s0 for k in support):
        raise ValueError("instance violates the certainty property for s0")
    # post-measurement state |y'> -> U1 U0^dagger |y'> ; second-round
    # distributions depend only on y', so precompute one per support point
    m = inst.u1 @ inst.u0.conj().T
    second_p = {int(k): np.abs(m[:, k]) ** 2 for k in support}
    draws1 = rng.choice(support, size=trials, p=p_first[support])
    coins = rng.random(trials)
    successes = 0
    for t in range(trials):
        yprime = int(draws1[t])
        if inst.f[yprime] != inst.s0:
            continue
        p2 = second_p[yprime]
        ysecond = int(np.searchsorted(np.cumsum(p2), coins[t]))
        if inst.f[min(ysecond, len(p2) - 1)] == inst.s1:
            successes += 1
    return AttackStats(trials, successes)


@dataclass(frozen=True)
class ReversibleOtmOracle:
    """XOR oracle |y>|b> -> |y>|b ^ f(y)> over a 2-bit answer register.

    Self-inverse on computational basis states; the 2-bit answer register
    accommodates the invalid-key marker.
    """

    f: np.ndarray

    def apply(self, state: np.ndarray, n: int, ans_width: int = 2) -> np.ndarray:
        """Apply the oracle on the (key, answer) front registers of `state`."""
        dim_key = 1 << n
        dim_ans = 1 << ans_width
        rest = state.size // (dim_key * dim_ans)
        t = state.reshape(dim_key, dim_ans, rest)
        out = np.empty_like(t)
        for y in range(dim_key):
            fy = int(self.f[y])
            perm = [b ^ fy for b in range(dim_ans)]
            out[y, perm, :] = t[y, :, :]
        return out.reshape(state.shape)


def rewind_attack(
    inst: ToyMaInstance, rng: np.random.Generator
) -> tuple[int, int, float]:
    """Coherent rewinding against a superposition-queryable reversible token.

    Runs A0 = O_f (U0 x I), copies the answer register transversally onto an
    external register, rewinds with A0^dagger, then runs A1.  Because honest
    extraction succeeds with certainty, the answer registers stay in product
    basis states and both bits come out deterministically.

    Returns (extracted s0, extracted s1, fidelity of the rewound state with
    the pre-attack state).
    """
    n = inst.n
    oracle = ReversibleOtmOracle(inst.f)
    dim_key, dim_ans = 1 << n, 4
    # registers: key (2^n) x answer (4) x external copy (4)
    state = np.zeros(dim_key * dim_ans * dim_ans)
    state.reshape(dim_key, dim_ans, dim_ans)[:, 0, 0] = inst.psi

    def apply_u(u, s):
        t = s.reshape(dim_key, dim_ans * dim_ans)
        return (u @ t).reshape(s.shape)

    def copy_answer(s):
        t = s.reshape(dim_key, dim_ans, dim_ans)
        out = np.empty_like(t)
        for a in range(dim_ans):
            perm = [e ^ a for e in range(dim_ans)]
            out[:, a, perm] = t[:, a, :]
        return out.reshape(s.shape)

    state = apply_u(inst.u0, state)
    state = oracle.apply(state, n)
    state = copy_answer(state)
    state = oracle.apply(state, n)  # self-inverse
    state = apply_u(inst.u0.conj().T, state)
    # the external register now holds |s0>; key x answer is back to the start
    target = np.zeros_like(state)
    target.reshape(dim_key, dim_ans, dim_ans)[:, 0, inst.s0] = inst.psi
    fidelity = float(abs(np.vdot(target, state)) ** 2)
    state = apply_u(inst.u1, state)
    state = oracle.apply(state, n)
    probs = np.abs(state.reshape(dim_key, dim_ans, dim_ans)) ** 2
    p_ans = probs.sum(axis=(0, 2))
    p_ext = probs.sum(axis=(0, 1))
    got1 = int(rng.choice(dim_ans, p=p_ans / p_ans.sum()))
    got0 = int(rng.choice(dim_ans, p=p_ext / p_ext.sum()))
    return got0, got1, fidelity
