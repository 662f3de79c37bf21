"""Walkthrough of the one-time-memory protocol on a stateless token.

The sender draws a 2n-bit secret key (a basis and a value bit per qubit),
prepares the matching conjugate-coding state, and hardcodes two secret bits
into a stateless checking token.  An honest receiver measures every qubit in
one basis and extracts exactly one of the two bits.
"""

from qotm.protocol import (
    Query,
    QuantumKey,
    SecretKey,
    Token,
    classify,
    honest_measure,
    keygen,
    make_rng,
    partition_sets,
    run_honest,
)

rng = make_rng(2024)

# --- key generation -------------------------------------------------------
key, qkey = keygen(4, rng)
print("secret key z  :", key.z)
print("bases         :", key.theta_str, "(+ = rectilinear, x = diagonal)")
print("values        :", format(key.x, f"0{key.n}b"))
print("state tags    :", " ".join(qkey.tags))

# --- the token ------------------------------------------------------------
token = Token(key, s0=1, s1=0)

# an honest receiver who wants s0 measures everything in the Z basis
y = honest_measure(qkey, b=0, rng=rng)
resp = token.respond(Query(0, y, key.n))
print(f"\nhonest 0-query with y={format(y, f'0{key.n}b')}: "
      f"{resp.symbol.name}, payload {resp.payload}")

# the same string will usually fail the 1-query: diagonal positions are coins
resp1 = token.respond(Query(1, y, key.n))
print(f"reusing y as a 1-query: {resp1.symbol.name} "
      f"({resp1.symbol.render()} in the response alphabet)")

# --- the four response sets ------------------------------------------------
sets = partition_sets(key)
print("\nquery-string partition sizes by response symbol:")
for sym, members in sets.items():
    print(f"  {sym.name:5s} ({sym.render()}): {len(members):3d} strings")
print("total =", sum(len(v) for v in sets.values()), "= 2^(n+1)")

# classify() is the payload-free view of the token used by the SDP builder
assert classify(key, Query(0, y, key.n).ytilde) is resp.symbol

# --- correctness, many runs -------------------------------------------------
for b in (0, 1):
    outs = {run_honest(8, 1, 0, b, rng) for _ in range(2000)}
    print(f"\n2000 honest runs with b={b}: outputs {outs} (expect {{{1 - b}}})")
