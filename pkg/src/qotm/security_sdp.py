"""Security analysis of the token as a semidefinite program.

The m-query interaction between a cheating receiver and the stateless token is
captured by one operator Q1 that "accepts" exactly when the receiver managed
to extract both secret bits.  Everything downstream of the protocol lives
here:

* the success alphabet: response strings t with at least one accepted 0-query
  and one accepted 1-query, and their count ``|T| = 4^m - 2*3^m + 2^m``;
* the consistency relation R of triples (t, query sequence, secret key),
  counted both by brute-force enumeration and by a closed-form
  inclusion-exclusion sum evaluated in exact rational arithmetic;
* Q1 itself, assembled by simulating the token over every (query sequence,
  key) pair and stored as classically-labelled Hermitian blocks on the
  key register (it is never materialised as one dense matrix);
* closed-form feasible solutions of the cheating SDP -- the p = 1 chain and
  the block-uniform chain whose objective is |T| * 2^(1-n) * (1 + 1/sqrt(2))^n
  -- with residual verifiers for the full constraint chain;
* the uniform dual solution with exact objective beta = |R| / (4^n d^m);
* builders that lower the streamlined primal/dual programs into
  :class:`qotm.solver.SdpInstance` form for the numeric solver.

Register layout convention (fixed once for the whole package): message
registers Y_1..Y_m of dimension d = 2^(n+1) first, then the key register X_1
of dimension 2^n, then the response registers X_2..X_{m+1}.  A response
register holds one symbol of the 4-letter alphabet; the secret bit the token
attaches to a response is a function of the symbol once (s0, s1) are fixed, so
dimension 4 is enough (``full_labels`` widens it to 8 to check exactly that).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import solver as sdp
from .linalg import RegisterLayout
from .protocol import QuantumKey, SecretKey, Symbol, classify

# enumeration stays desk-scale: 4^n * 2^(m(n+1)) table entries
MAX_ENUM_N = 3
MAX_ENUM_M = 3
MAX_T_ENUM_M = 8


class SizeCapError(ValueError):
    """Raised when an enumeration would exceed the desk-scale caps."""


Label = tuple[tuple[int, ...], tuple[int, ...]]  # (response labels, query labels)


def _check_enum_caps(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if n > MAX_ENUM_N or m > MAX_ENUM_M:
        raise SizeCapError(f"enumeration capped at n <= {MAX_ENUM_N}, m <= {MAX_ENUM_M}")


@dataclass(frozen=True)
class InteractionLayout:
    """Dimensions of the interaction registers for an (n, m) instance."""

    n: int
    m: int

    @property
    def d(self) -> int:
        return 1 << (self.n + 1)

    @property
    def x1_dim(self) -> int:
        return 1 << self.n

    @property
    def response_dim(self) -> int:
        return 4


def cardinality_T(m: int) -> int:
    """Number of m-letter response strings containing both an accepted 0 and 1.

    Inclusion-exclusion over the strings missing one (or both) of the accepted
    symbols: ``4^m - 2*3^m + 2^m``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    return 4**m - 2 * 3**m + 2**m


def enumerate_T(m: int) -> list[tuple[int, ...]]:
    """All successful response strings, as tuples of Symbol values."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > MAX_T_ENUM_M:
        raise SizeCapError(f"enumerate_T capped at m <= {MAX_T_ENUM_M}")
    acc0, acc1 = int(Symbol.ACC0), int(Symbol.ACC1)
    return [
        t
        for t in itertools.product(range(4), repeat=m)
        if acc0 in t and acc1 in t
    ]


# ---------------------------------------------------------------------------
# block operators
# ---------------------------------------------------------------------------


@dataclass
class BlockOperator:
    """Operator that is classically labelled on every register except X_1.

    ``blocks`` maps a (response labels, query labels) pair to a Hermitian
    2^n x 2^n matrix on the key register; absent labels are zero blocks.
    """

    n: int
    t_len: int
    y_len: int
    blocks: dict[Label, np.ndarray]
    label_dim: int = 4  # 8 when blocks carry (symbol, secret bit) labels

    @property
    def x1_dim(self) -> int:
        return 1 << self.n

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks.values()))

    def max_block_eig(self) -> float:
        if not self.blocks:
            return 0.0
        return max(float(np.linalg.eigvalsh(b)[-1]) for b in self.blocks.values())

    def nonzero_spectrum(self, tol: float = 1e-14) -> np.ndarray:
        """All block eigenvalues larger than `tol` in magnitude, sorted."""
        eigs = []
        for b in self.blocks.values():
            w = np.linalg.eigvalsh(b)
            eigs.extend(float(v) for v in w if abs(v) > tol)
        return np.array(sorted(eigs))

    def scaled(self, factor: float) -> "BlockOperator":
        return BlockOperator(
            self.n,
            self.t_len,
            self.y_len,
            {k: factor * v for k, v in self.blocks.items()},
            self.label_dim,
        )

    def to_dense(self, d: int) -> np.ndarray:
        """Densify onto registers (Y_1..Y_{y_len}, X_1, responses), MSB first."""
        t_span = self.label_dim**self.t_len
        dim = d**self.y_len * self.x1_dim * t_span
        out = np.zeros((dim, dim))
        for (t, y), blk in self.blocks.items():
            ybase = 0
            for yi in y:
                ybase = ybase * d + yi
            tbase = 0
            for ti in t:
                tbase = tbase * self.label_dim + ti
            base = (ybase * self.x1_dim) * t_span + tbase
            stride = t_span
            idx = base + stride * np.arange(self.x1_dim)
            out[np.ix_(idx, idx)] += np.real(blk)
        return out


def _key_tables(n: int):
    """Response table and key projector for every secret key z.

    Returns (r_table, outers): ``r_table[z][ytilde]`` is the Symbol value, and
    ``outers[z]`` the rank-one projector onto the quantum key statevector.
    """
    d = 1 << (n + 1)
    n_keys = 1 << (2 * n)
    r_table = np.empty((n_keys, d), dtype=np.int64)
    outers = []
    for theta in range(1 << n):
        for x in range(1 << n):
            z = (theta << n) | x
            key = SecretKey(n, theta, x)
            for yt in range(d):
                r_table[z, yt] = int(classify(key, yt))
            psi = QuantumKey.from_secret(key).statevector()
            outers.append(np.outer(psi, psi))
    return r_table, outers


def _iter_consistent(n: int, m: int):
    """Yield (z, query labels, response labels) for every (query seq, key) pair."""
    d = 1 << (n + 1)
    r_table, outers = _key_tables(n)
    seqs = np.array(list(itertools.product(range(d), repeat=m)), dtype=np.int64)
    return r_table, outers, seqs


def count_R_brute(n: int, m: int) -> int:
    """|R| by exhaustive enumeration of all (query sequence, key) pairs.

    This is the independent oracle for :func:`count_R_closed`.
    """
    _check_enum_caps(n, m)
    r_table, _, seqs = _iter_consistent(n, m)
    total = 0
    for z in range(r_table.shape[0]):
        tmat = r_table[z][seqs]
        mask = (tmat == int(Symbol.ACC0)).any(axis=1) & (tmat == int(Symbol.ACC1)).any(axis=1)
        total += int(mask.sum())
    return total


def count_R_closed(n: int, m: int) -> int:
    """|R| in closed form, evaluated with exact rationals.

    For a key with a rectilinear positions, inclusion-exclusion over the m
    queries gives the fraction of query sequences that hit both an accepted
    0-query (probability 2^-(a+1) per query) and an accepted 1-query
    (probability 2^-(n-a+1)); summing over keys yields

        |R| = 2^(m(n+1)+n) * sum_a C(n,a) [1 - (1 - 1/2^(a+1))^m
               - (1 - 1/2^(n-a+1))^m + (1 - 1/2^(a+1) - 1/2^(n-a+1))^m].
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    total = Fraction(0)
    for a in range(n + 1):
        p0 = Fraction(1, 2 ** (a + 1))
        p1 = Fraction(1, 2 ** (n - a + 1))
        term = 1 - (1 - p0) ** m - (1 - p1) ** m + (1 - p0 - p1) ** m
        total += math.comb(n, a) * term
    result = Fraction(2 ** (m * (n + 1) + n)) * total
    if result.denominator != 1:
        raise AssertionError("closed form must be an integer")
    return int(result)


def beta_exact(n: int, m: int) -> Fraction:
    """Dual objective of the uniform solution: |R| / (4^n d^m), exactly."""
    d = 1 << (n + 1)
    return Fraction(count_R_closed(n, m), 4**n * d**m)


def heuristic_bound(n: int, m: int) -> float:
    """Large-n approximation m / 2^(n/2) of beta; report-only diagnostic."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    return m / 2 ** (n / 2)


def lambda_max_formula(n: int) -> float:
    """Largest eigenvalue of Q1 in closed form: (2/4^n) (1 + 1/sqrt(2))^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 / 4**n * (1.0 + 2.0**-0.5) ** n


def lambda_max_numeric(q: BlockOperator) -> float:
    """Largest eigenvalue over all stored blocks (0 for the empty operator)."""
    return q.max_block_eig()


def _full_label(sym: int, s0: int, s1: int) -> int:
    payload = {int(Symbol.ACC0): s0, int(Symbol.ACC1): s1}.get(sym, 0)
    return sym * 2 + payload


def build_Q1(
    n: int, m: int, full_labels: bool = False, s0: int = 0, s1: int = 0
) -> BlockOperator:
    """Assemble Q1 by simulating the token over every (query sequence, key).

    For each secret key z and m-query sequence, the token's responses give a
    string t; sequences with t in the success set contribute the key projector
    (weighted 4^-n) to block (t, query labels).  ``full_labels`` keeps the
    returned secret bit in the response labels (dimension 8 per register)
    instead of relying on it being determined by the symbol.
    """
    _check_enum_caps(n, m)
    r_table, outers, seqs = _iter_consistent(n, m)
    weight = 1.0 / 4**n
    acc0, acc1 = int(Symbol.ACC0), int(Symbol.ACC1)
    blocks: dict[Label, np.ndarray] = {}
    for z in range(r_table.shape[0]):
        tmat = r_table[z][seqs]
        mask = (tmat == acc0).any(axis=1) & (tmat == acc1).any(axis=1)
        contrib = weight * outers[z]
        for idx in np.flatnonzero(mask):
            t = tuple(int(v) for v in tmat[idx])
            if full_labels:
                t = tuple(_full_label(v, s0, s1) for v in t)
            label = (t, tuple(int(v) for v in seqs[idx]))
            if label in blocks:
                blocks[label] += contrib
            else:
                blocks[label] = contrib.copy()
    return BlockOperator(n, m, m, blocks, 8 if full_labels else 4)


# ---------------------------------------------------------------------------
# feasible solution chains and their verifier
# ---------------------------------------------------------------------------


@dataclass
class SolutionChain:
    """Operators (R_k, P_k) of the cheating SDP, stored blockwise.

    ``R[k]`` carries k query labels and k-1 response labels; ``P[k]`` one
    query label fewer.  ``R[m+1]`` is the top of the chain (the operator that
    must dominate Q1) and the scalar at the bottom of the chain equals p.
    """

    n: int
    m: int
    p: float
    R: dict[int, BlockOperator]
    P: dict[int, BlockOperator]

    def scaled(self, factor: float) -> "SolutionChain":
        return SolutionChain(
            self.n,
            self.m,
            factor * self.p,
            {k: v.scaled(factor) for k, v in self.R.items()},
            {k: v.scaled(factor) for k, v in self.P.items()},
        )


def _trace_out_last_response(op: BlockOperator) -> BlockOperator:
    blocks: dict[Label, np.ndarray] = {}
    for (t, y), blk in op.blocks.items():
        label = (t[:-1], y)
        if label in blocks:
            blocks[label] += blk
        else:
            blocks[label] = blk.copy()
    return BlockOperator(op.n, op.t_len - 1, op.y_len, blocks, op.label_dim)


def _project_out_last_query(op: BlockOperator, d: int) -> BlockOperator:
    """Best tensor factor P with op ~ P (x) I on the last query register."""
    groups: dict[Label, list[np.ndarray]] = {}
    for (t, y), blk in op.blocks.items():
        groups.setdefault((t, y[:-1]), []).append(blk)
    blocks = {lbl: sum(g) / d for lbl, g in groups.items()}
    return BlockOperator(op.n, op.t_len, op.y_len - 1, blocks, op.label_dim)


def _factor_residual(r_op: BlockOperator, p_op: BlockOperator, d: int) -> float:
    """Max deviation of r_op from p_op tensored with identity on the last query."""
    resid = 0.0
    zero = np.zeros((r_op.x1_dim, r_op.x1_dim))
    grouped: dict[Label, dict[int, np.ndarray]] = {}
    for (t, y), blk in r_op.blocks.items():
        grouped.setdefault((t, y[:-1]), {})[y[-1]] = blk
    labels = set(grouped) | set(p_op.blocks)
    for lbl in labels:
        target = p_op.blocks.get(lbl, zero)
        got = grouped.get(lbl, {})
        for a in range(d):
            diff = got.get(a, zero) - target
            resid = max(resid, float(np.abs(diff).max()))
    return resid


def _blockwise_diff_residual(a: BlockOperator, b: BlockOperator) -> float:
    zero = np.zeros((a.x1_dim, a.x1_dim))
    resid = 0.0
    for lbl in set(a.blocks) | set(b.blocks):
        diff = a.blocks.get(lbl, zero) - b.blocks.get(lbl, zero)
        resid = max(resid, float(np.abs(diff).max()))
    return resid


def _chain_from_top(n: int, m: int, top: BlockOperator, p: float) -> SolutionChain:
    d = 1 << (n + 1)
    R = {m + 1: top}
    P = {m + 1: top}
    for k in range(m, 0, -1):
        R[k] = _trace_out_last_response(P[k + 1])
        P[k] = _project_out_last_query(R[k], d)
    return SolutionChain(n, m, p, R, P)


def trivial_feasible(n: int, m: int) -> SolutionChain:
    """The p = 1 solution: drop the success filter from Q1's construction.

    Every (query sequence, key) pair contributes its response string, whether
    successful or not; the result dominates Q1 term by term and traces down
    the constraint chain to exactly 1.
    """
    _check_enum_caps(n, m)
    r_table, outers, seqs = _iter_consistent(n, m)
    weight = 1.0 / 4**n
    blocks: dict[Label, np.ndarray] = {}
    for z in range(r_table.shape[0]):
        tmat = r_table[z][seqs]
        contrib = weight * outers[z]
        for idx in range(seqs.shape[0]):
            label = (tuple(int(v) for v in tmat[idx]), tuple(int(v) for v in seqs[idx]))
            if label in blocks:
                blocks[label] += contrib
            else:
                blocks[label] = contrib.copy()
    top = BlockOperator(n, m, m, blocks)
    return _chain_from_top(n, m, top, 1.0)


def linear_bound_p(n: int, m: int) -> float:
    """The closed-form objective |T| * 2^(1-n) * (1 + 1/sqrt(2))^n."""
    return cardinality_T(m) * 2.0 ** (1 - n) * (1.0 + 2.0**-0.5) ** n


def linear_bound_feasible(n: int, m: int) -> tuple[SolutionChain, float]:
    """Block-uniform solution: every successful response string gets the same
    maximally mixed block, scaled so the chain bottoms out at p.

    p exceeds 1 for small n (the bound is then vacuous) but the chain stays
    feasible; for m < 0.114 n it decays as 2^(2m - 0.228 n).
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    d = 1 << (n + 1)
    if m > MAX_ENUM_M or n > MAX_ENUM_N:
        raise SizeCapError("chain construction capped at enumerable sizes")
    p = linear_bound_p(n, m)
    # per-block scale p / (|T| 2^n) equals the closed-form top eigenvalue
    scale = lambda_max_formula(n)
    eye = scale * np.eye(1 << n)
    blocks: dict[Label, np.ndarray] = {}
    for t in enumerate_T(m):
        for y in itertools.product(range(d), repeat=m):
            blocks[(t, y)] = eye
    top = BlockOperator(n, m, m, blocks)
    return _chain_from_top(n, m, top, p), p


@dataclass
class PrimalChainReport:
    """Residuals of one solution chain against the cheating SDP constraints."""

    domination_min_eig: float  # smallest eigenvalue of R_{m+1} - Q1
    factor_residuals: dict[int, float]
    trace_residuals: dict[int, float]
    r0_minus_p: float
    tol: float

    @property
    def passed(self) -> bool:
        worst = max(self.factor_residuals.values(), default=0.0)
        worst = max(worst, max(self.trace_residuals.values(), default=0.0))
        worst = max(worst, abs(self.r0_minus_p))
        return self.domination_min_eig >= -self.tol and worst <= self.tol

    def rows(self) -> list[tuple[str, float]]:
        out = [("min_eig(R_top - Q1)", self.domination_min_eig)]
        for k in sorted(self.factor_residuals, reverse=True):
            out.append((f"factor R_{k} = P_{k} (x) I", self.factor_residuals[k]))
        for k in sorted(self.trace_residuals, reverse=True):
            out.append((f"trace chain at k={k}", self.trace_residuals[k]))
        out.append(("|R_0 - p|", self.r0_minus_p))
        return out


def verify_primal_chain(
    chain: SolutionChain, q: BlockOperator, tol: float = 1e-9
) -> PrimalChainReport:
    """Recompute every chain constraint residual from the stored operators."""
    n, m = chain.n, chain.m
    if q.n != n or q.t_len != m or q.y_len != m:
        raise ValueError("operator layout does not match the chain")
    d = 1 << (n + 1)
    top = chain.R[m + 1]
    zero = np.zeros((1 << n, 1 << n))
    dom = math.inf
    for lbl in set(top.blocks) | set(q.blocks):
        diff = top.blocks.get(lbl, zero) - q.blocks.get(lbl, zero)
        dom = min(dom, float(np.linalg.eigvalsh((diff + diff.conj().T) / 2)[0]))
    if math.isinf(dom):
        dom = 0.0  # both operators empty (m = 1): 0 <= 0 holds
    factor = {m + 1: _blockwise_diff_residual(chain.R[m + 1], chain.P[m + 1])}
    trace = {}
    for k in range(m, 0, -1):
        trace[k + 1] = _blockwise_diff_residual(
            _trace_out_last_response(chain.P[k + 1]), chain.R[k]
        )
        factor[k] = _factor_residual(chain.R[k], chain.P[k], d)
    r0 = chain.P[1].trace()
    return PrimalChainReport(
        domination_min_eig=dom,
        factor_residuals=factor,
        trace_residuals=trace,
        r0_minus_p=abs(r0 - chain.p),
        tol=tol,
    )


# ---------------------------------------------------------------------------
# the uniform dual solution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualSolution:
    """Scaled-identity dual solution: Y_i = coeffs[i-1] * I on the first
    m-i+1 query and interaction registers."""

    n: int
    m: int
    coeffs: tuple[Fraction, ...]

    def scaled(self, factor: Fraction) -> "DualSolution":
        return DualSolution(self.n, self.m, tuple(factor * c for c in self.coeffs))


def dual_uniform(n: int, m: int) -> tuple[DualSolution, Fraction]:
    """The dual feasible point Y_i = d^-(m-i+1) I and its exact objective."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    d = 1 << (n + 1)
    coeffs = tuple(Fraction(1, d ** (m - i + 1)) for i in range(1, m + 1))
    return DualSolution(n, m, coeffs), beta_exact(n, m)


@dataclass
class DualReport:
    constraint_residuals: tuple[Fraction, ...]  # min eigenvalue of each constraint
    y1_min: Fraction
    objective_exact: Fraction
    objective_numeric: float | None
    tol: float

    @property
    def passed(self) -> bool:
        ok = all(r >= -Fraction(self.tol) for r in self.constraint_residuals)
        ok = ok and self.y1_min >= 0
        if self.objective_numeric is not None:
            rel = abs(self.objective_numeric - float(self.objective_exact))
            rel /= max(float(self.objective_exact), 1e-300)
            ok = ok and rel <= 1e-12
        return ok


def verify_dual(
    ys: DualSolution, q: BlockOperator | None = None, tol: float = 1e-12
) -> DualReport:
    """Check the dual constraint chain exactly.

    For scaled identities the i-th constraint reduces to the scalar
    ``-d * c_i + c_{i+1}`` (with c_{m+1} = 1) times the identity, so the
    residual spectrum is computed in exact rational arithmetic.  The objective
    pairs Y_1 with the traced Q1: exactly via the counting formula, and
    numerically from the supplied blocks when given.
    """
    n, m = ys.n, ys.m
    if len(ys.coeffs) != m:
        raise ValueError("coefficient count must equal m")
    d = 1 << (n + 1)
    cs = list(ys.coeffs) + [Fraction(1)]
    residuals = tuple(-d * cs[i] + cs[i + 1] for i in range(m))
    objective_exact = ys.coeffs[0] * Fraction(count_R_closed(n, m), 4**n)
    objective_numeric = None
    if q is not None:
        if q.n != n or q.t_len != m:
            raise ValueError("operator layout does not match the dual solution")
        objective_numeric = float(ys.coeffs[0]) * q.trace()
    return DualReport(
        constraint_residuals=residuals,
        y1_min=ys.coeffs[0],
        objective_exact=objective_exact,
        objective_numeric=objective_numeric,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# lowering to solver instances
# ---------------------------------------------------------------------------


def _y_regs(layout: InteractionLayout, count: int) -> list[tuple[str, int]]:
    return [(f"Y{i}", layout.d) for i in range(1, count + 1)]


def _x_regs(layout: InteractionLayout, count: int) -> list[tuple[str, int]]:
    regs: list[tuple[str, int]] = []
    for i in range(1, count + 1):
        regs.append((f"X{i}", layout.x1_dim if i == 1 else layout.response_dim))
    return regs


def traced_Q1_dense(n: int, m: int) -> np.ndarray:
    """Tr over the last response register of Q1, densified on
    (Y_1..Y_m, X_1..X_m)."""
    q = build_Q1(n, m)
    traced = _trace_out_last_response(q)
    return traced.to_dense(1 << (n + 1))


def build_primal_instance(n: int, m: int) -> sdp.SdpInstance:
    """The streamlined primal: min Tr(P_1) subject to the descending chain

        Tr_{X_{m+1}}(Q1) <= P_m (x) I_{Y_m},
        Tr_{X_{i+1}}(P_{i+1}) <= P_i (x) I_{Y_i}    for i = m-1..1.
    """
    if m < 2:
        raise ValueError("the streamlined form needs m >= 2")
    lay = InteractionLayout(n, m)
    variables = {}
    for i in range(1, m + 1):
        variables[f"P{i}"] = RegisterLayout(tuple(_y_regs(lay, i - 1) + _x_regs(lay, i)))
    constraints = []
    top_layout = RegisterLayout(tuple(_y_regs(lay, m) + _x_regs(lay, m)))
    if top_layout.dim > sdp.MAX_CONSTRAINT_DIM:
        raise SizeCapError(
            f"top constraint dimension {top_layout.dim} exceeds {sdp.MAX_CONSTRAINT_DIM}"
        )
    constraints.append(
        sdp.Constraint(
            name=f"chain_{m}",
            layout=top_layout,
            terms=(
                sdp.Term(var=f"P{m}", coeff=-1.0, pre_op=sdp.Op("embed", (f"Y{m}",))),
            ),
            constant=traced_Q1_dense(n, m),
            sense="<=0",
        )
    )
    for i in range(m - 1, 0, -1):
        c_layout = RegisterLayout(tuple(_y_regs(lay, i) + _x_regs(lay, i)))
        constraints.append(
            sdp.Constraint(
                name=f"chain_{i}",
                layout=c_layout,
                terms=(
                    sdp.Term(
                        var=f"P{i + 1}", coeff=1.0, pre_op=sdp.Op("ptrace", (f"X{i + 1}",))
                    ),
                    sdp.Term(var=f"P{i}", coeff=-1.0, pre_op=sdp.Op("embed", (f"Y{i}",))),
                ),
                constant=np.zeros((c_layout.dim, c_layout.dim)),
                sense="<=0",
            )
        )
    inst = sdp.SdpInstance(
        name=f"otm-cheating-primal-n{n}-m{m}",
        variables=variables,
        constraints=constraints,
        objective={"P1": np.eye(1 << n)},
        minimize=True,
    )
    inst.validate()
    return inst


def build_dual_instance(n: int, m: int) -> sdp.SdpInstance:
    """The streamlined dual: max <Y_1, Tr_{X_{m+1}}(Q1)> subject to

        Tr_{Y_{m-i+1}}(Y_i) <= Y_{i+1} (x) I_{X_{m-i+1}}   for i = 1..m-1,
        Tr_{Y_1}(Y_m) <= I_{X_1},
        Y_1 >= 0,

    with Y_i declared on the first m-i+1 query/interaction registers.
    """
    if m < 2:
        raise ValueError("the streamlined form needs m >= 2")
    lay = InteractionLayout(n, m)
    variables = {}
    for i in range(1, m + 1):
        k = m - i + 1
        variables[f"Y{i}"] = RegisterLayout(tuple(_y_regs(lay, k) + _x_regs(lay, k)))
    if variables["Y1"].dim > sdp.MAX_CONSTRAINT_DIM:
        raise SizeCapError("dual instance exceeds solver dimension cap")
    constraints = []
    for i in range(1, m):
        k = m - i + 1
        c_layout = RegisterLayout(tuple(_y_regs(lay, k - 1) + _x_regs(lay, k)))
        constraints.append(
            sdp.Constraint(
                name=f"dual_{i}",
                layout=c_layout,
                terms=(
                    sdp.Term(var=f"Y{i}", coeff=-1.0, pre_op=sdp.Op("ptrace", (f"Y{k}",))),
                    sdp.Term(var=f"Y{i + 1}", coeff=1.0, pre_op=sdp.Op("embed", (f"X{k}",))),
                ),
                constant=np.zeros((c_layout.dim, c_layout.dim)),
                sense=">=0",
            )
        )
    x1 = RegisterLayout(tuple(_x_regs(lay, 1)))
    constraints.append(
        sdp.Constraint(
            name=f"dual_{m}",
            layout=x1,
            terms=(sdp.Term(var=f"Y{m}", coeff=-1.0, pre_op=sdp.Op("ptrace", ("Y1",))),),
            constant=np.eye(x1.dim),
            sense=">=0",
        )
    )
    constraints.append(
        sdp.Constraint(
            name="y1_psd",
            layout=variables["Y1"],
            terms=(sdp.Term(var="Y1", coeff=1.0),),
            constant=np.zeros((variables["Y1"].dim, variables["Y1"].dim)),
            sense=">=0",
        )
    )
    inst = sdp.SdpInstance(
        name=f"otm-cheating-dual-n{n}-m{m}",
        variables=variables,
        constraints=constraints,
        objective={"Y1": traced_Q1_dense(n, m)},
        minimize=False,
    )
    inst.validate()
    return inst


def chain_as_assignment(chain: SolutionChain) -> dict[str, np.ndarray]:
    """Densify the chain's P_k operators as an assignment for the streamlined
    primal instance (P_k carries k-1 query labels and k-1 response labels)."""
    d = 1 << (chain.n + 1)
    return {f"P{k}": chain.P[k].to_dense(d) for k in range(1, chain.m + 1)}
