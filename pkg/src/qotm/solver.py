"""Small-scale semidefinite-program solver and independent certificate verifier.

Instances are linear matrix-inequality problems over a handful of Hermitian
matrix variables:

    min/max  sum_v <C_v, X_v>
    s.t.     sum_t coeff_t * Op_t(X_var(t)) + B_c   (<=|>=|==) 0     for each c

where every ``Op`` is a composition of partial traces and tensor-with-identity
embeddings over named registers.  The solver is a first-order operator
splitting (ADMM): slack matrices are projected onto the PSD cone by
eigendecomposition, and the variable update solves the normal equations of the
constraint maps (dense Cholesky when the variable space is small, conjugate
gradients in operator form otherwise).  Accuracy around 1e-4..1e-6 -- enough
for two-significant-figure targets -- at dimensions up to 4096.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .linalg import RegisterLayout, embed, partial_trace, psd_project

MAX_CONSTRAINT_DIM = 4096

SENSES = ("<=0", ">=0", "==0")


class SizeCapError(ValueError):
    """Raised when an instance exceeds the solver's dimension caps."""


@dataclass(frozen=True)
class Op:
    """One structural map: trace out registers, or tensor identities onto them."""

    kind: str  # "ptrace" | "embed"
    registers: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("ptrace", "embed"):
            raise ValueError(f"unknown op kind {self.kind!r}")


@dataclass(frozen=True)
class Term:
    """coeff * post_op(pre_op(X_var)), declared on the constraint's registers."""

    var: str
    coeff: float = 1.0
    pre_op: Op | None = None
    post_op: Op | None = None


@dataclass
class Constraint:
    name: str
    layout: RegisterLayout
    terms: tuple[Term, ...]
    constant: np.ndarray
    sense: str

    def __post_init__(self):
        self.terms = tuple(self.terms)
        if self.sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        if self.constant.shape != (self.layout.dim, self.layout.dim):
            raise ValueError("constant block does not match constraint layout")


@dataclass
class SdpInstance:
    name: str
    variables: dict[str, RegisterLayout]
    constraints: list[Constraint]
    objective: dict[str, np.ndarray]
    minimize: bool = True

    def var_dim(self, name: str) -> int:
        return self.variables[name].dim

    def validate(self) -> None:
        for c in self.constraints:
            if c.layout.dim > MAX_CONSTRAINT_DIM:
                raise SizeCapError(
                    f"constraint {c.name!r} has dimension {c.layout.dim} > {MAX_CONSTRAINT_DIM}"
                )
            for t in c.terms:
                if t.var not in self.variables:
                    raise ValueError(f"constraint {c.name!r} uses unknown variable {t.var!r}")
                _compile_pipeline(self.variables[t.var], c.layout, t)  # raises on mismatch
        for v, mat in self.objective.items():
            if v not in self.variables:
                raise ValueError(f"objective uses unknown variable {v!r}")
            if mat.shape != (self.var_dim(v), self.var_dim(v)):
                raise ValueError(f"objective matrix for {v!r} has wrong shape")


# ---------------------------------------------------------------------------
# term pipelines: forward application and adjoints
# ---------------------------------------------------------------------------


def _op_output_layout(op: Op, cur: RegisterLayout, target: RegisterLayout) -> RegisterLayout:
    if op.kind == "ptrace":
        for r in op.registers:
            cur.index(r)  # raises if missing
        return cur.without(op.registers)
    # embed: add registers (dims from the constraint layout), ordered as in target
    have = set(cur.names) | set(op.registers)
    return RegisterLayout(tuple(r for r in target.registers if r[0] in have))


def _compile_pipeline(var_layout: RegisterLayout, target: RegisterLayout, term: Term):
    """Resolve the in/out layout of each op; error on dimension mismatches."""
    steps = []
    cur = var_layout
    for op in (term.pre_op, term.post_op):
        if op is None:
            continue
        out = _op_output_layout(op, cur, target)
        steps.append((op, cur, out))
        cur = out
    if cur.dim != target.dim or cur.names != target.names:
        raise ValueError(
            f"term on {term.var!r} produces registers {cur.names}, "
            f"constraint expects {target.names}"
        )
    return steps


def _apply_steps(x: np.ndarray, steps) -> np.ndarray:
    for op, lin, lout in steps:
        if op.kind == "ptrace":
            x = partial_trace(x, lin, op.registers)
        else:
            x = embed(x, lin, lout)
    return x


def _apply_steps_adjoint(w: np.ndarray, steps) -> np.ndarray:
    # adjoint of ptrace = embed over the traced registers; adjoint of embed = ptrace
    for op, lin, lout in reversed(steps):
        if op.kind == "ptrace":
            w = embed(w, lout, lin)
        else:
            w = partial_trace(w, lout, [r for r in lout.names if r not in set(lin.names)])
    return w


def _cast(m: np.ndarray, dtype) -> np.ndarray:
    if dtype == np.float64 and np.iscomplexobj(m):
        return np.ascontiguousarray(m.real, dtype=dtype)
    return np.asarray(m, dtype=dtype)


class _CompiledConstraint:
    def __init__(self, inst: SdpInstance, c: Constraint, scale: float, dtype):
        self.name = c.name
        self.dim = c.layout.dim
        self.sense = c.sense
        self.scale = scale
        self.constant = scale * _cast(c.constant, dtype)
        self.terms = []
        for t in c.terms:
            steps = _compile_pipeline(inst.variables[t.var], c.layout, t)
            self.terms.append((t.var, scale * t.coeff, steps))

    def apply(self, x: dict[str, np.ndarray]) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=self.constant.dtype)
        for var, coeff, steps in self.terms:
            out += coeff * _apply_steps(x[var], steps)
        return out

    def apply_adjoint_into(self, w: np.ndarray, acc: dict[str, np.ndarray]) -> None:
        for var, coeff, steps in self.terms:
            acc[var] += coeff * _apply_steps_adjoint(w, steps)


# ---------------------------------------------------------------------------
# variable-space helpers (dicts of matrices as one inner-product space)
# ---------------------------------------------------------------------------


def _vdot(a: dict, b: dict) -> float:
    return float(sum(np.vdot(a[k], b[k]).real for k in a))


def _norm(a: dict) -> float:
    return math.sqrt(max(_vdot(a, a), 0.0))


def _zeros_like_vars(inst: SdpInstance, dtype) -> dict[str, np.ndarray]:
    return {v: np.zeros((lay.dim, lay.dim), dtype=dtype) for v, lay in inst.variables.items()}


def _term_norm_bound(inst: SdpInstance, c: Constraint) -> float:
    """Upper bound on the Frobenius operator norm of the constraint's linear map."""
    total = 0.0
    for t in c.terms:
        cur = inst.variables[t.var]
        factor = abs(t.coeff)
        for op in (t.pre_op, t.post_op):
            if op is None:
                continue
            if op.kind == "ptrace":
                d = 1
                for r in op.registers:
                    d *= cur.dim_of(r)
                factor *= math.sqrt(d)
                cur = cur.without(op.registers)
            else:
                d = 1
                for r in op.registers:
                    d *= c.layout.dim_of(r)
                factor *= math.sqrt(d)
                cur = _op_output_layout(op, cur, c.layout)
        total += factor
    return total


@dataclass
class SolveOptions:
    tol: float = 1e-6
    max_iters: int = 100000
    seed: int = 0  # reserved; the iteration itself is deterministic (zero start)
    rho0: float = 1.0
    alpha: float = 1.6  # over-relaxation
    adapt_every: int = 25
    verbose: bool = False


@dataclass
class SdpSolution:
    variables: dict[str, np.ndarray]
    objective: float
    status: str  # "optimal" | "max-iters" | "infeasible-suspected"
    iterations: int
    residuals: dict[str, float]
    wall_ms: float = 0.0


# dense-Gram fast path is used when the total variable dof is at most this
_DENSE_GRAM_DOF = 2200


class _GramSolver:
    """Solves (sum_c L_c* L_c) X = RHS over the variable space."""

    def __init__(self, inst: SdpInstance, compiled, dtype):
        self.inst = inst
        self.compiled = compiled
        self.dtype = dtype
        self.dims = {v: lay.dim for v, lay in inst.variables.items()}
        self.total_dof = sum(d * d for d in self.dims.values())
        self.ginv = None
        if self.total_dof <= _DENSE_GRAM_DOF and dtype == np.float64:
            self._build_dense()

    def _gram_apply(self, x: dict) -> dict:
        acc = _zeros_like_vars(self.inst, self.dtype)
        for cc in self.compiled:
            w = cc.apply(x)
            cc.apply_adjoint_into(w, acc)
        return acc

    def _flatten(self, x: dict) -> np.ndarray:
        return np.concatenate([x[v].ravel() for v in self.inst.variables])

    def _unflatten(self, vec: np.ndarray) -> dict:
        out = {}
        ofs = 0
        for v in self.inst.variables:
            d = self.dims[v]
            out[v] = vec[ofs : ofs + d * d].reshape(d, d).copy()
            ofs += d * d
        return out

    def _build_dense(self):
        # the Gram matrix over the vectorised variable space stays tiny here,
        # so a one-time inverse turns every variable update into one matvec
        n = self.total_dof
        g = np.empty((n, n))
        basis = _zeros_like_vars(self.inst, self.dtype)
        flat = self._flatten(basis)
        for j in range(n):
            flat[:] = 0.0
            flat[j] = 1.0
            g[:, j] = self._flatten(self._gram_apply(self._unflatten(flat)))
        g = (g + g.T) / 2
        try:
            self.ginv = np.linalg.inv(g)
        except np.linalg.LinAlgError:
            self.ginv = np.linalg.inv(g + 1e-12 * np.eye(n))

    def solve(self, rhs: dict, x0: dict) -> dict:
        if self.ginv is not None:
            return self._unflatten(self.ginv @ self._flatten(rhs))
        return self._cg(rhs, x0)

    def _cg(self, rhs: dict, x0: dict, rtol: float = 1e-11, max_iter: int = 400) -> dict:
        x = {k: v.copy() for k, v in x0.items()}
        r = {k: rhs[k] - gx for k, gx in self._gram_apply(x).items()}
        p = {k: v.copy() for k, v in r.items()}
        rs = _vdot(r, r)
        target = rtol * max(_norm(rhs), 1e-300)
        for _ in range(max_iter):
            if math.sqrt(rs) <= target:
                break
            gp = self._gram_apply(p)
            denom = _vdot(p, gp)
            if denom <= 0:
                break
            a = rs / denom
            for k in x:
                x[k] += a * p[k]
                r[k] -= a * gp[k]
            rs_new = _vdot(r, r)
            beta = rs_new / rs
            rs = rs_new
            for k in p:
                p[k] = r[k] + beta * p[k]
        return x


def solve(inst: SdpInstance, opts: SolveOptions | None = None) -> SdpSolution:
    """ADMM solve.  Returns assignments plus recomputable residuals.

    Deterministic for fixed options: the iteration starts from zero and uses
    no randomness.
    """
    opts = opts or SolveOptions()
    inst.validate()
    t_start = time.perf_counter()

    sign = 1.0 if inst.minimize else -1.0
    dtype = np.float64
    if any(np.iscomplexobj(c.constant) and np.abs(c.constant.imag).max() > 0 for c in inst.constraints):
        dtype = np.complex128
    if any(np.iscomplexobj(m) and np.abs(np.asarray(m).imag).max() > 0 for m in inst.objective.values()):
        dtype = np.complex128

    # normalise senses to "<=0" (slack >= 0) or "==0" (slack pinned at zero),
    # with a Ruiz-style scalar equilibration per constraint
    compiled = []
    eq_mask = []
    for c in inst.constraints:
        flip = -1.0 if c.sense == ">=0" else 1.0
        norm_bound = _term_norm_bound(inst, c)
        scale = flip / max(norm_bound, 1e-12)
        compiled.append(_CompiledConstraint(inst, c, scale, dtype))
        eq_mask.append(c.sense == "==0")

    cost = {
        v: sign * _cast(np.asarray(inst.objective.get(v, np.zeros((lay.dim, lay.dim)))), dtype)
        for v, lay in inst.variables.items()
    }
    cost_norm = math.sqrt(sum(float(np.vdot(m, m).real) for m in cost.values()))
    b_norm = math.sqrt(sum(float(np.vdot(cc.constant, cc.constant).real) for cc in compiled))

    gram = _GramSolver(inst, compiled, dtype)
    x = _zeros_like_vars(inst, dtype)
    z = [np.zeros((cc.dim, cc.dim), dtype=dtype) for cc in compiled]
    u = [np.zeros((cc.dim, cc.dim), dtype=dtype) for cc in compiled]
    rho = opts.rho0
    alpha = opts.alpha
    obj_prev = math.inf
    status = "max-iters"
    pr = dr = objch = gap = math.inf
    stall = 0
    it = 0

    for it in range(1, opts.max_iters + 1):
        # X update: (sum L*L) X = -L*(B + Z + U) - C/rho
        rhs = _zeros_like_vars(inst, dtype)
        for cc, zc, uc in zip(compiled, z, u):
            cc.apply_adjoint_into(-(cc.constant + zc + uc), rhs)
        for v in rhs:
            rhs[v] -= cost[v] / rho
        x = gram.solve(rhs, x)

        # Z update with over-relaxation, then scaled dual update
        lx = [cc.apply(x) for cc in compiled]
        pr_sq = 0.0
        dr_vec = _zeros_like_vars(inst, dtype)
        for i, cc in enumerate(compiled):
            v_rel = alpha * (lx[i] + cc.constant) - (1.0 - alpha) * z[i]
            z_old = z[i]
            if eq_mask[i]:
                z_new = np.zeros_like(z_old)
            else:
                m = -(v_rel + u[i])
                m = (m + m.conj().T) / 2
                z_new = psd_project(m, atol=math.inf)
            z[i] = z_new
            u[i] = u[i] + v_rel + z_new
            cc.apply_adjoint_into(z_new - z_old, dr_vec)
            res = lx[i] + cc.constant + z_new
            pr_sq += float(np.vdot(res, res).real)

        pr = math.sqrt(pr_sq) / (1.0 + b_norm)
        dr = rho * _norm(dr_vec) / (1.0 + cost_norm)
        obj_int = sum(float(np.vdot(cost[v], x[v]).real) for v in x)
        obj = sign * obj_int
        objch = abs(obj - obj_prev) / max(1.0, abs(obj))
        obj_prev = obj
        # y = rho*U is dual feasible up to the dual residual (and PSD by
        # construction), so the duality gap bounds the objective error
        dual_int = sum(
            rho * float(np.vdot(uc, cc.constant).real) for uc, cc in zip(u, compiled)
        )
        gap = abs(obj_int - dual_int) / max(1.0, abs(obj_int))

        if opts.verbose and it % 50 == 0:
            print(
                f"  iter {it:6d}  primal {pr:9.3e}  dual {dr:9.3e}  "
                f"gap {gap:9.3e}  obj {obj:.6f}"
            )

        if pr <= opts.tol and dr <= opts.tol and objch <= opts.tol and gap <= opts.tol:
            status = "optimal"
            break

        # residual balancing keeps rho in a productive range
        if it % opts.adapt_every == 0:
            if pr > 10.0 * dr and rho < 1e6:
                rho *= 2.0
                u = [uc / 2.0 for uc in u]
            elif dr > 10.0 * pr and rho > 1e-6:
                rho /= 2.0
                u = [uc * 2.0 for uc in u]
            if it > 500 and pr > 10.0:
                stall += 1
                if stall > 40:
                    status = "infeasible-suspected"
                    break
            else:
                stall = 0

    objective = sign * sum(float(np.vdot(cost[v], x[v]).real) for v in x)
    wall_ms = (time.perf_counter() - t_start) * 1e3
    return SdpSolution(
        variables={k: v.copy() for k, v in x.items()},
        objective=objective,
        status=status,
        iterations=it,
        residuals={"primal": pr, "dual": dr, "obj_change": objch, "gap": gap},
        wall_ms=wall_ms,
    )


@dataclass
class CertificateReport:
    objective: float
    violations: dict[str, float]
    passed: bool
    worst: tuple[str, float] = field(default=("", 0.0))


def verify_certificate(inst: SdpInstance, sol: SdpSolution, tol: float) -> CertificateReport:
    """Recompute every constraint residual from the raw assignments.

    Independent of solver internals: the only inputs are the instance data and
    the variable matrices.
    """
    x = sol.variables
    for v, lay in inst.variables.items():
        if v not in x or x[v].shape != (lay.dim, lay.dim):
            raise ValueError(f"assignment for variable {v!r} is missing or mis-shaped")
    cdtype = np.float64
    if any(np.iscomplexobj(c.constant) for c in inst.constraints) or any(
        np.iscomplexobj(m) for m in x.values()
    ):
        cdtype = np.complex128
    violations = {}
    for c in inst.constraints:
        cc = _CompiledConstraint(inst, c, 1.0, cdtype)
        val = cc.apply({k: np.asarray(m, dtype=cdtype) for k, m in x.items()})
        total = val + cc.constant
        total = (total + total.conj().T) / 2
        if c.sense == "==0":
            violations[c.name] = float(np.abs(total).max())
        else:
            w = np.linalg.eigvalsh(total)
            violations[c.name] = float(max(0.0, w[-1] if c.sense == "<=0" else -w[0]))
    objective = sum(
        float(np.vdot(np.asarray(inst.objective[v], dtype=np.complex128), x[v]).real)
        for v in inst.objective
    )
    worst = max(violations.items(), key=lambda kv: kv[1]) if violations else ("", 0.0)
    return CertificateReport(
        objective=objective,
        violations=violations,
        passed=all(v <= tol for v in violations.values()),
        worst=worst,
    )


# ---------------------------------------------------------------------------
# serialization: lossless JSON and SDPA sparse export
# ---------------------------------------------------------------------------


def _block_entries(m: np.ndarray) -> list:
    entries = []
    cx = np.iscomplexobj(m) and np.abs(m.imag).max() > 0
    for i in range(m.shape[0]):
        for j in range(i, m.shape[1]):
            v = m[i, j]
            if v == 0:
                continue
            if cx:
                entries.append([i, j, float(v.real), float(v.imag)])
            else:
                entries.append([i, j, float(np.real(v))])
    return entries


def _block_from_entries(dim: int, entries: list) -> np.ndarray:
    cx = any(len(e) == 4 for e in entries)
    m = np.zeros((dim, dim), dtype=np.complex128 if cx else np.float64)
    for e in entries:
        i, j = int(e[0]), int(e[1])
        v = e[2] + 1j * e[3] if len(e) == 4 else e[2]
        m[i, j] = v
        if i != j:
            m[j, i] = np.conj(v)
    return m


def _layout_json(lay: RegisterLayout) -> list:
    return [[name, dim] for name, dim in lay.registers]


def _layout_from_json(data) -> RegisterLayout:
    return RegisterLayout(tuple((str(n), int(d)) for n, d in data))


def _op_json(op: Op | None):
    return None if op is None else {"kind": op.kind, "registers": list(op.registers)}


def _op_from_json(data) -> Op | None:
    return None if data is None else Op(data["kind"], tuple(data["registers"]))


def to_json(inst: SdpInstance) -> str:
    """Lossless, byte-stable JSON encoding of an instance."""
    blocks = {}
    constraints = []
    for idx, c in enumerate(inst.constraints):
        ref = f"c{idx}"
        blocks[ref] = {"dim": c.layout.dim, "entries": _block_entries(c.constant)}
        constraints.append(
            {
                "name": c.name,
                "sense": c.sense,
                "registers": _layout_json(c.layout),
                "terms": [
                    {
                        "var": t.var,
                        "coeff": float(t.coeff),
                        "pre_op": _op_json(t.pre_op),
                        "post_op": _op_json(t.post_op),
                    }
                    for t in c.terms
                ],
                "constant_block_ref": ref,
            }
        )
    objective = []
    for v in inst.objective:
        ref = f"obj_{v}"
        blocks[ref] = {
            "dim": inst.var_dim(v),
            "entries": _block_entries(np.asarray(inst.objective[v])),
        }
        objective.append({"var": v, "block_ref": ref})
    doc = {
        "format": "qotm-sdp-instance",
        "version": 1,
        "name": inst.name,
        "minimize": inst.minimize,
        "variables": [
            {"name": v, "registers": _layout_json(lay)} for v, lay in inst.variables.items()
        ],
        "constraints": constraints,
        "objective": objective,
        "blocks": blocks,
        "layout": {"convention": "leftmost register is the most significant index digit"},
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def from_json(text: str) -> SdpInstance:
    doc = json.loads(text)
    if doc.get("format") != "qotm-sdp-instance":
        raise ValueError("not a qotm SDP instance document")
    blocks = {
        ref: _block_from_entries(spec["dim"], spec["entries"])
        for ref, spec in doc["blocks"].items()
    }
    variables = {v["name"]: _layout_from_json(v["registers"]) for v in doc["variables"]}
    constraints = []
    for c in doc["constraints"]:
        constraints.append(
            Constraint(
                name=c["name"],
                layout=_layout_from_json(c["registers"]),
                terms=tuple(
                    Term(
                        var=t["var"],
                        coeff=float(t["coeff"]),
                        pre_op=_op_from_json(t["pre_op"]),
                        post_op=_op_from_json(t["post_op"]),
                    )
                    for t in c["terms"]
                ),
                constant=blocks[c["constant_block_ref"]],
                sense=c["sense"],
            )
        )
    objective = {o["var"]: blocks[o["block_ref"]] for o in doc["objective"]}
    return SdpInstance(
        name=doc["name"],
        variables=variables,
        constraints=constraints,
        objective=objective,
        minimize=bool(doc["minimize"]),
    )


def _hermitian_basis(dim: int, real: bool):
    """Orthonormal basis of the (real-)symmetric / Hermitian matrices."""
    basis = []
    isq = 1.0 / math.sqrt(2.0)
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=np.float64 if real else np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=np.float64 if real else np.complex128)
            e[i, j] = e[j, i] = isq
            basis.append(e)
    if not real:
        for i in range(dim):
            for j in range(i + 1, dim):
                e = np.zeros((dim, dim), dtype=np.complex128)
                e[i, j] = 1j * isq
                e[j, i] = -1j * isq
                basis.append(e)
    return basis


def _realify(m: np.ndarray) -> np.ndarray:
    """Standard 2x2 real embedding; symmetric iff the input is Hermitian."""
    if not np.iscomplexobj(m) or np.abs(m.imag).max() == 0:
        return np.real(m)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def export(inst: SdpInstance, fmt: str) -> str:
    """Serialize an instance: lossless "json" or standard "sdpa-sparse" text.

    The SDPA scalarization expands every matrix variable over an orthonormal
    Hermitian basis (equalities are split into opposing inequalities, complex
    blocks realified via the 2x2 embedding), emitting the conventional
    mDIM/nBLOCK header and "matno blkno i j value" upper-triangle entries.
    """
    if fmt == "json":
        return to_json(inst)
    if fmt != "sdpa-sparse":
        raise ValueError(f"unsupported export format {fmt!r}")

    inst.validate()
    sign = 1.0 if inst.minimize else -1.0
    real = all(
        not np.iscomplexobj(c.constant) or np.abs(c.constant.imag).max() == 0
        for c in inst.constraints
    ) and all(
        not np.iscomplexobj(np.asarray(m)) or np.abs(np.asarray(m).imag).max() == 0
        for m in inst.objective.values()
    )

    coords = []  # (var, basis matrix)
    cvec = []
    for v, lay in inst.variables.items():
        cost = np.asarray(inst.objective.get(v, np.zeros((lay.dim, lay.dim))))
        for e in _hermitian_basis(lay.dim, real):
            coords.append((v, e))
            cvec.append(sign * float(np.vdot(cost, e).real))

    # every constraint becomes >=0 blocks:  sum_j x_j A_{c,j} - A_{c,0} >= 0
    blocks = []  # (constraint, orientation) pairs; orientation -1 flips <=0
    for c in inst.constraints:
        if c.sense == ">=0":
            blocks.append((c, 1.0))
        elif c.sense == "<=0":
            blocks.append((c, -1.0))
        else:
            blocks.append((c, 1.0))
            blocks.append((c, -1.0))

    lines = [f'"{inst.name} (exported by qotm)"']
    lines.append(f"{len(coords)} = mDIM")
    lines.append(f"{len(blocks)} = nBLOCK")
    sizes = []
    for c, _ in blocks:
        d = c.layout.dim
        if not real:
            d *= 2
        sizes.append(str(d))
    lines.append("(" + ", ".join(sizes) + ")")
    lines.append(" ".join(repr(v) for v in cvec))

    def emit(matno: int, blkno: int, mat: np.ndarray):
        memb = _realify(mat) if not real else np.real(mat)
        for i in range(memb.shape[0]):
            for j in range(i, memb.shape[1]):
                v = memb[i, j]
                if v != 0.0:
                    lines.append(f"{matno} {blkno} {i + 1} {j + 1} {repr(float(v))}")

    # under X = sum_i x_i F_i - F0, the oriented constraint L(X) + B >= 0
    # needs F_i = orient * L(E_i) and F0 = -orient * B
    for blkno, (c, orient) in enumerate(blocks, start=1):
        emit(0, blkno, -orient * c.constant)
    for matno, (var, e) in enumerate(coords, start=1):
        for blkno, (c, orient) in enumerate(blocks, start=1):
            acc = np.zeros((c.layout.dim, c.layout.dim), dtype=np.complex128)
            for t in c.terms:
                if t.var != var:
                    continue
                steps = _compile_pipeline(inst.variables[var], c.layout, t)
                acc += t.coeff * _apply_steps(e.astype(np.complex128), steps)
            if np.abs(acc).max() > 0:
                emit(matno, blkno, orient * acc)
    return "\n".join(lines) + "\n"
