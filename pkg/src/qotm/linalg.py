"""Dense complex linear algebra used by every other module.

Everything here works on plain numpy arrays.  A "matrix" is a 2-D ndarray
(real or complex); registers of a composite system are described by a
:class:`RegisterLayout`.  The index convention used throughout the package:
the leftmost register in a layout is the most significant digit of the
composite index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Hermiticity is always checked against this absolute tolerance.
HERMITIAN_ATOL = 1e-12


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the row index of `a` as the high-order digit."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left factor most significant."""
    out = None
    for m in mats:
        out = np.asarray(m) if out is None else np.kron(out, m)
    if out is None:
        raise ValueError("empty product")
    return out


def is_hermitian(m: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.all(np.abs(m - m.conj().T) <= atol))


def _require_hermitian(m: np.ndarray, atol: float) -> np.ndarray:
    m = np.asarray(m)
    if not is_hermitian(m, atol):
        raise ValueError("matrix is not Hermitian within tolerance %g" % atol)
    return m


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered list of named registers; leftmost register is most significant.

    >>> RegisterLayout((("A", 2), ("B", 3))).dim
    6
    """

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.registers]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")
        if any(d < 1 for _, d in self.registers):
            raise ValueError("register dimensions must be >= 1")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def dim_of(self, name: str) -> int:
        for n, d in self.registers:
            if n == name:
                return d
        raise KeyError(name)

    def index(self, name: str) -> int:
        for i, (n, _) in enumerate(self.registers):
            if n == name:
                return i
        raise KeyError(f"unknown register {name!r}")

    def without(self, names) -> "RegisterLayout":
        names = set(names)
        return RegisterLayout(tuple(r for r in self.registers if r[0] not in names))


def partial_trace(m: np.ndarray, layout: RegisterLayout, traced) -> np.ndarray:
    """Trace out the named registers, preserving the order of the rest.

    `m` must be square with dimension equal to ``layout.dim``.
    """
    m = np.asarray(m)
    traced = set(traced)
    unknown = traced - set(layout.names)
    if unknown:
        raise KeyError(f"unknown register(s) {sorted(unknown)}")
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != layout.dim:
        raise ValueError(
            f"operator dimension {m.shape} does not match layout dimension {layout.dim}"
        )
    dims = layout.dims
    k = len(dims)
    t = m.reshape(dims + dims)
    row = list(range(k))
    col = list(range(k, 2 * k))
    keep = [i for i, (name, _) in enumerate(layout.registers) if name not in traced]
    for i in range(k):
        if i not in keep:
            col[i] = row[i]  # repeated index = summed by einsum
    out_axes = [row[i] for i in keep] + [col[i] for i in keep]
    out = np.einsum(t, row + col, out_axes)
    d_keep = 1
    for i in keep:
        d_keep *= dims[i]
    return out.reshape(d_keep, d_keep)


def embed(m: np.ndarray, sub: RegisterLayout, full: RegisterLayout) -> np.ndarray:
    """Tensor `m` (declared on `sub`) with identities so it lives on `full`.

    All registers of `sub` must occur in `full` (same dimensions); the result
    uses `full`'s register order.  This is the adjoint of `partial_trace` over
    the added registers, up to normalisation.
    """
    m = np.asarray(m)
    if m.shape != (sub.dim, sub.dim):
        raise ValueError("operator does not match sub-layout dimension")
    extra = [r for r in full.registers if r[0] not in set(sub.names)]
    for name, d in sub.registers:
        if full.dim_of(name) != d:
            raise ValueError(f"register {name!r} has mismatched dimension")
    d_extra = 1
    for _, d in extra:
        d_extra *= d
    big = np.kron(m, np.eye(d_extra, dtype=m.dtype))
    # `big` is ordered (sub..., extra...); permute into full order.
    interim = RegisterLayout(tuple(sub.registers) + tuple(extra))
    perm = [interim.index(name) for name in full.names]
    k = len(perm)
    t = big.reshape(interim.dims + interim.dims)
    t = np.transpose(t, perm + [k + p for p in perm])
    return np.ascontiguousarray(t.reshape(full.dim, full.dim))


def hermitian_spectrum(m: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in nondecreasing order."""
    m = _require_hermitian(m, atol)
    return np.linalg.eigvalsh(m)


def min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[0])


def max_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[-1])


def psd_project(m: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix: clip negative eigenvalues."""
    m = _require_hermitian(m, atol)
    w, v = np.linalg.eigh(m)
    w = np.maximum(w, 0.0)
    out = (v * w) @ v.conj().T
    # symmetrise away rounding noise from the reconstruction
    return (out + out.conj().T) / 2
