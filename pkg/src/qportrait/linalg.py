"""Dense complex linear algebra for small Hermitian matrices.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``. The
eigensolver is a cyclic complex Jacobi method compiled with numba; it is
deterministic for identical input and accurate to ~1e-15 for the matrix sizes
this package cares about (dim <= 16).

Matrices are vectorized in row-major order throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
from numba import njit

from .errors import (
    BadSubsystemIndex,
    DimensionTooSmall,
    DomainError,
    LengthMismatch,
    NoConvergence,
    NotHermitian,
    NotPositiveSemidefinite,
    NotSquare,
    NotUnitary,
    ParseError,
    TraceNotOne,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "EigenDecomposition",
    "DensityMatrix",
    "UnitaryMatrix",
    "as_matrix",
    "validate_density",
    "eig_hermitian",
    "matrix_function",
    "xlogx",
    "vectorize",
    "devectorize",
    "embed_qudit",
    "partial_trace",
    "pad_matrix",
    "parse_matrix",
    "matrix_to_json",
    "read_matrix_file",
    "write_matrix_file",
]


@dataclass(frozen=True)
class Tolerances:
    herm_tol: float = 1e-10
    trace_tol: float = 1e-10
    psd_tol: float = 1e-10
    recon_tol: float = 1e-12
    support_tol: float = 1e-12
    prob_tol: float = 1e-10
    unitary_tol: float = 1e-10
    degeneracy_gap: float = 1e-10

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT_TOL = Tolerances()

JACOBI_OFF_TOL = 1e-13
JACOBI_MAX_SWEEPS = 64


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues in ascending order and the matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A certified state: Hermitian, unit trace, positive semidefinite.

    Build instances with :func:`validate_density`; the stored matrix is the
    exactly Hermitian part of the input and ``eig`` is its decomposition.
    """

    matrix: np.ndarray
    eig: EigenDecomposition = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig.eigenvalues

    def clamped_eigenvalues(self, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        """Spectrum with PSD noise and sub-support values set to exactly 0."""
        lam = self.eig.eigenvalues.copy()
        lam[lam < tol.support_tol] = 0.0
        return lam

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


class UnitaryMatrix:
    """A square matrix with ``max |u^dagger u - I| <= unitary_tol``."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, tol: Tolerances = DEFAULT_TOL):
        u = np.array(as_matrix(matrix))
        if u.shape[0] != u.shape[1]:
            raise NotSquare(f"matrix is {u.shape[0]}x{u.shape[1]}")
        dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() if u.size else 0.0
        if dev > tol.unitary_tol:
            raise NotUnitary(f"max |u^dagger u - I| = {dev:.3e}")
        self.matrix = _readonly(u)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"UnitaryMatrix({self.matrix!r})"


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` (array-like or DensityMatrix) into a finite complex 2-D array."""
    if isinstance(m, (DensityMatrix, UnitaryMatrix)):
        return m.matrix
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise NotSquare(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _hermitian_part(a: np.ndarray, tol: Tolerances) -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix is {a.shape[0]}x{a.shape[1]}")
    ad = a.conj().T
    if a.size:
        dev = np.abs(a - ad).max()
        if dev > tol.herm_tol:
            raise NotHermitian(f"max |m - m^dagger| = {dev:.3e} exceeds {tol.herm_tol:.1e}")
    return (a + ad) / 2


# ---------------------------------------------------------------------------
# Jacobi eigensolver


@njit(cache=True)
def _jacobi_kernel(a, off_tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q].real ** 2 + a[p, q].imag ** 2
        if math.sqrt(2.0 * off) < off_tol:
            return v, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                e = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                elif tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                se = s * e
                sec = s * e.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - sec * akq
                    a[k, q] = se * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - se * aqk
                    a[q, k] = sec * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * r
                a[q, q] = aqq + t * r
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - sec * vkq
                    v[k, q] = se * vkp + c * vkq
    return v, max_sweeps, False


@njit(cache=True)
def _fix_phases(v):
    n, k = v.shape
    for j in range(k):
        big = 0.0
        for i in range(n):
            big = max(big, abs(v[i, j]))
        for i in range(n):
            if abs(v[i, j]) >= big * (1.0 - 1e-8):
                z = v[i, j]
                ph = abs(z) / z
                for r in range(n):
                    v[r, j] *= ph
                break


def _canonical_cluster_basis(vc: np.ndarray) -> np.ndarray:
    """Basis of span(vc) that depends only on the subspace, not on vc itself.

    Pivoted Gram-Schmidt on the projections of the standard basis vectors,
    returned in increasing pivot-index order.
    """
    n, k = vc.shape
    proj = vc @ vc.conj().T
    chosen: list[tuple[int, np.ndarray]] = []
    residual = proj.copy()
    for _ in range(k):
        norms = np.linalg.norm(residual, axis=0)
        best = norms.max()
        i = int(np.flatnonzero(norms >= best * (1 - 1e-8))[0])
        w = residual[:, i] / norms[i]
        chosen.append((i, w))
        residual = residual - np.outer(w, w.conj() @ residual)
    chosen.sort(key=lambda t: t[0])
    return np.column_stack([w for _, w in chosen])


def eig_hermitian(
    h,
    tol: Tolerances = DEFAULT_TOL,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.

    Eigenvalues are returned ascending. Each eigenvector has the phase that
    makes its first largest-modulus component real positive; inside a
    degenerate cluster (gap < ``tol.degeneracy_gap``) the basis is rebuilt
    canonically from the cluster's projector, so the output depends only on
    the input matrix.
    """
    a = _hermitian_part(as_matrix(h), tol)
    n = a.shape[0]
    if n == 0:
        return EigenDecomposition(_readonly(np.zeros(0)), _readonly(np.zeros((0, 0), complex)))
    work = np.ascontiguousarray(a)
    scale = max(1.0, math.sqrt(float((work.real**2 + work.imag**2).sum())))
    v, sweeps, ok = _jacobi_kernel(work, JACOBI_OFF_TOL * scale, max_sweeps)
    if not ok:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = work.diagonal().real.copy()
    order = np.argsort(lam, kind="stable")
    lam = lam[order]
    v = v[:, order]

    if n > 1 and np.diff(lam).min() < tol.degeneracy_gap:
        start = 0
        for stop in range(1, n + 1):
            if stop == n or lam[stop] - lam[stop - 1] >= tol.degeneracy_gap:
                if stop - start > 1:
                    v[:, start:stop] = _canonical_cluster_basis(v[:, start:stop])
                start = stop
    v = np.ascontiguousarray(v)
    _fix_phases(v)
    return EigenDecomposition(_readonly(lam), _readonly(v), sweeps)


def _eig_of(h, tol: Tolerances) -> EigenDecomposition:
    if isinstance(h, DensityMatrix):
        return h.eig
    if isinstance(h, EigenDecomposition):
        return h
    return eig_hermitian(h, tol)


def validate_density(m, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Certify ``m`` as a density matrix and return it with its eigendecomposition."""
    if isinstance(m, DensityMatrix):
        return m
    a = as_matrix(m)
    h = _hermitian_part(a, tol)
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > tol.trace_tol:
        raise TraceNotOne(f"trace is {tr:.12g}")
    eig = eig_hermitian(h, tol)
    lo = float(eig.eigenvalues[0])
    if lo < -tol.psd_tol:
        raise NotPositiveSemidefinite(lo)
    return DensityMatrix(_readonly(h), eig)


def matrix_function(
    h,
    f: Callable[[np.ndarray], np.ndarray],
    domain: tuple[float, float] | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> np.ndarray:
    """Return ``V diag(f(lambda)) V^dagger``.

    ``domain`` is the closed interval on which ``f`` is defined. Eigenvalues
    within ``psd_tol`` outside it are clamped onto it; anything further out is
    a :class:`DomainError`.
    """
    eig = _eig_of(h, tol)
    lam = eig.eigenvalues.copy()
    if domain is not None:
        lo, hi = domain
        if lam.size and (lam.min() < lo - tol.psd_tol or lam.max() > hi + tol.psd_tol):
            raise DomainError(f"spectrum [{lam.min():.3e}, {lam.max():.3e}] outside [{lo}, {hi}]")
        lam = np.clip(lam, lo, hi)
    v = eig.eigenvectors
    return (v * np.asarray(f(lam), dtype=np.complex128)) @ v.conj().T


def xlogx(x) -> np.ndarray:
    """Elementwise x*ln(x) with the convention 0*ln(0) = 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def vectorize(m) -> np.ndarray:
    return np.array(as_matrix(m)).reshape(-1)


def devectorize(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size != rows * cols:
        raise LengthMismatch(f"vector of length {v.size} cannot fill a {rows}x{cols} matrix")
    return v.reshape(rows, cols).copy()


def pad_matrix(m, size: int) -> np.ndarray:
    """Zero-pad a square matrix to ``size`` x ``size`` (leading block kept)."""
    a = as_matrix(m)
    d = a.shape[0]
    if size < d:
        raise DimensionTooSmall(f"cannot pad a {d}x{d} matrix to {size}")
    out = np.zeros((size, size), dtype=np.complex128)
    out[:d, :d] = a
    return out


def embed_qudit(rho, m: int, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Place a d-level state into the first d binary-ordered basis states of m qubits."""
    rho = validate_density(rho, tol)
    if 2**m < rho.dim:
        raise DimensionTooSmall(f"{m} qubits cannot hold dimension {rho.dim}")
    return validate_density(pad_matrix(rho, 2**m), tol)


def _num_qubits(dim: int) -> int:
    m = dim.bit_length() - 1
    if dim < 1 or 2**m != dim:
        raise BadSubsystemIndex(f"dimension {dim} is not a power of two")
    return m


def partial_trace(rho, keep: Iterable[int], tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Trace out every qubit not in ``keep``.

    Qubits are numbered 0..m-1 with qubit 0 the most significant bit of the
    basis index. ``keep`` may be empty, which yields the 1x1 matrix holding
    the trace.
    """
    a = as_matrix(rho)
    m = _num_qubits(a.shape[0])
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= m for k in keep):
        raise BadSubsystemIndex(f"subsystems {keep} not within 0..{m - 1}")
    t = a.reshape([2] * (2 * m))
    rows = list(range(m))
    cols = [i + m if i in keep else i for i in range(m)]
    out = keep + [k + m for k in keep]
    reduced = np.einsum(t, rows + cols, out).reshape(2 ** len(keep), 2 ** len(keep))
    return validate_density(reduced, tol)


# ---------------------------------------------------------------------------
# matrix file format: {"rows": R, "cols": C, "re": [[...]], "im": [[...]]}


def _parse_part(obj: dict, key: str, rows: int, cols: int) -> np.ndarray:
    part = obj[key]
    if not isinstance(part, list) or len(part) != rows:
        raise ParseError(f'"{key}" must be a list of {rows} rows')
    out = np.empty((rows, cols))
    for i, row in enumerate(part):
        if not isinstance(row, list) or len(row) != cols:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ParseError(f'"{key}" row {i} has {got} entries, expected {cols}')
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f'"{key}" row {i} field {j} is not a number: {x!r}')
            out[i, j] = x
    return out


def parse_matrix(obj: dict) -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError("matrix must be a JSON object")
    for key in ("rows", "cols", "re"):
        if key not in obj:
            raise ParseError(f'missing field "{key}"')
    rows, cols = obj["rows"], obj["cols"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise ParseError('"rows" and "cols" must be nonnegative integers')
    m = _parse_part(obj, "re", rows, cols).astype(np.complex128)
    if "im" in obj:
        m += 1j * _parse_part(obj, "im", rows, cols)
    if not np.all(np.isfinite(m)):
        raise ParseError("matrix has non-finite entries")
    return m


def matrix_to_json(m) -> dict:
    a = np.asarray(m, dtype=np.complex128)
    obj = {"rows": a.shape[0], "cols": a.shape[1], "re": a.real.tolist()}
    if np.any(a.imag != 0):
        obj["im"] = a.imag.tolist()
    return obj


def read_matrix_file(path: str | Path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read matrix file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return parse_matrix(obj)


def write_matrix_file(path: str | Path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m)) + "\n")
