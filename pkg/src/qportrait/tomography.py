"""Probability representation of qudit states.

A tomogram is the outcome distribution ``w_m = <m| u rho u^dagger |m>`` of a
measurement in the basis rotated by a unitary ``u``. Writing ``rho = u0
diag(lam) u0^dagger`` gives the spectral form ``w = |u u0|^2 lam``, where
``|a|^2`` is the elementwise squared modulus. ``|u u0|^2`` is doubly
stochastic, so ``H(w) >= S(rho)`` for every ``u``, with equality at
``u = u0^dagger``; :func:`min_tomographic_entropy` confirms the minimum
numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .entropy import shannon, von_neumann
from .errors import DimMismatch, OptimizerDidNotConverge
from .linalg import DEFAULT_TOL, Tolerances, UnitaryMatrix, validate_density
from .portrait import ProbabilityVector
from .sampler import Rng, as_rng

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


def _as_unitary(u, tol: Tolerances) -> UnitaryMatrix:
    return u if isinstance(u, UnitaryMatrix) else UnitaryMatrix(u, tol)


@dataclass(frozen=True, eq=False)
class Tomogram:
    w: ProbabilityVector
    u: UnitaryMatrix

    def __post_init__(self):
        if self.w.dim != self.u.dim:
            raise DimMismatch(f"tomogram of length {self.w.dim} for a {self.u.dim}-dim unitary")


def _check_dims(rho, u) -> None:
    if rho.dim != u.dim:
        raise DimMismatch(f"state has dimension {rho.dim}, unitary {u.dim}")


def tomogram(rho, u, tol: Tolerances = DEFAULT_TOL) -> Tomogram:
    """Diagonal of ``u rho u^dagger``."""
    rho = validate_density(rho, tol)
    u = _as_unitary(u, tol)
    _check_dims(rho, u)
    m = u.matrix
    w = np.einsum("ij,jk,ik->i", m, rho.matrix, m.conj()).real
    return Tomogram(ProbabilityVector(w, tol), u)


def unistochastic(u, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Elementwise ``|u_jk|^2``; doubly stochastic for unitary ``u``."""
    m = _as_unitary(u, tol).matrix
    return m.real**2 + m.imag**2


def tomogram_spectral(rho, u, tol: Tolerances = DEFAULT_TOL) -> Tomogram:
    """``|u u0|^2 lam`` with ``u0`` the eigenvector matrix of ``rho``."""
    rho = validate_density(rho, tol)
    u = _as_unitary(u, tol)
    _check_dims(rho, u)
    a = u.matrix @ rho.eig.eigenvectors
    w = (a.real**2 + a.imag**2) @ rho.eigenvalues
    return Tomogram(ProbabilityVector(w, tol), u)


def joint_probability(tomograms: Sequence[Tomogram], phi) -> np.ndarray:
    """``P[m, i] = w(m | u_i) phi_i`` for a finite sample of unitaries."""
    phi = phi if isinstance(phi, ProbabilityVector) else ProbabilityVector(phi)
    if len(tomograms) != phi.dim:
        raise DimMismatch(f"{len(tomograms)} tomograms but {phi.dim} weights")
    dims = {t.w.dim for t in tomograms}
    if len(dims) != 1:
        raise DimMismatch(f"tomograms have different lengths {sorted(dims)}")
    return np.column_stack([t.w.p for t in tomograms]) * phi.p


# ---------------------------------------------------------------------------
# Givens parameterization


def givens_pairs(n: int) -> list[tuple[int, int]]:
    """Index pairs (j, k), j < k, in lexicographic order."""
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def _fold_angle(theta):
    """Reflect into [0, pi/2] (continuous, period pi)."""
    return np.abs(np.mod(np.asarray(theta, dtype=float) + HALF_PI, math.pi) - HALF_PI)


@dataclass(frozen=True, eq=False)
class UnitaryParams:
    """Rotation angles in [0, pi/2] and phases in [0, 2 pi), one of each per pair."""

    dim: int
    thetas: np.ndarray
    phis: np.ndarray = field(default=None)

    def __post_init__(self):
        count = self.dim * (self.dim - 1) // 2
        thetas = _fold_angle(self.thetas).reshape(-1)
        phis = np.zeros(count) if self.phis is None else np.asarray(self.phis, dtype=float).reshape(-1)
        if thetas.size != count or phis.size != count:
            raise ValueError(f"dimension {self.dim} needs {count} angles and {count} phases")
        phis = np.mod(phis, TWO_PI)
        thetas.setflags(write=False)
        phis.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryParams":
        return cls(dim, np.zeros(dim * (dim - 1) // 2))

    @classmethod
    def from_array(cls, dim: int, x) -> "UnitaryParams":
        x = np.asarray(x, dtype=float)
        half = x.size // 2
        return cls(dim, x[:half], x[half:])

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.thetas, self.phis])

    def to_json(self) -> list[float]:
        return self.to_array().tolist()


def givens(n: int, j: int, k: int, theta: float, phi: float) -> np.ndarray:
    g = np.eye(n, dtype=np.complex128)
    c, s = math.cos(theta), math.sin(theta)
    g[j, j] = c
    g[j, k] = s * np.exp(1j * phi)
    g[k, j] = -s * np.exp(-1j * phi)
    g[k, k] = c
    return g


def build_unitary(params: UnitaryParams, tol: Tolerances = DEFAULT_TOL) -> UnitaryMatrix:
    """Product of complex Givens rotations in lexicographic pair order."""
    n = params.dim
    u = np.eye(n, dtype=np.complex128)
    for (j, k), theta, phi in zip(givens_pairs(n), params.thetas, params.phis):
        u = u @ givens(n, j, k, theta, phi)
    return UnitaryMatrix(u, tol)


def decompose_unitary(u, tol: Tolerances = DEFAULT_TOL) -> UnitaryParams:
    """Parameters with ``build_unitary(params) = D u`` for a diagonal phase matrix D.

    Left-multiplying ``u^dagger`` by the rotations in reverse pair order clears
    its strict upper triangle row by row (pair (j, k) zeroes entry (j, k)
    against the pivot row k), leaving a diagonal unitary.
    """
    m = np.array(_as_unitary(u, tol).matrix.conj().T)
    n = m.shape[0]
    pairs = givens_pairs(n)
    thetas = np.zeros(len(pairs))
    phis = np.zeros(len(pairs))
    for idx in reversed(range(len(pairs))):
        j, k = pairs[idx]
        a, b = m[j, k], m[k, k]
        if abs(a) == 0.0:
            continue
        theta = math.atan2(abs(a), abs(b))
        phi = 0.0 if abs(b) == 0.0 else float(np.angle(-a * np.conj(b)))
        thetas[idx], phis[idx] = theta, phi
        c, s = math.cos(theta), math.sin(theta)
        row_j, row_k = m[j].copy(), m[k].copy()
        m[j] = c * row_j + s * np.exp(1j * phi) * row_k
        m[k] = -s * np.exp(-1j * phi) * row_j + c * row_k
    return UnitaryParams(n, thetas, phis)


# ---------------------------------------------------------------------------
# minimization over the unitary group


@njit(cache=True)
def _tomographic_entropy(x, pj, pk, u0, lam):
    n = u0.shape[0]
    npairs = pj.shape[0]
    u = np.eye(n, dtype=np.complex128)
    for p in range(npairs):
        t = abs(((x[p] + 0.5 * np.pi) % np.pi) - 0.5 * np.pi)
        c = math.cos(t)
        s = math.sin(t)
        e = complex(math.cos(x[npairs + p]), math.sin(x[npairs + p]))
        j = pj[p]
        k = pk[p]
        for r in range(n):
            urj = u[r, j]
            urk = u[r, k]
            u[r, j] = c * urj - s * e.conjugate() * urk
            u[r, k] = s * e * urj + c * urk
    h = 0.0
    for m in range(n):
        w = 0.0
        for l in range(n):
            z = 0j
            for i in range(n):
                z += u[m, i] * u0[i, l]
            w += (z.real * z.real + z.imag * z.imag) * lam[l]
        if w > 0.0:
            h -= w * math.log(w)
    return h


@njit(cache=True)
def _nelder_mead(x0, step, max_iters, fatol, xatol, pj, pk, u0, lam):
    """Nelder-Mead (reflect 1, expand 2, contract 1/2, shrink 1/2).

    Stops when both the spread of simplex values is <= fatol and the largest
    vertex offset from the best one is <= xatol, or after max_iters.
    """
    n = x0.size
    sim = np.empty((n + 1, n))
    fs = np.empty(n + 1)
    sim[0] = x0
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step
    for i in range(n + 1):
        fs[i] = _tomographic_entropy(sim[i], pj, pk, u0, lam)
    order = np.argsort(fs, kind="mergesort")
    sim = sim[order]
    fs = fs[order]
    it = 0
    converged = False
    while it < max_iters:
        if np.max(np.abs(fs[1:] - fs[0])) <= fatol and np.max(np.abs(sim[1:] - sim[0])) <= xatol:
            converged = True
            break
        it += 1
        xbar = np.zeros(n)
        for i in range(n):
            xbar += sim[i]
        xbar /= n
        worst = sim[n]
        xr = 2.0 * xbar - worst
        fr = _tomographic_entropy(xr, pj, pk, u0, lam)
        shrink = False
        if fr < fs[0]:
            xe = 3.0 * xbar - 2.0 * worst
            fe = _tomographic_entropy(xe, pj, pk, u0, lam)
            if fe < fr:
                sim[n] = xe
                fs[n] = fe
            else:
                sim[n] = xr
                fs[n] = fr
        elif fr < fs[n - 1]:
            sim[n] = xr
            fs[n] = fr
        elif fr < fs[n]:
            xc = 1.5 * xbar - 0.5 * worst
            fc = _tomographic_entropy(xc, pj, pk, u0, lam)
            if fc <= fr:
                sim[n] = xc
                fs[n] = fc
            else:
                shrink = True
        else:
            xcc = 0.5 * xbar + 0.5 * worst
            fcc = _tomographic_entropy(xcc, pj, pk, u0, lam)
            if fcc < fs[n]:
                sim[n] = xcc
                fs[n] = fcc
            else:
                shrink = True
        if shrink:
            for i in range(1, n + 1):
                sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                fs[i] = _tomographic_entropy(sim[i], pj, pk, u0, lam)
        order = np.argsort(fs, kind="mergesort")
        sim = sim[order]
        fs = fs[order]
    return sim[0].copy(), fs[0], it, converged


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 20
    max_iters: int = 2000
    fatol: float = 1e-10
    xatol: float = 1e-8
    step: float = 0.1
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 0 or self.max_iters < 1 or self.tol <= 0:
            raise ValueError("need restarts >= 0, max_iters >= 1, tol > 0")


class TomographicMinimum(NamedTuple):
    min_entropy: float
    argmin: UnitaryParams
    certificate: float
    von_neumann: float
    best_start: int
    start_values: tuple[float, ...]


def tomographic_entropy(rho, params: UnitaryParams, tol: Tolerances = DEFAULT_TOL) -> float:
    """Shannon entropy of the tomogram measured with ``build_unitary(params)``."""
    return shannon(tomogram_spectral(rho, build_unitary(params, tol), tol).w, tol)


def min_tomographic_entropy(
    rho,
    cfg: OptimizerConfig = OptimizerConfig(),
    rng=None,
    tol: Tolerances = DEFAULT_TOL,
) -> TomographicMinimum:
    """Minimize tomogram entropy over unitaries and compare with S(rho).

    Start 0 is the analytic minimizer ``u0^dagger``; starts 1..restarts are
    uniform in the parameter box, drawn from ``rng`` (default: stream 0 of
    ``cfg.seed``). The best value wins, ties going to the lowest start index.
    Raises :class:`OptimizerDidNotConverge` when the certificate
    ``min - S(rho)`` exceeds ``cfg.tol``.
    """
    rho = validate_density(rho, tol)
    n = rho.dim
    s_vn = von_neumann(rho, tol)
    lam = rho.clamped_eigenvalues(tol)
    u0 = np.ascontiguousarray(rho.eig.eigenvectors)
    pairs = givens_pairs(n)
    if not pairs:
        return TomographicMinimum(s_vn, UnitaryParams.identity(n), 0.0, s_vn, 0, (s_vn,))
    pj = np.array([p[0] for p in pairs], dtype=np.int64)
    pk = np.array([p[1] for p in pairs], dtype=np.int64)
    rng = Rng(cfg.seed, 0) if rng is None else as_rng(rng)

    starts = [decompose_unitary(u0.conj().T, tol).to_array()]
    for _ in range(cfg.restarts):
        u = rng.uniform(2 * len(pairs))
        starts.append(np.concatenate([u[: len(pairs)] * HALF_PI, u[len(pairs):] * TWO_PI]))

    best = None
    values = []
    for i, x0 in enumerate(starts):
        x, f, _, _ = _nelder_mead(
            np.ascontiguousarray(x0), cfg.step, cfg.max_iters, cfg.fatol, cfg.xatol,
            pj, pk, u0, lam,
        )
        values.append(float(f))
        if best is None or f < best[0]:
            best = (float(f), i, x)
    value, idx, x = best
    result = TomographicMinimum(value, UnitaryParams.from_array(n, x), value - s_vn, s_vn, idx, tuple(values))
    if result.certificate > cfg.tol:
        exc = OptimizerDidNotConverge(result.certificate, cfg.tol)
        exc.result = result
        raise exc
    return result
