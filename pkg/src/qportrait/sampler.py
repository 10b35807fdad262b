"""Seeded random test objects.

Random numbers come from Philox4x32-10 (Salmon et al., "Parallel random
numbers: as easy as 1, 2, 3"), a counter-based generator. A stream is
addressed by ``(seed, stream)``: the 64-bit seed is the Philox key and block
``b`` of stream ``s`` is the encryption of the counter ``(b_lo, b_hi, s_lo,
s_hi)``. Streams therefore never overlap and any draw can be recomputed from
its address alone.

Derived variates:

* uniform: ``((w0 >> 5) * 2**26 + (w1 >> 6)) / 2**53`` from consecutive 32-bit
  words, two per Philox block;
* normal: Box-Muller on pairs of uniforms, ``r = sqrt(-2 ln(1 - u1))``,
  ``(r cos 2 pi u2, r sin 2 pi u2)``; an odd request discards the last sine;
* exponential: ``-ln(1 - u)``.

Test vector: ``Rng(seed=0, stream=0).raw_block(0)`` is
``(0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8)``.

Every generator accepts either a :class:`Rng` (draws continue from its
position) or a :class:`SeedSpec` (a fresh stream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import BadDims
from .linalg import DEFAULT_TOL, DensityMatrix, Tolerances, UnitaryMatrix, validate_density
from .portrait import CoarseGrainMap, MergeMap, ProbabilityVector

_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF


@njit(cache=True)
def _philox_block(k0, k1, c0, c1, c2, c3):
    m32 = np.uint64(0xFFFFFFFF)
    m0 = np.uint64(0xD2511F53)
    m1 = np.uint64(0xCD9E8D57)
    w0 = np.uint64(0x9E3779B9)
    w1 = np.uint64(0xBB67AE85)
    sh = np.uint64(32)
    for _ in range(10):
        p0 = m0 * c0
        p1 = m1 * c2
        n0 = ((p1 >> sh) ^ c1 ^ k0) & m32
        n1 = p1 & m32
        n2 = ((p0 >> sh) ^ c3 ^ k1) & m32
        n3 = p0 & m32
        c0, c1, c2, c3 = n0, n1, n2, n3
        k0 = (k0 + w0) & m32
        k1 = (k1 + w1) & m32
    return c0, c1, c2, c3


@njit(cache=True)
def _fill_uniforms(out, key0, key1, streams, start):
    """out[i, j] = uniform number ``start + j`` of stream ``streams[i]``."""
    m32 = np.uint64(0xFFFFFFFF)
    n = out.shape[1]
    for i in range(out.shape[0]):
        s = streams[i]
        s0 = s & m32
        s1 = s >> np.uint64(32)
        j = 0
        idx = start
        while j < n:
            block = np.uint64(idx // 2)
            r0, r1, r2, r3 = _philox_block(key0, key1, block & m32, block >> np.uint64(32), s0, s1)
            if idx % 2 == 0:
                out[i, j] = ((r0 >> np.uint64(5)) * 67108864.0 + (r1 >> np.uint64(6))) / 9007199254740992.0
                j += 1
                idx += 1
                if j == n:
                    break
            out[i, j] = ((r2 >> np.uint64(5)) * 67108864.0 + (r3 >> np.uint64(6))) / 9007199254740992.0
            j += 1
            idx += 1


@dataclass(frozen=True)
class SeedSpec:
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")


class _RngBase:
    """Shared variate transforms; ``uniform`` supplies the raw stream."""

    def uniform(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs)
        r = np.sqrt(-2.0 * np.log1p(-u[..., 0::2]))
        ang = 2.0 * np.pi * u[..., 1::2]
        z = np.empty(u.shape, dtype=float)
        z[..., 0::2] = r * np.cos(ang)
        z[..., 1::2] = r * np.sin(ang)
        return z[..., :n]

    def exponential(self, n: int) -> np.ndarray:
        return -np.log1p(-self.uniform(n))

    def complex_normal(self, n: int) -> np.ndarray:
        z = self.normal(2 * n)
        return z[..., 0::2] + 1j * z[..., 1::2]


class Rng(_RngBase):
    """Sequential reader of one ``(seed, stream)`` Philox stream."""

    def __init__(self, seed: int = 0, stream: int = 0):
        spec = SeedSpec(seed, stream)
        self.seed = int(spec.seed)
        self.stream = int(spec.stream)
        self.position = 0
        self._key = (np.uint64(self.seed & _MASK32), np.uint64(self.seed >> 32))
        self._streams = np.array([self.stream], dtype=np.uint64)

    @classmethod
    def from_spec(cls, spec: SeedSpec) -> "Rng":
        return cls(spec.seed, spec.stream)

    def raw_block(self, block: int) -> tuple[int, int, int, int]:
        out = _philox_block(
            self._key[0], self._key[1],
            np.uint64(block & _MASK32), np.uint64(block >> 32),
            np.uint64(self.stream & _MASK32), np.uint64(self.stream >> 32),
        )
        return tuple(int(x) for x in out)

    def uniform(self, n: int) -> np.ndarray:
        out = np.empty((1, n))
        _fill_uniforms(out, self._key[0], self._key[1], self._streams, self.position)
        self.position += n
        return out[0]

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream}, position={self.position})"


class BatchRng(_RngBase):
    """Many streams of one seed read in lockstep; each draw gains a leading axis.

    Row ``i`` of every draw is bit-identical to what ``Rng(seed, streams[i])``
    produces for the same sequence of calls.
    """

    def __init__(self, seed: int, streams):
        self.seed = int(SeedSpec(seed, 0).seed)
        self.streams = np.asarray(streams, dtype=np.uint64).reshape(-1)
        self.position = 0
        self._key = (np.uint64(self.seed & _MASK32), np.uint64(self.seed >> 32))

    def uniform(self, n: int) -> np.ndarray:
        out = np.empty((self.streams.size, n))
        _fill_uniforms(out, self._key[0], self._key[1], self.streams, self.position)
        self.position += n
        return out


def as_rng(rng) -> _RngBase:
    if isinstance(rng, _RngBase):
        return rng
    if isinstance(rng, SeedSpec):
        return Rng.from_spec(rng)
    if rng is None:
        return Rng()
    raise TypeError(f"expected Rng or SeedSpec, got {type(rng).__name__}")


# ---------------------------------------------------------------------------
# raw array generators (work for Rng and BatchRng alike)


def probability_vectors(rng: _RngBase, d: int) -> np.ndarray:
    e = rng.exponential(d)
    return e / e.sum(axis=-1, keepdims=True)


def ginibre(rng: _RngBase, rows: int, cols: int) -> np.ndarray:
    z = rng.complex_normal(rows * cols)
    return z.reshape(z.shape[:-1] + (rows, cols))


def density_arrays(rng: _RngBase, d: int, k: int) -> np.ndarray:
    g = ginibre(rng, d, k)
    rho = g @ np.swapaxes(g.conj(), -1, -2)
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[..., None, None]


def coarse_grain_targets(rng: _RngBase, n: int, m) -> np.ndarray:
    u = rng.uniform(n)
    m = np.asarray(m)
    return np.floor(u * (m[..., None] if m.ndim else m)).astype(np.int64)


# ---------------------------------------------------------------------------
# typed generators


def random_pure_state(d: int, rng=None, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Rank-one projector onto a normalized complex Gaussian vector."""
    if d < 2:
        raise BadDims(f"pure states need d >= 2, got {d}")
    rng = as_rng(rng)
    while True:
        psi = rng.complex_normal(d)
        norm2 = float(np.vdot(psi, psi).real)
        if norm2 >= 1e-24:
            break
    return validate_density(np.outer(psi, psi.conj()) / norm2, tol)


def random_density(d: int, rank: int | None = None, rng=None, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """``G G^dagger / Tr(G G^dagger)`` for a d x rank Ginibre matrix G."""
    rank = d if rank is None else rank
    if d < 1 or not 1 <= rank <= d:
        raise BadDims(f"need 1 <= rank <= d, got d={d}, rank={rank}")
    rng = as_rng(rng)
    return validate_density(density_arrays(rng, d, rank), tol)


def random_unitary(d: int, rng=None, tol: Tolerances = DEFAULT_TOL) -> UnitaryMatrix:
    """Haar unitary: modified Gram-Schmidt on a Ginibre matrix.

    Each column's phase is then chosen so that its first largest-modulus
    entry is real positive. The column phases do not affect tomograms.
    """
    if d < 1:
        raise BadDims(f"need d >= 1, got {d}")
    rng = as_rng(rng)
    q = ginibre(rng, d, d)
    for j in range(d):
        for i in range(j):
            q[:, j] -= np.vdot(q[:, i], q[:, j]) * q[:, i]
        q[:, j] /= np.linalg.norm(q[:, j])
    mod = np.abs(q)
    for j in range(d):
        i = int(np.flatnonzero(mod[:, j] >= mod[:, j].max() * (1 - 1e-8))[0])
        q[:, j] *= abs(q[i, j]) / q[i, j]
    return UnitaryMatrix(q, tol)


def random_probability_vector(d: int, rng=None) -> ProbabilityVector:
    """Uniform point of the (d-1)-simplex: normalized standard exponentials."""
    if d < 1:
        raise BadDims(f"need d >= 1, got {d}")
    return ProbabilityVector(probability_vectors(as_rng(rng), d))


def random_coarse_grain_map(n: int, m: int, rng=None) -> CoarseGrainMap:
    """Each of the n inputs goes to an output drawn uniformly from 0..m-1."""
    if not 1 <= m <= n:
        raise BadDims(f"need 1 <= m <= n, got n={n}, m={m}")
    return CoarseGrainMap(m, tuple(int(t) for t in coarse_grain_targets(as_rng(rng), n, m)))


def random_merge_map(n: int, rng=None) -> MergeMap:
    """Kept set uniform over the 2**n - 1 nonempty subsets; each dropped index
    is assigned to a kept index uniformly.

    Always consumes ``n + 1`` uniforms.
    """
    if n < 2 or n > 52:
        raise BadDims(f"merge maps are sampled for 2 <= n <= 52, got {n}")
    u = as_rng(rng).uniform(n + 1)
    subset = 1 + int(math.floor(u[0] * (2**n - 1)))
    kept = tuple(i for i in range(n) if subset >> i & 1)
    assign = {
        j: kept[int(math.floor(u[1 + j] * len(kept)))]
        for j in range(n)
        if j not in kept
    }
    return MergeMap(n, kept, assign)


def random_count(d: int, rng) -> int:
    """Integer uniform on 1..d (one uniform)."""
    return 1 + int(math.floor(as_rng(rng).uniform(1)[0] * d))
