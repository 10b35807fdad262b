"""Portrait maps.

Two families of 0/1 maps:

* :class:`CoarseGrainMap` merges the entries of a probability vector. It is a
  column-stochastic matrix with exactly one unit per column, stored as the
  target index of every input.
* :class:`MergeMap` acts on density matrices. It keeps the principal
  submatrix on a set of indices ``kept`` and adds the diagonal weight of every
  dropped index onto the diagonal of the kept index it is assigned to. All
  off-diagonal entries touching a dropped index are discarded. Such maps are
  positive and trace preserving, and on the vectorized state they are 0/1
  matrices (:func:`merge_map_matrix`).

Indices are 0-based in the Python API. The JSON forms use 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import (
    DimMismatch,
    InternalPositivityBreach,
    InvalidMap,
    InvalidProbabilityVector,
    PortraitError,
)
from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    Tolerances,
    as_matrix,
    embed_qudit,
    partial_trace,
    validate_density,
)


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """Nonnegative vector summing to one.

    Entries within ``prob_tol`` below zero are clamped to zero.
    """

    p: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if isinstance(self.p, ProbabilityVector):
            p = np.array(self.p.p)
        else:
            p = np.array(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidProbabilityVector(f"expected a nonempty 1-D vector, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvalidProbabilityVector("non-finite probability")
        if p.min() < -self.tol.prob_tol:
            raise InvalidProbabilityVector(f"negative probability {p.min():.3e}")
        total = p.sum()
        if abs(total - 1.0) > self.tol.prob_tol:
            raise InvalidProbabilityVector(f"probabilities sum to {total:.12g}")
        p[p < 0] = 0.0
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        return self.p.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.p, dtype=dtype)

    def __len__(self):
        return self.p.size


@dataclass(frozen=True)
class CoarseGrainMap:
    """0/1 column-stochastic map: input ``k`` is sent to output ``targets[k]``."""

    out_dim: int
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.out_dim < 1 or not self.targets:
            raise InvalidMap("coarse-grain map needs out_dim >= 1 and at least one input")
        bad = [t for t in self.targets if not 0 <= t < self.out_dim]
        if bad:
            raise InvalidMap(f"targets {bad} outside 0..{self.out_dim - 1}")

    @property
    def in_dim(self) -> int:
        return len(self.targets)

    def matrix(self) -> np.ndarray:
        m = np.zeros((self.out_dim, self.in_dim))
        m[list(self.targets), range(self.in_dim)] = 1.0
        return m

    @classmethod
    def from_matrix(cls, m) -> "CoarseGrainMap":
        m = np.asarray(m)
        if m.ndim != 2 or not np.isin(m, (0, 1)).all() or not (m.sum(axis=0) == 1).all():
            raise InvalidMap("not a 0/1 column-stochastic matrix")
        return cls(m.shape[0], tuple(int(np.flatnonzero(col)[0]) for col in m.T))

    def to_json(self) -> dict:
        return {"out_dim": self.out_dim, "targets": [t + 1 for t in self.targets]}

    @classmethod
    def from_json(cls, obj: dict) -> "CoarseGrainMap":
        try:
            return cls(int(obj["out_dim"]), tuple(int(t) - 1 for t in obj["targets"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidMap(f"bad coarse-grain map JSON: {exc}") from exc


@dataclass(frozen=True, eq=False)
class MergeMap:
    """Keep the principal block on ``kept``; fold dropped diagonals via ``assign``."""

    in_dim: int
    kept: tuple[int, ...]
    assign: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        kept = tuple(int(k) for k in self.kept)
        assign = {int(j): int(k) for j, k in dict(self.assign).items()}
        n = self.in_dim
        if not kept:
            raise InvalidMap("kept set is empty")
        if any(b <= a for a, b in zip(kept, kept[1:])):
            raise InvalidMap(f"kept indices {kept} not strictly increasing")
        if kept[0] < 0 or kept[-1] >= n:
            raise InvalidMap(f"kept indices {kept} outside 0..{n - 1}")
        dropped = set(range(n)) - set(kept)
        if set(assign) != dropped:
            raise InvalidMap(f"assign must cover exactly the dropped indices {sorted(dropped)}")
        if any(k not in kept for k in assign.values()):
            raise InvalidMap("assign maps onto an index that is not kept")
        object.__setattr__(self, "kept", kept)
        object.__setattr__(self, "assign", MappingProxyType(assign))

    def __eq__(self, other):
        if not isinstance(other, MergeMap):
            return NotImplemented
        return (self.in_dim, self.kept, dict(self.assign)) == (other.in_dim, other.kept, dict(other.assign))

    def __hash__(self):
        return hash((self.in_dim, self.kept, tuple(sorted(self.assign.items()))))

    def __repr__(self):
        return f"MergeMap(in_dim={self.in_dim}, kept={self.kept}, assign={dict(self.assign)})"

    @property
    def out_dim(self) -> int:
        return len(self.kept)

    @classmethod
    def identity(cls, n: int) -> "MergeMap":
        return cls(n, tuple(range(n)), {})

    def coarse_grain(self) -> CoarseGrainMap:
        """The induced map on diagonals: kept index -> its position, dropped -> its assignee's."""
        pos = {k: i for i, k in enumerate(self.kept)}
        return CoarseGrainMap(self.out_dim, tuple(pos[j] if j in pos else pos[self.assign[j]] for j in range(self.in_dim)))

    def to_json(self) -> dict:
        return {
            "in_dim": self.in_dim,
            "kept": [k + 1 for k in self.kept],
            "assign": {str(j + 1): k + 1 for j, k in sorted(self.assign.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MergeMap":
        try:
            assign = {int(j) - 1: int(k) - 1 for j, k in obj.get("assign", {}).items()}
            return cls(int(obj["in_dim"]), tuple(int(k) - 1 for k in obj["kept"]), assign)
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InvalidMap(f"bad merge map JSON: {exc}") from exc


def apply_coarse_grain(m: CoarseGrainMap, p) -> ProbabilityVector:
    p = p if isinstance(p, ProbabilityVector) else ProbabilityVector(p)
    if m.in_dim != p.dim:
        raise DimMismatch(f"map takes {m.in_dim} entries, vector has {p.dim}")
    return ProbabilityVector(np.bincount(m.targets, weights=p.p, minlength=m.out_dim))


def coarse_grain_batch(targets: np.ndarray, out_dims, p: np.ndarray, width: int | None = None) -> np.ndarray:
    """Row-wise coarse graining of a batch of vectors.

    ``targets[i, k]`` is the output slot of input ``k`` in trial ``i``. The
    result has ``width`` columns (default: the largest output dimension); slots
    beyond a trial's own output dimension stay zero.
    """
    b, n = p.shape
    width = int(np.max(out_dims)) if width is None else width
    flat = (np.arange(b)[:, None] * width + targets).ravel()
    return np.bincount(flat, weights=p.ravel(), minlength=b * width).reshape(b, width)


def qutrit_coarse_grain_maps() -> tuple[CoarseGrainMap, CoarseGrainMap]:
    """The two 3x3 stochastic matrices merging entries (1,2) and (1,3)."""
    return (
        CoarseGrainMap.from_matrix([[1, 1, 0], [0, 0, 1], [0, 0, 0]]),
        CoarseGrainMap.from_matrix([[1, 0, 1], [0, 1, 0], [0, 0, 0]]),
    )


def qutrit_standard_maps() -> tuple[MergeMap, MergeMap]:
    """Merge maps giving the two qubit portraits of a qutrit.

    The first keeps levels 0 and 2 and folds level 1 into level 0; the second
    keeps levels 0 and 1 and folds level 2 into level 0.
    """
    return MergeMap(3, (0, 2), {1: 0}), MergeMap(3, (0, 1), {2: 0})


def portrait_array(map: MergeMap, rho) -> np.ndarray:
    """Uncertified portrait of any square array (no positivity check)."""
    a = as_matrix(rho)
    if a.shape != (map.in_dim, map.in_dim):
        raise DimMismatch(f"map expects dimension {map.in_dim}, got {a.shape}")
    idx = list(map.kept)
    out = a[np.ix_(idx, idx)].copy()
    pos = {k: i for i, k in enumerate(map.kept)}
    for j, k in sorted(map.assign.items()):
        out[pos[k], pos[k]] += a[j, j]
    return out


def portrait_density(map: MergeMap, rho, tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Apply a merge map to a density matrix and certify the result."""
    out = portrait_array(map, validate_density(rho, tol))
    try:
        return validate_density(out, tol)
    except PortraitError as exc:
        raise InternalPositivityBreach(f"portrait under {map!r} failed certification: {exc}") from exc


def merge_map_matrix(map: MergeMap) -> np.ndarray:
    """The |K|^2 x N^2 0/1 matrix acting on row-major vectorized states."""
    n, kept = map.in_dim, map.kept
    k = len(kept)
    m = np.zeros((k * k, n * n), dtype=np.complex128)
    for r, kr in enumerate(kept):
        for s, ks in enumerate(kept):
            m[r * k + s, kr * n + ks] = 1
    pos = {kk: i for i, kk in enumerate(kept)}
    for j, target in map.assign.items():
        r = pos[target]
        m[r * k + r, j * n + j] = 1
    return m


def portrait_pair_via_embedding(rho, tol: Tolerances = DEFAULT_TOL) -> tuple[DensityMatrix, DensityMatrix]:
    """Qubit marginals of a qutrit placed in two qubits as |00>, |01>, |10>.

    Tracing out the second qubit reproduces the first standard portrait and
    tracing out the first reproduces the second.
    """
    rho = validate_density(rho, tol)
    if rho.dim != 3:
        raise DimMismatch(f"expected a qutrit, got dimension {rho.dim}")
    two_qubit = embed_qudit(rho, 2, tol)
    return partial_trace(two_qubit, [0], tol), partial_trace(two_qubit, [1], tol)
