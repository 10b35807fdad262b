"""Entropies and the inequality margins built from them.

All logarithms are natural (nats) and ``0 ln 0`` is taken as 0. Spectra have
values below ``support_tol`` set to zero before use; probability vectors only
lose their negative round-off, which keeps ``x ln x`` continuous (an
optimizer would otherwise gain by pushing entries under the cutoff).

Every ``*_margin`` function returns an :class:`InequalityMargin` for a
statement ``left <= right``; ``margin = right - left`` is nonnegative exactly
when the inequality holds.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import BadOrder, DimensionTooLarge, DimMismatch
from .linalg import (
    DEFAULT_TOL,
    DensityMatrix,
    Tolerances,
    embed_qudit,
    pad_matrix,
    partial_trace,
    validate_density,
    xlogx,
)
from .portrait import (
    CoarseGrainMap,
    ProbabilityVector,
    apply_coarse_grain,
    portrait_array,
    portrait_density,
    qutrit_standard_maps,
)

INFINITE = math.inf

_ORDER_EPS = 1e-9


def _probs(p, tol: Tolerances) -> np.ndarray:
    """Probabilities along the last axis with negative round-off zeroed."""
    x = np.array(p.p if isinstance(p, ProbabilityVector) else p, dtype=float)
    x[x < 0] = 0.0
    return x


def _check_order(a: float, name: str) -> None:
    if not a > 0 or abs(a - 1) <= _ORDER_EPS:
        raise BadOrder(f"{name} must be positive and different from 1, got {a}")


def shannon(p, tol: Tolerances = DEFAULT_TOL):
    """-sum p ln p along the last axis (arrays may carry leading batch axes)."""
    h = np.maximum(-xlogx(_probs(p, tol)).sum(axis=-1), 0.0)
    return float(h) if np.ndim(h) == 0 else h


def renyi(p, alpha: float, tol: Tolerances = DEFAULT_TOL):
    _check_order(alpha, "alpha")
    x = _probs(p, tol)
    h = np.log((x**alpha).sum(axis=-1)) / (1.0 - alpha)
    return float(h) if np.ndim(h) == 0 else h


def tsallis(p, q: float, tol: Tolerances = DEFAULT_TOL):
    _check_order(q, "q")
    x = _probs(p, tol)
    h = (1.0 - (x**q).sum(axis=-1)) / (q - 1.0)
    return float(h) if np.ndim(h) == 0 else h


ENTROPY_KINDS = ("shannon", "renyi", "tsallis")


def classical_entropy(p, kind: str = "shannon", order: float | None = None, tol: Tolerances = DEFAULT_TOL):
    if kind == "shannon":
        return shannon(p, tol)
    if order is None:
        raise BadOrder(f"{kind} entropy needs an order parameter")
    if kind == "renyi":
        return renyi(p, order, tol)
    if kind == "tsallis":
        return tsallis(p, order, tol)
    raise ValueError(f"unknown entropy kind {kind!r}")


def von_neumann(rho, tol: Tolerances = DEFAULT_TOL) -> float:
    rho = validate_density(rho, tol)
    return shannon(rho.clamped_eigenvalues(tol), tol)


def quantum_relative_entropy(a, b, tol: Tolerances = DEFAULT_TOL) -> float:
    """Umegaki relative entropy Tr a (ln a - ln b), evaluated spectrally.

    Returns :data:`INFINITE` when the support of ``a`` is not contained in the
    support of ``b``.
    """
    a = validate_density(a, tol)
    b = validate_density(b, tol)
    if a.dim != b.dim:
        raise DimMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    lam = a.clamped_eigenvalues(tol)
    mu = b.clamped_eigenvalues(tol)
    w = b.eig.eigenvectors
    # weight of a along each eigenvector of b
    overlap = np.einsum("ij,ik,kj->j", w.conj(), a.matrix, w).real
    null = mu <= tol.support_tol
    if np.any(overlap[null] > tol.support_tol):
        return INFINITE
    cross = float(np.sum(overlap[~null] * np.log(mu[~null])))
    return float(xlogx(lam).sum()) - cross


def digest(x) -> str:
    """Short stable fingerprint of an input array."""
    a = np.ascontiguousarray(np.asarray(x.matrix if isinstance(x, DensityMatrix) else x))
    return hashlib.sha256(a.tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class InequalityMargin:
    inequality: str
    left: float
    right: float
    margin: float
    infinite: bool = False
    digest: str = ""

    @classmethod
    def of(cls, inequality: str, left: float, right: float, digest: str = "") -> "InequalityMargin":
        left, right = float(left), float(right)
        infinite = math.isinf(right)
        return cls(inequality, left, right, right - left, infinite, digest)

    @property
    def holds(self) -> bool:
        return self.margin >= 0

    def satisfied(self, tol: float) -> bool:
        return self.margin >= -tol

    def to_json(self) -> dict:
        return {
            "inequality": self.inequality,
            "left": self.left,
            "right": None if self.infinite else self.right,
            "margin": None if self.infinite else self.margin,
            "infinite": self.infinite,
            "digest": self.digest,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "InequalityMargin":
        if obj.get("infinite"):
            return cls(obj["inequality"], obj["left"], INFINITE, INFINITE, True, obj.get("digest", ""))
        return cls(obj["inequality"], obj["left"], obj["right"], obj["margin"], False, obj.get("digest", ""))


def classical_portrait_margin(
    p,
    m: CoarseGrainMap,
    kind: str = "shannon",
    order: float | None = None,
    tol: Tolerances = DEFAULT_TOL,
) -> InequalityMargin:
    """Coarse graining never increases entropy: H(m p) <= H(p)."""
    p = p if isinstance(p, ProbabilityVector) else ProbabilityVector(p)
    coarse = apply_coarse_grain(m, p)
    name = kind if order is None else f"{kind}({order:g})"
    return InequalityMargin.of(
        f"coarse-grain-{name}",
        classical_entropy(coarse, kind, order, tol),
        classical_entropy(p, kind, order, tol),
        digest(p.p),
    )


def _qutrit(rho, tol: Tolerances) -> DensityMatrix:
    rho = validate_density(rho, tol)
    if rho.dim != 3:
        raise DimMismatch(f"expected a qutrit, got dimension {rho.dim}")
    return rho


def qutrit_portraits(rho, tol: Tolerances = DEFAULT_TOL) -> tuple[DensityMatrix, DensityMatrix]:
    m1, m2 = qutrit_standard_maps()
    rho = _qutrit(rho, tol)
    return portrait_density(m1, rho, tol), portrait_density(m2, rho, tol)


def subadditivity_margin(rho, tol: Tolerances = DEFAULT_TOL) -> tuple[InequalityMargin, float]:
    """S(rho) <= S(rho_1) + S(rho_2) for the two qubit portraits of a qutrit.

    Returns the margin and the information ``I_q = S(rho_1) + S(rho_2) - S(rho)``.
    """
    rho = _qutrit(rho, tol)
    r1, r2 = qutrit_portraits(rho, tol)
    left = von_neumann(rho, tol)
    right = von_neumann(r1, tol) + von_neumann(r2, tol)
    m = InequalityMargin.of("qutrit-subadditivity", left, right, digest(rho))
    return m, m.margin


def quantum_information(rho, tol: Tolerances = DEFAULT_TOL) -> float:
    return subadditivity_margin(rho, tol)[1]


def relative_entropy_margin(rho, tol: Tolerances = DEFAULT_TOL) -> InequalityMargin:
    """0 <= D(rho_1 || rho_2) for the two qubit portraits of a qutrit."""
    rho = _qutrit(rho, tol)
    r1, r2 = qutrit_portraits(rho, tol)
    return InequalityMargin.of("qutrit-relative-entropy", 0.0, quantum_relative_entropy(r1, r2, tol), digest(rho))


def ssa_margin(rho, tol: Tolerances = DEFAULT_TOL) -> InequalityMargin:
    """S(ABC) + S(B) <= S(AB) + S(BC) after embedding into three qubits.

    Qubit A is the most significant bit of the basis index, C the least.
    """
    rho = validate_density(rho, tol)
    if rho.dim > 8:
        raise DimensionTooLarge(f"three qubits hold at most 8 levels, got {rho.dim}")
    abc = embed_qudit(rho, 3, tol)
    s = {}
    for name, keep in (("B", [1]), ("AB", [0, 1]), ("BC", [1, 2])):
        s[name] = von_neumann(partial_trace(abc, keep, tol), tol)
    left = von_neumann(abc, tol) + s["B"]
    right = s["AB"] + s["BC"]
    return InequalityMargin.of("strong-subadditivity", left, right, digest(rho))


def padded_portrait_entropy(map, rho, size: int | None = None, tol: Tolerances = DEFAULT_TOL) -> float:
    """Von Neumann entropy of a portrait zero-padded back to ``size`` (default: input dim)."""
    rho = validate_density(rho, tol)
    return von_neumann(pad_matrix(portrait_array(map, rho), size or rho.dim), tol)
