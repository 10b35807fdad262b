import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qportrait.errors import (
    BadSubsystemIndex,
    DimensionTooSmall,
    DomainError,
    LengthMismatch,
    NotHermitian,
    NotPositiveSemidefinite,
    NotSquare,
    NotUnitary,
    ParseError,
    TraceNotOne,
)
from qportrait.linalg import (
    UnitaryMatrix,
    devectorize,
    eig_hermitian,
    embed_qudit,
    matrix_function,
    pad_matrix,
    parse_matrix,
    partial_trace,
    read_matrix_file,
    validate_density,
    vectorize,
    write_matrix_file,
    xlogx,
)
from qportrait.sampler import Rng, ginibre, random_density


def random_hermitian(d, seed):
    g = ginibre(Rng(seed, d), d, d)
    return (g + g.conj().T) / 2


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 16])
def test_jacobi_against_lapack(d):
    for s in range(20):
        h = random_hermitian(d, s)
        e = eig_hermitian(h)
        assert np.allclose(e.eigenvalues, np.linalg.eigvalsh(h), atol=1e-12)
        v = e.eigenvectors
        assert np.abs(v.conj().T @ v - np.eye(d)).max() < 1e-12
        assert np.abs(h @ v - v * e.eigenvalues).max() < 1e-12
        assert np.abs(e.reconstruct() - h).max() < 1e-12


def test_eigenvalues_ascending_and_phase_fixed():
    h = random_hermitian(6, 3)
    e = eig_hermitian(h)
    assert np.all(np.diff(e.eigenvalues) >= 0)
    for j in range(6):
        col = e.eigenvectors[:, j]
        i = int(np.argmax(np.abs(col) >= np.abs(col).max() * (1 - 1e-8)))
        assert abs(col[i].imag) < 1e-14 and col[i].real > 0


def test_degenerate_basis_is_canonical():
    # same matrix in two rotated presentations of its degenerate eigenspace
    u = np.asarray(Rng(1, 1).complex_normal(16)).reshape(4, 4)
    q, _ = np.linalg.qr(u)
    h = q @ np.diag([0.1, 0.3, 0.3, 0.3]) @ q.conj().T
    a = eig_hermitian(h)
    b = eig_hermitian(h.T.conj())  # equal matrix, different rounding
    assert np.allclose(a.eigenvectors, b.eigenvectors, atol=1e-9)
    i = eig_hermitian(np.eye(3))
    assert np.allclose(i.eigenvectors, np.eye(3))


def test_diagonal_and_real_symmetric():
    e = eig_hermitian(np.diag([3.0, -1.0, 2.0]))
    assert e.eigenvalues.tolist() == [-1.0, 2.0, 3.0]
    e = eig_hermitian([[2, 1], [1, 2]])
    assert np.allclose(e.eigenvalues, [1, 3], atol=1e-15)


def test_eig_rejects_bad_input():
    with pytest.raises(NotSquare):
        eig_hermitian(np.zeros((2, 3)))
    with pytest.raises(NotHermitian):
        eig_hermitian([[0, 1], [0, 0]])


def test_validate_density_errors():
    with pytest.raises(TraceNotOne):
        validate_density(np.eye(2))
    with pytest.raises(NotPositiveSemidefinite) as info:
        validate_density(np.diag([1.5, -0.5]))
    assert info.value.min_eigenvalue == pytest.approx(-0.5)
    rho = validate_density(np.diag([1 + 1e-12, -1e-12]))
    assert rho.clamped_eigenvalues()[0] == 0.0


def test_unitary_check():
    UnitaryMatrix(np.array([[0, 1], [1, 0]]))
    with pytest.raises(NotUnitary):
        UnitaryMatrix(np.array([[1, 1], [0, 1]]))


def test_matrix_function_sqrt_and_log():
    rho = random_density(4, 4, Rng(5, 0))
    r = matrix_function(rho, np.sqrt, (0, np.inf))
    assert np.abs(r @ r - rho.matrix).max() < 1e-12
    lg = matrix_function(rho, np.log, (0, np.inf))
    assert np.isclose(np.trace(rho.matrix @ lg).real, np.sum(xlogx(rho.eigenvalues)))
    with pytest.raises(DomainError):
        matrix_function(np.diag([1.0, -0.5]), np.sqrt, (0, np.inf))


def test_xlogx_convention():
    assert xlogx([0.0, 1.0]).tolist() == [0.0, 0.0]
    assert xlogx(np.e) == pytest.approx(np.e)


def test_vectorize_round_trip():
    m = np.arange(6).reshape(2, 3) + 1j
    assert np.array_equal(devectorize(vectorize(m), 2, 3), m)
    with pytest.raises(LengthMismatch):
        devectorize(np.zeros(5), 2, 3)


def test_pad_and_embed():
    rho = np.eye(3) / 3
    p = pad_matrix(rho, 4)
    assert p.shape == (4, 4) and p[3, 3] == 0
    with pytest.raises(DimensionTooSmall):
        pad_matrix(rho, 2)
    assert embed_qudit(rho, 2).dim == 4
    with pytest.raises(DimensionTooSmall):
        embed_qudit(rho, 1)


def loop_partial_trace(a, m, keep):
    """Index-by-index partial trace over qubits not in keep (qubit 0 most significant)."""
    keep = sorted(keep)
    k = len(keep)
    out = np.zeros((2**k, 2**k), complex)
    bits = lambda x: [(x >> (m - 1 - q)) & 1 for q in range(m)]
    for i in range(2**m):
        for j in range(2**m):
            bi, bj = bits(i), bits(j)
            if any(bi[q] != bj[q] for q in range(m) if q not in keep):
                continue
            r = int("".join(str(bi[q]) for q in keep) or "0", 2)
            c = int("".join(str(bj[q]) for q in keep) or "0", 2)
            out[r, c] += a[i, j]
    return out


@pytest.mark.parametrize("keep", [[], [0], [1], [2], [0, 1], [1, 2], [0, 2], [0, 1, 2]])
def test_partial_trace_against_loops(keep):
    rho = random_density(8, 3, Rng(8, 0))
    got = partial_trace(rho, keep).matrix
    assert np.abs(got - loop_partial_trace(rho.matrix, 3, keep)).max() < 1e-15


def test_partial_trace_product_state():
    a = random_density(2, 2, Rng(1, 0)).matrix
    b = random_density(2, 1, Rng(2, 0)).matrix
    ab = np.kron(a, b)
    assert np.allclose(partial_trace(ab, [0]).matrix, a)
    assert np.allclose(partial_trace(ab, [1]).matrix, b)
    with pytest.raises(BadSubsystemIndex):
        partial_trace(ab, [2])
    with pytest.raises(BadSubsystemIndex):
        partial_trace(np.eye(3) / 3, [0])


def test_matrix_file_round_trip(tmp_path):
    m = np.array([[0.5, 0.25j], [-0.25j, 0.5]])
    path = tmp_path / "m.json"
    write_matrix_file(path, m)
    assert np.array_equal(read_matrix_file(path), m)


def test_real_matrix_file(tmp_path):
    path = tmp_path / "r.json"
    path.write_text(json.dumps({"rows": 3, "cols": 3, "re": np.eye(3).tolist()}))
    m = read_matrix_file(path)
    assert m.dtype == np.complex128 and np.all(m.imag == 0)


@pytest.mark.parametrize(
    "obj, fragment",
    [
        ({"rows": 2, "cols": 2, "re": [[1, 0], [0]]}, "row 1"),
        ({"rows": 2, "cols": 2, "re": [[1, 0]]}, "2 rows"),
        ({"rows": 1, "cols": 2, "re": [[1, "x"]]}, "field 1"),
        ({"rows": 1, "cols": 1, "re": [[1]], "im": [[1, 2]]}, '"im" row 0'),
        ({"cols": 1, "re": [[1]]}, "rows"),
    ],
)
def test_parse_errors_name_the_location(obj, fragment):
    with pytest.raises(ParseError, match=fragment):
        parse_matrix(obj)


def test_unreadable_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\n  not json")
    with pytest.raises(ParseError, match="line 2"):
        read_matrix_file(path)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10_000))
def test_eigendecomposition_residual_property(d, seed):
    h = random_hermitian(d, seed) * 10.0 ** (seed % 5 - 2)
    e = eig_hermitian(h)
    scale = max(1.0, np.linalg.norm(h))
    assert np.abs(e.reconstruct() - h).max() <= 1e-12 * scale


def test_tracing_out_everything_leaves_the_trace():
    rho = random_density(5, 2, Rng(9, 0))
    full = partial_trace(embed_qudit(rho, 3), [])
    assert full.matrix.shape == (1, 1) and abs(full.matrix[0, 0] - 1) <= 1e-14
