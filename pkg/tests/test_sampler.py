import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qportrait.errors import BadDims
from qportrait.linalg import validate_density
from qportrait.sampler import (
    BatchRng,
    Rng,
    SeedSpec,
    density_arrays,
    random_coarse_grain_map,
    random_count,
    random_density,
    random_merge_map,
    random_probability_vector,
    random_pure_state,
    random_unitary,
)

M32 = 0xFFFFFFFF


def philox_reference(key, ctr):
    """Plain-integer Philox4x32-10, written from the published round function."""
    k0, k1 = key
    c0, c1, c2, c3 = ctr
    for _ in range(10):
        p0 = 0xD2511F53 * c0
        p1 = 0xCD9E8D57 * c2
        c0, c1, c2, c3 = (p1 >> 32) ^ c1 ^ k0, p1 & M32, (p0 >> 32) ^ c3 ^ k1, p0 & M32
        k0 = (k0 + 0x9E3779B9) & M32
        k1 = (k1 + 0xBB67AE85) & M32
    return c0, c1, c2, c3


def test_reference_matches_known_answers():
    # Random123 kat_vectors for philox4x32_10
    assert philox_reference((0, 0), (0, 0, 0, 0)) == (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)
    assert philox_reference((M32, M32), (M32,) * 4) == (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)
    assert philox_reference((0xA4093822, 0x299F31D0), (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344)) == (
        0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1,
    )


def test_known_answer_block():
    assert Rng(0, 0).raw_block(0) == (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)
    top = (1 << 64) - 1
    assert Rng(top, top).raw_block(top) == (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.integers(0, 2**40))
def test_blocks_match_reference(seed, stream, block):
    key = (seed & M32, seed >> 32)
    ctr = (block & M32, block >> 32, stream & M32, stream >> 32)
    assert Rng(seed, stream).raw_block(block) == philox_reference(key, ctr)


def test_uniform_layout():
    r = Rng(5, 9)
    u = r.uniform(6)
    words = [w for b in range(2) for w in philox_reference((5, 0), (b, 0, 9, 0))]
    expect = [((words[2 * i] >> 5) * 2**26 + (words[2 * i + 1] >> 6)) / 2**53 for i in range(4)]
    words2 = philox_reference((5, 0), (2, 0, 9, 0))
    expect += [((words2[2 * i] >> 5) * 2**26 + (words2[2 * i + 1] >> 6)) / 2**53 for i in range(2)]
    assert u.tolist() == expect


def test_chunked_reads_equal_one_read():
    a = Rng(3, 1)
    parts = np.concatenate([a.uniform(1), a.uniform(4), a.uniform(7)])
    assert np.array_equal(parts, Rng(3, 1).uniform(12))
    assert a.position == 12


def test_batch_rows_equal_single_streams():
    streams = [0, 1, 17, 2**40]
    b = BatchRng(99, streams)
    rho = density_arrays(b, 4, 2)
    e = b.exponential(5)
    for i, s in enumerate(streams):
        r = Rng(99, s)
        assert np.array_equal(rho[i], density_arrays(r, 4, 2))
        assert np.array_equal(e[i], r.exponential(5))


def test_streams_and_seeds_differ():
    assert not np.array_equal(Rng(1, 0).uniform(8), Rng(1, 1).uniform(8))
    assert not np.array_equal(Rng(1, 0).uniform(8), Rng(2, 0).uniform(8))


def test_seedspec_rejects_out_of_range():
    with pytest.raises(ValueError):
        SeedSpec(-1, 0)
    with pytest.raises(ValueError):
        SeedSpec(0, 2**64)


def test_variate_moments():
    r = Rng(7, 0)
    u = r.uniform(200_000)
    z = r.normal(200_000)
    e = r.exponential(200_000)
    assert 0 <= u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01
    assert abs(e.mean() - 1) < 0.01


def test_odd_normal_request_uses_whole_pair():
    r = Rng(4, 4)
    z = r.normal(3)
    assert z.shape == (3,) and r.position == 4


def test_density_shapes_rank_and_trace(rng):
    for d in (2, 3, 5, 8):
        for k in range(1, d + 1):
            rho = random_density(d, k, rng)
            lam = rho.eigenvalues
            assert abs(lam.sum() - 1) < 1e-12
            assert np.sum(lam > 1e-10) == k


def test_pure_state_is_projector(rng):
    rho = random_pure_state(4, rng).matrix
    assert np.allclose(rho @ rho, rho, atol=1e-13)


def test_unitary_is_unitary_and_haar_like():
    r = Rng(12, 0)
    first = []
    for _ in range(4000):
        u = random_unitary(3, r).matrix
        assert np.abs(u.conj().T @ u - np.eye(3)).max() < 1e-12
        first.append(abs(u[0, 0]) ** 2)
    # |u_00|^2 is Beta(1, d-1): mean 1/d, variance (d-1)/(d^2 (d+1))
    first = np.array(first)
    assert abs(first.mean() - 1 / 3) < 0.01
    assert abs(first.var() - 2 / 36) < 0.005


def test_probability_vector_is_uniform_on_simplex():
    r = Rng(13, 0)
    p = np.array([random_probability_vector(4, r).p for _ in range(20000)])
    assert np.allclose(p.sum(axis=1), 1)
    # Dirichlet(1,1,1,1): each marginal has mean 1/4 and variance 3/80
    assert np.allclose(p.mean(axis=0), 0.25, atol=0.005)
    assert np.allclose(p.var(axis=0), 3 / 80, atol=0.002)


def test_coarse_grain_map_range(rng):
    for _ in range(50):
        m = random_coarse_grain_map(6, 3, rng)
        assert m.in_dim == 6 and m.out_dim == 3
    with pytest.raises(BadDims):
        random_coarse_grain_map(3, 4, rng)


def test_merge_map_covers_all_subsets(rng):
    seen = {random_merge_map(3, rng).kept for _ in range(400)}
    assert len(seen) == 7


def test_count_is_uniform(rng):
    counts = np.bincount([random_count(4, rng) for _ in range(8000)], minlength=5)[1:]
    assert counts.min() > 1800 and counts.max() < 2200


def test_bad_dimensions():
    with pytest.raises(BadDims):
        random_density(3, 4)
    with pytest.raises(BadDims):
        random_pure_state(1)
