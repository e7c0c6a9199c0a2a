import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contextuality_kit.errors import DimensionMismatch, NonHermitian
from contextuality_kit.linalg import eigvalsh, jacobi_eigh


def random_hermitian(rng, d, scale=1.0):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (x + x.conj().T)


@given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.sampled_from([1e-6, 1.0, 1e4]))
@settings(max_examples=80, deadline=None)
def test_matches_lapack(seed, d, scale):
    H = random_hermitian(np.random.default_rng(seed), d, scale)
    w, V = jacobi_eigh(H)
    ref = np.linalg.eigvalsh(H)
    assert np.abs(w - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max())
    assert np.abs(V.conj().T @ V - np.eye(d)).max() <= 1e-10
    assert np.abs(V @ np.diag(w) @ V.conj().T - H).max() <= 1e-10 * max(1.0, np.abs(H).max())


def test_trace_and_determinant_invariants():
    H = random_hermitian(np.random.default_rng(4), 6)
    w = eigvalsh(H)
    assert w.sum() == pytest.approx(np.trace(H).real, abs=1e-11)
    assert np.prod(w) == pytest.approx(np.linalg.det(H).real, rel=1e-9)


def test_nearly_diagonal_and_degenerate_inputs():
    H = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    H[0, 1] = H[1, 0] = 1e-200
    assert eigvalsh(H).tolist() == [-1, -1, 1, 1]
    H = np.diag([3.0, 1e-30]).astype(complex)
    H[0, 1], H[1, 0] = 1e-160j, -1e-160j
    assert eigvalsh(H) == pytest.approx([0, 3], abs=1e-15)


def test_rejects_non_hermitian():
    with pytest.raises(NonHermitian):
        jacobi_eigh(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(DimensionMismatch):
        jacobi_eigh(np.zeros((2, 3)))
