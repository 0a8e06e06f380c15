import numpy as np
import pytest
import scipy.sparse as sp

from spectraforge.eigen import (
    EigenError,
    Spectrum,
    dense_eigen_oracle,
    export_spectrum,
    load_spectrum,
    smallest_eigenpairs,
)
from spectraforge.operators import MassMatrix, SparseOperator, cotan_laplacian
from spectraforge.shapes import grid_mesh, icosphere


def random_spd_pair(n: int, rng: np.random.Generator):
    """Random sparse SPD stiffness with a positive diagonal mass."""
    a = sp.random(n, n, density=0.05, random_state=np.random.RandomState(rng.integers(2**31)))
    stiff = (a @ a.T).tocsr() + sp.identity(n) * 0.1
    mass = rng.random(n) + 0.5
    return SparseOperator(stiff), MassMatrix(mass)


def test_sparse_matches_dense_random(rng):
    for _ in range(5):
        n = int(rng.integers(120, 300))
        op, mass = random_spd_pair(n, rng)
        sparse = smallest_eigenpairs(op, mass, 30, seed=1)
        dense = dense_eigen_oracle(op, mass, want_vectors=False)
        scale = np.maximum(np.abs(dense.eigenvalues[:30]), 1e-12)
        rel = np.abs(sparse.eigenvalues - dense.eigenvalues[:30]) / scale
        assert rel.max() < 1e-8


def test_sparse_matches_dense_mesh():
    stiff, mass = cotan_laplacian(icosphere(2))
    sparse = smallest_eigenpairs(stiff, mass, 30, seed=0)
    dense = dense_eigen_oracle(stiff, mass, want_vectors=False)
    np.testing.assert_allclose(sparse.eigenvalues, dense.eigenvalues[:30], atol=1e-8)


def test_eigenvalues_sorted_and_residuals(rng):
    op, mass = random_spd_pair(200, rng)
    spec = smallest_eigenpairs(op, mass, 12, want_vectors=True, seed=0)
    lam, vec = spec.eigenvalues, spec.eigenvectors
    assert (np.diff(lam) >= 0).all()
    res = op.matrix @ vec - mass.diagonal[:, None] * vec * lam
    assert np.abs(res).max() < 1e-8 * abs(op.matrix).sum(axis=1).max()
    # M-orthonormality
    gram = vec.T @ (mass.diagonal[:, None] * vec)
    np.testing.assert_allclose(gram, np.eye(12), atol=1e-8)


def test_seeded_determinism(rng):
    op, mass = random_spd_pair(250, rng)
    a = smallest_eigenpairs(op, mass, 10, want_vectors=True, seed=7)
    b = smallest_eigenpairs(op, mass, 10, want_vectors=True, seed=7)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
    np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)


def test_dense_fallback_small_problems():
    # k too close to n for the iterative path: dense fallback must kick in
    op = SparseOperator(sp.identity(10).tocsr() * 2.0)
    mass = MassMatrix(np.ones(10))
    spec = smallest_eigenpairs(op, mass, 10)
    np.testing.assert_allclose(spec.eigenvalues, 2.0)


def test_argument_validation():
    op = SparseOperator(sp.identity(10).tocsr())
    mass = MassMatrix(np.ones(10))
    with pytest.raises(EigenError):
        smallest_eigenpairs(op, mass, 0)
    with pytest.raises(EigenError):
        smallest_eigenpairs(op, mass, 11)
    with pytest.raises(EigenError):
        smallest_eigenpairs(op, MassMatrix(np.ones(9)), 3)


def test_spectrum_invariants():
    with pytest.raises(EigenError):
        Spectrum(np.array([2.0, 1.0]))  # decreasing
    with pytest.raises(EigenError):
        Spectrum(np.array([1.0, np.inf]))
    s = Spectrum(np.array([1.0, 2.0, 3.0]))
    assert len(s.truncated(2)) == 2


def test_export_roundtrip(tmp_path):
    s = Spectrum(np.array([0.0, 1.25, 2.5]))
    path = tmp_path / "spec.json"
    export_spectrum(path, s)
    back = load_spectrum(path)
    np.testing.assert_array_equal(back.eigenvalues, s.eigenvalues)


def test_dense_oracle_size_guard():
    op = SparseOperator(sp.identity(2001).tocsr())
    with pytest.raises(EigenError):
        dense_eigen_oracle(op, MassMatrix(np.ones(2001)))
