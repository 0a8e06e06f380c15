import numpy as np
import pytest
import scipy.sparse as sp

from spectraforge.cube import CubeSpec, front_face_region, generate_cube
from spectraforge.operators import (
    MassMatrix,
    SparseOperator,
    cotan_laplacian,
    default_tau,
    dirichlet_reduce,
    ham_operator,
    lmh_operator,
    pat_operator,
    pointcloud_laplacian,
    save_matrix_market,
)
from spectraforge.eigen import smallest_eigenpairs
from spectraforge.shapes import (
    Mesh,
    PointCloud,
    Region,
    ShapeError,
    extract_submesh,
    grid_mesh,
    icosphere,
    vertex_areas,
)


def reference_cotan_stiffness(mesh: Mesh) -> np.ndarray:
    """Slow per-face cotangent assembly used as an independent oracle."""
    n = mesh.n_vertices
    L = np.zeros((n, n))
    for tri in mesh.faces:
        pts = mesh.vertices[tri]
        for corner in range(3):
            i, j, k = tri[corner], tri[(corner + 1) % 3], tri[(corner + 2) % 3]
            u = mesh.vertices[i] - mesh.vertices[k]
            v = mesh.vertices[j] - mesh.vertices[k]
            cot = np.dot(u, v) / np.linalg.norm(np.cross(u, v))
            w = 0.5 * cot
            L[i, j] -= w
            L[j, i] -= w
            L[i, i] += w
            L[j, j] += w
    return L


@pytest.mark.parametrize("builder", [lambda: grid_mesh(6), lambda: icosphere(1)])
def test_cotan_matches_reference(builder):
    mesh = builder()
    stiff, mass = cotan_laplacian(mesh)
    ref = reference_cotan_stiffness(mesh)
    np.testing.assert_allclose(stiff.matrix.toarray(), ref, atol=1e-12)
    np.testing.assert_allclose(mass.diagonal, vertex_areas(mesh), rtol=1e-12)


def test_cotan_structure():
    stiff, mass = cotan_laplacian(icosphere(2))
    m = stiff.matrix
    assert (abs(m - m.T) > 1e-12).nnz == 0  # symmetric
    np.testing.assert_allclose(np.asarray(m.sum(axis=1)).ravel(), 0.0, atol=1e-12)
    assert (mass.diagonal > 0).all()


def test_degenerate_triangle_warns():
    verts = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]], dtype=float)
    faces = np.array([[0, 1, 2], [0, 1, 3]])  # first face has zero area
    with pytest.warns(RuntimeWarning):
        stiff, _ = cotan_laplacian(Mesh(verts, faces))
    assert np.isfinite(stiff.matrix.toarray()).all()


def test_dirichlet_reduce_removes_rows():
    mesh = grid_mesh(5)
    stiff, mass = cotan_laplacian(mesh)
    fixed = np.array([0, 3, 7])
    red, red_mass, interior = dirichlet_reduce(stiff, mass, fixed)
    assert red.dimension == mesh.n_vertices - 3
    assert not np.intersect1d(interior, fixed).size
    full = stiff.matrix.toarray()
    np.testing.assert_allclose(red.matrix.toarray(), full[np.ix_(interior, interior)])
    np.testing.assert_allclose(red_mass.diagonal, mass.diagonal[interior])


def test_pat_equals_submesh_dirichlet_composition():
    mesh = generate_cube(CubeSpec(10, 5, 1.0))
    region = front_face_region(10)
    stiff, mass, vmap = pat_operator(mesh, region)

    sub, boundary, sub_to_orig = extract_submesh(mesh, region)
    sub_stiff, sub_mass = cotan_laplacian(sub)
    red, red_mass, interior = dirichlet_reduce(sub_stiff, sub_mass, boundary)
    np.testing.assert_array_equal(stiff.matrix.toarray(), red.matrix.toarray())
    np.testing.assert_array_equal(mass.diagonal, red_mass.diagonal)
    np.testing.assert_array_equal(vmap, sub_to_orig[interior])


def test_ham_tau_zero_equals_lbo():
    mesh = generate_cube(CubeSpec(8, 2, 1.0))
    region = front_face_region(8)
    lbo, lbo_mass = cotan_laplacian(mesh)
    ham, ham_mass = ham_operator(mesh, region, tau=0.0)
    assert (ham.matrix != lbo.matrix).nnz == 0
    np.testing.assert_array_equal(ham_mass.diagonal, lbo_mass.diagonal)


def test_ham_potential_on_complement_only():
    mesh = generate_cube(CubeSpec(8, 2, 1.0))
    region = front_face_region(8)
    lbo, mass = cotan_laplacian(mesh)
    ham, _ = ham_operator(mesh, region, tau=3.0)
    diff = (ham.matrix - lbo.matrix).toarray()
    inside = region.mask(mesh.n_vertices)
    expected = np.zeros_like(diff)
    comp = ~inside
    expected[comp, comp] = 3.0 * mass.diagonal[comp]
    np.testing.assert_allclose(diff, expected, atol=1e-14)


def test_lmh_mu_zero_equals_ham(tiny_dataset):
    mesh = tiny_dataset.shapes[0]
    region = tiny_dataset.regions[0][0]
    stiff, mass = cotan_laplacian(mesh)
    spec = smallest_eigenpairs(stiff, mass, 5, want_vectors=True)
    ham, _ = ham_operator(mesh, region, tau=2.0)
    lmh, _ = lmh_operator(
        mesh, region, tau=2.0, mu=0.0, basis_size=5, global_eigenvectors=spec.eigenvectors
    )
    np.testing.assert_allclose(lmh.matrix.toarray(), ham.matrix.toarray(), atol=1e-14)


def test_default_tau():
    lam = np.array([0.0, 1.0, 2.0, 3.0])
    assert default_tau(lam, factor=100.0) == pytest.approx(150.0)


def test_pointcloud_laplacian_structure(rng):
    pts = PointCloud(rng.random((80, 3)))
    stiff, mass = pointcloud_laplacian(pts, k_neighbors=6)
    m = stiff.matrix
    assert (abs(m - m.T) > 1e-12).nnz == 0
    np.testing.assert_allclose(np.asarray(m.sum(axis=1)).ravel(), 0.0, atol=1e-12)
    assert (mass.diagonal > 0).all()
    # graph Laplacian is PSD
    lam = np.linalg.eigvalsh(m.toarray())
    assert lam.min() > -1e-10


def test_sparse_operator_validation():
    with pytest.raises(ShapeError):
        SparseOperator(sp.csr_matrix(np.ones((2, 3))))
    with pytest.raises(ShapeError):
        MassMatrix(np.array([1.0, -1.0]))


def test_save_matrix_market(tmp_path):
    stiff, _ = cotan_laplacian(grid_mesh(3))
    path = tmp_path / "l.mtx"
    save_matrix_market(path, stiff)
    import scipy.io

    back = scipy.io.mmread(path)
    np.testing.assert_allclose(back.toarray(), stiff.matrix.toarray())
