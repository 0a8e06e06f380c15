"""Laplace operator assembly: global cotangent pair, Dirichlet reduction,
localized variants (patch, confinement potential, orthogonality-penalized),
and a k-NN Gaussian graph Laplacian for point clouds."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.io import mmwrite
from scipy.spatial import cKDTree

from .shapes import Mesh, PointCloud, Region, ShapeError, extract_submesh, face_areas, vertex_areas


@dataclass(frozen=True)
class SparseOperator:
    """Symmetric stiffness matrix of a generalized eigenproblem pair."""

    matrix: sp.csr_matrix

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"operator must be square, got {m.shape}")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def symmetry_defect(self) -> float:
        d = self.matrix - self.matrix.T
        scale = max(abs(self.matrix).max(), 1e-300)
        return abs(d).max() / scale if d.nnz else 0.0


@dataclass(frozen=True)
class MassMatrix:
    """Diagonal lumped mass (barycentric vertex areas)."""

    diagonal: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(np.asarray(self.diagonal, dtype=np.float64))
        if d.ndim != 1:
            raise ShapeError("mass diagonal must be a vector")
        if (d <= 0).any():
            raise ShapeError("mass diagonal must be strictly positive")
        object.__setattr__(self, "diagonal", d)

    @property
    def dimension(self) -> int:
        return self.diagonal.size

    def matrix(self) -> sp.csr_matrix:
        return sp.diags(self.diagonal, format="csr")


def cotan_laplacian(mesh: Mesh) -> tuple[SparseOperator, MassMatrix]:
    """Cotangent stiffness with lumped barycentric mass.

    Off-diagonal entry (i, j) is -(cot a_ij + cot b_ij)/2 over the faces
    sharing edge ij; the diagonal makes rows sum to zero. Degenerate
    triangles contribute clamped (zero) cotangents with a warning.
    """
    v, f = mesh.vertices, mesh.faces
    n = mesh.n_vertices
    # edge vectors opposite each corner
    e0 = v[f[:, 2]] - v[f[:, 1]]
    e1 = v[f[:, 0]] - v[f[:, 2]]
    e2 = v[f[:, 1]] - v[f[:, 0]]
    double_area = np.linalg.norm(np.cross(e2, -e1), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cot0 = -np.einsum("ij,ij->i", e1, e2) / double_area
        cot1 = -np.einsum("ij,ij->i", e2, e0) / double_area
        cot2 = -np.einsum("ij,ij->i", e0, e1) / double_area
    cots = np.stack([cot0, cot1, cot2])
    bad = ~np.isfinite(cots)
    if bad.any():
        warnings.warn(
            f"{int(bad.any(axis=0).sum())} zero-area triangle(s): cotangents clamped to 0",
            RuntimeWarning,
            stacklevel=2,
        )
        cots[bad] = 0.0
    # corner c is opposite edge (a, b)
    rows = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
    cols = np.concatenate([f[:, 2], f[:, 0], f[:, 1]])
    w = 0.5 * cots.ravel()
    ii = np.concatenate([rows, cols])
    jj = np.concatenate([cols, rows])
    ww = np.concatenate([-w, -w])
    off = sp.csr_matrix((ww, (ii, jj)), shape=(n, n))
    diag = -np.asarray(off.sum(axis=1)).ravel()
    stiff = off + sp.diags(diag)
    areas = vertex_areas(mesh)
    isolated = areas <= 0
    if isolated.any():
        # isolated vertices (no incident area) get a tiny mass to keep the
        # pair definite; their stiffness row is zero so spectra are unaffected
        areas = areas.copy()
        areas[isolated] = max(areas.max(), 1.0) * 1e-12
    return SparseOperator(stiff), MassMatrix(areas)


def dirichlet_reduce(
    op: SparseOperator, mass: MassMatrix, boundary
) -> tuple[SparseOperator, MassMatrix, np.ndarray]:
    """Delete boundary rows/columns; interior_map sends reduced -> original."""
    boundary = np.asarray(boundary, dtype=np.int64)
    n = op.dimension
    if boundary.size and (boundary.min() < 0 or boundary.max() >= n):
        raise ShapeError("boundary index out of range")
    keep = np.ones(n, dtype=bool)
    keep[boundary] = False
    interior = np.flatnonzero(keep)
    if interior.size == 0:
        raise ShapeError("no interior vertex remains after Dirichlet reduction")
    m = op.matrix.tocsr()[interior][:, interior]
    return SparseOperator(m), MassMatrix(mass.diagonal[interior]), interior


def pat_operator(mesh: Mesh, region: Region) -> tuple[SparseOperator, MassMatrix, np.ndarray]:
    """Patch Laplacian: cut the region out, Dirichlet on its boundary ring.

    Returns (stiffness, mass, vertex_map) with vertex_map sending reduced
    index -> original mesh index.
    """
    sub, boundary, sub_to_orig = extract_submesh(mesh, region)
    stiff, mass = cotan_laplacian(sub)
    stiff, mass, interior = dirichlet_reduce(stiff, mass, boundary)
    return stiff, mass, sub_to_orig[interior]


def ham_operator(
    mesh: Mesh, region: Region, tau: float
) -> tuple[SparseOperator, MassMatrix]:
    """Confinement operator L + tau * M * V, V indicating the region complement."""
    if tau < 0:
        raise ShapeError("tau must be nonnegative")
    stiff, mass = cotan_laplacian(mesh)
    region.validate(mesh)
    outside = ~region.mask(mesh.n_vertices)
    potential = sp.diags(tau * mass.diagonal * outside)
    return SparseOperator(stiff.matrix + potential), mass


def lmh_operator(
    mesh: Mesh,
    region: Region,
    tau: float,
    mu: float,
    basis_size: int,
    global_eigenvectors: np.ndarray,
) -> tuple[SparseOperator, MassMatrix]:
    """Confinement operator plus a penalty against the first global eigenvectors.

    operator = L + tau*M*V + mu * M Phi Phi^T M, with Phi the supplied
    M-orthonormal global eigenvectors (first `basis_size` columns used).
    """
    if mu < 0:
        raise ShapeError("mu must be nonnegative")
    stiff, mass = ham_operator(mesh, region, tau)
    phi = np.asarray(global_eigenvectors, dtype=np.float64)
    if basis_size == 0 or mu == 0.0:
        return stiff, mass
    if phi.ndim != 2 or phi.shape[0] != mesh.n_vertices:
        raise ShapeError(
            f"eigenvector matrix shape {phi.shape} does not match mesh "
            f"({mesh.n_vertices} vertices)"
        )
    if phi.shape[1] < basis_size:
        raise ShapeError(f"need {basis_size} eigenvectors, got {phi.shape[1]}")
    mphi = mass.diagonal[:, None] * phi[:, :basis_size]
    penalty = mu * (mphi @ mphi.T)
    dense = stiff.matrix.toarray() + penalty
    dense = 0.5 * (dense + dense.T)
    return SparseOperator(sp.csr_matrix(dense)), mass


def default_tau(eigenvalues: np.ndarray, factor: float = 1e4) -> float:
    """Sharp-potential weight: `factor` times the mean of the given eigenvalues."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.size == 0:
        raise ShapeError("need at least one eigenvalue for the default weight")
    return float(factor * lam.mean())


def pointcloud_laplacian(
    cloud: PointCloud, k_neighbors: int = 12
) -> tuple[SparseOperator, MassMatrix]:
    """Symmetrized k-NN graph Laplacian with Gaussian edge weights.

    w_ij = exp(-|xi - xj|^2 / sigma^2), sigma = mean k-th-neighbor distance.
    Mass is a uniform diagonal normalized by the bounding-box diagonal, so
    eigenvalues keep 1/length^2 units.
    """
    x = cloud.vertices
    n = cloud.n_vertices
    if k_neighbors >= n:
        raise ShapeError(f"k_neighbors={k_neighbors} must be < n={n}")
    tree = cKDTree(x)
    dist, idx = tree.query(x, k=k_neighbors + 1)
    dist, idx = dist[:, 1:], idx[:, 1:]  # drop self
    sigma = float(dist[:, -1].mean())
    if sigma <= 0:
        extent = np.linalg.norm(x.max(axis=0) - x.min(axis=0))
        sigma = max(extent, 1.0) * 1e-8
        warnings.warn(
            "duplicate points: Gaussian bandwidth floored", RuntimeWarning, stacklevel=2
        )
    rows = np.repeat(np.arange(n), k_neighbors)
    cols = idx.ravel()
    w = np.exp(-(dist.ravel() ** 2) / sigma**2)
    graph = sp.csr_matrix((w, (rows, cols)), shape=(n, n))
    # union symmetrization: keep the larger weight of either direction
    graph = graph.maximum(graph.T)
    graph.setdiag(0.0)
    graph.eliminate_zeros()
    degree = np.asarray(graph.sum(axis=1)).ravel()
    stiff = sp.diags(degree) - graph
    extent = np.linalg.norm(x.max(axis=0) - x.min(axis=0))
    if extent <= 0:
        extent = 1.0
    mass = np.full(n, extent**2 / n)
    return SparseOperator(sp.csr_matrix(stiff)), MassMatrix(mass)


def save_matrix_market(path: str, op: SparseOperator) -> None:
    """Debug dump of the stiffness matrix in Matrix Market ASCII format."""
    mmwrite(path, op.matrix)
