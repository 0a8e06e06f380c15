"""Truncated generalized symmetric eigensolver and a dense test oracle."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .operators import MassMatrix, SparseOperator
from .shapes import ShapeError

DENSE_ORACLE_LIMIT = 2000


class EigenError(RuntimeError):
    """Eigensolver failure (non-convergence, bad arguments)."""


@dataclass(frozen=True)
class Spectrum:
    """Sorted smallest eigenvalues, optionally with M-orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None

    def __post_init__(self):
        lam = np.ascontiguousarray(np.asarray(self.eigenvalues, dtype=np.float64))
        if lam.ndim != 1:
            raise EigenError("eigenvalues must be a vector")
        if not np.isfinite(lam).all():
            raise EigenError("non-finite eigenvalue")
        if (np.diff(lam) < 0).any():
            raise EigenError("eigenvalues must be non-decreasing")
        object.__setattr__(self, "eigenvalues", lam)
        if self.eigenvectors is not None:
            vec = np.ascontiguousarray(np.asarray(self.eigenvectors, dtype=np.float64))
            if vec.ndim != 2 or vec.shape[1] != lam.size:
                raise EigenError(f"eigenvector matrix shape {vec.shape} mismatch")
            object.__setattr__(self, "eigenvectors", vec)

    def __len__(self) -> int:
        return self.eigenvalues.size

    def truncated(self, k: int) -> "Spectrum":
        vec = self.eigenvectors[:, :k] if self.eigenvectors is not None else None
        return Spectrum(self.eigenvalues[:k], vec)


def smallest_eigenpairs(
    op: SparseOperator,
    mass: MassMatrix,
    k: int,
    want_vectors: bool = False,
    seed: int = 0,
) -> Spectrum:
    """k smallest eigenvalues of L phi = lambda M phi, ascending, seeded.

    Shift-invert Lanczos at a slightly negative shift handles the near-null
    constant mode of closed surfaces.
    """
    n = op.dimension
    if mass.dimension != n:
        raise EigenError(f"mass dimension {mass.dimension} != operator {n}")
    if k < 1 or k > n:
        raise EigenError(f"k={k} out of range for dimension {n}")
    if k >= n - 1 or n <= DENSE_ORACLE_LIMIT and k > n // 3:
        # ARPACK needs k < n-1 and is wasteful for large k/n; fall back dense
        full = dense_eigen_oracle(op, mass, want_vectors=want_vectors)
        return full.truncated(k)
    trace_scale = abs(op.matrix.diagonal()).mean() / mass.diagonal.mean()
    sigma = -1e-8 * max(trace_scale, 1.0)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    # over-solve past k so eigenvalue clusters straddling the truncation
    # boundary are fully resolved, then keep the k smallest
    k_solve = min(n - 2, k + max(5, k // 5))
    try:
        lam, vec = spla.eigsh(
            op.matrix.tocsc(),
            k=k_solve,
            M=mass.matrix().tocsc(),
            sigma=sigma,
            which="LM",
            v0=v0,
            maxiter=max(1000, 50 * k),
        )
    except spla.ArpackNoConvergence as exc:
        raise EigenError(
            f"eigensolver converged only {len(exc.eigenvalues)}/{k} pairs"
        ) from exc
    order = np.argsort(lam, kind="stable")[:k]
    lam = lam[order]
    vec = vec[:, order]
    # sign convention: first component of largest magnitude is positive
    lead = vec[np.argmax(np.abs(vec), axis=0), np.arange(k)]
    vec = vec * np.where(lead < 0, -1.0, 1.0)
    _check_residuals(op, mass, lam, vec)
    return Spectrum(lam, vec if want_vectors else None)


def _check_residuals(op, mass, lam, vec, tol: float = 1e-8):
    lv = op.matrix @ vec
    res = lv - mass.diagonal[:, None] * vec * lam
    num = np.linalg.norm(res, axis=0)
    # scale by operator norm so near-null modes are judged fairly
    scale = max(float(abs(op.matrix).sum(axis=1).max()), 1e-300)
    den = scale * np.maximum(np.linalg.norm(vec, axis=0), 1e-300)
    worst = float((num / den).max())
    if worst > tol:
        raise EigenError(f"eigenpair residual {worst:.3e} exceeds {tol:.0e}")


def dense_eigen_oracle(
    op: SparseOperator, mass: MassMatrix, want_vectors: bool = True
) -> Spectrum:
    """Full spectrum by dense symmetric-definite reduction (n <= 2000 guard)."""
    n = op.dimension
    if n > DENSE_ORACLE_LIMIT:
        raise EigenError(f"dense oracle limited to n <= {DENSE_ORACLE_LIMIT}, got {n}")
    if mass.dimension != n:
        raise EigenError(f"mass dimension {mass.dimension} != operator {n}")
    # diagonal mass: reduce via M^(-1/2) L M^(-1/2)
    inv_sqrt = 1.0 / np.sqrt(mass.diagonal)
    a = op.matrix.toarray() * inv_sqrt[:, None] * inv_sqrt[None, :]
    a = 0.5 * (a + a.T)
    if want_vectors:
        lam, y = scipy.linalg.eigh(a)
        vec = y * inv_sqrt[:, None]  # M-orthonormal
        return Spectrum(lam, vec)
    lam = scipy.linalg.eigh(a, eigvals_only=True)
    return Spectrum(lam)


def export_spectrum(path: str, spectrum: Spectrum) -> None:
    """JSON array of eigenvalues at full decimal precision."""
    with open(path, "w") as fh:
        json.dump([float(v) for v in spectrum.eigenvalues], fh, indent=0)


def load_spectrum(path: str) -> Spectrum:
    with open(path) as fh:
        return Spectrum(np.asarray(json.load(fh), dtype=np.float64))
