"""Reconstruction evaluation: extrinsic MSE variants, intrinsic area and
metric distortion, rigid-alignment error, and the nearest-neighbor
retrieval baseline."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as csgraph_dijkstra

from .shapes import Mesh, Region, ShapeError, farthest_point_sample, vertex_areas

# scale factors used when rendering report tables; raw values stay unscaled
REPORT_SCALES = {
    "mse": 1e-6,
    "mse_region": 1e-6,
    "mse_region_complement": 1e-6,
    "enn": 1e-6,
    "area": 1e-2,
    "area_region": 1e-2,
    "metric": 1e-3,
    "metric_region": 1e-3,
    "align": 1e-6,
}


@dataclass
class EvalReport:
    """All evaluation measures for one trained model on one test set."""

    mse: float
    mse_region: float
    mse_region_complement: float
    enn: float
    em_lt_enn: float  # percentage in [0, 100]
    area: float
    area_region: float
    metric: float
    metric_region: float
    align: float
    scales: dict = field(default_factory=lambda: dict(REPORT_SCALES))
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "mse_region": self.mse_region,
            "mse_region_complement": self.mse_region_complement,
            "enn": self.enn,
            "em_lt_enn": self.em_lt_enn,
            "area": self.area,
            "area_region": self.area_region,
            "metric": self.metric,
            "metric_region": self.metric_region,
            "align": self.align,
            "scales": self.scales,
            "meta": self.meta,
        }

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    def table(self, label: str = "model") -> str:
        """Aligned text table with the scaling conventions in the headers."""
        cols = [
            ("MSE", "mse"),
            ("MSE-R", "mse_region"),
            ("MSE-Rc", "mse_region_complement"),
            ("ENN", "enn"),
            ("EM<ENN", "em_lt_enn"),
            ("Area", "area"),
            ("Area-R", "area_region"),
            ("Metric", "metric"),
            ("Metric-R", "metric_region"),
            ("Align", "align"),
        ]
        headers, cells = ["Method"], [label]
        for title, key in cols:
            if key == "em_lt_enn":
                headers.append(title)
                cells.append(f"{self.em_lt_enn:.1f}%")
            else:
                scale = self.scales.get(key, 1.0)
                exp = int(round(np.log10(scale)))
                headers.append(f"{title}(x1e{exp})")
                cells.append(f"{getattr(self, key) / scale:.3f}")
        widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
        line1 = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
        line2 = "  ".join(c.ljust(w) for c, w in zip(cells, widths))
        return line1 + "\n" + line2


def _check_correspondence(pred: Mesh, gt: Mesh):
    if pred.n_vertices != gt.n_vertices:
        raise ShapeError(
            f"vertex count mismatch: {pred.n_vertices} vs {gt.n_vertices}"
        )


def mse(pred: Mesh, gt: Mesh, region: Region | None = None, complement: bool = False) -> float:
    """Mean squared vertex displacement, optionally restricted to a region."""
    _check_correspondence(pred, gt)
    d2 = ((pred.vertices - gt.vertices) ** 2).sum(axis=1)
    if region is None:
        return float(d2.mean())
    region.validate(gt)
    mask = region.mask(gt.n_vertices)
    if complement:
        mask = ~mask
        if not mask.any():
            raise ShapeError("region complement is empty")
    return float(d2[mask].mean())


def area_error(pred: Mesh, gt: Mesh, region: Region | None = None) -> float:
    """Mean absolute difference of per-vertex area elements."""
    _check_correspondence(pred, gt)
    if not np.array_equal(pred.faces, gt.faces):
        raise ShapeError("meshes must share connectivity for the area error")
    diff = np.abs(vertex_areas(pred) - vertex_areas(gt))
    if region is None:
        return float(diff.mean())
    region.validate(gt)
    return float(diff[region.indices].mean())


def _edge_graph(mesh: Mesh) -> sp.csr_matrix:
    f = mesh.faces
    i = np.concatenate([f[:, 0], f[:, 1], f[:, 2]])
    j = np.concatenate([f[:, 1], f[:, 2], f[:, 0]])
    w = np.linalg.norm(mesh.vertices[i] - mesh.vertices[j], axis=1)
    n = mesh.n_vertices
    g = sp.csr_matrix((w, (i, j)), shape=(n, n))
    return g.maximum(g.T)


def geodesic_distances(mesh: Mesh, sources: np.ndarray) -> np.ndarray:
    """Edge-graph shortest-path distances (Dijkstra, Euclidean edge lengths)."""
    return csgraph_dijkstra(_edge_graph(mesh), directed=False, indices=sources)


def metric_distortion(
    pred: Mesh,
    gt: Mesh,
    samples: np.ndarray | None = None,
    n_samples: int = 100,
    seed: int = 0,
    region: Region | None = None,
) -> float:
    """Mean absolute geodesic-distance difference from sampled sources.

    Distances are edge-graph shortest paths; sources default to a seeded
    farthest-point sample of the ground truth. Pairs unreachable in either
    mesh are excluded with a warning.
    """
    _check_correspondence(pred, gt)
    if not np.array_equal(pred.faces, gt.faces):
        raise ShapeError("meshes must share connectivity for metric distortion")
    if samples is None:
        samples = farthest_point_sample(gt, min(n_samples, gt.n_vertices), seed)
    samples = np.asarray(samples, dtype=np.int64)
    d_pred = geodesic_distances(pred, samples)
    d_gt = geodesic_distances(gt, samples)
    finite = np.isfinite(d_pred) & np.isfinite(d_gt)
    n_bad = int((~finite).sum())
    if n_bad:
        warnings.warn(
            f"{n_bad} unreachable sample-vertex pairs excluded (disconnected mesh)",
            RuntimeWarning,
            stacklevel=2,
        )
    if region is not None:
        region.validate(gt)
        col = np.zeros(gt.n_vertices, dtype=bool)
        col[region.indices] = True
        finite = finite & col[None, :]
    diff = np.abs(d_pred - d_gt)[finite]
    if diff.size == 0:
        raise ShapeError("no finite geodesic pairs to compare")
    return float(diff.mean())


def align_error(pred: Mesh, gt: Mesh, region: Region) -> float:
    """Region MSE after the best rigid (rotation + translation) alignment.

    Orthogonal Procrustes on the centered patches; reflections disallowed.
    """
    _check_correspondence(pred, gt)
    region.validate(gt)
    if len(region) < 3:
        raise ShapeError("alignment needs a region of at least 3 vertices")
    p = pred.vertices[region.indices]
    q = gt.vertices[region.indices]
    pc = p - p.mean(axis=0)
    qc = q - q.mean(axis=0)
    u, _, vt = np.linalg.svd(pc.T @ qc)
    d = np.sign(np.linalg.det(u @ vt))
    rot = u @ np.diag([1.0, 1.0, d]) @ vt
    aligned = pc @ rot
    return float(((aligned - qc) ** 2).sum(axis=1).mean())


def enn_baseline(
    test_encodings: np.ndarray,
    train_encodings: np.ndarray,
    train_vertices: np.ndarray,
    gt_vertices: np.ndarray,
    model_mse: np.ndarray | None = None,
) -> tuple[float, float, np.ndarray]:
    """Retrieval baseline: nearest train encoding in the L2 sense.

    Returns (mean baseline MSE, percentage of test items where the model MSE
    beats the baseline, per-item baseline MSE). The percentage is nan when
    `model_mse` is not supplied.
    """
    test_encodings = np.asarray(test_encodings, dtype=np.float64)
    train_encodings = np.asarray(train_encodings, dtype=np.float64)
    if train_encodings.shape[0] == 0:
        raise ShapeError("empty training set for the retrieval baseline")
    d2 = ((test_encodings[:, None, :] - train_encodings[None, :, :]) ** 2).sum(axis=2)
    nearest = d2.argmin(axis=1)
    per_item = np.array(
        [
            ((train_vertices[j] - gt_vertices[i]) ** 2).sum(axis=1).mean()
            for i, j in enumerate(nearest)
        ]
    )
    enn = float(per_item.mean())
    if model_mse is None:
        return enn, float("nan"), per_item
    model_mse = np.asarray(model_mse, dtype=np.float64)
    pct = float(100.0 * (model_mse < per_item).mean())
    return enn, pct, per_item
