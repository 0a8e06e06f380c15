"""End-to-end orchestration: per-shape spectral encodings, decoder training
on a dataset, and full evaluation reports."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import decoder as dec
from .cube import Dataset
from .eigen import Spectrum, smallest_eigenpairs
from .encoding import SpectralEncoding, build_encoding, dataset_stats
from .metrics import EvalReport, align_error, area_error, enn_baseline, metric_distortion, mse
from .operators import (
    cotan_laplacian,
    default_tau,
    ham_operator,
    lmh_operator,
    pat_operator,
    pointcloud_laplacian,
)
from .shapes import Mesh, PointCloud, Region, ShapeError, farthest_point_sample

OPERATOR_KINDS = ("lbo", "pat", "ham", "lmh")
TAU_EIGENVALUES = 30  # eigenvalue count behind the default potential weight


def worker_count() -> int:
    cap = os.environ.get("SPECTRAFORGE_THREADS")
    if cap:
        return max(1, int(cap))
    return max(1, os.cpu_count() or 1)


def _global_pair(shape, k_neighbors: int = 12):
    if isinstance(shape, Mesh):
        return cotan_laplacian(shape)
    return pointcloud_laplacian(shape, k_neighbors)


def _local_spectrum(
    shape,
    region: Region,
    kind: str,
    h: int,
    global_spectrum: Spectrum,
    tau_factor: float,
    mu_factor: float,
    seed: int,
    k_neighbors: int = 12,
) -> Spectrum:
    if kind == "pat":
        if isinstance(shape, Mesh):
            stiff, mass, _ = pat_operator(shape, region)
        else:
            sub = PointCloud(shape.vertices[region.indices])
            stiff, mass = pointcloud_laplacian(sub, min(k_neighbors, sub.n_vertices - 1))
        return smallest_eigenpairs(stiff, mass, h, seed=seed)
    tau = default_tau(global_spectrum.eigenvalues[:TAU_EIGENVALUES], tau_factor)
    if kind == "ham":
        if not isinstance(shape, Mesh):
            raise ShapeError("confinement operators need a mesh")
        stiff, mass = ham_operator(shape, region, tau)
        return smallest_eigenpairs(stiff, mass, h, seed=seed)
    if kind == "lmh":
        if not isinstance(shape, Mesh):
            raise ShapeError("confinement operators need a mesh")
        if global_spectrum.eigenvectors is None:
            raise ShapeError("localized-harmonics operator needs global eigenvectors")
        basis = global_spectrum.eigenvectors
        mu = default_tau(global_spectrum.eigenvalues[:TAU_EIGENVALUES], mu_factor)
        stiff, mass = lmh_operator(shape, region, tau, mu, basis.shape[1], basis)
        return smallest_eigenpairs(stiff, mass, h, seed=seed)
    raise ShapeError(f"unknown operator kind {kind!r}")


def compute_encoding(
    shape,
    regions: list[Region],
    kind: str = "pat",
    k: int = 15,
    h: int | list[int] = 15,
    tau_factor: float = 1e4,
    mu_factor: float = 1e4,
    seed: int = 0,
    k_neighbors: int = 12,
) -> SpectralEncoding:
    """Global + per-region local difference encoding for one shape."""
    if kind not in OPERATOR_KINDS:
        raise ShapeError(f"unknown operator kind {kind!r} (expected {OPERATOR_KINDS})")
    hs = [h] * len(regions) if isinstance(h, int) else list(h)
    if kind != "lbo" and len(hs) != len(regions):
        raise ShapeError("need one local spectrum size per region")
    stiff, mass = _global_pair(shape, k_neighbors)
    k_solve = k if kind in ("lbo", "pat") else max(k, TAU_EIGENVALUES)
    want_vectors = kind == "lmh"
    global_full = smallest_eigenpairs(stiff, mass, k_solve, want_vectors=want_vectors, seed=seed)
    global_spec = global_full.truncated(k)
    if kind == "lbo":
        return build_encoding(global_spec)
    locals_ = []
    for region, h_i in zip(regions, hs):
        spec = _local_spectrum(
            shape, region, kind, h_i, global_full, tau_factor, mu_factor, seed, k_neighbors
        )
        locals_.append((region.label, spec))
    return build_encoding(global_spec, locals_)


def encode_dataset(
    dataset: Dataset,
    kind: str = "pat",
    k: int = 15,
    h: int | list[int] = 15,
    seed: int = 0,
    tau_factor: float = 1e4,
    mu_factor: float = 1e4,
) -> list[SpectralEncoding]:
    """Encodings for every shape, order-preserving, optionally threaded."""

    def one(i: int) -> SpectralEncoding:
        return compute_encoding(
            dataset.shapes[i],
            dataset.regions[i],
            kind=kind,
            k=k,
            h=h,
            tau_factor=tau_factor,
            mu_factor=mu_factor,
            seed=seed,
        )

    workers = worker_count()
    if workers == 1 or len(dataset) < 4:
        return [one(i) for i in range(len(dataset))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(dataset))))


def train_on_dataset(
    dataset: Dataset,
    encodings: list[SpectralEncoding],
    hidden: tuple[int, int, int] = (258, 1024, 2048),
    config: dec.TrainConfig | None = None,
    dropout: float = 0.0,
    init_seed: int = 0,
):
    """Train a decoder on the dataset's train split; returns (model, history).

    Records the training-set encoding extremes in the checkpoint metadata so
    the inference service can expose slider ranges.
    """
    if config is None:
        config = dec.TrainConfig(epochs=300)
    if len(encodings) != len(dataset):
        raise ShapeError("need one encoding per dataset shape")
    layout = encodings[0].layout
    first = dataset.shapes[0]
    is_mesh = isinstance(first, Mesh)
    inputs = np.stack([e.values for e in encodings])
    train_idx = dataset.train_indices
    test_idx = dataset.test_indices
    model = dec.init_decoder(
        inputs.shape[1],
        hidden,
        first.n_vertices,
        dropout=dropout,
        seed=init_seed,
        input_layout=layout,
        faces=first.faces if is_mesh else None,
    )
    if config.loss == "frobenius":
        targets = np.stack([s.vertices for s in dataset.shapes])
        train_targets = targets[train_idx]
        test_targets = targets[test_idx]
    else:
        train_targets = [dataset.shapes[i].vertices for i in train_idx]
        test_targets = [dataset.shapes[i].vertices for i in test_idx]
    train_encs = [encodings[i] for i in train_idx]
    stats = dataset_stats(train_encs)
    dec.set_input_standardization(model, inputs[train_idx])
    history = dec.train(
        model,
        inputs[train_idx],
        train_targets,
        config,
        test_inputs=inputs[test_idx],
        test_targets=test_targets,
    )
    model.training_meta["stats"] = {
        "min": [float(v) for v in stats.minimum],
        "max": [float(v) for v in stats.maximum],
    }
    return model, history


def evaluate_on_dataset(
    dataset: Dataset,
    encodings: list[SpectralEncoding],
    model: dec.DecoderModel,
    metric_samples: int = 100,
    metric_seed: int = 0,
) -> EvalReport:
    """Full test-set report: extrinsic, intrinsic, and baseline columns."""
    test_idx = dataset.test_indices
    train_idx = dataset.train_indices
    if not isinstance(dataset.shapes[0], Mesh):
        raise ShapeError("evaluation reports are defined for mesh datasets")
    gt0 = dataset.shapes[test_idx[0]]
    samples = farthest_point_sample(gt0, min(metric_samples, gt0.n_vertices), metric_seed)
    per = {k: [] for k in ("mse", "mse_r", "mse_rc", "area", "area_r", "metric", "metric_r", "align")}
    for i in test_idx:
        gt = dataset.shapes[i]
        region = dataset.regions[i][0]
        pred = dec.reconstruct(model, encodings[i])
        per["mse"].append(mse(pred, gt))
        per["mse_r"].append(mse(pred, gt, region))
        per["mse_rc"].append(mse(pred, gt, region, complement=True))
        per["area"].append(area_error(pred, gt))
        per["area_r"].append(area_error(pred, gt, region))
        per["metric"].append(metric_distortion(pred, gt, samples=samples))
        per["metric_r"].append(metric_distortion(pred, gt, samples=samples, region=region))
        per["align"].append(align_error(pred, gt, region))
    test_encs = np.stack([encodings[i].values for i in test_idx])
    train_encs = np.stack([encodings[i].values for i in train_idx])
    train_verts = [dataset.shapes[i].vertices for i in train_idx]
    gt_verts = [dataset.shapes[i].vertices for i in test_idx]
    enn, pct, per_item_enn = enn_baseline(
        test_encs, train_encs, train_verts, gt_verts, model_mse=np.asarray(per["mse"])
    )
    report = EvalReport(
        mse=float(np.mean(per["mse"])),
        mse_region=float(np.mean(per["mse_r"])),
        mse_region_complement=float(np.mean(per["mse_rc"])),
        enn=enn,
        em_lt_enn=pct,
        area=float(np.mean(per["area"])),
        area_region=float(np.mean(per["area_r"])),
        metric=float(np.mean(per["metric"])),
        metric_region=float(np.mean(per["metric_r"])),
        align=float(np.mean(per["align"])),
    )
    report.meta = {
        "n_test": int(len(test_idx)),
        "per_item_mse": [float(v) for v in per["mse"]],
        "per_item_enn": [float(v) for v in per_item_enn],
        "model_fingerprint": model.fingerprint(),
    }
    return report
