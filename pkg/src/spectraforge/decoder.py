"""Learnable map from spectral encodings to vertex coordinates.

A 4-layer fully connected decoder: three hidden blocks of dense ->
batch normalization -> SELU (-> dropout), and a linear output layer
reshaped to n x 3 coordinates. Forward, backward, and the Adam training
loop are implemented directly on numpy arrays so that training is
deterministic under a seed and gradients can be checked against finite
differences in 64-bit mode.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .encoding import EncodingError, Segment, SpectralEncoding
from .shapes import Mesh, PointCloud

SELU_ALPHA = 1.6732632423543772
SELU_SCALE = 1.0507009873554805
BN_EPS = 1e-5
BN_MOMENTUM = 0.1


class DecoderError(RuntimeError):
    """Model construction, shape, or persistence failure."""


@dataclass
class DecoderModel:
    input_len: int
    hidden: tuple[int, int, int]
    n_vertices: int
    dropout: float
    dtype: np.dtype
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    gamma: list[np.ndarray]
    beta: list[np.ndarray]
    run_mean: list[np.ndarray]
    run_var: list[np.ndarray]
    input_layout: tuple[Segment, ...] | None = None
    faces: np.ndarray | None = None
    training_meta: dict = field(default_factory=dict)
    # Per-dimension affine standardization applied before the first dense
    # layer. Encoding segments can differ in magnitude by an order of
    # magnitude (localized eigenvalue gaps dwarf global ones), which skews
    # the first layer toward the large segment; standardizing by training-set
    # statistics keeps every dimension equally learnable.
    input_shift: np.ndarray | None = None
    input_scale: np.ndarray | None = None

    def parameters(self) -> list[np.ndarray]:
        return self.weights + self.biases + self.gamma + self.beta

    def parameter_names(self) -> list[str]:
        return (
            [f"W{i}" for i in range(4)]
            + [f"b{i}" for i in range(4)]
            + [f"gamma{i}" for i in range(3)]
            + [f"beta{i}" for i in range(3)]
        )

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        extras = [a for a in (self.input_shift, self.input_scale) if a is not None]
        for arr in self.parameters() + self.run_mean + self.run_var + extras:
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def init_decoder(
    input_len: int,
    hidden: tuple[int, int, int],
    n_vertices: int,
    dropout: float = 0.0,
    seed: int = 0,
    dtype=np.float32,
    input_layout: tuple[Segment, ...] | None = None,
    faces: np.ndarray | None = None,
) -> DecoderModel:
    """Deterministic variance-scaling (LeCun normal) initialization."""
    if input_len < 1:
        raise DecoderError("input_len must be >= 1")
    if len(hidden) != 3:
        raise DecoderError("expected exactly 3 hidden layer sizes")
    if not 0.0 <= dropout < 1.0:
        raise DecoderError("dropout must be in [0, 1)")
    dtype = np.dtype(dtype)
    sizes = [input_len, *hidden, 3 * n_vertices]
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        std = 1.0 / np.sqrt(fan_in)
        weights.append((rng.standard_normal((fan_in, fan_out)) * std).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    gamma = [np.ones(h, dtype=dtype) for h in hidden]
    beta = [np.zeros(h, dtype=dtype) for h in hidden]
    run_mean = [np.zeros(h, dtype=dtype) for h in hidden]
    run_var = [np.ones(h, dtype=dtype) for h in hidden]
    return DecoderModel(
        input_len=input_len,
        hidden=tuple(int(h) for h in hidden),
        n_vertices=int(n_vertices),
        dropout=float(dropout),
        dtype=dtype,
        weights=weights,
        biases=biases,
        gamma=gamma,
        beta=beta,
        run_mean=run_mean,
        run_var=run_var,
        input_layout=input_layout,
        faces=None if faces is None else np.asarray(faces, dtype=np.int64),
    )


def set_input_standardization(model: DecoderModel, inputs: np.ndarray) -> None:
    """Freeze per-dimension (mean, std) of `inputs` into the model."""
    arr = np.asarray(inputs, dtype=model.dtype)
    if arr.ndim != 2 or arr.shape[1] != model.input_len:
        raise DecoderError(
            f"inputs shape {arr.shape} does not match input length {model.input_len}"
        )
    model.input_shift = arr.mean(axis=0).astype(model.dtype)
    model.input_scale = np.maximum(arr.std(axis=0), 1e-6).astype(model.dtype)


def _selu(x):
    return SELU_SCALE * np.where(x > 0, x, SELU_ALPHA * np.expm1(x))


def _selu_grad(x):
    return SELU_SCALE * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(x))


def _forward_internal(
    model: DecoderModel,
    batch: np.ndarray,
    mode: str,
    dropout_rng: np.random.Generator | None = None,
    update_stats: bool = False,
):
    """Returns (flat output b x 3n, cache for backward)."""
    x = np.asarray(batch, dtype=model.dtype)
    if x.ndim != 2 or x.shape[1] != model.input_len:
        raise DecoderError(
            f"batch shape {x.shape} does not match input length {model.input_len}"
        )
    if mode not in ("train", "eval"):
        raise DecoderError(f"unknown mode {mode!r}")
    if model.input_shift is not None:
        x = ((x - model.input_shift) / model.input_scale).astype(model.dtype)
    cache = {"x": x, "z": [], "xhat": [], "inv_std": [], "pre_act": [], "act": [], "drop": []}
    a = x
    for l in range(3):
        z = a @ model.weights[l] + model.biases[l]
        if mode == "train":
            mu = z.mean(axis=0)
            var = z.var(axis=0)
            if update_stats:
                m = BN_MOMENTUM
                model.run_mean[l] = ((1 - m) * model.run_mean[l] + m * mu).astype(model.dtype)
                model.run_var[l] = ((1 - m) * model.run_var[l] + m * var).astype(model.dtype)
        else:
            mu = model.run_mean[l]
            var = model.run_var[l]
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (z - mu) * inv_std
        pre = model.gamma[l] * xhat + model.beta[l]
        act = _selu(pre)
        if mode == "train" and model.dropout > 0.0:
            if dropout_rng is None:
                raise DecoderError("train-mode dropout needs a seeded generator")
            keep = dropout_rng.random(act.shape) >= model.dropout
            mask = keep.astype(model.dtype) / model.dtype.type(1.0 - model.dropout)
            act = act * mask
        else:
            mask = None
        cache["z"].append(z)
        cache["xhat"].append(xhat)
        cache["inv_std"].append(inv_std)
        cache["pre_act"].append(pre)
        cache["act"].append(act)
        cache["drop"].append(mask)
        a = act
    out = a @ model.weights[3] + model.biases[3]
    cache["mode"] = mode
    return out, cache


def forward(
    model: DecoderModel,
    batch: np.ndarray,
    mode: str = "eval",
    dropout_rng: np.random.Generator | None = None,
    update_stats: bool = False,
) -> np.ndarray:
    """Batch of encodings -> b x n x 3 coordinates."""
    out, _ = _forward_internal(model, batch, mode, dropout_rng, update_stats)
    return out.reshape(out.shape[0], model.n_vertices, 3)


def backward(model: DecoderModel, cache: dict, grad_out: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss w.r.t. every parameter, given dLoss/dOutput."""
    grads: dict[str, np.ndarray] = {}
    g = np.asarray(grad_out, dtype=model.dtype).reshape(grad_out.shape[0], -1)
    a_prev = cache["act"][2]
    grads["W3"] = a_prev.T @ g
    grads["b3"] = g.sum(axis=0)
    da = g @ model.weights[3].T
    for l in (2, 1, 0):
        if cache["drop"][l] is not None:
            da = da * cache["drop"][l]
        dpre = da * _selu_grad(cache["pre_act"][l])
        grads[f"gamma{l}"] = (dpre * cache["xhat"][l]).sum(axis=0)
        grads[f"beta{l}"] = dpre.sum(axis=0)
        dxhat = dpre * model.gamma[l]
        if cache["mode"] == "train":
            b = dxhat.shape[0]
            xhat = cache["xhat"][l]
            dz = (
                cache["inv_std"][l]
                / b
                * (b * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
            )
        else:
            dz = dxhat * cache["inv_std"][l]
        inp = cache["x"] if l == 0 else cache["act"][l - 1]
        grads[f"W{l}"] = inp.T @ dz
        grads[f"b{l}"] = dz.sum(axis=0)
        if l > 0:
            da = dz @ model.weights[l].T
    return grads


# ---------------------------------------------------------------------------
# Losses


def loss_frobenius(pred: np.ndarray, target: np.ndarray) -> float:
    """Squared Frobenius norm of the coordinate difference (summed)."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise DecoderError(f"shape mismatch {pred.shape} vs {target.shape}")
    d = pred - target
    return float(np.sum(d * d))


def loss_frobenius_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    return 2.0 * (np.asarray(pred) - np.asarray(target))


def _nearest(src: np.ndarray, dst: np.ndarray):
    """Index into dst of the nearest neighbor of each src row."""
    if src.shape[0] * dst.shape[0] <= 4_000_000:
        d2 = ((src[:, None, :] - dst[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1), d2.min(axis=1)
    dist, idx = cKDTree(dst).query(src)
    return idx, dist**2


def loss_chamfer(pred: np.ndarray, target: np.ndarray) -> float:
    """Symmetric mean squared nearest-neighbor distance between point sets."""
    pred = np.asarray(pred, dtype=np.float64).reshape(-1, 3)
    target = np.asarray(target, dtype=np.float64).reshape(-1, 3)
    if pred.size == 0 or target.size == 0:
        raise DecoderError("chamfer loss needs non-empty point sets")
    _, d2_pt = _nearest(pred, target)
    _, d2_tp = _nearest(target, pred)
    return float(d2_pt.mean() + d2_tp.mean())


def loss_chamfer_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    pred64 = np.asarray(pred, dtype=np.float64).reshape(-1, 3)
    target64 = np.asarray(target, dtype=np.float64).reshape(-1, 3)
    n, m = pred64.shape[0], target64.shape[0]
    idx_pt, _ = _nearest(pred64, target64)
    idx_tp, _ = _nearest(target64, pred64)
    grad = 2.0 / n * (pred64 - target64[idx_pt])
    np.add.at(grad, idx_tp, 2.0 / m * (pred64[idx_tp] - target64))
    return grad.reshape(np.asarray(pred).shape)


# ---------------------------------------------------------------------------
# Training


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int = 64
    lr_first: float = 2e-3
    lr_rest: float = 1.8e-3
    lr_switch_epoch: int = 1000
    seed: int = 0
    loss: str = "frobenius"
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise DecoderError("epochs and batch_size must be >= 1")
        if self.lr_first <= 0 or self.lr_rest <= 0:
            raise DecoderError("learning rates must be positive")
        if self.loss not in ("frobenius", "chamfer"):
            raise DecoderError(f"unknown loss {self.loss!r}")

    def lr_at(self, epoch: int) -> float:
        return self.lr_first if epoch < self.lr_switch_epoch else self.lr_rest


class _Adam:
    def __init__(self, model: DecoderModel, config: TrainConfig):
        self.cfg = config
        self.m = {n: np.zeros_like(p) for n, p in zip(model.parameter_names(), model.parameters())}
        self.v = {n: np.zeros_like(p) for n, p in zip(model.parameter_names(), model.parameters())}
        self.t = 0

    def step(self, model: DecoderModel, grads: dict[str, np.ndarray], lr: float):
        self.t += 1
        b1, b2, eps = self.cfg.beta1, self.cfg.beta2, self.cfg.adam_eps
        corr1 = 1.0 - b1**self.t
        corr2 = 1.0 - b2**self.t
        params = dict(zip(model.parameter_names(), model.parameters()))
        for name, p in params.items():
            g = grads[name].astype(p.dtype)
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            mhat = self.m[name] / corr1
            vhat = self.v[name] / corr2
            p -= (lr * mhat / (np.sqrt(vhat) + eps)).astype(p.dtype)


def _snapshot(model: DecoderModel):
    return (
        [w.copy() for w in model.weights],
        [b.copy() for b in model.biases],
        [g.copy() for g in model.gamma],
        [b.copy() for b in model.beta],
        [m.copy() for m in model.run_mean],
        [v.copy() for v in model.run_var],
    )


def _restore(model: DecoderModel, snap):
    model.weights, model.biases, model.gamma, model.beta, model.run_mean, model.run_var = (
        [a.copy() for a in group] for group in snap
    )


def _dataset_loss(model: DecoderModel, inputs, targets, loss_kind: str) -> float:
    total = 0.0
    bs = 256
    for start in range(0, len(inputs), bs):
        out = forward(model, inputs[start : start + bs], mode="eval")
        for i, pred in enumerate(out):
            tgt = targets[start + i]
            if loss_kind == "frobenius":
                total += loss_frobenius(pred, tgt)
            else:
                total += loss_chamfer(pred, tgt)
    return total / len(inputs)


def train(
    model: DecoderModel,
    inputs: np.ndarray,
    targets,
    config: TrainConfig,
    test_inputs: np.ndarray | None = None,
    test_targets=None,
) -> list[dict]:
    """Adam training with the two-phase learning-rate schedule.

    `targets` is an N x n x 3 array (frobenius) or a list of point arrays
    (chamfer). Mutates `model` in place and returns the per-epoch history
    [{epoch, lr, train_loss, test_loss}]. On divergence the last finite
    parameter snapshot is restored and training stops early.
    """
    inputs = np.asarray(inputs, dtype=model.dtype)
    if inputs.ndim != 2 or inputs.shape[1] != model.input_len:
        raise DecoderError(
            f"inputs shape {inputs.shape} does not match input length {model.input_len}"
        )
    n_samples = inputs.shape[0]
    if len(targets) != n_samples:
        raise DecoderError("inputs and targets must be parallel")
    if config.loss == "frobenius":
        targets = np.asarray(targets, dtype=model.dtype)
        if targets.shape[1:] != (model.n_vertices, 3):
            raise DecoderError(
                f"targets shape {targets.shape} does not match output "
                f"({model.n_vertices} x 3)"
            )
    rng = np.random.default_rng(config.seed)
    dropout_rng = np.random.default_rng(config.seed + 1)
    optimizer = _Adam(model, config)
    history: list[dict] = []
    last_good = _snapshot(model)
    for epoch in range(config.epochs):
        lr = config.lr_at(epoch)
        perm = rng.permutation(n_samples)
        epoch_loss = 0.0
        diverged = False
        for start in range(0, n_samples, config.batch_size):
            sel = perm[start : start + config.batch_size]
            batch = inputs[sel]
            out_flat, cache = _forward_internal(
                model, batch, mode="train", dropout_rng=dropout_rng, update_stats=True
            )
            out = out_flat.reshape(len(sel), model.n_vertices, 3)
            batch_loss = 0.0
            grad_out = np.empty_like(out)
            for i, pred in enumerate(out):
                tgt = targets[sel[i]]
                if config.loss == "frobenius":
                    batch_loss += loss_frobenius(pred, tgt)
                    grad_out[i] = loss_frobenius_grad(pred, tgt)
                else:
                    batch_loss += loss_chamfer(pred, tgt)
                    grad_out[i] = loss_chamfer_grad(pred, tgt)
            if not np.isfinite(batch_loss):
                diverged = True
                break
            # gradients averaged over the mini batch
            grads = backward(model, cache, grad_out / len(sel))
            optimizer.step(model, grads, lr)
            epoch_loss += batch_loss
        if diverged:
            _restore(model, last_good)
            model.training_meta["diverged_at_epoch"] = epoch
            break
        last_good = _snapshot(model)
        entry = {"epoch": epoch, "lr": lr, "train_loss": epoch_loss / n_samples}
        if test_inputs is not None and len(test_inputs):
            entry["test_loss"] = _dataset_loss(
                model, np.asarray(test_inputs, dtype=model.dtype), test_targets, config.loss
            )
        history.append(entry)
    model.training_meta.update(
        {
            "seed": config.seed,
            "epochs_run": len(history),
            "loss": config.loss,
            "final_train_loss": history[-1]["train_loss"] if history else None,
        }
    )
    return history


def reconstruct(model: DecoderModel, encoding: SpectralEncoding):
    """Eval-mode reconstruction of a single encoding as a Mesh or PointCloud."""
    if model.input_layout is not None and tuple(encoding.layout) != tuple(model.input_layout):
        raise EncodingError("encoding layout does not match the trained model")
    if len(encoding) != model.input_len:
        raise EncodingError(
            f"encoding length {len(encoding)} != model input {model.input_len}"
        )
    out = forward(model, encoding.values[None, :], mode="eval")[0]
    verts = np.asarray(out, dtype=np.float64)
    if model.faces is not None:
        return Mesh(verts, model.faces)
    return PointCloud(verts)


# ---------------------------------------------------------------------------
# Checkpoint container: magic, version, header JSON, raw tensors, checksum


_MAGIC = b"SFDC"
_VERSION = 1


def save_checkpoint(model: DecoderModel) -> bytes:
    names = model.parameter_names() + [f"run_mean{i}" for i in range(3)] + [
        f"run_var{i}" for i in range(3)
    ]
    tensors = model.parameters() + model.run_mean + model.run_var
    if model.input_shift is not None:
        names += ["input_shift", "input_scale"]
        tensors += [model.input_shift, model.input_scale]
    header = {
        "version": _VERSION,
        "input_len": model.input_len,
        "hidden": list(model.hidden),
        "n_vertices": model.n_vertices,
        "dropout": model.dropout,
        "dtype": model.dtype.name,
        "layout": None
        if model.input_layout is None
        else [[s.label, s.offset, s.length] for s in model.input_layout],
        "training_meta": model.training_meta,
        "tensors": [[n, list(t.shape)] for n, t in zip(names, tensors)],
        "has_faces": model.faces is not None,
        "n_faces": 0 if model.faces is None else int(model.faces.shape[0]),
    }
    head_bytes = json.dumps(header, sort_keys=True).encode()
    blob = bytearray()
    blob += _MAGIC
    blob += struct.pack("<I", len(head_bytes))
    blob += head_bytes
    for t in tensors:
        blob += np.ascontiguousarray(t).astype("<" + model.dtype.str[1:]).tobytes()
    if model.faces is not None:
        blob += np.ascontiguousarray(model.faces).astype("<i8").tobytes()
    blob += hashlib.sha256(bytes(blob)).digest()
    return bytes(blob)


def load_checkpoint(data: bytes) -> DecoderModel:
    if len(data) < 40 or data[:4] != _MAGIC:
        raise DecoderError("not a decoder checkpoint (bad magic)")
    body, digest = data[:-32], data[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise DecoderError("checkpoint checksum mismatch (truncated or corrupt)")
    head_len = struct.unpack("<I", data[4:8])[0]
    header = json.loads(data[8 : 8 + head_len].decode())
    if header["version"] != _VERSION:
        raise DecoderError(f"unsupported checkpoint version {header['version']}")
    dtype = np.dtype(header["dtype"])
    offset = 8 + head_len
    arrays = {}
    for name, shape in header["tensors"]:
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * dtype.itemsize
        arr = np.frombuffer(body, dtype="<" + dtype.str[1:], count=count, offset=offset)
        arrays[name] = arr.astype(dtype).reshape(shape)
        offset += nbytes
    faces = None
    if header["has_faces"]:
        count = header["n_faces"] * 3
        faces = np.frombuffer(body, dtype="<i8", count=count, offset=offset)
        faces = faces.astype(np.int64).reshape(-1, 3)
        offset += count * 8
    layout = None
    if header["layout"] is not None:
        layout = tuple(Segment(str(l), int(o), int(n)) for l, o, n in header["layout"])
    return DecoderModel(
        input_len=int(header["input_len"]),
        hidden=tuple(header["hidden"]),
        n_vertices=int(header["n_vertices"]),
        dropout=float(header["dropout"]),
        dtype=dtype,
        weights=[arrays[f"W{i}"] for i in range(4)],
        biases=[arrays[f"b{i}"] for i in range(4)],
        gamma=[arrays[f"gamma{i}"] for i in range(3)],
        beta=[arrays[f"beta{i}"] for i in range(3)],
        run_mean=[arrays[f"run_mean{i}"] for i in range(3)],
        run_var=[arrays[f"run_var{i}"] for i in range(3)],
        input_layout=layout,
        faces=faces,
        training_meta=header["training_meta"],
        input_shift=arrays.get("input_shift"),
        input_scale=arrays.get("input_scale"),
    )


def save_checkpoint_file(path: str, model: DecoderModel) -> None:
    with open(path, "wb") as fh:
        fh.write(save_checkpoint(model))


def load_checkpoint_file(path: str) -> DecoderModel:
    with open(path, "rb") as fh:
        return load_checkpoint(fh.read())
