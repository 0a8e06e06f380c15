"""Command-line pipeline: dataset generation, spectra, encodings, training,
reconstruction, modelling operations, evaluation, and serving."""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from .cube import generate_cube_dataset, load_dataset, save_dataset
from .decoder import TrainConfig, load_checkpoint_file, reconstruct, save_checkpoint_file
from .eigen import export_spectrum, smallest_eigenpairs
from .encoding import dataset_stats, interpolate, load_encoding, save_encoding, swap_segments
from .operators import cotan_laplacian, default_tau, ham_operator, pat_operator, pointcloud_laplacian
from .pipeline import compute_encoding, encode_dataset, evaluate_on_dataset, train_on_dataset
from .report import plot_loss_curve, render_evaluation, write_loss_csv
from .shapes import Mesh, load_mesh, load_pointcloud, load_region, save_mesh


class CliError(RuntimeError):
    pass


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        cfg = tomllib.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    # all paths in the config are relative to the config location
    for key, value in cfg.items():
        if isinstance(value, str) and key.endswith(("path", "dir", "dataset", "model", "out")):
            cfg[key] = os.path.join(base, value)
    return cfg


def _merged(args: argparse.Namespace, key: str, default=None):
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    cfg = getattr(args, "_config", {})
    return cfg.get(key, default)


def _load_shape(path: str):
    if path.endswith((".xyz", ".pts")):
        return load_pointcloud(path)
    try:
        return load_mesh(path)
    except Exception:
        return load_pointcloud(path)


def _regions_for(args, shape):
    regions = []
    for i, rp in enumerate(args.region or []):
        label = os.path.splitext(os.path.basename(rp))[0]
        regions.append(load_region(rp, shape, label=label or f"R{i}"))
    return regions


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen_cube(args) -> int:
    dataset = generate_cube_dataset(
        face_resolution=args.face_res,
        seed=args.seed,
        n_patterns=args.patterns,
        n_depths=args.depths,
        extrusion_height=args.extrusion,
    )
    manifest = save_dataset(args.out, dataset)
    print(f"wrote {len(dataset)} shapes and manifest {manifest}")
    return 0


def cmd_spectrum(args) -> int:
    shape = _load_shape(args.shape)
    regions = _regions_for(args, shape)
    if args.op == "lbo" or not regions:
        if isinstance(shape, Mesh):
            stiff, mass = cotan_laplacian(shape)
        else:
            stiff, mass = pointcloud_laplacian(shape, args.k_neighbors)
        spec = smallest_eigenpairs(stiff, mass, args.k, seed=args.seed)
    elif args.op == "pat":
        stiff, mass, _ = pat_operator(shape, regions[0])
        spec = smallest_eigenpairs(stiff, mass, args.k, seed=args.seed)
    elif args.op == "ham":
        stiff0, mass0 = cotan_laplacian(shape)
        base = smallest_eigenpairs(stiff0, mass0, min(30, stiff0.dimension), seed=args.seed)
        tau = default_tau(base.eigenvalues, args.tau_factor)
        stiff, mass = ham_operator(shape, regions[0], tau)
        spec = smallest_eigenpairs(stiff, mass, args.k, seed=args.seed)
    else:
        raise CliError(f"spectrum subcommand does not support --op {args.op}")
    export_spectrum(args.out, spec)
    print(f"wrote {len(spec)} eigenvalues to {args.out}")
    return 0


def cmd_encode(args) -> int:
    shape = _load_shape(args.shape)
    regions = _regions_for(args, shape)
    enc = compute_encoding(
        shape,
        regions,
        kind=args.op,
        k=args.k,
        h=args.h,
        tau_factor=args.tau_factor,
        seed=args.seed,
    )
    save_encoding(args.out, enc)
    print(f"wrote encoding of length {len(enc)} to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = load_dataset(args.dataset)
    encodings = encode_dataset(
        dataset, kind=args.op, k=args.k, h=args.h, seed=args.seed, tau_factor=args.tau_factor
    )
    hidden = tuple(int(t) for t in args.hidden.split(","))
    if len(hidden) != 3:
        raise CliError("--hidden expects three comma-separated sizes")
    config = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        seed=args.seed,
        loss=args.loss,
        lr_first=args.lr,
        lr_rest=args.lr_rest if args.lr_rest is not None else args.lr * 0.9,
    )
    model, history = train_on_dataset(
        dataset, encodings, hidden=hidden, config=config, dropout=args.dropout, init_seed=args.seed
    )
    save_checkpoint_file(args.out, model)
    base = os.path.splitext(args.out)[0]
    write_loss_csv(base + "_loss.csv", history)
    plot_loss_curve(base + "_loss.png", history)
    if history:
        print(
            f"trained {len(history)} epochs; final train loss "
            f"{history[-1]['train_loss']:.6g}; checkpoint {args.out}"
        )
    return 0


def cmd_reconstruct(args) -> int:
    model = load_checkpoint_file(args.model)
    enc = load_encoding(args.encoding)
    shape = reconstruct(model, enc)
    if isinstance(shape, Mesh):
        save_mesh(args.out, shape)
    else:
        with open(args.out, "w") as fh:
            for x, y, z in shape.vertices:
                fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
    print(f"wrote reconstruction ({shape.n_vertices} vertices) to {args.out}")
    return 0


def cmd_swap(args) -> int:
    a = load_encoding(args.a)
    b = load_encoding(args.b)
    out = swap_segments(a, b, set(args.take))
    save_encoding(args.out, out)
    print(f"wrote swapped encoding to {args.out}")
    return 0


def cmd_interpolate(args) -> int:
    a = load_encoding(args.a)
    b = load_encoding(args.b)
    segments = set(args.segments) if args.segments else None
    out = interpolate(a, b, args.t, segments)
    save_encoding(args.out, out)
    print(f"wrote interpolated encoding (t={args.t}) to {args.out}")
    return 0


def cmd_stats(args) -> int:
    encodings = [load_encoding(p) for p in args.encodings]
    stats = dataset_stats(encodings)
    doc = {
        "layout": [[s.label, s.offset, s.length] for s in stats.layout],
        "min": [float(v) for v in stats.minimum],
        "max": [float(v) for v in stats.maximum],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
    print(f"wrote stats over {len(encodings)} encodings to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    dataset = load_dataset(args.dataset)
    model = load_checkpoint_file(args.model)
    encodings = encode_dataset(
        dataset, kind=args.op, k=args.k, h=args.h, seed=args.seed, tau_factor=args.tau_factor
    )
    report = evaluate_on_dataset(dataset, encodings, model, metric_seed=args.seed)
    label = args.label or os.path.splitext(os.path.basename(args.model))[0]
    written = render_evaluation(args.out, {label: report})
    print(report.table(label))
    print("wrote: " + ", ".join(written))
    return 0


def cmd_serve(args) -> int:
    from .server import serve_checkpoint

    print(f"serving {args.model} on http://{args.host}:{args.port}")
    serve_checkpoint(args.model, args.host, args.port)
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_operator_flags(p: argparse.ArgumentParser, default_op="pat"):
    p.add_argument("--op", choices=("lbo", "pat", "ham", "lmh"), default=default_op)
    p.add_argument("--k", type=int, default=15, help="global spectrum size")
    p.add_argument("--h", type=int, default=15, help="local spectrum size per region")
    p.add_argument("--tau-factor", type=float, default=1e4)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectraforge",
        description="Shape reconstruction and manipulation from Laplacian spectra",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="TOML config file; flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-cube", help="generate the synthetic cuboid dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--face-res", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patterns", type=int, default=125)
    p.add_argument("--depths", type=int, default=8)
    p.add_argument("--extrusion", type=float, default=0.15)
    p.set_defaults(func=cmd_gen_cube)

    p = sub.add_parser("spectrum", help="truncated spectrum of one shape")
    p.add_argument("--shape", required=True, help="OFF/OBJ mesh or XYZ cloud")
    p.add_argument("--region", action="append")
    p.add_argument("--k-neighbors", type=int, default=12)
    p.add_argument("--out", required=True)
    _add_operator_flags(p, default_op="lbo")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("encode", help="spectral encoding of one shape")
    p.add_argument("--shape", "--mesh", dest="shape", required=True)
    p.add_argument("--region", action="append")
    p.add_argument("--out", required=True)
    _add_operator_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train a decoder on a dataset manifest")
    p.add_argument("--dataset", required=True, help="manifest.json path")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--hidden", default="258,1024,2048")
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--loss", choices=("frobenius", "chamfer"), default="frobenius")
    p.add_argument("--lr", type=float, default=2e-3)
    p.add_argument("--lr-rest", type=float, default=None)
    _add_operator_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("reconstruct", help="decode an encoding to a shape")
    p.add_argument("--model", required=True)
    p.add_argument("--encoding", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("swap", help="replace labeled segments of A with B's")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--take", action="append", required=True, help="segment label from B")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_swap)

    p = sub.add_parser("interpolate", help="blend two encodings")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--segments", action="append")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("stats", help="per-dimension min/max over encodings")
    p.add_argument("encodings", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", help="full evaluation report with figures")
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="reports")
    p.add_argument("--label")
    _add_operator_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="HTTP inference service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args._config = _load_config(args.config)
        if args._config:
            given = set(argv if argv is not None else sys.argv[1:])
            for key, value in args._config.items():
                attr = key.replace("-", "_")
                if hasattr(args, attr) and f"--{key}" not in given:
                    setattr(args, attr, value)
        return args.func(args)
    except Exception as exc:  # pipeline errors map to exit 1 with a message
        print(f"error: {exc}", file=sys.stderr)
        if os.environ.get("SPECTRAFORGE_DEBUG"):
            traceback.print_exc()
        return 1


def main() -> None:
    sys.exit(dispatch())
