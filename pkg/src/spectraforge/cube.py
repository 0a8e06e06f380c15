"""Synthetic cuboid dataset: pattern extrusions on one face, variable depth.

Each shape is a closed cuboid surface sharing one triangulated-grid
connectivity. A geometric pattern (circle / ellipse / square / rectangle) is
extruded outward on the front face (z = depth), and the cuboid is scaled
along z by a per-shape depth factor. The front-face vertex set is the local
region and is identical, index for index, across all shapes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .shapes import Mesh, PointCloud, Region, ShapeError, load_mesh, load_pointcloud, load_region, save_mesh, save_region

DEPTH_RANGE = (0.6, 2.0)
N_PATTERNS = 125
N_DEPTHS = 8
DEFAULT_EXTRUSION = 0.25  # fraction of the unit cube edge

_GOLDEN_ANGLE = 2.39996322972865332


@dataclass(frozen=True)
class CubeSpec:
    """Parameters of one cuboid: grid resolution, pattern id, depth, height."""

    face_resolution: int
    pattern_id: int
    depth_factor: float
    extrusion_height: float = DEFAULT_EXTRUSION

    def __post_init__(self):
        if self.face_resolution < 8:
            raise ShapeError(
                f"face_resolution {self.face_resolution} too low; patterns need >= 8"
            )
        if not 0 <= self.pattern_id < N_PATTERNS:
            raise ShapeError(f"pattern_id must be in [0, {N_PATTERNS})")
        if not DEPTH_RANGE[0] <= self.depth_factor <= DEPTH_RANGE[1]:
            raise ShapeError(f"depth_factor outside {list(DEPTH_RANGE)}")


@dataclass
class Dataset:
    """Parallel shapes and per-shape region lists with a seeded 90/10 split."""

    shapes: list
    regions: list  # list of list[Region], parallel to shapes
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int
    specs: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.shapes) != len(self.regions):
            raise ShapeError("shapes and regions must be parallel sequences")
        n = len(self.shapes)
        combined = np.sort(np.concatenate([self.train_indices, self.test_indices]))
        if not np.array_equal(combined, np.arange(n)):
            raise ShapeError("split must partition the dataset indices")

    def __len__(self) -> int:
        return len(self.shapes)


# ---------------------------------------------------------------------------
# Pattern catalogue
#
# 125 patterns = 4 families enumerated on deterministic parameter grids:
#   circle     5 radii                                    =   5
#   square     5 half-sizes x 4 rotations                 =  20
#   ellipse    5 semi-majors x 2 aspects x 5 rotations    =  50
#   rectangle  5 semi-majors x 2 aspects x 5 rotations    =  50
# Rotation grids avoid mirror/diagonal symmetry pairs, and every pattern
# center is displaced from the face midpoint along an id-dependent
# golden-angle direction. The displacement is a deliberate macro feature:
# it keeps every pair of catalogue entries geometrically well separated
# (no near-duplicates for retrieval baselines to exploit) and guarantees
# no two ids produce isometric meshes at any admissible resolution.

# Per-family center radii keep cross-family lookalikes (e.g. a thin ellipse
# vs a thin rectangle at the same rotation) from landing on the same center.
_CENTER_OFFSET = {"circle": 0.10, "square": 0.12, "ellipse": 0.14, "rectangle": 0.06}
_CIRCLE_R = (0.16, 0.19, 0.22, 0.25, 0.28)
_SQUARE_S = (0.13, 0.15, 0.17, 0.19, 0.21)
_SQUARE_ROT = (10.0, 30.0, 50.0, 70.0)
_ELLIPSE_A = (0.18, 0.20, 0.22, 0.24, 0.26)
_ELLIPSE_ASPECT = (0.55, 0.75)
_RECT_A = (0.17, 0.195, 0.22, 0.245, 0.27)
_RECT_ASPECT = (0.45, 0.65)
_ELLIPSE_ROT = (10.0, 26.0, 42.0, 58.0, 74.0)
_RECT_ROT = (18.0, 34.0, 50.0, 66.0, 82.0)


def pattern_params(pattern_id: int) -> dict:
    """Decode a pattern id into (family, sizes, rotation)."""
    if not 0 <= pattern_id < N_PATTERNS:
        raise ShapeError(f"pattern_id must be in [0, {N_PATTERNS})")
    pid = pattern_id
    if pid < 5:
        return {"family": "circle", "a": _CIRCLE_R[pid], "b": _CIRCLE_R[pid], "rot": 0.0}
    pid -= 5
    if pid < 20:
        s = _SQUARE_S[pid // 4]
        return {"family": "square", "a": s, "b": s, "rot": _SQUARE_ROT[pid % 4]}
    pid -= 20
    if pid < 50:
        a = _ELLIPSE_A[pid // 10]
        asp = _ELLIPSE_ASPECT[(pid // 5) % 2]
        return {"family": "ellipse", "a": a, "b": a * asp, "rot": _ELLIPSE_ROT[pid % 5]}
    pid -= 50
    a = _RECT_A[pid // 10]
    asp = _RECT_ASPECT[(pid // 5) % 2]
    return {"family": "rectangle", "a": a, "b": a * asp, "rot": _RECT_ROT[pid % 5]}


def _pattern_inside_depth(u: np.ndarray, v: np.ndarray, pattern_id: int) -> np.ndarray:
    """Signed inside-distance of (u, v) face coordinates to the pattern boundary.

    Positive inside, negative outside. The approximate (scaled-radial)
    distance for ellipses is fine here: only its zero level set and
    monotonicity matter.
    """
    p = pattern_params(pattern_id)
    off = _CENTER_OFFSET[p["family"]]
    cu = 0.5 + off * np.cos(_GOLDEN_ANGLE * pattern_id)
    cv = 0.5 + off * np.sin(_GOLDEN_ANGLE * pattern_id)
    th = np.deg2rad(p["rot"])
    du, dv = u - cu, v - cv
    ru = np.cos(th) * du + np.sin(th) * dv
    rv = -np.sin(th) * du + np.cos(th) * dv
    a, b = p["a"], p["b"]
    if p["family"] == "circle":
        return a - np.hypot(ru, rv)
    if p["family"] == "ellipse":
        rho = np.sqrt((ru / a) ** 2 + (rv / b) ** 2)
        return (1.0 - rho) * b
    # square / rectangle
    return np.minimum(a - np.abs(ru), b - np.abs(rv))


def pattern_displacement(u: np.ndarray, v: np.ndarray, spec: CubeSpec) -> np.ndarray:
    """Outward extrusion per front-face vertex: a plateau with a one-cell ramp."""
    d = _pattern_inside_depth(u, v, spec.pattern_id)
    taper = 1.5 / spec.face_resolution
    return spec.extrusion_height * np.clip(d / taper, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Cuboid surface mesh


def _cuboid_lattice(resolution: int):
    """Shared surface lattice of the unit cube: vertices and oriented faces."""
    r = resolution
    index: dict[tuple[int, int, int], int] = {}
    coords: list[tuple[int, int, int]] = []

    def vid(i: int, j: int, k: int) -> int:
        key = (i, j, k)
        if key not in index:
            index[key] = len(coords)
            coords.append(key)
        return index[key]

    faces: list[list[int]] = []

    def add_face_grid(corner, eu, ev, flip: bool):
        # grid over one cube face; quads split into two right triangles
        grid = np.empty((r + 1, r + 1), dtype=np.int64)
        for i in range(r + 1):
            for j in range(r + 1):
                pt = (
                    corner[0] + eu[0] * i + ev[0] * j,
                    corner[1] + eu[1] * i + ev[1] * j,
                    corner[2] + eu[2] * i + ev[2] * j,
                )
                grid[i, j] = vid(*pt)
        for i in range(r):
            for j in range(r):
                a, b = grid[i, j], grid[i + 1, j]
                c, d = grid[i, j + 1], grid[i + 1, j + 1]
                if flip:
                    faces.append([a, c, d])
                    faces.append([a, d, b])
                else:
                    faces.append([a, d, c])
                    faces.append([a, b, d])

    # outward orientation for each of the six faces
    add_face_grid((0, 0, r), (1, 0, 0), (0, 1, 0), flip=False)  # front, z = 1
    add_face_grid((0, 0, 0), (1, 0, 0), (0, 1, 0), flip=True)   # back, z = 0
    add_face_grid((0, 0, 0), (0, 1, 0), (0, 0, 1), flip=True)   # x = 0
    add_face_grid((r, 0, 0), (0, 1, 0), (0, 0, 1), flip=False)  # x = 1
    add_face_grid((0, 0, 0), (1, 0, 0), (0, 0, 1), flip=False)  # y = 0
    add_face_grid((0, r, 0), (1, 0, 0), (0, 0, 1), flip=True)   # y = 1
    lattice = np.asarray(coords, dtype=np.float64) / r
    return lattice, np.asarray(faces, dtype=np.int64)


_LATTICE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _lattice(resolution: int):
    if resolution not in _LATTICE_CACHE:
        _LATTICE_CACHE[resolution] = _cuboid_lattice(resolution)
    return _LATTICE_CACHE[resolution]


def front_face_region(resolution: int, label: str = "front") -> Region:
    """Front-face (z = max) vertex set; identical indices for every spec."""
    lattice, _ = _lattice(resolution)
    return Region(np.flatnonzero(lattice[:, 2] == 1.0), label=label)


def generate_cube(spec: CubeSpec) -> Mesh:
    """One cuboid: depth-scaled unit cube plus the front-face extrusion."""
    lattice, faces = _lattice(spec.face_resolution)
    verts = lattice.copy()
    verts[:, 2] *= spec.depth_factor
    front = lattice[:, 2] == 1.0
    disp = pattern_displacement(lattice[front, 0], lattice[front, 1], spec)
    verts[front, 2] += disp
    return Mesh(verts, faces)


def depth_factors(count: int = N_DEPTHS) -> np.ndarray:
    return np.linspace(DEPTH_RANGE[0], DEPTH_RANGE[1], count)


def split_indices(count: int, seed: int, test_fraction: float = 0.1):
    """Deterministic 90/10 partition of [0, count)."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(count)
    n_test = max(1, int(round(count * test_fraction)))
    test = np.sort(perm[:n_test])
    train = np.sort(perm[n_test:])
    return train, test


def generate_cube_dataset(
    face_resolution: int = 20,
    seed: int = 0,
    n_patterns: int = N_PATTERNS,
    n_depths: int = N_DEPTHS,
    extrusion_height: float = DEFAULT_EXTRUSION,
) -> Dataset:
    """All pattern x depth combinations, common connectivity, seeded split."""
    if n_patterns > N_PATTERNS:
        raise ShapeError(f"at most {N_PATTERNS} patterns available")
    region = front_face_region(face_resolution)
    depths = depth_factors(n_depths)
    shapes, regions, specs = [], [], []
    for pid in range(n_patterns):
        for depth in depths:
            spec = CubeSpec(face_resolution, pid, float(depth), extrusion_height)
            shapes.append(generate_cube(spec))
            regions.append([region])
            specs.append(spec)
    train, test = split_indices(len(shapes), seed)
    return Dataset(shapes, regions, train, test, seed, specs)


# ---------------------------------------------------------------------------
# Manifest IO


def save_dataset(directory: str | os.PathLike, dataset: Dataset) -> str:
    """Write shapes, regions, and a JSON manifest; returns the manifest path."""
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    shape_paths, region_paths = [], []
    region_files: dict[int, str] = {}
    for i, (shape, regs) in enumerate(zip(dataset.shapes, dataset.regions)):
        rel = f"shape_{i:04d}.off"
        save_mesh(os.path.join(directory, rel), shape)
        shape_paths.append(rel)
        per_shape = []
        for reg in regs:
            key = id(reg)
            if key not in region_files:
                rel_r = f"region_{reg.label}_{len(region_files)}.json"
                save_region(os.path.join(directory, rel_r), reg)
                region_files[key] = rel_r
            per_shape.append({"path": region_files[key], "label": reg.label})
        region_paths.append(per_shape)
    manifest = {
        "kind": "mesh",
        "seed": dataset.seed,
        "shapes": shape_paths,
        "regions": region_paths,
        "split": {
            "train": [int(i) for i in dataset.train_indices],
            "test": [int(i) for i in dataset.test_indices],
        },
    }
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path


def load_dataset(manifest_path: str | os.PathLike) -> Dataset:
    manifest_path = os.fspath(manifest_path)
    base = os.path.dirname(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    loader = load_mesh if manifest.get("kind", "mesh") == "mesh" else load_pointcloud
    shapes = [loader(os.path.join(base, p)) for p in manifest["shapes"]]
    region_cache: dict[str, Region] = {}
    regions = []
    for shape, per_shape in zip(shapes, manifest["regions"]):
        regs = []
        for entry in per_shape:
            key = entry["path"]
            if key not in region_cache:
                region_cache[key] = load_region(
                    os.path.join(base, key), shape, label=entry["label"]
                )
            regs.append(region_cache[key])
        regions.append(regs)
    return Dataset(
        shapes,
        regions,
        np.asarray(manifest["split"]["train"], dtype=np.int64),
        np.asarray(manifest["split"]["test"], dtype=np.int64),
        int(manifest["seed"]),
    )
