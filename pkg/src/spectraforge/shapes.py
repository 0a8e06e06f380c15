"""Shape containers, file IO, regions, submesh extraction, areas, sampling."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np


class ShapeError(ValueError):
    """Invalid shape data (bad indices, degenerate faces, empty regions)."""


class ParseError(ShapeError):
    """Malformed shape or region file; carries a line number when known."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc += f"{path}"
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh: n x 3 vertex coordinates and m x 3 face index triples."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ShapeError(f"vertices must be n x 3, got {v.shape}")
        if f.size and (f.ndim != 2 or f.shape[1] != 3):
            raise ShapeError(f"faces must be m x 3, got {f.shape}")
        f = f.reshape(-1, 3)
        if f.size:
            if v.shape[0] < 3:
                raise ShapeError("mesh with faces needs at least 3 vertices")
            if f.min() < 0 or f.max() >= v.shape[0]:
                raise ShapeError("face index out of range")
            degen = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
            if degen.any():
                bad = int(np.flatnonzero(degen)[0])
                raise ShapeError(f"degenerate face {bad}: {f[bad].tolist()}")
        if not np.isfinite(v).all():
            raise ShapeError("non-finite vertex coordinate")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]


@dataclass(frozen=True)
class PointCloud:
    """Unorganized point cloud: n x 3 coordinates."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 1:
            raise ShapeError(f"point cloud must be n x 3 with n >= 1, got {v.shape}")
        if not np.isfinite(v).all():
            raise ShapeError("non-finite point coordinate")
        object.__setattr__(self, "vertices", v)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]


@dataclass(frozen=True)
class Region:
    """Vertex-index subset of a host shape; indices sorted, unique, non-empty."""

    indices: np.ndarray
    label: str = "R"

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size == 0:
            raise ShapeError("empty region")
        if idx[0] < 0:
            raise ShapeError("negative region index")
        object.__setattr__(self, "indices", idx)

    def validate(self, shape: Mesh | PointCloud) -> "Region":
        if self.indices[-1] >= shape.n_vertices:
            raise ShapeError(
                f"region index {int(self.indices[-1])} out of range for "
                f"{shape.n_vertices}-vertex shape"
            )
        return self

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[self.indices] = True
        return m

    def __len__(self) -> int:
        return self.indices.size


# ---------------------------------------------------------------------------
# File IO


def load_mesh(path: str | os.PathLike) -> Mesh:
    """Read an ASCII OFF or OBJ mesh, preserving vertex/face order."""
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    with open(path, "r") as fh:
        lines = fh.readlines()
    if ext == ".off":
        return _parse_off(lines, path)
    if ext == ".obj":
        return _parse_obj(lines, path)
    # sniff: OFF files start with the OFF keyword
    if lines and lines[0].strip().upper().startswith("OFF"):
        return _parse_off(lines, path)
    return _parse_obj(lines, path)


def _parse_off(lines, path) -> Mesh:
    rows = []
    for i, raw in enumerate(lines):
        s = raw.split("#", 1)[0].strip()
        if s:
            rows.append((i + 1, s))
    if not rows:
        raise ParseError("empty OFF file", path)
    ln, header = rows[0]
    body = rows[1:]
    if header.upper() != "OFF":
        if header.upper().startswith("OFF"):
            # counts glued to the keyword on the same line
            body = [(ln, header[3:].strip())] + body
        else:
            raise ParseError("missing OFF header", path, ln)
    if not body:
        raise ParseError("missing OFF counts line", path)
    ln, counts = body[0]
    try:
        nv, nf, _ = (int(t) for t in counts.split()[:3])
    except Exception:
        raise ParseError(f"bad OFF counts line {counts!r}", path, ln) from None
    if len(body) - 1 < nv + nf:
        raise ParseError(
            f"expected {nv} vertices + {nf} faces, found {len(body) - 1} rows", path
        )
    verts = np.empty((nv, 3), dtype=np.float64)
    for k in range(nv):
        ln, s = body[1 + k]
        parts = s.split()
        if len(parts) < 3:
            raise ParseError(f"bad vertex line {s!r}", path, ln)
        try:
            verts[k] = [float(p) for p in parts[:3]]
        except ValueError:
            raise ParseError(f"bad vertex line {s!r}", path, ln) from None
    faces = np.empty((nf, 3), dtype=np.int64)
    for k in range(nf):
        ln, s = body[1 + nv + k]
        parts = s.split()
        try:
            cnt = int(parts[0])
            idx = [int(p) for p in parts[1 : 1 + cnt]]
        except (ValueError, IndexError):
            raise ParseError(f"bad face line {s!r}", path, ln) from None
        if cnt != 3:
            raise ParseError(f"non-triangular face (degree {cnt})", path, ln)
        faces[k] = idx
    try:
        return Mesh(verts, faces)
    except ShapeError as exc:
        raise ParseError(str(exc), path) from exc


def _parse_obj(lines, path) -> Mesh:
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    for i, raw in enumerate(lines):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        parts = s.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ParseError(f"bad vertex line {s!r}", path, i + 1)
            try:
                verts.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise ParseError(f"bad vertex line {s!r}", path, i + 1) from None
        elif tag == "f":
            idx = []
            for tok in parts[1:]:
                head = tok.split("/", 1)[0]
                try:
                    j = int(head)
                except ValueError:
                    raise ParseError(f"bad face token {tok!r}", path, i + 1) from None
                if j == 0:
                    raise ParseError("OBJ face indices are 1-based, found 0", path, i + 1)
                idx.append(j - 1 if j > 0 else len(verts) + j)
            if len(idx) != 3:
                raise ParseError(f"non-triangular face (degree {len(idx)})", path, i + 1)
            faces.append(idx)
    if not verts:
        raise ParseError("no vertices in OBJ file", path)
    try:
        return Mesh(np.asarray(verts), np.asarray(faces, dtype=np.int64).reshape(-1, 3))
    except ShapeError as exc:
        raise ParseError(str(exc), path) from exc


def save_mesh(path: str | os.PathLike, mesh: Mesh) -> None:
    """Write an ASCII OFF file (full float precision)."""
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
        for v in mesh.vertices:
            fh.write(f"{float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def load_pointcloud(path: str | os.PathLike) -> PointCloud:
    """Read an XYZ file (one point per line) or the vertices of an OBJ."""
    path = os.fspath(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".obj":
        with open(path, "r") as fh:
            mesh_like = _parse_obj_points(fh.readlines(), path)
        return mesh_like
    pts = []
    with open(path, "r") as fh:
        for i, raw in enumerate(fh):
            s = raw.split("#", 1)[0].strip()
            if not s:
                continue
            parts = s.split()
            if len(parts) < 3:
                raise ParseError(f"bad point line {s!r}", path, i + 1)
            try:
                pts.append([float(p) for p in parts[:3]])
            except ValueError:
                raise ParseError(f"bad point line {s!r}", path, i + 1) from None
    if not pts:
        raise ParseError("no points in file", path)
    return PointCloud(np.asarray(pts))


def _parse_obj_points(lines, path) -> PointCloud:
    pts = []
    for i, raw in enumerate(lines):
        s = raw.split("#", 1)[0].strip()
        if s.startswith("v "):
            parts = s.split()
            try:
                pts.append([float(p) for p in parts[1:4]])
            except ValueError:
                raise ParseError(f"bad vertex line {s!r}", path, i + 1) from None
    if not pts:
        raise ParseError("no vertices in OBJ file", path)
    return PointCloud(np.asarray(pts))


def load_region(path: str | os.PathLike, shape: Mesh | PointCloud, label: str = "R") -> Region:
    """Read a region file: JSON integer array or newline-delimited integers."""
    path = os.fspath(path)
    with open(path, "r") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith(("[", "{")):
        try:
            values = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON region file: {exc}", path) from exc
        if isinstance(values, dict):
            label = values.get("label", label)
            values = values.get("indices")
        if not isinstance(values, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in values
        ):
            raise ParseError(
                "region JSON must be an integer array or {label, indices}", path
            )
    else:
        values = []
        for i, raw in enumerate(text.splitlines()):
            for tok in raw.split("#", 1)[0].split():
                try:
                    values.append(int(tok))
                except ValueError:
                    raise ParseError(f"bad index {tok!r}", path, i + 1) from None
    if not values:
        raise ShapeError(f"{path}: empty region")
    return Region(np.asarray(values, dtype=np.int64), label=label).validate(shape)


def save_region(path: str | os.PathLike, region: Region) -> None:
    with open(path, "w") as fh:
        json.dump({"label": region.label, "indices": [int(i) for i in region.indices]}, fh)


# ---------------------------------------------------------------------------
# Geometry operations


def extract_submesh(mesh: Mesh, region: Region):
    """Cut out the faces fully inside `region`.

    Returns (submesh, boundary, vertex_map) where `boundary` lists submesh
    indices of vertices adjacent (in the original mesh) to any vertex outside
    the region, and `vertex_map` sends submesh index -> original index.
    """
    region.validate(mesh)
    inside = region.mask(mesh.n_vertices)
    face_in = inside[mesh.faces].all(axis=1)
    if not face_in.any():
        raise ShapeError("region selects no complete face (empty submesh)")
    sub_faces_orig = mesh.faces[face_in]
    vertex_map = np.unique(sub_faces_orig)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[vertex_map] = np.arange(vertex_map.size)
    sub = Mesh(mesh.vertices[vertex_map], remap[sub_faces_orig])

    # boundary: submesh vertices with an original-mesh edge to the outside
    touches_out = np.zeros(mesh.n_vertices, dtype=bool)
    f = mesh.faces
    for a, b in ((0, 1), (1, 2), (2, 0)):
        out_b = ~inside[f[:, b]]
        np.logical_or.at(touches_out, f[:, a], out_b)
        out_a = ~inside[f[:, a]]
        np.logical_or.at(touches_out, f[:, b], out_a)
    boundary = remap[vertex_map[touches_out[vertex_map]]]
    return sub, np.sort(boundary), vertex_map


def face_areas(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices
    f = mesh.faces
    e1 = v[f[:, 1]] - v[f[:, 0]]
    e2 = v[f[:, 2]] - v[f[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)


def vertex_areas(mesh: Mesh) -> np.ndarray:
    """Barycentric vertex areas: one third of incident triangle areas."""
    areas = face_areas(mesh)
    out = np.zeros(mesh.n_vertices)
    third = areas / 3.0
    for c in range(3):
        np.add.at(out, mesh.faces[:, c], third)
    return out


def farthest_point_sample(shape: Mesh | PointCloud, count: int, seed: int) -> np.ndarray:
    """Deterministic farthest-point sampling of vertex indices.

    The first index is drawn from `seed`; each following index maximizes the
    minimum Euclidean distance to the chosen set (ties broken by lowest index).
    """
    n = shape.n_vertices
    if count > n:
        raise ShapeError(f"cannot sample {count} points from {n} vertices")
    if count <= 0:
        raise ShapeError("count must be positive")
    x = shape.vertices
    rng = np.random.default_rng(seed)
    first = int(rng.integers(n))
    chosen = np.empty(count, dtype=np.int64)
    chosen[0] = first
    mind = np.linalg.norm(x - x[first], axis=1)
    for i in range(1, count):
        nxt = int(np.argmax(mind))
        chosen[i] = nxt
        np.minimum(mind, np.linalg.norm(x - x[nxt], axis=1), out=mind)
    return chosen


# ---------------------------------------------------------------------------
# Reference geometry builders (used by the dataset generator and tests)


def grid_mesh(resolution: int, size: float = 1.0) -> Mesh:
    """Flat square grid in the z=0 plane, right-triangle tessellation.

    `resolution` quads per side, (resolution+1)^2 vertices.
    """
    r = resolution
    u = np.linspace(0.0, size, r + 1)
    xx, yy = np.meshgrid(u, u, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel(), np.zeros((r + 1) ** 2)])
    faces = []
    for i in range(r):
        for j in range(r):
            a = i * (r + 1) + j
            b = a + 1
            c = a + (r + 1)
            d = c + 1
            faces.append([a, b, d])
            faces.append([a, d, c])
    return Mesh(verts, np.asarray(faces, dtype=np.int64))


def grid_boundary_indices(resolution: int) -> np.ndarray:
    """Perimeter vertex indices of grid_mesh(resolution)."""
    r = resolution
    idx = np.arange((r + 1) ** 2).reshape(r + 1, r + 1)
    return np.unique(np.concatenate([idx[0, :], idx[-1, :], idx[:, 0], idx[:, -1]]))


def icosphere(subdivisions: int, radius: float = 1.0) -> Mesh:
    """Unit icosphere by repeated edge midpoint subdivision of an icosahedron."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        vlist = list(verts)
        midpoint: dict[tuple[int, int], int] = {}

        def mid(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoint:
                p = vlist[a] + vlist[b]
                p = p / np.linalg.norm(p)
                midpoint[key] = len(vlist)
                vlist.append(p)
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.asarray(vlist)
        faces = np.asarray(new_faces, dtype=np.int64)
    return Mesh(verts * radius, faces)
