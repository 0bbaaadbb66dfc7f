"""Triangle meshes from voxel grids, Laplacian smoothing, STL export.

Extraction meshes the boundary faces of the occupied region: each face
between a set voxel and an empty (or outside) voxel becomes two
counter-clockwise-outward triangles.  Vertices are welded by exact
integer lattice coordinate and ordered lexicographically, so identical
grids always produce byte-identical STL output.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .voxel import VoxelGrid

STL_HEADER = b"supershape voxel surface".ljust(80, b"\x00")


class EmptyGrid(ValueError):
    """Mesh extraction requires at least one set voxel."""


class TooManyTriangles(ValueError):
    """Triangle count exceeds the 32-bit STL limit."""


@dataclass
class TriMesh:
    """Indexed triangle mesh in mm: vertices (V, 3) float, triangles
    (T, 3) vertex indices, counter-clockwise outward."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and self.triangles.max() >= len(self.vertices):
            raise ValueError("triangle index out of range")

    def copy(self) -> "TriMesh":
        return TriMesh(self.vertices.copy(), self.triangles.copy())

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def triangle_normals(self) -> np.ndarray:
        """Right-hand-rule unit normals, zero for degenerate triangles."""
        p = self.vertices[self.triangles]
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        length = np.linalg.norm(n, axis=1)
        safe = length > 0
        n[safe] /= length[safe, None]
        return n

    def surface_area(self) -> float:
        p = self.vertices[self.triangles]
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        return float(0.5 * np.linalg.norm(n, axis=1).sum())


def _face_quads(xs, ys, zs, axis: int, positive: bool) -> np.ndarray:
    """Corner lattice coordinates (N, 4, 3) for boundary faces of the
    voxels at (xs, ys, zs), wound counter-clockwise seen from outside."""
    base = np.stack([xs, ys, zs], axis=1).astype(np.int64)
    plane = base.copy()
    if positive:
        plane[:, axis] += 1
    u, v = (ax for ax in range(3) if ax != axis)
    du = np.zeros(3, dtype=np.int64)
    dv = np.zeros(3, dtype=np.int64)
    du[u] = 1
    dv[v] = 1
    a = plane
    b = plane + du
    c = plane + du + dv
    d = plane + dv
    # (a, b, c, d) is counter-clockwise for the +axis normal when
    # (axis, u, v) is an even permutation (axis 0 and 2); otherwise it
    # winds the opposite way, and the -axis face flips either case.
    quad = np.stack([a, b, c, d], axis=1)
    if positive == (axis == 1):
        quad = quad[:, ::-1]
    return quad


def extract_mesh(grid: VoxelGrid) -> TriMesh:
    """Boundary-face mesh of the set voxels, scaled by voxel size."""
    occ = grid.occupancy
    if not occ.any():
        raise EmptyGrid("cannot mesh a grid with no set voxels")

    quads = []
    for axis in range(3):
        inside = np.zeros_like(occ)
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[axis] = slice(None, -1)
        sl_hi[axis] = slice(1, None)
        inside[tuple(sl_lo)] = occ[tuple(sl_hi)]
        xs, ys, zs = np.nonzero(occ & ~inside)
        quads.append(_face_quads(xs, ys, zs, axis, positive=True))

        inside = np.zeros_like(occ)
        inside[tuple(sl_hi)] = occ[tuple(sl_lo)]
        xs, ys, zs = np.nonzero(occ & ~inside)
        quads.append(_face_quads(xs, ys, zs, axis, positive=False))

    corner_quads = np.concatenate(quads)
    tris = np.concatenate([corner_quads[:, (0, 1, 2)], corner_quads[:, (0, 2, 3)]])
    lattice, inverse = np.unique(tris.reshape(-1, 3), axis=0, return_inverse=True)
    triangles = inverse.reshape(-1, 3)
    vertices = lattice.astype(float) * np.asarray(grid.voxel_size)
    return TriMesh(vertices, triangles)


def _edge_counts(mesh: TriMesh):
    t = mesh.triangles
    edges = np.concatenate([t[:, (0, 1)], t[:, (1, 2)], t[:, (2, 0)]])
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0, return_counts=True)


def edge_manifold_audit(mesh: TriMesh) -> bool:
    """True iff every undirected edge is shared by exactly two
    triangles (closed 2-manifold surface)."""
    if mesh.triangles.size == 0:
        return False
    _, counts = _edge_counts(mesh)
    return bool((counts == 2).all())


def split_components(mesh: TriMesh) -> list[TriMesh]:
    """Split into connected surface components (triangles sharing
    vertices), each re-indexed to its own vertex set."""
    nv = len(mesh.vertices)
    t = mesh.triangles
    rows = np.concatenate([t[:, 0], t[:, 1], t[:, 2]])
    cols = np.concatenate([t[:, 1], t[:, 2], t[:, 0]])
    adj = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nv, nv))
    n, labels = csgraph.connected_components(adj.tocsr(), directed=False)
    parts = []
    for comp in range(n):
        tri_mask = labels[t[:, 0]] == comp
        if not tri_mask.any():
            continue
        tri = t[tri_mask]
        used = np.unique(tri)
        remap = np.zeros(nv, dtype=np.int64)
        remap[used] = np.arange(len(used))
        parts.append(TriMesh(mesh.vertices[used], remap[tri]))
    return parts


def laplacian_smooth(mesh: TriMesh, steps: int, lam: float = 1.0) -> TriMesh:
    """Synchronous umbrella smoothing: each pass moves every vertex by
    lam times (1-ring neighbour centroid - vertex).  Connectivity and
    counts are unchanged; lam in (0, 1] keeps every new position a
    convex combination of old ones."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if not 0.0 < lam <= 1.0:
        raise ValueError("lam must be in (0, 1]")
    if steps == 0 or mesh.triangles.size == 0:
        return mesh.copy()
    nv = len(mesh.vertices)
    t = mesh.triangles
    e = np.unique(np.sort(np.concatenate(
        [t[:, (0, 1)], t[:, (1, 2)], t[:, (2, 0)]]), axis=1), axis=0)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    adj = sparse.coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(nv, nv)).tocsr()
    degree = np.asarray(adj.sum(axis=1)).ravel()
    degree[degree == 0] = 1.0
    v = mesh.vertices.copy()
    for _ in range(int(steps)):
        centroid = adj @ v / degree[:, None]
        v = v + lam * (centroid - v)
    return TriMesh(v, t.copy())


def export_stl(mesh: TriMesh, mode: str = "binary") -> bytes:
    """Serialize to STL.  Binary layout: 80-byte header, u32 triangle
    count, then per triangle 12 little-endian f32 (normal + 3 vertices)
    and a zero u16 attribute; 84 + 50*T bytes total.  Byte-for-byte
    deterministic for a given mesh."""
    if mode not in ("binary", "ascii"):
        raise ValueError("mode must be 'binary' or 'ascii'")
    t = mesh.triangles
    count = len(t)
    if count > 0xFFFFFFFF:
        raise TooManyTriangles(f"{count} triangles exceed the 32-bit count")
    normals = mesh.triangle_normals()
    corners = mesh.vertices[t] if count else np.zeros((0, 3, 3))

    if mode == "binary":
        rec = np.zeros(count, dtype=[("normal", "<f4", (3,)),
                                     ("verts", "<f4", (3, 3)),
                                     ("attr", "<u2")])
        rec["normal"] = normals
        rec["verts"] = corners
        return STL_HEADER + struct.pack("<I", count) + rec.tobytes()

    lines = ["solid supershape"]
    for n, vs in zip(normals, corners):
        lines.append(f"  facet normal {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
        lines.append("    outer loop")
        for v in vs:
            lines.append(f"      vertex {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append("endsolid supershape")
    return ("\n".join(lines) + "\n").encode("ascii")


def read_stl_binary(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    """Parse binary STL bytes into (normals (T, 3), corners (T, 3, 3))."""
    if len(data) < 84:
        raise ValueError("binary STL truncated: missing header")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) != expected:
        raise ValueError(f"binary STL size {len(data)} != expected {expected}")
    rec = np.frombuffer(data, dtype=[("normal", "<f4", (3,)),
                                     ("verts", "<f4", (3, 3)),
                                     ("attr", "<u2")], count=count, offset=84)
    return rec["normal"].astype(float), rec["verts"].astype(float)
