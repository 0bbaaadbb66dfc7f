"""Binary voxel grids and the surface rasterization pipeline.

Sampled surfaces are rasterized into occupancy grids by adaptive
midpoint refinement: any lattice cell whose corners spread more than
one voxel apart is subdivided (bilinearly) until the sampled sheet
cannot skip voxels.  Grids can then be solidified by exterior flood
fill, fitted with the square-torus mounting platform, compared
voxel-wise for fitness, and serialized to a flat binary format.

Grids are value-like: every operation returns a new grid.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import SurfaceSample

VOX_MAGIC = b"SUPERVOX"
VOX_VERSION = 1

# Cap on refinement points per rasterization so pathological genomes
# (wildly aliased radii) cannot blow up memory; when exceeded, every
# cell's refinement depth is halved until the total fits.  The cap is
# deterministic, so fitness stays reproducible.
REFINE_POINT_BUDGET = 4_000_000
_CHUNK_POINTS = 2_000_000


class EmptyResult(ValueError):
    """No sampled point landed inside the workspace."""


class GridTooSmall(ValueError):
    """Grid dimensions cannot accommodate the requested feature."""


class DimMismatch(ValueError):
    """Two grids with different dimensions were combined."""


@dataclass
class VoxelGrid:
    """Occupancy array indexed [x, y, z] plus physical voxel size in mm."""

    occupancy: np.ndarray
    voxel_size: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        self.occupancy = np.asarray(self.occupancy, dtype=bool)
        if self.occupancy.ndim != 3:
            raise ValueError("occupancy must be a 3D array")
        if any(s <= 0 for s in self.voxel_size):
            raise ValueError("voxel_size components must be positive")
        self.voxel_size = tuple(float(s) for s in self.voxel_size)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.occupancy.shape

    @classmethod
    def empty(cls, dims, voxel_size=(1.0, 1.0, 1.0)) -> "VoxelGrid":
        return cls(np.zeros(tuple(int(d) for d in dims), dtype=bool), voxel_size)

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.occupancy.copy(), self.voxel_size)

    def count(self) -> int:
        return int(np.count_nonzero(self.occupancy))


@dataclass(frozen=True)
class Workspace:
    """Physical build volume and its voxel discretization."""

    physical_size: tuple[float, float, float]
    grid_dims: tuple[int, int, int]
    platform_enabled: bool = False
    fill_interior: bool = False

    @property
    def voxel_size(self) -> tuple[float, float, float]:
        return tuple(p / n for p, n in zip(self.physical_size, self.grid_dims))

    @classmethod
    def target_mode(cls, dims=(50, 50, 50)) -> "Workspace":
        """Dimensionless unit-voxel grid for target-match evolution."""
        dims = tuple(int(d) for d in dims)
        return cls(physical_size=tuple(float(d) for d in dims), grid_dims=dims,
                   platform_enabled=False, fill_interior=True)

    @classmethod
    def vawt_mode(cls) -> "Workspace":
        """50x50x70 mm build volume at 100^3 voxels (0.5x0.5x0.7 mm)."""
        return cls(physical_size=(50.0, 50.0, 70.0), grid_dims=(100, 100, 100),
                   platform_enabled=True, fill_interior=False)


def _refine_cells(quads: np.ndarray, ks: int, kt: int) -> np.ndarray:
    """Uniform bilinear lattice, (n, (ks+1)*(kt+1), 3), over quads with
    corners ordered (c00, c01, c10, c11)."""
    s = np.linspace(0.0, 1.0, ks + 1, dtype=np.float32)[None, :, None, None]
    t = np.linspace(0.0, 1.0, kt + 1, dtype=np.float32)[None, None, :, None]
    top = quads[:, None, 0] * (1 - t[:, 0]) + quads[:, None, 1] * t[:, 0]
    bottom = quads[:, None, 2] * (1 - t[:, 0]) + quads[:, None, 3] * t[:, 0]
    pts = top[:, None, :, :] * (1 - s) + bottom[:, None, :, :] * s
    return pts.reshape(len(quads), -1, 3)


def _set_points(occupancy: np.ndarray, pts: np.ndarray, dims_i: np.ndarray) -> int:
    idx = np.floor(pts).astype(np.int32)
    inside = ((idx >= 0) & (idx < dims_i)).all(axis=1)
    idx = idx[inside]
    if idx.shape[0]:
        occupancy[idx[:, 0], idx[:, 1], idx[:, 2]] = True
    return idx.shape[0]


def rasterize(sample: SurfaceSample, ws: Workspace, scale: float | None = None,
              max_refine: int = 6) -> VoxelGrid:
    """Set every voxel crossed by the sampled surface.

    scale maps model units to voxel indices (the grid center is the
    model origin); None fits the sample's largest radius just inside
    the grid.  Every lattice cell whose corners spread more than one
    voxel apart is midpoint-refined (to dyadic depth, at most
    max_refine) so the sampled sheet cannot skip voxels; points outside
    the grid are clipped.  Raises EmptyResult if nothing lands inside.
    """
    dims = np.asarray(ws.grid_dims, dtype=float)
    dims_i = np.asarray(ws.grid_dims, dtype=np.int32)
    pts = sample.points
    if scale is None:
        flat = np.abs(pts.reshape(-1, 3))
        peak = float(flat.max())
        if peak > 0:
            # Scaled norm avoids overflow for astronomically large radii.
            radius = peak * float(np.linalg.norm(flat / peak, axis=1).max())
            scale = (dims.min() / 2.0 - 1.0) / radius
        else:
            scale = 1.0
    q = pts * float(scale) + dims / 2.0
    # Everything beyond this box is far outside any grid; clamping lets
    # the remaining work run in float32 without overflow.
    np.clip(q, -1e6, 1e6, out=q)
    q = q.astype(np.float32)

    occupancy = np.zeros(ws.grid_dims, dtype=bool)
    n_inside = _set_points(occupancy, q.reshape(-1, 3), dims_i)

    # Per-cell edge spans in each lattice direction; cells whose edges
    # stay within one voxel need no refinement.
    c00, c01 = q[:-1, :-1], q[:-1, 1:]
    c10, c11 = q[1:, :-1], q[1:, 1:]
    span_s = np.maximum(np.abs(c10 - c00), np.abs(c11 - c01)).max(axis=2)
    span_t = np.maximum(np.abs(c01 - c00), np.abs(c11 - c10)).max(axis=2)
    ii, jj = np.nonzero((span_s > 1.0) | (span_t > 1.0))
    if ii.size == 0:
        if n_inside == 0:
            raise EmptyResult("no sampled point falls inside the workspace")
        return VoxelGrid(occupancy, ws.voxel_size)

    quads = np.stack([c00[ii, jj], c01[ii, jj], c10[ii, jj], c11[ii, jj]],
                     axis=1)
    # The bilinear patch lies in its corners' convex hull, so cells
    # whose AABB misses the grid can never set a voxel.
    alive = ((quads.max(axis=1) >= 0.0).all(axis=1)
             & (quads.min(axis=1) <= dims).all(axis=1))
    quads = quads[alive]
    if len(quads):
        # Dyadic midpoint-refinement depth per lattice direction.
        def _k(span):
            depth = np.ceil(np.log2(np.maximum(span, 1.0))).astype(np.int64)
            return 2 ** np.clip(depth, 0, max_refine)

        ks = _k(span_s[ii, jj][alive])
        kt = _k(span_t[ii, jj][alive])
        while float(((ks + 1) * (kt + 1)).sum()) > REFINE_POINT_BUDGET:
            ks = np.where(ks > 1, ks // 2, ks)
            kt = np.where(kt > 1, kt // 2, kt)
            if (ks <= 1).all() and (kt <= 1).all():
                break

        pair_key = ks * 1000 + kt
        for key in np.unique(pair_key):
            group = quads[pair_key == key]
            gks, gkt = int(key) // 1000, int(key) % 1000
            step = max(1, _CHUNK_POINTS // ((gks + 1) * (gkt + 1)))
            for start in range(0, len(group), step):
                refined = _refine_cells(group[start:start + step], gks, gkt)
                n_inside += _set_points(occupancy, refined.reshape(-1, 3), dims_i)

    if n_inside == 0:
        raise EmptyResult("no sampled point falls inside the workspace")
    return VoxelGrid(occupancy, ws.voxel_size)


def fill_interior(grid: VoxelGrid) -> VoxelGrid:
    """Solidify: empty voxels not 6-connected to the grid boundary
    become set.  Idempotent and monotone."""
    labels, n = ndimage.label(~grid.occupancy)
    if n == 0:
        return grid.copy()
    exterior = np.zeros(n + 1, dtype=bool)
    for face in (labels[0], labels[-1], labels[:, 0], labels[:, -1],
                 labels[:, :, 0], labels[:, :, -1]):
        exterior[np.unique(face)] = True
    exterior[0] = False
    return VoxelGrid(~exterior[labels], grid.voxel_size)


_AXIS_PAIRS = ((0, 1), (0, 2), (1, 2))


def close_nonmanifold_edges(grid: VoxelGrid) -> VoxelGrid:
    """Resolve checkerboard voxel pairs so boundary-face meshes are
    2-manifold.

    Wherever two set voxels meet only along an edge (their two common
    face neighbours both empty), one of the empty neighbours is set.
    Repeats until no such configuration remains; only ever adds voxels.
    """
    occ = grid.occupancy.copy()
    changed = True
    while changed:
        changed = False
        for a, b in _AXIS_PAIRS:
            perm = (a, b) + tuple(ax for ax in range(3) if ax not in (a, b))
            o = occ.transpose(perm)
            s00 = o[:-1, :-1]
            s11 = o[1:, 1:]
            s10 = o[1:, :-1]
            s01 = o[:-1, 1:]
            diag_main = s00 & s11 & ~s10 & ~s01
            if diag_main.any():
                s10[diag_main] = True
                changed = True
            diag_anti = s10 & s01 & ~s00 & ~s11
            if diag_anti.any():
                s00[diag_anti] = True
                changed = True
    return VoxelGrid(occ, grid.voxel_size)


def add_platform(grid: VoxelGrid) -> VoxelGrid:
    """Stamp the mounting platform: a square torus 2 voxels wide around
    a 10x10 hollow tube, centered in x/y and running through every
    z layer.  Voxels outside the 14x14 footprint are unchanged."""
    nx, ny, _ = grid.dims
    if nx < 14 or ny < 14:
        raise GridTooSmall(f"platform needs >= 14x14 voxels in x/y, got {nx}x{ny}")
    occ = grid.occupancy.copy()
    ox, oy = (nx - 14) // 2, (ny - 14) // 2
    ix, iy = (nx - 10) // 2, (ny - 10) // 2
    occ[ox:ox + 14, oy:oy + 14, :] = True
    occ[ix:ix + 10, iy:iy + 10, :] = False
    return VoxelGrid(occ, grid.voxel_size)


def match_fraction(candidate: VoxelGrid, target: VoxelGrid) -> float:
    """Fraction of voxels with equal occupancy in the two grids."""
    if candidate.dims != target.dims:
        raise DimMismatch(f"{candidate.dims} vs {target.dims}")
    agree = np.count_nonzero(candidate.occupancy == target.occupancy)
    return float(agree) / candidate.occupancy.size


def active_fraction(grid: VoxelGrid) -> float:
    """Fraction of set voxels."""
    return grid.count() / grid.occupancy.size


# ---------------------------------------------------------------------------
# Flat binary serialization
#
# Layout (all little-endian):
#   bytes  0-7   magic "SUPERVOX"
#   bytes  8-11  format version (u32)
#   bytes 12-15  reserved, zero
#   bytes 16-27  dims nx, ny, nz (3 x u32)
#   bytes 28-51  voxel size sx, sy, sz in mm (3 x f64)
#   bytes 52-    occupancy bit-packed row-major with x fastest
#                (linear index x + nx*y + nx*ny*z; bit k of byte j is
#                voxel 8j+k), zero-padded to a whole byte.
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<8sII3I3d")


def save_voxels(grid: VoxelGrid) -> bytes:
    nx, ny, nz = grid.dims
    header = _HEADER.pack(VOX_MAGIC, VOX_VERSION, 0, nx, ny, nz,
                          *grid.voxel_size)
    bits = grid.occupancy.transpose(2, 1, 0).reshape(-1)
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    return header + packed.tobytes()


def load_voxels(data: bytes) -> VoxelGrid:
    if len(data) < _HEADER.size:
        raise ValueError("voxel data truncated: header incomplete")
    magic, version, _, nx, ny, nz, sx, sy, sz = _HEADER.unpack_from(data)
    if magic != VOX_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VOX_VERSION:
        raise ValueError(f"unsupported voxel format version {version}")
    n = nx * ny * nz
    payload = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    if payload.size != (n + 7) // 8:
        raise ValueError("voxel data truncated: occupancy incomplete")
    bits = np.unpackbits(payload, count=n, bitorder="little").astype(bool)
    occupancy = bits.reshape(nz, ny, nx).transpose(2, 1, 0)
    return VoxelGrid(occupancy.copy(), (sx, sy, sz))


def write_voxels(grid: VoxelGrid, path) -> None:
    with open(path, "wb") as f:
        f.write(save_voxels(grid))


def read_voxels(path) -> VoxelGrid:
    with open(path, "rb") as f:
        return load_voxels(f.read())
