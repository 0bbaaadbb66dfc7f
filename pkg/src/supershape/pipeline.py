"""End-to-end composition: genome -> voxel grid -> mesh -> STL bytes.

Scale policies map model coordinates to voxel indices:

* fit  — normalize by the largest sampled radius so the shape fills
  the grid (used when building targets and for inspection renders).
* vawt — basic genomes at 25 voxels per superformula radius unit
  (blades may clip at the workspace edge); extended genomes already
  measure themselves in voxel units through r0.

Meshing is always preceded by checkerboard closure so the extracted
boundary surface is a closed 2-manifold.
"""

from __future__ import annotations

import json

from .geometry import ExtendedGenome, Genome, genome_from_dict, sample_surface
from .mesh import TriMesh, export_stl, extract_mesh, laplacian_smooth
from .voxel import (EmptyResult, VoxelGrid, Workspace, active_fraction,
                    add_platform, close_nonmanifold_edges, fill_interior,
                    rasterize, save_voxels)

DEFAULT_ARTIFACT_RES = (512, 256)

VAWT_BASIC_SCALE = 25.0


def vawt_scale(genome: Genome) -> float:
    return 1.0 if isinstance(genome, ExtendedGenome) else VAWT_BASIC_SCALE


def resolve_scale(policy, genome: Genome, ws: Workspace) -> float | None:
    """Translate a scale policy ("auto", "fit", "vawt", or a number)
    into the rasterizer's scale argument (None = fit)."""
    if policy in (None, "auto"):
        return vawt_scale(genome) if ws.platform_enabled else None
    if policy == "fit":
        return None
    if policy == "vawt":
        return vawt_scale(genome)
    return float(policy)


def default_smooth_steps(genome: Genome) -> int:
    """Smoothing defaults per mode: 3 passes for basic seeds, 50 for
    the extended ones."""
    return 50 if isinstance(genome, ExtendedGenome) else 3


def genome_to_grid(genome: Genome, ws: Workspace,
                   res: tuple[int, int] = DEFAULT_ARTIFACT_RES,
                   scale="auto", fill: bool | None = None,
                   platform: bool | None = None,
                   manifold_close: bool = True) -> VoxelGrid:
    """Rasterize a genome into the workspace, optionally solidifying
    and stamping the mounting platform."""
    fill = ws.fill_interior if fill is None else fill
    platform = ws.platform_enabled if platform is None else platform
    sample = sample_surface(genome, res)
    grid = rasterize(sample, ws, scale=resolve_scale(scale, genome, ws))
    if manifold_close:
        grid = close_nonmanifold_edges(grid)
    if fill:
        grid = fill_interior(grid)
        if manifold_close:
            grid = close_nonmanifold_edges(grid)
    if platform:
        grid = add_platform(grid)
        if manifold_close:
            grid = close_nonmanifold_edges(grid)
    return grid


def shape_active_fraction(genome: Genome, ws: Workspace,
                          res: tuple[int, int] = DEFAULT_ARTIFACT_RES,
                          scale="auto") -> float:
    """Active-voxel fraction of the bare rasterized shape (no platform,
    no fill): the quantity checked against the 1% discard floor.
    A shape entirely outside the workspace scores 0."""
    try:
        sample = sample_surface(genome, res)
        grid = rasterize(sample, ws, scale=resolve_scale(scale, genome, ws))
    except EmptyResult:
        return 0.0
    return active_fraction(grid)


def grid_to_mesh(grid: VoxelGrid, smooth_steps: int = 0,
                 lam: float = 1.0) -> TriMesh:
    mesh = extract_mesh(grid)
    if smooth_steps:
        mesh = laplacian_smooth(mesh, smooth_steps, lam)
    return mesh


def genome_to_mesh(genome: Genome, ws: Workspace,
                   res: tuple[int, int] = DEFAULT_ARTIFACT_RES,
                   scale="auto", smooth_steps: int | None = None,
                   lam: float = 1.0, fill: bool | None = None,
                   platform: bool | None = None) -> TriMesh:
    grid = genome_to_grid(genome, ws, res=res, scale=scale, fill=fill,
                          platform=platform)
    steps = default_smooth_steps(genome) if smooth_steps is None else smooth_steps
    return grid_to_mesh(grid, smooth_steps=steps, lam=lam)


def write_individual_artifacts(path_stem, genome: Genome, ws: Workspace,
                               res: tuple[int, int] = DEFAULT_ARTIFACT_RES,
                               scale="auto", smooth_steps: int | None = None) -> dict:
    """Write <stem>.genome.json, <stem>.vox and <stem>.stl; returns the
    file paths."""
    grid = genome_to_grid(genome, ws, res=res, scale=scale)
    steps = default_smooth_steps(genome) if smooth_steps is None else smooth_steps
    mesh = grid_to_mesh(grid, smooth_steps=steps)
    paths = {"genome": f"{path_stem}.genome.json",
             "vox": f"{path_stem}.vox",
             "stl": f"{path_stem}.stl"}
    with open(paths["genome"], "w") as f:
        json.dump(genome.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    with open(paths["vox"], "wb") as f:
        f.write(save_voxels(grid))
    with open(paths["stl"], "wb") as f:
        f.write(export_stl(mesh))
    return paths


def load_genome_file(path) -> Genome:
    with open(path) as f:
        return genome_from_dict(json.load(f))
