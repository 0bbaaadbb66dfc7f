"""Supershape generation, voxel/STL fabrication pipeline, and genetic
evolution with automated or human-entered fitness."""

__version__ = "0.1.0"

from .geometry import (BasicGenome, BasicParams, ExtendedGenome, Genome,
                       SurfaceSample, extended_point, sample_surface,
                       spherical_product, superformula_r)
from .voxel import (VoxelGrid, Workspace, active_fraction, add_platform,
                    close_nonmanifold_edges, fill_interior, match_fraction,
                    rasterize)
from .mesh import (TriMesh, edge_manifold_audit, export_stl, extract_mesh,
                   laplacian_smooth)
from .evolve import GAConfig, Individual, RunState
from .targets import build_target, builtin, builtin_names

__all__ = [
    "BasicGenome", "BasicParams", "ExtendedGenome", "Genome", "SurfaceSample",
    "extended_point", "sample_surface", "spherical_product", "superformula_r",
    "VoxelGrid", "Workspace", "active_fraction", "add_platform",
    "close_nonmanifold_edges", "fill_interior", "match_fraction", "rasterize",
    "TriMesh", "edge_manifold_audit", "export_stl", "extract_mesh",
    "laplacian_smooth",
    "GAConfig", "Individual", "RunState",
    "build_target", "builtin", "builtin_names",
]
