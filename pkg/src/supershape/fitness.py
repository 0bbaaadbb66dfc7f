"""Fitness providers: automated voxel-match, manual rpm entry, mock.

All providers report a value to be maximized.  Target matching runs
the full genome -> surface -> voxel pipeline against a fixed target
grid; manual fitness is entered by the operator through the engine's
single mutation point (see evolve.submit_manual_fitness); the mock is
a trivial deterministic stand-in for engine tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .evolve import submit_manual_fitness  # re-exported engine surface  # noqa: F401
from .geometry import Genome, sample_surface
from .voxel import (EmptyResult, VoxelGrid, Workspace,
                    close_nonmanifold_edges, fill_interior, match_fraction,
                    rasterize)

# Target evaluation samples coarser than the fabrication pipeline: a
# 50-voxel grid is watertight at this density (coarser lattices leak
# at high-curvature features and poison the fitness signal) and the GA
# budget is hundreds of thousands of evaluations.
DEFAULT_TARGET_RES = (256, 128)


def evaluate_target(genome: Genome, target: VoxelGrid, ws: Workspace,
                    res: tuple[int, int] = DEFAULT_TARGET_RES) -> float:
    """Fraction of voxels matching the target after rasterizing the
    genome (normalized to fill the workspace) and solidifying it.
    A genome that misses the workspace entirely scores as the all-empty
    grid."""
    try:
        grid = rasterize(sample_surface(genome, res), ws, scale=None)
    except EmptyResult:
        grid = VoxelGrid.empty(ws.grid_dims, ws.voxel_size)
    if ws.fill_interior:
        grid = fill_interior(grid)
    return match_fraction(grid, target)


@dataclass
class TargetMatchProvider:
    """Callable fitness provider closing over a target grid."""

    target: VoxelGrid
    workspace: Workspace
    res: tuple[int, int] = DEFAULT_TARGET_RES
    kind: str = field(default="target_match", init=False)

    def __post_init__(self):
        if tuple(self.target.dims) != tuple(self.workspace.grid_dims):
            raise ValueError("target dims must equal workspace grid dims")

    def __call__(self, genome: Genome) -> float:
        return evaluate_target(genome, self.target, self.workspace, self.res)


def evaluate_mock(genome: Genome) -> float:
    """Deterministic stand-in fitness: the sum of genes."""
    return float(genome.as_array().sum())


@dataclass
class MockProvider:
    kind: str = field(default="mock", init=False)

    def __call__(self, genome: Genome) -> float:
        return evaluate_mock(genome)
