"""Canonical named genomes and the voxel targets built from them.

The basic genomes (cube, star, heart) drive target-match evolution;
the extended ones (torus, mobius, shell, and the two turbine seeds)
exercise the deformation mapping and seed the hardware-in-the-loop
runs.  Deformation parameters a genome does not use are held at the
neutral values t1=t2=0, d1=d2=0, c1=c2=1, c3=0, r0=1 (a zero d-exponent
makes the corresponding power term 1).
"""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import BasicGenome, ExtendedGenome, Genome, sample_surface
from .voxel import VoxelGrid, Workspace, fill_interior, rasterize


class UnknownName(KeyError):
    """No builtin genome registered under that name."""


@dataclass(frozen=True)
class NamedGenome:
    name: str
    genome: Genome
    source: str


_EXT_NEUTRAL = dict(t1=0.0, t2=0.0, d1=0.0, d2=0.0, c1=1.0, c2=1.0,
                    c3=0.0, r0=1.0)

_BUILTINS = {
    "cube": NamedGenome(
        "cube",
        BasicGenome(m1=4, n11=10, n12=10, n13=10, m2=4, n21=10, n22=10, n23=10),
        "example shape (a)"),
    "star": NamedGenome(
        "star",
        BasicGenome(m1=6, n11=5, n12=10, n13=10, m2=4, n21=10, n22=10, n23=10),
        "example shape (b)"),
    "heart": NamedGenome(
        "heart",
        BasicGenome(m1=3, n11=1.5, n12=12, n13=3, m2=0, n21=3, n22=0, n23=0),
        "example shape (c)"),
    "shell": NamedGenome(
        "shell",
        ExtendedGenome(m1=3, n11=1.5, n12=12, n13=3, m2=0, n21=3, n22=0,
                       n23=0, **{**_EXT_NEUTRAL,
                                 "t2": 2.0, "d1": 1.0, "d2": 1.0, "c1": 5.0}),
        "example shape (d)"),
    "torus": NamedGenome(
        "torus",
        ExtendedGenome(m1=10, n11=10, n12=10, n13=10, m2=10, n21=10, n22=10,
                       n23=10, **{**_EXT_NEUTRAL, "t1": 2.0, "c3": 0.0}),
        "example shape (e)"),
    "mobius": NamedGenome(
        "mobius",
        ExtendedGenome(m1=3, n11=1.5, n12=12, n13=3, m2=0, n21=3, n22=0,
                       n23=0, **{**_EXT_NEUTRAL,
                                 "t1": 4.0, "t2": 0.0, "d1": 0.0, "d2": 0.0,
                                 "c1": 5.0, "c2": 0.3, "c3": 2.2}),
        "example shape (f)"),
    "vawt_star_seed": NamedGenome(
        "vawt_star_seed",
        BasicGenome(m1=6, n11=5, n12=30, n13=10, m2=4, n21=10, n22=10, n23=10),
        "basic turbine seed"),
    "vawt_extended_seed": NamedGenome(
        "vawt_extended_seed",
        ExtendedGenome(m1=0, n11=0, n12=0, n13=1, m2=0, n21=0, n22=0, n23=1,
                       t1=0, t2=6, d1=0.5, d2=0.7, c1=4, c2=1, c3=0.4, r0=50),
        "extended turbine seed"),
}

TARGET_NAMES = ("cube", "star", "heart")


def builtin_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def builtin(name: str) -> NamedGenome:
    """Look up a canonical genome by name."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise UnknownName(name) from None


def build_target(name: str, dims=(50, 50, 50),
                 res: tuple[int, int] = (256, 128)) -> VoxelGrid:
    """Solid voxelization of a builtin target shape, normalized to fill
    the grid.  Deterministic for a given name/dims/res."""
    if name not in TARGET_NAMES:
        raise UnknownName(f"{name} is not a target shape (use one of {TARGET_NAMES})")
    ws = Workspace.target_mode(dims)
    sample = sample_surface(builtin(name).genome, res=res)
    return fill_interior(rasterize(sample, ws, scale=None))
