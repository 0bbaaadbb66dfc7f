"""Gielis superformula evaluation and 3D supershape surface sampling.

A 2D supershape is a radius function r(phi) controlled by a symmetry
number m and three shape coefficients n1..n3.  Two such radius
functions combine into a 3D surface either through the spherical
product (longitude/latitude) or through the extended toroidal mapping,
which adds twist, offset, and scale parameters and is evaluated over
the unit square.

All evaluators are total: degenerate parameter combinations (zero
exponents, vanishing bases) are resolved by a fixed clamping policy so
that every genome, including ones with n1=0, yields finite coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

# Totality policy: smallest magnitude allowed for the outer exponent's
# denominator and for the bracketed base before exponentiation.
N1_EPS = 1e-9
BASE_EPS = 1e-12

BASIC_GENE_NAMES = ("m1", "n11", "n12", "n13", "m2", "n21", "n22", "n23")
EXTENDED_GENE_NAMES = BASIC_GENE_NAMES + (
    "t1", "t2", "d1", "d2", "c1", "c2", "c3", "r0",
)


@dataclass(frozen=True)
class BasicParams:
    """One 2D radius function: sizes a, b (fixed to 1 in evolutionary
    use), symmetry number m, and shape coefficients n1..n3."""

    a: float
    b: float
    m: float
    n1: float
    n2: float
    n3: float


@dataclass(frozen=True)
class BasicGenome:
    """Eight reals: two shape-coefficient quadruples, a=b=1 implied."""

    m1: float
    n11: float
    n12: float
    n13: float
    m2: float
    n21: float
    n22: float
    n23: float

    def __post_init__(self):
        for name in BASIC_GENE_NAMES:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"gene {name} is not finite")

    @property
    def longitude_params(self) -> BasicParams:
        return BasicParams(1.0, 1.0, self.m1, self.n11, self.n12, self.n13)

    @property
    def latitude_params(self) -> BasicParams:
        return BasicParams(1.0, 1.0, self.m2, self.n21, self.n22, self.n23)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in BASIC_GENE_NAMES])

    @classmethod
    def from_array(cls, values) -> "BasicGenome":
        values = np.asarray(values, dtype=float)
        if values.shape != (8,):
            raise ValueError(f"basic genome needs 8 genes, got {values.shape}")
        return cls(*(float(v) for v in values))

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in BASIC_GENE_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "BasicGenome":
        return cls(**{n: float(d[n]) for n in BASIC_GENE_NAMES})


@dataclass(frozen=True)
class ExtendedGenome:
    """Sixteen reals: the two quadruples plus toroidal/twist/offset
    deformation parameters and the overall size r0 (voxel units)."""

    m1: float
    n11: float
    n12: float
    n13: float
    m2: float
    n21: float
    n22: float
    n23: float
    t1: float
    t2: float
    d1: float
    d2: float
    c1: float
    c2: float
    c3: float
    r0: float

    def __post_init__(self):
        for name in EXTENDED_GENE_NAMES:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"gene {name} is not finite")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")

    @property
    def longitude_params(self) -> BasicParams:
        return BasicParams(1.0, 1.0, self.m1, self.n11, self.n12, self.n13)

    @property
    def latitude_params(self) -> BasicParams:
        return BasicParams(1.0, 1.0, self.m2, self.n21, self.n22, self.n23)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in EXTENDED_GENE_NAMES])

    @classmethod
    def from_array(cls, values) -> "ExtendedGenome":
        values = np.asarray(values, dtype=float)
        if values.shape != (16,):
            raise ValueError(f"extended genome needs 16 genes, got {values.shape}")
        return cls(*(float(v) for v in values))

    def to_dict(self) -> dict:
        return {n: getattr(self, n) for n in EXTENDED_GENE_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "ExtendedGenome":
        return cls(**{n: float(d[n]) for n in EXTENDED_GENE_NAMES})


Genome = BasicGenome | ExtendedGenome


def genome_from_dict(d: dict) -> Genome:
    if any(k in d for k in EXTENDED_GENE_NAMES[8:]):
        return ExtendedGenome.from_dict(d)
    return BasicGenome.from_dict(d)


def genome_from_array(values) -> Genome:
    values = np.asarray(values, dtype=float)
    if values.shape == (8,):
        return BasicGenome.from_array(values)
    if values.shape == (16,):
        return ExtendedGenome.from_array(values)
    raise ValueError(f"genome needs 8 or 16 genes, got {values.shape}")


@dataclass(frozen=True)
class SurfaceSample:
    """Sampled surface points on a (longitude, latitude) lattice.

    points has shape (samples_theta, samples_phi, 3); lattice adjacency
    corresponds to surface adjacency.
    """

    points: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 3 or self.points.shape[2] != 3:
            raise ValueError("points must have shape (nt, np, 3)")
        if not np.isfinite(self.points).all():
            raise ValueError("sample contains non-finite coordinates")

    @property
    def resolution(self) -> tuple[int, int]:
        return self.points.shape[0], self.points.shape[1]


def _clamped_n1(n1: float) -> float:
    if n1 == 0.0:
        return N1_EPS
    return math.copysign(max(abs(n1), N1_EPS), n1)


def superformula_r(phi, p: BasicParams):
    """Radius of the 2D supershape at angle phi (radians).

    Total: the outer exponent denominator n1 is clamped away from zero,
    the bracketed base is clamped above BASE_EPS, 0**0 evaluates to 1,
    and any remaining non-finite result becomes 0.  Accepts scalar or
    array phi.
    """
    ang = 0.25 * p.m * np.asarray(phi, dtype=float)
    n1 = _clamped_n1(p.n1)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        cos_term = np.abs(np.cos(ang) / p.a) ** p.n2
        sin_term = np.abs(np.sin(ang) / p.b) ** p.n3
        base = np.maximum(cos_term + sin_term, BASE_EPS)
        r = base ** (-1.0 / n1)
    r = np.where(np.isfinite(r), r, 0.0)
    return float(r) if np.ndim(phi) == 0 else r


def spherical_product(theta, varphi, p1: BasicParams, p2: BasicParams):
    """3D point from two radius functions: longitude theta in [-pi, pi],
    latitude varphi in [-pi/2, pi/2].  Accepts scalars or arrays."""
    r1 = superformula_r(theta, p1)
    r2 = superformula_r(varphi, p2)
    x = r1 * np.cos(theta) * r2 * np.cos(varphi)
    y = r1 * np.sin(theta) * r2 * np.cos(varphi)
    z = r2 * np.sin(varphi)
    if np.ndim(x) == 0:
        return float(x), float(y), float(z)
    return x, y, np.broadcast_to(z, x.shape)


def signed_pow(base, exp):
    """sign(base) * |base|**exp, with 0**0 = 1.

    Continuous-in-magnitude extension of fractional powers to negative
    bases; used for the deformation power terms.
    """
    b = np.asarray(base, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        mag = np.abs(b) ** exp
    out = np.where(b < 0, -mag, mag)
    return float(out) if np.ndim(base) == 0 and np.ndim(exp) == 0 else out


def extended_point(u, v, g: ExtendedGenome, twist_param: str = "c2"):
    """Extended supershape point for lattice coordinates u, v in [0, 1].

    Follows the deformation recipe line by line in its published order:
    the offset/power terms read the raw u before the angular remapping
    overwrites it.  c3 is carried but unused unless twist_param="c3",
    a non-canonical interpretation that substitutes c3 for c2 in the
    twist line only.  Accepts scalar or array u, v (same shape).
    Non-finite results are replaced with 0.
    """
    if twist_param not in ("c2", "c3"):
        raise ValueError("twist_param must be 'c2' or 'c3'")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    scalar = u.ndim == 0 and v.ndim == 0

    twist = g.c2 if twist_param == "c2" else g.c3
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        t2c = (g.r0 * signed_pow(g.c2, g.d2) * g.t2 * g.c1) / 2.0
        t2 = g.t2 * g.c1 * u
        d1 = signed_pow(u * g.c1, g.d1)
        d2 = signed_pow(u * g.c2, g.d2)
        theta = ((2.0 * np.pi) * u - np.pi) * g.c1
        phi = (np.pi * v - np.pi / 2.0) * g.c2
        phi2 = phi + twist * theta
        r1 = superformula_r(theta, g.longitude_params)
        r2 = superformula_r(phi, g.latitude_params)
        ring = g.t1 + d1 * r2 * np.cos(phi2)
        x = g.r0 * r1 * ring * np.cos(phi)
        y = g.r0 * r1 * ring * np.sin(phi)
        z = g.r0 * d2 * (r2 * np.sin(phi2) - t2) + t2c
    x = np.where(np.isfinite(x), x, 0.0)
    y = np.where(np.isfinite(y), y, 0.0)
    z = np.where(np.isfinite(z), z, 0.0)
    if scalar:
        return float(x), float(y), float(z)
    return x, y, z


def sample_surface(g: Genome, res: tuple[int, int] = (512, 256),
                   twist_param: str = "c2") -> SurfaceSample:
    """Sample the supershape on a uniform lattice.

    Basic genomes sample the spherical product over
    [-pi, pi] x [-pi/2, pi/2]; extended genomes sample the deformation
    mapping over [0, 1]^2.
    """
    nt, nph = int(res[0]), int(res[1])
    if nt < 8 or nph < 8:
        raise ValueError(f"resolution must be at least (8, 8), got {res}")
    if isinstance(g, BasicGenome):
        theta = np.linspace(-np.pi, np.pi, nt)
        varphi = np.linspace(-np.pi / 2.0, np.pi / 2.0, nph)
        r1 = superformula_r(theta, g.longitude_params)
        r2 = superformula_r(varphi, g.latitude_params)
        x = (r1 * np.cos(theta))[:, None] * (r2 * np.cos(varphi))[None, :]
        y = (r1 * np.sin(theta))[:, None] * (r2 * np.cos(varphi))[None, :]
        z = np.broadcast_to((r2 * np.sin(varphi))[None, :], x.shape)
        points = np.stack([x, y, z], axis=-1)
    elif isinstance(g, ExtendedGenome):
        u = np.linspace(0.0, 1.0, nt)
        v = np.linspace(0.0, 1.0, nph)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        x, y, z = extended_point(uu, vv, g, twist_param=twist_param)
        points = np.stack([x, y, z], axis=-1)
    else:
        raise TypeError(f"unsupported genome type: {type(g).__name__}")
    points = np.where(np.isfinite(points), points, 0.0)
    return SurfaceSample(points=np.ascontiguousarray(points))
