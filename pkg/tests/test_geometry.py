"""Geometry invariants, closed forms, and golden traces against the
independent scalar oracles."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from supershape import geometry as G
from supershape.targets import builtin

from oracles import oracle_extended, oracle_spherical, oracle_superformula

UNIT_CIRCLE = G.BasicParams(1, 1, 4, 2, 2, 2)


class TestSuperformula:
    def test_pythagorean_identity(self, rng):
        # m=4, n=2 reduces the base to cos^2 + sin^2 = 1 for every phi.
        phis = rng.uniform(-4 * np.pi, 4 * np.pi, 1000)
        r = G.superformula_r(phis, UNIT_CIRCLE)
        npt.assert_allclose(r, 1.0, atol=1e-12)

    def test_phi_zero_identity(self, rng):
        for _ in range(50):
            m, n1, n2 = rng.uniform(0.5, 40, 3)[:3]
            n3 = rng.uniform(0.5, 40)
            p = G.BasicParams(1, 1, m, n1, n2, n3)
            assert G.superformula_r(0.0, p) == pytest.approx(1.0, abs=1e-12)

    def test_phi_zero_high_exponents(self):
        p = G.BasicParams(1, 1, 7.3, 10, 10, 10)
        assert G.superformula_r(0.0, p) == pytest.approx(1.0, abs=1e-12)

    def test_square_corner_closed_form(self):
        # At phi=pi/4 with m=4 and n1=n2=n3=n the base collapses to
        # 2^(1-n/2), so r = 2^(1/2 - 1/n).
        for n in (2.0, 4.0, 10.0, 25.0):
            p = G.BasicParams(1, 1, 4, n, n, n)
            expected = 2.0 ** (0.5 - 1.0 / n)
            assert G.superformula_r(np.pi / 4, p) == pytest.approx(expected, abs=1e-9)
        assert G.superformula_r(np.pi / 4, G.BasicParams(1, 1, 4, 10, 10, 10)) \
            == pytest.approx(1.319508, abs=1e-6)

    def test_period_symmetry(self, rng):
        for _ in range(100):
            m = rng.uniform(0.5, 50)
            p = G.BasicParams(1, 1, m, *rng.uniform(0.5, 30, 3))
            phi = rng.uniform(-np.pi, np.pi)
            r0 = G.superformula_r(phi, p)
            r1 = G.superformula_r(phi + 8 * np.pi / m, p)
            assert r1 == pytest.approx(r0, abs=1e-9, rel=1e-9)

    def test_matches_oracle_on_regular_params(self, rng):
        for _ in range(200):
            m = rng.uniform(0, 50)
            n1, n2, n3 = rng.uniform(0.5, 45, 3)
            phi = rng.uniform(-np.pi, np.pi)
            expected = oracle_superformula(phi, 1, 1, m, n1, n2, n3)
            if not math.isfinite(expected):
                continue
            assert G.superformula_r(phi, G.BasicParams(1, 1, m, n1, n2, n3)) \
                == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_total_on_degenerate_params(self, rng):
        # n1=0 and zero shape exponents appear in published genomes;
        # the policy must keep every output finite and non-negative.
        nasty = [
            G.BasicParams(1, 1, 0, 0, 0, 1),
            G.BasicParams(1, 1, 3, 0, 0, 0),
            G.BasicParams(1, 1, 5, -2, -3, -4),
            G.BasicParams(1, 1, 50, 1e-12, 40, 40),
            G.BasicParams(1, 1, 7, -1e-15, 0.0, 30),
        ]
        phis = np.linspace(-np.pi, np.pi, 101)
        for p in nasty:
            r = G.superformula_r(phis, p)
            assert np.isfinite(r).all()
            assert (r >= 0).all()

    def test_scalar_and_array_agree(self):
        p = G.BasicParams(1, 1, 6, 5, 10, 10)
        phis = np.linspace(-2, 2, 7)
        vec = G.superformula_r(phis, p)
        scalars = [G.superformula_r(float(phi), p) for phi in phis]
        npt.assert_allclose(vec, scalars, rtol=0, atol=0)


class TestSphericalProduct:
    def test_axis_points(self):
        x, y, z = G.spherical_product(0.0, 0.0, UNIT_CIRCLE, UNIT_CIRCLE)
        npt.assert_allclose((x, y, z), (1.0, 0.0, 0.0), atol=1e-15)
        x, y, z = G.spherical_product(0.3, np.pi / 2, UNIT_CIRCLE, UNIT_CIRCLE)
        npt.assert_allclose((x, y, z), (0.0, 0.0, 1.0), atol=1e-15)

    def test_golden_cube_corner(self):
        # Frozen from the independent scalar oracle.
        p = G.BasicParams(1, 1, 4, 10, 10, 10)
        x, y, z = G.spherical_product(np.pi / 4, 0.0, p, p)
        npt.assert_allclose(
            (x, y, z),
            (0.9330329915368074, 0.9330329915368073, 0.0), atol=1e-9)

    def test_against_oracle(self, rng):
        for _ in range(100):
            q1 = tuple(rng.uniform(0.5, 30, 4))
            q2 = tuple(rng.uniform(0.5, 30, 4))
            theta = rng.uniform(-np.pi, np.pi)
            varphi = rng.uniform(-np.pi / 2, np.pi / 2)
            expected = oracle_spherical(theta, varphi, q1, q2)
            got = G.spherical_product(theta, varphi,
                                      G.BasicParams(1, 1, *q1),
                                      G.BasicParams(1, 1, *q2))
            npt.assert_allclose(got, expected, rtol=1e-12, atol=1e-12)

    def test_z_ignores_longitude_params(self, rng):
        # The z coordinate carries no longitude term: perturbing the
        # first parameter set must leave it bit-identical.
        p2 = G.BasicParams(1, 1, 5, 3, 7, 11)
        theta, varphi = 0.7, -0.4
        results = set()
        for _ in range(20):
            p1 = G.BasicParams(1, 1, *rng.uniform(0.5, 30, 4))
            results.add(G.spherical_product(theta, varphi, p1, p2)[2])
        assert len(results) == 1


TORUS = builtin("torus").genome
FIG_SEED = builtin("vawt_extended_seed").genome


class TestExtendedPoint:
    def test_torus_golden_trace(self):
        # Frozen from a line-by-line hand execution of the procedure.
        npt.assert_allclose(G.extended_point(0.5, 0.5, TORUS),
                            (3.0, 0.0, 0.0), atol=1e-9)
        npt.assert_allclose(
            G.extended_point(0.25, 0.75, TORUS),
            (2.5801679021688324, 2.580167902168832, -0.7653554864324928),
            atol=1e-9)

    def test_extended_seed_golden_trace(self):
        npt.assert_allclose(
            G.extended_point(0.5, 0.5, FIG_SEED),
            (70.71067811865476, 0.0, 230.6566759965251), atol=1e-9)
        npt.assert_allclose(
            G.extended_point(0.2, 0.9, FIG_SEED),
            (13.819660112501053, 42.532540417602, 522.2084833587473),
            atol=1e-9)

    def test_against_oracle_random(self, rng):
        for _ in range(200):
            g = G.ExtendedGenome(
                m1=rng.uniform(0, 20), n11=rng.uniform(0, 20),
                n12=rng.uniform(0, 20), n13=rng.uniform(0.1, 20),
                m2=rng.uniform(0, 20), n21=rng.uniform(0, 20),
                n22=rng.uniform(0, 20), n23=rng.uniform(0.1, 20),
                t1=rng.uniform(-5, 5), t2=rng.uniform(-5, 5),
                d1=rng.uniform(-2, 2), d2=rng.uniform(-2, 2),
                c1=rng.uniform(-5, 5), c2=rng.uniform(-5, 5),
                c3=rng.uniform(-5, 5), r0=rng.uniform(0.1, 60))
            u, v = rng.uniform(0, 1, 2)
            expected = oracle_extended(u, v, g.to_dict())
            got = G.extended_point(u, v, g)
            npt.assert_allclose(got, expected, rtol=1e-9, atol=1e-9)

    def test_deterministic(self):
        a = G.extended_point(0.37, 0.81, FIG_SEED)
        b = G.extended_point(0.37, 0.81, FIG_SEED)
        assert a == b

    def test_r0_linearity_with_zero_twist_offset(self):
        # With t2=0 both the z offset and subtraction vanish, so every
        # coordinate is exactly linear in r0.
        base = dict(FIG_SEED.to_dict(), t2=0.0)
        g1 = G.ExtendedGenome.from_dict(dict(base, r0=25.0))
        g2 = G.ExtendedGenome.from_dict(dict(base, r0=50.0))
        for u, v in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.7), (0.33, 0.91)]:
            p1 = np.array(G.extended_point(u, v, g1))
            p2 = np.array(G.extended_point(u, v, g2))
            npt.assert_allclose(p2, 2.0 * p1, rtol=1e-12, atol=1e-12)

    def test_twist_param_flag(self):
        # The non-canonical interpretation substitutes c3 for c2 in the
        # twist line only; with c2 != c3 the outputs must differ.
        canonical = G.extended_point(0.3, 0.6, FIG_SEED)
        variant = G.extended_point(0.3, 0.6, FIG_SEED, twist_param="c3")
        assert canonical != variant
        with pytest.raises(ValueError):
            G.extended_point(0.3, 0.6, FIG_SEED, twist_param="c1")

    def test_c3_unused_by_default(self):
        g1 = G.ExtendedGenome.from_dict(dict(FIG_SEED.to_dict(), c3=0.0))
        g2 = G.ExtendedGenome.from_dict(dict(FIG_SEED.to_dict(), c3=9.9))
        assert G.extended_point(0.3, 0.6, g1) == G.extended_point(0.3, 0.6, g2)


class TestSampleSurface:
    def test_unit_sphere(self):
        g = G.BasicGenome(4, 2, 2, 2, 4, 2, 2, 2)
        sample = G.sample_surface(g, (64, 33))
        d = np.linalg.norm(sample.points.reshape(-1, 3), axis=1)
        npt.assert_allclose(d, 1.0, atol=1e-9)

    def test_minimum_resolution(self):
        g = G.BasicGenome(4, 2, 2, 2, 4, 2, 2, 2)
        sample = G.sample_surface(g, (8, 8))
        assert sample.points.shape == (8, 8, 3)
        assert np.isfinite(sample.points).all()
        with pytest.raises(ValueError):
            G.sample_surface(g, (7, 8))

    def test_resolution_recorded(self):
        sample = G.sample_surface(TORUS, (16, 12))
        assert sample.resolution == (16, 12)

    def test_cube_extent_matches_oracle(self):
        # Largest coordinate of the cube shape pinned by scanning the
        # independent oracle over the same lattice.
        g = builtin("cube").genome
        sample = G.sample_surface(g, (256, 128))
        got = np.abs(sample.points).max()
        best = 0.0
        for theta in np.linspace(-np.pi, np.pi, 256):
            for varphi in (-np.pi / 2, -np.pi / 4, 0.0, np.pi / 4, np.pi / 2):
                q = (4, 10, 10, 10)
                best = max(best, max(abs(c) for c in
                                     oracle_spherical(theta, varphi, q, q)))
        assert got == pytest.approx(best, rel=1e-9)
        assert got == pytest.approx(1.0, abs=1e-9)  # poles sit at |z| = 1

    def test_matches_pointwise_evaluators(self):
        g = builtin("star").genome
        sample = G.sample_surface(g, (16, 9))
        thetas = np.linspace(-np.pi, np.pi, 16)
        varphis = np.linspace(-np.pi / 2, np.pi / 2, 9)
        for i in (0, 5, 15):
            for j in (0, 4, 8):
                expected = G.spherical_product(
                    thetas[i], varphis[j], g.longitude_params, g.latitude_params)
                npt.assert_allclose(sample.points[i, j], expected,
                                    rtol=1e-12, atol=1e-12)

    def test_extended_lattice_matches_extended_point(self):
        sample = G.sample_surface(FIG_SEED, (16, 9))
        us = np.linspace(0, 1, 16)
        vs = np.linspace(0, 1, 9)
        for i in (0, 7, 15):
            for j in (0, 3, 8):
                expected = G.extended_point(us[i], vs[j], FIG_SEED)
                npt.assert_allclose(sample.points[i, j], expected,
                                    rtol=1e-12, atol=1e-12)

    def test_seed_surface_statistics(self):
        # The extended seed spans all eight octants and is asymmetric
        # under a 180-degree rotation about z.
        sample = G.sample_surface(FIG_SEED, (128, 64))
        pts = sample.points.reshape(-1, 3)
        assert (pts.min(axis=0) < 0).all() and (pts.max(axis=0) > 0).all()
        rotated = pts * np.array([-1.0, -1.0, 1.0])
        spread = np.abs(np.sort(rotated[:, 0]) - np.sort(pts[:, 0])).max()
        assert spread > 1.0

    def test_all_finite_for_degenerate_genomes(self, rng):
        for _ in range(20):
            g = G.BasicGenome.from_array(rng.uniform(0, 50, 8))
            assert np.isfinite(G.sample_surface(g, (32, 16)).points).all()


class TestGenomeTypes:
    def test_roundtrip_dict_array(self):
        g = builtin("heart").genome
        assert G.BasicGenome.from_dict(g.to_dict()) == g
        assert G.BasicGenome.from_array(g.as_array()) == g
        e = FIG_SEED
        assert G.ExtendedGenome.from_dict(e.to_dict()) == e
        assert G.genome_from_array(e.as_array()) == e

    def test_genome_from_dict_dispatch(self):
        assert isinstance(G.genome_from_dict(builtin("cube").genome.to_dict()),
                          G.BasicGenome)
        assert isinstance(G.genome_from_dict(FIG_SEED.to_dict()),
                          G.ExtendedGenome)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            G.BasicGenome(1, 2, 3, float("nan"), 5, 6, 7, 8)
        with pytest.raises(ValueError):
            G.ExtendedGenome.from_array(np.r_[np.ones(15), 0.0])  # r0 = 0
        with pytest.raises(ValueError):
            G.genome_from_array(np.ones(9))
