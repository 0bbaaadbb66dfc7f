"""Independent scalar oracles for the geometry tests.

These re-implement the radius formula, the spherical product, and the
extended evaluation procedure line by line with plain ``math`` calls,
deliberately sharing no code with the library's vectorized
implementations.  Golden values in the tests were produced by these
oracles and frozen.
"""

import math


def oracle_superformula(phi, a, b, m, n1, n2, n3):
    """Radius formula without any totality policy; valid only away
    from degenerate parameter combinations."""
    ct = abs(math.cos(m * phi / 4.0) / a) ** n2
    st = abs(math.sin(m * phi / 4.0) / b) ** n3
    return (ct + st) ** (-1.0 / n1)


def oracle_spherical(theta, varphi, quad1, quad2):
    r1 = oracle_superformula(theta, 1, 1, *quad1)
    r2 = oracle_superformula(varphi, 1, 1, *quad2)
    return (r1 * math.cos(theta) * r2 * math.cos(varphi),
            r1 * math.sin(theta) * r2 * math.cos(varphi),
            r2 * math.sin(varphi))


def _spow(base, exp):
    if base == 0 and exp == 0:
        return 1.0
    sign = -1.0 if base < 0 else 1.0
    return sign * abs(base) ** exp


def _sf_total(phi, m, n1, n2, n3):
    def term(val, expo):
        if val == 0 and expo == 0:
            return 1.0
        try:
            return val ** expo
        except (OverflowError, ZeroDivisionError):
            return math.inf
    ct = term(abs(math.cos(m * phi / 4.0)), n2)
    st = term(abs(math.sin(m * phi / 4.0)), n3)
    n1c = math.copysign(max(abs(n1), 1e-9), n1) if n1 != 0 else 1e-9
    base = max(ct + st, 1e-12)
    try:
        r = base ** (-1.0 / n1c)
    except OverflowError:
        r = math.inf
    return r if math.isfinite(r) else 0.0


def oracle_extended(u, v, g):
    """Extended evaluation, one printed line at a time.  g is a dict of
    the 16 gene values."""
    t2c = (g["r0"] * _spow(g["c2"], g["d2"]) * g["t2"] * g["c1"]) / 2.0
    t2 = g["t2"] * g["c1"] * u
    d1 = _spow(u * g["c1"], g["d1"])
    d2 = _spow(u * g["c2"], g["d2"])
    theta = ((math.pi * 2.0) * u - math.pi) * g["c1"]
    phi = ((math.pi * v) - (math.pi / 2.0)) * g["c2"]
    phi2 = phi + (g["c2"] * theta)
    r1 = _sf_total(theta, g["m1"], g["n11"], g["n12"], g["n13"])
    r2 = _sf_total(phi, g["m2"], g["n21"], g["n22"], g["n23"])
    x = g["r0"] * r1 * (g["t1"] + d1 * r2 * math.cos(phi2)) * math.cos(phi)
    y = g["r0"] * r1 * (g["t1"] + d1 * r2 * math.cos(phi2)) * math.sin(phi)
    z = g["r0"] * d2 * (r2 * math.sin(phi2) - t2) + t2c
    return tuple(c if math.isfinite(c) else 0.0 for c in (x, y, z))
