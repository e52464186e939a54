"""Named smooth observables used by the verification suites and the CLI."""
from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .geometry import ScalarField


def sphere_height() -> ScalarField:
    """``|z|^2 / (1 + |z|^2)``: rotation invariant, equals (1 - cos theta)/2."""
    def fn(w):
        r2 = np.abs(w) ** 2
        return r2 / (1 + r2)

    def grad(w):
        den = (1 + np.abs(w) ** 2) ** 2
        return 2 * w.real / den, 2 * w.imag / den

    def lap(w):
        r2 = np.abs(w) ** 2
        return 4 * (1 - r2) / (1 + r2) ** 3

    return ScalarField(fn, "height", grad, lap)


def sphere_x1() -> ScalarField:
    """``Re z / (1 + |z|^2)``: a first spherical harmonic."""
    def fn(w):
        return w.real / (1 + np.abs(w) ** 2)

    def grad(w):
        u, v = w.real, w.imag
        den = (1 + u * u + v * v) ** 2
        return (1 - u * u + v * v) / den, -2 * u * v / den

    def lap(w):
        r2 = np.abs(w) ** 2
        return -8 * w.real / (1 + r2) ** 3

    return ScalarField(fn, "x1", grad, lap)


def sphere_quadrupole() -> ScalarField:
    """``(Re z)^2 / (1 + |z|^2)^2``: a non-symmetric degree-two observable."""
    return ScalarField(lambda w: w.real ** 2 / (1 + np.abs(w) ** 2) ** 2, "quad")


def torus_cos(modes: int = 1, modulus: complex = 1j) -> ScalarField:
    """``cos(2 pi m s)`` where ``w = s + t lambda`` are lattice coordinates."""
    a = 2 * math.pi * modes
    lam = complex(modulus)
    skew = lam.real / lam.imag

    def s_of(w):
        return w.real - skew * w.imag

    return ScalarField(lambda w: np.cos(a * s_of(w)), f"cos{modes}",
                       lambda w: (-a * np.sin(a * s_of(w)), a * skew * np.sin(a * s_of(w))),
                       lambda w: -a * a * (1 + skew * skew) * np.cos(a * s_of(w)))


def gaussian(center: complex = 0j, width: float = 1.0) -> ScalarField:
    """``exp(-a |w - c|^2)`` with ``a = width``."""
    c, a = complex(center), float(width)
    def fn(w):
        return np.exp(-a * np.abs(w - c) ** 2)

    def grad(w):
        e = fn(w)
        return -2 * a * (w.real - c.real) * e, -2 * a * (w.imag - c.imag) * e

    def lap(w):
        r2 = np.abs(w - c) ** 2
        return (4 * a * a * r2 - 4 * a) * fn(w)

    return ScalarField(fn, "gauss", grad, lap)


def hyperbolic_bump() -> ScalarField:
    """``1 / cosh(d(i, z))``, a smooth bump around the domain centre."""
    def fn(w):
        return 2 * w.imag / (1 + np.abs(w) ** 2)
    return ScalarField(fn, "bump")


def _registry(geom):
    kind = geom.kind
    if kind == "sphere":
        return {"height": sphere_height, "x1": sphere_x1, "quad": sphere_quadrupole}
    if kind == "torus":
        return {"cos1": lambda: torus_cos(1, geom.modulus), "cos2": lambda: torus_cos(2, geom.modulus)}
    if kind == "plane":
        return {"gauss": lambda: gaussian(0j, 0.5)}
    return {"bump": hyperbolic_bump}


def names(geom) -> list[str]:
    return sorted(_registry(geom))


def get(geom, name: str) -> ScalarField:
    """Observable ``name`` for the geometry ``geom``."""
    table = _registry(geom)
    if name not in table:
        raise ParameterError(f"unknown observable {name!r} for {geom.kind}; valid: {sorted(table)}")
    return table[name]()
