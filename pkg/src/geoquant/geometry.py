"""Chart-level data for the four model geometries.

Every point is a complex chart coordinate ``w = u + i v``.  The complex
coordinate used in the holomorphic formulas is ``z = w`` on the sphere and
the hyperbolic surface, and ``z = w / sqrt(2)`` on the plane and the torus.
All functions are vectorised over arrays of points.

Symplectic forms in the chart, as densities with respect to ``du ^ dv``:

=============  =====================================
plane          ``1``
sphere         ``2 / (1 + |w|^2)^2``
torus          ``2 pi / Im(lambda)``
genus 2        ``1 / v^2``
=============  =====================================

The Liouville form is ``omega / 2 pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_hermite

from . import fuchsian
from .conventions import DEFAULT, Conventions
from .errors import DomainError, ParameterError

KINDS = ("plane", "sphere", "torus", "hyperbolic")
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Geometry:
    """One of the model phase spaces.

    ``modulus`` is the torus modulus ``lambda``; ``group`` is the enumerated
    Fuchsian group of the genus-2 surface.
    """

    kind: str
    name: str
    modulus: complex | None = None
    group: fuchsian.GroupEnumeration | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "torus":
            if self.modulus is None or complex(self.modulus).imag <= 0:
                raise ParameterError("torus modulus must have positive imaginary part")
        if self.kind == "hyperbolic" and self.group is None:
            raise ParameterError("hyperbolic geometry needs an enumerated group")

    @classmethod
    def plane(cls) -> "Geometry":
        return cls("plane", "plane")

    @classmethod
    def sphere(cls) -> "Geometry":
        return cls("sphere", "sphere")

    @classmethod
    def torus(cls, modulus: complex = 1j) -> "Geometry":
        return cls("torus", f"torus({complex(modulus)})", complex(modulus))

    @classmethod
    def genus2(cls, group: fuchsian.GroupEnumeration | None = None, *,
               max_word_length: int = 12, max_displacement: float | None = 9.0) -> "Geometry":
        if group is None:
            group = fuchsian.genus2_group(max_word_length, max_displacement)
        else:
            cyc = fuchsian.surface_relator(group.generators).matrix
            if np.max(np.abs(cyc - np.eye(2))) > 1e-9 or any(abs(g.trace) <= 2 for g in group.generators):
                raise ParameterError("group is not a hyperbolic surface group")
        return cls("hyperbolic", "genus2", None, group)

    @property
    def compact(self) -> bool:
        return self.kind != "plane"

    @property
    def basis_mode(self) -> bool:
        """True when H_k is handled through explicit basis sections."""
        return self.kind != "hyperbolic"

    @property
    def coordinate_scale(self) -> float:
        """Factor ``c`` with ``z = c * w``."""
        return 1.0 / SQRT2 if self.kind in ("plane", "torus") else 1.0

    @property
    def volume(self) -> float:
        """Total Liouville volume (``inf`` for the plane)."""
        if self.kind == "plane":
            return math.inf
        if self.kind == "hyperbolic":
            return 2.0  # Gauss-Bonnet: area 4 pi (g - 1) over 2 pi, g = 2
        return 1.0

    def dimension(self, k: int) -> int | None:
        """Riemann-Roch dimension of H_k; ``None`` for the plane."""
        check_level(self, k)
        return {"plane": None, "sphere": k + 1, "torus": k, "hyperbolic": 2 * k - 1}[self.kind]


def check_level(geom: Geometry, k: int) -> None:
    if int(k) != k or k < 1:
        raise ParameterError(f"level k must be a positive integer, got {k}")
    if geom.kind == "hyperbolic" and k < 2:
        raise ParameterError("genus-2 surface requires k >= 2")


def as_points(geom: Geometry, x) -> np.ndarray:
    """Validate chart points and return them as a complex array."""
    w = np.asarray(x, dtype=complex)
    if not np.all(np.isfinite(w)):
        raise DomainError("non-finite chart point")
    if geom.kind == "hyperbolic" and np.any(w.imag <= 0):
        raise DomainError("hyperbolic chart points need v > 0")
    return w


def holomorphic_coordinate(geom: Geometry, x) -> np.ndarray:
    return as_points(geom, x) * geom.coordinate_scale


def chart_point(geom: Geometry, z) -> np.ndarray:
    """Inverse of :func:`holomorphic_coordinate`."""
    return np.asarray(z, dtype=complex) / geom.coordinate_scale


def omega_density(geom: Geometry, x, conventions: Conventions = DEFAULT) -> np.ndarray:
    """Density of the symplectic form with respect to ``du ^ dv``."""
    w = as_points(geom, x)
    if geom.kind == "plane":
        return np.ones(w.shape)
    if geom.kind == "sphere":
        return 2.0 / (1.0 + np.abs(w) ** 2) ** 2
    if geom.kind == "torus":
        return np.full(w.shape, 2 * math.pi * conventions.torus_measure_scale / geom.modulus.imag)
    return 1.0 / w.imag ** 2


def liouville_density(geom: Geometry, x, conventions: Conventions = DEFAULT) -> np.ndarray:
    """Density of ``omega / 2 pi`` with respect to ``du ^ dv``."""
    return omega_density(geom, x, conventions) / (2 * math.pi)


def log_hermitian_weight(geom: Geometry, k: int, x, conventions: Conventions = DEFAULT) -> np.ndarray:
    w = as_points(geom, x)
    if geom.kind == "sphere":
        return -k * np.log1p(np.abs(w) ** 2)
    if geom.kind == "hyperbolic":
        return conventions.hyperbolic_weight_exponent * k * np.log(w.imag)
    return np.zeros(w.shape)


def hermitian_weight(geom: Geometry, k: int, x, conventions: Conventions = DEFAULT) -> np.ndarray:
    """Pointwise factor ``W`` with ``h(s1, s2) = W conj(s1~) s2~`` on level ``k``."""
    return np.exp(log_hermitian_weight(geom, k, x, conventions))


def symplectic_potential(geom: Geometry, x):
    """Coefficients ``(alpha, beta)`` of ``tau = alpha dz + beta dzbar``.

    ``z`` is the holomorphic coordinate of the geometry (see module notes).
    ``d tau = omega`` in every case.
    """
    z = holomorphic_coordinate(geom, x)
    if geom.kind == "plane":
        return -0.5j * np.conj(z), 0.5j * z
    if geom.kind == "sphere":
        return -1j * np.conj(z) / (1.0 + np.abs(z) ** 2), np.zeros(z.shape, dtype=complex)
    if geom.kind == "torus":
        lam2 = geom.modulus.imag
        return -1j * math.pi * np.conj(z) / lam2, 1j * math.pi * z / lam2
    raise NotImplementedError("no global potential is used on the genus-2 surface")


def potential_uv(geom: Geometry, x):
    """The potential as ``P du + Q dv`` (complex ``P, Q`` on the sphere)."""
    alpha, beta = symplectic_potential(geom, x)
    c = geom.coordinate_scale
    return c * (alpha + beta), 1j * c * (alpha - beta)


# -- scalar fields -------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """A real function on the chart with optional analytic derivatives.

    ``grad`` returns ``(f_u, f_v)`` and ``chart_laplacian`` returns
    ``f_uu + f_vv``; missing ones fall back to fourth-order central
    differences.
    """

    fn: Callable
    name: str = "f"
    grad: Callable | None = None
    chart_laplacian: Callable | None = None

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=complex)), dtype=float)

    def gradient(self, x, h: float = 1e-4):
        x = np.asarray(x, dtype=complex)
        if self.grad is not None:
            fu, fv = self.grad(x)
            return np.asarray(fu, dtype=float), np.asarray(fv, dtype=float)
        step = h * np.maximum(1.0, np.abs(x))
        return _d1(self, x, step), _d1(self, x, 1j * step)

    def flat_laplacian(self, x, h: float = 1e-3):
        x = np.asarray(x, dtype=complex)
        if self.chart_laplacian is not None:
            return np.asarray(self.chart_laplacian(x), dtype=float)
        step = h * np.maximum(1.0, np.abs(x))
        return (_d2(self, x, step) + _d2(self, x, 1j * step)) / step ** 2


def _d1(f, x, step):
    scale = np.abs(step)
    return (8 * (f(x + step) - f(x - step)) - (f(x + 2 * step) - f(x - 2 * step))) / (12 * scale)


def _d2(f, x, step):
    # fourth-order second difference, not yet divided by |step|^2
    return (-f(x + 2 * step) + 16 * f(x + step) - 30 * f(x) + 16 * f(x - step) - f(x - 2 * step)) / 12


def as_field(f) -> ScalarField:
    return f if isinstance(f, ScalarField) else ScalarField(f)


def metric_laplacian(geom: Geometry, f, x, conventions: Conventions = DEFAULT,
                     sign: int | None = None) -> np.ndarray:
    """Laplacian of ``f`` for the conformal metric ``g = omega(., J.)``.

    With ``omega = W du ^ dv`` the metric is ``W (du^2 + dv^2)`` and the
    result is ``sign * (f_uu + f_vv) / W``.
    """
    f = as_field(f)
    w = as_points(geom, x)
    s = conventions.laplacian_sign if sign is None else sign
    return s * f.flat_laplacian(w) / omega_density(geom, w, conventions)


def constant_field(c: float) -> ScalarField:
    return ScalarField(lambda w: np.full(np.shape(w), float(c)), f"const({c})",
                       grad=lambda w: (np.zeros(np.shape(w)), np.zeros(np.shape(w))),
                       chart_laplacian=lambda w: np.zeros(np.shape(w)))


# -- distances -------------------------------------------------------------------------

def reduce_point(geom: Geometry, x) -> np.ndarray:
    """Reduce torus points to the fundamental parallelogram, hyperbolic points
    to the Dirichlet domain; other geometries are returned unchanged."""
    w = as_points(geom, x)
    if geom.kind == "torus":
        lam = geom.modulus
        n = np.floor(w.imag / lam.imag)
        w = w - n * lam
        return w - np.floor(w.real - w.imag * lam.real / lam.imag)
    if geom.kind == "hyperbolic":
        return fuchsian.reduce_to_domain(w, geom.group)[0]
    return w


def geodesic_distance(geom: Geometry, x, y, *, reduce: bool = True) -> np.ndarray:
    """Distance for the metric ``g = omega(., J.)``.

    On the torus and the genus-2 surface the minimum over lattice/group images
    is taken unless ``reduce=False``, which returns the distance in the
    universal cover.
    """
    x = as_points(geom, x)
    y = as_points(geom, y)
    if geom.kind == "plane":
        return np.abs(x - y)
    if geom.kind == "sphere":
        return SQRT2 * np.arctan2(np.abs(x - y), np.abs(1.0 + np.conj(y) * x))
    if geom.kind == "torus":
        scale = math.sqrt(2 * math.pi * DEFAULT.torus_measure_scale / geom.modulus.imag)
        diff = x - y
        if not reduce:
            return scale * np.abs(diff)
        lam = geom.modulus
        diff = reduce_point(geom, diff)
        best = np.full(np.broadcast(x, y).shape, np.inf)
        for m in range(-2, 3):
            for n in range(-2, 3):
                best = np.minimum(best, np.abs(diff + m + n * lam))
        return scale * best
    if not reduce:
        return fuchsian.hyperbolic_distance(x, y)
    xb, yb = np.broadcast_arrays(x, y)
    xr = reduce_point(geom, xb.ravel())
    yr = reduce_point(geom, yb.ravel())
    direct = fuchsian.hyperbolic_distance(xr, yr)
    group = geom.group
    sel = group.displacements <= 2 * fuchsian.octagon_circumradius() + direct.max() + 1e-9
    ms = group.matrices[sel]
    a, b, c, d = (ms[:, i, j][:, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    gy = (a * yr[None, :] + b) / (c * yr[None, :] + d)
    out = fuchsian.hyperbolic_distance(xr[None, :], gy).min(axis=0)
    return out.reshape(xb.shape)


# -- quadrature ------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes (complex chart points) and weights for integration against
    the Liouville form.  Weights already contain the Liouville density."""

    geometry: str
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int
    estimated_error: float
    k: int | None = None

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ParameterError("quadrature weights must be positive")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values):
        """Weighted sum over the last axis (numpy's pairwise summation)."""
        return np.sum(np.asarray(values) * self.weights, axis=-1)


def _gauss_legendre(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _sphere_from_cos(t, phi):
    r = np.sqrt((1.0 - t) / (1.0 + t))
    return r * np.exp(1j * phi)


def build_quadrature(geom: Geometry, resolution: int, *, k: int = 1, center: complex = 0j,
                     method: str | None = None, conventions: Conventions = DEFAULT) -> QuadratureRule:
    """Deterministic tensor rule for the geometry.

    sphere
        Gauss-Legendre in ``cos(theta)`` (``resolution`` nodes) times a
        periodic trapezoid in azimuth (``2 * resolution`` nodes); exact for
        polynomials in the embedding coordinates of degree < ``resolution``.
    torus
        periodic midpoint grid of ``resolution^2`` nodes on the fundamental
        parallelogram.
    hyperbolic
        ``method="sectors"`` (default): Gauss-Legendre on the eight sectors of
        the octagon in polar coordinates about its centre.  ``method="grid"``:
        midpoint grid over a disc-model bounding box, rejection-filtered by
        :func:`geoquant.fuchsian.in_fundamental_domain`.
    plane
        Gauss-Hermite in each coordinate with the weight factor removed,
        scaled to the Gaussian width ``1/sqrt(k)`` and centred at ``center``.
    """
    if resolution < 2:
        raise ParameterError("quadrature resolution must be >= 2")
    if geom.kind == "sphere":
        t, wt = _gauss_legendre(resolution, -1.0, 1.0)
        nphi = 2 * resolution
        phi = 2 * math.pi * (np.arange(nphi) + 0.5) / nphi
        T, P = np.meshgrid(t, phi, indexing="ij")
        weights = np.repeat(wt / (2 * nphi), nphi)
        nodes = _sphere_from_cos(T, P).ravel()
    elif geom.kind == "torus":
        lam = geom.modulus
        s = (np.arange(resolution) + 0.5) / resolution
        S, T = np.meshgrid(s, s, indexing="ij")
        nodes = (S + T * lam).ravel()
        dens = conventions.torus_measure_scale / lam.imag
        weights = np.full(nodes.shape, dens * lam.imag / resolution ** 2)
    elif geom.kind == "hyperbolic":
        nodes, weights = _hyperbolic_rule(geom, resolution, method or "sectors")
    else:
        t, wt = roots_hermite(resolution)
        sigma = math.sqrt(2.0 / k)
        x = sigma * t
        wx = sigma * wt * np.exp(t ** 2)
        X, Y = np.meshgrid(x, x, indexing="ij")
        nodes = (complex(center) + X + 1j * Y).ravel()
        weights = np.outer(wx, wx).ravel() / (2 * math.pi)
    total = float(np.sum(weights))
    if geom.compact:
        err = abs(total - geom.volume)
    else:
        # probe: the normalised level-k Gaussian integrates to one
        probe = k / (2 * math.pi) * np.exp(-k * np.abs(nodes - center) ** 2 / 2) * 2 * math.pi
        err = abs(float(np.sum(weights * probe)) - 1.0)
    return QuadratureRule(geom.kind, nodes, weights, resolution, err, k)


def _hyperbolic_rule(geom: Geometry, resolution: int, method: str):
    r_in = fuchsian.octagon_inradius()
    if method == "sectors":
        n = max(2, resolution // 8)
        xs, ws = np.polynomial.legendre.leggauss(n)
        nodes, weights = [], []
        for m in range(8):
            axis = m * math.pi / 4
            phi = axis + xs * math.pi / 8
            wphi = ws * math.pi / 8
            # side m is the geodesic tanh(s) cos(phi - axis) = tanh(r_in)
            smax = np.arctanh(math.tanh(r_in) / np.cos(phi - axis))
            for p, wp, sm in zip(phi, wphi, smax):
                # area element sinh(s) ds dphi = d(cosh s) dphi
                c, wc = _gauss_legendre(n, 1.0, math.cosh(sm))
                s = np.arccosh(c)
                nodes.append(_from_disc(np.tanh(s / 2) * np.exp(1j * p)))
                weights.append(wp * wc / (2 * math.pi))
        return np.concatenate(nodes), np.concatenate(weights)
    if method == "grid":
        rho = math.tanh(fuchsian.octagon_circumradius() / 2)
        g = (np.arange(resolution) + 0.5) / resolution * 2 * rho - rho
        X, Y = np.meshgrid(g, g, indexing="ij")
        zeta = (X + 1j * Y).ravel()
        zeta = zeta[np.abs(zeta) < rho]
        cell = (2 * rho / resolution) ** 2
        z = _from_disc(zeta)
        keep = fuchsian.in_fundamental_domain(z, geom.group)
        w = cell * 4.0 / (1.0 - np.abs(zeta) ** 2) ** 2 / (2 * math.pi)
        return z[keep], w[keep]
    raise ParameterError(f"unknown hyperbolic quadrature method {method!r}")


def _from_disc(zeta):
    return 1j * (1 + zeta) / (1 - zeta)


def ball_quadrature(geom: Geometry, center: complex, radius: float, resolution: int,
                    conventions: Conventions = DEFAULT) -> QuadratureRule:
    """Polar rule for the open geodesic ball ``B(center, radius)``.

    Nodes are geodesic polar coordinates about ``center``; the ball boundary is
    a coordinate line, so smooth integrands converge spectrally.  On compact
    geometries ``radius`` should stay below the injectivity radius (the whole
    sphere is returned once the ball covers it).
    """
    if resolution < 2:
        raise ParameterError("quadrature resolution must be >= 2")
    if radius <= 0:
        raise ParameterError("ball radius must be positive")
    c0 = complex(as_points(geom, center))
    nphi = 2 * resolution
    phi = 2 * math.pi * (np.arange(nphi) + 0.5) / nphi
    dphi = 2 * math.pi / nphi
    if geom.kind in ("plane", "torus"):
        scale = 1.0
        if geom.kind == "torus":
            scale = math.sqrt(2 * math.pi * conventions.torus_measure_scale / geom.modulus.imag)
        rho, wr = _gauss_legendre(resolution, 0.0, radius / scale)
        R, P = np.meshgrid(rho, phi, indexing="ij")
        nodes = (c0 + R * np.exp(1j * P)).ravel()
        weights = (np.outer(wr * rho, np.full(nphi, dphi)).ravel()
                   * liouville_density(geom, nodes, conventions))
    elif geom.kind == "sphere":
        t_min = math.cos(SQRT2 * radius) if SQRT2 * radius < math.pi else -1.0
        t, wt = _gauss_legendre(resolution, t_min, 1.0)
        T, P = np.meshgrid(t, phi, indexing="ij")
        local = _sphere_from_cos(T, P).ravel()
        # SU(2) rotation taking 0 to the centre preserves the Liouville form
        nodes = (local + c0) / (1.0 - np.conj(c0) * local)
        weights = np.repeat(wt * dphi / (4 * math.pi), nphi)
    else:
        c, wc = _gauss_legendre(resolution, 1.0, math.cosh(radius))
        s = np.arccosh(c)
        S, P = np.meshgrid(s, phi, indexing="ij")
        local = _from_disc(np.tanh(S / 2) * np.exp(1j * P)).ravel()
        nodes = c0.real + c0.imag * local
        weights = np.repeat(wc * dphi / (2 * math.pi), nphi)
    return QuadratureRule(geom.kind, nodes, weights, resolution, 0.0)
