"""Quantum Hilbert spaces H_k: basis sections, Gram matrices, orthonormalisation.

Sections are handled through their values in a fixed local frame (the
"trivialised" values ``s~``) together with the pointwise Hermitian weight
``W`` of that frame, so that ``h(s1, s2) = W conj(s1~) s2~``.  Frames:

* plane: unitary frame, Gaussian factor included in ``s~``, ``W = 1``;
* sphere: holomorphic frame over the chart ``z = w``, ``W = (1+|z|^2)^-k``;
* torus: unitary frame, the dressed theta sections, ``W = 1``.

For numerical work the *unit values* ``sqrt(W) s~`` are used; they stay
bounded where ``s~`` and ``W`` separately over/underflow.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .conventions import DEFAULT, Conventions
from .errors import DomainError, ParameterError, RankError
from .geometry import Geometry, QuadratureRule, as_points, check_level, hermitian_weight


@dataclass(frozen=True)
class TruncationParams:
    """Series truncation tolerances.

    ``plane_radius`` is the largest chart radius at which the truncated plane
    basis must reproduce the full kernel to relative accuracy
    ``plane_tail_tol``.
    """

    theta_tail_tol: float = 1e-12
    plane_tail_tol: float = 1e-12
    plane_radius: float = 4.0

    def __post_init__(self):
        if self.theta_tail_tol <= 0 or self.plane_tail_tol <= 0 or self.plane_radius <= 0:
            raise ParameterError("truncation tolerances and radius must be positive")


def plane_degree(k: int, radius: float, tol: float = 1e-12) -> int:
    """Smallest ``J`` such that monomials above degree ``J`` carry relative mass
    below ``tol`` of the coherent density at chart radius ``radius``.

    The mass of degree ``j`` at ``z`` is the Poisson weight of ``j`` with mean
    ``k |z|^2`` and ``|z|^2 = radius^2 / 2``.
    """
    mean = k * radius ** 2 / 2
    j = int(mean)
    while poisson.sf(j, mean) >= tol:
        j += max(1, int(math.sqrt(mean + 1) / 4))
    while j > 0 and poisson.sf(j - 1, mean) < tol:
        j -= 1
    return j


def torus_norm(modulus: complex, k: int, j) -> np.ndarray:
    """Closed-form squared norm ``N_{k,j} = exp(2 pi j^2 l2 / k) / sqrt(2 k l2)``."""
    lam2 = complex(modulus).imag
    j = np.asarray(j, dtype=float)
    return np.exp(2 * math.pi * j ** 2 * lam2 / k) / math.sqrt(2 * k * lam2)


def theta_eval(lam: complex, k: int, j: int, z, tail_tol: float = 1e-12):
    """Theta function ``sum_n exp(i pi lam (k n^2 + 2 j n) + 2 pi i sqrt2 (j + k n) z)``.

    ``z`` is the holomorphic coordinate (``sqrt(2) z`` is the lattice
    coordinate).  Terms ``|n| <= N`` are kept, with ``N`` the smallest bound
    past the dominant term at which the first omitted term is below
    ``tail_tol * (|partial sum| + 1)``.  Returns ``(value, N)``.
    """
    lam = complex(lam)
    if lam.imag <= 0:
        raise DomainError("theta series needs Im(lambda) > 0")
    if not 0 <= j < k:
        raise ParameterError("need 0 <= j < k")
    if tail_tol <= 0:
        raise ParameterError("tail_tol must be positive")
    zeta = math.sqrt(2) * np.asarray(z, dtype=complex)

    def term(n):
        return np.exp(1j * math.pi * lam * (k * n * n + 2 * j * n) + 2j * math.pi * (j + k * n) * zeta)

    # the terms peak near n* = -(Im zeta / Im lam + j / k)
    peak = int(np.ceil(np.max(np.abs(zeta.imag / lam.imag + j / k)))) + 1
    total = term(0)
    n = 0
    while True:
        n += 1
        total = total + term(n) + term(-n)
        omitted = np.maximum(np.abs(term(n + 1)), np.abs(term(-n - 1)))
        if n >= peak and np.all(omitted < tail_tol * (np.abs(total) + 1.0)):
            return total, n


def _theta_window(k: int, lam2: float, tol: float) -> int:
    # half-width of the index window around the dominant term
    return int(math.ceil(math.sqrt(-math.log(tol) / (math.pi * k * lam2)))) + 1


@dataclass(frozen=True)
class SectionBasis:
    """An explicit basis of H_k given through evaluators.

    ``mixing`` (``d x d``) recombines the raw sections: evaluator ``a`` is
    ``sum_b raw_b * mixing[b, a]``.  The genus-2 basis carries no evaluators
    (``d_k = 2k - 1`` only).
    """

    geometry: Geometry
    k: int
    d_k: int
    labels: tuple[str, ...]
    truncation: TruncationParams = field(default_factory=TruncationParams)
    mixing: np.ndarray | None = field(default=None, repr=False)
    conventions: Conventions = field(default=DEFAULT, repr=False)

    @property
    def has_evaluators(self) -> bool:
        return self.geometry.basis_mode

    @property
    def sections(self) -> list:
        """One evaluator ``x -> s~_j(x)`` per basis element."""
        if not self.has_evaluators:
            return []
        return [(lambda x, _j=j: self.values(x)[..., _j]) for j in range(self.d_k)]

    def _require(self):
        if not self.has_evaluators:
            raise NotImplementedError("the genus-2 backend is kernel-direct and has no basis evaluators")

    def _mix(self, arr):
        return arr if self.mixing is None else arr @ self.mixing

    def weight(self, x):
        return hermitian_weight(self.geometry, self.k, x, self.conventions)

    def unit_values(self, x) -> np.ndarray:
        """``sqrt(W(x)) s~_j(x)``, shape ``x.shape + (d_k,)``."""
        self._require()
        return self._mix(self._raw(as_points(self.geometry, x))[0])

    def values(self, x) -> np.ndarray:
        """Trivialised values ``s~_j(x)``."""
        w = as_points(self.geometry, x)
        u = self.unit_values(w)
        if self.geometry.kind == "sphere":
            return u * ((1.0 + np.abs(w) ** 2) ** (self.k / 2))[..., None]
        return u

    def unit_derivatives(self, x):
        """``sqrt(W) d s~/dw`` and ``sqrt(W) d s~/dwbar`` (chart Wirtinger
        derivatives of the trivialised sections, rescaled like
        :meth:`unit_values`)."""
        self._require()
        _, dw, dwb = self._raw(as_points(self.geometry, x), derivatives=True)
        return self._mix(dw), self._mix(dwb)

    # -- raw evaluators ---------------------------------------------------------

    def _raw(self, w, derivatives=False):
        kind = self.geometry.kind
        if kind == "sphere":
            return _sphere_raw(self.k, w, derivatives)
        if kind == "plane":
            return _plane_raw(self.k, self.d_k, w, derivatives, self.conventions)
        return _torus_raw(self.geometry.modulus, self.k, w, self.truncation.theta_tail_tol, derivatives)

    def to_json(self) -> str:
        return json.dumps({
            "geometry": self.geometry.name, "k": self.k, "d_k": self.d_k,
            "labels": list(self.labels),
            "truncation": {"theta_tail_tol": self.truncation.theta_tail_tol,
                           "plane_tail_tol": self.truncation.plane_tail_tol,
                           "plane_radius": self.truncation.plane_radius},
            "orthonormalized": self.mixing is not None,
        }, indent=2)


def _sphere_raw(k, w, derivatives):
    j = np.arange(k + 1)
    r2 = np.abs(w) ** 2
    q = (w / np.sqrt(1.0 + r2))[..., None]
    logc = 0.5 * (math.log(k + 1) + gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1))
    # (k+1 choose j)^(1/2) z^j (1+|z|^2)^(-k/2), split to avoid overflow
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.exp(logc) * q ** j * (1.0 + r2[..., None]) ** (-(k - j) / 2)
    if not derivatives:
        return (u,)
    du = np.zeros_like(u)
    du[..., 1:] = np.sqrt(j[1:] * (k - j[1:] + 1)) * u[..., :-1]
    return u, du, np.zeros_like(u)


def _plane_raw(k, d, w, derivatives, conventions):
    c = 1.0 / math.sqrt(2.0)
    z = c * w
    j = np.arange(d)
    shift = conventions.plane_basis_shift
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(z))[..., None]
    logmag = 0.5 * ((j + shift) * math.log(k) - gammaln(j + 1)) - k * (np.abs(z) ** 2)[..., None] / 2
    with np.errstate(invalid="ignore"):
        logmag = logmag + np.where(j == 0, 0.0, j * logabs)
    u = np.exp(logmag) * np.exp(1j * j * np.angle(z)[..., None])
    if not derivatives:
        return (u,)
    # d/dz s_j = sqrt(k j) s_{j-1} - (k/2) zbar s_j, d/dzbar s_j = -(k/2) z s_j
    dz = -0.5 * k * np.conj(z)[..., None] * u
    dz[..., 1:] += np.sqrt(k * j[1:]) * u[..., :-1]
    dzb = -0.5 * k * z[..., None] * u
    return u, c * dz, c * dzb


def _torus_raw(lam, k, w, tol, derivatives):
    lam2 = lam.imag
    v = w.imag
    j = np.arange(k)
    half = _theta_window(k, lam2, tol)
    m = np.arange(-half - 1, half + 1)
    n = np.rint(-v / lam2)[..., None, None] + m  # shape (..., 1, M)
    jj = j[:, None]
    zeta = w[..., None, None]
    expo = (1j * math.pi * lam * (k * n * n + 2 * jj * n) + 2j * math.pi * (jj + k * n) * zeta
            + 1j * math.pi * k * zeta * v[..., None, None] / lam2)
    terms = np.exp(expo)
    norm = np.sqrt(torus_norm(lam, k, j))
    psi = terms.sum(axis=-1)
    u = psi / norm
    if not derivatives:
        return (u,)
    dtheta = (2j * math.pi * (jj + k * n) * terms).sum(axis=-1)
    zeta1 = w[..., None]
    dw = (dtheta + (1j * math.pi * k / lam2) * (v[..., None] - 0.5j * zeta1) * psi) / norm
    dwb = -(math.pi * k / (2 * lam2)) * zeta1 * u
    return u, dw, dwb


def torus_dressed_sections(modulus: complex, k: int, x, tail_tol: float = 1e-12) -> np.ndarray:
    """Unnormalised dressed theta sections ``exp(i pi k zeta v / l2) theta_j(zeta)``
    at lattice coordinates ``x``, shape ``x.shape + (k,)``."""
    lam = complex(modulus)
    if lam.imag <= 0:
        raise DomainError("torus modulus needs Im > 0")
    w = np.asarray(x, dtype=complex)
    u = _torus_raw(lam, k, w, tail_tol, False)[0]
    return u * np.sqrt(torus_norm(lam, k, np.arange(k)))


def basis_sections(geom: Geometry, k: int, truncation: TruncationParams | None = None,
                   conventions: Conventions = DEFAULT) -> SectionBasis:
    """Orthonormal basis of H_k from the closed-form sections.

    sphere: ``sqrt((k+1) C(k,j)) z^j``, ``j = 0..k``;
    torus: dressed theta sections over ``sqrt(N_{k,j})``, ``j = 0..k-1``;
    plane: ``sqrt(k^(j+1)/j!) z^j exp(-k|z|^2/2)`` truncated at the degree
    given by :func:`plane_degree`;
    genus 2: no evaluators, ``d_k = 2k - 1``.
    """
    check_level(geom, k)
    truncation = truncation or TruncationParams()
    if geom.kind == "sphere":
        d = k + 1
        labels = tuple(f"z^{j}" for j in range(d))
    elif geom.kind == "torus":
        d = k
        labels = tuple(f"theta_{j}" for j in range(d))
    elif geom.kind == "plane":
        d = plane_degree(k, truncation.plane_radius, truncation.plane_tail_tol) + 1
        labels = tuple(f"z^{j}" for j in range(d))
    else:
        d = 2 * k - 1
        labels = ()
    return SectionBasis(geom, k, d, labels, truncation, None, conventions)


def plane_basis_for(k: int, points, truncation: TruncationParams | None = None,
                    conventions: Conventions = DEFAULT) -> SectionBasis:
    """Plane basis whose truncation covers every chart point in ``points``."""
    truncation = truncation or TruncationParams()
    radius = max(float(np.max(np.abs(np.asarray(points, dtype=complex)), initial=0.0)), 1e-3)
    t = TruncationParams(truncation.theta_tail_tol, truncation.plane_tail_tol,
                         max(radius, truncation.plane_radius))
    return basis_sections(Geometry.plane(), k, t, conventions)


def _check_rule(geom: Geometry, quad: QuadratureRule):
    if quad.geometry != geom.kind:
        raise ParameterError(f"quadrature built for {quad.geometry}, not {geom.kind}")


def inner_product(s1, s2, geom: Geometry, k: int, quad: QuadratureRule,
                  conventions: Conventions = DEFAULT) -> complex:
    """``<s1, s2> = sum_i w_i W(x_i) conj(s1~(x_i)) s2~(x_i)``."""
    _check_rule(geom, quad)
    x = quad.nodes
    vals = hermitian_weight(geom, k, x, conventions) * np.conj(s1(x)) * s2(x)
    return complex(quad.integrate(vals))


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    quadrature_resolution: int

    @property
    def max_deviation(self) -> float:
        """``max |G - I|``."""
        return float(np.max(np.abs(self.entries - np.eye(len(self.entries)))))

    def to_json(self, basis: SectionBasis | None = None) -> str:
        d = len(self.entries)
        off = self.entries - np.diag(np.diag(self.entries))
        out = {
            "resolution": self.quadrature_resolution,
            "max_offdiagonal": float(np.max(np.abs(off))) if d else 0.0,
            "max_deviation_from_identity": self.max_deviation,
            "diagonal": np.diag(self.entries).real.tolist(),
        }
        if basis is not None:
            out["labels"] = list(basis.labels)
        return json.dumps(out, indent=2)


def gram(basis: SectionBasis, quad: QuadratureRule) -> GramMatrix:
    """Gram matrix ``G_ij = <theta_i, theta_j>`` by quadrature, made exactly Hermitian."""
    _check_rule(basis.geometry, quad)
    u = basis.unit_values(quad.nodes)
    g = np.conj(u).T @ (quad.weights[:, None] * u)
    g = 0.5 * (g + np.conj(g).T)
    return GramMatrix(g, quad.resolution)


def orthonormalize(basis: SectionBasis, G: GramMatrix, rcond: float = 1e-12) -> SectionBasis:
    """Loewdin orthonormalisation ``theta' = theta G^(-1/2)``."""
    evals, evecs = np.linalg.eigh(G.entries)
    if evals.min() <= rcond * max(evals.max(), 0.0):
        raise RankError(f"Gram matrix is numerically singular (min eigenvalue {evals.min():.3e})")
    m = (evecs / np.sqrt(evals)) @ np.conj(evecs).T
    mixing = m if basis.mixing is None else basis.mixing @ m
    return SectionBasis(basis.geometry, basis.k, basis.d_k, basis.labels,
                        basis.truncation, mixing, basis.conventions)


def with_mixing(basis: SectionBasis, mixing: np.ndarray) -> SectionBasis:
    """Basis recombined by an arbitrary ``d x d`` matrix (used to build
    deliberately non-orthonormal families in tests and diagnostics)."""
    mixing = np.asarray(mixing, dtype=complex)
    if mixing.shape != (basis.d_k, basis.d_k):
        raise ParameterError("mixing matrix has the wrong shape")
    total = mixing if basis.mixing is None else basis.mixing @ mixing
    return SectionBasis(basis.geometry, basis.k, basis.d_k, basis.labels,
                        basis.truncation, total, basis.conventions)
