"""Reproducing kernels, coherent states and transition amplitudes.

Two backends compute the *unit kernel*

    Ku(x, y) = sqrt(W(x) W(y)) K(x, y),

which is the kernel expressed in unit-norm fibre frames at ``x`` and ``y``:

* :class:`BasisBackend` sums ``conj(u_j(x)) u_j(y)`` over an explicit basis
  (plane, sphere, torus);
* :class:`PoincareBackend` evaluates the genus-2 Poincare series

      K(w, z) = (2k-1)/2 * sum_g (2i / (g z - conj(w)))^(2k) j(g, z)^(-2k)

  truncated to the enumerated group.  Each term of ``Ku`` has modulus
  ``cosh(d(g z, w)/2)^(-2k)``, so the sum is evaluated without overflow.

Coherent-state coefficient vectors are taken relative to the unit frame at
the base point: ``c_j = sqrt(W(x)) conj(s~_j(x))`` with ``|c|^2 = eps(x)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import qr, svdvals

from . import fuchsian
from .conventions import DEFAULT, Conventions
from .errors import ConsistencyError, ParameterError, RankError
from .geometry import (Geometry, QuadratureRule, as_points, check_level, hermitian_weight,
                       liouville_density)
from .hilbert import SectionBasis, TruncationParams, basis_sections, plane_basis_for

PSI_CLIP = 1e-12
PSI_FAIL = 1e-9
# coherent densities below DENSITY_FLOOR * k count as zero (base-locus points)
DENSITY_FLOOR = 1e-14


def vanishes(eps, k: int):
    """True where the coherent density is zero up to roundoff."""
    return np.asarray(eps) <= DENSITY_FLOOR * k


# -- backends ---------------------------------------------------------------------------

class BasisBackend:
    """Kernel through an explicit orthonormal basis."""

    def __init__(self, basis: SectionBasis):
        if not basis.has_evaluators:
            raise ParameterError("basis backend needs basis evaluators")
        self.basis = basis
        self.geometry = basis.geometry
        self.k = basis.k

    def unit_values(self, x):
        return self.basis.unit_values(x)

    def unit_kernel(self, x, y):
        """``Ku(x, y)`` broadcast over ``x`` and ``y``."""
        x, y = np.broadcast_arrays(as_points(self.geometry, x), as_points(self.geometry, y))
        ux = self.unit_values(x)
        uy = self.unit_values(y)
        return np.sum(np.conj(ux) * uy, axis=-1)

    def unit_kernel_matrix(self, xs, ys):
        """``Ku(xs[a], ys[b])`` as an ``(len(xs), len(ys))`` array."""
        return np.conj(self.unit_values(np.ravel(xs))) @ self.unit_values(np.ravel(ys)).T

    def density(self, x):
        u = self.unit_values(x)
        return np.sum(np.abs(u) ** 2, axis=-1)

    def report(self):
        return None


@dataclass
class TruncationReport:
    word_length: int
    element_count: int
    max_displacement: float
    tail_estimate: float
    max_word_term: float
    warning: bool

    def as_dict(self):
        return {"word_length": self.word_length, "element_count": self.element_count,
                "max_displacement": self.max_displacement, "tail_estimate": self.tail_estimate,
                "max_word_term": self.max_word_term, "warning": self.warning}


class PoincareBackend:
    """Truncated Poincare series on the genus-2 surface.

    ``tail_estimate`` is the summed modulus of the terms from the outermost
    unit shell of displacements, relative to the kernel modulus; the warning
    flag is raised when it exceeds ``tail_warn``.
    """

    def __init__(self, geom: Geometry, k: int, conventions: Conventions = DEFAULT,
                 tail_warn: float = 1e-6, chunk: int = 512):
        check_level(geom, k)
        if geom.kind != "hyperbolic":
            raise ParameterError("Poincare backend is for the hyperbolic geometry")
        self.geometry = geom
        self.k = k
        self.conventions = conventions
        self.tail_warn = tail_warn
        self.chunk = chunk
        group = geom.group
        self.mats = group.matrices
        rmax = group.max_displacement if group.max_displacement is not None else float(group.displacements.max())
        self.rmax = float(rmax)
        self.shell = group.displacements > self.rmax - 1.0
        self.top_word = group.word_lengths == group.realized_word_length
        self.prefactor = (2 * k - 1) / 2
        self._tail = 0.0
        self._top = 0.0

    def _series(self, w, z):
        """Sum over the group for reduced point pairs (1-d arrays)."""
        k = self.k
        e = self.conventions.hyperbolic_weight_exponent
        scale = (w.imag * z.imag) ** (e / 4)
        total = np.zeros(w.shape, dtype=complex)
        tail = np.zeros(w.shape)
        top = np.zeros(w.shape)
        for start in range(0, len(self.mats), self.chunk):
            ms = self.mats[start:start + self.chunk]
            a, b, c, d = (ms[:, i, j][:, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
            jz = c * z[None, :] + d
            gz = (a * z[None, :] + b) / jz
            base = 2j * scale[None, :] / ((gz - np.conj(w)[None, :]) * jz)
            terms = base ** (2 * k)
            total += terms.sum(axis=0)
            mod = np.abs(terms)
            tail += mod[self.shell[start:start + self.chunk]].sum(axis=0)
            sel = self.top_word[start:start + self.chunk]
            if sel.any():
                top = np.maximum(top, mod[sel].max(axis=0))
        tot = np.abs(total)
        self._tail = max(self._tail, float(np.max(tail / np.maximum(tot, 1e-300), initial=0.0)))
        self._top = max(self._top, float(np.max(top, initial=0.0)))
        return self.prefactor * total

    def _phase(self, m, z):
        jz = m[..., 1, 0] * z + m[..., 1, 1]
        return (jz / np.abs(jz)) ** (2 * self.k)

    def unit_kernel(self, x, y):
        x, y = np.broadcast_arrays(as_points(self.geometry, x), as_points(self.geometry, y))
        shape = x.shape
        xr, mx = fuchsian.reduce_to_domain(x.ravel(), self.geometry.group)
        yr, my = fuchsian.reduce_to_domain(y.ravel(), self.geometry.group)
        val = self._series(xr, yr)
        # Ku(g w, h z) = conj(phase(g, w)) phase(h, z) Ku(w, z)
        val = val * np.conj(self._phase(mx, xr)) * self._phase(my, yr)
        return val.reshape(shape)

    def unit_kernel_matrix(self, xs, ys):
        xs = np.ravel(as_points(self.geometry, xs))
        ys = np.ravel(as_points(self.geometry, ys))
        out = np.empty((len(xs), len(ys)), dtype=complex)
        for i, x in enumerate(xs):
            out[i] = self.unit_kernel(np.full(ys.shape, x), ys)
        return out

    def density(self, x):
        return self.unit_kernel(x, x).real

    def report(self) -> TruncationReport:
        group = self.geometry.group
        return TruncationReport(group.realized_word_length, group.element_count, self.rmax,
                                self._tail, self._top, self._tail > self.tail_warn)


def backend_for(geom: Geometry, k: int, *, basis: SectionBasis | None = None,
                truncation: TruncationParams | None = None, points=None,
                conventions: Conventions = DEFAULT):
    """Pick the kernel backend for a geometry.

    On the plane the basis truncation is sized to cover ``points``.
    """
    check_level(geom, k)
    if basis is not None:
        if basis.k != k or basis.geometry.kind != geom.kind:
            raise ParameterError("basis does not match geometry and level")
        return BasisBackend(basis)
    if geom.kind == "hyperbolic":
        return PoincareBackend(geom, k, conventions)
    if geom.kind == "plane":
        pts = np.zeros(1) if points is None else np.concatenate([np.ravel(np.asarray(p, dtype=complex)) for p in points])
        return BasisBackend(plane_basis_for(k, pts, truncation, conventions))
    return BasisBackend(basis_sections(geom, k, truncation, conventions))


# -- kernel values ------------------------------------------------------------------------

@dataclass
class KernelValue:
    x: complex
    y: complex
    value: complex
    truncation_report: dict | None = None

    def as_dict(self):
        return {"x": [self.x.real, self.x.imag], "y": [self.y.real, self.y.imag],
                "value": [self.value.real, self.value.imag],
                "truncation_report": self.truncation_report}


def kernel_values(geom: Geometry, k: int, x, y, *, backend=None, **kw) -> np.ndarray:
    """Trivialised kernel ``K(x, y) = sum_j conj(s~_j(x)) s~_j(y)``, vectorised."""
    x = as_points(geom, x)
    y = as_points(geom, y)
    be = backend or backend_for(geom, k, points=(x, y), **kw)
    conv = kw.get("conventions", DEFAULT)
    ku = be.unit_kernel(x, y)
    return ku / np.sqrt(hermitian_weight(geom, k, x, conv) * hermitian_weight(geom, k, y, conv))


def kernel_eval(geom: Geometry, k: int, x, y, *, backend=None, **kw) -> KernelValue:
    """Kernel at one pair of points, with the truncation report in hyperbolic mode."""
    x, y = complex(x), complex(y)
    be = backend or backend_for(geom, k, points=(x, y), **kw)
    val = complex(kernel_values(geom, k, x, y, backend=be, **kw))
    rep = be.report()
    return KernelValue(x, y, val, None if rep is None else rep.as_dict())


def kernel_batch(geom: Geometry, k: int, pairs, **kw) -> list[KernelValue]:
    pairs = [(complex(a), complex(b)) for a, b in pairs]
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    be = kw.pop("backend", None) or backend_for(geom, k, points=(xs, ys), **kw)
    vals = kernel_values(geom, k, xs, ys, backend=be, **kw)
    rep = be.report()
    rep = None if rep is None else rep.as_dict()
    return [KernelValue(a, b, complex(v), rep) for (a, b), v in zip(pairs, vals)]


def kernel_batch_json(values: list[KernelValue]) -> str:
    return json.dumps([v.as_dict() for v in values], indent=2)


def coherent_density(geom: Geometry, k: int, x, *, backend=None, **kw) -> np.ndarray:
    """``eps^(k)(x) = W(x) K(x, x)``."""
    x = as_points(geom, x)
    be = backend or backend_for(geom, k, points=(x,), **kw)
    return be.density(x)


# -- coherent states -------------------------------------------------------------------------

@dataclass
class CoherentState:
    """Coherent state at ``base_point``.

    In basis mode ``coefficients`` holds ``c_j = sqrt(W(x)) conj(s~_j(x))``;
    in hyperbolic mode ``kernel_backed`` maps points ``y`` to the unit-frame
    value ``Ku(x, y)`` of the state.
    """

    base_point: complex
    k: int
    norm_sq: float
    coefficients: np.ndarray | None = None
    kernel_backed: Callable | None = field(default=None, repr=False)

    def normalized(self) -> "CoherentState":
        if self.norm_sq <= 0:
            zero = None if self.coefficients is None else np.zeros_like(self.coefficients)
            return CoherentState(self.base_point, self.k, 0.0, zero,
                                 None if self.kernel_backed is None else (lambda y: 0 * np.asarray(y, dtype=complex)))
        s = 1.0 / math.sqrt(self.norm_sq)
        coeffs = None if self.coefficients is None else self.coefficients * s
        fn = None
        if self.kernel_backed is not None:
            inner = self.kernel_backed
            fn = lambda y: inner(y) * s  # noqa: E731
        return CoherentState(self.base_point, self.k, 1.0, coeffs, fn)


def coherent_state(geom: Geometry, k: int, x, *, backend=None, **kw) -> CoherentState:
    x = complex(as_points(geom, x))
    be = backend or backend_for(geom, k, points=(x,), **kw)
    if isinstance(be, PoincareBackend):
        eps = float(be.density(x))
        return CoherentState(x, k, eps, None, lambda y: be.unit_kernel(np.full(np.shape(y), x), y))
    c = np.conj(be.unit_values(x))
    return CoherentState(x, k, float(np.sum(np.abs(c) ** 2)), c)


def _two_point_from(ku, ex, ey, k=1):
    with np.errstate(invalid="ignore", divide="ignore"):
        psi = np.abs(ku) ** 2 / (ex * ey)
    degenerate = vanishes(ex, k) | vanishes(ey, k)
    psi = np.where(degenerate, 0.0, psi)
    excess = float(np.max(psi - 1.0, initial=-1.0))
    if excess > PSI_FAIL:
        raise ConsistencyError(f"transition amplitude exceeds one by {excess:.3e}")
    psi = np.where((psi > 1.0) & (psi <= 1.0 + PSI_CLIP), 1.0, psi)
    return psi, degenerate


def two_point(geom: Geometry, k: int, x, y, *, backend=None, return_flag: bool = False, **kw):
    """Transition amplitude ``psi(x, y) = |<x|y>|^2`` (vectorised).

    Returns 0 where the coherent density vanishes at either point; with
    ``return_flag`` a boolean mask of those points is returned as well.
    """
    x, y = np.broadcast_arrays(as_points(geom, x), as_points(geom, y))
    be = backend or backend_for(geom, k, points=(x, y), **kw)
    psi, flag = _two_point_from(be.unit_kernel(x, y), be.density(x), be.density(y), k)
    return (psi, flag) if return_flag else psi




def two_point_normalization(geom: Geometry, k: int, x, quad: QuadratureRule, *,
                            backend=None, **kw) -> float:
    """``int psi(x, y) dmu(y)`` with ``dmu = eps eps_omega``."""
    x = complex(as_points(geom, x))
    be = backend or backend_for(geom, k, points=(np.array([x]), quad.nodes), **kw)
    ex = float(be.density(x))
    if vanishes(ex, k):
        raise ParameterError("coherent density vanishes at the base point")
    ku = be.unit_kernel(np.full(quad.nodes.shape, x), quad.nodes)
    # psi(x,y) eps(y) = |Ku|^2 / eps(x)
    return float(quad.integrate(np.abs(ku) ** 2)) / ex


def rawnsley_state(geom: Geometry, k: int, x, fiber_phase: float = 0.0, fiber_modulus: float = 1.0,
                   *, backend=None, **kw) -> np.ndarray:
    """Coefficients of the Rawnsley vector ``e_q`` for ``q = fiber_modulus *
    exp(i fiber_phase)`` times the unit vector of the fibre at ``x``.

    ``e_q = fiber_modulus^-k exp(i k fiber_phase) sqrt(W) conj(s~(x))``, so that
    ``s(x) = <e_q, s> q^k`` and ``e_{cq} = conj(c)^-k e_q``.
    """
    if fiber_modulus <= 0:
        raise ParameterError("fibre element must be nonzero")
    x = complex(as_points(geom, x))
    be = backend or backend_for(geom, k, points=(x,), **kw)
    if isinstance(be, PoincareBackend):
        raise NotImplementedError("Rawnsley coefficients need basis evaluators")
    return fiber_modulus ** (-k) * np.exp(1j * k * fiber_phase) * np.conj(be.unit_values(x))


def rawnsley_eta(geom: Geometry, x, quad: QuadratureRule, fiber_phase: float = 0.0,
                 fiber_modulus: float = 1.0, **kw) -> float:
    """``eta(x) = |e_q|^2 |q|^2`` at level one, with the norm taken by quadrature."""
    x = complex(as_points(geom, x))
    be = kw.pop("backend", None) or backend_for(geom, 1, points=(np.array([x]), quad.nodes), **kw)
    e = rawnsley_state(geom, 1, x, fiber_phase, fiber_modulus, backend=be)
    vals = be.unit_values(quad.nodes) @ e
    return float(quad.integrate(np.abs(vals) ** 2)) * fiber_modulus ** 2


def peak_identity_residual(geom: Geometry, k: int, x, quad: QuadratureRule, *,
                           backend=None, **kw) -> float:
    """``max_y |psi(x,y) eps(y) rho(y) - |S_x(y)|^2 rho(y)|`` over the nodes, with
    ``S_x`` the normalised coherent state and ``rho`` the Liouville density.

    The two sides are computed independently: ``psi`` from kernel values,
    ``S_x`` from coherent-state coefficients.
    """
    x = complex(as_points(geom, x))
    be = backend or backend_for(geom, k, points=(np.array([x]), quad.nodes), **kw)
    ex = float(be.density(x))
    if vanishes(ex, k):
        raise ParameterError("peak section undefined where the coherent density vanishes")
    y = quad.nodes
    rho = liouville_density(geom, y, kw.get("conventions", DEFAULT))
    psi = two_point(geom, k, np.full(y.shape, x), y, backend=be)
    lhs = psi * be.density(y) * rho
    if isinstance(be, PoincareBackend):
        state = coherent_state(geom, k, x, backend=be).normalized()
        s_y = state.kernel_backed(y)
    else:
        state = coherent_state(geom, k, x, backend=be).normalized()
        s_y = be.unit_values(y) @ state.coefficients
    rhs = np.abs(s_y) ** 2 * rho
    return float(np.max(np.abs(lhs - rhs)))


def kernel_idempotence_residual(geom: Geometry, k: int, x, y, quad: QuadratureRule, *,
                                backend=None, **kw) -> float:
    """``|<Phi_x, Phi_y> - K(y, x)|`` in unit frames, divided by ``sqrt(eps(x) eps(y))``.

    ``<Phi_x, Phi_y> = int W(z) conj(K(x, z)) K(y, z) eps_omega(z)``.
    For ``x = y`` this is ``|int psi dmu - 1|``.
    """
    x = complex(as_points(geom, x))
    y = complex(as_points(geom, y))
    be = backend or backend_for(geom, k, points=(np.array([x, y]), quad.nodes), **kw)
    z = quad.nodes
    kx = be.unit_kernel(np.full(z.shape, x), z)
    ky = be.unit_kernel(np.full(z.shape, y), z)
    lhs = complex(quad.integrate(np.conj(kx) * ky))
    rhs = complex(be.unit_kernel(y, x))
    scale = math.sqrt(float(be.density(x)) * float(be.density(y)))
    return abs(lhs - rhs) / scale


@dataclass
class CoherentBasisSelection:
    points: list
    indices: list
    condition_number: float
    min_singular_value: float


def select_coherent_basis(geom: Geometry, k: int, candidates, *, backend=None, **kw) -> CoherentBasisSelection:
    """Choose ``d_k`` candidate points whose normalised coherent states span H_k.

    Column-pivoted QR on the matrix of normalised coefficient vectors picks the
    points; the selection is rejected when its smallest singular value is
    below ``1e-8``.
    """
    cand = np.ravel(as_points(geom, candidates))
    be = backend or backend_for(geom, k, points=(cand,), **kw)
    if isinstance(be, PoincareBackend):
        raise NotImplementedError("coherent-basis selection needs basis evaluators")
    d = be.basis.d_k
    if len(cand) < d:
        raise ParameterError(f"need at least {d} candidates, got {len(cand)}")
    # canonical candidate order: all columns have unit norm, so the first
    # pivot is a tie and would otherwise depend on the input order
    order = np.lexsort((cand.imag, cand.real))
    u = be.unit_values(cand[order])
    norms = np.linalg.norm(u, axis=1)
    a_sorted = (np.conj(u) / np.where(norms > 0, norms, 1.0)[:, None]).T
    _, _, piv = qr(a_sorted, pivoting=True, mode="economic")
    idx = sorted(int(order[i]) for i in piv[:d])
    a = np.empty_like(a_sorted)
    a[:, order] = a_sorted
    sv = svdvals(a[:, idx])
    if sv.min() <= 1e-8:
        raise RankError(f"candidates span only a degenerate subspace (min singular value {sv.min():.3e})")
    return CoherentBasisSelection([complex(c) for c in cand[idx]], idx, float(sv.max() / sv.min()), float(sv.min()))


def maximal_peaking_check(geom: Geometry, k: int, x, trials: int = 1000, *, rng=None,
                          backend=None, tol: float = 1e-9, **kw) -> bool:
    """Random states with ``|s|^2 = eps(x)`` never beat the coherent state at ``x``.

    Checks ``|s(x)|^2 <= eps(x)^2 (1 + tol)`` for ``trials`` random coefficient
    vectors and that the coherent state reaches ``eps(x)^2`` within ``tol``.
    """
    rng = np.random.default_rng(rng)
    x = complex(as_points(geom, x))
    be = backend or backend_for(geom, k, points=(np.array([x]),), **kw)
    if isinstance(be, PoincareBackend):
        raise NotImplementedError("maximal peaking check needs basis evaluators")
    u = be.unit_values(x)
    eps = float(np.sum(np.abs(u) ** 2))
    if vanishes(eps, k):
        raise ParameterError("coherent density vanishes at x")
    d = len(u)
    a = rng.standard_normal((trials, d)) + 1j * rng.standard_normal((trials, d))
    a *= math.sqrt(eps) / np.linalg.norm(a, axis=1)[:, None]
    peak = np.abs(a @ u) ** 2
    ok = bool(np.all(peak <= eps ** 2 * (1 + tol)))
    c = coherent_state(geom, k, x, backend=be).coefficients
    attained = abs(abs(c @ u) ** 2 - eps ** 2) <= tol * max(1.0, eps ** 2)
    return ok and bool(attained)


def basic_inequality_margin(geom: Geometry, k: int, coefficients, x, *, backend=None, **kw) -> float:
    """Smallest value of ``|s|^2 eps(x) - |s(x)|^2`` over the points ``x``
    for the section with the given coefficients (negative means violated)."""
    x = np.ravel(as_points(geom, x))
    be = backend or backend_for(geom, k, points=(x,), **kw)
    coefficients = np.asarray(coefficients, dtype=complex)
    u = be.unit_values(x)
    sx = np.abs(u @ coefficients) ** 2
    eps = np.sum(np.abs(u) ** 2, axis=-1)
    return float(np.min(np.sum(np.abs(coefficients) ** 2) * eps - sx))
