"""Berezin-Toeplitz and Kostant-Souriau operators on H_k.

Operators are ``d_k x d_k`` matrices in the orthonormal basis of
:mod:`geoquant.hilbert`.  The Kostant-Souriau operator of ``f`` acts on a
trivialised section as

    Q_KS(f) s = -(i/k) X_f(s) - c tau(X_f) s + f s,

where ``c`` is the connection sign (``nabla = d - i c k tau``) and the
Hamiltonian field solves ``X_f _| omega = h df`` with the Hamiltonian sign
``h``.  With ``omega = W du ^ dv``: ``X^u = h f_v / W``, ``X^v = -h f_u / W``.
"""
from __future__ import annotations

import json

import numpy as np

from .conventions import DEFAULT, Conventions
from .errors import ParameterError
from .geometry import (Geometry, QuadratureRule, ScalarField, as_field, check_level, metric_laplacian,
                       omega_density, potential_uv)
from .hilbert import SectionBasis, TruncationParams, basis_sections
from .kernel import BasisBackend, backend_for, vanishes


class OperatorMatrix:
    def __init__(self, entries, k: int, geometry: str, observable: str = ""):
        self.entries = np.asarray(entries, dtype=complex)
        self.k = k
        self.geometry = geometry
        self.observable = observable

    @property
    def dim(self) -> int:
        return len(self.entries)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - np.conj(self.entries).T)))

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the Hermitian part, ascending."""
        h = 0.5 * (self.entries + np.conj(self.entries).T)
        return np.linalg.eigvalsh(h)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries - other.entries, self.k, self.geometry,
                              f"{self.observable}-{other.observable}")

    def to_json(self, residuals: dict | None = None) -> str:
        ent = [[[z.real, z.imag] for z in row] for row in self.entries]
        return json.dumps({"geometry": self.geometry, "k": self.k, "observable": self.observable,
                           "entries": ent, "residuals": residuals or {}}, indent=2)


def _basis(geom, k, basis, truncation, conventions) -> SectionBasis:
    check_level(geom, k)
    if not geom.basis_mode:
        raise NotImplementedError("operator matrices need basis evaluators")
    if basis is None:
        basis = basis_sections(geom, k, truncation, conventions)
    return basis


def toeplitz_matrix(geom: Geometry, k: int, f, quad: QuadratureRule, *,
                    basis: SectionBasis | None = None, truncation: TruncationParams | None = None,
                    conventions: Conventions = DEFAULT) -> OperatorMatrix:
    """``Q(f)_ij = <theta_i, f theta_j>`` by quadrature."""
    basis = _basis(geom, k, basis, truncation, conventions)
    f = as_field(f)
    u = basis.unit_values(quad.nodes)
    fw = quad.weights * f(quad.nodes)
    return OperatorMatrix(np.conj(u).T @ (fw[:, None] * u), k, geom.name, f.name)


def covariant_symbol(A: OperatorMatrix, geom: Geometry, k: int, x, *, backend=None,
                     **kw) -> np.ndarray:
    """``<x|A|x>`` for normalised coherent states (vectorised over ``x``)."""
    x = np.asarray(x, dtype=complex)
    be = backend or backend_for(geom, k, points=(x,), **kw)
    if not isinstance(be, BasisBackend):
        raise NotImplementedError("covariant symbols need basis evaluators")
    u = be.unit_values(x)
    eps = np.sum(np.abs(u) ** 2, axis=-1)
    if np.any(vanishes(eps, k)):
        raise ParameterError("covariant symbol undefined where the coherent density vanishes")
    # coefficient vector is conj(u); <c|A|c> = u^T A conj(u)
    val = np.einsum("...i,ij,...j->...", u, A.entries, np.conj(u))
    return val / eps


def trace_identity_residual(A: OperatorMatrix, geom: Geometry, k: int, quad: QuadratureRule, *,
                            backend=None, **kw) -> float:
    """``|Tr A - int A^ dmu|``."""
    be = backend or backend_for(geom, k, points=(quad.nodes,), **kw)
    u = be.unit_values(quad.nodes)
    # A^(y) eps(y) = u^T A conj(u)
    dens = np.einsum("ni,ij,nj->n", u, A.entries, np.conj(u))
    return float(abs(np.trace(A.entries) - quad.integrate(dens)))


def kostant_souriau_matrix(geom: Geometry, k: int, f, quad: QuadratureRule, *,
                           basis: SectionBasis | None = None, truncation: TruncationParams | None = None,
                           conventions: Conventions = DEFAULT) -> OperatorMatrix:
    """Matrix of ``Pi Q_KS(f) Pi`` in the orthonormal basis."""
    if geom.kind == "hyperbolic":
        raise NotImplementedError("no global potential on the genus-2 surface")
    basis = _basis(geom, k, basis, truncation, conventions)
    f = as_field(f)
    x = quad.nodes
    fu, fv = f.gradient(x)
    wom = omega_density(geom, x, conventions)
    h = conventions.hamiltonian_sign
    xu = h * fv / wom
    xv = -h * fu / wom
    p, q = potential_uv(geom, x)
    tau_x = p * xu + q * xv
    u = basis.unit_values(x)
    dw, dwb = basis.unit_derivatives(x)
    xs = (xu + 1j * xv)[:, None] * dw + (xu - 1j * xv)[:, None] * dwb
    ks = (-1j / k) * xs + (f(x) - conventions.connection_sign * tau_x)[:, None] * u
    m = np.conj(u).T @ (quad.weights[:, None] * ks)
    return OperatorMatrix(m, k, geom.name, f"KS({f.name})")


def tuynman_corrected(geom: Geometry, k: int, f, conventions: Conventions = DEFAULT) -> ScalarField:
    """The field ``f - Delta f / 2k``."""
    f = as_field(f)
    return ScalarField(lambda x: f(x) - metric_laplacian(geom, f, x, conventions) / (2 * k),
                       f"{f.name}-lap/2k")


def tuynman_residual(geom: Geometry, k: int, f, quad: QuadratureRule, *,
                     basis: SectionBasis | None = None, truncation: TruncationParams | None = None,
                     conventions: Conventions = DEFAULT) -> float:
    """``max |Pi Q_KS(f) Pi - Q(f - Delta f / 2k)|``."""
    basis = _basis(geom, k, basis, truncation, conventions)
    ks = kostant_souriau_matrix(geom, k, f, quad, basis=basis, conventions=conventions)
    tq = toeplitz_matrix(geom, k, tuynman_corrected(geom, k, f, conventions), quad,
                         basis=basis, conventions=conventions)
    return float(np.max(np.abs(ks.entries - tq.entries)))
