"""Semiclassical sweeps: concentration, delta sequences, Berezin transform."""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .conventions import DEFAULT, Conventions
from .errors import ParameterError
from .geometry import (Geometry, QuadratureRule, as_field, as_points, ball_quadrature, build_quadrature,
                       geodesic_distance, omega_density)
from .kernel import backend_for, vanishes
from .toeplitz import covariant_symbol, toeplitz_matrix

CSV_COLUMNS = ("geometry", "test", "k", "x_u", "x_v", "value", "reference", "abs_error",
               "resolution", "runtime_ms")
TESTS = ("delta", "berezin", "concentration", "normalization")


def admissible_radius(k: int, power: float = 1 / 3) -> float:
    """Default radius ``r_k = k^-power``; ``r_k -> 0`` while ``sqrt(k) r_k -> inf``."""
    return k ** (-power)


def auto_resolution(geom: Geometry, k: int, base: int = 0) -> int:
    """Resolution that keeps the level-``k`` concentration scale resolved."""
    if geom.kind == "sphere":
        # exactness needs > k nodes in cos(theta); also >= 8 nodes per width
        return max(base, k + 8, int(math.ceil(4 * math.pi * math.sqrt(k))))
    if geom.kind == "torus":
        return max(base, int(math.ceil(16 * math.sqrt(k / geom.modulus.imag))), 32)
    if geom.kind == "plane":
        return max(base, 40)
    return max(base, 160)


def _backend(geom, k, x, quad, backend, conventions):
    return backend or backend_for(geom, k, points=(np.atleast_1d(x), quad.nodes), conventions=conventions)


def _weighted_psi(be, x, nodes):
    # psi(x, y) eps(y) at the nodes
    x = complex(x)
    ex = float(be.density(x))
    if vanishes(ex, be.k):
        raise ParameterError("coherent density vanishes at the base point")
    ku = be.unit_kernel(np.full(nodes.shape, x), nodes)
    return np.abs(ku) ** 2 / ex


def concentration_integral(geom: Geometry, k: int, x, radius: float, quad: QuadratureRule | None = None,
                           *, resolution: int = 64, backend=None,
                           conventions: Conventions = DEFAULT) -> float:
    """``int_{B(x, radius)} psi(x, y) dmu(y)``.

    Without ``quad`` a geodesic polar rule on the ball is used (the boundary is
    a coordinate line, so convergence is spectral).  With ``quad`` the nodes
    are masked by :func:`geodesic_distance`.
    """
    if radius < 0:
        raise ParameterError("radius must be nonnegative")
    if radius == 0:
        return 0.0
    x = complex(as_points(geom, x))
    if quad is None:
        quad = ball_quadrature(geom, x, radius, resolution, conventions)
        mask = None
    else:
        mask = geodesic_distance(geom, np.full(quad.nodes.shape, x), quad.nodes) < radius
    be = _backend(geom, k, x, quad, backend, conventions)
    vals = _weighted_psi(be, x, quad.nodes)
    if mask is not None:
        vals = np.where(mask, vals, 0.0)
    return float(quad.integrate(vals))


def delta_test(geom: Geometry, k: int, f, x, quad: QuadratureRule, *, backend=None,
               conventions: Conventions = DEFAULT) -> float:
    """``|int f(y) psi(x, y) dmu(y) - f(x)|``."""
    f = as_field(f)
    x = complex(as_points(geom, x))
    be = _backend(geom, k, x, quad, backend, conventions)
    smoothed = float(quad.integrate(f(quad.nodes) * _weighted_psi(be, x, quad.nodes)))
    return abs(smoothed - float(f(np.array([x]))[0]))


def berezin_transform_error(geom: Geometry, k: int, f, x, quad: QuadratureRule, *, backend=None,
                            conventions: Conventions = DEFAULT) -> float:
    """``|<x|Q(f)|x> - f(x)|``."""
    f = as_field(f)
    x = complex(as_points(geom, x))
    be = _backend(geom, k, x, quad, backend, conventions)
    q = toeplitz_matrix(geom, k, f, quad, basis=be.basis, conventions=conventions)
    sym = covariant_symbol(q, geom, k, np.array([x]), backend=be)[0]
    return abs(complex(sym) - float(f(np.array([x]))[0]))


def rate_fit(sweep) -> tuple[float, float]:
    """Least-squares slope of ``log(error)`` against ``log(k)`` and the RMS residual.

    Nonpositive errors are dropped; fewer than four remaining points is an error.
    """
    pts = [(float(k), float(e)) for k, e in sweep if e > 0 and k > 0]
    if len(pts) < 4:
        raise ParameterError(f"rate fit needs at least 4 positive error points, got {len(pts)}")
    lk = np.log([p[0] for p in pts])
    le = np.log([p[1] for p in pts])
    coef = np.polyfit(lk, le, 1)
    resid = le - np.polyval(coef, lk)
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


@dataclass
class SweepResult:
    geometry: str
    test: str
    k_values: list
    errors: list
    fitted_slope: float
    fit_residual: float
    notes: list = field(default_factory=list)
    rows: list = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {"geometry": self.geometry, "test": self.test, "k_values": self.k_values,
                "errors": self.errors, "fitted_slope": self.fitted_slope,
                "fit_residual": self.fit_residual, "notes": self.notes}

    def to_csv(self, timings: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            row = dict(r)
            row["runtime_ms"] = f"{row['runtime_ms']:.3f}" if timings else ""
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def plot_data(self) -> str:
        return "".join(f"{k} {e:.17g}\n" for k, e in zip(self.k_values, self.errors))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _reference(geom, test, f, x):
    if test in ("concentration", "normalization"):
        return 1.0
    return float(f(np.array([x]))[0])


def sweep(geom: Geometry, test: str, k_values, x, f=None, *, base_resolution: int = 0,
          radius_power: float = 1 / 3, conventions: Conventions = DEFAULT) -> SweepResult:
    """Run one semiclassical test over ``k_values`` and fit the decay rate.

    ``test`` is one of :data:`TESTS`; the concentration error is
    ``1 - concentration_integral`` at the admissible radius ``k^-radius_power``.
    """
    if test not in TESTS:
        raise ParameterError(f"unknown test {test!r}; valid: {list(TESTS)}")
    if test in ("delta", "berezin") and f is None:
        raise ParameterError(f"test {test!r} needs an observable")
    ks = [int(k) for k in k_values]
    if len(ks) < 4:
        raise ParameterError("a sweep needs at least 4 k values for the rate fit")
    x = complex(as_points(geom, x))
    f = as_field(f) if f is not None else None
    rows, errors, notes = [], [], []
    for k in ks:
        t0 = time.perf_counter()
        res = auto_resolution(geom, k, base_resolution)
        if test == "concentration":
            value = concentration_integral(geom, k, x, admissible_radius(k, radius_power),
                                           resolution=max(res, 32), conventions=conventions)
        else:
            quad = build_quadrature(geom, res, k=k, center=x, conventions=conventions)
            if test == "delta":
                value = _smoothed(geom, k, f, x, quad, conventions)
            elif test == "berezin":
                be = backend_for(geom, k, points=(np.array([x]), quad.nodes), conventions=conventions)
                q = toeplitz_matrix(geom, k, f, quad, basis=be.basis, conventions=conventions)
                value = float(covariant_symbol(q, geom, k, np.array([x]), backend=be)[0].real)
            else:
                be = backend_for(geom, k, points=(np.array([x]), quad.nodes), conventions=conventions)
                value = float(quad.integrate(_weighted_psi(be, x, quad.nodes)))
        ref = _reference(geom, test, f, x)
        err = abs(value - ref)
        ms = (time.perf_counter() - t0) * 1e3
        rows.append({"geometry": geom.name, "test": test, "k": k, "x_u": x.real, "x_v": x.imag,
                     "value": value, "reference": ref, "abs_error": err, "resolution": res,
                     "runtime_ms": ms})
        errors.append(err)
        if err <= 0:
            notes.append(f"k={k}: zero error excluded from fit")
    slope, resid = rate_fit(zip(ks, errors))
    name = (f"{test}:{f.name}" if f is not None else test)
    return SweepResult(geom.name, name, ks, errors, slope, resid, notes, rows)


def _smoothed(geom, k, f, x, quad, conventions):
    be = _backend(geom, k, x, quad, None, conventions)
    return float(quad.integrate(f(quad.nodes) * _weighted_psi(be, x, quad.nodes)))


def delta_error_bound(geom: Geometry, k: int, f, x, radius: float, *, resolution: int = 64,
                      conventions: Conventions = DEFAULT) -> float:
    """Bound ``max|grad f| r + 2 max|f| (1 - mass of the ball)`` for the delta error.

    ``|grad f|`` is measured in the metric ``g``; its maximum is taken over
    the nodes of the ball rule.
    """
    f = as_field(f)
    x = complex(as_points(geom, x))
    ball = ball_quadrature(geom, x, radius, resolution, conventions)
    fu, fv = f.gradient(ball.nodes)
    gnorm = np.sqrt((fu ** 2 + fv ** 2) / omega_density(geom, ball.nodes, conventions))
    mass = concentration_integral(geom, k, x, radius, resolution=resolution, conventions=conventions)
    full = build_quadrature(geom, auto_resolution(geom, k), k=k, center=x, conventions=conventions)
    fmax = float(np.max(np.abs(f(full.nodes))))
    return float(gnorm.max()) * radius + 2 * fmax * max(0.0, 1.0 - mass)
