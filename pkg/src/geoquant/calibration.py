"""Numerical calibration of the sign and normalisation conventions.

Each convention is chosen by evaluating an exact identity under every
candidate and keeping the one with the smallest residual:

* plane basis coefficient: Gram identity of the monomial sections;
* torus Liouville constant: ``|psi_j|^2 = N_{k,j}`` (solved in closed form);
* genus-2 weight exponent: ``int eps eps_omega = 2k - 1``;
* connection and Laplacian signs: Tuynman residual on the sphere, with the
  Hamiltonian convention ``X_f _| omega = df`` held fixed (flipping both the
  Hamiltonian and the Laplacian sign leaves the identity invariant).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import replace

import numpy as np

from . import fuchsian
from .conventions import DEFAULT, Conventions
from .errors import ConsistencyError
from .geometry import Geometry, build_quadrature
from .hilbert import TruncationParams, basis_sections, gram, torus_norm
from .kernel import PoincareBackend
from .observables import sphere_height
from .toeplitz import tuynman_residual


def calibrate_plane_shift(k: int = 3, sections: int = 10) -> tuple[int, dict]:
    geom = Geometry.plane()
    quad = build_quadrature(geom, 40, k=k)
    res = {}
    for shift in (0, 1):
        conv = replace(DEFAULT, plane_basis_shift=shift)
        b = basis_sections(geom, k, TruncationParams(plane_radius=1.0), conv)
        u = b.unit_values(quad.nodes)[:, :sections]
        g = np.conj(u).T @ (quad.weights[:, None] * u)
        res[shift] = float(np.max(np.abs(g - np.eye(g.shape[0]))))
    best = min(res, key=res.get)
    return best, {f"plane_gram[shift={s}]": v for s, v in res.items()}


def calibrate_torus_measure(modulus: complex = 1j, k: int = 4, resolution: int = 96) -> tuple[float, dict]:
    """Scale ``c`` such that the density ``c / Im(lambda)`` gives ``|psi_j|^2 = N_{k,j}``."""
    geom = Geometry.torus(modulus)
    conv = replace(DEFAULT, torus_measure_scale=1.0)
    quad = build_quadrature(geom, resolution, conventions=conv)
    b = basis_sections(geom, k, conventions=conv)
    diag = np.diag(gram(b, quad).entries).real  # = |psi_j|^2 / N_{k,j} at scale 1
    scale = float(np.mean(1.0 / diag))
    spread = float(np.max(np.abs(diag * scale - 1.0)))
    return scale, {"torus_norm_law": spread, "torus_measure_constant": scale / geom.modulus.imag}


def calibrate_hyperbolic_exponent(k: int = 3, group=None, resolution: int = 160) -> tuple[int, dict]:
    group = group or fuchsian.genus2_group(10, 7.0)
    geom = Geometry.genus2(group)
    quad = build_quadrature(geom, resolution)
    res = {}
    for e in (1, 2):
        conv = replace(DEFAULT, hyperbolic_weight_exponent=e)
        be = PoincareBackend(geom, k, conv)
        trace = float(quad.integrate(be.density(quad.nodes)))
        res[e] = abs(trace - (2 * k - 1)) / (2 * k - 1)
    best = min(res, key=res.get)
    return best, {f"genus2_trace[exponent={e}]": v for e, v in res.items()}


def calibrate_signs(k: int = 3, resolution: int = 40) -> tuple[tuple[int, int], dict]:
    geom = Geometry.sphere()
    quad = build_quadrature(geom, resolution)
    f = sphere_height()
    res = {}
    for c, lap in itertools.product((1, -1), repeat=2):
        conv = replace(DEFAULT, connection_sign=c, laplacian_sign=lap, hamiltonian_sign=1)
        res[(c, lap)] = tuynman_residual(geom, k, f, quad, conventions=conv)
    best = min(res, key=res.get)
    wrong = min(v for key, v in res.items() if key != best)
    out = {f"tuynman[connection={c},laplacian={l}]": v for (c, l), v in res.items()}
    out["tuynman_discrimination"] = wrong / max(res[best], 1e-300)
    return best, out


def calibrate(geometry: str = "sphere", modulus: complex = 1j, group=None) -> dict:
    """Run every calibration and return the ``conventions.json`` payload."""
    shift, r1 = calibrate_plane_shift()
    scale, r2 = calibrate_torus_measure(modulus)
    expo, r3 = calibrate_hyperbolic_exponent(group=group)
    (c, lap), r4 = calibrate_signs()
    residuals = {**r1, **r2, **r3, **r4}
    return {
        "geometry": geometry,
        "laplacian_sign": lap,
        "connection_sign": c,
        "hamiltonian_sign": 1,
        "hyperbolic_weight_exponent": expo,
        "torus_measure_constant": scale / complex(modulus).imag,
        "torus_measure_scale": round(scale, 9),
        "plane_basis_shift": shift,
        "residuals": residuals,
    }


def to_conventions(payload: dict) -> Conventions:
    return Conventions(
        laplacian_sign=int(payload["laplacian_sign"]),
        connection_sign=int(payload["connection_sign"]),
        hamiltonian_sign=int(payload["hamiltonian_sign"]),
        hyperbolic_weight_exponent=int(payload["hyperbolic_weight_exponent"]),
        torus_measure_scale=float(payload["torus_measure_scale"]),
        plane_basis_shift=int(payload["plane_basis_shift"]),
    )


def check_frozen(payload: dict, frozen: Conventions = DEFAULT) -> None:
    """Raise if a fresh calibration disagrees with the frozen conventions."""
    got = to_conventions(payload)
    if got != frozen:
        raise ConsistencyError(f"calibrated conventions {got} differ from frozen {frozen}")


def dumps(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)
