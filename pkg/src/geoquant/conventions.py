"""Frozen sign and normalisation conventions.

The values here are the ones selected by :mod:`geoquant.calibration`, which
re-derives each of them from an exact identity (Gram identity, trace = d_k,
Tuynman residual).  Tests assert that a fresh calibration reproduces them.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Conventions:
    # Laplacian = laplacian_sign * div grad for the metric g = omega(., J.)
    laplacian_sign: int = -1
    # +1: nabla = d - i k tau;  -1: nabla = d + i k tau
    connection_sign: int = 1
    # X_f is defined by X_f _| omega = hamiltonian_sign * df; only the product
    # hamiltonian_sign * laplacian_sign is fixed by the Tuynman identity
    hamiltonian_sign: int = 1
    # Hermitian weight on the genus-2 surface is (Im z)^(exponent * k)
    hyperbolic_weight_exponent: int = 2
    # torus Liouville density is torus_measure_scale / Im(modulus) in (u, v)
    torus_measure_scale: float = 1.0
    # plane basis coefficient is sqrt(k^(j + plane_basis_shift) / j!)
    plane_basis_shift: int = 1

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Conventions()
