"""Symplectic coherent states, Bergman kernels and Berezin-Toeplitz operators
on four model phase spaces: the plane, the sphere, flat tori and a genus-2
hyperbolic surface."""

from .conventions import DEFAULT as DEFAULT_CONVENTIONS, Conventions
from .geometry import Geometry, QuadratureRule, ScalarField, build_quadrature

__all__ = ["Conventions", "DEFAULT_CONVENTIONS", "Geometry", "QuadratureRule", "ScalarField",
           "build_quadrature"]
__version__ = "0.1.0"
