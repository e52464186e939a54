"""Real Moebius transformations and the genus-2 Fuchsian group.

Points of the upper half-plane are plain complex numbers.  Group elements
are stored both as :class:`Mobius` values (for the public API) and as a
stacked ``(N, 2, 2)`` float array inside :class:`GroupEnumeration`, which
is what the Poincare-series code consumes.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, EnumerationCapError, ParameterError

#: centre of the Dirichlet domain (image of the disc origin)
BASE_POINT = 1j

_DET_TOL = 1e-12
_DEDUP_GRID = 1e-9


@dataclass(frozen=True)
class Mobius:
    """An element of PSL(2, R), stored with determinant one and canonical sign."""

    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_matrix(cls, m) -> "Mobius":
        m = np.asarray(m, dtype=float)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det <= 0:
            raise ParameterError(f"matrix has non-positive determinant {det}")
        m = _canonical_sign(m / math.sqrt(det))
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "Mobius") -> "Mobius":
        return Mobius.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Mobius":
        return Mobius.from_matrix([[self.d, -self.b], [-self.c, self.a]])

    def __call__(self, z):
        return mobius_apply(self, z)

    def is_close(self, other: "Mobius", tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= tol)


def _canonical_sign(m: np.ndarray) -> np.ndarray:
    # first entry (row-major) that is not negligibly small decides the sign
    flat = m.reshape(-1)
    idx = int(np.argmax(np.abs(flat) > 1e-12))
    return m if flat[idx] > 0 else -m


def _canonical_sign_stack(ms: np.ndarray) -> np.ndarray:
    flat = ms.reshape(len(ms), 4)
    idx = np.argmax(np.abs(flat) > 1e-12, axis=1)
    sign = np.sign(flat[np.arange(len(ms)), idx])
    return ms * sign[:, None, None]


def _as_matrix(g) -> np.ndarray:
    return g.matrix if isinstance(g, Mobius) else np.asarray(g, dtype=float)


def _check_upper(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("point(s) not in the upper half-plane")
    return z


def mobius_apply(g, z):
    """Fractional linear action ``(az + b)/(cz + d)`` on the upper half-plane."""
    z = _check_upper(z)
    m = _as_matrix(g)
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def automorphy_factor(g, z):
    """The cocycle ``j(g, z) = cz + d``."""
    z = _check_upper(z)
    m = _as_matrix(g)
    return m[1, 0] * z + m[1, 1]


def hyperbolic_distance(z, w):
    """Distance for the metric ``|dz|^2 / (Im z)^2`` on the upper half-plane."""
    z = _check_upper(z)
    w = _check_upper(w)
    return 2.0 * np.arcsinh(np.abs(z - w) / (2.0 * np.sqrt(z.imag * w.imag)))


# -- regular octagon ---------------------------------------------------------

def octagon_inradius() -> float:
    """Distance from the centre of the regular pi/4-angled octagon to a side."""
    return math.acosh(1.0 / math.tan(math.pi / 8))


def octagon_circumradius() -> float:
    """Distance from the centre of the regular pi/4-angled octagon to a vertex."""
    return math.acosh(1.0 / math.tan(math.pi / 8) ** 2)


_CAYLEY = np.array([[1, -1j], [1, 1j]])  # H -> disc
_CAYLEY_INV = np.linalg.inv(_CAYLEY)


def _disc_to_half_plane(m: np.ndarray) -> np.ndarray:
    h = _CAYLEY_INV @ m @ _CAYLEY
    h = h / np.sqrt(np.linalg.det(h))
    if np.max(np.abs(h.imag)) > 1e-10:
        raise ArithmeticError("conjugated disc isometry is not real")
    return h.real


def _disc_rotation(theta: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)])


def _disc_translation(length: float) -> np.ndarray:
    ch, sh = math.cosh(length / 2), math.sinh(length / 2)
    return np.array([[ch, sh], [sh, ch]], dtype=complex)


def _side_pairing(src: int, dst: int) -> Mobius:
    # isometry carrying side `src` of the octagon onto side `dst`, with the
    # octagon landing on the far side of `dst`
    m = (_disc_rotation(dst * math.pi / 4)
         @ _disc_translation(2 * octagon_inradius())
         @ _disc_rotation(math.pi - src * math.pi / 4))
    return Mobius.from_matrix(_disc_to_half_plane(m))


def genus2_generators() -> list[Mobius]:
    """Side pairings ``[a1, b1, a2, b2]`` of the regular hyperbolic octagon.

    Sides are numbered counter-clockwise from the one facing the positive real
    axis of the disc; the pairing pattern is 0-2, 1-3, 4-6, 5-7, and the
    generators satisfy ``[a1, b1][a2, b2] = 1``.
    """
    a1 = _side_pairing(2, 0)
    b1 = _side_pairing(3, 1).inverse()
    a2 = _side_pairing(6, 4)
    b2 = _side_pairing(7, 5).inverse()
    return [a1, b1, a2, b2]


def commutator(x: Mobius, y: Mobius) -> Mobius:
    return x @ y @ x.inverse() @ y.inverse()


def surface_relator(generators: Sequence[Mobius]) -> Mobius:
    """Product of commutators ``[a1,b1][a2,b2]...`` of consecutive generator pairs."""
    out = Mobius.identity()
    for x, y in zip(generators[0::2], generators[1::2]):
        out = out @ commutator(x, y)
    return out


# -- enumeration ---------------------------------------------------------------

@dataclass
class GroupEnumeration:
    """Finite list of group elements, closed under inverses.

    ``matrices`` has shape ``(N, 2, 2)``; row 0 is the identity.  Elements are
    sorted by word length, then lexicographically by matrix entries.
    """

    generators: list[Mobius]
    matrices: np.ndarray
    word_lengths: np.ndarray
    max_word_length: int
    max_displacement: float | None = None
    displacements: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.displacements is None:
            self.displacements = hyperbolic_distance(
                _apply_stack(self.matrices, BASE_POINT), BASE_POINT)

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def element_count(self) -> int:
        return len(self.matrices)

    @property
    def elements(self) -> list[Mobius]:
        return [Mobius(*m.reshape(-1)) for m in self.matrices]

    @property
    def realized_word_length(self) -> int:
        return int(self.word_lengths.max(initial=0))

    def generator_matrices(self) -> np.ndarray:
        """Generators followed by their inverses, as an ``(2g, 2, 2)`` array."""
        gens = [g.matrix for g in self.generators]
        gens += [g.inverse().matrix for g in self.generators]
        return np.array(gens)

    def to_json(self) -> str:
        return json.dumps({
            "generators": [[g.a, g.b, g.c, g.d] for g in self.generators],
            "max_word_length": self.max_word_length,
            "max_displacement": self.max_displacement,
            "element_count": self.element_count,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str, cap: int = 500_000) -> "GroupEnumeration":
        data = json.loads(text)
        gens = [Mobius.from_matrix(np.reshape(g, (2, 2))) for g in data["generators"]]
        group = enumerate_group(gens, data["max_word_length"],
                                max_displacement=data.get("max_displacement"), cap=cap)
        expected = data.get("element_count")
        if expected is not None and expected != group.element_count:
            raise ParameterError(
                f"fixture lists {expected} elements but enumeration gives {group.element_count}")
        return group


def _apply_stack(ms: np.ndarray, z) -> np.ndarray:
    return (ms[:, 0, 0] * z + ms[:, 0, 1]) / (ms[:, 1, 0] * z + ms[:, 1, 1])


# generic base point for deduplication; not fixed by any element of interest
_PROBE = 0.1234567 + 1.0987654j


def _probe_keys(ms: np.ndarray):
    w = _apply_stack(ms, _PROBE)
    zeta = (w - 1j) / (w + 1j)
    return np.rint(zeta.real / _DEDUP_GRID).astype(np.int64), np.rint(zeta.imag / _DEDUP_GRID).astype(np.int64)


def enumerate_group(generators: Sequence[Mobius], max_word_length: int, *,
                    max_displacement: float | None = None,
                    prune_margin: float | None = None,
                    cap: int = 500_000) -> GroupEnumeration:
    """Breadth-first enumeration of group words up to ``max_word_length``.

    With ``max_displacement`` set, only elements moving :data:`BASE_POINT` by
    at most that hyperbolic distance are kept.  The search itself is pruned at
    ``max_displacement + prune_margin`` (default: the octagon circumradius),
    which is enough to reach every kept element through a chain of tiles
    crossed by a geodesic.

    Raises :class:`EnumerationCapError` when more than ``cap`` elements would
    be visited.
    """
    if max_word_length < 0:
        raise ParameterError("max_word_length must be >= 0")
    generators = list(generators)
    gens = np.array([g.matrix for g in generators] + [g.inverse().matrix for g in generators])
    if prune_margin is None:
        prune_margin = octagon_circumradius()
    limit = None if max_displacement is None else max_displacement + prune_margin

    seen: dict[tuple[int, int], list[int]] = {}
    mats = [np.eye(2)]
    lengths = [0]

    def lookup(kx, ky, m):
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for idx in seen.get((kx + dx, ky + dy), ()):
                    if np.max(np.abs(mats[idx] - m)) <= 1e-9 * max(1.0, np.max(np.abs(m))):
                        return True
        return False

    kx, ky = _probe_keys(np.eye(2)[None])
    seen[(int(kx[0]), int(ky[0]))] = [0]
    frontier = np.eye(2)[None]
    for length in range(1, max_word_length + 1):
        if len(frontier) == 0:
            break
        cand = (frontier[:, None, :, :] @ gens[None, :, :, :]).reshape(-1, 2, 2)
        dets = cand[:, 0, 0] * cand[:, 1, 1] - cand[:, 0, 1] * cand[:, 1, 0]
        cand = _canonical_sign_stack(cand / np.sqrt(dets)[:, None, None])
        if limit is not None:
            disp = hyperbolic_distance(_apply_stack(cand, BASE_POINT), BASE_POINT)
            cand = cand[disp <= limit]
        kxs, kys = _probe_keys(cand)
        fresh = []
        for m, a, b in zip(cand, kxs.tolist(), kys.tolist()):
            if lookup(a, b, m):
                continue
            seen.setdefault((a, b), []).append(len(mats))
            mats.append(m)
            lengths.append(length)
            fresh.append(m)
            if len(mats) > cap:
                raise EnumerationCapError(
                    f"group enumeration exceeded cap of {cap} elements at word length {length}")
        frontier = np.array(fresh).reshape(-1, 2, 2)

    mats_arr = np.array(mats)
    lengths_arr = np.array(lengths)
    disp = hyperbolic_distance(_apply_stack(mats_arr, BASE_POINT), BASE_POINT)
    if max_displacement is not None:
        keep = disp <= max_displacement
        mats_arr, lengths_arr, disp = mats_arr[keep], lengths_arr[keep], disp[keep]
    flat = np.round(mats_arr.reshape(-1, 4), 9)
    order = np.lexsort((flat[:, 3], flat[:, 2], flat[:, 1], flat[:, 0], lengths_arr))
    return GroupEnumeration(generators, mats_arr[order], lengths_arr[order],
                            max_word_length, max_displacement, disp[order])


def genus2_group(max_word_length: int = 12, max_displacement: float | None = 9.0,
                 cap: int = 500_000) -> GroupEnumeration:
    """Enumerate the octagon group; see :func:`enumerate_group`."""
    return enumerate_group(genus2_generators(), max_word_length,
                           max_displacement=max_displacement, cap=cap)


# -- fundamental domain -----------------------------------------------------------

def in_fundamental_domain(z, group: GroupEnumeration, tol: float = 1e-12):
    """Dirichlet-domain membership around :data:`BASE_POINT`.

    ``z`` belongs to the domain when no enumerated element moves it strictly
    closer to the centre; ties count as inside (identity cell preferred).
    """
    z = _check_upper(z)
    scalar = z.ndim == 0
    zz = np.atleast_1d(z)
    d0 = hyperbolic_distance(zz, BASE_POINT)
    ms = group.matrices[1:]
    inside = np.ones(zz.shape, dtype=bool)
    # chunk over elements to bound memory
    for start in range(0, len(ms), 512):
        chunk = ms[start:start + 512]
        a, b, c, d = (chunk[:, i, j][:, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
        gz = (a * zz[None, :] + b) / (c * zz[None, :] + d)
        dg = hyperbolic_distance(gz, BASE_POINT)
        inside &= np.all(d0[None, :] <= dg + tol, axis=0)
    return bool(inside[0]) if scalar else inside


def reduce_to_domain(z, group: GroupEnumeration, max_steps: int = 10_000):
    """Move points into the Dirichlet domain by greedy generator descent.

    Returns ``(z_reduced, g)`` with ``z = g . z_reduced``; ``g`` is an array of
    ``(2, 2)`` matrices matching the shape of ``z``.
    """
    z = _check_upper(z)
    zz = np.atleast_1d(z).astype(complex).copy()
    total = np.broadcast_to(np.eye(2), zz.shape + (2, 2)).copy()
    gens = group.generator_matrices()
    for _ in range(max_steps):
        d0 = hyperbolic_distance(zz, BASE_POINT)
        a, b, c, d = (gens[:, i, j][:, None] for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
        cand = (a * zz[None, :] + b) / (c * zz[None, :] + d)
        dc = hyperbolic_distance(cand, BASE_POINT)
        best = np.argmin(dc, axis=0)
        improve = dc[best, np.arange(zz.size)] < d0 - 1e-13
        if not np.any(improve):
            break
        idx = np.nonzero(improve)[0]
        g = gens[best[idx]]
        zz[idx] = cand[best[idx], idx]
        # z_old = g^{-1} z_new, accumulate total with z = total . z_reduced
        ginv = np.linalg.inv(g)
        total[idx] = total[idx] @ ginv
    else:  # pragma: no cover - descent always terminates for a discrete group
        raise ArithmeticError("domain reduction did not terminate")
    if np.ndim(z) == 0:
        return complex(zz[0]), total[0]
    return zz.reshape(np.shape(z)), total.reshape(np.shape(z) + (2, 2))


def images_of_base_point(group: GroupEnumeration, elements: Iterable[int] | None = None):
    ms = group.matrices if elements is None else group.matrices[list(elements)]
    return _apply_stack(ms, BASE_POINT)
