"""Small hand-checkable values for each public function."""
import math

import numpy as np
import pytest

from geoquant import fuchsian
from geoquant import geometry as G
from geoquant import hilbert as H
from geoquant import kernel as K
from geoquant import observables as O
from geoquant import semiclassics as S
from geoquant import toeplitz as T
from geoquant.cli import random_points
from geoquant.errors import ParameterError
from geoquant.geometry import Geometry, build_quadrature, constant_field

SPHERE = Geometry.sphere()
PLANE = Geometry.plane()
SQUARE = Geometry.torus(1j)
R2 = math.sqrt(2)


# -- geometry ----------------------------------------------------------------------

def test_liouville_densities():
    assert float(G.liouville_density(SPHERE, 0j)) == pytest.approx(1 / math.pi, rel=1e-14)
    assert float(G.liouville_density(PLANE, 1.7 - 0.3j)) == pytest.approx(1 / (2 * math.pi), rel=1e-14)


def test_hermitian_weights(small_group):
    # sphere chart point z = 1 at k = 2: (1 + 1)^-2
    assert float(G.hermitian_weight(SPHERE, 2, 1 + 0j)) == pytest.approx(0.25)
    assert float(G.hermitian_weight(SQUARE, 5, 0.3 + 0.7j)) == pytest.approx(1.0)
    assert float(G.hermitian_weight(Geometry.genus2(small_group), 1, 1j)) == pytest.approx(1.0)


def test_potential_values():
    # plane, holomorphic z = 1 (chart w = sqrt2): dz coefficient -i zbar / 2, dzbar coefficient i z / 2
    a, b = G.symplectic_potential(PLANE, np.array([R2 + 0j]))
    assert complex(a[0]) == pytest.approx(-0.5j) and complex(b[0]) == pytest.approx(0.5j)
    a, b = G.symplectic_potential(SPHERE, np.array([0j]))
    assert abs(a[0]) == 0 and abs(b[0]) == 0


@pytest.mark.parametrize("geom", [PLANE, SPHERE, SQUARE], ids=lambda g: g.name)
def test_d_tau_is_omega_at_100_points(geom, rng):
    x = rng.uniform(-1.5, 1.5, 100) + 1j * rng.uniform(-1.5, 1.5, 100)
    h = 1e-5
    qu = (G.potential_uv(geom, x + h)[1] - G.potential_uv(geom, x - h)[1]) / (2 * h)
    pv = (G.potential_uv(geom, x + 1j * h)[0] - G.potential_uv(geom, x - 1j * h)[0]) / (2 * h)
    assert np.max(np.abs(qu - pv - G.omega_density(geom, x))) < 1e-6


def test_laplacian_values():
    # flat plane in chart units: Delta(u^2 + v^2) = -4 with the positive (geometer's) Laplacian
    f = G.ScalarField(lambda w: np.abs(w) ** 2)
    assert float(G.metric_laplacian(PLANE, f, np.array([0.3 + 0.2j]))[0]) == pytest.approx(-4.0, rel=1e-6)
    for geom in (PLANE, SPHERE, SQUARE):
        assert abs(float(G.metric_laplacian(geom, constant_field(2.0), np.array([0.1 + 0.1j]))[0])) < 1e-8


def test_laplacian_against_stencil():
    # sphere, f = 1/(1+|z|^2) at z = 0 against a 5-point stencil with a different step
    fn = lambda w: 1 / (1 + np.abs(w) ** 2)  # noqa: E731
    h = 2e-4
    stencil = (fn(h) + fn(-h) + fn(1j * h) + fn(-1j * h) - 4 * fn(0j)) / h ** 2
    expected = -stencil / float(G.omega_density(SPHERE, 0j))
    got = float(G.metric_laplacian(SPHERE, G.ScalarField(fn), np.array([0j]))[0])
    assert got == pytest.approx(expected, abs=1e-6)


def test_quadrature_totals(small_group):
    assert build_quadrature(SPHERE, 100).total == pytest.approx(1.0, abs=1e-10)
    assert build_quadrature(SQUARE, 64).total == pytest.approx(1.0, abs=1e-10)
    # Gauss-Bonnet: hyperbolic area 4 pi (g - 1), Liouville volume area / 2 pi
    assert build_quadrature(Geometry.genus2(small_group), 200).total == pytest.approx(2.0, abs=1e-3)


def test_distance_values(small_group):
    geom = Geometry.genus2(small_group)
    d = float(G.geodesic_distance(geom, 1j, 2j, reduce=False))
    assert d == pytest.approx(math.acosh(5 / 4), rel=1e-14)
    for geom in (PLANE, SPHERE, SQUARE):
        assert float(G.geodesic_distance(geom, 0.3 + 0.2j, 0.3 + 0.2j)) < 1e-7


def test_torus_distance_brute_force():
    x, y = 0j, 0.5 + 0.5j
    flat = min(abs(y - x + m + n * 1j) for m in (-1, 0, 1) for n in (-1, 0, 1))
    assert float(G.geodesic_distance(SQUARE, x, y)) == pytest.approx(flat * math.sqrt(2 * math.pi), rel=1e-12)


# -- group ---------------------------------------------------------------------------

def test_mobius_values():
    assert fuchsian.mobius_apply(np.eye(2), 1 + 2j) == 1 + 2j
    s = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert fuchsian.mobius_apply(s, 1j) == pytest.approx(1j)
    assert fuchsian.automorphy_factor(np.eye(2), 3 + 1j) == 1
    assert fuchsian.automorphy_factor(s, 2j) == pytest.approx(2j)


def _random_sl2(rng, n):
    m = rng.normal(size=(n, 2, 2))
    det = np.linalg.det(m)
    m[det < 0, 0] *= -1
    return m / np.sqrt(np.abs(np.linalg.det(m)))[:, None, None]


def test_cocycle_and_im_at_100_triples(rng):
    gs, hs = _random_sl2(rng, 100), _random_sl2(rng, 100)
    z = rng.uniform(-2, 2, 100) + 1j * rng.uniform(0.1, 3, 100)
    for g, h, zz in zip(gs, hs, z):
        hz = fuchsian.mobius_apply(h, zz)
        lhs = fuchsian.automorphy_factor(g @ h, zz)
        rhs = fuchsian.automorphy_factor(g, hz) * fuchsian.automorphy_factor(h, zz)
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))
        gz = fuchsian.mobius_apply(g, zz)
        assert gz.imag == pytest.approx(zz.imag / abs(fuchsian.automorphy_factor(g, zz)) ** 2, rel=1e-12)


def test_octagon_images_equidistant(small_group):
    imgs = fuchsian.images_of_base_point(small_group, np.nonzero(small_group.word_lengths == 1)[0])
    assert len(imgs) == 8
    d = fuchsian.hyperbolic_distance(imgs, 1j)
    assert np.ptp(d) < 1e-9
    pair = np.abs(imgs[:, None] - imgs[None, :]) + np.eye(8)
    assert pair.min() > 1e-6


def test_counts_monotone():
    counts = [fuchsian.genus2_group(L, None).element_count for L in range(5)]
    assert counts[:2] == [1, 9]
    assert all(b > a for a, b in zip(counts, counts[1:]))


def test_domain_membership(small_group):
    assert fuchsian.in_fundamental_domain(1j, small_group)
    for g in small_group.generators:
        assert not fuchsian.in_fundamental_domain(g(1j), small_group)


def test_tiling_unique_representative(small_group, rng):
    z = rng.uniform(-2, 2, 1000) + 1j * rng.uniform(0.2, 3, 1000)
    ms = small_group.matrices
    rc = fuchsian.octagon_circumradius()
    for zz in z:
        imgs = (ms[:, 0, 0] * zz + ms[:, 0, 1]) / (ms[:, 1, 0] * zz + ms[:, 1, 1])
        near = imgs[fuchsian.hyperbolic_distance(imgs, 1j) <= rc + 1e-9]
        loose = fuchsian.in_fundamental_domain(near, small_group, tol=1e-9)
        strict = fuchsian.in_fundamental_domain(near, small_group, tol=-1e-9)
        assert loose.sum() >= 1 and strict.sum() <= 1


# -- Hilbert spaces --------------------------------------------------------------------

def test_sphere_basis_coefficients():
    b = H.basis_sections(SPHERE, 2)
    assert np.allclose(b.values(np.array([1 + 0j]))[0], [math.sqrt(3), math.sqrt(6), math.sqrt(3)])
    assert b.values(np.array([0j]))[0, 0] == pytest.approx(math.sqrt(3))


def test_torus_section_norms():
    b = H.basis_sections(SQUARE, 3)
    g = H.gram(b, build_quadrature(SQUARE, 128))
    assert np.allclose(np.diag(g.entries).real, 1.0, atol=1e-8)


def test_theta_quasi_periodicity_50_points(rng):
    w = rng.uniform(0, 1, 50) + 1j * rng.uniform(0, 1, 50)
    a = np.abs(H.torus_dressed_sections(1j, 3, w))
    assert np.max(np.abs(np.abs(H.torus_dressed_sections(1j, 3, w + 1)) - a)) < 1e-9


def test_inner_products_sphere():
    b = H.basis_sections(SPHERE, 2)
    q = build_quadrature(SPHERE, 200)
    s = b.sections
    assert H.inner_product(s[0], s[0], SPHERE, 2, q) == pytest.approx(1.0, abs=1e-8)
    assert abs(H.inner_product(s[0], s[1], SPHERE, 2, q)) < 1e-8
    zero = lambda x: np.zeros(np.shape(x), dtype=complex)  # noqa: E731
    assert H.inner_product(zero, zero, SPHERE, 2, q) == 0


def test_gram_small_cases():
    q = build_quadrature(SPHERE, 200)
    assert H.gram(H.basis_sections(SPHERE, 4), q).max_deviation < 1e-8
    g = H.gram(H.basis_sections(SQUARE, 3, H.TruncationParams(theta_tail_tol=1e-12)), build_quadrature(SQUARE, 128))
    assert g.max_deviation < 1e-6
    assert np.array_equal(g.entries, np.conj(g.entries).T)


def test_orthonormalize_identity_and_rescale():
    q = build_quadrature(SPHERE, 40)
    b = H.basis_sections(SPHERE, 3)
    ortho = H.orthonormalize(b, H.gram(b, q))
    assert np.max(np.abs(ortho.mixing - np.eye(4))) < 1e-6
    scale = np.eye(4)
    scale[1, 1] = 2.0
    fixed = H.orthonormalize(H.with_mixing(b, scale), H.gram(H.with_mixing(b, scale), q))
    assert np.allclose(np.diag(H.gram(fixed, q).entries).real, 1.0, atol=1e-12)


# -- kernel ------------------------------------------------------------------------------

def test_kernel_values(rng):
    z = random_points(SPHERE, 5, rng)
    assert np.allclose(K.kernel_values(SPHERE, 3, np.zeros(5), z), 4.0)
    x = random_points(SQUARE, 5, rng)
    eps = K.coherent_density(SQUARE, 3, x)
    assert np.all(eps >= 0) and np.isrealobj(eps)


def test_reproducing_against_section(rng):
    b = H.basis_sections(SPHERE, 2)
    q = build_quadrature(SPHERE, 40)
    y = q.nodes
    w = G.hermitian_weight(SPHERE, 2, y)
    theta1 = b.values(y)[:, 1]
    for x in random_points(SPHERE, 20, rng):
        kx = K.kernel_values(SPHERE, 2, np.full(y.shape, x), y)
        val = q.integrate(w * np.conj(kx) * theta1)
        assert abs(val - b.values(np.array([x]))[0, 1]) < 1e-7


def test_density_values(small_group):
    assert float(K.coherent_density(SPHERE, 5, 0.4 + 0.1j)) == pytest.approx(6.0)
    assert float(K.coherent_density(PLANE, 7, -0.3 + 0.8j)) == pytest.approx(7.0, rel=1e-10)


def test_coherent_state_at_origin(rng):
    cs = K.coherent_state(SPHERE, 2, 0j)
    assert np.allclose(cs.coefficients, [math.sqrt(3), 0, 0])
    assert np.allclose(cs.normalized().coefficients, [1, 0, 0])
    b = H.basis_sections(SPHERE, 2)
    for x in random_points(SPHERE, 5, rng):
        cs = K.coherent_state(SPHERE, 2, x)
        assert np.sum(np.abs(cs.coefficients) ** 2) == pytest.approx(float(K.coherent_density(SPHERE, 2, x)), rel=1e-10)
        # <Phi_x, theta_i> = theta_i(x) in the trivialisation
        sw = math.sqrt(float(G.hermitian_weight(SPHERE, 2, x)))
        assert np.allclose(np.conj(cs.coefficients) / sw, b.values(np.array([x]))[0], rtol=1e-7)


def test_two_point_values():
    assert float(K.two_point(SPHERE, 2, 0j, 1 + 0j)) == pytest.approx(0.25)
    # |z - w|^2 = 1 in the holomorphic coordinate
    assert float(K.two_point(PLANE, 3, 0j, R2 + 0j)) == pytest.approx(math.exp(-3), rel=1e-12)
    assert float(K.two_point(SQUARE, 2, 0.3 + 0.4j, 0.3 + 0.4j)) == pytest.approx(1.0)


def test_normalization_values(small_group):
    assert K.two_point_normalization(SPHERE, 4, 0.3 + 0.1j, build_quadrature(SPHERE, 200)) == pytest.approx(1.0, abs=1e-7)
    assert K.two_point_normalization(SQUARE, 3, 0.3 + 0.1j, build_quadrature(SQUARE, 64)) == pytest.approx(1.0, abs=1e-5)


def test_genus2_values(genus2_group, rng):
    geom = Geometry.genus2(genus2_group)
    q = build_quadrature(geom, 160)
    be = K.PoincareBackend(geom, 4)
    assert q.integrate(be.density(q.nodes)) == pytest.approx(7.0, rel=1e-2)
    assert K.two_point_normalization(geom, 4, 0.05 + 1.1j, q, backend=be) == pytest.approx(1.0, abs=1e-2)
    near = 1j * np.exp(0.3 * (rng.uniform(size=10) - 0.5)) + 0.1 * (rng.uniform(size=10) - 0.5)
    for x, y in zip(near[:5], near[5:]):
        assert K.kernel_idempotence_residual(geom, 4, x, y, q, backend=be) < 1e-2


def test_rawnsley_values():
    x = 0.2 - 0.4j
    assert np.allclose(K.rawnsley_state(SPHERE, 3, x), K.coherent_state(SPHERE, 3, x).coefficients)
    phi = 0.9
    assert np.allclose(K.rawnsley_state(SPHERE, 3, x, fiber_phase=phi),
                       np.exp(3j * phi) * K.rawnsley_state(SPHERE, 3, x))
    q = build_quadrature(SPHERE, 20)
    assert abs(K.rawnsley_eta(SPHERE, x, q) - 2.0) < 1e-9


def _theta_zero():
    # the single level-one theta section on the square torus vanishes at (1 + i) / 2
    return 0.5 + 0.5j


def test_peak_identity_values():
    assert K.peak_identity_residual(SPHERE, 3, 0.1 + 0.3j, build_quadrature(SPHERE, 30)) < 1e-9
    assert K.peak_identity_residual(SQUARE, 2, 0.1 + 0.3j, build_quadrature(SQUARE, 64)) < 1e-7
    assert float(K.coherent_density(SQUARE, 1, _theta_zero())) < 1e-20
    with pytest.raises(ParameterError):
        K.peak_identity_residual(SQUARE, 1, _theta_zero(), build_quadrature(SQUARE, 32))
    psi, flag = K.two_point(SQUARE, 1, _theta_zero(), 0.1j, return_flag=True)
    assert flag and psi == 0


def test_idempotence_values(rng):
    q = build_quadrature(SPHERE, 40)
    xs, ys = random_points(SPHERE, 10, rng), random_points(SPHERE, 10, rng)
    assert max(K.kernel_idempotence_residual(SPHERE, 2, x, y, q) for x, y in zip(xs, ys)) < 1e-7
    x = xs[0]
    assert K.kernel_idempotence_residual(SPHERE, 2, x, x, q) == pytest.approx(
        abs(K.two_point_normalization(SPHERE, 2, x, q) - 1) * 3, abs=1e-12)


def test_coherent_basis_values(rng):
    cand = random_points(SPHERE, 50, rng)
    sel = K.select_coherent_basis(SPHERE, 2, cand)
    assert len(sel.points) == 3
    perm = rng.permutation(50)
    sel2 = K.select_coherent_basis(SPHERE, 2, cand[perm])
    assert sorted(sel.points, key=lambda c: (c.real, c.imag)) == sorted(sel2.points, key=lambda c: (c.real, c.imag))
    assert sel2.condition_number == pytest.approx(sel.condition_number, rel=1e-10)


def test_maximal_peaking_values():
    assert K.maximal_peaking_check(SPHERE, 3, 0j, trials=1000, rng=0)
    u = H.basis_sections(SPHERE, 3).unit_values(np.array([0.4 + 0.2j]))[0]
    c = np.conj(u)
    assert abs(c @ u) ** 2 == pytest.approx(float(np.sum(np.abs(u) ** 2)) ** 2)
    # a coefficient vector orthogonal to the coherent state vanishes at x
    a = np.array([1, 2, -1, 0.5], dtype=complex)
    a -= (np.conj(c) @ a) / (np.conj(c) @ c) * c
    assert abs(a @ u) < 1e-12


# -- operators -----------------------------------------------------------------------------

def test_toeplitz_values():
    q = build_quadrature(SPHERE, 40)
    assert np.max(np.abs(T.toeplitz_matrix(SPHERE, 3, constant_field(1.0), q).entries - np.eye(4))) < 1e-8
    m = T.toeplitz_matrix(SPHERE, 2, O.sphere_height(), q)
    assert np.allclose(m.entries, np.diag([0.25, 0.5, 0.75]), atol=1e-12)
    assert m.hermiticity_defect() < 1e-10


def test_covariant_symbol_values(rng):
    q = build_quadrature(SPHERE, 40)
    x = random_points(SPHERE, 4, rng)
    assert np.allclose(T.covariant_symbol(T.OperatorMatrix(np.eye(4), 3, "sphere"), SPHERE, 3, x), 1.0)
    b = H.basis_sections(SPHERE, 3)
    y = 0.5 - 0.2j
    uy = b.unit_values(np.array([y]))[0]
    proj = T.OperatorMatrix(np.outer(np.conj(uy), uy) / np.sum(np.abs(uy) ** 2), 3, "sphere")
    got = T.covariant_symbol(proj, SPHERE, 3, x).real
    assert np.allclose(got, K.two_point(SPHERE, 3, x, np.full(4, y)), atol=1e-10)
    m = T.toeplitz_matrix(SPHERE, 2, O.sphere_height(), q)
    assert complex(T.covariant_symbol(m, SPHERE, 2, np.array([0j]))[0]) == pytest.approx(0.25)


def test_trace_identity_values():
    q = build_quadrature(SPHERE, 40)
    assert T.trace_identity_residual(T.OperatorMatrix(np.eye(6), 5, "sphere"), SPHERE, 5, q) < 1e-7
    m = T.toeplitz_matrix(SPHERE, 2, O.sphere_height(), q)
    assert np.trace(m.entries).real == pytest.approx(1.5)
    assert T.trace_identity_residual(m, SPHERE, 2, q) < 1e-7


def test_kostant_souriau_values():
    q = build_quadrature(SPHERE, 40)
    c = T.kostant_souriau_matrix(SPHERE, 3, constant_field(2.5), q)
    assert np.max(np.abs(c.entries - 2.5 * np.eye(4))) < 1e-8
    ks = T.kostant_souriau_matrix(SPHERE, 2, O.sphere_height(), q)
    assert ks.hermiticity_defect() < 1e-6
    assert np.max(np.abs(ks.entries - np.diag(np.diag(ks.entries)))) < 1e-6


def test_tuynman_values():
    q = build_quadrature(SPHERE, 40)
    assert T.tuynman_residual(SPHERE, 3, constant_field(1.0), q) < 1e-12
    qt = build_quadrature(SQUARE, 64)
    f = O.torus_cos(1, 1j)
    x = np.array([0.3 + 0.1j])
    assert f(x)[0] == pytest.approx(math.cos(2 * math.pi * 0.3))
    assert T.tuynman_residual(SQUARE, 3, f, qt) < 1e-4


# -- semiclassics ------------------------------------------------------------------------------

def test_concentration_values():
    for r in (0.2, 0.6, 1.1):
        got = S.concentration_integral(PLANE, 16, 0.1 + 0.1j, r, resolution=32)
        assert got == pytest.approx(1 - math.exp(-16 * r * r / 2), abs=1e-6)
    whole = S.concentration_integral(SPHERE, 8, 0.3 + 0.1j, math.pi / R2, resolution=64)
    assert whole == pytest.approx(1.0, abs=1e-7)
    assert S.concentration_integral(SPHERE, 8, 0.3 + 0.1j, 0.0) == 0.0


def test_concentration_monotone_in_radius():
    vals = [S.concentration_integral(SQUARE, 4, 0.2 + 0.3j, r, resolution=40) for r in np.linspace(0.05, 1.2, 12)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_delta_values():
    q = build_quadrature(SPHERE, 60)
    assert S.delta_test(SPHERE, 4, constant_field(1.0), 0.3 + 0.1j, q) < 1e-7
    x = 0.3 + 0.1j
    errs = []
    for k in (16, 32, 64):
        qk = build_quadrature(SPHERE, S.auto_resolution(SPHERE, k), k=k, center=x)
        errs.append(S.delta_test(SPHERE, k, O.sphere_x1(), x, qk))
    for a, b in zip(errs, errs[1:]):
        assert 1.6 < a / b < 2.4


def test_delta_plane_heat_smoothing():
    k, a, c, x = 5, 0.5, 0.2 - 0.1j, 0.6 + 0.3j
    q = build_quadrature(PLANE, 60, k=k, center=x)
    err = S.delta_test(PLANE, k, O.gaussian(c, a), x, q)
    r2 = abs(x - c) ** 2
    smoothed = k / (k + 2 * a) * math.exp(-a * k * r2 / (k + 2 * a))
    assert err == pytest.approx(abs(smoothed - math.exp(-a * r2)), abs=1e-6)


def test_berezin_values():
    q = build_quadrature(SPHERE, 40)
    assert S.berezin_transform_error(SPHERE, 3, constant_field(1.0), 0.2j, q) < 1e-12
    for k in (2, 7):
        assert S.berezin_transform_error(SPHERE, k, O.sphere_height(), 0j, q) == pytest.approx(1 / (k + 2), abs=1e-12)


@pytest.mark.parametrize("p", [1, 2])
def test_rate_fit_power_laws(p):
    slope, _ = S.rate_fit([(k, 0.7 / k ** p) for k in (8, 16, 32, 64, 128)])
    assert slope == pytest.approx(-p, abs=1e-6)
