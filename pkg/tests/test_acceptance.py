"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the verdict lines are printed
even when output capture is on) or directly with
``python tests/test_acceptance.py``.
"""
import itertools
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from geoquant import fuchsian
from geoquant import kernel as K
from geoquant import observables as O
from geoquant import semiclassics as S
from geoquant import toeplitz as T
from geoquant.cli import random_points
from geoquant.conventions import DEFAULT
from geoquant.geometry import Geometry, build_quadrature, constant_field
from geoquant.hilbert import TruncationParams, basis_sections, gram, torus_dressed_sections, torus_norm

SPHERE = Geometry.sphere()
PLANE = Geometry.plane()
SEED = 12345


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n:2d} {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def g2():
    t0 = time.perf_counter()
    group = fuchsian.genus2_group(max_word_length=12, max_displacement=9.0)
    return Geometry.genus2(group), time.perf_counter() - t0


def test_criterion_01_sphere_density(verdict):
    rng = np.random.default_rng(SEED)
    x = random_points(SPHERE, 50, rng)
    z = random_points(SPHERE, 50, rng)
    rel, kerr = 0.0, 0.0
    for k in range(1, 33):
        eps = K.coherent_density(SPHERE, k, x)
        rel = max(rel, float(np.max(np.abs(eps - (k + 1)) / (k + 1))))
        k0 = K.kernel_values(SPHERE, k, np.zeros_like(z), z)
        kerr = max(kerr, float(np.max(np.abs(k0 - (k + 1)))))
    verdict(1, rel < 1e-10 and kerr < 1e-12,
            f"sphere eps=k+1: max rel err {rel:.2e} (<1e-10); K(0,z)=k+1: max err {kerr:.2e} (<1e-12)")


def test_criterion_02_plane_two_point(verdict):
    rng = np.random.default_rng(SEED)
    x = random_points(PLANE, 100, rng)
    y = random_points(PLANE, 100, rng)
    # holomorphic coordinate z = w / sqrt2
    zx, zy = x / math.sqrt(2), y / math.sqrt(2)
    err = 0.0
    for k in range(1, 17):
        psi = K.two_point(PLANE, k, x, y)
        err = max(err, float(np.max(np.abs(psi - np.exp(-k * np.abs(zx - zy) ** 2)))))
    verdict(2, err < 1e-10, f"plane psi=exp(-k|z-w|^2) on 100 pairs, k=1..16: max err {err:.2e} (<1e-10)")


def test_criterion_03_gram(verdict):
    q = build_quadrature(SPHERE, 200)
    s_err = max(gram(basis_sections(SPHERE, k), q).max_deviation for k in range(1, 17))
    tor = Geometry.torus(1j)
    qt = build_quadrature(tor, 128)
    tp = TruncationParams(theta_tail_tol=1e-12)
    t_err = max(gram(basis_sections(tor, k, tp), qt).max_deviation for k in range(1, 9))
    verdict(3, s_err < 1e-8 and t_err < 1e-6,
            f"Gram: sphere k<=16 res 200 {s_err:.2e} (<1e-8); torus k<=8 res 128 {t_err:.2e} (<1e-6)")


def test_criterion_04_torus_norms(verdict):
    worst_ratio, worst_abs = 0.0, 0.0
    for lam in (1j, 0.3 + 1.1j):
        q = build_quadrature(Geometry.torus(lam), 128)
        for k in range(1, 9):
            psi = torus_dressed_sections(lam, k, q.nodes, 1e-12)
            norms = q.integrate(np.abs(psi.T) ** 2)
            j = np.arange(k)
            ratio = norms / norms[0]
            worst_ratio = max(worst_ratio, float(np.max(np.abs(ratio / np.exp(2 * math.pi * j ** 2 * lam.imag / k) - 1))))
            worst_abs = max(worst_abs, float(np.max(np.abs(norms / torus_norm(lam, k, j) - 1))))
    verdict(4, worst_ratio < 1e-6 and worst_abs < 1e-6,
            f"torus norm ratios rel err {worst_ratio:.2e} (<1e-6); |psi_j|^2 vs N_kj rel err {worst_abs:.2e} (<1e-6)")


def test_criterion_05_normalization(verdict, g2):
    geom2, _ = g2
    rng = np.random.default_rng(SEED)
    out = {}
    cases = [(SPHERE, 8, 200, 1e-7), (Geometry.torus(1j), 4, 128, 1e-5), (geom2, 2, 160, 1e-2)]
    for geom, k, res, tol in cases:
        q = build_quadrature(geom, res)
        be = K.backend_for(geom, k)
        xs = random_points(geom, 10, rng)
        err = max(abs(K.two_point_normalization(geom, k, x, q, backend=be) - 1) for x in xs)
        out[geom.name] = (err, tol)
    ok = all(e < t for e, t in out.values())
    verdict(5, ok, "int psi dmu = 1: " + "; ".join(f"{n} {e:.2e} (<{t:g})" for n, (e, t) in out.items()))


def test_criterion_06_genus2(verdict, g2):
    t0 = time.perf_counter()
    geom, t_enum = g2
    group = geom.group
    q = build_quadrature(geom, 160)
    traces = {}
    for k in (2, 3, 4):
        be = K.PoincareBackend(geom, k)
        traces[k] = float(q.integrate(be.density(q.nodes)))
    trace_err = max(abs(v - (2 * k - 1)) / (2 * k - 1) for k, v in traces.items())
    rng = np.random.default_rng(SEED)
    xs, ys = random_points(geom, 5, rng), random_points(geom, 5, rng)
    be = K.PoincareBackend(geom, 2)
    idem = max(K.kernel_idempotence_residual(geom, 2, x, y, q, backend=be) for x, y in zip(xs, ys))
    elapsed = time.perf_counter() - t0 + t_enum
    ok = trace_err < 1e-2 and idem < 1e-2 and elapsed < 600 and group.max_word_length >= 10
    verdict(6, ok, "genus 2 (word length bound {}, {} elements): traces {} rel err {:.2e} (<1e-2); "
            "idempotence {:.2e} (<1e-2); runtime {:.1f}s (<600s)".format(
                group.max_word_length, group.element_count,
                ", ".join(f"k={k}:{v:.6f}" for k, v in traces.items()), trace_err, idem, elapsed))


def test_criterion_07_toeplitz(verdict):
    q = build_quadrature(SPHERE, 60)
    ev = T.toeplitz_matrix(SPHERE, 2, O.sphere_height(), q).eigenvalues()
    ev_err = float(np.max(np.abs(ev - [0.25, 0.5, 0.75])))
    unit_err = max(float(np.max(np.abs(T.toeplitz_matrix(SPHERE, k, constant_field(1.0), q).entries - np.eye(k + 1))))
                   for k in range(1, 17))
    rng = np.random.default_rng(SEED)
    tr_err = 0.0
    for k in (2, 5, 9):
        a = rng.normal(size=(k + 1, k + 1)) + 1j * rng.normal(size=(k + 1, k + 1))
        A = T.OperatorMatrix((a + np.conj(a).T) / 2, k, "sphere")
        tr_err = max(tr_err, T.trace_identity_residual(A, SPHERE, k, q))
    verdict(7, ev_err < 1e-7 and unit_err < 1e-8 and tr_err < 1e-7,
            f"height spectrum at k=2 err {ev_err:.2e} (<1e-7); Q(1)=I err {unit_err:.2e} (<1e-8); "
            f"trace identity {tr_err:.2e} (<1e-7)")


def test_criterion_08_tuynman(verdict):
    q = build_quadrature(SPHERE, 300)
    worst, disc = 0.0, math.inf
    for f in (O.sphere_height(), O.sphere_x1()):
        for k in range(2, 9):
            b = basis_sections(SPHERE, k)
            good = T.tuynman_residual(SPHERE, k, f, q, basis=b)
            worst = max(worst, good)
            for c, lap in itertools.product((1, -1), repeat=2):
                conv = replace(DEFAULT, connection_sign=c, laplacian_sign=lap)
                if conv == DEFAULT:
                    continue
                bad = T.tuynman_residual(SPHERE, k, f, q, basis=b, conventions=conv)
                disc = min(disc, bad / max(good, 1e-300))
    verdict(8, worst < 1e-5 and disc > 100,
            f"Tuynman residual k=2..8 res 300 {worst:.2e} (<1e-5); wrong-sign discrimination {disc:.2e} (>100)")


def test_criterion_09_semiclassics(verdict):
    ks = [8, 16, 32, 64, 128]
    x = 0.3 + 0.1j
    slopes = {name: S.sweep(SPHERE, "delta", ks, x, O.get(SPHERE, name)).fitted_slope for name in ("x1", "quad")}
    conc = 0.0
    for k in (1, 4, 16, 64):
        for r in (0.1, 0.5, 1.0):
            c = S.concentration_integral(PLANE, k, 0.2 - 0.3j, r, resolution=48)
            conc = max(conc, abs(c - (1 - math.exp(-k * r * r / 2))))
    ok = all(-1.3 <= s <= -0.7 for s in slopes.values()) and conc < 1e-6
    verdict(9, ok, "delta-test slopes " + ", ".join(f"{n}:{s:.3f}" for n, s in slopes.items())
            + f" (in [-1.3,-0.7]); plane concentration err {conc:.2e} (<1e-6)")


def test_criterion_10_properties(verdict):
    rng = np.random.default_rng(SEED)
    geoms = [SPHERE, Geometry.torus(1j), Geometry.torus(0.3 + 1.1j), PLANE]
    peaking = all(K.maximal_peaking_check(g, 4, random_points(g, 1, rng)[0], trials=1000, rng=rng) for g in geoms)
    margin = math.inf
    for g in geoms:
        be = K.backend_for(g, 4, points=(np.array([2.5 + 2.5j]),))
        d = be.basis.d_k
        for _ in range(20):
            c = rng.normal(size=d) + 1j * rng.normal(size=d)
            margin = min(margin, K.basic_inequality_margin(g, 4, c, random_points(g, 20, rng), backend=be))
    cov, eta = 0.0, 0.0
    for g, res in ((SPHERE, 40), (Geometry.torus(1j), 64)):
        q = build_quadrature(g, res)
        x = random_points(g, 1, rng)[0]
        e = K.rawnsley_state(g, 4, x)
        phase, mod = 0.7, 1.3
        ec = K.rawnsley_state(g, 4, x, phase, mod)
        cov = max(cov, float(np.max(np.abs(ec - np.conj(mod * np.exp(1j * phase)) ** -4 * e))))
        eta = max(eta, abs(K.rawnsley_eta(g, x, q, phase, mod) - float(K.coherent_density(g, 1, x))))
    smin = min(K.select_coherent_basis(g, k, random_points(g, 40, rng)).min_singular_value
               for g in geoms[:3] for k in (1, 3, 6))
    ok = peaking and margin >= -1e-9 and cov < 1e-12 and eta < 1e-9 and smin > 1e-8
    verdict(10, ok, f"maximal peaking (1000 trials) {peaking}; basic inequality margin {margin:.2e} (>=0); "
            f"Rawnsley covariance {cov:.2e}; eta-eps1 {eta:.2e}; coherent basis min sv {smin:.2e} (>1e-8)")


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-q"]))
