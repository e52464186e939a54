"""Command-line entry point: ``geoquant verify | sweep | table``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import calibration, fuchsian
from . import kernel as K
from . import observables
from .errors import ParameterError, RankError
from .geometry import Geometry, build_quadrature
from .hilbert import TruncationParams, basis_sections, gram
from .semiclassics import TESTS, sweep
from .toeplitz import OperatorMatrix, toeplitz_matrix, trace_identity_residual, tuynman_residual

GEOMETRIES = ("plane", "sphere", "torus", "genus2")
TABLE_TARGETS = ("epsilon", "dk", "toeplitz-spectrum")

DEFAULT_TOLERANCES = {
    "gram_identity": {"sphere": 1e-8, "torus": 1e-6, "plane": 1e-8},
    "reproducing": 1e-7,
    "coherent_density": 1e-10,
    "two_point_range": 1e-12,
    "normalization": {"sphere": 1e-7, "torus": 1e-5, "plane": 1e-7, "genus2": 1e-2},
    "peak_identity": {"sphere": 1e-9, "torus": 1e-7, "plane": 1e-9, "genus2": 1e-6},
    "rawnsley_covariance": 1e-12,
    "eta_equals_eps1": 1e-9,
    "trace_identity": 1e-7,
    "toeplitz_unit": 1e-8,
    "tuynman": {"sphere": 1e-5, "torus": 1e-4},
    "maximal_peaking": 1e-9,
    "basic_inequality": 1e-9,
    "coherent_basis": 1e-8,
    "quadrature_volume": 1e-3,
    "trace_dimension": 1e-2,
    "idempotence": 1e-2,
    "hermitian_symmetry": 1e-6,
}


@dataclass
class RunConfig:
    geometry: str = "sphere"
    modulus: complex = 1j
    k: int = 4
    k_min: int = 8
    k_max: int = 128
    resolution: int = 0
    tail_tol: float = 1e-12
    word_length: int = 12
    max_displacement: float = 9.0
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "out"
    test: str = "delta"
    observable: str = ""
    target: str = "epsilon"
    point: complex | None = None
    timings: bool = False

    def validate(self):
        if self.geometry not in GEOMETRIES:
            raise ParameterError(f"unknown geometry {self.geometry!r}; valid: {list(GEOMETRIES)}")
        kmin = 2 if self.geometry == "genus2" else 1
        if self.k < kmin or self.k_min < kmin:
            raise ParameterError(f"k must be >= {kmin} for {self.geometry}")
        if self.k_max < self.k_min:
            raise ParameterError("k-max must be >= k-min")
        if self.resolution and self.resolution < 2:
            raise ParameterError("resolution must be >= 2")
        if self.tail_tol <= 0:
            raise ParameterError("tail-tol must be positive")
        for key, val in self.tolerances.items():
            if not (isinstance(val, (int, float)) and val > 0):
                raise ParameterError(f"tolerance {key} must be positive")
        if complex(self.modulus).imag <= 0:
            raise ParameterError("torus modulus needs positive imaginary part")

    def echo(self) -> dict:
        d = asdict(self)
        d["modulus"] = [complex(self.modulus).real, complex(self.modulus).imag]
        if self.point is not None:
            d["point"] = [complex(self.point).real, complex(self.point).imag]
        return d


def tolerance(cfg: RunConfig, name: str) -> float:
    if name in cfg.tolerances:
        return float(cfg.tolerances[name])
    t = DEFAULT_TOLERANCES[name]
    if isinstance(t, dict):
        return t.get(cfg.geometry, max(t.values()))
    return t


def make_geometry(cfg: RunConfig) -> Geometry:
    if cfg.geometry == "plane":
        return Geometry.plane()
    if cfg.geometry == "sphere":
        return Geometry.sphere()
    if cfg.geometry == "torus":
        return Geometry.torus(cfg.modulus)
    return Geometry.genus2(max_word_length=cfg.word_length, max_displacement=cfg.max_displacement)


def random_points(geom: Geometry, n: int, rng: np.random.Generator) -> np.ndarray:
    if geom.kind == "plane":
        return rng.normal(size=n) + 1j * rng.normal(size=n)
    if geom.kind == "sphere":
        # uniform on the sphere: cos(theta) uniform
        t = rng.uniform(-0.95, 0.95, n)
        return np.sqrt((1 - t) / (1 + t)) * np.exp(2j * math.pi * rng.uniform(size=n))
    if geom.kind == "torus":
        return rng.uniform(size=n) + rng.uniform(size=n) * geom.modulus
    rad = math.tanh(fuchsian.octagon_inradius() / 2)
    zeta = rad * np.sqrt(rng.uniform(size=n)) * np.exp(2j * math.pi * rng.uniform(size=n))
    return 1j * (1 + zeta) / (1 - zeta)


class Recorder:
    def __init__(self):
        self.records = []

    def add(self, name, value, reference, tol, t0, *, mode="abs", note=None):
        value = float(value)
        if mode == "abs":
            ok = abs(value - reference) < tol
        elif mode == "le":
            ok = value <= reference + tol
        elif mode == "gt":
            ok = value > reference
        elif mode == "true":
            ok = bool(value)
        else:
            raise ValueError(mode)
        rec = {"name": name, "status": "pass" if ok else "fail", "value": value,
               "reference": reference, "tolerance": tol,
               "runtime_ms": round((time.perf_counter() - t0) * 1e3, 3)}
        if note:
            rec["note"] = note
        self.records.append(rec)

    @property
    def ok(self) -> bool:
        return all(r["status"] == "pass" for r in self.records)


def _default_resolution(cfg, geom, k):
    if cfg.resolution:
        return cfg.resolution
    return {"sphere": max(200, k + 8), "torus": 128, "plane": 40, "hyperbolic": 160}[geom.kind]


def verify_basis(cfg: RunConfig, geom: Geometry, rec: Recorder, rng):
    k = cfg.k
    trunc = TruncationParams(theta_tail_tol=cfg.tail_tol)
    res = _default_resolution(cfg, geom, k)
    xs = random_points(geom, 5, rng)
    quad = build_quadrature(geom, res, k=k)
    nodes = quad.nodes
    be = K.backend_for(geom, k, truncation=trunc, points=(xs, nodes))
    basis = be.basis

    t0 = time.perf_counter()
    if geom.kind == "plane":
        # a Gauss-Hermite rule of n nodes is exact for the first n/2 monomials
        u = basis.unit_values(nodes)[:, : min(basis.d_k, res // 2)]
        g = np.conj(u).T @ (quad.weights[:, None] * u)
        dev = float(np.max(np.abs(g - np.eye(len(g)))))
    else:
        dev = gram(basis, quad).max_deviation
    rec.add("gram_identity", dev, 0.0, tolerance(cfg, "gram_identity"), t0)

    t0 = time.perf_counter()
    if geom.kind == "plane":
        worst = 0.0
        for x in xs[:3]:
            q = build_quadrature(geom, res, k=k, center=x)
            kx = be.unit_kernel(np.full(q.nodes.shape, x), q.nodes)
            uj = basis.unit_values(q.nodes)[:, :4]
            lhs = (np.conj(kx) * q.weights) @ uj
            worst = max(worst, float(np.max(np.abs(lhs - basis.unit_values(x)[:4]))))
    else:
        kx = be.unit_kernel_matrix(xs, nodes)
        lhs = (np.conj(kx) * quad.weights) @ basis.unit_values(nodes)
        worst = float(np.max(np.abs(lhs - basis.unit_values(xs))))
    rec.add("reproducing", worst, 0.0, tolerance(cfg, "reproducing"), t0)

    t0 = time.perf_counter()
    if geom.kind == "torus":
        # no closed form: eps is only invariant under translations by lattice/k
        integral = float(quad.integrate(be.density(nodes)))
        positive = float(np.min(be.density(xs))) > 0
        value = abs(integral / basis.d_k - 1) if positive else math.inf
        rec.add("coherent_density", value, 0.0, tolerance(cfg, "coherent_density"), t0,
                note=f"integral {integral:.12f} vs d_k = {basis.d_k}; sampled eps > 0")
    else:
        eps = be.density(xs)
        closed = {"sphere": k + 1, "plane": k}[geom.kind]
        rec.add("coherent_density", float(np.max(np.abs(eps / closed - 1))), 0.0,
                tolerance(cfg, "coherent_density"), t0, note=f"closed form {closed}")

    t0 = time.perf_counter()
    ys = random_points(geom, 5, rng)
    psi = K.two_point(geom, k, xs[:, None], ys[None, :], backend=be)
    diag = K.two_point(geom, k, xs, xs, backend=be)
    viol = max(float(np.max(psi - 1, initial=0)), float(np.max(-psi, initial=0)),
               float(np.max(np.abs(diag - 1))))
    rec.add("two_point_range", viol, 0.0, tolerance(cfg, "two_point_range"), t0, mode="le")

    t0 = time.perf_counter()
    worst = 0.0
    for x in xs[:3]:
        q = build_quadrature(geom, res, k=k, center=x)
        worst = max(worst, abs(K.two_point_normalization(geom, k, x, q, backend=be) - 1))
    rec.add("normalization", worst, 0.0, tolerance(cfg, "normalization"), t0)

    t0 = time.perf_counter()
    worst = max(K.peak_identity_residual(geom, k, x, build_quadrature(geom, res, k=k, center=x), backend=be)
                for x in xs[:3])
    rec.add("peak_identity", worst, 0.0, tolerance(cfg, "peak_identity"), t0)

    t0 = time.perf_counter()
    x = xs[0]
    phi, mod = rng.uniform(0, 2 * math.pi), rng.uniform(0.5, 2.0)
    e_q = K.rawnsley_state(geom, k, x, 0.0, 1.0, backend=be)
    e_cq = K.rawnsley_state(geom, k, x, phi, mod, backend=be)
    c = mod * np.exp(1j * phi)
    cov = float(np.max(np.abs(e_cq - np.conj(c) ** (-k) * e_q)) / max(1.0, np.max(np.abs(e_cq))))
    rec.add("rawnsley_covariance", cov, 0.0, tolerance(cfg, "rawnsley_covariance"), t0)

    t0 = time.perf_counter()
    be1 = K.backend_for(geom, 1, truncation=trunc, points=(xs, nodes))
    q1 = build_quadrature(geom, res, k=1, center=x)
    eta = K.rawnsley_eta(geom, x, q1, phi, mod, backend=be1)
    eps1 = float(be1.density(x))
    rec.add("eta_equals_eps1", abs(eta - eps1) / eps1, 0.0, tolerance(cfg, "eta_equals_eps1"), t0)

    if geom.kind != "plane":
        t0 = time.perf_counter()
        d = basis.d_k
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        A = OperatorMatrix(a + np.conj(a).T, k, geom.name, "random")
        rec.add("trace_identity", trace_identity_residual(A, geom, k, quad, backend=be), 0.0,
                tolerance(cfg, "trace_identity"), t0)

        t0 = time.perf_counter()
        one = observables.ScalarField(lambda w: np.ones(np.shape(w)), "one")
        q_one = toeplitz_matrix(geom, k, one, quad, basis=basis)
        rec.add("toeplitz_unit", float(np.max(np.abs(q_one.entries - np.eye(d)))), 0.0,
                tolerance(cfg, "toeplitz_unit"), t0)

        t0 = time.perf_counter()
        fname = cfg.observable or ("height" if geom.kind == "sphere" else "cos1")
        f = observables.get(geom, fname)
        rec.add("tuynman", tuynman_residual(geom, k, f, quad, basis=basis), 0.0,
                tolerance(cfg, "tuynman"), t0, note=f"observable {fname}")

    t0 = time.perf_counter()
    ok = all(K.maximal_peaking_check(geom, k, x, 1000, rng=rng, backend=be,
                                     tol=tolerance(cfg, "maximal_peaking")) for x in xs)
    rec.add("maximal_peaking", ok, True, 0.0, t0, mode="true")

    t0 = time.perf_counter()
    margin = min(K.basic_inequality_margin(geom, k, rng.normal(size=basis.d_k) + 1j * rng.normal(size=basis.d_k),
                                           ys, backend=be) for _ in range(20))
    rec.add("basic_inequality", -margin, 0.0, tolerance(cfg, "basic_inequality"), t0, mode="le")

    if geom.kind == "plane":
        return None  # H_k is infinite dimensional: no finite coherent basis
    t0 = time.perf_counter()
    try:
        sel = K.select_coherent_basis(geom, k, random_points(geom, 4 * basis.d_k + 8, rng), backend=be)
        tol = tolerance(cfg, "coherent_basis")
        rec.add("coherent_basis", sel.min_singular_value, tol, tol, t0, mode="gt",
                note="smallest singular value of the selected states")
    except RankError as exc:
        rec.add("coherent_basis", 0.0, 1.0, tolerance(cfg, "coherent_basis"), t0, note=str(exc))
    return None


def verify_hyperbolic(cfg: RunConfig, geom: Geometry, rec: Recorder, rng):
    k = cfg.k
    res = _default_resolution(cfg, geom, k)
    quad = build_quadrature(geom, res)
    be = K.PoincareBackend(geom, k)

    t0 = time.perf_counter()
    rec.add("quadrature_volume", quad.total, geom.volume, tolerance(cfg, "quadrature_volume"), t0)

    t0 = time.perf_counter()
    trace = float(quad.integrate(be.density(quad.nodes)))
    d = 2 * k - 1
    rec.add("trace_dimension", abs(trace - d) / d, 0.0, tolerance(cfg, "trace_dimension"), t0,
            note=f"integral {trace:.8f} vs dimension {d}")

    xs = random_points(geom, 3, rng)
    ys = random_points(geom, 3, rng)
    t0 = time.perf_counter()
    kxy = be.unit_kernel(xs, ys)
    kyx = be.unit_kernel(ys, xs)
    rec.add("hermitian_symmetry", float(np.max(np.abs(kxy - np.conj(kyx)))), 0.0,
            tolerance(cfg, "hermitian_symmetry"), t0)

    t0 = time.perf_counter()
    psi = K.two_point(geom, k, xs[:, None], ys[None, :], backend=be)
    viol = max(float(np.max(psi - 1, initial=0)), float(np.max(-psi, initial=0)))
    rec.add("two_point_range", viol, 0.0, tolerance(cfg, "two_point_range"), t0, mode="le")

    t0 = time.perf_counter()
    worst = max(abs(K.two_point_normalization(geom, k, x, quad, backend=be) - 1) for x in xs)
    rec.add("normalization", worst, 0.0, tolerance(cfg, "normalization"), t0)

    t0 = time.perf_counter()
    worst = max(K.kernel_idempotence_residual(geom, k, x, y, quad, backend=be) for x, y in zip(xs, ys))
    rec.add("idempotence", worst, 0.0, tolerance(cfg, "idempotence"), t0)

    t0 = time.perf_counter()
    rec.add("peak_identity", K.peak_identity_residual(geom, k, xs[0], quad, backend=be), 0.0,
            tolerance(cfg, "peak_identity"), t0)
    return be.report().as_dict()


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    geom = make_geometry(cfg)
    conv = calibration.calibrate(cfg.geometry, cfg.modulus, geom.group)
    calibration.check_frozen(conv)
    rec = Recorder()
    if geom.basis_mode:
        diag = verify_basis(cfg, geom, rec, rng)
    else:
        diag = verify_hyperbolic(cfg, geom, rec, rng)
    report = {"config": cfg.echo(), "conventions": conv, "tests": rec.records,
              "truncation": diag, "status": "pass" if rec.ok else "fail"}
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "conventions.json").write_text(calibration.dumps(conv) + "\n")
    return report, 0 if rec.ok else 1


def _k_values(cfg: RunConfig) -> list[int]:
    ks, k = [], cfg.k_min
    while k <= cfg.k_max:
        ks.append(k)
        k *= 2
    return ks


def _default_point(geom: Geometry) -> complex:
    if geom.kind == "torus":
        return 0.3 + 0.2 * geom.modulus
    return {"sphere": 0.3 + 0.1j, "plane": 0.2 - 0.1j, "hyperbolic": 0.1 + 1.1j}[geom.kind]


def cmd_sweep(cfg: RunConfig):
    cfg.validate()
    if cfg.test not in TESTS:
        raise ParameterError(f"unknown test {cfg.test!r}; valid: {list(TESTS)}")
    geom = make_geometry(cfg)
    if cfg.test in ("delta", "berezin"):
        name = cfg.observable or {"sphere": "x1", "torus": "cos1", "plane": "gauss", "hyperbolic": "bump"}[geom.kind]
        f = observables.get(geom, name)
    else:
        f = None
    if cfg.test == "berezin" and not geom.basis_mode:
        raise ParameterError("berezin sweeps need basis evaluators")
    ks = _k_values(cfg)
    if len(ks) < 4:
        raise ParameterError(f"sweep needs at least 4 k values, got {ks}")
    x = cfg.point if cfg.point is not None else _default_point(geom)
    result = sweep(geom, cfg.test, ks, x, f, base_resolution=cfg.resolution)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"sweep_{cfg.geometry}_{result.test.replace(':', '_')}"
    (out / f"{stem}.csv").write_text(result.to_csv(cfg.timings))
    (out / f"{stem}.json").write_text(json.dumps(result.as_dict(), indent=2, sort_keys=True) + "\n")
    (out / f"{stem}.dat").write_text(result.plot_data())
    return result


def _table_rows(cfg: RunConfig):
    geom = make_geometry(cfg)
    rng = np.random.default_rng(cfg.seed)
    ks = list(range(cfg.k_min, cfg.k_max + 1))
    if cfg.target == "epsilon":
        header = ["geometry", "k", "epsilon", "closed_form"]
        rows = []
        for k in ks:
            if geom.kind == "hyperbolic":
                x = random_points(geom, 1, rng)[0]
                eps = float(K.PoincareBackend(geom, k).density(x))
                closed = ""
            else:
                x = random_points(geom, 1, rng)[0]
                eps = float(K.coherent_density(geom, k, x))
                closed = {"sphere": k + 1, "plane": k, "torus": k}[geom.kind]
            rows.append([geom.name, k, f"{eps:.12g}", closed])
        return header, rows
    if cfg.target == "dk":
        header = ["geometry", "k", "d_k", "integral_eps"]
        rows = []
        for k in ks:
            if geom.kind == "plane":
                rows.append([geom.name, k, "inf", ""])
                continue
            quad = build_quadrature(geom, _default_resolution(cfg, geom, k), k=k)
            if geom.kind == "hyperbolic":
                integral = float(quad.integrate(K.PoincareBackend(geom, k).density(quad.nodes)))
                d = 2 * k - 1
            else:
                b = basis_sections(geom, k, TruncationParams(theta_tail_tol=cfg.tail_tol))
                integral = float(quad.integrate(K.BasisBackend(b).density(quad.nodes)))
                d = b.d_k
            rows.append([geom.name, k, d, f"{integral:.10f}"])
        return header, rows
    if cfg.target == "toeplitz-spectrum":
        if geom.kind != "sphere":
            raise ParameterError("toeplitz-spectrum table is defined for the sphere")
        f = observables.get(geom, cfg.observable or "height")
        header = ["geometry", "k", "j", "eigenvalue", "closed_form"]
        rows = []
        for k in ks:
            quad = build_quadrature(geom, max(k + 8, cfg.resolution or 0))
            ev = toeplitz_matrix(geom, k, f, quad).eigenvalues()
            for j, e in enumerate(ev):
                closed = f"{(j + 1) / (k + 2):.12g}" if f.name == "height" else ""
                rows.append([geom.name, k, j, f"{e:.12g}", closed])
        return header, rows
    raise ParameterError(f"unknown table target {cfg.target!r}; valid: {list(TABLE_TARGETS)}")


def cmd_table(cfg: RunConfig) -> str:
    cfg.validate()
    header, rows = _table_rows(cfg)
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    text = "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n" for r in cells)
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(cells)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"table_{cfg.geometry}_{cfg.target}"
    (out / f"{stem}.txt").write_text(text)
    (out / f"{stem}.csv").write_text(buf.getvalue())
    return text


# -- argument handling --------------------------------------------------------------------

def _complex(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from exc


def _tol(s: str):
    key, _, val = s.partition("=")
    if not key or not val:
        raise argparse.ArgumentTypeError("tolerance must look like KEY=VALUE")
    try:
        return key, float(val)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance value {val!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields (flags override it)")
    common.add_argument("--geometry", choices=GEOMETRIES)
    common.add_argument("--modulus", type=_complex, help="torus modulus, e.g. 1j or 0.5+1.2j")
    common.add_argument("--k", type=int)
    common.add_argument("--k-min", type=int, dest="k_min")
    common.add_argument("--k-max", type=int, dest="k_max")
    common.add_argument("--resolution", type=int)
    common.add_argument("--tail-tol", type=float, dest="tail_tol")
    common.add_argument("--word-length", type=int, dest="word_length")
    common.add_argument("--max-displacement", type=float, dest="max_displacement")
    common.add_argument("--tolerance", type=_tol, action="append", dest="tolerances", metavar="KEY=VAL")
    common.add_argument("--seed", type=int)
    common.add_argument("--out")

    p = argparse.ArgumentParser(prog="geoquant", description="Coherent-state verification suite.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the identity suite for one geometry and k")
    sp = sub.add_parser("sweep", parents=[common], help="semiclassical k-sweep with rate fit")
    sp.add_argument("--test", choices=TESTS)
    sp.add_argument("--observable")
    sp.add_argument("--point", type=_complex)
    sp.add_argument("--timings", action="store_true", default=None,
                    help="fill the runtime_ms CSV column (output is then not reproducible)")
    tp = sub.add_parser("table", parents=[common], help="tables of closed-form quantities")
    tp.add_argument("--target", choices=TABLE_TARGETS)
    tp.add_argument("--observable")
    return p


def load_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
        if "modulus" in data and isinstance(data["modulus"], (list, tuple)):
            data["modulus"] = complex(*data["modulus"])
        elif "modulus" in data:
            data["modulus"] = _complex(str(data["modulus"]))
        if isinstance(data.get("point"), (list, tuple)):
            data["point"] = complex(*data["point"])
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    for key in known:
        val = getattr(args, key, None)
        if val is None:
            continue
        if key == "tolerances":
            merged = dict(data.get("tolerances", {}))
            merged.update(dict(val))
            val = merged
        data[key] = val
    unknown_tol = set(data.get("tolerances", {})) - set(DEFAULT_TOLERANCES)
    if unknown_tol:
        raise ParameterError(f"unknown tolerance keys: {sorted(unknown_tol)}")
    return RunConfig(**data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "verify":
            report, code = cmd_verify(cfg)
            for r in report["tests"]:
                print(f"{r['status'].upper():4}  {r['name']:22} value={r['value']:.3e} tol={r['tolerance']:.1e}")
            print(f"overall: {report['status']}  ({Path(cfg.out) / 'report.json'})")
            return code
        if args.command == "sweep":
            res = cmd_sweep(cfg)
            for k, e in zip(res.k_values, res.errors):
                print(f"k={k:5d}  error={e:.6e}")
            print(f"slope={res.fitted_slope:.4f}  residual={res.fit_residual:.3e}")
            return 0
        print(cmd_table(cfg), end="")
        return 0
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
