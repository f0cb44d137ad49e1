"""
Command-line driver and file output.

Run as ``python -m qracah_tilings <command> [options]``.  Commands:

    density    limiting density on one line (CSV, JSON, or SVG heatmap)
    arctic     arctic curve samples and tangency points
    sample     random tiling by Metropolis-Hastings or the exact sampler
    enumerate  exact enumeration of a small hexagon
    height     limiting height on a grid, optionally next to a sampled tiling
    verify     pass/fail report for a suite of checks
    gff        limiting variance of a linear statistic
    burgers    complex-structure and Burgers residuals on a grid
    energy     variational energy of the limit shape and perturbations

Coordinates are rescaled hexagon units (t, x); angles are in radians.
Floats are written with 17 significant digits so values round-trip.

Exit codes: 0 success, 1 a verify criterion failed, 2 parameters rejected,
3 internal error.
"""
from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from .errors import QRTError, RegimeViolation

EXIT_OK, EXIT_FAIL, EXIT_PARAM, EXIT_INTERNAL = 0, 1, 2, 3
UNITS = {"t": "rescaled hexagon units (time / n)", "x": "rescaled hexagon units (position / n)",
         "angles": "radians", "densities and heights": "dimensionless"}

# ------------------------------------------------------------------ parsing

_EXP = re.compile(r"^exp\(\s*i\s*\*\s*([-+0-9.eE]+)\s*\)$")


def parse_complex(text: str | float | complex) -> complex | float:
    """Parse '0.5', '2.9i', '-1.5j', '1+2i' or 'exp(i*0.3)'; real input stays float."""
    if isinstance(text, (int, float)):
        return float(text)
    if isinstance(text, complex):
        return text
    s = text.strip().replace(" ", "")
    m = _EXP.match(s)
    if m:
        return cmath.exp(1j * float(m.group(1)))
    try:
        return float(s)
    except ValueError:
        pass
    s = s.replace("i", "j")
    if s in ("j", "+j", "-j"):
        s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as a complex number") from None


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(type(o).__name__)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, default=_json_default) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


@dataclass
class RunConfig:
    """Parsed command plus the metadata recorded in every output."""

    command: str
    params: Any
    seed: int | None = None
    output: str | None = None
    format: str = "csv"
    grid: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def metadata(self) -> dict:
        p = self.params
        doc = {"command": self.command, "version": __version__, "units": UNITS}
        if p is not None:
            doc["params"] = {k: _scalar(getattr(p, k)) for k in ("a", "b", "c", "q", "kappa") if hasattr(p, k)}
            try:
                doc["regime"] = p.regime
            except QRTError:
                pass
        if self.seed is not None:
            doc["seed"] = self.seed
        doc.update(self.grid)
        doc.update(self.extra)
        return doc


def _scalar(v):
    v = complex(v) if isinstance(v, complex) else v
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag} if v.imag else v.real
    return v


def emit(cfg: RunConfig, text: str, ext: str, out=None) -> None:
    """Write to <output>.<ext> or to stdout."""
    if cfg.output:
        path = f"{cfg.output}.{ext}"
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        (out or sys.stdout).write(text)


# ------------------------------------------------------------ constructors


def scaled_params(args):
    from .limit_shape import ScaledParams

    q, k = parse_complex(args.q), parse_complex(args.kappa)
    sp = ScaledParams(float(args.b), float(args.c), q, k)
    _check_regime(sp.regime, args)
    return sp


def hexagon_spec(args):
    from .hexagon_tilings import HexagonSpec

    q, k = parse_complex(args.q), parse_complex(args.kappa)
    h = HexagonSpec(int(args.a), int(args.b), int(args.c), q, k)
    _check_regime(h.regime, args)
    return h


def _check_regime(tag: str, args) -> None:
    want = getattr(args, "regime", None)
    if want and want != tag:
        raise RegimeViolation(f"parameters give the {tag} regime, not {want}")


def _workers(args) -> int:
    n = getattr(args, "threads", None)
    if n:
        return max(1, int(n))
    from .hexagon_tilings import default_threads

    return default_threads()


def _pmap(fn: Callable, items, threads: int):
    """Ordered map; output does not depend on the pool size."""
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ------------------------------------------------------------------- SVG


def _hexagon_outline(b: float, c: float) -> list[tuple[float, float]]:
    return [(0, 0), (b, 0), (b + c, c), (b + c, c + 1), (c, c + 1), (0, 1)]


def density_svg(sp, ts, xs, rho, curve=None, scale: float = 200.0) -> str:
    """Heatmap of rho over the (t, x) hexagon with an optional curve overlay."""
    T, X = sp.b + sp.c, sp.c + 1
    W, H = T * scale, X * scale
    dt = (ts[1] - ts[0]) if len(ts) > 1 else T
    dx = (xs[1] - xs[0]) if len(xs) > 1 else X
    P = lambda t, x: (t * scale, (X - x) * scale)  # noqa: E731
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.1f}" height="{H:.1f}" viewBox="0 0 {W:.1f} {H:.1f}">',
             f"<!-- qracah_tilings {__version__} -->"]
    for i, t in enumerate(ts):
        for j, x in enumerate(xs):
            v = rho[i, j]
            if not np.isfinite(v):
                continue
            g = int(round(255 * (1 - min(max(v, 0), 1))))
            px, py = P(t - dt / 2, x + dx / 2)
            parts.append(f'<rect x="{px:.2f}" y="{py:.2f}" width="{dt * scale + 0.5:.2f}" '
                         f'height="{dx * scale + 0.5:.2f}" fill="rgb({g},{g},{g})"/>')
    pts = " ".join(f"{P(t, x)[0]:.2f},{P(t, x)[1]:.2f}" for t, x in _hexagon_outline(sp.b, sp.c))
    parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    if curve is not None:
        pts = " ".join(f"{P(t, x)[0]:.2f},{P(t, x)[1]:.2f}" for t, x in curve)
        parts.append(f'<polygon points="{pts}" fill="none" stroke="#d62728" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------- commands


def cmd_density(args) -> int:
    from .arctic_geometry import trace_curve
    from .limit_shape import density_profile

    sp = scaled_params(args)
    cfg = RunConfig("density", sp, output=args.output, format=args.format,
                    grid={"npts": args.npts})
    if args.format == "svg":
        nt = args.npts
        ts = np.linspace(0, sp.b + sp.c, nt + 2)[1:-1]
        xs = np.linspace(0, sp.c + 1, nt + 2)[1:-1]
        rho = np.full((len(ts), len(xs)), np.nan)
        for i, t in enumerate(ts):
            lc = sp.coefficients(float(t))
            for j, x in enumerate(xs):
                if sp.lower(t) < x < sp.upper(t):
                    rho[i, j] = lc.density(float(x))
        curve = trace_curve(sp).samples
        emit(cfg, density_svg(sp, ts, xs, rho, curve), "svg")
        return EXIT_OK
    if args.t is None:
        raise argparse.ArgumentTypeError("--t is required for csv/json output")
    prof = density_profile(sp, float(args.t), args.npts)
    header = ["t", "x", "rho", "xi_minus", "xi_plus", "phase"]
    if args.format == "json":
        doc = {"metadata": cfg.metadata(), "columns": header, "rows": list(prof.rows()),
               "liquid": prof.liquid, "saturated": prof.saturated, "void": prof.void}
        emit(cfg, dumps(doc), "json")
    else:
        emit(cfg, csv_text(header, prof.rows()), "csv")
    return EXIT_OK


def cmd_arctic(args) -> int:
    from .arctic_geometry import trace_curve

    sp = scaled_params(args)
    cur = trace_curve(sp, npts=args.npts)
    cfg = RunConfig("arctic", sp, output=args.output, format=args.format, grid={"npts": args.npts})
    if args.format == "json":
        doc = {"metadata": cfg.metadata(), "curve": [list(r) for r in cur.rows()],
               "tangency_points": {k: list(v) for k, v in cur.tangency_points.items()}}
        emit(cfg, dumps(doc), "json")
    elif args.format == "svg":
        emit(cfg, density_svg(sp, [], [], np.zeros((0, 0)), cur.samples), "svg")
    else:
        rows = [(t, x, "") for t, x in cur.rows()]
        rows += [(t, x, k) for k, (t, x) in sorted(cur.tangency_points.items())]
        emit(cfg, csv_text(["t", "x", "tangent_edge"], rows), "csv")
    return EXIT_OK


def _enumeration_doc(h, cfg) -> dict:
    from .hexagon_tilings import enumerate_tilings, macmahon

    ens = enumerate_tilings(h)
    return {"metadata": cfg.metadata(), "count": len(ens), "macmahon": macmahon(h.a, h.b, h.c),
            "tilings": [{"particles": T.tolist(), "probability": float(p)}
                        for T, p in zip(ens.tilings, ens.probabilities)]}


def cmd_enumerate(args) -> int:
    h = hexagon_spec(args)
    cfg = RunConfig("enumerate", h, output=args.output, format="json")
    emit(cfg, dumps(_enumeration_doc(h, cfg)), "json")
    return EXIT_OK


def cmd_sample(args) -> int:
    from .hexagon_tilings import exact_samples, mcmc_sample, tiling_to_json, tiling_to_svg

    h = hexagon_spec(args)
    if args.enumerate:
        cfg = RunConfig("enumerate", h, output=args.output, format="json")
        emit(cfg, dumps(_enumeration_doc(h, cfg)), "json")
        return EXIT_OK
    seed = int(args.seed)
    if args.method == "exact":
        y = exact_samples(h, 1, seed)[0]
        meta = {"sampler": "exact"}
    else:
        res = mcmc_sample(h, int(float(args.sweeps)), seed, chains=1, burn_in=args.burn_in,
                          thin=args.thin, threads=_workers(args))
        y = res.tilings[-1]
        meta = {"sampler": "metropolis", **res.metadata()}
    cfg = RunConfig("sample", h, seed=seed, output=args.output, format=args.format, extra=meta)
    if args.format in ("json", "both"):
        emit(cfg, tiling_to_json(y, cfg.metadata()) + "\n", "json")
    if args.format in ("svg", "both"):
        svg = tiling_to_svg(h, y, dots=args.dots)
        emit(cfg, svg.replace(">", f"><!-- qracah_tilings {__version__} -->", 1), "svg")
    return EXIT_OK


def cmd_height(args) -> int:
    from .hexagon_tilings import HexagonSpec, empirical_height, tiling_from_json
    from .limit_shape import limit_height

    sp = scaled_params(args)
    ts = np.linspace(0, sp.b + sp.c, args.nt)
    xs = np.linspace(0, sp.c + 1, args.nx)
    y = h = None
    if args.tiling:
        with open(args.tiling, encoding="utf-8") as f:
            y = tiling_from_json(f.read())
        n = y.shape[1]
        h = HexagonSpec(n, round(sp.b * n), round(sp.c * n), sp.q ** (1 / n), sp.kappa)
    pts = [(float(t), float(x)) for t in ts for x in xs if sp.lower(t) <= x <= sp.upper(t)]

    def row(p):
        t, x = p
        v = limit_height(sp, t, x)
        r = [t, x, v, x - v]
        if y is not None:
            r.append(empirical_height(h, y, t, x))
        return r

    rows = _pmap(row, pts, _workers(args))
    header = ["t", "x", "h", "h_tiles"] + (["h_empirical"] if y is not None else [])
    cfg = RunConfig("height", sp, output=args.output, grid={"nt": args.nt, "nx": args.nx})
    emit(cfg, csv_text(header, rows), "csv")
    return EXIT_OK


def chebyshev_test_function(sp, coefs: list[float]) -> Callable:
    """f(t, x) with f(t, mu^-1(b(1;t) + 2 a(1;t) cos th)) = sum_m coefs[m-1] cos(m th)."""
    cheb = np.polynomial.chebyshev.Chebyshev([0.0] + list(coefs))

    def f(t, x):
        lc = sp.coefficients(t)
        a1, b1 = float(lc.a(1.0)), float(lc.b(1.0))
        return cheb((sp.mu(t, np.asarray(x, dtype=float)) - b1) / (2 * a1))

    return f


def cmd_gff(args) -> int:
    from .fluctuation_lab import GFFVarianceSpec, gff_variance, mc_fluctuation
    from .hexagon_tilings import HexagonSpec

    sp = scaled_params(args)
    times = [float(v) for v in args.times]
    f = chebyshev_test_function(sp, [float(v) for v in args.coef])
    pred = gff_variance(GFFVarianceSpec.from_scaled(sp, times, f))
    doc = {"prediction": pred, "times": times, "coefficients": args.coef}
    seed = None
    if args.samples:
        n = int(args.n)
        h = HexagonSpec(n, round(sp.b * n), round(sp.c * n), sp.q ** (1 / n), sp.kappa)
        seed = int(args.seed)
        mean, var, se = mc_fluctuation(h, f, times, int(args.samples), seed=seed)
        doc.update({"n": n, "samples": int(args.samples), "mc_mean": mean, "mc_variance": var,
                    "mc_variance_stderr": se, "ratio": var / pred})
    cfg = RunConfig("gff", sp, seed=seed, output=args.output, format="json")
    doc["metadata"] = cfg.metadata()
    emit(cfg, dumps(doc), "json")
    return EXIT_OK


def interior_liquid_grid(sp, nt: int, nx: int, margin: float = 0.02):
    """Points of an nt x nx grid that are liquid and at least ``margin`` from the arctic curve."""
    from .arctic_geometry import distance_to_curve, liquid_test, trace_curve

    cur = trace_curve(sp, npts=400)
    ts = np.linspace(0, sp.b + sp.c, nt + 2)[1:-1]
    out = []
    for t in ts:
        xs = np.linspace(sp.lower(t), sp.upper(t), nx + 2)[1:-1]
        for x in xs:
            if liquid_test(sp, t, x) == "liquid" and distance_to_curve(cur, t, x) >= margin:
                out.append((float(t), float(x)))
    return out


def cmd_burgers(args) -> int:
    from .continuum_analysis import burgers_residual, complex_structure_residual, strip_map

    sp = scaled_params(args)
    sm = strip_map(sp)
    pts = interior_liquid_grid(sp, args.nt, args.nx, args.margin)

    def row(p):
        t, x = p
        return [t, x, complex_structure_residual(sm, t, x), burgers_residual(sp, t, x)]

    rows = _pmap(row, pts, _workers(args))
    cfg = RunConfig("burgers", sp, output=args.output, grid={"nt": args.nt, "nx": args.nx})
    emit(cfg, csv_text(["t", "x", "complex_structure_residual", "burgers_residual"], rows), "csv")
    return EXIT_OK


def random_bumps(mesh, sp, count: int, seed: int, margin: float = 0.05):
    """Smooth compactly supported bumps inside the liquid region, with amplitudes."""
    from .arctic_geometry import distance_to_curve, liquid_test, trace_curve

    rng = np.random.default_rng(seed)
    cur = trace_curve(sp, npts=400)
    out = []
    while len(out) < count:
        t = rng.uniform(0, sp.b + sp.c)
        x = rng.uniform(sp.lower(t), sp.upper(t))
        if liquid_test(sp, t, x) != "liquid":
            continue
        d = distance_to_curve(cur, t, x)
        if d < margin + 0.02:
            continue
        R = rng.uniform(0.02, d - margin)
        d2 = ((mesh.nodes - (t, x)) ** 2).sum(1) / R**2
        phi = np.where(d2 < 1, (1 - d2) ** 3, 0.0)
        amp = float(rng.choice([-1, 1]) * rng.uniform(0.1, 1.0) * R * 0.05)
        out.append(amp * phi)
    return out


def energy_perturbation_test(sp, step: float = 1 / 64, count: int = 50, seed: int = 0) -> dict:
    from .continuum_analysis import GradientOutsideN, energy_functional, hexagon_mesh, limit_tile_height

    mesh = hexagon_mesh(sp, step)
    u = limit_tile_height(sp, mesh)
    E0 = energy_functional(u, sp, mesh)
    diffs = []
    for phi in random_bumps(mesh, sp, count, seed):
        while True:
            try:
                diffs.append(energy_functional(u + phi, sp, mesh) - E0)
                break
            except GradientOutsideN:
                phi = phi / 2
    return {"energy": E0, "min_increase": float(min(diffs)), "increases": diffs, "mesh_step": step}


def cmd_energy(args) -> int:
    sp = scaled_params(args)
    res = energy_perturbation_test(sp, 1 / args.mesh, args.perturbations, int(args.seed))
    cfg = RunConfig("energy", sp, seed=int(args.seed), output=args.output, format="json")
    res["metadata"] = cfg.metadata()
    emit(cfg, dumps(res), "json")
    return EXIT_OK


# ------------------------------------------------------------------ verify


def _check(name, value, tol, ok=None) -> dict:
    return {"name": name, "value": value, "tol": tol, "pass": bool(value <= tol if ok is None else ok)}


def suite_oracle(h) -> list[dict]:
    from .fluctuation_lab import JacobiMatrix, cumulant_trace
    from .hexagon_tilings import (dynamic_measure_check, enumerate_tilings, macmahon, slice_ensemble,
                                  slice_law, slice_marginal)

    ens = enumerate_tilings(h)
    out = [_check("count equals MacMahon", abs(len(ens) - macmahon(h.a, h.b, h.c)), 0)]
    worst = 0.0
    for s in range(h.b + h.c + 1):
        law, marg = slice_law(h, s), slice_marginal(h, ens, s)
        for k in set(law) | set(marg):
            p, r = law.get(k, 0.0), marg.get(k, 0.0)
            worst = max(worst, abs(p - r) / max(abs(p), 1e-300))
    out.append(_check("slice marginals equal the q-Racah ensemble", worst, 1e-12))
    out.append(_check("dynamic measure", dynamic_measure_check(h, ens), 1e-9))
    worst = 0.0
    P = ens.probabilities
    for s in range(1, h.b + h.c):
        e = slice_ensemble(h, s)
        J = JacobiMatrix.from_slice(h, s)
        for p in ([0, 1], [0, 0, 1], [0, 0, 0, 1]):
            X = np.array([np.polyval(p[::-1], np.real(e.coords[T[s] - e.shift])).sum() for T in ens.tilings])
            m = P @ X
            v = P @ (X - m) ** 2
            for ref, k in ((m, 1), (v, 2)):
                worst = max(worst, abs(cumulant_trace(J, p, k) - ref) / max(1.0, abs(ref)))
    out.append(_check("trace formulas C1, C2", worst, 1e-10))
    return out


def suite_continuum(sp, nt: int = 6, nx: int = 6) -> list[dict]:
    from .continuum_analysis import burgers_residual, complex_structure_residual, lobachevsky, strip_map

    sm = strip_map(sp)
    pts = interior_liquid_grid(sp, nt, nx)
    cs = max(complex_structure_residual(sm, t, x) for t, x in pts)
    br = max(burgers_residual(sp, t, x) for t, x in pts)
    G = 0.915965594177219015
    return [_check("complex structure residual", cs, 1e-5),
            _check("Burgers residual", br, 1e-4),
            _check("Lobachevsky at pi/4 equals Catalan/2", abs(float(lobachevsky(math.pi / 4)) - G / 2), 1e-10)]


def suite_clt(sp, n: int, samples: int, seed: int) -> list[dict]:
    from .fluctuation_lab import GFFVarianceSpec, gff_variance, mc_fluctuation, sample_skewness
    from .hexagon_tilings import HexagonSpec, exact_samples, linear_statistic

    h = HexagonSpec(n, round(sp.b * n), round(sp.c * n), sp.q ** (1 / n), sp.kappa)
    f = chebyshev_test_function(sp, [1.0, 0.5, 0.25])
    t = 1.0
    pred = gff_variance(GFFVarianceSpec.from_scaled(sp, [t], f))
    T = exact_samples(h, samples, seed)
    X = np.array([linear_statistic(h, y, f, [t]) for y in T])
    _, var, se = mc_fluctuation(h, f, [t], samples, tilings=T)
    g1, gse = sample_skewness(X)
    return [
        {"name": "variance ratio", "value": var / pred, "stderr": se / pred, "tol": 0.15,
         "pass": abs(var / pred - 1) <= 0.15},
        {"name": "skewness in stderr units", "value": g1 / gse, "tol": 3.0, "pass": abs(g1 / gse) <= 3},
    ]


def cmd_verify(args) -> int:
    if args.suite == "oracle":
        h = hexagon_spec(args)
        checks, params = suite_oracle(h), h
    else:
        sp = scaled_params(args)
        params = sp
        if args.suite == "continuum":
            checks = suite_continuum(sp)
        else:
            checks = suite_clt(sp, int(args.n), int(args.samples), int(args.seed))
    cfg = RunConfig("verify", params, seed=getattr(args, "seed", None), output=args.output, format="json",
                    extra={"suite": args.suite})
    ok = all(c["pass"] for c in checks)
    emit(cfg, dumps({"metadata": cfg.metadata(), "checks": checks, "pass": ok}), "json")
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------------ parser


def _common(p, hexagon: bool = False, a: int = 2, bc: tuple = (1.0, 1.0)):
    if hexagon:
        p.add_argument("--a", type=int, default=a)
        p.add_argument("--b", type=int, default=a)
        p.add_argument("--c", type=int, default=a)
    else:
        p.add_argument("--b", type=float, default=bc[0])
        p.add_argument("--c", type=float, default=bc[1])
    p.add_argument("--q", default="0.5", help="e.g. 0.5 or exp(i*0.3)")
    p.add_argument("--kappa", default="2.9i", help="e.g. 0.1, 2.9i or exp(i*1.2)")
    p.add_argument("--regime", choices=["real", "imaginary", "trigonometric", "uniform"])
    p.add_argument("--output", help="path prefix; stdout if omitted")
    p.add_argument("--threads", type=int, help="worker pool size (default $QRT_THREADS or 1)")
    p.add_argument("--config", help="JSON file whose keys mirror the flags")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qracah_tilings", description=__doc__.split("\n\n")[0].strip())
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", help="limiting density on the line t")
    _common(p)
    p.add_argument("--t", type=float)
    p.add_argument("--npts", type=int, default=200)
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("arctic", help="arctic curve and tangency points")
    _common(p)
    p.add_argument("--npts", type=int, default=200)
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.set_defaults(func=cmd_arctic)

    p = sub.add_parser("sample", help="random tiling")
    _common(p, hexagon=True, a=10)
    p.add_argument("--sweeps", default="1000")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--method", choices=["metropolis", "exact"], default="metropolis")
    p.add_argument("--enumerate", action="store_true", help="exact enumeration output instead")
    p.add_argument("--format", choices=["json", "svg", "both"], default="json")
    p.add_argument("--dots", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("enumerate", help="all tilings of a small hexagon with probabilities")
    _common(p, hexagon=True)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("height", help="limiting height on a grid")
    _common(p)
    p.add_argument("--nt", type=int, default=21)
    p.add_argument("--nx", type=int, default=21)
    p.add_argument("--tiling", help="tiling JSON to compare against")
    p.set_defaults(func=cmd_height)

    p = sub.add_parser("verify", help="pass/fail report")
    _common(p, hexagon=True)
    p.add_argument("--suite", choices=["oracle", "continuum", "clt"], default="oracle")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gff", help="limiting variance of a linear statistic")
    _common(p)
    p.add_argument("--times", nargs="+", default=["1.0"])
    p.add_argument("--coef", nargs="+", default=["1.0", "0.5", "0.25"],
                   help="cosine coefficients of f in the angle variable, modes 1, 2, ...")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gff)

    p = sub.add_parser("burgers", help="residual table on an interior grid")
    _common(p)
    p.add_argument("--nt", type=int, default=10)
    p.add_argument("--nx", type=int, default=10)
    p.add_argument("--margin", type=float, default=0.02)
    p.set_defaults(func=cmd_burgers)

    p = sub.add_parser("energy", help="energy of the limit shape against perturbations")
    _common(p)
    p.add_argument("--mesh", type=int, default=64, help="mesh step is 1/MESH")
    p.add_argument("--perturbations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_energy)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            doc = json.load(f)
        sub = ap._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in doc.items()})
        args = ap.parse_args(argv)
    return args


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config(ap, argv)
    except SystemExit as e:
        return EXIT_PARAM if e.code else EXIT_OK
    if getattr(args, "threads", None):
        os.environ["QRT_THREADS"] = str(args.threads)
    try:
        return args.func(args)
    except (QRTError, ValueError, argparse.ArgumentTypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARAM
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
