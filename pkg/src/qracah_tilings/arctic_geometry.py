"""
Arctic curve of the q-Racah hexagon.

The curve is the zero set of

    D(t, x) = 4 a(1;t)^2 - (mu(t, x) - b(1;t))^2,

positive in the liquid region.  For each t the equation is solved as
mu = b(1;t) +- 2 a(1;t) and mapped back with the closed-form inverse of mu.
The curve touches each of the six sides of the hexagon once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ComplexLog
from .limit_shape import ScaledParams

BAND_TOL = 1e-10

EDGES = ("t=0", "t=b+c", "x=0", "x=1+t", "x=t-b", "x=1+c")


def arctic_function(sp: ScaledParams, t: float, x: float) -> float:
    """D(t, x) = 4 a(1;t)^2 - (mu(t,x) - b(1;t))^2."""
    lc = sp.coefficients(t)
    return float(4 * lc.a2(1.0) - (sp.mu(t, x) - lc.b(1.0)) ** 2)


def _scale(sp: ScaledParams, t: float, x: float) -> float:
    lc = sp.coefficients(t)
    return max(1.0, float(sp.mu(t, x)) ** 2, float(lc.b(1.0)) ** 2, abs(float(lc.a2(1.0))))


def liquid_test(sp: ScaledParams, t: float, x: float) -> str:
    """Classify (t, x) as 'liquid', 'frozen' or 'boundary'."""
    d = arctic_function(sp, t, x)
    tol = BAND_TOL * _scale(sp, t, x)
    if d > tol:
        return "liquid"
    if d < -tol:
        return "frozen"
    return "boundary"


def _log_q(sp: ScaledParams, v: float, label: str) -> float:
    if not v > 0:
        raise ComplexLog(f"log_q argument {v!r} is nonpositive on edge {label}")
    return math.log(v) / sp.logq


def tangency_points(sp: ScaledParams) -> dict[str, tuple[float, float]]:
    """The six points where the arctic curve touches the hexagon, keyed by edge."""
    q, b, c, k2 = sp.q, sp.b, sp.c, sp.k2
    Q = lambda e: q**e  # noqa: E731
    out: dict[str, tuple[float, float]] = {}
    for t, lab in ((0.0, "t=0"), (b + c, "t=b+c")):
        out[lab] = (t, sp.mu_inv(t, float(sp.coefficients(t).b(1.0))))

    num = k2 * Q(b + c + 1) - k2 * Q(b + c + 2) - Q(b + c) + Q(b + 2 * c + 1) - k2 * Q(c + 1) + k2 * q
    den = -Q(b + c + 1) + Q(b + 2 * c + 1) - k2 * Q(c + 2) + Q(c + 1) - Q(c) + k2 * q
    t = _log_q(sp, num / den, "x=0")
    out["x=0"] = (t, 0.0)

    num = -Q(c) * (-Q(b + c) + Q(b + c + 1) - k2 * Q(b + 2) + Q(b) + k2 * q - 1)
    den = k2 * Q(b + c + 2) - Q(b + c + 1) - k2 * Q(c + 2) + Q(c) + k2 * q * q - k2 * q
    t = _log_q(sp, num / den, "x=1+t")
    out["x=1+t"] = (t, 1.0 + t)

    num = Q(b + c) * (-Q(b + c + 1) + Q(2 * b + c + 1) - k2 * Q(b + 2) + Q(b + 1) - Q(b) + k2 * q)
    den = k2 * Q(b + c + 1) - k2 * Q(b + c + 2) - Q(b + c) + Q(2 * b + c + 1) - k2 * Q(b + 1) + k2 * q
    t = _log_q(sp, num / den, "x=t-b")
    out["x=t-b"] = (t, t - b)

    num = -Q(c) * (k2 * Q(b + c + 2) - Q(b + c + 1) - k2 * Q(b + 2) + Q(b) + k2 * q * q - k2 * q)
    den = -Q(b + c) + Q(b + c + 1) - k2 * Q(c + 2) + Q(c) + k2 * q - 1
    t = _log_q(sp, num / den, "x=1+c")
    out["x=1+c"] = (t, 1.0 + c)
    return out


def edge_position(sp: ScaledParams, edge: str, t: float) -> float:
    """x-coordinate of the named side at time t."""
    return {
        "x=0": 0.0,
        "x=1+t": 1.0 + t,
        "x=t-b": t - sp.b,
        "x=1+c": 1.0 + sp.c,
    }[edge]


def edge_time_range(sp: ScaledParams, edge: str) -> tuple[float, float]:
    b, c = sp.b, sp.c
    return {"x=0": (0.0, b), "x=1+t": (0.0, c), "x=t-b": (b, b + c), "x=1+c": (c, b + c)}[edge]


def tangency_by_root(sp: ScaledParams, edge: str, ngrid: int = 400) -> float:
    """Time of tangency on a slanted or vertical side found by bracketing.

    On the side the roots xi_+- coincide at xi_0(t), the double root of the
    quadratic in y; the curve touches the side where y(xi_0(t)) = y(1).
    """
    lo, hi = edge_time_range(sp, edge)

    def g(t):
        lc = sp.coefficients(t)
        x = edge_position(sp, edge, t)
        D = (float(lc.mu_x(x)) / lc.logq) ** 2
        return lc.h(x) / (2 * D) - float(lc.y(1.0))

    ts = np.linspace(lo, hi, ngrid + 1)[1:-1]
    vals = np.array([g(t) for t in ts])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if len(idx) != 1:
        raise ValueError(f"expected one sign change of the edge condition on {edge}, found {len(idx)}")
    i = idx[0]
    return optimize.brentq(g, ts[i], ts[i + 1], xtol=1e-15, rtol=1e-15)


@dataclass
class ArcticCurve:
    """Closed polyline on the arctic curve plus labeled tangency points."""

    samples: np.ndarray
    tangency_points: dict[str, tuple[float, float]] = field(default_factory=dict)

    def rows(self):
        for t, x in self.samples:
            yield (float(t), float(x))


def _branches(sp: ScaledParams, t: float) -> tuple[float, float] | None:
    lc = sp.coefficients(t)
    a1, b1 = float(lc.a(1.0)), float(lc.b(1.0))
    lo, hi = sp.lower(t), sp.upper(t)
    xs = []
    for v in (b1 - 2 * a1, b1 + 2 * a1):
        x = sp.mu_inv(t, v)
        xs.append(min(max(x, lo), hi))
    xs.sort()
    return xs[0], xs[1]


def trace_curve(sp: ScaledParams, npts: int = 200, refine: int = 10) -> ArcticCurve:
    """Sample the arctic curve on a t-grid refined near the tangency times."""
    if npts < 16:
        raise ValueError("npts must be at least 16")
    T = sp.b + sp.c
    tp = tangency_points(sp)
    base = np.linspace(0.0, T, npts)
    h = T / (npts - 1)
    extra = []
    for t0, _ in tp.values():
        extra.append(np.linspace(max(0.0, t0 - h), min(T, t0 + h), 2 * refine + 1))
    ts = np.unique(np.concatenate([base, *extra]))
    low, high = [], []
    for t in ts:
        x1, x2 = _branches(sp, t)
        low.append((t, x1))
        high.append((t, x2))
    pts = low + high[::-1][1:-1]
    return ArcticCurve(np.array(pts), tp)


def distance_to_curve(curve: ArcticCurve, t: float, x: float) -> float:
    """Euclidean distance to the closed polyline."""
    P = curve.samples
    A, B = P, np.roll(P, -1, axis=0)
    AB = B - A
    L2 = np.maximum((AB**2).sum(1), 1e-300)
    u = np.clip(((np.array([t, x]) - A) * AB).sum(1) / L2, 0, 1)
    proj = A + u[:, None] * AB
    return float(np.sqrt(((proj - np.array([t, x])) ** 2).sum(1)).min())
