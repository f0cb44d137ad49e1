"""
Continuum objects attached to the limit shape.

* ``StripMap`` is the diffeomorphism F(t, x) = tau(t) + i theta(t, x) from the
  liquid region onto a piece of the strip R x (0, pi), with
  theta = arccos((mu - b(1;t)) / (2 a(1;t))).
* ``SlopeField`` holds the three lozenge angles rho_I, rho_II, rho_III and
  the complex slope Omega, the apex of the triangle with vertices 0, 1,
  Omega whose angles are rho_I (at 0) and rho_III (at 1).
* Residuals of the complex-structure identity and of the complex Burgers
  equation, and the variational energy with the Lobachevsky surface tension.

Conventions
-----------
Particle height: h(t, x) = int rho(t, u) du, so dh/dx = rho.  Tile height:
h_tiles = x - h.  The angles are

    rho_I = -pi dh/dt,  rho_II = pi (dh/dt + dh/dx),  rho_III = pi (1 - dh/dx).

With theta taken in (0, pi) the complex-structure identity

    dF/dzbar / dF/dz = -(1 + (i-1) W) / (-1 + (1+i) W)

holds with W = Omega for q > 1 and with W = conj(Omega) for q < 1.  In the
same way Im(F_t / F_x) has the sign of -log q.  ``conjugate=None`` picks the
matching form; True or False forces one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import bernoulli

from .errors import (
    AngleDomain,
    GradientOutsideN,
    OutsideLiquid,
    PoleProximity,
    WeightSingularity,
)
from .limit_shape import ScaledParams, _line_breaks, limit_height

ARCCOS_SLACK = 1e-10
ANGLE_SLACK = 1e-8

# ----------------------------------------------------------------- strip map


def tau(sp: ScaledParams, t):
    """tau(t) = 1/2 log|(q^t - 1) / (1 - q^(t-b-c))|."""
    q = sp.q
    t = np.asarray(t, dtype=float)
    out = 0.5 * np.log(np.abs((q**t - 1) / (1 - q ** (t - sp.b - sp.c))))
    return out if out.ndim else float(out)


def A_t(sp: ScaledParams, t):
    """A(1; t) written with the hexagon parameters."""
    q, b, c, k2 = sp.q, sp.b, sp.c, sp.k2
    return ((1 - q**-c) * (1 - q ** (-t)) * (1 - q ** (-b - c - 1)) * (1 - k2 * q ** (-b - c + 1))
            / (1 - q ** (-b - c)) ** 2)


def C_t(sp: ScaledParams, t):
    """C(1; t) written with the hexagon parameters."""
    q, b, c, k2 = sp.q, sp.b, sp.c, sp.k2
    return ((1 - 1 / q) * (1 - q**-b) * (1 - k2 * q) * q ** (-c - t) * (1 - q ** (-b - c + t))
            / (1 - q ** (-b - c)) ** 2)


@dataclass(frozen=True)
class StripMap:
    """F : liquid region -> strip, with its inverse.

    ``constant`` is tau(t) - 1/2 log|A(t)/C(t)|, independent of t.
    """

    sp: ScaledParams
    constant: float = field(init=False)

    def __post_init__(self):
        q, b, c, k2 = self.sp.q, self.sp.b, self.sp.c, self.sp.k2
        r = ((q**c - 1) * (1 - q ** (-b - c - 1)) * (1 - k2 * q ** (-b - c + 1))
             / ((1 - 1 / q) * (1 - q**-b) * (1 - k2 * q)))
        object.__setattr__(self, "constant", -0.5 * math.log(abs(r)))

    def theta(self, t: float, x: float) -> float:
        lc = self.sp.coefficients(t)
        a1, b1 = float(lc.a(1.0)), float(lc.b(1.0))
        u = (float(self.sp.mu(t, x)) - b1) / (2 * a1)
        if abs(u) > 1 + ARCCOS_SLACK:
            raise OutsideLiquid(f"({t}, {x}) is outside the liquid region (cos theta = {u:.3g})")
        return math.acos(max(-1.0, min(1.0, u)))

    def forward(self, t: float, x: float) -> tuple[float, float]:
        return tau(self.sp, t), self.theta(t, x)

    def F(self, t: float, x: float) -> complex:
        tt, th = self.forward(t, x)
        return complex(tt, th)

    def F_working(self, t: float, x: float) -> complex:
        """1/2 log|A/C| + i arccos((mu - 1 - gd + A + C) / (2 sqrt(AC))) + constant."""
        sp = self.sp
        A, C = A_t(sp, t), C_t(sp, t)
        Y = float(sp.mu(t, x)) - 1 - sp.gd(t) + A + C
        u = Y / (2 * math.sqrt(A * C))
        if abs(u) > 1 + ARCCOS_SLACK:
            raise OutsideLiquid(f"({t}, {x}) is outside the liquid region")
        return complex(0.5 * math.log(abs(A / C)) + self.constant, math.acos(max(-1.0, min(1.0, u))))

    def time_of(self, tau_value: float) -> float:
        """Solve tau(t) = tau_value: t = log_q((1 + E) / (1 + E q^(-b-c))), E = e^(2 tau)."""
        sp = self.sp
        E = math.exp(2 * tau_value)
        return math.log((1 + E) / (1 + E * sp.q ** (-sp.b - sp.c))) / sp.logq

    def inverse(self, tau_value: float, theta: float) -> tuple[float, float]:
        t = self.time_of(tau_value)
        lc = self.sp.coefficients(t)
        v = float(lc.b(1.0)) + 2 * float(lc.a(1.0)) * math.cos(theta)
        return t, float(self.sp.mu_inv(t, v))

    def wirtinger(self, t: float, x: float, step: float = 1e-5) -> tuple[complex, complex]:
        """(dF/dz, dF/dzbar) by central differences, dz = (dt - i dx)/2."""
        Ft = (self.F(t + step, x) - self.F(t - step, x)) / (2 * step)
        Fx = (self.F(t, x + step) - self.F(t, x - step)) / (2 * step)
        return (Ft - 1j * Fx) / 2, (Ft + 1j * Fx) / 2

    def slope_ratio(self, t: float, x: float, step: float = 1e-5) -> complex:
        """F_t / F_x by central differences."""
        Ft = (self.F(t + step, x) - self.F(t - step, x)) / (2 * step)
        Fx = (self.F(t, x + step) - self.F(t, x - step)) / (2 * step)
        return Ft / Fx


def strip_map(sp: ScaledParams) -> StripMap:
    if sp.regime == "trigonometric":
        raise ValueError("the strip map is implemented for real q")
    return StripMap(sp)


# ---------------------------------------------------------------- slope field


def omega_from_angles(r1: float, r3: float) -> complex:
    """Apex of the triangle (0, 1, Omega) with angle r1 at 0 and r3 at 1."""
    r2 = math.pi - r1 - r3
    if math.sin(r2) == 0:
        return complex(math.nan, math.nan)
    return math.sin(r3) / math.sin(r2) * complex(math.cos(r1), math.sin(r1))


def omega_tangent_form(r1: float, r3: float) -> complex:
    """Omega from tan rho_I and tan rho_III."""
    T1, T3 = math.tan(r1), math.tan(r3)
    return complex(T3 / (T3 + T1), T3 * T1 / (T3 + T1))


def height_t_derivative(sp: ScaledParams, t: float, x: float, step: float = 1e-4) -> float:
    """dh/dt by central differences of the x-integral of rho."""
    return (limit_height(sp, t + step, x) - limit_height(sp, t - step, x)) / (2 * step)


def lozenge_angles(sp: ScaledParams, t: float, x: float, step: float = 1e-4) -> tuple[float, float, float]:
    ht = height_t_derivative(sp, t, x, step)
    hx = sp.coefficients(t).density(x)
    r1, r3 = -math.pi * ht, math.pi * (1 - hx)
    r2 = math.pi * (ht + hx)
    for r in (r1, r2, r3):
        if not -ANGLE_SLACK <= r <= math.pi + ANGLE_SLACK:
            raise AngleDomain(f"lozenge angle {r:.6g} outside [0, pi] at ({t}, {x})")
    return r1, r2, r3


def omega_at(sp: ScaledParams, t: float, x: float, step: float = 1e-4) -> complex:
    r1, _, r3 = lozenge_angles(sp, t, x, step)
    return omega_from_angles(r1, r3)


@dataclass
class SlopeField:
    """Lozenge angles and complex slope on a (t, x) grid; NaN off the hexagon."""

    ts: np.ndarray
    xs: np.ndarray
    rho_I: np.ndarray
    rho_II: np.ndarray
    rho_III: np.ndarray
    Omega: np.ndarray

    @property
    def Upsilon(self) -> np.ndarray:
        return 1 - self.Omega

    def rows(self):
        for i, t in enumerate(self.ts):
            for j, x in enumerate(self.xs):
                if np.isfinite(self.rho_I[i, j]):
                    w = self.Omega[i, j]
                    yield (float(t), float(x), self.rho_I[i, j], self.rho_II[i, j], self.rho_III[i, j],
                           float(w.real), float(w.imag))


def slope_field(sp: ScaledParams, ts, xs, step: float = 1e-4) -> SlopeField:
    ts, xs = np.asarray(ts, float), np.asarray(xs, float)
    shape = (len(ts), len(xs))
    R = [np.full(shape, np.nan) for _ in range(3)]
    W = np.full(shape, np.nan + 0j)
    for i, t in enumerate(ts):
        if not step < t < sp.b + sp.c - step:
            continue
        for j, x in enumerate(xs):
            if not sp.lower(t) < x < sp.upper(t):
                continue
            r = lozenge_angles(sp, float(t), float(x), step)
            for k in range(3):
                R[k][i, j] = r[k]
            W[i, j] = omega_from_angles(r[0], r[2])
    return SlopeField(ts, xs, R[0], R[1], R[2], W)


# ------------------------------------------------------------------ residuals


def mobius_L(z: complex) -> complex:
    """L(z) = ((1-i) z + (1+i)) / (i - i z)."""
    return ((1 - 1j) * z + (1 + 1j)) / (1j - 1j * z)


def structure_rhs(omega: complex) -> complex:
    return -(1 + (1j - 1) * omega) / (-1 + (1 + 1j) * omega)


def _oriented(sp: ScaledParams, omega: complex, conjugate: bool | None) -> complex:
    if conjugate is None:
        conjugate = sp.q < 1
    return omega.conjugate() if conjugate else omega


def complex_structure_residual(sm: StripMap, t: float, x: float, omega: complex | None = None,
                               fd_step: float = 1e-5, h_step: float = 1e-4,
                               conjugate: bool | None = None) -> float:
    """|dF/dzbar / dF/dz + (1 + (i-1) W) / (-1 + (1+i) W)|, W = Omega or its conjugate."""
    if omega is None:
        omega = omega_at(sm.sp, t, x, h_step)
    w = _oriented(sm.sp, omega, conjugate)
    dz, dzb = sm.wirtinger(t, x, fd_step)
    return abs(dzb / dz - structure_rhs(w))


def mobius_residual(sm: StripMap, t: float, x: float, omega: complex | None = None,
                    fd_step: float = 1e-5, h_step: float = 1e-4, conjugate: bool | None = None) -> float:
    """|L(dF/dzbar / dF/dz) - 1/W|; L maps the ratio to F_t/F_x + 1."""
    if omega is None:
        omega = omega_at(sm.sp, t, x, h_step)
    w = _oriented(sm.sp, omega, conjugate)
    dz, dzb = sm.wirtinger(t, x, fd_step)
    return abs(mobius_L(dzb / dz) - 1 / w)


def burgers_source(sp: ScaledParams, t: float, x: float) -> float:
    """-log q (q^(c+t) + kappa^2 q^(2x)) / (q^(c+t) - kappa^2 q^(2x))."""
    q, k2 = sp.q, sp.k2
    u, v = q ** (sp.c + t), k2 * q ** (2 * x)
    if abs(u - v) < 1e-10:
        raise PoleProximity(f"({t}, {x}) lies on the pole line of the Burgers source")
    return -sp.logq * (u + v) / (u - v)


def burgers_residual(sp: ScaledParams, t: float, x: float, fd_step: float = 1.25e-4,
                     h_step: float = 1e-4) -> float:
    """|Omega_x/Omega - Omega_t/(1 - Omega) - source| with centered differences of Omega."""
    rhs = burgers_source(sp, t, x)
    W = omega_at(sp, t, x, h_step)
    Wx = (omega_at(sp, t, x + fd_step, h_step) - omega_at(sp, t, x - fd_step, h_step)) / (2 * fd_step)
    Wt = (omega_at(sp, t + fd_step, x, h_step) - omega_at(sp, t - fd_step, x, h_step)) / (2 * fd_step)
    return abs(Wx / W - Wt / (1 - W) - rhs)


# ------------------------------------------------------------------- energy

_NB = 30
_BCOEF = np.array([abs(float(bernoulli(2 * k)[-1])) / (2 * k * math.factorial(2 * k + 1))
                   for k in range(1, _NB + 1)])


def clausen2(phi):
    """Clausen function Cl_2 via its Bernoulli expansion on (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    r = np.remainder(phi + math.pi, 2 * math.pi) - math.pi
    a = np.abs(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        head = np.where(a > 0, a - a * np.log(a), 0.0)
    a2 = a * a
    tail = np.zeros_like(a)
    p = a.copy()
    for coef in _BCOEF:
        p = p * a2
        tail = tail + coef * p
    out = np.sign(r) * (head + tail)
    return out if out.ndim else float(out)


def lobachevsky(theta):
    """L(theta) = -int_0^theta log|2 sin x| dx = Cl_2(2 theta) / 2."""
    return 0.5 * clausen2(2 * np.asarray(theta, dtype=float)) if np.ndim(theta) else 0.5 * clausen2(2 * theta)


def lobachevsky_quad(theta: float) -> float:
    """Quadrature oracle for the Lobachevsky function, 0 <= theta <= pi."""
    if not 0 <= theta <= math.pi:
        raise ValueError("quadrature oracle covers [0, pi]")
    if theta == 0:
        return 0.0
    f = lambda x: -math.log(abs(2 * math.sin(x)))  # noqa: E731
    opts = dict(limit=200, epsabs=1e-14, epsrel=1e-13)
    if theta <= math.pi / 2:
        pts = [math.pi / 6] if theta > math.pi / 6 else None
        return integrate.quad(f, 0.0, theta, points=pts, **opts)[0]
    # x -> pi - x moves the piece above pi/2 away from the singularity at pi
    head = integrate.quad(f, 0.0, math.pi / 2, points=[math.pi / 6], **opts)[0]
    lo = math.pi - theta
    pts = [math.pi / 6] if lo < math.pi / 6 else None
    return head + integrate.quad(f, lo, math.pi / 2, points=pts, **opts)[0]


def surface_tension(s, u):
    """sigma(s, u) = -(L(pi s) + L(pi u) + L(pi (1 - s - u))) / pi^2."""
    s, u = np.asarray(s, float), np.asarray(u, float)
    return -(lobachevsky(math.pi * s) + lobachevsky(math.pi * u) + lobachevsky(math.pi * (1 - s - u))) / math.pi**2


def sigma_gradient(s: float, u: float) -> tuple[float, float]:
    """(d sigma/ds, d sigma/du) = (log(sin pi s / sin pi r), log(sin pi u / sin pi r)) / pi, r = 1 - s - u."""
    r = 1 - s - u
    sr = math.sin(math.pi * r)
    return (math.log(math.sin(math.pi * s) / sr) / math.pi, math.log(math.sin(math.pi * u) / sr) / math.pi)


def energy_weight(sp: ScaledParams, t, x):
    """w(t, x) = ln q (kappa^2 q^(-c+2x-t) + 1) / (kappa^2 q^(-c+2x-t) - 1)."""
    e = sp.k2 * sp.q ** (-sp.c + 2 * np.asarray(x, float) - np.asarray(t, float))
    return sp.logq * (e + 1) / (e - 1)


@dataclass
class HexMesh:
    """P1 triangulation of the rescaled hexagon in (t, x)."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary: np.ndarray
    step: float

    @property
    def areas(self) -> np.ndarray:
        P = self.nodes[self.triangles]
        d1, d2 = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
        return 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)


def hexagon_mesh(sp: ScaledParams, step: float = 1 / 64) -> HexMesh:
    """Structured mesh; squares are split along (1, 1) so the slanted sides are mesh edges."""
    b, c = sp.b, sp.c
    nt, nx = round((b + c) / step), round((c + 1) / step)
    if abs(nt * step - (b + c)) > 1e-12 or abs(round(b / step) * step - b) > 1e-12:
        raise ValueError("b and c must be multiples of the mesh step")
    nb = round(b / step)
    n1 = round(1 / step)
    inside = lambda i, j: max(0, i - nb) <= j <= min(i, round(c / step)) + n1  # noqa: E731
    index = -np.ones((nt + 1, nx + 1), dtype=int)
    nodes = []
    for i in range(nt + 1):
        for j in range(nx + 1):
            if inside(i, j):
                index[i, j] = len(nodes)
                nodes.append((i * step, j * step))
    tris = []
    for i in range(nt):
        for j in range(nx):
            p00, p10, p01, p11 = index[i, j], index[i + 1, j], index[i, j + 1], index[i + 1, j + 1]
            if p00 >= 0 and p10 >= 0 and p11 >= 0:
                tris.append((p00, p10, p11))
            if p00 >= 0 and p01 >= 0 and p11 >= 0:
                tris.append((p00, p11, p01))
    nodes = np.array(nodes)
    bd = np.zeros(len(nodes), dtype=bool)
    for i in range(nt + 1):
        for j in range(nx + 1):
            k = index[i, j]
            if k < 0:
                continue
            nbrs = [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1), (i + 1, j + 1), (i - 1, j - 1)]
            if any(not (0 <= a <= nt and 0 <= d <= nx) or index[a, d] < 0 for a, d in nbrs):
                bd[k] = True
    return HexMesh(nodes, np.array(tris), bd, step)


def _height_column(sp: ScaledParams, t: float, xs: np.ndarray) -> np.ndarray:
    """h(t, x) on an increasing grid by accumulating the density integral."""
    lc = sp.coefficients(t)
    lo = sp.lower(t)
    brk = _line_breaks(lc)
    out = np.empty(len(xs))
    acc, prev = 0.0, lo
    for k, x in enumerate(xs):
        pts = [prev] + [v for v in brk if prev < v < x] + [x]
        for l, r in zip(pts[:-1], pts[1:]):
            if r > l:
                acc += integrate.quad(lc.density, l, r, limit=100, epsabs=1e-12, epsrel=1e-12)[0]
        out[k] = acc
        prev = x
    return out


def limit_tile_height(sp: ScaledParams, mesh: HexMesh) -> np.ndarray:
    """h_tiles = x - h at the mesh nodes, with exact boundary values on the sides."""
    t, x = mesh.nodes[:, 0], mesh.nodes[:, 1]
    h = np.empty(len(t))
    T = sp.b + sp.c
    for tv in np.unique(t):
        sel = np.nonzero(t == tv)[0]
        order = sel[np.argsort(x[sel])]
        if tv <= 0:
            h[order] = x[order]
        elif tv >= T:
            h[order] = x[order] - (tv - sp.b)
        else:
            h[order] = _height_column(sp, float(tv), x[order])
    bd = mesh.boundary
    lo = np.maximum(0.0, t - sp.b)
    up = np.minimum(t, sp.c) + 1
    h[bd & np.isclose(x, lo)] = 0.0
    sel = bd & np.isclose(x, up)
    h[sel] = 1.0
    return x - h


def element_gradients(u: np.ndarray, mesh: HexMesh) -> np.ndarray:
    P = mesh.nodes[mesh.triangles]
    U = u[mesh.triangles]
    d1, d2 = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
    du1, du2 = U[:, 1] - U[:, 0], U[:, 2] - U[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    gt = (du1 * d2[:, 1] - du2 * d1[:, 1]) / det
    gx = (d1[:, 0] * du2 - d2[:, 0] * du1) / det
    return np.stack([gt, gx], axis=1)


def energy_functional(u: np.ndarray, sp: ScaledParams, mesh: HexMesh, slack: float = 1e-9,
                      weight_scale: float = 1 / math.pi) -> float:
    """sum over elements of [sigma(grad u) + weight_scale * w(centroid) u(centroid)] * area.

    The Euler-Lagrange equation of this functional is div grad sigma(grad u)
    = weight_scale * w.  The limit shape satisfies it with weight_scale =
    1/pi, the value that also makes the real part of the complex Burgers
    equation hold with sigma normalized by 1/pi^2.
    """
    g = element_gradients(u, mesh)
    s, v = g[:, 0], g[:, 1]
    bad = (s < -slack) | (v < -slack) | (s + v > 1 + slack)
    if bad.any():
        k = int(np.argmax(bad))
        raise GradientOutsideN(f"element {k} has gradient ({s[k]:.6g}, {v[k]:.6g}) outside the slope triangle")
    s = np.clip(s, 0, 1)
    v = np.clip(v, 0, 1 - s)
    cen = mesh.centroids
    if sp.k2 > 0:
        line = sp.c - math.log(sp.k2) / sp.logq
        dist = np.abs(2 * cen[:, 1] - cen[:, 0] - line) / math.sqrt(5)
        if dist.min() < 1e-6:
            raise WeightSingularity("an element centroid lies on the singular line of the weight")
    w = energy_weight(sp, cen[:, 0], cen[:, 1])
    uc = u[mesh.triangles].mean(axis=1)
    return float(np.sum((surface_tension(s, v) + weight_scale * w * uc) * mesh.areas))


# --------------------------------------------------------- Upsilon / Omega


def upsilon_omega_check(sp: ScaledParams, t: float, x: float, step: float = 1e-4,
                        sigma_step: float = 1e-6) -> dict[str, float]:
    """Residuals of log Upsilon = pi sigma_1 - i pi h_x and log Omega = pi sigma_2 + i pi h_t.

    Here h is the tile height in (t, x); sigma_1, sigma_2 are its surface
    tension gradients by central differences; Omega comes from the triangle.
    """
    r1, r2, r3 = lozenge_angles(sp, t, x, step)
    ht_tiles, hx_tiles = r1 / math.pi, r3 / math.pi
    d = sigma_step
    s1 = float(surface_tension(ht_tiles + d, hx_tiles) - surface_tension(ht_tiles - d, hx_tiles)) / (2 * d)
    s2 = float(surface_tension(ht_tiles, hx_tiles + d) - surface_tension(ht_tiles, hx_tiles - d)) / (2 * d)
    W = omega_from_angles(r1, r3)
    U_def = np.exp(complex(math.pi * s1, -math.pi * hx_tiles))
    W_def = np.exp(complex(math.pi * s2, math.pi * ht_tiles))
    return {
        "upsilon": abs(U_def - (1 - W)),
        "omega": abs(W_def - W),
        "sum": abs(U_def + W_def - 1),
    }
