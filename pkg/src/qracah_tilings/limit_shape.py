"""
Limiting recurrence coefficients and the limiting particle density.

For a q-Racah ensemble with base q^(1/n), lattice spacing 1/n and fixed
limiting parameters (alpha, beta, gamma, delta), the recurrence coefficients
converge to

    A(xi) = (1-g q^xi)(1-a q^xi)(1-ab q^xi)(1-bd q^xi) / (1-ab q^2xi)^2
    C(xi) = (1-q^xi)(1-b q^xi)(d-a q^xi)(g-ab q^xi) / (1-ab q^2xi)^2

with a(xi) = sqrt(A C) and b(xi) = 1 + gd - A - C.  The density at x is
the fraction of xi in [0, 1] for which mu(x) lies in the band
b(xi) +- 2 a(xi), weighted by the arcsine law.  Substituting
y(xi) = q^-xi + ab q^xi turns the band edges into the roots of a quadratic
and gives the closed form implemented here.

For the hexagon the line at rescaled time t uses alpha = q^(-c-1),
beta = q^(-b-1), gamma = q^(-t-1), delta = kappa^2 q^(1-c).  Beyond t = b
the true line coefficients differ from these by the common factor q^(t-b),
which cancels in every density and curve computed below.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import (
    ArccosDomain,
    DegenerateInversion,
    QuadratureNonConvergence,
    OutOfRange,
    RegimeViolation,
    SingularPoint,
)

ARCCOS_SLACK = 1e-10
MU_PRIME_TOL = 1e-10


def _clamped_arccos(v: float) -> float:
    if v > 1 + ARCCOS_SLACK or v < -1 - ARCCOS_SLACK:
        raise ArccosDomain(f"arccos argument {v!r} outside [-1, 1]")
    return math.acos(min(1.0, max(-1.0, v)))


# ------------------------------------------------------------ hexagon scaling


@dataclass(frozen=True)
class ScaledParams:
    """Rescaled hexagon 1 x b x c with base q and weight parameter kappa.

    ``regime`` is derived from the types of q and kappa: real (q > 0, kappa
    real), imaginary (q > 0, kappa purely imaginary) or trigonometric
    (|q| = |kappa| = 1).
    """

    b: float
    c: float
    q: complex
    kappa: complex

    def __post_init__(self):
        if self.b <= 0 or self.c <= 0:
            raise ValueError("b and c must be positive")
        tag = self.regime
        if tag == "trigonometric":
            lam, eta = cmath.phase(self.q), cmath.phase(self.kappa)
            e1, e2 = eta - lam * (self.b + self.c) / 2, eta + lam
            if math.floor(e1 / math.pi) != math.floor(e2 / math.pi) or e1 % math.pi == 0 or e2 % math.pi == 0:
                raise RegimeViolation("trigonometric window: eta - lam (b+c)/2 and eta + lam must share an open interval (k pi, (k+1) pi)")
            return
        object.__setattr__(self, "q", float(complex(self.q).real))
        if tag == "real":
            object.__setattr__(self, "kappa", float(complex(self.kappa).real))
            lo, hi = self.forbidden_interval()
            if lo <= abs(self.kappa) <= hi and self.kappa != 0:
                raise RegimeViolation(
                    f"kappa={self.kappa} lies in the forbidden interval [{lo:.6g}, {hi:.6g}]"
                )
            if self.kappa < 0:
                raise RegimeViolation("use kappa >= 0 (only kappa^2 enters the model)")
        else:
            object.__setattr__(self, "kappa", complex(0, complex(self.kappa).imag))

    @property
    def regime(self) -> str:
        q, k = complex(self.q), complex(self.kappa)
        if abs(q.imag) > 1e-15:
            if abs(abs(q) - 1) > 1e-12 or abs(abs(k) - 1) > 1e-12:
                raise RegimeViolation("trigonometric regime needs |q| = |kappa| = 1")
            return "trigonometric"
        if q.real <= 0 or q.real == 1:
            raise RegimeViolation("q must be positive and different from 1")
        if k.imag == 0:
            return "real"
        if k.real == 0:
            return "imaginary"
        raise RegimeViolation("kappa must be real or purely imaginary for real q")

    def forbidden_interval(self) -> tuple[float, float]:
        """Closed interval of real kappa excluded by positivity (endpoints singular)."""
        q = float(complex(self.q).real)
        lo, hi = q**-1, q ** ((self.b + self.c) / 2)
        return (min(lo, hi), max(lo, hi))

    @property
    def k2(self) -> float:
        """kappa^2 as a real number."""
        if self.regime == "trigonometric":
            raise RegimeViolation("continuum hexagon formulas cover the real and imaginary regimes")
        return float((complex(self.kappa) ** 2).real)

    @property
    def logq(self) -> float:
        return math.log(self.q)

    def lower(self, t: float) -> float:
        """Lower edge of the particle domain on line t."""
        return max(0.0, t - self.b)

    def upper(self, t: float) -> float:
        """Upper edge of the particle domain on line t."""
        return min(t, self.c) + 1.0

    def gd(self, t: float) -> float:
        """gamma delta = kappa^2 q^(-t-c) on line t."""
        return self.k2 * self.q ** (-t - self.c)

    def mu(self, t, x):
        """mu(t, x) = q^-x + kappa^2 q^(x-t-c)."""
        x = np.asarray(x, dtype=float)
        return self.q ** (-x) + self.gd(t) * self.q**x

    def mu_x(self, t, x):
        x = np.asarray(x, dtype=float)
        return self.logq * (-(self.q ** (-x)) + self.gd(t) * self.q**x)

    def _upper_branch(self, t: float) -> bool:
        xm = 0.5 * (self.lower(t) + self.upper(t))
        return self.q ** (-2 * xm) > self.gd(t)

    def mu_inv(self, t: float, v):
        """Inverse of x -> mu(t, x) on the branch containing the hexagon line.

        Solves u^2 - v u + K = 0 for u = q^-x, K = kappa^2 q^(-t-c).
        """
        v = np.asarray(v, dtype=float)
        K = self.gd(t)
        disc = v * v - 4 * K
        if np.any(disc < -1e-12 * np.maximum(1, v * v)):
            raise DegenerateInversion("mu value outside the range of mu(t, .)")
        r = np.sqrt(np.maximum(disc, 0))
        u = (v + r) / 2 if (K <= 0 or self._upper_branch(t)) else (v - r) / 2
        out = -np.log(u) / self.logq
        return out if out.ndim else float(out)

    def coefficients(self, t: float) -> "LimitCoefficients":
        """Limit coefficients of the ensemble on line t (0 <= t <= b + c)."""
        if not 0 <= t <= self.b + self.c:
            raise ValueError("t outside [0, b+c]")
        q = self.q
        return LimitCoefficients(q, q ** (-self.c - 1), q ** (-self.b - 1), q ** (-t - 1),
                                 self.k2 * q ** (1 - self.c), t=t, scaled=self)


# --------------------------------------------------------- limit coefficients


@dataclass(frozen=True)
class LimitCoefficients:
    """Limits A(xi), C(xi), a(xi), b(xi) and mu(x) of a rescaled q-Racah ensemble."""

    q: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    t: float | None = None
    scaled: ScaledParams | None = field(default=None, compare=False, repr=False)

    @property
    def logq(self) -> float:
        return math.log(self.q)

    @property
    def gd(self) -> float:
        return self.gamma * self.delta

    @property
    def ab(self) -> float:
        return self.alpha * self.beta

    @property
    def xi_max(self) -> float:
        """-log_q gamma, the second zero of a(xi)."""
        return -math.log(self.gamma) / self.logq

    def A(self, xi):
        qx = self.q ** np.asarray(xi, dtype=float)
        g, a, ab, bd = self.gamma, self.alpha, self.ab, self.beta * self.delta
        return (1 - g * qx) * (1 - a * qx) * (1 - ab * qx) * (1 - bd * qx) / (1 - ab * qx * qx) ** 2

    def C(self, xi):
        qx = self.q ** np.asarray(xi, dtype=float)
        b, d, a, g, ab = self.beta, self.delta, self.alpha, self.gamma, self.ab
        return (1 - qx) * (1 - b * qx) * (d - a * qx) * (g - ab * qx) / (1 - ab * qx * qx) ** 2

    def a2(self, xi):
        """a(xi)^2 = A C (may be negative outside [0, -log_q gamma])."""
        return self.A(xi) * self.C(xi)

    def a(self, xi):
        return np.sqrt(np.maximum(self.a2(xi), 0.0))

    def b(self, xi):
        return 1 + self.gd - self.A(xi) - self.C(xi)

    def mu(self, x):
        x = np.asarray(x, dtype=float)
        return self.q ** (-x) + self.gd * self.q**x

    def mu_x(self, x):
        x = np.asarray(x, dtype=float)
        return self.logq * (-(self.q ** (-x)) + self.gd * self.q**x)

    def y(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.q ** (-xi) + self.ab * self.q**xi

    def discriminant_band(self, x, xi):
        """4 a(xi)^2 - (mu(x) - b(xi))^2."""
        return 4 * self.a2(xi) - (self.mu(x) - self.b(xi)) ** 2

    def h(self, x) -> float:
        a, b, g, d = self.alpha, self.beta, self.gamma, self.delta
        m = self.mu(x)
        return (2 * m * (a * (b + g + 1) + g) - 4 * a * g - 4 * b * g * d**2
                + d * (2 * m * (b * (a + g + 1) + g) - 4 * (a * (b * g + b + g) + g * (b + g + 1))))

    def p(self, x) -> float:
        a, b, g, d = self.alpha, self.beta, self.gamma, self.delta
        m = self.mu(x)
        return (2 * a * (-2 * m * (b * g + b + g) + g * (b + g + 1) + 2 * b * m**2)
                - a**2 * (b**2 - 2 * b * (g - 2 * m + 1) + (g - 1) ** 2) - g**2
                + d * 2 * (a * (b + g + 1) + g) * (b * (a + g - 2 * m + 1) + g)
                + d**2 * (-((a - 1) ** 2) * b**2 + 2 * (a + 1) * (b + 1) * b * g - (b - 1) ** 2 * g**2))

    def xi_of_y(self, Y: float) -> float:
        """Inverse of y(xi) on the monotone branch containing [0, 1]."""
        ab, q = self.ab, self.q
        if ab == 0:
            return -math.log(Y) / self.logq
        disc = Y * Y - 4 * ab
        # at the fold Y = 2 sqrt(ab) (hexagon boundary) Y carries sqrt(eps) rounding
        if disc < -1e-6 * max(1.0, Y * Y):
            raise DegenerateInversion(f"y^2 - 4 alpha beta = {disc} < 0")
        r = math.sqrt(max(disc, 0.0))
        # below the turning point xi* = -log_q(ab)/2 one has q^(2 xi) ab < 1
        u = (Y - r) / (2 * ab) if (ab < 0 or q > 1) else (Y + r) / (2 * ab)
        if u <= 0:
            raise DegenerateInversion("y(xi) inversion produced a nonpositive q^xi")
        return math.log(u) / self.logq

    def y_roots(self, x: float):
        """Roots Y_- , Y_+ (ordered by their xi) of -D Y^2 + h Y + p = 0, or None."""
        mx = float(self.mu_x(x))
        if abs(mx) < MU_PRIME_TOL:
            raise SingularPoint(f"mu'(x) vanishes at x={x}")
        D = (mx / self.logq) ** 2
        h, p = self.h(x), self.p(x)
        disc = h * h + 4 * D * p
        if disc < 0:
            if disc > -1e-12 * h * h:
                disc = 0.0
            else:
                return None
        r = math.sqrt(disc)
        Y1, Y2 = (h - r) / (2 * D), (h + r) / (2 * D)
        try:
            x1, x2 = self.xi_of_y(Y1), self.xi_of_y(Y2)
        except DegenerateInversion:
            # Y beyond the fold of y(xi): no real xi reaches it
            return None
        return (Y1, Y2) if x1 <= x2 else (Y2, Y1)

    def xi_roots(self, x: float):
        """Ordered solutions (xi_-, xi_+) of 4a(xi)^2 = (mu(x) - b(xi))^2, or None."""
        Y = self.y_roots(x)
        if Y is None:
            return None
        return self.xi_of_y(Y[0]), self.xi_of_y(Y[1])

    def density(self, x: float) -> float:
        """Closed-form limiting density at x."""
        Y = self.y_roots(x)
        if Y is None:
            return 0.0
        xm, xp = self.xi_of_y(Y[0]), self.xi_of_y(Y[1])
        if xp <= 1:
            return 1.0
        if xm >= 1:
            return 0.0
        Ym, Yp = Y
        # signed denominator: reduces to |Y_- - Y_+| for q > 1
        arg = (2 * float(self.y(1.0)) - Ym - Yp) / (Ym - Yp)
        return _clamped_arccos(arg) / math.pi

    def liquid_interval(self):
        """x-interval mapped by mu onto [b(1) - 2a(1), b(1) + 2a(1)] (if scaled is known)."""
        if self.scaled is None:
            raise ValueError("liquid_interval needs a hexagon line")
        b1, a1 = float(self.b(1.0)), float(self.a(1.0))
        xs = sorted(self.scaled.mu_inv(self.t, [b1 - 2 * a1, b1 + 2 * a1]))
        return xs[0], xs[1]


def density_closed_form(lc: LimitCoefficients, x: float) -> float:
    """rho(x) from the roots xi_+-(x)."""
    return lc.density(x)


# ---------------------------------------------------------------- quadrature


def _positive_pieces(G: Callable[[float], float], lo: float, hi: float, n: int = 4000,
                     Gvec: Callable[[np.ndarray], np.ndarray] | None = None):
    """Subintervals of [lo, hi] where G > 0, with sign changes refined by brentq."""
    xs = np.linspace(lo, hi, n + 1)
    g = np.asarray(Gvec(xs), dtype=float) if Gvec is not None else np.array([G(v) for v in xs])
    pieces, start = [], (lo if g[0] > 0 else None)
    for i in range(n):
        if (g[i] > 0) != (g[i + 1] > 0):
            r = optimize.brentq(G, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15) if g[i] * g[i + 1] < 0 else xs[i + 1]
            if g[i] > 0:
                pieces.append((start, r))
                start = None
            else:
                start = r
    if start is not None:
        pieces.append((start, hi))
    return pieces


def _arcsine_piece(f: Callable[[float], float], l: float, r: float, limit: int) -> float:
    """Integrate f over [l, r] after xi = l + (r-l)(1-cos phi)/2."""
    if r <= l:
        return 0.0
    half = (r - l) / 2

    def g(phi):
        return f(l + half * (1 - math.cos(phi))) * half * math.sin(phi)

    val, err, *rest = integrate.quad(g, 0, math.pi, limit=limit, epsabs=1e-13, epsrel=1e-12, full_output=1)
    if len(rest) > 1 and "ier" not in rest[0] and err > 1e-7:
        raise QuadratureNonConvergence(f"quadrature error estimate {err}")
    return val


def density_quadrature(lc: LimitCoefficients, x: float, limit: int = 200) -> float:
    """rho(x) = (|mu'(x)|/pi) int_{I(x)} dxi / sqrt(4a^2 - (mu - b)^2) by quadrature.

    Zeros of the band function are located on [0, 1] by scanning and
    brentq, independently of the quadratic in y.
    """
    mx = abs(float(lc.mu_x(x)))
    if mx < MU_PRIME_TOL:
        raise SingularPoint(f"mu'(x) vanishes at x={x}")
    m = float(lc.mu(x))

    def Gvec(xi):
        return 4 * lc.a2(xi) - (m - lc.b(xi)) ** 2

    def G(xi):
        return float(Gvec(xi))

    total = 0.0
    for l, r in _positive_pieces(G, 0.0, 1.0, Gvec=Gvec):
        total += _arcsine_piece(lambda xi: 1.0 / math.sqrt(max(G(xi), 1e-300)), l, r, limit)
    return mx / math.pi * total


# ------------------------------------------------------------ trigonometric


@dataclass(frozen=True)
class TrigParams:
    """Trigonometric q-Racah limit: q = e^(i g_q), alpha = q^g_alpha, ..."""

    g_q: float
    g_alpha: float
    g_beta: float
    g_gamma: float
    g_delta: float

    def __post_init__(self):
        if not 0 < self.g_q < math.pi:
            raise RegimeViolation("need 0 < g_q < pi")
        if not -math.pi / self.g_q < self.g_gamma < 0:
            raise RegimeViolation("need -pi/g_q < g_gamma < 0")
        gq, P = self.g_q, 2 * math.pi
        s1 = self.g_alpha + self.g_beta
        k1 = math.floor(s1 * gq / P)
        if not (P * k1 / gq < s1 < P * (k1 + 1) / gq + 2 * self.g_gamma):
            raise RegimeViolation("g_alpha + g_beta outside the admissible window")
        s2 = self.g_gamma + self.g_delta
        k2 = math.floor(s2 * gq / P)
        if not (P * k2 / gq <= s2 <= P * (k2 + 1) / gq + 2 * self.g_gamma):
            raise RegimeViolation("g_gamma + g_delta outside the admissible window")

    def check_x(self, x: float):
        if not 0 <= x <= -self.g_gamma:
            raise OutOfRange(f"x={x} outside the lattice range [0, {-self.g_gamma}]")

    def _e(self, g):
        return cmath.exp(1j * self.g_q * g)

    def s_ab(self) -> float:
        return (self.g_alpha + self.g_beta) / 2

    def s_gd(self) -> float:
        return (self.g_gamma + self.g_delta) / 2

    def A_tilde(self, xi):
        """Closed trigonometric form of A(xi)/sqrt(gamma delta)."""
        gq = self.g_q
        S = np.sin
        xi = np.asarray(xi, dtype=float)
        num = -4 * S(gq * (self.g_gamma + xi) / 2) * S(gq * (self.g_alpha + xi) / 2) \
            * S(gq * (self.g_alpha + self.g_beta + xi) / 2) * S(gq * (self.g_delta + self.g_beta + xi) / 2)
        return num / S(gq * (self.s_ab() + xi)) ** 2

    def C_tilde(self, xi):
        gq = self.g_q
        S = np.sin
        xi = np.asarray(xi, dtype=float)
        num = -4 * S(gq * xi / 2) * S(gq * (self.g_beta + xi) / 2) \
            * S(gq * (self.g_alpha - self.g_delta + xi) / 2) * S(gq * (self.g_alpha + self.g_beta - self.g_gamma + xi) / 2)
        return num / S(gq * (self.s_ab() + xi)) ** 2

    def mu_tilde(self, x):
        return 2 * np.cos(self.g_q * (np.asarray(x, dtype=float) + self.s_gd()))

    def mu_tilde_x(self, x):
        return -2 * self.g_q * np.sin(self.g_q * (np.asarray(x, dtype=float) + self.s_gd()))

    def y_tilde(self, xi):
        return 2 * np.cos(self.g_q * (self.s_ab() + np.asarray(xi, dtype=float)))

    def xi_of_y_tilde(self, Yt: float) -> float:
        """Inverse of y~ on the monotone branch containing xi = 0."""
        phi0 = self.g_q * self.s_ab()
        k = math.floor(phi0 / math.pi)
        theta = _clamped_arccos((-1) ** k * Yt / 2)
        return (k * math.pi + theta) / self.g_q - self.s_ab()

    def complex_limit(self) -> LimitCoefficients:
        """Complex-valued limit coefficients (formulas of the real case)."""
        lc = object.__new__(LimitCoefficients)
        for name, val in dict(q=self._e(1), alpha=self._e(self.g_alpha), beta=self._e(self.g_beta),
                              gamma=self._e(self.g_gamma), delta=self._e(self.g_delta),
                              t=None, scaled=None).items():
            object.__setattr__(lc, name, val)
        return lc


def _complex_quadratic(tp: TrigParams, x: float):
    """Real coefficients (c2, c1, c0) of the quadratic in y~ = y/sqrt(alpha beta)."""
    lc = tp.complex_limit()
    q = lc.q
    logq = 1j * tp.g_q
    m = lc.q ** (-x) + lc.gamma * lc.delta * q**x
    mx = logq * (-(q ** (-x)) + lc.gamma * lc.delta * q**x)
    D = (mx / logq) ** 2
    # h and p are polynomial in mu with the real-case expressions
    a, b, g, d = lc.alpha, lc.beta, lc.gamma, lc.delta
    h = (2 * m * (a * (b + g + 1) + g) - 4 * a * g - 4 * b * g * d**2
         + d * (2 * m * (b * (a + g + 1) + g) - 4 * (a * (b * g + b + g) + g * (b + g + 1))))
    p = (2 * a * (-2 * m * (b * g + b + g) + g * (b + g + 1) + 2 * b * m**2)
         - a**2 * (b**2 - 2 * b * (g - 2 * m + 1) + (g - 1) ** 2) - g**2
         + d * 2 * (a * (b + g + 1) + g) * (b * (a + g - 2 * m + 1) + g)
         + d**2 * (-((a - 1) ** 2) * b**2 + 2 * (a + 1) * (b + 1) * b * g - (b - 1) ** 2 * g**2))
    sgd = tp._e(tp.s_gd())
    sab = tp._e(tp.s_ab())
    coeffs = (-D / sgd**2, h / (sgd**2 * sab), p / (sgd**2 * sab**2))
    out = []
    for c in coeffs:
        if abs(c.imag) > 1e-9 * max(1.0, abs(c)):
            raise RegimeViolation("trigonometric quadratic has non-real coefficients")
        out.append(c.real)
    return tuple(out)


def density_trigonometric(tp: TrigParams, x: float) -> float:
    """Closed-form trigonometric density with y~(xi) = 2 cos(g_q(xi + (g_a+g_b)/2))."""
    tp.check_x(x)
    if abs(float(tp.mu_tilde_x(x))) < MU_PRIME_TOL:
        raise SingularPoint(f"mu'(x) vanishes at x={x}")
    c2, c1, c0 = _complex_quadratic(tp, x)
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        if disc > -1e-12 * c1 * c1:
            disc = 0.0
        else:
            return 0.0
    r = math.sqrt(disc)
    Y = sorted([(-c1 - r) / (2 * c2), (-c1 + r) / (2 * c2)], key=tp.xi_of_y_tilde)
    xm, xp = tp.xi_of_y_tilde(Y[0]), tp.xi_of_y_tilde(Y[1])
    if xp <= 1:
        return 1.0
    if xm >= 1:
        return 0.0
    arg = (2 * float(tp.y_tilde(1.0)) - Y[0] - Y[1]) / (Y[0] - Y[1])
    return _clamped_arccos(arg) / math.pi


def density_trigonometric_quadrature(tp: TrigParams, x: float, limit: int = 200) -> float:
    """Direct quadrature of the trigonometric density integral with the sine forms of A~, C~."""
    tp.check_x(x)
    mx = abs(float(tp.mu_tilde_x(x)))
    if mx < MU_PRIME_TOL:
        raise SingularPoint(f"mu'(x) vanishes at x={x}")
    m = float(tp.mu_tilde(x))
    b0 = 2 * math.cos(tp.g_q * tp.s_gd())

    def G(xi):
        At, Ct = float(tp.A_tilde(xi)), float(tp.C_tilde(xi))
        return 4 * At * Ct - (m - b0 + At + Ct) ** 2

    total = 0.0
    for l, r in _positive_pieces(G, 0.0, 1.0):
        total += _arcsine_piece(lambda xi: 1.0 / math.sqrt(max(G(xi), 1e-300)), l, r, limit)
    return mx / math.pi * total


# ---------------------------------------------------------------- LLN tools


def mean_lln_integral(a: Callable, b: Callable, p: Callable, mu_inverse: Callable | None = None,
                      n_theta: int = 257) -> float:
    """(1/pi) int_0^1 int_0^pi p(b(xi) + 2 a(xi) cos theta) dtheta dxi.

    The theta form covers the point-mass branch a = 0 automatically.  When
    ``mu_inverse`` is given the test function is applied as p(mu^-1(.)).
    """
    f = p if mu_inverse is None else (lambda v: p(mu_inverse(v)))
    th, wt = np.polynomial.legendre.leggauss(n_theta)
    th = (th + 1) * math.pi / 2
    wt = wt * math.pi / 2

    def inner(xi):
        v = b(xi) + 2 * a(xi) * np.cos(th)
        return float(np.dot(wt, f(v))) / math.pi

    val, err = integrate.quad(inner, 0.0, 1.0, limit=200, epsabs=1e-12, epsrel=1e-12)
    if err > 1e-8:
        raise QuadratureNonConvergence(f"xi quadrature error estimate {err}")
    return val


# ------------------------------------------------------------------ profiles


def _line_breaks(lc: LimitCoefficients) -> list[float]:
    sp, t = lc.scaled, lc.t
    lo, hi = sp.lower(t), sp.upper(t)
    out = []
    try:
        x1, x2 = lc.liquid_interval()
        out = [v for v in (x1, x2) if lo < v < hi]
    except (DegenerateInversion, ValueError):
        pass
    return out


def limit_height(sp: ScaledParams, t: float, x: float) -> float:
    """h(t, x) = int_{max(0, t-b)}^x rho(t, u) du."""
    lc = sp.coefficients(t)
    lo, hi = sp.lower(t), sp.upper(t)
    x = min(max(x, lo), hi)
    if x <= lo:
        return 0.0
    pts = [lo] + [v for v in _line_breaks(lc) if v < x] + [x]
    total = 0.0
    for l, r in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lc.density, l, r, limit=200, epsabs=1e-11, epsrel=1e-11)
        total += val
    return total


@dataclass
class DensityProfile:
    """rho(t, .) on a grid together with the roots and the phase partition."""

    t: float
    grid: np.ndarray
    rho: np.ndarray
    xi_minus: np.ndarray
    xi_plus: np.ndarray
    support: tuple[float, float]
    liquid: tuple[float, float] | None
    phase: list[str]

    @property
    def saturated(self) -> list[tuple[float, float]]:
        return _runs(self.grid, self.phase, "saturated")

    @property
    def void(self) -> list[tuple[float, float]]:
        return _runs(self.grid, self.phase, "void")

    def rows(self):
        for i in range(len(self.grid)):
            yield (self.t, self.grid[i], self.rho[i], self.xi_minus[i], self.xi_plus[i], self.phase[i])


def _runs(grid, phase, tag):
    out, start = [], None
    for x, p in zip(grid, phase):
        if p == tag and start is None:
            start = x
        if p != tag and start is not None:
            out.append((start, prev))
            start = None
        prev = x
    if start is not None:
        out.append((start, prev))
    return out


def density_profile(sp: ScaledParams, t: float, npts: int = 200) -> DensityProfile:
    """Density on npts interior points of line t."""
    lc = sp.coefficients(t)
    lo, hi = sp.lower(t), sp.upper(t)
    grid = lo + (hi - lo) * (np.arange(npts) + 0.5) / npts
    rho = np.empty(npts)
    xm = np.full(npts, np.nan)
    xp = np.full(npts, np.nan)
    phase = []
    for i, x in enumerate(grid):
        r = lc.xi_roots(x)
        if r is not None:
            xm[i], xp[i] = r
        rho[i] = lc.density(x)
        phase.append("saturated" if rho[i] == 1 else "void" if rho[i] == 0 else "liquid")
    try:
        liq = lc.liquid_interval()
    except (DegenerateInversion, ValueError):
        liq = None
    return DensityProfile(t, grid, rho, xm, xp, (lo, hi), liq, phase)


def dimitrov_knizel(lc: LimitCoefficients, x: float) -> tuple[float, float, float]:
    """(R(q^-x), Phi^- Phi^+(q^-1), rho) through the loop-equation quantities.

    rho = arccos(R / (2 sqrt(Phi^- Phi^+))) / pi.
    """
    Ym, Yp = lc.y_roots(x)
    D = (float(lc.mu_x(x)) / lc.logq) ** 2
    qx = lc.q ** (-2 * x)
    R = qx / 2 * D * (2 * float(lc.y(1.0)) - Ym - Yp)
    PP = qx**2 / 16 * D**2 * abs(Ym - Yp) ** 2
    rho = _clamped_arccos(R / (2 * math.sqrt(PP)) * math.copysign(1, Ym - Yp)) / math.pi
    return R, PP, rho


def fit_edge_exponent(f: Callable[[float], float], x0: float, side: int, level: float,
                      lo: float = 1e-6, hi: float = 1e-3, npts: int = 13) -> float:
    """Least-squares slope of log|f(x0 + side d) - level| against log d, d in [lo, hi]."""
    d = np.logspace(math.log10(lo), math.log10(hi), npts)
    r = np.array([abs(f(x0 + side * v) - level) for v in d])
    if np.any(r <= 0):
        raise ValueError("edge fit hit an exact zero; move the window")
    return float(np.polyfit(np.log(d), np.log(r), 1)[0])
