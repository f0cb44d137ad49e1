"""
q-Pochhammer symbols, the q-Racah orthogonality weight and its recurrence.

The weight on {0, ..., M} is

    w(y) = (aq, bdq, gq, gdq; q)_y (1 - gd q^(2y+1))
           / [(q, gd q/a, g q/b, dq; q)_y (abq)^y (1 - gdq)]

with g = q^-(M+1), and the orthonormal polynomials r_k are polynomials in
nu(y) = q^-y + gd q^(y+1).  Weights are accumulated through the ratio
w(y+1)/w(y) so that large M does not overflow the Pochhammer products.

In the trigonometric regime (|q| = 1, non-real) every quantity is complex.
The weight is real up to rounding and nu becomes real after dividing by
sqrt(gdq), so this module exposes the rescaled coordinate and recurrence.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDenominator,
    NumericalBreakdown,
    OutOfRange,
    RegimeViolation,
)

IMAG_TOL = 1e-12
DENOM_TOL = 1e-14
REGIMES = ("case1", "case2", "case3", "case4", "trigonometric")


def q_pochhammer(x: complex, q: complex, k: int) -> complex:
    """Return (x; q)_k = prod_{i<k} (1 - x q^i)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = 1.0
    qi = 1.0
    for _ in range(k):
        out *= 1 - x * qi
        qi *= q
    return out


def _is_trig(q: complex) -> bool:
    q = complex(q)
    return abs(q.imag) > 1e-15 and abs(abs(q) - 1) < 1e-12


@dataclass(frozen=True)
class QRacahParams:
    """Parameters (q, alpha, beta, gamma, delta, M) of a q-Racah weight.

    ``gamma`` defaults to q^-(M+1).  Construction validates that the weight
    has constant sign on the lattice and that log_q(ab) < 2 log_q(g) in the
    real regimes (equality occurs on the middle slice of
    a hexagon); pass ``check=False`` to skip (used by limit tests).
    """

    q: complex
    alpha: complex
    beta: complex
    delta: complex
    M: int
    gamma: complex | None = None
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("M must be nonnegative")
        g = self.q ** (-(self.M + 1))
        if self.gamma is None:
            object.__setattr__(self, "gamma", g)
        elif abs(self.gamma * self.q ** (self.M + 1) - 1) > 1e-9:
            raise RegimeViolation("gamma must equal q^-(M+1)")
        if not self.trigonometric:
            for name in ("q", "alpha", "beta", "delta"):
                v = complex(getattr(self, name))
                if abs(v.imag) > 0:
                    raise RegimeViolation(f"{name} must be real outside the trigonometric regime")
                object.__setattr__(self, name, v.real)
            object.__setattr__(self, "gamma", complex(self.gamma).real)
        if self.check:
            self.validate()

    @property
    def trigonometric(self) -> bool:
        return _is_trig(self.q)

    @property
    def regime(self) -> str:
        """Structural regime tag: base side of 1 and sign of delta."""
        if self.trigonometric:
            return "trigonometric"
        q, d = self.q, self.delta
        if q <= 0 or q == 1:
            raise RegimeViolation("real base must be positive and different from 1")
        if q < 1:
            return "case1" if d >= 0 else "case3"
        return "case2" if d >= 0 else "case4"

    @property
    def gdq(self) -> complex:
        return self.gamma * self.delta * self.q

    def validate(self) -> None:
        tag = self.regime
        if tag != "trigonometric":
            if self.alpha <= 0 or self.beta <= 0:
                raise RegimeViolation("alpha and beta must be positive")
            lq = math.log(self.q)
            lhs = math.log(self.alpha * self.beta) / lq
            rhs = 2 * math.log(self.gamma) / lq
            if lhs > rhs + 1e-9:
                raise RegimeViolation("log_q(alpha beta) <= 2 log_q(gamma) fails")
        if self.M <= 10_000:
            log_weights(self)  # raises on a sign change


def _weight_ratios(p: QRacahParams) -> np.ndarray:
    """w(y+1)/w(y) for y = 0..M-1, complex dtype."""
    q = complex(p.q)
    a, b, g, d = (complex(v) for v in (p.alpha, p.beta, p.gamma, p.delta))
    gd = g * d
    y = np.arange(p.M, dtype=float)
    qy1 = q ** (y + 1)
    num = (1 - a * qy1) * (1 - b * d * qy1) * (1 - g * qy1) * (1 - gd * qy1)
    den = (1 - qy1) * (1 - gd / a * qy1) * (1 - g / b * qy1) * (1 - d * qy1)
    s0 = 1 - gd * q ** (2 * y + 1)
    s1 = 1 - gd * q ** (2 * y + 3)
    if np.any(np.abs(den) < DENOM_TOL) or np.any(np.abs(s0) < DENOM_TOL):
        raise RegimeViolation("singular q-Racah parameters: vanishing weight denominator")
    return num / den * s1 / s0 / (a * b * q)


def _realify(z: np.ndarray, what: str) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    scale = np.maximum(np.abs(z), 1.0)
    if np.any(np.abs(z.imag) > IMAG_TOL * scale):
        raise RegimeViolation(f"{what} has a non-negligible imaginary part")
    return z.real.copy()


def weights(p: QRacahParams) -> np.ndarray:
    """Vector of w(y), y = 0..M, with w(0) = 1 (may overflow for very large M)."""
    w = np.concatenate([[1.0 + 0j], np.cumprod(_weight_ratios(p))])
    return _realify(w, "weight")


def log_weights(p: QRacahParams) -> np.ndarray:
    """log w(y) with log w(0) = 0; -inf where a weight vanishes."""
    r = _realify(_weight_ratios(p), "weight ratio")
    if np.any(r < 0):
        raise RegimeViolation("weight changes sign on the lattice")
    with np.errstate(divide="ignore"):
        return np.concatenate([[0.0], np.cumsum(np.log(r))])


def normalized_weights(p: QRacahParams) -> np.ndarray:
    """w / sum(w), computed in log space."""
    lw = log_weights(p)
    w = np.exp(lw - lw.max())
    return w / w.sum()


def qracah_weight(p: QRacahParams, y: int) -> float:
    """Single weight value w(y)."""
    if not 0 <= y <= p.M:
        raise OutOfRange(f"y={y} outside [0, {p.M}]")
    w = weights(p)[y]
    if w < 0:
        raise RegimeViolation("negative weight")
    return float(w)


def nu(p: QRacahParams, y) -> complex | np.ndarray:
    """Coordinate q^-y + gd q^(y+1); complex in the trigonometric regime."""
    y = np.asarray(y, dtype=float)
    out = p.q ** (-y) + p.gdq * p.q ** y
    return out if out.ndim else out[()]


def nu_scale(p: QRacahParams) -> complex:
    """Factor s with nu/s real: sqrt(gdq) in the trigonometric regime, else 1."""
    return cmath.sqrt(p.gdq) if p.trigonometric else 1.0


def nu_tilde(p: QRacahParams, y) -> np.ndarray:
    """Real monotone coordinate nu / sqrt(gdq) (equals nu outside the trig regime)."""
    v = np.asarray(nu(p, y)) / nu_scale(p)
    out = _realify(np.atleast_1d(v), "rescaled nu")
    return out.reshape(np.shape(y)) if np.ndim(y) else out[0]


def recurrence_AC(p: QRacahParams, j: int) -> tuple[complex, complex]:
    """(A_j, C_j) of the monic three-term recurrence, with A_M = 0 exactly."""
    if not 0 <= j <= p.M:
        raise OutOfRange(f"j={j} outside [0, {p.M}]")
    q, a, b, g, d = p.q, p.alpha, p.beta, p.gamma, p.delta
    ab = a * b
    d1 = 1 - ab * q ** (2 * j + 1)
    A = C = 0.0
    # A_M vanishes through (1 - g q^(M+1)); its denominator may vanish too on
    # the middle slice of a hexagon, where ab = g^2 exactly.
    if j < p.M:
        d2 = 1 - ab * q ** (2 * j + 2)
        if abs(d1) < DENOM_TOL or abs(d2) < DENOM_TOL:
            raise DegenerateDenominator(f"recurrence denominator vanishes at j={j}")
        qj1 = q ** (j + 1)
        A = (1 - g * qj1) * (1 - a * qj1) * (1 - ab * qj1) * (1 - d * b * qj1) / (d1 * d2)
    if j > 0:
        d0 = 1 - ab * q ** (2 * j)
        if abs(d0) < DENOM_TOL or abs(d1) < DENOM_TOL:
            raise DegenerateDenominator(f"recurrence denominator vanishes at j={j}")
        qj = q ** j
        C = q * (1 - qj) * (1 - b * qj) * (d - a * qj) * (g - ab * qj) / (d0 * d1)
    return A, C


@dataclass(frozen=True)
class RecurrenceCoefficients:
    """Orthonormal recurrence nu r_j = a_j r_{j+1} + b_j r_j + a_{j-1} r_{j-1}.

    ``a`` has length ``length - 1`` and ``b`` has length ``length``.  In the
    trigonometric regime the coefficients refer to the rescaled coordinate.
    """

    a: np.ndarray
    b: np.ndarray
    length: int


def recurrence_coefficients(p: QRacahParams, length: int | None = None) -> RecurrenceCoefficients:
    """Jacobi entries for indices 0..length-1 (default: the full M+1)."""
    n = p.M + 1 if length is None else length
    if not 1 <= n <= p.M + 1:
        raise OutOfRange("length must lie in [1, M+1]")
    AC = [recurrence_AC(p, j) for j in range(n)]
    A = np.array([x[0] for x in AC], dtype=complex)
    C = np.array([x[1] for x in AC], dtype=complex)
    s = nu_scale(p)
    a2 = A[: n - 1] * C[1:n] / s**2
    b = (1 + p.gdq - A[:n] - C[:n]) / s
    a2 = _realify(a2, "a_j^2")
    if np.any(a2 < 0):
        raise RegimeViolation("negative A_j C_{j+1}")
    return RecurrenceCoefficients(np.sqrt(a2), _realify(b, "b_j"), n)


def _three_term(x: np.ndarray, phi0: np.ndarray, a: np.ndarray, b: np.ndarray, kmax: int) -> np.ndarray:
    out = np.empty((kmax + 1, len(x)))
    out[0] = phi0
    for k in range(kmax):
        if a[k] < 1e-300:
            raise NumericalBreakdown(f"a_{k} underflowed")
        nxt = (x - b[k]) * out[k]
        if k:
            nxt -= a[k - 1] * out[k - 1]
        out[k + 1] = nxt / a[k]
    return out


def orthonormal_functions(p: QRacahParams, kmax: int) -> np.ndarray:
    """Table phi[k, y] = r_k(y) sqrt(w(y) / sum w), rows orthonormal in l^2.

    The recurrence is run on these scaled values so that no polynomial value
    overflows where the weight is tiny.
    """
    if not 0 <= kmax <= p.M:
        raise OutOfRange("kmax must lie in [0, M]")
    rc = recurrence_coefficients(p, kmax + 1)
    x = nu_tilde(p, np.arange(p.M + 1))
    return _three_term(x, np.sqrt(normalized_weights(p)), rc.a, rc.b, kmax)


def orthonormal_polys(p: QRacahParams, kmax: int) -> np.ndarray:
    """Table r[k, y] of orthonormal polynomials for k <= kmax, y in 0..M.

    Normalized so that sum_y r_j r_k w = delta_jk with the unnormalized
    weight of :func:`weights`; leading coefficients are positive.
    """
    if not 0 <= kmax <= p.M:
        raise OutOfRange("kmax must lie in [0, M]")
    w = weights(p)
    Z = w.sum()
    if not Z > 0 or not np.isfinite(Z):
        raise NumericalBreakdown("weight total is not a positive finite number")
    rc = recurrence_coefficients(p, kmax + 1)
    x = nu_tilde(p, np.arange(p.M + 1))
    return _three_term(x, np.full(p.M + 1, 1 / math.sqrt(Z)), rc.a, rc.b, kmax)


def hahn_weights(alpha_exp: int, beta_exp: int, M: int) -> np.ndarray:
    """q -> 1 limit of the delta = 0 weight with alpha = q^alpha_exp, beta = q^beta_exp.

    w(y) = (alpha_exp+1)_y (-M)_y / (y! (-M-beta_exp)_y), proportional to
    binom(alpha_exp+y, y) binom(beta_exp+M-y, M-y).
    """
    y = np.arange(M, dtype=float)
    ratio = (alpha_exp + 1 + y) * (-M + y) / ((y + 1) * (-M - beta_exp + y))
    w = np.concatenate([[1.0], np.cumprod(ratio)])
    if np.any(w < 0):
        raise RegimeViolation("Hahn weight changes sign")
    return w


def lanczos(x: np.ndarray, w: np.ndarray, kmax: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal functions of a discrete measure by Lanczos with reorthogonalization.

    Returns (phi, a, b): phi[k] = r_k sqrt(w / sum w) and the Jacobi entries.
    Used for measures without a closed-form recurrence (the Hahn limit).
    """
    x = np.asarray(x, float)
    v = np.sqrt(np.asarray(w, float))
    v /= np.linalg.norm(v)
    V = np.zeros((kmax + 1, len(x)))
    V[0] = v
    a = np.zeros(kmax)
    b = np.zeros(kmax + 1)
    for k in range(kmax + 1):
        u = x * V[k]
        b[k] = u @ V[k]
        if k == kmax:
            break
        u -= b[k] * V[k]
        if k:
            u -= a[k - 1] * V[k - 1]
        u -= V[: k + 1].T @ (V[: k + 1] @ u)
        a[k] = np.linalg.norm(u)
        if a[k] < 1e-300:
            raise NumericalBreakdown(f"Lanczos breakdown at step {k}")
        V[k + 1] = u / a[k]
    return V, a, b
