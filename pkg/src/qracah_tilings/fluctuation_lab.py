"""
Fluctuations of linear statistics.

For an orthogonal polynomial ensemble with Jacobi matrix J and n particles,

    log E exp(lam X(p)) = log det(Q + P exp(lam p(J)) P),

so the k-th cumulant is k! times the lam^k coefficient of
sum_j (-1)^(j+1)/j Tr (P (e^{lam p} - 1) P)^j.  For k = 2 this is
Tr(P p(J) Q p(J) P).  For several lines the matrices are conjugated by the
diagonal of coefficient ratios c_{k,s2}/c_{k,s1}, which are products of the
one-step ratios of the line-to-line transition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Sequence

import numpy as np
from scipy import fft

from .errors import QuadratureNonConvergence, WindowTooSmall
from .hexagon_tilings import (
    HexagonSpec,
    c_ratio,
    exact_samples,
    linear_statistic,
    mcmc_sample,
    slice_ensemble,
)
from .limit_shape import ScaledParams


# ------------------------------------------------------------ Jacobi matrices


@dataclass
class JacobiMatrix:
    """Symmetric tridiagonal matrix with diagonal b_j and off-diagonal a_j; n particles."""

    diag: np.ndarray
    offdiag: np.ndarray
    n: int

    def __post_init__(self):
        self.diag = np.asarray(self.diag, dtype=float)
        self.offdiag = np.asarray(self.offdiag, dtype=float)
        if len(self.offdiag) != len(self.diag) - 1:
            raise ValueError("offdiag must have one entry less than diag")

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self, lo: int = 0, hi: int | None = None) -> np.ndarray:
        hi = self.size if hi is None else min(hi, self.size)
        d = self.diag[lo:hi]
        o = self.offdiag[lo:hi - 1]
        return np.diag(d) + np.diag(o, 1) + np.diag(o, -1)

    @classmethod
    def from_slice(cls, h: HexagonSpec, s: int) -> "JacobiMatrix":
        """Full (M+1) x (M+1) Jacobi matrix of line s in the ensemble coordinate."""
        e = slice_ensemble(h, s)
        a, b = e.jacobi(e.M)
        return cls(np.real(b[: e.M + 1]), np.real(a[: e.M]), h.a)


def _poly_matrix(p, A: np.ndarray) -> np.ndarray:
    """p(A) for coefficients p[0] + p[1] x + ... by Horner."""
    coef = np.atleast_1d(np.asarray(p, dtype=float))
    out = coef[-1] * np.eye(len(A))
    for c in coef[-2::-1]:
        out = out @ A + c * np.eye(len(A))
    return out


def _degree(p) -> int:
    coef = np.trim_zeros(np.atleast_1d(np.asarray(p, dtype=float)), "b")
    return max(len(coef) - 1, 0)


def _compositions(k: int, j: int):
    if j == 1:
        yield (k,)
        return
    for first in range(1, k - j + 2):
        for rest in _compositions(k - first, j - 1):
            yield (first,) + rest


def _cumulant_from_blocks(Pm: list[np.ndarray], n_local: int, k: int) -> float:
    """k! sum_j (-1)^(j+1)/j sum_l prod Tr(P A^l1/l1! P ... ) for one matrix A.

    Pm[l] holds A^l; P projects on the first n_local indices.
    """
    total = 0.0
    for j in range(1, k + 1):
        for comp in _compositions(k, j):
            M = np.eye(n_local)
            den = 1.0
            for li in comp:
                M = M @ Pm[li][:n_local, :n_local]
                den *= math.factorial(li)
            total += (-1) ** (j + 1) / j * np.trace(M) / den
    return math.factorial(k) * total


def cumulant_trace(J: JacobiMatrix, p, k: int, window: int | None = None) -> float:
    """k-th cumulant (k <= 4) of sum_j p(x_j) from the Jacobi matrix.

    For k >= 2 only indices within ``window`` of n enter; the default
    half-width is deg(p) (k+1).  k = 1 uses the full top block.
    """
    if not 1 <= k <= 4:
        raise ValueError("k must be in 1..4")
    d = _degree(p)
    n = J.n
    if k == 1:
        A = _poly_matrix(p, J.dense(0, min(J.size, n + d)))
        return float(np.trace(A[:n, :n]))
    W = d * (k + 1) if window is None else int(window)
    if W < d * k / 2:
        raise WindowTooSmall(f"window {W} cannot hold the support of degree {d} at order {k}")
    if d == 0:
        return 0.0
    lo, hi = max(0, n - W), min(J.size, n + W)
    A = _poly_matrix(p, J.dense(lo, hi))
    powers = [np.eye(len(A))]
    for _ in range(k):
        powers.append(powers[-1] @ A)
    return _cumulant_from_blocks(powers, n - lo, k)


def transfer_ratios(h: HexagonSpec, s1: int, s2: int) -> np.ndarray:
    """d_k = c_{k,s2}/c_{k,s1} as the product of one-step ratios, zero past the common basis."""
    K = min(slice_ensemble(h, s).M for s in range(s1, s2 + 1)) + 1
    d = np.ones(K, dtype=complex)
    for s in range(s1, s2):
        d *= c_ratio(h, s, np.arange(K))
    if np.any(np.abs(d.imag) > 1e-9 * np.abs(d)):
        raise ValueError("coefficient ratios are not real")
    return d.real


def multi_time_moments(h: HexagonSpec, slices: Sequence[int], polys: Sequence) -> tuple[float, float]:
    """Mean and variance of sum_m sum_j p_m(nu_{s_m}(y_j(s_m))) for increasing slices."""
    order = np.argsort(slices)
    slices = [int(slices[i]) for i in order]
    polys = [polys[i] for i in order]
    n = h.a
    mats = []
    for s, p in zip(slices, polys):
        J = JacobiMatrix.from_slice(h, s)
        mats.append(_poly_matrix(p, J.dense()))
    mean = sum(float(np.trace(A[:n, :n])) for A in mats)
    var = 0.0
    for i1 in range(len(slices)):
        for i2 in range(len(slices)):
            A1, A2 = mats[i1], mats[i2]
            if slices[i1] == slices[i2]:
                K = min(len(A1), len(A2))
                d = np.ones(K)
            else:
                lo, hi = sorted((slices[i1], slices[i2]))
                d = transfer_ratios(h, lo, hi)
                if slices[i1] > slices[i2]:
                    A1, A2 = A2, A1
                K = len(d)
            B1 = A1[:n, n:K]
            B2 = A2[n:K, :n]
            # Tr(P A1 Q D A2 D^-1 P)
            var += float(np.einsum("ij,j,ji,i->", B1, d[n:K], B2, 1 / d[:n]))
    return mean, var


# ---------------------------------------------------------------- time change


def tau_of_t(sp: ScaledParams, t: float) -> float:
    """tau(t) = 1/2 log|(q^t - 1)/(1 - q^(t-b-c))|."""
    q = sp.q
    return 0.5 * math.log(abs((q**t - 1) / (1 - q ** (t - sp.b - sp.c))))


def c_index_ratio(h: HexagonSpec, s: int, k: int, l: int) -> float:
    """c_{k,s}/c_{l,s} for k < l from the telescoped product of the coefficient formula."""
    a, b, c = h.a, h.b, h.c
    q = complex(h.q).real
    r = np.arange(k + 1, l + 1)
    num = 1 - q ** (-(a + s - r).astype(float))
    den = 1 - q ** (-(a + b + c - s - r).astype(float))
    return math.sqrt(q ** (s * (l - k)) * float(np.prod(num / den)))


def c_direct(h: HexagonSpec, k: int, s: int) -> float:
    """c_{k,s} straight from its defining product (valid for k < a)."""
    a, b, c = h.a, h.b, h.c
    q = complex(h.q).real
    r = np.arange(k + 1)
    c0 = np.prod((1 - q ** (-(a + b + c - r).astype(float))) / (1 - q ** (-(a - r).astype(float))))
    rs = np.arange(s)
    cs = np.prod((1 - q ** (-a - rs + k).astype(float)) * (q ** (a + b + c - rs - k - 1).astype(float) - 1))
    return math.sqrt(c0 * cs)


# ------------------------------------------------------------ GFF variance


def cosine_coefficients(g: Callable[[np.ndarray], np.ndarray], N: int = 2048) -> tuple[np.ndarray, float]:
    """fhat_k = (1/pi) int_0^pi g(theta) cos(k theta) dtheta by the N-panel trapezoid rule.

    Returns the coefficients k = 0..N and the Richardson difference against N/2.
    """
    def coeffs(N):
        th = np.pi * np.arange(N + 1) / N
        return fft.dct(np.asarray(g(th), dtype=float), type=1) / (2 * N)

    c = coeffs(N)
    c2 = coeffs(N // 2)
    m = N // 4
    return c, float(np.max(np.abs(c[:m] - c2[:m])))


@dataclass
class GFFVarianceSpec:
    """Times, limiting a(1;t), b(1;t), tau(t) and test functions f(t, x)."""

    times: list[float]
    a1: list[float]
    b1: list[float]
    tau: list[float]
    f: list[Callable]
    mu_inv: list[Callable] = field(default_factory=list)

    def __post_init__(self):
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau must increase with t")

    @classmethod
    def from_scaled(cls, sp: ScaledParams, times, f) -> "GFFVarianceSpec":
        times = sorted(times)
        fs = f if isinstance(f, (list, tuple)) else [f] * len(times)
        a1, b1, tau, inv = [], [], [], []
        for t in times:
            lc = sp.coefficients(t)
            a1.append(float(lc.a(1.0)))
            b1.append(float(lc.b(1.0)))
            tau.append(tau_of_t(sp, t))
            inv.append(lambda v, t=t: sp.mu_inv(t, v))
        wrapped = [lambda x, t=t, g=g: g(t, x) for t, g in zip(times, fs)]
        return cls(list(times), a1, b1, tau, wrapped, inv)

    def angular(self, m: int) -> Callable[[np.ndarray], np.ndarray]:
        """theta -> f(t_m, mu^-1(b + 2a cos theta))."""
        a, b, f = self.a1[m], self.b1[m], self.f[m]
        inv = self.mu_inv[m] if self.mu_inv else (lambda v: v)
        return lambda th: f(inv(b + 2 * a * np.cos(th)))


def gff_variance(spec: GFFVarianceSpec, kmax: int | None = None, tol: float = 1e-10,
                 N: int = 2048) -> float:
    """sum_{r1,r2} sum_k k exp(-|tau_r1 - tau_r2| k) fhat_k^(r1) fhat_k^(r2)."""
    coefs = []
    for m in range(len(spec.times)):
        c, err = cosine_coefficients(spec.angular(m), N)
        if err > 1e-6 * max(1.0, float(np.max(np.abs(c)))):
            raise QuadratureNonConvergence(f"Fourier coefficients unresolved (Richardson gap {err:.3g})")
        coefs.append(c)
    kk = np.arange(N + 1)
    if kmax is None:
        # smallest kmax whose remaining tail is below tol for every pair
        env = np.max(np.abs(np.array(coefs)), axis=0)
        tail = np.cumsum((kk * env * env)[::-1])[::-1]
        ok = np.nonzero(tail <= tol)[0]
        kmax = int(ok[0]) if len(ok) else N // 4
        kmax = max(kmax, 1)
    k = kk[1 : kmax + 1]
    total = 0.0
    for r1, r2 in iproduct(range(len(coefs)), repeat=2):
        dt = abs(spec.tau[r1] - spec.tau[r2])
        total += float(np.sum(k * np.exp(-dt * k) * coefs[r1][1 : kmax + 1] * coefs[r2][1 : kmax + 1]))
    return total


def krein_bound(spec: GFFVarianceSpec, lipschitz: Sequence[float]) -> float:
    """N pi^3 sum_m L_m^2, an upper bound for the variance (L_m Lipschitz constants in theta)."""
    return len(spec.times) * math.pi**3 * float(np.sum(np.square(lipschitz)))


# ------------------------------------------------------------ Monte Carlo


def _draw(h: HexagonSpec, samples: int, seed: int, method: str, **kw) -> np.ndarray:
    if method == "exact":
        return exact_samples(h, samples, seed)
    chains = kw.pop("chains", samples)
    sweeps = kw.pop("sweeps", None)
    res = mcmc_sample(h, sweeps or 1, seed, chains=chains, **kw)
    return res.tilings[-samples:] if len(res.tilings) >= samples else res.tilings


def jackknife(values: np.ndarray, stat: Callable[[np.ndarray], float]) -> float:
    """Jackknife standard error of stat."""
    v = np.asarray(values)
    n = len(v)
    loo = np.array([stat(np.delete(v, i)) for i in range(n)])
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def sample_skewness(v: np.ndarray) -> tuple[float, float]:
    """(g1, stderr) with the normal-theory standard error sqrt(6 n (n-1) / ((n-2)(n+1)(n+3)))."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    c = v - v.mean()
    g1 = float(np.mean(c**3) / np.mean(c**2) ** 1.5) if np.any(c) else 0.0
    se = math.sqrt(6 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))
    return g1, se


def mc_fluctuation(h: HexagonSpec, f, times, samples: int, seed: int = 0, method: str = "exact",
                   tilings: np.ndarray | None = None, **kw) -> tuple[float, float, float]:
    """(mean, variance, jackknife stderr of the variance) of X(f) over independent draws."""
    if samples < 16:
        raise ValueError("need at least 16 samples")
    T = _draw(h, samples, seed, method, **kw) if tilings is None else tilings[:samples]
    X = np.array([linear_statistic(h, y, f, times) for y in T])
    var = float(np.var(X, ddof=1))
    return float(X.mean()), var, jackknife(X, lambda v: float(np.var(v, ddof=1)))


def gff_pairing(h: HexagonSpec, sp: ScaledParams, g: Callable, g2: Callable,
                tilings: np.ndarray, slices: Sequence[int] | None = None) -> np.ndarray:
    """Centered pairings of the counting height with phi(tau, theta) = g(tau) sin theta.

    Per sample -pi sum_m (tau_m - tau_{m-1}) int_0^pi H(t_m, x(theta)) Lap phi dtheta
    with Lap phi = (g'' - g) sin theta and x(theta) = mu^-1(b(1) + 2a(1) cos theta).
    The theta integral of a step function against sin theta is exact:
    each particle contributes 1 - cos theta_j or 1 + cos theta_j.
    """
    n = h.a
    S = h.b + h.c
    slices = list(range(1, S)) if slices is None else sorted(slices)
    if len(slices) < 2:
        raise ValueError("the tau increments need at least two slices")
    ts = [s / n for s in slices]
    tau = np.array([tau_of_t(sp, t) for t in ts])
    dtau = np.diff(np.concatenate([[2 * tau[0] - tau[1]], tau]))
    out = np.zeros(len(tilings))
    for m, (s, t) in enumerate(zip(slices, ts)):
        lap = float(g2(tau[m]) - g(tau[m]))
        if lap == 0:
            continue
        lc = sp.coefficients(t)
        a1, b1 = float(lc.a(1.0)), float(lc.b(1.0))
        if a1 <= 0:
            continue
        inc = float(sp.mu_x(t, 0.5 * (sp.lower(t) + sp.upper(t)))) < 0  # x grows with theta
        for i, y in enumerate(tilings):
            cth = np.clip((sp.mu(t, y[s] / n) - b1) / (2 * a1), -1, 1)
            val = np.sum(1 + cth) if inc else np.sum(1 - cth)
            out[i] += -math.pi * dtau[m] * lap * val
    return out - out.mean()


def gff_pairing_target(g: Callable, g1: Callable, lo: float, hi: float) -> float:
    """pi int |grad phi|^2 for phi = g(tau) sin theta, i.e. pi^2/2 int (g^2 + g'^2) dtau."""
    from scipy import integrate

    val, _ = integrate.quad(lambda u: g(u) ** 2 + g1(u) ** 2, lo, hi, limit=200)
    return math.pi**2 / 2 * val
