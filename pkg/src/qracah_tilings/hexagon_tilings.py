"""
Lozenge tilings of the a x b x c hexagon as families of interlacing particles.

Coordinates follow the (s, y) lattice picture.  The hexagon has corners
(0,0), (b,0), (b+c,c), (b+c,a+c), (c,a+c), (0,a).  On every vertical line s
the unit cells (s, y+1/2) with max(0, s-b) <= y <= min(s, c) + a - 1 are
either covered by a type III lozenge (black) or lie on the edge of a type I
or II lozenge (white).  There are exactly a white cells per line, at heights
y_1(s) < ... < y_a(s), and y_j(s+1) - y_j(s) is 1 for a type I lozenge and 0
for a type II lozenge.  The boundary is pinned by y_j(0) = j-1 and
y_j(b+c) = c+j-1.

A tiling is stored as an integer array ``y[s, j]`` of shape (b+c+1, a).
"""
from __future__ import annotations

import cmath
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DeterminantUnderflow, RegimeViolation, SignViolation, TooLarge
from .special_functions import (
    QRacahParams,
    hahn_weights,
    lanczos,
    nu_tilde,
    orthonormal_functions,
    normalized_weights,
    recurrence_coefficients,
)

ENUM_GUARD = 10**6


@dataclass(frozen=True)
class HexagonSpec:
    """Side lengths and weight parameters (q, kappa) of a finite hexagon."""

    a: int
    b: int
    c: int
    q: complex = 1.0
    kappa: complex = 0.5

    def __post_init__(self):
        if min(self.a, self.b, self.c) < 1:
            raise ValueError("side lengths must be positive")
        self.lozenge_sign()

    @property
    def regime(self) -> str:
        q, k = complex(self.q), complex(self.kappa)
        if abs(q.imag) > 1e-15:
            if abs(abs(q) - 1) > 1e-12 or abs(abs(k) - 1) > 1e-12:
                raise RegimeViolation("trigonometric regime needs |q| = |kappa| = 1")
            return "trigonometric"
        if q.real <= 0:
            raise RegimeViolation("q must be positive")
        if q.real == 1:
            return "uniform"
        if abs(k.imag) == 0:
            return "real"
        if abs(k.real) == 0:
            return "imaginary"
        raise RegimeViolation("kappa must be real or purely imaginary for real q")

    @property
    def phase(self) -> complex:
        """Constant factor removed from every lozenge weight (1 or i)."""
        return 1.0 if self.regime in ("real", "uniform") else 1j

    def lozenge_sign(self) -> int:
        """Common sign of w/phase over every cell that can host a type III lozenge."""
        vals = [lozenge_weight(self, s, y) / self.phase
                for s in range(1, self.b + self.c)
                for y in range(*_support(self, s))]
        vals = np.asarray(vals, dtype=complex)
        if np.any(np.abs(vals.imag) > 1e-12 * np.maximum(1, np.abs(vals))):
            raise RegimeViolation("lozenge weights are not real after removing the phase")
        re = vals.real
        if np.all(re > 0):
            return 1
        if np.all(re < 0):
            return -1
        raise RegimeViolation(
            "lozenge weights change sign; for real kappa and q the forbidden interval is "
            f"[{_forbidden_interval(self)[0]:.6g}, {_forbidden_interval(self)[1]:.6g}]"
        )


def _forbidden_interval(h: HexagonSpec) -> tuple[float, float]:
    q = complex(h.q).real
    lo, hi = q ** (-h.a + 0.5), q ** ((h.b + h.c - 1) / 2)
    return (min(lo, hi), max(lo, hi))


def _support(h: HexagonSpec, s: int) -> tuple[int, int]:
    """Half-open range of cell heights on line s."""
    return max(0, s - h.b), min(s, h.c) + h.a


def lozenge_weight(h: HexagonSpec, s: int, y) -> complex:
    """Weight u - 1/u of a type III lozenge whose black cell is (s, y+1/2).

    u = kappa q^((-s-c)/2) q^(y+1/2).  The corner convention was fixed by
    matching slice marginals of the enumerated ensemble against the q-Racah
    ensemble.
    """
    q = complex(h.q)
    u = complex(h.kappa) * q ** ((-s - h.c) / 2) * q ** (np.asarray(y) + 0.5)
    return u - 1 / u


def boundary(h: HexagonSpec) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(h.a)
    return j.copy(), j + h.c


def is_valid(h: HexagonSpec, y: np.ndarray) -> bool:
    y = np.asarray(y)
    y0, y1 = boundary(h)
    if y.shape != (h.b + h.c + 1, h.a):
        return False
    if not (np.array_equal(y[0], y0) and np.array_equal(y[-1], y1)):
        return False
    d = np.diff(y, axis=0)
    if np.any((d != 0) & (d != 1)):
        return False
    return bool(np.all(np.diff(y, axis=1) > 0))


def black_cells(h: HexagonSpec, y: np.ndarray) -> list[tuple[int, int]]:
    """Cells (s, y_b) covered by type III lozenges."""
    out = []
    for s in range(1, h.b + h.c):
        lo, hi = _support(h, s)
        occ = set(int(v) for v in y[s])
        out.extend((s, yb) for yb in range(lo, hi) if yb not in occ)
    return out


def log_tiling_weight(h: HexagonSpec, y: np.ndarray) -> float:
    """log of prod sign*w/phase over the type III lozenges of the tiling."""
    sgn = h.lozenge_sign()
    total = 0.0
    for s in range(1, h.b + h.c):
        lo, hi = _support(h, s)
        mask = np.ones(hi - lo, dtype=bool)
        mask[np.asarray(y[s]) - lo] = False
        cells = np.arange(lo, hi)[mask]
        vals = sgn * (lozenge_weight(h, s, cells) / h.phase).real
        if np.any(vals <= 0):
            raise SignViolation("nonpositive normalized lozenge weight")
        total += float(np.log(vals).sum())
    return total


def tiling_weight(h: HexagonSpec, y: np.ndarray) -> float:
    """Positive weight prod sign*w/phase; tilings differ from the raw product by one constant."""
    return math.exp(log_tiling_weight(h, y))


# ---------------------------------------------------------------- enumeration


def _next_configs(h: HexagonSpec, s: int, cfg: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Slice-(s+1) configurations reachable from cfg at slice s."""
    a, steps_left = h.a, h.b + h.c - s - 1
    out = [()]
    for j, v in enumerate(cfg):
        target = h.c + j
        nxt = []
        for part in out:
            for d in (0, 1):
                w = v + d
                if part and w <= part[-1]:
                    continue
                if not target - steps_left <= w <= target:
                    continue
                nxt.append(part + (w,))
        out = nxt
    return [t for t in out if len(t) == a]


@dataclass
class WeightedEnsemble:
    """All tilings with their normalized weights."""

    tilings: np.ndarray  # shape (N, b+c+1, a)
    log_weights: np.ndarray
    weights: np.ndarray  # exp(log_weights - max)
    Z: float

    @property
    def probabilities(self) -> np.ndarray:
        return self.weights / self.Z

    def __len__(self) -> int:
        return len(self.tilings)


def count_tilings(h: HexagonSpec) -> int:
    """Number of tilings by transfer over slice configurations."""
    layer = {tuple(range(h.a)): 1}
    for s in range(h.b + h.c):
        nxt: dict = {}
        for cfg, n in layer.items():
            for t in _next_configs(h, s, cfg):
                nxt[t] = nxt.get(t, 0) + n
        layer = nxt
    return sum(layer.values())


def macmahon(a: int, b: int, c: int) -> int:
    """prod_{i,j,k} (i+j+k-1)/(i+j+k-2), as an exact integer."""
    from fractions import Fraction

    out = Fraction(1)
    for i in range(1, a + 1):
        for j in range(1, b + 1):
            for k in range(1, c + 1):
                out *= Fraction(i + j + k - 1, i + j + k - 2)
    assert out.denominator == 1
    return out.numerator


def enumerate_tilings(h: HexagonSpec, guard: int = ENUM_GUARD) -> WeightedEnsemble:
    """Every tiling of the hexagon together with its weight."""
    n = count_tilings(h)
    if n > guard:
        raise TooLarge(f"{n} tilings exceed the guard {guard}")
    paths = [[tuple(range(h.a))]]
    for s in range(h.b + h.c):
        paths = [p + [t] for p in paths for t in _next_configs(h, s, p[-1])]
    T = np.array(paths, dtype=np.int64)
    logw = np.array([log_tiling_weight(h, t) for t in T])
    w = np.exp(logw - logw.max())
    return WeightedEnsemble(T, logw, w, float(w.sum()))


# ------------------------------------------------------- slice ensembles


def slice_exponents(h: HexagonSpec, s: int) -> tuple[int, int, int, int, int]:
    """(e_alpha, e_beta, e_delta, M, shift) for line s.

    alpha = q^e_alpha, beta = q^e_beta, delta = kappa^2 q^e_delta, gamma =
    q^-(M+1), and the ensemble lives on Y = y - shift in {0..M}.
    """
    a, b, c = h.a, h.b, h.c
    if not 0 <= s <= b + c:
        raise ValueError("slice index out of range")
    if s < min(b, c):
        return -c - a, -b - a, -c + a, s + a - 1, 0
    if c <= s < b:
        return -s - a, s - a - b - c, -s + a, c + a - 1, 0
    if b <= s < c:
        return s - a - b - c, -s - a, s - b - c + a, b + a - 1, s - b
    return -b - a, -c - a, -b + a, a + b + c - s - 1, s - b


@dataclass
class SliceEnsemble:
    """Single-line law: prod (x_i - x_j)^2 prod w over a-subsets of {0..M}."""

    s: int
    shift: int
    M: int
    weights: np.ndarray
    coords: np.ndarray
    params: QRacahParams | None

    def functions(self, kmax: int, method: str = "lanczos") -> np.ndarray:
        """phi[k, Y] = r_k(Y) sqrt(w(Y)/sum w), an l^2-orthonormal family.

        Lanczos with reorthogonalization stays orthonormal on nearly packed
        lines where the forward recurrence loses accuracy; ``"recurrence"``
        uses the closed-form q-Racah coefficients instead.
        """
        if method == "recurrence" and self.params is not None:
            return orthonormal_functions(self.params, kmax)
        return lanczos(self.coords, self.weights, kmax)[0]

    def jacobi(self, kmax: int) -> tuple[np.ndarray, np.ndarray]:
        """Jacobi entries (a_0..a_{kmax-1}, b_0..b_kmax) of the slice measure."""
        if self.params is not None:
            rc = recurrence_coefficients(self.params, kmax + 1)
            return rc.a, rc.b
        _, a, b = lanczos(self.coords, self.weights, kmax)
        return a, b

    def polys(self, kmax: int) -> np.ndarray:
        """r[k, Y] with sum_Y r_j r_k w = delta_jk."""
        return self.functions(kmax) / np.sqrt(self.weights / self.weights.sum())


def slice_ensemble(h: HexagonSpec, s: int) -> SliceEnsemble:
    """q-Racah (or Hahn when q = 1) ensemble of the white particles on line s."""
    ea, eb, ed, M, shift = slice_exponents(h, s)
    if h.regime == "uniform":
        w = hahn_weights(ea, eb, M)
        w = w / w.sum()
        return SliceEnsemble(s, shift, M, w, np.arange(M + 1, dtype=float), None)
    q = h.q if h.regime == "trigonometric" else complex(h.q).real
    k2 = h.kappa**2
    if h.regime != "trigonometric":
        k2 = complex(k2).real
    p = QRacahParams(q, q**ea, q**eb, k2 * q**ed, M)
    return SliceEnsemble(s, shift, M, normalized_weights(p), nu_tilde(p, np.arange(M + 1)), p)


def slice_law(h: HexagonSpec, s: int) -> dict[tuple[int, ...], float]:
    """Probability of every a-tuple on line s under the q-Racah ensemble."""
    from itertools import combinations

    e = slice_ensemble(h, s)
    out = {}
    for Y in combinations(range(e.M + 1), h.a):
        Y = np.asarray(Y)
        x = e.coords[Y]
        vd = np.prod([(x[i] - x[j]) ** 2 for i in range(h.a) for j in range(i)])
        out[tuple(int(v) for v in Y + e.shift)] = float(vd * np.prod(e.weights[Y]))
    Z = sum(out.values())
    return {k: v / Z for k, v in out.items()}


def slice_marginal(h: HexagonSpec, ens: WeightedEnsemble, s: int) -> dict[tuple[int, ...], float]:
    """Marginal law of (y_1(s), ..., y_a(s)) in an enumerated ensemble."""
    out: dict = {}
    for T, p in zip(ens.tilings, ens.probabilities):
        k = tuple(int(v) for v in T[s])
        out[k] = out.get(k, 0.0) + float(p)
    return out


# --------------------------------------------------------- dynamic measure


def c_ratio(h: HexagonSpec, s: int, k) -> np.ndarray:
    """c_{k,s+1} / c_{k,s}; the q = 1 value drops the common factor |log q|."""
    a, b, c = h.a, h.b, h.c
    k = np.asarray(k, dtype=float)
    if h.regime == "uniform":
        return np.sqrt((a + s - k) * (a + b + c - s - k - 1))
    q = complex(h.q)
    m, n = k - a - s, a + b + c - s - k - 1
    if h.regime == "trigonometric":
        # (1 - q^m)(q^n - 1) = q^((m+n)/2) * real; m + n does not depend on k, so
        # taking the root of the real factor keeps one branch for every k
        lam = cmath.phase(q)
        half = np.exp(0.5j * lam * (m + n))
        real = ((1 - q**m) * (q**n - 1) / half).real
        return np.sqrt(real + 0j) * np.exp(0.25j * lam * (m + n))
    return np.sqrt((1 - q**m) * (q**n - 1) + 0j)


def transition_matrix(h: HexagonSpec, s: int, full: bool = True) -> np.ndarray:
    """T_s(x, y) = sum_k c_{k,s+1}/c_{k,s} r_{k,s}(x) r_{k,s+1}(y) on local indices.

    With ``full`` the sum runs over every polynomial both lines support;
    otherwise it stops at k < a.
    """
    e0, e1 = slice_ensemble(h, s), slice_ensemble(h, s + 1)
    K = min(e0.M, e1.M) + 1 if full else h.a
    r0, r1 = e0.polys(K - 1), e1.polys(K - 1)
    return np.einsum("k,kx,ky->xy", c_ratio(h, s, np.arange(K)), r0, r1)


def dynamic_weights(h: HexagonSpec, tilings: np.ndarray, full: bool = True) -> np.ndarray:
    """prod_s det T_s(y(s), y(s+1)) prod_{0<s<b+c} prod_j w_s(y_j(s)) per tiling."""
    S = h.b + h.c
    ens = [slice_ensemble(h, s) for s in range(S + 1)]
    Ts = [transition_matrix(h, s, full) for s in range(S)]
    out = np.ones(len(tilings), dtype=complex)
    for i, T in enumerate(tilings):
        for s in range(S):
            X = T[s] - ens[s].shift
            Y = T[s + 1] - ens[s + 1].shift
            out[i] *= np.linalg.det(Ts[s][np.ix_(X, Y)])
            if s + 1 < S:
                out[i] *= np.prod(ens[s + 1].weights[Y])
    if np.any(out == 0):
        raise DeterminantUnderflow("a determinantal weight vanished")
    return out


def dynamic_measure_check(h: HexagonSpec, ens: WeightedEnsemble, full: bool = True) -> float:
    """max |P_det / P_enum - 1| after normalizing both to probabilities."""
    d = dynamic_weights(h, ens.tilings, full)
    return float(np.max(np.abs(d / d.sum() / ens.probabilities - 1)))


# ------------------------------------------------------------ exact sampler


def _step_ratios(h: HexagonSpec, s: int) -> np.ndarray:
    """psi(x+1)/psi(x) on line s+1 for every x on line s (nan when undefined).

    The full-basis kernel T_s is supported on y - x in {0, 1}, so it factors
    as f(x) g(y) there.  Its moments against r_{0,s+1} and r_{1,s+1} give the
    two unknowns P = f g(x) w(x) and Q = f g(x+1) w(x+1) in closed form, and
    the conditional law of line s+1 given line s is
    prod_j psi(y'_j) det[r_{l,s+1}(y'_i)] with psi = g w.
    """
    e0, e1 = slice_ensemble(h, s), slice_ensemble(h, s + 1)
    a0, b0 = e0.jacobi(1)
    a1, b1 = e1.jacobi(1)
    cr = c_ratio(h, s, [0, 1])
    x = np.arange(e0.M + 1) + e0.shift  # absolute heights on line s
    nu0 = e0.coords
    S = cr[0]
    R = b1[0] * cr[0] + cr[1] * a1[0] * (nu0 - b0[0]) / a0[0]
    out = np.full(len(x), np.nan)
    for i, xi in enumerate(x):
        Y0, Y1 = xi - e1.shift, xi + 1 - e1.shift
        if 0 <= Y0 and Y1 <= e1.M:
            Q = (R[i] - e1.coords[Y0] * S) / (e1.coords[Y1] - e1.coords[Y0])
            P = S - Q
            ratio = Q / P
            if abs(complex(ratio).imag) > 1e-9 * abs(ratio):
                raise RegimeViolation("transition ratio is not real")
            out[i] = complex(ratio).real
    return out


class ExactSampler:
    """Exact sampler running the line-to-line Markov chain of the particles.

    Each new line is drawn particle by particle: the law is multilinear in
    the per-particle choice (stay or step up), so every conditional
    probability is a ratio of determinants and is read off an inverse kept
    current by rank-one updates.
    """

    def __init__(self, h: HexagonSpec):
        self.h = h
        S = h.b + h.c
        self.ens = [slice_ensemble(h, s) for s in range(S + 1)]
        self.phi = [None] + [e.functions(h.a - 1).T.copy() for e in self.ens[1:]]
        self.ratio = [_step_ratios(h, s) for s in range(S)]
        self.sqrtw = [np.sqrt(e.weights) for e in self.ens]

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        h = self.h
        S = h.b + h.c
        y = np.empty((S + 1, h.a), dtype=np.int64)
        y[0] = np.arange(h.a)
        for s in range(S):
            y[s + 1] = self._step(s, y[s], rng)
        return y

    def _step(self, s: int, cur: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        e0, e1 = self.ens[s], self.ens[s + 1]
        phi, sw = self.phi[s + 1], self.sqrtw[s + 1]
        a = len(cur)
        Y0 = cur - e1.shift
        V0 = np.zeros((a, a))
        V1 = np.zeros((a, a))
        ok0 = (Y0 >= 0) & (Y0 <= e1.M)
        ok1 = (Y0 + 1 >= 0) & (Y0 + 1 <= e1.M)
        V0[ok0] = phi[Y0[ok0]]
        V1[ok1] = phi[Y0[ok1] + 1]
        both = ok0 & ok1
        t = self.ratio[s][cur[both] - e0.shift]
        t = t * sw[Y0[both]] / sw[Y0[both] + 1]
        V1[both] *= t[:, None]
        W = V0 + V1
        scale = np.linalg.norm(W, axis=1)
        V0 /= scale[:, None]
        V1 /= scale[:, None]
        W /= scale[:, None]
        Minv = np.linalg.inv(W)
        u = rng.random(a)
        step = np.zeros(a, dtype=np.int64)
        for j in range(a):
            col = Minv[:, j]
            p1 = float(V1[j] @ col)
            if p1 < -1e-7 or p1 > 1 + 1e-7:
                raise DeterminantUnderflow(f"conditional probability {p1} outside [0,1]")
            e = 1 if u[j] < p1 else 0
            v = V1[j] if e else V0[j]
            pe = p1 if e else 1 - p1
            d = v - W[j]
            Minv -= np.outer(col, d @ Minv) / pe
            step[j] = e
        return cur + step


# ------------------------------------------------------------------- MCMC


def log_lozenge_table(h: HexagonSpec) -> np.ndarray:
    """lw[s, y] = log(sign w(s, y)/phase) on cells that can be black, -inf elsewhere."""
    S = h.b + h.c
    sgn = h.lozenge_sign()
    lw = np.full((S + 1, h.a + h.c), -np.inf)
    for s in range(1, S):
        lo, hi = _support(h, s)
        v = sgn * (lozenge_weight(h, s, np.arange(lo, hi)) / h.phase).real
        lw[s, lo:hi] = np.log(v)
    return lw


def lowest_tiling(h: HexagonSpec) -> np.ndarray:
    """The tiling whose particles stay low as long as possible (empty box)."""
    s = np.arange(h.b + h.c + 1)[:, None]
    return (np.arange(h.a)[None, :] + np.maximum(0, s - h.b)).astype(np.int64)


def _cell_list(h: HexagonSpec) -> tuple[np.ndarray, np.ndarray]:
    cs, cy = [], []
    for s in range(1, h.b + h.c):
        lo, hi = _support(h, s)
        cs.extend([s] * (hi - lo))
        cy.extend(range(lo, hi))
    return np.array(cs, dtype=np.int64), np.array(cy, dtype=np.int64)


def _index_grid(h: HexagonSpec, y: np.ndarray) -> np.ndarray:
    idx = np.full((h.b + h.c + 1, h.a + h.c), -1, dtype=np.int64)
    for s in range(y.shape[0]):
        idx[s, y[s]] = np.arange(h.a)
    return idx


@numba.njit(cache=True, nogil=True)
def _mh_kernel(y, idx, lw, cs, cy, u, nprop):
    """nprop single-flip proposals; u holds 3 uniforms per proposal. Returns accepted count."""
    ncell = cs.shape[0]
    acc = 0
    for k in range(nprop):
        c = min(int(u[3 * k] * ncell), ncell - 1)
        s = cs[c]
        v = cy[c]
        j = idx[s, v]
        if j < 0:
            continue
        if u[3 * k + 1] < 0.5:
            # up: y_j(s-1) = v, y_j(s+1) = v + 1, cell v + 1 empty
            if y[s - 1, j] != v or y[s + 1, j] != v + 1 or idx[s, v + 1] >= 0:
                continue
            dl = lw[s, v] - lw[s, v + 1]
            w = v + 1
        else:
            if v == 0 or y[s - 1, j] != v - 1 or y[s + 1, j] != v or idx[s, v - 1] >= 0:
                continue
            dl = lw[s, v] - lw[s, v - 1]
            w = v - 1
        if dl >= 0 or u[3 * k + 2] < math.exp(dl):
            y[s, j] = w
            idx[s, v] = -1
            idx[s, w] = j
            acc += 1
    return acc


def flip_moves(h: HexagonSpec, y: np.ndarray, s: int, v: int, direction: int):
    """Tiling after moving the particle at (s, v) by direction, or None if not a legal flip."""
    y = np.asarray(y)
    if not 1 <= s < h.b + h.c:
        return None
    js = np.nonzero(y[s] == v)[0]
    if len(js) == 0:
        return None
    j = js[0]
    w = v + direction
    if direction == 1 and not (y[s - 1, j] == v and y[s + 1, j] == v + 1):
        return None
    if direction == -1 and not (y[s - 1, j] == v - 1 and y[s + 1, j] == v):
        return None
    if w in y[s]:
        return None
    z = y.copy()
    z[s, j] = w
    return z


def flip_log_acceptance(h: HexagonSpec, y: np.ndarray, s: int, v: int, direction: int) -> float:
    """log of the Metropolis ratio for one flip, computed from the single moved lozenge."""
    lw = log_lozenge_table(h)
    return float(lw[s, v] - lw[s, v + direction])


@dataclass
class MCMCResult:
    """Samples (chains * per-chain draws, b+c+1, a) plus run metadata."""

    tilings: np.ndarray
    acceptance: float
    seed: int
    sweeps: int
    burn_in: int
    thin: int
    chains: int
    regime: str

    def metadata(self) -> dict:
        return dict(seed=self.seed, sweeps=self.sweeps, burn_in=self.burn_in, thin=self.thin,
                    chains=self.chains, regime=self.regime, acceptance_rate=self.acceptance)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("QRT_THREADS", "1")))
    except ValueError:
        return 1


def _run_chain(h, lw, cs, cy, seq, sweeps, burn_in, thin, chunk):
    rng = np.random.Generator(np.random.Philox(seq))
    y = lowest_tiling(h)
    idx = _index_grid(h, y)
    ncell = len(cs)
    acc = tried = 0

    def advance(nsweeps):
        nonlocal acc, tried
        left = nsweeps * ncell
        while left > 0:
            m = min(left, chunk)
            acc += _mh_kernel(y, idx, lw, cs, cy, rng.random(3 * m), m)
            tried += m
            left -= m

    advance(burn_in)
    out = []
    for _ in range(sweeps // thin):
        advance(thin)
        out.append(y.copy())
    return out, acc, tried


def mcmc_sample(h: HexagonSpec, sweeps: int, seed: int, chains: int = 1,
                burn_in: int | None = None, thin: int | None = None,
                threads: int | None = None) -> MCMCResult:
    """Metropolis-Hastings over elementary flips, independent chains in a thread pool.

    A sweep is one proposal per interior cell.  Each chain starts from the
    empty box, discards ``burn_in`` sweeps and records a tiling every
    ``thin`` sweeps, ``sweeps // thin`` per chain.  Chain streams are
    Philox generators spawned from one SeedSequence, so results do not
    depend on the thread count.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    n = h.a + h.b + h.c
    burn_in = 10 * n * n if burn_in is None else int(burn_in)
    thin = h.a * (h.b + h.c) if thin is None else max(1, int(thin))
    thin = min(thin, sweeps)
    lw = log_lozenge_table(h)
    cs, cy = _cell_list(h)
    seqs = np.random.SeedSequence(seed).spawn(chains)
    threads = threads or default_threads()
    chunk = 1 << 18
    job = lambda sq: _run_chain(h, lw, cs, cy, sq, sweeps, burn_in, thin, chunk)  # noqa: E731
    if threads > 1 and chains > 1:
        with ThreadPoolExecutor(threads) as ex:
            res = list(ex.map(job, seqs))
    else:
        res = [job(sq) for sq in seqs]
    tilings = np.array([t for r in res for t in r[0]], dtype=np.int64)
    acc = sum(r[1] for r in res) / max(1, sum(r[2] for r in res))
    return MCMCResult(tilings, acc, seed, sweeps, burn_in, thin, chains, h.regime)


def exact_samples(h: HexagonSpec, count: int, seed: int) -> np.ndarray:
    """count independent draws from the ExactSampler with a Philox stream."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    smp = ExactSampler(h)
    return np.array([smp.sample(rng) for _ in range(count)])


# ------------------------------------------------------- heights, statistics


def empirical_height(h: HexagonSpec, y: np.ndarray, t: float, x: float) -> float:
    """#{j : y_j(floor(n t)) <= n x} / n with n = a."""
    n = h.a
    s = min(max(int(math.floor(n * t + 1e-9)), 0), h.b + h.c)
    return float(np.count_nonzero(np.asarray(y)[s] <= n * x + 1e-9)) / n


def empirical_tile_height(h: HexagonSpec, y: np.ndarray, t: float, x: float) -> float:
    """Height in the lozenge convention, x - h(t, x)."""
    return x - empirical_height(h, y, t, x)


def linear_statistic(h: HexagonSpec, y: np.ndarray, f, times) -> float:
    """sum over times t_m and particles j of f(t_m, y_j(floor(n t_m)) / n)."""
    n = h.a
    y = np.asarray(y)
    total = 0.0
    for t in times:
        s = int(math.floor(n * t + 1e-9))
        total += float(np.sum(f(t, y[s] / n)))
    return total


# ------------------------------------------------------------------ output


def tiling_to_json(y: np.ndarray, metadata: dict | None = None) -> str:
    doc = {"particles": np.asarray(y).tolist()}
    if metadata:
        doc["metadata"] = metadata
    return json.dumps(doc, sort_keys=True)


def tiling_from_json(text: str) -> np.ndarray:
    doc = json.loads(text)
    return np.asarray(doc["particles"] if isinstance(doc, dict) else doc, dtype=np.int64)


def lozenges(h: HexagonSpec, y: np.ndarray):
    """(type, polygon) pairs in lattice coordinates (s, y) for every lozenge."""
    y = np.asarray(y)
    out = []
    for s in range(h.b + h.c):
        for j in range(h.a):
            v, w = int(y[s, j]), int(y[s + 1, j])
            if w == v:
                out.append(("II", [(s, v), (s + 1, v), (s + 1, v + 1), (s, v + 1)]))
            else:
                out.append(("I", [(s, v), (s + 1, v + 1), (s + 1, v + 2), (s, v + 1)]))
    for s, yb in black_cells(h, y):
        out.append(("III", [(s - 1, yb), (s, yb), (s + 1, yb + 1), (s, yb + 1)]))
    return out


FILLS = {"I": "#d95f02", "II": "#1b9e77", "III": "#7570b3"}


def tiling_to_svg(h: HexagonSpec, y: np.ndarray, scale: float = 20.0, dots: bool = False) -> str:
    """Three-colour SVG; lattice (s, y) is drawn at (s sqrt3/2, y - s/2)."""
    r3 = math.sqrt(3) / 2

    def P(s, v):
        return s * r3 * scale, (h.a + h.c - (v - s / 2)) * scale

    W = (h.b + h.c) * r3 * scale
    H = (h.a + h.c + h.b / 2 + 1) * scale
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W + 2 * scale:.1f}" height="{H + scale:.1f}" '
             f'viewBox="{-scale:.1f} {-scale / 2:.1f} {W + 2 * scale:.1f} {H + scale:.1f}">']
    for kind, poly in lozenges(h, y):
        pts = " ".join("%.3f,%.3f" % P(*p) for p in poly)
        parts.append(f'<polygon class="type{kind}" points="{pts}" fill="{FILLS[kind]}" stroke="black" stroke-width="0.5"/>')
    if dots:
        y = np.asarray(y)
        for s in range(h.b + h.c + 1):
            for v in y[s]:
                cx, cy = P(s, v + 0.5)
                parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{scale / 6:.2f}" fill="white" stroke="black"/>')
        for s, yb in black_cells(h, y):
            cx, cy = P(s, yb + 0.5)
            parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{scale / 6:.2f}" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts)
