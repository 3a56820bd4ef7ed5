"""Per-form pair correlation statistics of Hecke angles.

For one form with angles ``theta_p`` (``p <= x``, ``(p, N) = 1``, ``P = pi_N(x)``
of them) and a centre ``psi``, the smoothed pair correlation is

    R2 = L / (8P) sum_{p != q} rho_L(+-theta_p - psi) rho_L(+-theta_q - psi) G_x(+-theta_p +-theta_q)

where each ``+-`` means a sum over both signs. It is computed directly from the
periodized kernels (:func:`r2_smooth`) or through the Chebyshev expansion

    R2 = 1 / (8 P^2 L) sum_{p != q} T1(p) T1(q) T3(p, q)

(:func:`r2_series`), with ``T1(p) = sum_l U(l) a(p^{2l})`` and
``T3(p, q) = 4 G(0) + 2 sum_{n >= 1} G(n) d_n(p) d_n(q)``,
``d_n = a(p^{2n}) - a(p^{2n-2})``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _backend
from .arith import PrimeWindow, straighten
from .kernels import (SpectralTestFunction, CoefficientTable, amplitude, coefficient_table,
                      eval_kernel, get_test_function, main_term, make_kernel, poisson_limit,
                      _check_psi)

# Windows up to this many primes use direct enumeration for K, L, M by default.
BRUTE_FORCE_MAX = 60
# Largest window for which the dense T3 matrix is built.
KLM_MAX_PRIMES = 2500


@dataclass(frozen=True)
class AngleSet:
    """Hecke angles of one form, aligned with the primes of ``window``."""

    label: str
    window: PrimeWindow
    angles: np.ndarray = field(repr=False)

    def __post_init__(self):
        th = np.array(self.angles, dtype=float)
        if th.shape != (self.window.count,):
            raise ValueError(f"expected {self.window.count} angles, got shape {th.shape}")
        if np.any((th < 0.0) | (th > 1.0)) or np.any(np.isnan(th)):
            raise ValueError("angles must lie in [0, 1]")
        th.setflags(write=False)
        object.__setattr__(self, "angles", th)

    @property
    def count(self) -> int:
        return self.window.count

    def permuted(self, perm) -> "AngleSet":
        """Same multiset of (prime, angle) pairs in another order."""
        perm = np.asarray(perm)
        w = PrimeWindow(self.window.x, self.window.level, self.window.primes[perm])
        return AngleSet(self.label, w, self.angles[perm])


@dataclass(frozen=True)
class PairCorrConfig:
    """Centre ``psi``, scale ``L``, test functions and counting window ``s``.

    ``n_cap`` truncates the ``n``-sum in ``T3`` (``None`` keeps every term);
    it changes the statistic and is echoed in reports.
    """

    psi: float = 0.25
    L: int = 10
    rho: SpectralTestFunction = field(default_factory=lambda: get_test_function("fejer"))
    g: SpectralTestFunction = field(default_factory=lambda: get_test_function("fejer"))
    s: float = 1.0
    n_cap: Optional[int] = None

    def __post_init__(self):
        _check_psi(self.psi)
        if int(self.L) != self.L or self.L < 1:
            raise ValueError("L must be a positive integer")
        if not self.s > 0:
            raise ValueError("s must be positive")
        if isinstance(self.rho, str):
            object.__setattr__(self, "rho", get_test_function(self.rho))
        if isinstance(self.g, str):
            object.__setattr__(self, "g", get_test_function(self.g))

    def table(self, M: int) -> CoefficientTable:
        return coefficient_table(self.rho, self.g, self.L, max(M, 1), self.psi)

    def as_dict(self) -> dict:
        return {"psi": self.psi, "L": int(self.L), "rho": self.rho.name, "g": self.g.name,
                "s": self.s, "n_cap": self.n_cap}


@dataclass(frozen=True)
class KLMParts:
    """``R2^2 = K + L + M`` with the splits ``K = K1 + 2 K2 + K4`` (same for L, M).

    Index 1 takes the constant part ``4 G(0)`` of ``T3`` in both factors,
    index 2 one constant and one oscillating factor, index 4 both oscillating.
    """

    K: float
    L: float
    M: float
    K1: float
    K2: float
    K4: float
    L1: float
    L2: float
    L4: float
    M1: float
    M2: float
    M4: float
    method: str

    @property
    def total(self) -> float:
        return self.K + self.L + self.M


@dataclass(frozen=True)
class PairCorrReport:
    """All per-form statistics at one configuration."""

    label: str
    x: int
    level: int
    primes: int
    r2: float
    r2_series: float
    k_part: float
    l_part: float
    m_part: float
    r_counting: float
    n_rho: float
    n_rho_target: float
    local_count: int
    main_term: float
    poisson: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _empty_warning(a: AngleSet, what: str) -> None:
    warnings.warn(f"{what}: empty prime window for {a.label!r}; returning 0", RuntimeWarning,
                  stacklevel=3)


def rho_weights(a: AngleSet, c: PairCorrConfig) -> np.ndarray:
    """``w_p = rho_L(theta_p - psi) + rho_L(-theta_p - psi)``."""
    k = make_kernel(c.rho, c.L)
    th = a.angles
    return np.asarray(eval_kernel(k, th - c.psi) + eval_kernel(k, -th - c.psi), dtype=float)


def r2_smooth(a: AngleSet, c: PairCorrConfig) -> float:
    """Smoothed pair correlation from the periodized kernels directly."""
    P = a.count
    if P == 0:
        _empty_warning(a, "r2_smooth")
        return 0.0
    if P == 1:
        return 0.0
    w = rho_weights(a, c)
    th = a.angles
    if c.g.closed_kind is not None and c.n_cap is None:
        s = _backend.smooth_pair_sum(w, th, P, c.g.closed_kind)
    else:
        s = _generic_pair_sum(w, th, P, c)
    # four sign patterns = 2 (G(tp + tq) + G(tp - tq)) since G is even
    return c.L / (8.0 * P) * 2.0 * s


def _generic_pair_sum(w, th, P, c):
    coeffs = np.asarray(c.g.fourier_eval(np.arange(P + 1) / P), dtype=float) / P
    if c.n_cap is not None:
        coeffs[c.n_cap + 1:] = 0.0
    from .kernels import PeriodizedKernel
    G = PeriodizedKernel(P, coeffs)
    parts = []
    for start in range(0, th.size, 256):
        tp = th[start:start + 256, None]
        m = np.asarray(eval_kernel(G, tp + th[None, :]) + eval_kernel(G, tp - th[None, :]))
        idx = np.arange(start, min(start + 256, th.size))
        m[idx - start, idx] = 0.0
        parts.append(float(w[start:start + 256] @ (m @ w)))
    return math.fsum(parts)


def t1_values(theta, U) -> np.ndarray:
    """``T1(p) = sum_{0 <= l <= L} U(l) a(p^{2l})`` by the Hecke recurrence."""
    th = np.asarray(theta, dtype=float)
    x = 2.0 * np.cos(np.pi * th)
    a_even = np.ones_like(th)
    a_odd = np.zeros_like(th)
    out = U[0] * a_even
    for l in range(1, len(U)):
        a_odd = x * a_even - a_odd
        a_even = x * a_odd - a_even
        out = out + U[l] * a_even
    return out


def _nmax(P: int, c: PairCorrConfig) -> int:
    return P if c.n_cap is None else min(P, int(c.n_cap))


def r2_series(a: AngleSet, c: PairCorrConfig) -> float:
    """Smoothed pair correlation through the ``T1 T1 T3`` expansion.

    Uses the factorization ``sum_{p != q} T1 T1 T3 = 4G(0) [(sum T1)^2 - sum T1^2]
    + 2 sum_n G(n) [S_n^2 - Q_n]``, where ``S_n = sum_p T1(p) d_n(p)`` and
    ``Q_n = sum_p (T1(p) d_n(p))^2``; cost ``O(P^2)`` instead of ``O(P^3)``.
    """
    P = a.count
    if P == 0:
        _empty_warning(a, "r2_series")
        return 0.0
    if P == 1:
        return 0.0
    tab = c.table(P)
    t1 = t1_values(a.angles, tab.U)
    nmax = _nmax(P, c)
    S, Q = _backend.series_sums(t1, a.angles, nmax)
    G = tab.G[:nmax + 1]
    const = 4.0 * G[0] * (math.fsum(t1) ** 2 - math.fsum(t1 * t1))
    osc = 2.0 * math.fsum(G[1:] * (S[1:] ** 2 - Q[1:]))
    return (const + osc) / (8.0 * P * P * c.L)


def r2_series_direct(a: AngleSet, c: PairCorrConfig) -> float:
    """Literal ``O(P^2 n)`` double sum over ``p != q``; reference for small windows."""
    P = a.count
    if P < 2:
        return 0.0
    t1, T0, Tp = _t3_parts(a, c)
    T = T0 + Tp
    np.fill_diagonal(T, 0.0)
    return float(t1 @ T @ t1) / (8.0 * P * P * c.L)


def _t3_parts(a: AngleSet, c: PairCorrConfig):
    P = a.count
    if P > KLM_MAX_PRIMES:
        raise ValueError(f"{P} primes exceed the dense T3 limit {KLM_MAX_PRIMES}; "
                         "lower x or raise KLM_MAX_PRIMES")
    tab = c.table(P)
    t1 = t1_values(a.angles, tab.U)
    nmax = _nmax(P, c)
    D = _backend.difference_table(a.angles, nmax)[:, 1:]
    Tp = 2.0 * (D * tab.G[1:nmax + 1]) @ D.T
    T0 = np.full((P, P), 4.0 * tab.G[0])
    return t1, T0, Tp


def _bilinear_fast(X, Y):
    # pair, triple and quadruple sums of X_pq Y_rs over index patterns with
    # zero diagonals: two shared, one shared (p = r), all distinct
    two = float(np.sum(X * Y))
    rx, ry = X.sum(axis=1), Y.sum(axis=1)
    one = float(rx @ ry) - two
    four = float(X.sum() * Y.sum()) - 2.0 * two - 4.0 * one
    return two, one, four


def _bilinear_brute(X, Y):
    n = X.shape[0]
    two = one = four = 0.0
    idx = np.arange(n)
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            xpq = X[p, q]
            two += xpq * Y[p, q]
            rest = (idx != p) & (idx != q)
            one += xpq * float(Y[p, rest].sum())
            sub = Y[np.ix_(rest, rest)]
            four += xpq * float(sub.sum())
    return two, one, four


def klm_parts(a: AngleSet, c: PairCorrConfig, method: str = "auto") -> KLMParts:
    """``K``, ``L``, ``M`` and their constant/oscillating splits.

    With ``C = 1 / (64 P^4 L^2)`` and ``X_pq = T1(p) T1(q) T3(p, q)``:
    ``K = 2C sum_{p != q} X_pq^2``, ``L = 4C sum_{p,q,r distinct} X_pq X_pr``,
    ``M = C sum_{p,q,r,s distinct} X_pq X_rs``.

    ``method`` is ``"brute"`` (direct enumeration), ``"fast"`` (row-sum
    inclusion-exclusion) or ``"auto"`` (brute up to :data:`BRUTE_FORCE_MAX` primes).
    """
    P = a.count
    zero = KLMParts(*([0.0] * 12), method="empty")
    if P < 2:
        return zero
    if method == "auto":
        method = "brute" if P <= BRUTE_FORCE_MAX else "fast"
    if method not in ("brute", "fast"):
        raise ValueError("method must be 'auto', 'brute' or 'fast'")
    t1, T0, Tp = _t3_parts(a, c)
    outer = np.outer(t1, t1)
    X0 = outer * T0
    Xp = outer * Tp
    np.fill_diagonal(X0, 0.0)
    np.fill_diagonal(Xp, 0.0)
    f = _bilinear_brute if method == "brute" else _bilinear_fast
    C = 1.0 / (64.0 * float(P) ** 4 * float(c.L) ** 2)
    k00, l00, m00 = f(X0, X0)
    k0p, l0p, m0p = f(X0, Xp)
    kpp, lpp, mpp = f(Xp, Xp)
    K1, K2, K4 = 2 * C * k00, 2 * C * k0p, 2 * C * kpp
    L1, L2, L4 = 4 * C * l00, 4 * C * l0p, 4 * C * lpp
    M1, M2, M4 = C * m00, C * m0p, C * mpp
    return KLMParts(K1 + 2 * K2 + K4, L1 + 2 * L2 + L4, M1 + 2 * M2 + M4,
                    K1, K2, K4, L1, L2, L4, M1, M2, M4, method)


def klm_decomposition(a: AngleSet, c: PairCorrConfig, method: str = "auto") -> tuple[float, float, float]:
    """``(K, L, M)`` with ``K + L + M = R2^2``; see :func:`klm_parts`."""
    parts = klm_parts(a, c, method)
    return parts.K, parts.L, parts.M


def _interval_hits(t, centre, half):
    # periodized closed-interval indicator: sum_n chi(|t - centre + n| <= half)
    d = np.asarray(t, dtype=float) - centre
    return sum((np.abs(d + n) <= half).astype(np.int64) for n in (-1, 0, 1))


def _local_weights(a: AngleSet, psi: float, L: int) -> np.ndarray:
    half = 1.0 / (amplitude(psi) * L)
    th = a.angles
    return _interval_hits(th, psi, half) + _interval_hits(1.0 - th, psi, half)


def local_count(a: AngleSet, psi: float, L: int, symmetric: bool = False) -> int:
    """Number of angles in ``[psi - 1/(AL), psi + 1/(AL)]`` (closed).

    With ``symmetric=True`` the count of ``A_{f,x}`` (angles and their
    reflections ``1 - theta``) in the interval, i.e. ``L_f(psi) + L_f(1 - psi)``.
    """
    psi = _check_psi(psi)
    if symmetric:
        return int(_local_weights(a, psi, L).sum())
    half = 1.0 / (amplitude(psi) * L)
    return int(_interval_hits(a.angles, psi, half).sum())


def shift_sum(u: float, v: float, half: float) -> int:
    """``B``: hits of the closed window ``[-half, half]`` over the six listed shifts.

    Shifts ``u - v + {-1, 0, 1, -2}`` and ``u + v + {0, -1}``. For angles in
    ``[0, 1]`` and windows below 1/2 the ``-2`` shift never fires; it is kept
    for fidelity with the counting argument.
    """
    d = u - v
    e = u + v
    args = (d - 1.0, d, d + 1.0, e, e - 1.0, d - 2.0)
    return int(sum(abs(t) <= half for t in args))


def pair_count(a: AngleSet, c: PairCorrConfig, straightened: bool = False) -> int:
    """``sum_{p != q} c_p c_q B(theta_p, theta_q, s)`` with ``c_p`` the local weights.

    The window is ``|.| <= s / (2 A P)`` on angle differences, or ``s / (2P)``
    on straightened differences ``H(theta_p) - H(theta_q)`` when ``straightened``.
    """
    P = a.count
    if P < 2:
        return 0
    cw = _local_weights(a, c.psi, c.L)
    idx = np.flatnonzero(cw)
    if idx.size < 2:
        return 0
    u = a.angles[idx]
    if straightened:
        u = np.asarray(straighten(u), dtype=float)
        half = c.s / (2.0 * P)
    else:
        half = c.s / (2.0 * amplitude(c.psi) * P)
    wts = cw[idx]
    d = u[:, None] - u[None, :]
    e = u[:, None] + u[None, :]
    B = np.zeros(d.shape, dtype=np.int64)
    for t in (d - 1.0, d, d + 1.0, e, e - 1.0, d - 2.0):
        B += np.abs(t) <= half
    np.fill_diagonal(B, 0)
    return int(wts @ B @ wts)


def r_counting(a: AngleSet, c: PairCorrConfig, normalization: str = "exact",
               straightened: bool = False) -> float:
    """Counting pair correlation of the symmetrized angles near ``psi``.

    ``normalization="exact"`` divides :func:`pair_count` by the number of points
    of ``A_{f,x}`` in the interval; ``"asymptotic"`` multiplies by ``L / (4P)``,
    the reciprocal of that number's asymptotic size. Poisson behaviour gives ``2s``.

    Raises
    ------
    ValueError
        If the interval holds no points (exact normalization undefined).
    """
    n = pair_count(a, c, straightened)
    if normalization == "asymptotic":
        if a.count == 0:
            raise ValueError("empty window: counting statistic undefined")
        return c.L * n / (4.0 * a.count)
    if normalization != "exact":
        raise ValueError("normalization must be 'exact' or 'asymptotic'")
    m = local_count(a, c.psi, c.L, symmetric=True)
    if m == 0:
        raise ValueError("no angles in the local interval: counting statistic undefined")
    return n / m


def n_rho_statistic(a: AngleSet, c: PairCorrConfig) -> tuple[float, float]:
    """``(N_rho / 2P, U(0) / 2L)`` with ``N_rho = sum_p rho_L(+-theta_p - psi)``."""
    tab = c.table(max(a.count, 1))
    target = float(tab.U[0]) / (2.0 * c.L)
    if a.count == 0:
        return 0.0, target
    return math.fsum(rho_weights(a, c)) / (2.0 * a.count), target


def n_rho_series(a: AngleSet, c: PairCorrConfig) -> float:
    """Series form ``(1/2P) sum_l (U(l)/L) sum_p a(p^{2l})`` of ``N_rho / 2P``."""
    if a.count == 0:
        return 0.0
    tab = c.table(a.count)
    return math.fsum(t1_values(a.angles, tab.U)) / (2.0 * a.count * c.L)


def power_sum_diagnostic(a: AngleSet, l: int) -> float:
    """``S = sum_p a(p^{2l})`` over the window."""
    if l < 1:
        raise ValueError("l must be at least 1")
    U = np.zeros(l + 1)
    U[l] = 1.0
    return math.fsum(t1_values(a.angles, U))


def power_sum_report(a: AngleSet, l: int) -> dict:
    """``S`` with the normalizations ``S / P`` and ``S / (sqrt(x) log x)``."""
    S = power_sum_diagnostic(a, l)
    x = a.window.x
    P = a.count
    return {"l": l, "sum": S,
            "per_prime": S / P if P else 0.0,
            "per_sqrt_x_log_x": S / (math.sqrt(x) * math.log(x)) if x > 1 else 0.0}


def report(a: AngleSet, c: PairCorrConfig, klm_method: str = "auto") -> PairCorrReport:
    """Evaluate every per-form statistic."""
    P = a.count
    r2 = r2_smooth(a, c)
    r2s = r2_series(a, c)
    if P <= KLM_MAX_PRIMES:
        k, l, m = klm_decomposition(a, c, klm_method)
    else:
        k = l = m = float("nan")
    try:
        rc = r_counting(a, c)
    except ValueError:
        rc = float("nan")
    nr, target = n_rho_statistic(a, c)
    tab = c.table(max(P, 1))
    return PairCorrReport(a.label, a.window.x, a.window.level, P, r2, r2s, k, l, m, rc, nr, target,
                          local_count(a, c.psi, c.L), main_term(tab),
                          poisson_limit(c.psi, c.g, c.rho))
