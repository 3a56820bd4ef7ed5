"""Sato-Tate measure, Hecke angles and the Chebyshev identities they obey.

Normalized eigenvalues are written ``a(p^m)``; for a prime ``p`` coprime to
the level, ``a(p) = 2 cos(pi theta)`` with ``theta`` in ``[0, 1]`` and
``a(p^m)`` is the Chebyshev polynomial of the second kind ``U_m(cos pi theta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Rounding slack accepted above the Deligne bound |a(p)| <= 2.
DELIGNE_SLACK = 1e-9

# Index cap for the randomized Hecke-product checks.
HECKE_INDEX_CAP = 200


class DeligneBoundError(ValueError):
    """A normalized eigenvalue exceeds the Deligne bound beyond rounding slack."""


def _check_unit(t, name="t"):
    t_arr = np.asarray(t, dtype=float)
    if np.any((t_arr < 0.0) | (t_arr > 1.0)) or np.any(np.isnan(t_arr)):
        raise ValueError(f"{name} must lie in [0, 1]")
    return t_arr


def st_density(t):
    """Sato-Tate density ``2 sin^2(pi t)`` on ``[0, 1]``.

    Accepts scalars or arrays; values outside ``[0, 1]`` raise ``ValueError``.
    """
    t_arr = _check_unit(t)
    out = 2.0 * np.sin(np.pi * t_arr) ** 2
    return float(out) if out.ndim == 0 else out


def straighten(theta):
    """Cumulative Sato-Tate measure ``H(theta) = theta - sin(2 pi theta) / (2 pi)``.

    ``H`` maps Sato-Tate distributed angles to uniformly distributed ones.
    """
    th = _check_unit(theta, "theta")
    out = th - np.sin(2.0 * np.pi * th) / (2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def angle_from_eigenvalue(a_p, slack: float = DELIGNE_SLACK):
    """Hecke angle ``theta = arccos(a_p / 2) / pi`` of a normalized eigenvalue.

    Inputs within ``slack`` of the interval ``[-2, 2]`` are clamped onto it.

    Raises
    ------
    DeligneBoundError
        If ``|a_p| > 2 + slack``.
    """
    a = np.asarray(a_p, dtype=float)
    if np.any(np.abs(a) > 2.0 + slack) or np.any(np.isnan(a)):
        bad = a[np.abs(a) > 2.0 + slack] if a.ndim else a
        raise DeligneBoundError(f"normalized eigenvalue(s) violate |a_p| <= 2: {bad}")
    a = np.clip(a, -2.0, 2.0)
    out = np.arccos(a / 2.0) / np.pi
    return float(out) if out.ndim == 0 else out


def chebyshev_eigenvalue(theta, m: int):
    """Normalized ``a(p^m)`` determined by the angle ``theta``.

    Uses the three-term Hecke recurrence ``a(p^{j+1}) = a(p) a(p^j) - a(p^{j-1})``
    seeded with ``1`` and ``2 cos(pi theta)``; this stays accurate near
    ``theta in {0, 1}`` where the ratio ``sin((m+1) pi theta) / sin(pi theta)``
    loses precision.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    th = np.asarray(theta, dtype=float)
    prev = np.ones_like(th)
    if m == 0:
        return float(prev) if prev.ndim == 0 else prev
    x = 2.0 * np.cos(np.pi * th)
    cur = x.copy()
    for _ in range(m - 1):
        prev, cur = cur, x * cur - prev
    return float(cur) if cur.ndim == 0 else cur


def chebyshev_table(theta, m_max: int) -> np.ndarray:
    """Array ``out[..., m] = a(p^m)`` for ``0 <= m <= m_max``, by the same recurrence."""
    th = np.asarray(theta, dtype=float)
    out = np.empty(th.shape + (m_max + 1,))
    out[..., 0] = 1.0
    if m_max >= 1:
        x = 2.0 * np.cos(np.pi * th)
        out[..., 1] = x
        for j in range(1, m_max):
            out[..., j + 1] = x * out[..., j] - out[..., j - 1]
    return out


def chebyshev_closed_form(theta: float, m: int) -> float:
    """Trigonometric form ``sin((m+1) pi theta) / sin(pi theta)``; oracle only."""
    if theta > 0.5:
        # sin(pi theta) loses relative accuracy near 1; reflect (1 - theta is exact)
        return (-1.0) ** m * chebyshev_closed_form(1.0 - theta, m)
    s = math.sin(math.pi * theta)
    if abs(s) < 1e-300:
        # theta an integer: limit (m + 1) (-1)^(m theta)
        return float(m + 1) * (-1.0) ** (m * round(theta))
    return math.sin((m + 1) * math.pi * theta) / s


def check_cosine_identity(theta: float, l: int) -> tuple[float, float]:
    """Both sides of ``2 cos(2 pi l theta) = a(p^{2l}) - a(p^{2l-2})`` (``2`` at ``l = 0``)."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    if l == 0:
        return 2.0, 2.0
    lhs = 2.0 * math.cos(2.0 * math.pi * l * theta)
    rhs = chebyshev_eigenvalue(theta, 2 * l) - chebyshev_eigenvalue(theta, 2 * l - 2)
    return lhs, rhs


def _a(table: np.ndarray, m: int) -> float:
    # a(p^m) with the convention a(p^m) = 0 for m < 0
    return 0.0 if m < 0 else float(table[m])


def hecke_product_residuals(theta1: float, theta2: float, i: int, j: int,
                            l: int, n: int) -> dict[str, float]:
    """Absolute residuals of the prime-power Hecke relations at one angle pair.

    ``theta1`` feeds the same-prime relations; ``theta2`` a second prime, used
    for the distinct-prime product of differences (which factorizes and is
    checked against direct evaluation). Keys name the relation checked.
    """
    for v in (i, j, l, n):
        if v < 0 or v > HECKE_INDEX_CAP:
            raise ValueError(f"indices must lie in [0, {HECKE_INDEX_CAP}]")
    top = 2 * (i + j + l + n) + 4
    t1 = chebyshev_table(theta1, top)
    t2 = chebyshev_table(theta2, top)
    res: dict[str, float] = {}

    # same prime: a(p^i) a(p^j) = sum_{t <= min(i,j)} a(p^{i+j-2t})
    lhs = t1[i] * t1[j]
    rhs = math.fsum(t1[i + j - 2 * t] for t in range(min(i, j) + 1))
    res["product"] = abs(lhs - rhs)

    # same prime, product of differences at exponents 2n1 = 2i, 2n2 = 2j (i, j >= 1)
    n1, n2 = max(i, 1), max(j, 1)
    d1 = t1[2 * n1] - t1[2 * n1 - 2]
    d2 = t1[2 * n2] - t1[2 * n2 - 2]
    if n1 != n2:
        e = abs(2 * n1 - 2 * n2)
        rhs = (t1[2 * n1 + 2 * n2] - t1[2 * n1 + 2 * n2 - 2]) + (_a(t1, e) - _a(t1, e - 2))
    else:
        rhs = t1[4 * n1] - t1[4 * n1 - 2] + 2.0
    res["difference_product"] = abs(d1 * d2 - rhs)

    # a(p^{2l}) (a(p^{2n}) - a(p^{2n-2})) split, n >= 1
    nn = max(n, 1)
    lhs = t1[2 * l] * (t1[2 * nn] - t1[2 * nn - 2])
    if l >= nn:
        rhs = t1[2 * l + 2 * nn] + t1[2 * l - 2 * nn]
    else:
        rhs = t1[2 * l + 2 * nn] - t1[2 * nn - 2 * l - 2]
    res["power_times_difference"] = abs(lhs - rhs)

    # distinct primes: the difference is 2cos(2 pi n theta) at each prime
    d_p = t1[2 * nn] - t1[2 * nn - 2]
    d_q = t2[2 * nn] - t2[2 * nn - 2]
    direct = 4.0 * math.cos(2 * math.pi * nn * theta1) * math.cos(2 * math.pi * nn * theta2)
    res["distinct_difference"] = abs(d_p * d_q - direct)
    return res


def check_hecke_products(theta1: float, theta2: float, i: int, j: int, l: int, n: int,
                         tol: float = 1e-9) -> bool:
    """True iff every relation in :func:`hecke_product_residuals` holds to ``tol``.

    Residuals are measured relative to ``max(1, size)`` of the terms involved,
    since ``|a(p^m)|`` can reach ``m + 1``.
    """
    res = hecke_product_residuals(theta1, theta2, i, j, l, n)
    scale = float(max(1, (i + 1) * (j + 1), (l + 1) * (2 * n + 1)))
    return all(v <= tol * scale for v in res.values())


@dataclass(frozen=True)
class PrimeWindow:
    """Primes ``p <= x`` coprime to the level ``N``."""

    x: int
    level: int
    primes: np.ndarray = field(repr=False)

    @property
    def count(self) -> int:
        return int(self.primes.size)

    def __post_init__(self):
        p = np.asarray(self.primes, dtype=np.int64)
        p.setflags(write=False)
        object.__setattr__(self, "primes", p)


def primes_upto(x: int) -> np.ndarray:
    """Sieve of Eratosthenes; ascending primes ``<= x`` as ``int64``."""
    if x < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(x + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, math.isqrt(x) + 1, 2):
        if sieve[p]:
            sieve[p * p::2 * p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def prime_window(x: int, level: int = 1) -> PrimeWindow:
    """Primes up to ``x`` with those dividing ``level`` removed.

    ``x < 2`` gives an empty window.
    """
    if level < 1:
        raise ValueError("level must be positive")
    ps = primes_upto(int(x))
    if level > 1 and ps.size:
        ps = ps[level % ps != 0]
    return PrimeWindow(int(x), int(level), ps)


def first_primes(n: int) -> np.ndarray:
    """The first ``n`` primes."""
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    # p_n < n (log n + log log n) for n >= 6
    bound = 15 if n < 6 else int(n * (math.log(n) + math.log(math.log(n)))) + 1
    return primes_upto(bound)[:n]
