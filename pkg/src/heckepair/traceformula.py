"""Exact Eichler-Selberg traces on ``S_k(Gamma_0(N))`` and the averages built from them.

Traces use the Cohen-Zagier form of the trace formula for trivial character and
``(n, N) = 1``:

    Tr T_n = A1 + A2 + A3 + A4

with the identity term ``A1``, the elliptic term ``A2`` (Hurwitz class numbers with
level-local multiplicities), the hyperbolic term ``A3`` and, for ``k = 2``, the
Eisenstein correction ``A4 = sigma_1(n)``. Everything is computed with Python
integers and ``Fraction``; normalization by ``n^{(k-1)/2}`` happens last, in
``mpmath`` at extended precision.
"""
from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd, isqrt
from typing import Optional, Sequence

import mpmath
import numpy as np

from . import _backend
from .arith import DELIGNE_SLACK, PrimeWindow, angle_from_eigenvalue, prime_window

# Extended precision (decimal digits) for normalizations and root polishing.
WORK_DPS = 60
# Largest dense Hurwitz table built on demand.
HURWITZ_DENSE_MAX = 4_000_000
# Root clustering tolerance in extract_eigenvalues.
CLUSTER_TOL = 1e-7
D_MAX = 3
P_MAX = 20


# ---------------------------------------------------------------------------
# small arithmetic helpers

@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization as ``((p, e), ...)`` by trial division."""
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def divisors(n: int) -> list[int]:
    ds = [1]
    for p, e in factorize(n):
        ds = [d * p ** i for d in ds for i in range(e + 1)]
    return sorted(ds)


def sigma0(n: int) -> int:
    """Number of positive divisors."""
    return math.prod(e + 1 for _, e in factorize(n))


def sigma1(n: int) -> int:
    return math.prod((p ** (e + 1) - 1) // (p - 1) for p, e in factorize(n))


def nu(n: int) -> int:
    """Number of distinct prime factors."""
    return len(factorize(n))


def euler_phi(n: int) -> int:
    return math.prod((p - 1) * p ** (e - 1) for p, e in factorize(n))


def psi_index(N: int) -> int:
    """Index ``N prod_{p | N} (1 + 1/p)`` of ``Gamma_0(N)`` in ``SL_2(Z)``."""
    return math.prod((p + 1) * p ** (e - 1) for p, e in factorize(N))


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def _is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


# ---------------------------------------------------------------------------
# Hurwitz class numbers

class HurwitzTable:
    """``12 H(n)`` as integers: a dense sieved range plus isolated values.

    Reads are lock-free on committed data; extension and isolated inserts take a
    lock, so a reader sees either a committed value or computes one itself.
    """

    HEADER = "# hurwitz12 v1"

    def __init__(self, max_n: int = 0):
        self._lock = threading.Lock()
        self._dense = np.array([-1], dtype=np.int64)
        self._extra: dict[int, int] = {}
        if max_n > 0:
            self.extend(max_n)

    @property
    def max_n(self) -> int:
        return int(self._dense.size - 1)

    def extend(self, max_n: int) -> None:
        if max_n <= self.max_n:
            return
        with self._lock:
            if max_n > self.max_n:
                self._dense = _backend.hurwitz12_table(int(max_n))

    def value12(self, n: int) -> int:
        """``12 H(n)``."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        dense = self._dense
        if n < dense.size:
            return int(dense[n])
        if n <= HURWITZ_DENSE_MAX:
            self.extend(max(n, 2 * self.max_n))
            return int(self._dense[n])
        v = self._extra.get(n)
        if v is None:
            v = hurwitz12_single(n)
            with self._lock:
                self._extra[n] = v
        return v

    def __call__(self, n: int) -> Fraction:
        return Fraction(self.value12(n), 12)

    # cache file -----------------------------------------------------------
    def save(self, path: str) -> None:
        """Write the dense range atomically in the ``hurwitz12 v1`` text format."""
        tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write(self.HEADER + "\n")
            for n, v in enumerate(self._dense.tolist()):
                fh.write(f"{n}\t{v}\n")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "HurwitzTable":
        """Read a cache file, validating order and the mod-4 vanishing.

        Raises
        ------
        ValueError
            On a bad header, non-ascending or non-contiguous indices, or a value
            violating ``12H(n) = 0`` for ``n = 1, 2 (mod 4)`` / ``12H(n) >= 0``.
        """
        with open(path, encoding="ascii") as fh:
            header = fh.readline().rstrip("\n")
            if header != cls.HEADER:
                raise ValueError(f"bad Hurwitz cache header {header!r}")
            vals = []
            for lineno, line in enumerate(fh, start=2):
                a, b = line.rstrip("\n").split("\t")
                n, v = int(a), int(b)
                if n != len(vals):
                    raise ValueError(f"line {lineno}: expected index {len(vals)}, got {n}")
                if n == 0 and v != -1:
                    raise ValueError("12H(0) must be -1")
                if n > 0 and (v < 0 or (n % 4 in (1, 2) and v != 0)):
                    raise ValueError(f"line {lineno}: invalid value 12H({n}) = {v}")
                vals.append(v)
        t = cls()
        if vals:
            t._dense = np.array(vals, dtype=np.int64)
        return t


def hurwitz12_single(n: int) -> int:
    """``12 H(n)`` for one ``n`` by enumerating reduced forms ``(a, b, c)``, ``b >= 0``."""
    if n == 0:
        return -1
    if n % 4 in (1, 2):
        return 0
    total = 0
    a = 1
    while 3 * a * a <= n:
        for b in range(n % 2, a + 1, 2):
            num = b * b + n
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b == a:
                total += 4 if c == a else 12
            elif b == 0:
                total += 6 if c == a else 12
            else:
                total += 12 if c == a else 24
        a += 1
    return total


_HURWITZ = HurwitzTable()


def hurwitz_table() -> HurwitzTable:
    """The process-wide table (see :func:`heckepair.data.warm_hurwitz_cache`)."""
    return _HURWITZ


def load_hurwitz_cache(path: str) -> None:
    """Replace the process-wide table by a validated cache file."""
    global _HURWITZ
    _HURWITZ = HurwitzTable.load(path)


def hurwitz(n: int) -> Fraction:
    """Hurwitz class number ``H(n)``, with ``H(0) = -1/12``."""
    return _HURWITZ(n)


@lru_cache(maxsize=None)
def class_number_weighted(D: int) -> Fraction:
    """``h(D) / (w(D) / 2)`` for a negative discriminant ``D``.

    Obtained from ``H(|D|) = sum_{f^2 | D} h_w(D / f^2)`` by Moebius inversion.
    """
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a negative discriminant")
    n = -D
    total = Fraction(0)
    for f in range(1, isqrt(n) + 1):
        if n % (f * f) == 0 and (D // (f * f)) % 4 in (0, 1):
            mu = moebius(f)
            if mu:
                total += mu * hurwitz(n // (f * f))
    return total


def class_number_primitive_forms(D: int) -> Fraction:
    """Weighted count of reduced primitive forms of discriminant ``D``; oracle only."""
    n = -D
    total = Fraction(0)
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            num = b * b + n
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0) or gcd(gcd(a, abs(b)), c) != 1:
                continue
            if a == b == c:
                total += Fraction(1, 3)
            elif b == 0 and a == c:
                total += Fraction(1, 2)
            else:
                total += 1
        a += 1
    return total


# ---------------------------------------------------------------------------
# trace formula

def _check_nk(N: int, k: int, n: int) -> None:
    if N < 1 or n < 1:
        raise ValueError("N and n must be positive")
    if k < 2 or k % 2:
        raise ValueError("k must be an even integer >= 2")
    if gcd(n, N) != 1:
        raise ValueError(f"gcd(n, N) = {gcd(n, N)} > 1 is not supported")


def _lucas_u(t: int, n: int, m: int) -> int:
    # u_m with u_0 = 0, u_1 = 1, u_{j+1} = t u_j - n u_{j-1}
    a, b = 0, 1
    for _ in range(m - 1):
        a, b = b, t * b - n * a
    return b if m >= 1 else 0


def _root_count(t: int, n: int, N: int, modulus: int) -> int:
    return sum(1 for x in range(N) if (x * x - t * x + n) % modulus == 0)


def _elliptic_weight(t: int, n: int, N: int) -> Fraction:
    # sum_f h_w((t^2 - 4n)/f^2) mu(t, f, n)
    D = t * t - 4 * n
    if N == 1:
        return hurwitz(-D)
    psiN = psi_index(N)
    total = Fraction(0)
    for f in range(1, isqrt(-D) + 1):
        if D % (f * f) or (D // (f * f)) % 4 not in (0, 1):
            continue
        Nf = gcd(N, f)
        cnt = _root_count(t, n, N, N * Nf)
        if cnt == 0:
            continue
        mu = Fraction(psiN, psi_index(N // Nf)) * cnt
        total += class_number_weighted(D // (f * f)) * mu
    return total


@lru_cache(maxsize=None)
def trace_tn_full(N: int, k: int, n: int) -> int:
    """Exact ``Tr T_n`` on ``S_k(Gamma_0(N))`` for ``gcd(n, N) = 1``."""
    _check_nk(N, k, n)
    total = Fraction(0)
    # identity
    if _is_square(n):
        total += Fraction((k - 1) * psi_index(N), 12) * isqrt(n) ** (k - 2)
    # elliptic
    ell = Fraction(0)
    tmax = isqrt(4 * n - 1)
    for t in range(-tmax, tmax + 1):
        w = _elliptic_weight(t, n, N)
        if w:
            ell += _lucas_u(t, n, k - 1) * w
    total -= ell / 2
    # hyperbolic
    hyp = Fraction(0)
    cusp_terms = [(gcd(tau, N // tau)) for tau in divisors(N)]
    for d in divisors(n):
        dp = n // d
        s = sum(euler_phi(g) for g in cusp_terms if (d - dp) % g == 0)
        hyp += min(d, dp) ** (k - 1) * s
    total -= hyp / 2
    if k == 2:
        total += sigma1(n)
    if total.denominator != 1:
        raise ArithmeticError(f"non-integral trace {total} at N={N}, k={k}, n={n}")
    return int(total)


def newform_weight(m: int) -> int:
    """Multiplicative weight ``beta``: -2 at primes, 1 at prime squares, 0 beyond."""
    out = 1
    for _, e in factorize(m):
        out *= (-2, 1, 0)[e - 1] if e <= 3 else 0
    return out


@lru_cache(maxsize=None)
def trace_tn_new(N: int, k: int, n: int) -> int:
    """Trace on the newspace: ``sum_{M | N} beta(N / M) Tr T_n|S_k(M)``."""
    _check_nk(N, k, n)
    return sum(newform_weight(N // M) * trace_tn_full(M, k, n) for M in divisors(N)
               if newform_weight(N // M))


def dim_cusp_forms(N: int, k: int) -> int:
    """Classical dimension of ``S_k(Gamma_0(N))`` (elliptic points and cusps); oracle."""
    if k < 2 or k % 2:
        raise ValueError("k must be an even integer >= 2")
    fac = factorize(N)
    primes = [p for p, _ in fac]
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = math.prod(1 + (0 if p == 2 else (1 if p % 4 == 1 else -1)) for p in primes)
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = math.prod(1 + (0 if p == 3 else (1 if p % 3 == 1 else -1)) for p in primes)
    cusps = sum(euler_phi(gcd(d, N // d)) for d in divisors(N))
    mu = psi_index(N)
    if k == 2:
        g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
        return int(g)
    d = (Fraction((k - 1) * mu, 12) + (k // 4 - Fraction(k - 1, 4)) * nu2
         + (k // 3 - Fraction(k - 1, 3)) * nu3 - Fraction(cusps, 2))
    return int(d)


def dim_new_oracle(N: int, k: int) -> int:
    """Newspace dimension from :func:`dim_cusp_forms` by the same inversion."""
    return sum(newform_weight(N // M) * dim_cusp_forms(M, k) for M in divisors(N))


# ---------------------------------------------------------------------------
# dimensions

def b1(N: int) -> Fraction:
    """Multiplicative ``B_1(N)`` from its prime-power table."""
    out = Fraction(1)
    for q, r in factorize(N):
        if r == 1:
            out *= 1 - Fraction(1, q)
        elif r == 2:
            out *= 1 - Fraction(1, q) - Fraction(1, q * q)
        else:
            out *= (1 - Fraction(1, q)) * (1 - Fraction(1, q * q))
    return out


@dataclass(frozen=True)
class NewspaceSummary:
    """Newspace dimension against its main term ``N B_1(N) (k-1)/12``."""

    N: int
    k: int
    dim: int
    B1: Fraction
    main_term: Fraction
    bound_rhs: float
    nu: int

    @property
    def within_bound(self) -> bool:
        # |dim - main| <= sqrt(N)/2 + 7/12 2^nu + 1, checked exactly:
        # |dim - main| - 7/12 2^nu - 1 <= sqrt(N)/2  <=>  4 x^2 <= N when x >= 0
        x = abs(self.dim - self.main_term) - Fraction(7, 12) * 2 ** self.nu - 1
        return x <= 0 or 4 * x * x <= self.N


def b1_and_dims(N: int, k: int) -> NewspaceSummary:
    """Dimension summary; raises ``ArithmeticError`` if the bound fails."""
    if N < 1 or k < 2 or k % 2:
        raise ValueError("need N >= 1 and even k >= 2")
    B = b1(N)
    s = NewspaceSummary(N, k, trace_tn_new(N, k, 1), B, N * B * Fraction(k - 1, 12),
                        math.sqrt(N) / 2 + 7 / 12 * 2 ** nu(N) + 1, nu(N))
    if not s.within_bound:
        raise ArithmeticError(f"dimension bound violated at N={N}, k={k}: dim={s.dim}")
    return s


# ---------------------------------------------------------------------------
# normalized averages

def normalize(value: int, n: int, k: int, scale: int = 1) -> mpmath.mpf:
    """``value / (scale n^{(k-1)/2})`` at extended precision."""
    with mpmath.workdps(WORK_DPS):
        return mpmath.mpf(value) / (mpmath.mpf(scale) * mpmath.power(n, mpmath.mpf(k - 1) / 2))


def family_avg(N: int, k: int, n: int) -> float:
    """``<a_f(n)>`` over newforms: ``Tr_new T_n / (n^{(k-1)/2} dim)``.

    Raises
    ------
    ValueError
        For an empty newspace.
    """
    d = trace_tn_new(N, k, 1)
    if d <= 0:
        raise ValueError(f"empty family: no newforms at N={N}, k={k}")
    return float(normalize(trace_tn_new(N, k, n), n, k, d))


@dataclass(frozen=True)
class TraceEstimate:
    """``sum_f a_f(n)`` against its main term ``|F| / sqrt(n)`` (squares only)."""

    N: int
    k: int
    n: int
    total: float
    main_term: float
    residual: float
    normalized_residual: float
    normalizer: str


def check_trace_estimate(N: int, k: int, n: int, normalizer: str = "sqrtN") -> TraceEstimate:
    """Residual of the trace estimate divided by ``n sigma0(n) sqrt(N)``.

    ``normalizer="4nu"`` divides by ``n sigma0(n) 4^{nu(N)}`` instead.
    """
    d = trace_tn_new(N, k, 1)
    total = float(normalize(trace_tn_new(N, k, n), n, k))
    main = d / math.sqrt(n) if _is_square(n) else 0.0
    if normalizer == "sqrtN":
        scale = n * sigma0(n) * math.sqrt(N)
    elif normalizer == "4nu":
        scale = n * sigma0(n) * 4 ** nu(N)
    else:
        raise ValueError("normalizer must be 'sqrtN' or '4nu'")
    res = total - main
    return TraceEstimate(N, k, n, total, main, res, res / scale, normalizer)


# ---------------------------------------------------------------------------
# eigenvalues of small newspaces

def _check_caps(N: int, k: int, p: int, d_cap: int, p_cap: int) -> int:
    dim = trace_tn_new(N, k, 1)
    if dim > d_cap:
        raise ValueError(f"newspace dimension {dim} exceeds d_cap={d_cap}; traces up to "
                         f"T_{{p^{dim}}} would be needed")
    if p > p_cap:
        raise ValueError(f"p={p} exceeds p_cap={p_cap} (cost grows like p^(2 dim))")
    if gcd(p, N) != 1:
        raise ValueError(f"p={p} divides the level {N}")
    return dim


def power_sums(N: int, k: int, p: int, d: int) -> list[int]:
    """Exact ``sum_f lambda_f(p)^m`` for ``m = 1..d`` (unnormalized eigenvalues).

    Uses ``lambda^m = sum_i [C(m,i) - C(m,i-1)] p^{i(k-1)} lambda(p^{m-2i})``.
    """
    tr = [trace_tn_new(N, k, p ** j) for j in range(d + 1)]
    out = []
    for m in range(1, d + 1):
        s = 0
        for i in range(m // 2 + 1):
            c = comb(m, i) - (comb(m, i - 1) if i else 0)
            s += c * p ** (i * (k - 1)) * tr[m - 2 * i]
        out.append(s)
    return out


def _elementary_from_power(ps: Sequence[int]) -> list[Fraction]:
    # Newton's identities: j e_j = sum_{i=1}^j (-1)^{i-1} e_{j-i} P_i
    e = [Fraction(1)]
    for j in range(1, len(ps) + 1):
        s = sum((-1) ** (i - 1) * e[j - i] * ps[i - 1] for i in range(1, j + 1))
        e.append(Fraction(s, j))
    return e


def extract_eigenvalues(N: int, k: int, p: int, d: Optional[int] = None,
                        d_cap: int = D_MAX, p_cap: int = P_MAX) -> list[float]:
    """Normalized ``a_f(p)`` over the newforms of level ``N``, weight ``k``, ascending.

    The characteristic polynomial of ``T_p`` on the newspace is recovered from
    power sums by Newton's identities; roots come from the companion matrix and
    are polished by Newton iteration at extended precision.

    Raises
    ------
    ValueError
        If ``d`` disagrees with the newspace dimension, or a cap is exceeded.
    ArithmeticError
        If a root is non-real or violates the Deligne bound.
    """
    dim = _check_caps(N, k, p, d_cap, p_cap)
    if d is not None and d != dim:
        raise ValueError(f"newspace has dimension {dim}, not {d}")
    if dim == 0:
        return []
    e = _elementary_from_power(power_sums(N, k, p, dim))
    for ej in e:
        if ej.denominator != 1:
            raise ArithmeticError("non-integral symmetric function: trace engine inconsistency")
    with mpmath.workdps(WORK_DPS):
        s = mpmath.power(p, mpmath.mpf(k - 1) / 2)
        # monic polynomial in the normalized variable y = lambda / s
        coeffs = [mpmath.mpf((-1) ** j * int(e[j])) / s ** j for j in range(dim + 1)]
        approx = np.roots([float(c) for c in coeffs]) if dim > 1 else np.array([float(coeffs[1]) * -1])
        roots = []
        for r0 in approx:
            if abs(r0.imag) > 1e-6 * max(1.0, abs(r0)):
                raise ArithmeticError(f"non-real root {r0} at N={N}, k={k}, p={p}")
            roots.append(_polish(coeffs, mpmath.mpf(float(r0.real))))
    out = sorted(float(r) for r in roots)
    for r in out:
        if abs(r) > 2.0 + DELIGNE_SLACK:
            raise ArithmeticError(f"root {r} violates the Deligne bound at N={N}, k={k}, p={p}")
    return [min(2.0, max(-2.0, r)) for r in out]


def _polish(coeffs, x):
    for _ in range(60):
        f = mpmath.polyval(coeffs, x)
        df = mpmath.polyval([c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])], x)
        if df == 0:
            break
        step = f / df
        x -= step
        if abs(step) < mpmath.mpf(10) ** (-WORK_DPS + 10):
            break
    return x


def resubstitution_residual(N: int, k: int, p: int, roots: Sequence[float]) -> float:
    """Max relative mismatch of ``sum_f a_f(p)^j`` against the trace-derived power sums."""
    ps = power_sums(N, k, p, len(roots))
    worst = 0.0
    for j, P in enumerate(ps, start=1):
        target = float(normalize(P, p, k * j - j + 1))  # P / p^{j(k-1)/2}
        got = math.fsum(r ** j for r in roots)
        worst = max(worst, abs(got - target) / max(1.0, abs(target)))
    return worst


def _chebyshev_normalized(y: float, m: int) -> mpmath.mpf:
    a, b = mpmath.mpf(0), mpmath.mpf(1)
    for _ in range(m):
        a, b = b, y * b - a
    return b


def eigenvalue_table(N: int, k: int, primes: Sequence[int], d_cap: int = D_MAX,
                     p_cap: int = P_MAX) -> np.ndarray:
    """Normalized ``a_f(p)`` with rows aligned to forms, columns to ``primes``.

    Forms are identified by their eigenvalues at a pivot prime ``p0`` with distinct
    eigenvalues; at each other prime the vector ``(a_f(p))_f`` solves
    ``sum_f a_f(p0^j) a_f(p) = Tr T_{p0^j p} / (p0^j p)^{(k-1)/2}``, ``j < dim``.
    The solution is checked against the eigenvalue multiset at ``p``.
    """
    dim = trace_tn_new(N, k, 1)
    if dim == 0:
        return np.zeros((0, len(primes)))
    for p in primes:
        _check_caps(N, k, p, d_cap, p_cap)
    if dim == 1:
        return np.array([[extract_eigenvalues(N, k, p, 1, d_cap, p_cap)[0] for p in primes]])
    pivot = None
    for p0 in prime_window(p_cap, N).primes.tolist():
        r = extract_eigenvalues(N, k, p0, dim, d_cap, p_cap)
        if min(np.diff(r)) > 1e-6:
            pivot, base = p0, r
            break
    if pivot is None:
        raise ValueError(f"no prime <= {p_cap} separates the {dim} newforms")
    out = np.empty((dim, len(primes)))
    with mpmath.workdps(WORK_DPS):
        V = mpmath.matrix(dim, dim)
        for j in range(dim):
            for f in range(dim):
                V[j, f] = _chebyshev_normalized(mpmath.mpf(base[f]), j)
        for col, p in enumerate(primes):
            if p == pivot:
                out[:, col] = base
                continue
            rhs = mpmath.matrix(dim, 1)
            for j in range(dim):
                rhs[j] = normalize(trace_tn_new(N, k, pivot ** j * p), pivot ** j * p, k)
            sol = mpmath.lu_solve(V, rhs)
            vals = [float(sol[f]) for f in range(dim)]
            ref = extract_eigenvalues(N, k, p, dim, d_cap, p_cap)
            if max(abs(a - b) for a, b in zip(sorted(vals), ref)) > 1e-6:
                raise ArithmeticError(f"eigenvalue alignment failed at p={p}")
            out[:, col] = np.clip(vals, -2.0, 2.0)
    return out


# ---------------------------------------------------------------------------
# family moments

@dataclass(frozen=True)
class FamilyMoment:
    """First and second moments of ``R2`` over a newform family."""

    N: int
    k: int
    config: dict
    mean_r2: float
    mean_r2_sq: float
    variance: float
    main_term: float
    forms_used: int
    klm_max_rel_err: float = field(default=0.0)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def family_angle_sets(N: int, k: int, x_cap: int, p_cap: int = P_MAX, d_cap: int = D_MAX):
    """Per-form :class:`~heckepair.paircorr.AngleSet` over primes ``<= x_cap``."""
    from .paircorr import AngleSet
    if x_cap > p_cap:
        raise ValueError(f"x_cap={x_cap} exceeds p_cap={p_cap}")
    w = prime_window(x_cap, N)
    tab = eigenvalue_table(N, k, w.primes.tolist(), d_cap, p_cap)
    return [AngleSet(f"{N}.{k}.{i}", w, angle_from_eigenvalue(row)) for i, row in enumerate(tab)]


def family_moments(N: int, k: int, c, x_cap: int, p_cap: int = P_MAX,
                   d_cap: int = D_MAX) -> FamilyMoment:
    """Mean, second moment and variance of ``R2`` over the newforms (``dim <= d_cap``)."""
    from .kernels import main_term
    from .paircorr import klm_decomposition, r2_series
    sets = family_angle_sets(N, k, x_cap, p_cap, d_cap)
    if not sets:
        raise ValueError(f"empty family at N={N}, k={k}")
    r2 = [r2_series(a, c) for a in sets]
    worst = 0.0
    for a, r in zip(sets, r2):
        K, L_, M_ = klm_decomposition(a, c)
        if r:
            worst = max(worst, float(abs(K + L_ + M_ - r * r) / (r * r)))
    m1 = math.fsum(r2) / len(r2)
    m2 = math.fsum(r * r for r in r2) / len(r2)
    P = sets[0].count
    return FamilyMoment(N, k, c.as_dict(), m1, m2, m2 - m1 * m1, main_term(c.table(max(P, 1))),
                        len(sets), worst)


# ---------------------------------------------------------------------------
# prime sums of averaged eigenvalues

@dataclass(frozen=True)
class PrimeSumResidual:
    """``(1/|F|) sum_{p <= x} sum_f a_f(p^{2m}) - sum_{p <= x} p^{-m}``."""

    N: int
    k: int
    m: int
    x: int
    average_sum: float
    main_term: float
    residual: float
    loglog_ratio: float


def prime_sum_residual(N: int, k: int, m: int, x: int) -> PrimeSumResidual:
    """Residual of the single-prime average against ``sum_p p^{-m}``.

    ``loglog_ratio`` is ``|residual| / log log x``, the first error shape.
    """
    ps = prime_window(x, N).primes.tolist()
    avg = math.fsum(family_avg(N, k, p ** (2 * m)) for p in ps)
    main = math.fsum(p ** -m for p in ps)
    res = avg - main
    ll = math.log(math.log(x)) if x > 2 else float("nan")
    return PrimeSumResidual(N, k, m, x, avg, main, res, abs(res) / ll)
