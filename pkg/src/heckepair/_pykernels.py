"""Pure numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module (to rounding);
selected automatically when the extension is unavailable.
"""
from __future__ import annotations

import numpy as np

FEJER = 0
RAISED_COSINE = 1

# Below this |sin| the angle-addition route is replaced by direct evaluation.
_SMALL_DEN = 1e-4
_PAIR_BLOCK = 512


def _reduce(theta):
    return theta - np.round(theta)


def fejer_periodized(scale: int, theta):
    """``sum_n g(scale (theta + n))`` for the Fejer pair, in closed form.

    Equals ``(sin(pi scale r) / (scale sin(pi r)))**2`` with ``r = theta mod 1``.
    """
    r = np.asarray(_reduce(np.asarray(theta, dtype=float)))
    s = np.sin(np.pi * r)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.sin(np.pi * scale * r) / (scale * s)) ** 2
    out = np.where(s == 0.0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def _dirichlet(scale: int, r):
    # sum_{|n| <= scale} e(n r), r already reduced to [-1/2, 1/2] up to a shift
    s = np.sin(np.pi * r)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin((2 * scale + 1) * np.pi * r) / s
    return np.where(s == 0.0, 2.0 * scale + 1.0, out)


def raised_cosine_periodized(scale: int, theta):
    """Periodization of the raised-cosine pair, ``hat g(t) = cos^2(pi t / 2)`` on ``[-1, 1]``.

    Written through Dirichlet kernels ``D`` at ``theta`` and ``theta +- 1/(2 scale)``.
    """
    th = np.asarray(theta, dtype=float)
    d = 0.5 / scale
    out = (_dirichlet(scale, _reduce(th))
           + 0.5 * _dirichlet(scale, _reduce(th + d))
           + 0.5 * _dirichlet(scale, _reduce(th - d))) / (2.0 * scale)
    out = np.asarray(out)
    return float(out) if out.ndim == 0 else out


def periodized(kind: int, scale: int, theta):
    if kind == FEJER:
        return fejer_periodized(scale, theta)
    if kind == RAISED_COSINE:
        return raised_cosine_periodized(scale, theta)
    raise ValueError(f"unknown closed-form kind {kind}")


def smooth_pair_sum(w, theta, scale: int, kind: int) -> float:
    """``sum_{p != q} w_p w_q [G(theta_p + theta_q) + G(theta_p - theta_q)]``.

    ``G`` is the closed-form periodized kernel ``kind`` at ``scale``.
    Blocks of rows are summed in a fixed order, so results are reproducible.
    """
    w = np.ascontiguousarray(w, dtype=float)
    th = np.ascontiguousarray(theta, dtype=float)
    n = th.size
    partial = []
    for start in range(0, n, _PAIR_BLOCK):
        stop = min(n, start + _PAIR_BLOCK)
        tp = th[start:stop, None]
        g = periodized(kind, scale, tp + th[None, :]) + periodized(kind, scale, tp - th[None, :])
        g = np.asarray(g)
        idx = np.arange(start, stop)
        g[idx - start, idx] = 0.0
        partial.append(float(w[start:stop] @ (g @ w)))
    return float(np.sum(partial))


def series_sums(t1, theta, nmax: int):
    """Moments of the weighted Chebyshev differences over the primes.

    With ``d_n(p) = a(p^{2n}) - a(p^{2n-2})`` computed by the Hecke recurrence,
    returns ``S[n] = sum_p t1_p d_n(p)`` and ``Q[n] = sum_p (t1_p d_n(p))**2``
    for ``1 <= n <= nmax`` (index 0 is left at zero).
    """
    t1 = np.ascontiguousarray(t1, dtype=float)
    th = np.ascontiguousarray(theta, dtype=float)
    S = np.zeros(nmax + 1)
    Q = np.zeros(nmax + 1)
    x = 2.0 * np.cos(np.pi * th)
    a_even = np.ones_like(th)       # a(p^{2n-2})
    a_odd = np.zeros_like(th)       # a(p^{2n-3}), with a(p^{-1}) = 0
    for n in range(1, nmax + 1):
        a_odd = x * a_even - a_odd          # a(p^{2n-1})
        a_next = x * a_odd - a_even         # a(p^{2n})
        v = t1 * (a_next - a_even)
        S[n] = v.sum()
        Q[n] = (v * v).sum()
        a_even = a_next
    return S, Q


def difference_table(theta, nmax: int) -> np.ndarray:
    """``D[p, n] = a(p^{2n}) - a(p^{2n-2})`` for ``1 <= n <= nmax``; column 0 holds 2."""
    th = np.ascontiguousarray(theta, dtype=float)
    D = np.empty((th.size, nmax + 1))
    D[:, 0] = 2.0
    x = 2.0 * np.cos(np.pi * th)
    a_even = np.ones_like(th)
    a_odd = np.zeros_like(th)
    for n in range(1, nmax + 1):
        a_odd = x * a_even - a_odd
        a_next = x * a_odd - a_even
        D[:, n] = a_next - a_even
        a_even = a_next
    return D


def hurwitz12_table(max_n: int) -> np.ndarray:
    """``12 H(n)`` for ``0 <= n <= max_n`` by counting reduced binary quadratic forms.

    Forms ``(a, b, c)`` with ``4ac - b^2 = n``, ``|b| <= a <= c`` and ``b >= 0``
    when ``|b| = a`` or ``a = c``; imprimitive forms included, ``a(x^2+y^2)``
    weighted 1/2 and ``a(x^2+xy+y^2)`` weighted 1/3.
    """
    out = np.zeros(max_n + 1, dtype=np.int64)
    out[0] = -1
    a = 1
    while 3 * a * a <= max_n:
        for b in range(0, a + 1):
            c_max = (max_n + b * b) // (4 * a)
            if c_max < a:
                continue
            c = np.arange(a, c_max + 1, dtype=np.int64)
            n = 4 * a * c - b * b
            wt = np.full(c.size, 24 if 0 < b < a else 12, dtype=np.int64)
            # a == c: only b >= 0 is reduced
            if b > 0:
                wt[0] = 12
            if b == 0:
                wt[0] = 6
            if b == a:
                wt[:] = 12
                wt[0] = 4
            np.add.at(out, n, wt)
        a += 1
    return out
