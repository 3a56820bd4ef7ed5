"""Fourier-side test functions, their periodizations and the main-term coefficients.

A test function is described by its Fourier transform ``hat f`` supported in
``[-1, 1]``. Periodizing at scale ``L`` gives the cosine polynomial

    f_L(theta) = sum_n f(L (theta + n)) = (1/L) sum_{|l| < L} hat f(l/L) e(l theta),

stored as :class:`PeriodizedKernel`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _backend
from ._quad import integrate

# Reject psi this close to 0, 1/2 or 1.
PSI_EPS = 1e-12


@dataclass(frozen=True)
class SpectralTestFunction:
    """Even test function given on the Fourier side, supported in ``[-1, 1]``.

    Attributes
    ----------
    name : str
    fourier_eval : callable
        Vectorized ``t -> hat f(t)``; must vanish for ``|t| > 1``.
    value_at_zero : float
        ``hat f(0)``.
    square_integral : float
        ``int_{-1}^{1} hat f(t)^2 dt``, i.e. ``(f * f)(0)`` for even real ``f``.
    space_eval : callable, optional
        Closed form of ``f`` on the space side, used by the lattice-sum oracle.
    closed_kind : int, optional
        Backend code for a closed-form periodization (Fejer or raised cosine).
    """

    name: str
    fourier_eval: Callable = field(repr=False)
    value_at_zero: float
    square_integral: float
    space_eval: Optional[Callable] = field(default=None, repr=False)
    closed_kind: Optional[int] = field(default=None, repr=False)

    def __call__(self, t):
        return self.fourier_eval(t)


def _triangle_hat(t):
    t = np.abs(np.asarray(t, dtype=float))
    out = np.clip(1.0 - t, 0.0, None)
    return float(out) if out.ndim == 0 else out


def _fejer_space(x):
    x = np.asarray(x, dtype=float)
    out = np.sinc(x) ** 2
    return float(out) if out.ndim == 0 else out


def _raised_hat(t):
    t = np.asarray(t, dtype=float)
    out = np.where(np.abs(t) <= 1.0, np.cos(0.5 * np.pi * t) ** 2, 0.0)
    return float(out) if out.ndim == 0 else out


def _raised_space(x):
    # int cos^2(pi t/2) e(xt) dt over [-1, 1] = sinc(2x) / (1 - 4x^2)
    x = np.asarray(x, dtype=float)
    den = 1.0 - 4.0 * x * x
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sinc(2.0 * x) / den
    out = np.where(np.abs(den) < 1e-9, 0.5, out)
    return float(out) if out.ndim == 0 else out


def _zero_hat(t):
    out = np.zeros_like(np.asarray(t, dtype=float))
    return float(out) if out.ndim == 0 else out


FEJER = SpectralTestFunction("fejer", _triangle_hat, 1.0, 2.0 / 3.0,
                             _fejer_space, _backend.FEJER)
RAISED_COSINE = SpectralTestFunction("raised_cosine", _raised_hat, 1.0, 0.75,
                                     _raised_space, _backend.RAISED_COSINE)
ZERO = SpectralTestFunction("zero", _zero_hat, 0.0, 0.0, lambda x: 0.0 * np.asarray(x, float))

BUILTINS = {"fejer": FEJER, "triangle": FEJER, "raised_cosine": RAISED_COSINE, "zero": ZERO}


def get_test_function(name: str) -> SpectralTestFunction:
    """Look up a built-in test function by name."""
    try:
        return BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown test function {name!r}; choose from {sorted(BUILTINS)}") from None


@dataclass(frozen=True)
class PeriodizedKernel:
    """Cosine polynomial ``c_0 + sum_{l >= 1} c_l 2 cos(2 pi l theta)``."""

    scale: int
    coeffs: np.ndarray = field(repr=False)
    source: Optional[SpectralTestFunction] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, theta):
        return eval_kernel(self, theta)


def make_kernel(f: SpectralTestFunction, scale: int) -> PeriodizedKernel:
    """Fourier coefficients ``c_l = hat f(l / scale) / scale`` for ``0 <= l <= scale``."""
    if int(scale) != scale or scale < 1:
        raise ValueError("scale must be a positive integer")
    scale = int(scale)
    l = np.arange(scale + 1)
    c = np.asarray(f.fourier_eval(l / scale), dtype=float) / scale
    return PeriodizedKernel(scale, c, f)


def eval_kernel(k: PeriodizedKernel, theta):
    """Evaluate the cosine sum at ``theta`` (scalar or array); exactly 1-periodic.

    The argument is reduced mod 1 before the cosines are formed.
    """
    th = np.asarray(theta, dtype=float)
    r = th - np.floor(th)
    c = k.coeffs
    if c.size == 1:
        out = np.full(r.shape, c[0])
    else:
        l = np.arange(1, c.size)
        out = c[0] + 2.0 * np.cos(2.0 * np.pi * np.multiply.outer(r, l)) @ c[1:]
    return float(out) if np.ndim(out) == 0 else out


def lattice_sum_oracle(f: SpectralTestFunction, scale: int, theta: float, terms: int) -> float:
    """Truncated space-side periodization ``sum_{|n| <= terms} f(scale (theta + n))``."""
    if f.space_eval is None:
        raise ValueError(f"test function {f.name!r} has no space-side form")
    n = np.arange(-terms, terms + 1, dtype=float)
    vals = np.asarray(f.space_eval(scale * (theta + n)), dtype=float)
    # add small terms first
    order = np.argsort(np.abs(n))[::-1]
    return math.fsum(vals[order])


def _check_psi(psi: float) -> float:
    psi = float(psi)
    if not (PSI_EPS < psi < 1.0 - PSI_EPS) or abs(psi - 0.5) < PSI_EPS:
        raise ValueError("psi must lie in (0, 1) and differ from 1/2")
    return psi


def amplitude(psi: float) -> float:
    """Sato-Tate density at the centre, ``A = 2 sin^2(pi psi)``."""
    return 2.0 * math.sin(math.pi * psi) ** 2


@dataclass(frozen=True)
class CoefficientTable:
    """``U(0..L)`` and ``G(0..M)`` at the centre ``psi``.

    ``G`` is empty (and ``M = 0``) for a table built by :func:`u_table` alone.
    """

    psi: float
    A: float
    L: int
    M: int
    U: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("U", "G"):
            a = np.array(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def with_g(self, g: SpectralTestFunction, M: int) -> "CoefficientTable":
        """Attach ``G(n) = hat g(n / M)`` for ``0 <= n <= M``."""
        if int(M) != M or M < 1:
            raise ValueError("M must be a positive integer")
        G = np.asarray(g.fourier_eval(np.arange(M + 1) / M), dtype=float)
        return CoefficientTable(self.psi, self.A, self.L, int(M), self.U, G)


def u_table(rho: SpectralTestFunction, L: int, psi: float) -> CoefficientTable:
    """``U(l) = rho^(l/L) 2cos(2 pi l psi) - rho^((l+1)/L) 2cos(2 pi (l+1) psi)``, ``0 <= l <= L``."""
    if int(L) != L or L < 1:
        raise ValueError("L must be a positive integer")
    psi = _check_psi(psi)
    L = int(L)
    l = np.arange(L + 2)
    term = np.asarray(rho.fourier_eval(l / L), dtype=float) * 2.0 * np.cos(2.0 * np.pi * l * psi)
    term[L + 1] = 0.0  # argument beyond the support
    U = term[:-1] - term[1:]
    return CoefficientTable(psi, amplitude(psi), L, 0, U, np.zeros(0))


def coefficient_table(rho: SpectralTestFunction, g: SpectralTestFunction, L: int, M: int,
                      psi: float) -> CoefficientTable:
    """Full table: :func:`u_table` plus ``G(n) = hat g(n / M)``."""
    return u_table(rho, L, psi).with_g(g, M)


def t_g_rho(table: CoefficientTable) -> float:
    """Main-term sum ``T(g, rho) = sum_{l >= 1} (U(l) - U(l-1))^2 G(l)``.

    Runs over ``1 <= l <= min(L + 1, M)``, using ``U(L + 1) = 0``.
    """
    if table.M < 1:
        raise ValueError("table has no G coefficients; use with_g")
    top = min(table.L + 1, table.M)
    U = np.append(table.U, 0.0)
    d = U[1:top + 1] - U[:top]
    return math.fsum(d * d * table.G[1:top + 1])


def main_term(table: CoefficientTable) -> float:
    """Predicted mean ``T(g, rho) / (4 L)``."""
    return t_g_rho(table) / (4.0 * table.L)


def poisson_limit(psi: float, g: SpectralTestFunction, rho: SpectralTestFunction) -> float:
    """``A^2 hat g(0) (rho * rho)(0)`` with ``(rho * rho)(0) = int hat rho^2``."""
    psi = _check_psi(psi)
    return amplitude(psi) ** 2 * g.value_at_zero * rho.square_integral


def mean_mass_identity(table: CoefficientTable, rho_kernel: PeriodizedKernel) -> tuple[float, float]:
    """Both sides of ``U(0) / 2L = int_0^1 rho_L(t - psi) mu(t) dt``.

    The right side is computed by composite Gauss-Legendre quadrature.
    """
    psi = table.psi
    lhs = float(table.U[0]) / (2.0 * table.L)

    def integrand(t):
        return eval_kernel(rho_kernel, t - psi) * 2.0 * np.sin(np.pi * t) ** 2

    return lhs, integrate(integrand, 0.0, 1.0)


def square_integral_quadrature(f: SpectralTestFunction) -> float:
    """``int_{-1}^{1} hat f(t)^2 dt`` by quadrature (split at the kink at 0)."""
    sq = lambda t: np.asarray(f.fourier_eval(t), dtype=float) ** 2  # noqa: E731
    return integrate(sq, -1.0, 0.0) + integrate(sq, 0.0, 1.0)
