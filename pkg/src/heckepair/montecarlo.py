"""Random angle sets standing in for Hecke angles of a generic form.

Streams come from numpy's Philox4x64 counter-based generator. Trial ``i`` of a
run with seed ``s`` draws from ``Philox(SeedSequence([s, i]))``, so trials are
independent of scheduling and can run on any number of threads; results are
merged in trial order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .arith import PrimeWindow, first_primes, straighten
from .kernels import poisson_limit
from .paircorr import AngleSet, PairCorrConfig, r2_smooth

MODELS = ("sato_tate", "uniform")
TABLE_NODES = 4096
INVERSION_TOL = 1e-12


@dataclass(frozen=True)
class SampleConfig:
    """Sample size, seed and model (``"sato_tate"`` or ``"uniform"``)."""

    n: int
    seed: int = 0
    model: str = "sato_tate"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TrialSummary:
    trials: int
    mean: float
    stderr: float
    target: float

    @property
    def z_score(self) -> float:
        return (self.mean - self.target) / self.stderr if self.stderr > 0 else 0.0

    def as_dict(self) -> dict:
        return {"trials": self.trials, "mean": self.mean, "stderr": self.stderr,
                "target": self.target}


def generator(*key: int) -> np.random.Generator:
    """Philox stream for the integer key ``(seed, trial, ...)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


# H^{-1} starting table on Chebyshev nodes of [0, 1]
_j = np.arange(TABLE_NODES)
_NODES = np.sort(0.5 - 0.5 * np.cos(np.pi * (_j + 0.5) / TABLE_NODES))
_NODES = np.concatenate(([0.0], _NODES, [1.0]))
_HVALS = np.asarray(straighten(_NODES))


def inverse_straighten(u) -> np.ndarray:
    """Solve ``H(theta) = u`` for ``u`` in ``[0, 1]``.

    Table bracket, then Newton steps kept inside the bracket (bisection when a step
    leaves it) until the bracket or the residual is below ``1e-12``.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u must lie in [0, 1]")
    k = np.clip(np.searchsorted(_HVALS, u, side="right") - 1, 0, _NODES.size - 2)
    lo = _NODES[k].copy()
    hi = _NODES[k + 1].copy()
    th = np.interp(u, _HVALS, _NODES)
    for _ in range(100):
        f = th - np.sin(2 * np.pi * th) / (2 * np.pi) - u
        done = (np.abs(f) < 1e-15) | (hi - lo < INVERSION_TOL)
        if np.all(done):
            break
        pos = f > 0
        hi = np.where(pos, th, hi)
        lo = np.where(pos, lo, th)
        d = 2.0 * np.sin(np.pi * th) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = th - f / d
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        # converged entries keep their iterate
        th = np.where(done, th, np.where(bad, 0.5 * (lo + hi), cand))
    return np.clip(th, 0.0, 1.0)


def _synthetic_window(n: int) -> PrimeWindow:
    ps = first_primes(n)
    return PrimeWindow(int(ps[-1]), 1, ps)


def _draw(n: int, model: str, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    return u if model == "uniform" else inverse_straighten(u)


def sample_angles(c: SampleConfig, trial: int = 0) -> AngleSet:
    """``n`` i.i.d. angles (Sato-Tate or uniform) on the first ``n`` primes."""
    th = _draw(c.n, c.model, generator(c.seed, trial))
    return AngleSet(f"{c.model}:seed={c.seed}:trial={trial}", _synthetic_window(c.n), th)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _summary(values: Sequence[float], target: float) -> TrialSummary:
    v = np.asarray(values, dtype=float)
    n = v.size
    mean = math.fsum(v) / n
    var = math.fsum((v - mean) ** 2) / (n - 1) if n > 1 else 0.0
    return TrialSummary(n, mean, math.sqrt(var / n), target)


def poisson_expectation_experiment(c: PairCorrConfig, s: SampleConfig, trials: int,
                                   threads: int = 1) -> TrialSummary:
    """Mean and standard error of ``R2`` over independent samples; target the Poisson limit."""
    if trials < 2:
        raise ValueError("need at least 2 trials")
    vals = _map(lambda i: r2_smooth(sample_angles(s, i), c), range(trials), threads)
    return _summary(vals, poisson_limit(c.psi, c.g, c.rho))


def variance_trend_experiment(c: PairCorrConfig, sizes: Sequence[int], forms_per_size: int,
                              seed: int, model: str = "sato_tate",
                              threads: int = 1) -> list[tuple[int, float]]:
    """Empirical variance of ``R2`` across ``forms_per_size`` synthetic forms per size.

    Form ``j`` at size index ``i`` uses the stream ``(seed, i, j)``.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    out = []
    for i, n in enumerate(sizes):
        window = _synthetic_window(n)

        def one(j, n=n, i=i, window=window):
            th = _draw(n, model, generator(seed, i, j))
            return r2_smooth(AngleSet(f"{model}:{seed}:{i}:{j}", window, th), c)

        vals = np.asarray(_map(one, range(forms_per_size), threads))
        mean = math.fsum(vals) / vals.size
        out.append((n, math.fsum((vals - mean) ** 2) / vals.size))
    return out


def ks_uniform_distance(u) -> float:
    """Kolmogorov-Smirnov distance of a sample from the uniform law on ``[0, 1]``."""
    x = np.sort(np.asarray(u, dtype=float))
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))
