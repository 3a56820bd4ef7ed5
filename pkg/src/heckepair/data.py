"""Eigenform coefficient data: the Ramanujan Delta function, eta products, LMFDB, caches."""
from __future__ import annotations

import hashlib
import json
import math
import os
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional

import mpmath
import numpy as np

from .arith import angle_from_eigenvalue, prime_window
from .paircorr import AngleSet

DEFAULT_LMFDB_URL = "https://www.lmfdb.org/api/mf_newforms/"
CACHE_VERSION = 1
# Primes just below 2^30 used for the multimodular Delta expansion.
CRT_PRIMES = (1073741789, 1073741783, 1073741741, 1073741723, 1073741719, 1073741717,
              1073741689, 1073741671)


class FetchError(RuntimeError):
    """Remote data unavailable and no cache entry to fall back on."""


class ParseError(ValueError):
    """Remote payload does not have the expected shape."""


@dataclass(frozen=True)
class CoefficientSeries:
    """Unnormalized Hecke eigenvalues ``a(n)``, ``1 <= n <= n_max`` (``a[0] = 0``)."""

    label: str
    weight: int
    level: int
    a: tuple = field(repr=False)

    @property
    def n_max(self) -> int:
        return len(self.a) - 1

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise IndexError(f"coefficient {n} outside 1..{self.n_max}")
        return self.a[n]

    def normalized(self, n: int) -> float:
        """``a(n) / n^{(k-1)/2}`` at extended precision."""
        with mpmath.workdps(40):
            return float(mpmath.mpf(self.a[n]) / mpmath.power(n, mpmath.mpf(self.weight - 1) / 2))


# ---------------------------------------------------------------------------
# Delta and eta products

def _eta_cubed_terms(n_max: int):
    # eta^3 / q^{1/8} = sum_m (-1)^m (2m+1) q^{m(m+1)/2}
    m = np.arange(int(math.isqrt(2 * n_max)) + 2)
    e = m * (m + 1) // 2
    keep = e <= n_max
    return e[keep], ((-1) ** m * (2 * m + 1))[keep]


def _delta_mod(n_max: int, prime: int) -> np.ndarray:
    # coefficients of prod (1-q^n)^24 mod prime, up to q^{n_max - 1}
    size = n_max
    exps, coefs = _eta_cubed_terms(size - 1)
    coefs = coefs % prime
    base = np.zeros(size, dtype=np.int64)
    base[exps] = coefs
    cur = base.copy()
    for _ in range(7):
        nxt = np.zeros(size, dtype=np.int64)
        for e, c in zip(exps.tolist(), coefs.tolist()):
            nxt[e:] = (nxt[e:] + c * cur[:size - e]) % prime
        cur = nxt
    return cur


def delta_series(n_max: int) -> CoefficientSeries:
    """``tau(n)`` for ``n <= n_max`` from ``q (eta^3)^8``, exact via CRT over 30-bit primes."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    bits = math.log2(4.0) + 6.0 * math.log2(max(n_max, 2))  # |tau(n)| <= 2 n^6
    count = int(bits // 29) + 1
    if count > len(CRT_PRIMES):
        raise ValueError(f"n_max={n_max} too large for the built-in CRT primes")
    mods = CRT_PRIMES[:count]
    res = [_delta_mod(n_max, p).tolist() for p in mods]
    Mtot = math.prod(mods)
    parts = [(Mtot // p) * pow(Mtot // p, -1, p) for p in mods]
    half = Mtot // 2
    a = [0]
    for i in range(n_max):
        v = sum(r[i] * w for r, w in zip(res, parts)) % Mtot
        a.append(v - Mtot if v > half else v)
    return CoefficientSeries("1.12.a.a", 12, 1, tuple(a))


def _eta_series(d: int, n_max: int) -> list[int]:
    # prod_n (1 - q^{dn}) to q^{n_max}, by Euler's pentagonal theorem
    out = [0] * (n_max + 1)
    m = 0
    while True:
        done = True
        for j in ((m, -m) if m else (0,)):
            e = d * j * (3 * j - 1) // 2
            if e <= n_max:
                out[e] += -1 if m % 2 else 1
                done = False
        if done:
            break
        m += 1
    return out


def _mul(a: list, b: list, n_max: int) -> list:
    out = [0] * (n_max + 1)
    nz = [(i, v) for i, v in enumerate(b) if v]
    for i, v in enumerate(a):
        if v:
            for j, w in nz:
                if i + j > n_max:
                    break
                out[i + j] += v * w
    return out


def eta_product_series(factors: Mapping[int, int], n_max: int, weight: int, level: int,
                       label: str = "") -> CoefficientSeries:
    """``prod_d eta(dz)^{e_d}`` as exact integers, for nonnegative ``e_d``.

    The leading power ``q^{sum d e_d / 24}`` must be integral (it is 1 for the
    eigenforms used in the test suite).
    """
    shift24 = sum(d * e for d, e in factors.items())
    if shift24 % 24 or any(e < 0 for e in factors.values()):
        raise ValueError("need nonnegative exponents with integral q-order")
    shift = shift24 // 24
    body = [1] + [0] * n_max
    for d, e in factors.items():
        s = _eta_series(d, n_max)
        for _ in range(e):
            body = _mul(body, s, n_max)
    a = [0] * (n_max + 1)
    for i in range(n_max + 1 - shift):
        a[i + shift] = body[i]
    return CoefficientSeries(label or f"eta{dict(factors)}", weight, level, tuple(a))


def angles_from_series(s: CoefficientSeries, x: int) -> AngleSet:
    """Hecke angles of ``s`` at primes ``p <= x`` coprime to the level.

    Raises
    ------
    ValueError
        If ``x`` exceeds the available coefficients.
    DeligneBoundError
        If a normalized eigenvalue leaves ``[-2, 2]`` beyond the rounding slack.
    """
    if x > s.n_max:
        raise ValueError(f"x={x} exceeds the series length {s.n_max}")
    w = prime_window(x, s.level)
    vals = np.array([s.normalized(int(p)) for p in w.primes], dtype=float)
    return AngleSet(s.label, w, np.atleast_1d(angle_from_eigenvalue(vals)) if vals.size else vals)


# ---------------------------------------------------------------------------
# cache

_write_lock = threading.Lock()


def cache_dir() -> str:
    return os.environ.get("HECKEPAIR_CACHE_DIR",
                          os.path.join(os.path.expanduser("~"), ".cache", "heckepair"))


def cache_path(kind: str, key: str, root: Optional[str] = None) -> str:
    """``<root>/cache/<kind>/<key>.json``."""
    return os.path.join(root or cache_dir(), "cache", kind, f"{key}.json")


def cache_io(path: str, payload: str) -> str:
    """Write ``payload`` as a versioned, checksummed entry; returns ``"written"``.

    The entry goes to a temporary file that is renamed into place, so readers
    see the old entry or the new one, never a partial file.
    """
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    env = {"version": CACHE_VERSION,
           "sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
           "payload": payload}
    tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(env, fh, sort_keys=True)
    with _write_lock:
        os.replace(tmp, path)
    return "written"


def cache_read(path: str) -> Optional[str]:
    """Payload of a valid entry, or ``None`` when absent.

    Entries with a bad envelope or checksum are renamed to ``*.corrupt`` and
    treated as absent, so the caller recomputes.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    except FileNotFoundError:
        return None
    try:
        env = json.loads(raw)
        payload = env["payload"]
        ok = (env.get("version") == CACHE_VERSION and
              hashlib.sha256(payload.encode("utf-8")).hexdigest() == env.get("sha256"))
    except (ValueError, KeyError, TypeError, AttributeError):
        ok = False
    if not ok:
        os.replace(path, path + ".corrupt")
        return None
    return payload


def hurwitz_cache_file(root: Optional[str] = None) -> str:
    return os.path.join(root or cache_dir(), "cache", "hurwitz12.txt")


def warm_hurwitz_cache(max_n: int, root: Optional[str] = None) -> str:
    """Load the Hurwitz cache file if it covers ``max_n``, else build and save it."""
    from . import traceformula as tf
    path = hurwitz_cache_file(root)
    if os.path.exists(path):
        try:
            tab = tf.HurwitzTable.load(path)
            if tab.max_n >= max_n:
                tf._HURWITZ = tab
                return path
        except ValueError:
            os.replace(path, path + ".corrupt")
    tf.hurwitz_table().extend(max_n)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tf.hurwitz_table().save(path)
    return path


# ---------------------------------------------------------------------------
# LMFDB

def orbit_letter(index: int) -> str:
    """Galois-orbit label for a 1-based index: ``1 -> a``, ``26 -> z``, ``27 -> ba``."""
    if index < 1:
        raise ValueError("index is 1-based")
    i = index - 1
    s = ""
    while True:
        s = chr(ord("a") + i % 26) + s
        i //= 26
        if i == 0:
            return s


@dataclass(frozen=True)
class RemoteFormRef:
    """Newform ``N.k.a.<letter>`` and how many coefficients to keep."""

    level: int
    weight: int
    index: int = 1
    count: int = 100

    @property
    def label(self) -> str:
        return f"{self.level}.{self.weight}.a.{orbit_letter(self.index)}"

    @property
    def key(self) -> str:
        return f"{self.label}-n{self.count}"

    def cache_path(self, root: Optional[str] = None) -> str:
        return cache_path("lmfdb", self.key, root)


def parse_lmfdb_payload(raw: str, ref: RemoteFormRef) -> CoefficientSeries:
    """Coefficients from an ``mf_newforms`` JSON response (``data[0].traces``).

    Raises
    ------
    ParseError
        Naming the missing or malformed field.
    """
    try:
        doc = json.loads(raw)
    except ValueError as exc:
        raise ParseError(f"response is not JSON: {exc}") from None
    data = doc.get("data") if isinstance(doc, dict) else None
    if not isinstance(data, list) or not data:
        raise ParseError("field 'data': expected a non-empty list")
    rec = data[0]
    if not isinstance(rec, dict):
        raise ParseError("field 'data[0]': expected an object")
    if rec.get("label", ref.label) != ref.label:
        raise ParseError(f"field 'label': got {rec.get('label')!r}, expected {ref.label!r}")
    if "dim" in rec and rec["dim"] != 1:
        raise ParseError(f"field 'dim': {rec['dim']} (only rational newforms are supported)")
    traces = rec.get("traces")
    if not isinstance(traces, list) or not all(isinstance(v, int) for v in traces):
        raise ParseError("field 'traces': expected a list of integers")
    if len(traces) >= 2 and traces[0] == 0 and traces[1] == 1:
        traces = traces[1:]  # tolerate a leading a(0) = 0
    if not traces or traces[0] != 1:
        raise ParseError("field 'traces': a(1) must equal 1")
    if len(traces) < ref.count:
        raise ParseError(f"field 'traces': {len(traces)} values, {ref.count} requested")
    series = CoefficientSeries(ref.label, ref.weight, ref.level, tuple([0] + traces[:ref.count]))
    for p in prime_window(series.n_max, ref.level).primes.tolist():
        angle_from_eigenvalue(series.normalized(p))  # Deligne bound
    return series


def lmfdb_fetch(ref: RemoteFormRef, session=None, root: Optional[str] = None,
                base_url: Optional[str] = None, timeout: float = 30.0) -> CoefficientSeries:
    """Coefficients of a newform, from the cache or the LMFDB JSON API.

    A valid cache entry is used without touching the network. Otherwise the raw
    response is validated, cached and parsed.

    Raises
    ------
    FetchError
        If the request fails and no cache entry exists.
    ParseError
        If the response does not match the expected schema.
    """
    path = ref.cache_path(root)
    raw = cache_read(path)
    if raw is not None:
        return parse_lmfdb_payload(raw, ref)
    url = base_url or os.environ.get("HECKEPAIR_LMFDB_URL", DEFAULT_LMFDB_URL)
    params = {"label": ref.label, "_format": "json", "_fields": "label,dim,traces"}
    if session is None:
        import requests
        session = requests.Session()
    try:
        resp = session.get(url, params=params, timeout=timeout)
        resp.raise_for_status()
        raw = resp.text
    except Exception as exc:  # network layer errors vary by transport
        raise FetchError(f"could not fetch {ref.label} from {url}: {exc}") from exc
    series = parse_lmfdb_payload(raw, ref)
    cache_io(path, raw)
    return series
