import json
import math
import os
import threading

import numpy as np
import pytest

from heckepair import data
from heckepair import traceformula as tf
from heckepair.arith import DeligneBoundError, primes_upto, straighten
from heckepair.montecarlo import ks_uniform_distance


def dense_delta(n_max):
    """q prod (1 - q^n)^24 by repeated dense multiplication."""
    poly = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        for _ in range(24):
            for i in range(n_max, n - 1, -1):
                poly[i] -= poly[i - n]
    return [0] + poly[:n_max]


class TestDelta:
    def test_small(self, delta_1000):
        assert delta_1000[1] == 1 and delta_1000[2] == -24 and delta_1000[3] == 252
        assert delta_1000[6] == -6048 == delta_1000[2] * delta_1000[3]

    def test_dense_oracle(self):
        s = data.delta_series(40)
        assert list(s.a) == dense_delta(40)

    def test_eta24_product(self):
        s = data.eta_product_series({1: 24}, 60, 12, 1, "eta24")
        assert s.a[:61] == data.delta_series(60).a

    def test_multiplicative(self):
        s = data.delta_series(10_000)
        for m in range(2, 101):
            for n in range(m + 1, 10_000 // m + 1):
                if math.gcd(m, n) == 1:
                    assert s[m * n] == s[m] * s[n]

    def test_hecke_recursion(self, delta_1e5):
        s = delta_1e5
        for p in primes_upto(100).tolist():
            j = 1
            while p ** (j + 1) <= s.n_max and j <= 5:
                assert s[p ** (j + 1)] == s[p] * s[p ** j] - p ** 11 * s[p ** (j - 1)]
                j += 1

    def test_known_large(self, delta_1e5):
        # tau(p) for a few primes against the trace engine
        for n in (97, 1009, 99991):
            if n <= 1009:
                assert delta_1e5[n] == tf.trace_tn_full(1, 12, n)
        assert abs(delta_1e5.normalized(99991)) <= 2

    def test_crt_primes(self):
        from heckepair.traceformula import factorize
        assert len(set(data.CRT_PRIMES)) == len(data.CRT_PRIMES)
        assert all(p < 2 ** 30 and factorize(p) == ((p, 1),) for p in data.CRT_PRIMES)

    def test_invalid(self):
        with pytest.raises(ValueError):
            data.delta_series(0)


class TestEtaProducts:
    def test_level11(self):
        s = data.eta_product_series({1: 2, 11: 2}, 11, 2, 11, "11.2.a.a")
        assert list(s.a[1:]) == [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1]

    def test_matches_trace(self):
        s = data.eta_product_series({1: 2, 11: 2}, 60, 2, 11, "11.2.a.a")
        for p in primes_upto(60).tolist():
            if p != 11:
                assert s[p] == tf.trace_tn_new(11, 2, p)


class TestAngles:
    def test_delta_p2(self, delta_1000):
        a = data.angles_from_series(delta_1000, 200)
        want = math.acos(-24 / (2 * 2 ** 5.5)) / math.pi
        assert a.angles[0] == pytest.approx(want, abs=1e-14)
        assert want == pytest.approx(0.58543, abs=1e-5)
        assert a.count == 46 and np.all((a.angles >= 0) & (a.angles <= 1))

    def test_delta_1e5(self, delta_1e5):
        a = data.angles_from_series(delta_1e5, 100_000)
        assert a.count == 9592
        assert ks_uniform_distance(straighten(a.angles)) < 1.63 / math.sqrt(a.count)

    def test_deligne_violation(self):
        s = data.CoefficientSeries("bad", 2, 1, (0, 1, 3, 1))
        with pytest.raises(DeligneBoundError):
            data.angles_from_series(s, 3)

    def test_x_too_large(self, delta_1000):
        with pytest.raises(ValueError):
            data.angles_from_series(delta_1000, 2000)

    def test_level_excludes_primes(self):
        s = data.eta_product_series({1: 2, 11: 2}, 50, 2, 11, "11.2.a.a")
        a = data.angles_from_series(s, 50)
        assert 11 not in a.window.primes.tolist()


class TestCache:
    def test_round_trip(self, tmp_path):
        p = data.cache_path("k", "x", str(tmp_path))
        assert p == os.path.join(str(tmp_path), "cache", "k", "x.json")
        assert data.cache_io(p, "payload é") == "written"
        assert data.cache_read(p) == "payload é"

    def test_missing(self, tmp_path):
        assert data.cache_read(str(tmp_path / "none.json")) is None

    def test_flipped_byte(self, tmp_path):
        p = data.cache_path("k", "y", str(tmp_path))
        data.cache_io(p, "hello world")
        raw = open(p).read().replace("hello", "hellp")
        open(p, "w").write(raw)
        assert data.cache_read(p) is None
        assert os.path.exists(p + ".corrupt") and not os.path.exists(p)

    def test_garbage(self, tmp_path):
        p = tmp_path / "g.json"
        p.write_text("{not json")
        assert data.cache_read(str(p)) is None

    def test_concurrent_readers(self, tmp_path):
        p = data.cache_path("k", "z", str(tmp_path))
        payloads = ["A" * 200_000, "B" * 300_000]
        data.cache_io(p, payloads[0])
        seen, stop = [], threading.Event()

        def reader():
            while not stop.is_set():
                seen.append(data.cache_read(p))

        def writer():
            for i in range(60):
                data.cache_io(p, payloads[i % 2])
            stop.set()

        rs = [threading.Thread(target=reader) for _ in range(3)]
        for t in rs:
            t.start()
        writer()
        for t in rs:
            t.join()
        assert seen and all(v in payloads for v in seen)
        assert not os.path.exists(p + ".corrupt")

    def test_env_dir(self, cache_root):
        assert data.cache_dir() == cache_root

    def test_hurwitz_warm(self, cache_root):
        path = data.warm_hurwitz_cache(3000)
        assert os.path.exists(path) and open(path).readline().strip() == "# hurwitz12 v1"
        assert tf.HurwitzTable.load(path).max_n >= 3000
        # a second call loads the file
        assert data.warm_hurwitz_cache(2000) == path


class FakeResponse:
    def __init__(self, text, status=200):
        self.text = text
        self.status_code = status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise RuntimeError(f"HTTP {self.status_code}")


class FakeSession:
    def __init__(self, text=None, fail=False, status=200):
        self.text, self.fail, self.status, self.calls = text, fail, status, []

    def get(self, url, params=None, timeout=None):
        self.calls.append((url, params))
        if self.fail:
            raise ConnectionError("network unreachable")
        return FakeResponse(self.text, self.status)


def payload(label, traces, **extra):
    rec = {"label": label, "dim": 1, "traces": traces}
    rec.update(extra)
    return json.dumps({"data": [rec]})


class TestLmfdb:
    def test_orbit_letters(self):
        assert [data.orbit_letter(i) for i in (1, 2, 26, 27, 28)] == ["a", "b", "z", "ba", "bb"]

    def test_fetch_11(self, cache_root):
        ref = data.RemoteFormRef(11, 2, 1, 100)
        traces = list(data.eta_product_series({1: 2, 11: 2}, 100, 2, 11, "").a[1:])
        sess = FakeSession(payload("11.2.a.a", traces))
        s = data.lmfdb_fetch(ref, session=sess)
        assert s[2] == -2 == tf.trace_tn_new(11, 2, 2)
        assert len(sess.calls) == 1 and sess.calls[0][1]["label"] == "11.2.a.a"
        # warm cache: no network, identical series and raw bytes
        dead = FakeSession(fail=True)
        assert data.lmfdb_fetch(ref, session=dead) == s
        assert dead.calls == []
        assert data.cache_read(ref.cache_path()) == payload("11.2.a.a", traces)

    def test_delta_matches(self, cache_root, delta_1000):
        ref = data.RemoteFormRef(1, 12, 1, 100)
        raw = payload("1.12.a.a", [0] + list(delta_1000.a[1:101]))  # leading a(0)
        s = data.lmfdb_fetch(ref, session=FakeSession(raw))
        assert s.a == delta_1000.a[:101]

    def test_network_failure(self, cache_root):
        with pytest.raises(data.FetchError):
            data.lmfdb_fetch(data.RemoteFormRef(11, 2), session=FakeSession(fail=True))
        with pytest.raises(data.FetchError):
            data.lmfdb_fetch(data.RemoteFormRef(11, 2), session=FakeSession("", status=503))

    @pytest.mark.parametrize("raw, field", [
        ("<html>", "JSON"),
        (json.dumps({"data": []}), "data"),
        (json.dumps({"data": [{"label": "11.2.a.a", "traces": "x"}]}), "traces"),
        (json.dumps({"data": [{"label": "11.2.a.b", "traces": [1]}]}), "label"),
        (json.dumps({"data": [{"label": "11.2.a.a", "dim": 2, "traces": [2]}]}), "dim"),
        (json.dumps({"data": [{"label": "11.2.a.a", "traces": [2, 3]}]}), "a\\(1\\)"),
        (json.dumps({"data": [{"label": "11.2.a.a", "traces": [1, -2]}]}), "requested"),
    ])
    def test_schema_errors(self, cache_root, raw, field):
        with pytest.raises(data.ParseError, match=field):
            data.lmfdb_fetch(data.RemoteFormRef(11, 2, 1, 100), session=FakeSession(raw))
        # nothing cached on failure
        assert not os.path.exists(data.RemoteFormRef(11, 2, 1, 100).cache_path())

    def test_deligne_checked(self, cache_root):
        traces = [1, 5] + [0] * 98
        with pytest.raises(DeligneBoundError):
            data.lmfdb_fetch(data.RemoteFormRef(11, 2, 1, 100), session=FakeSession(payload("11.2.a.a", traces)))

    def test_base_url_env(self, cache_root, monkeypatch):
        monkeypatch.setenv("HECKEPAIR_LMFDB_URL", "https://mirror.invalid/api/")
        sess = FakeSession(fail=True)
        with pytest.raises(data.FetchError):
            data.lmfdb_fetch(data.RemoteFormRef(11, 2), session=sess)
        assert sess.calls[0][0] == "https://mirror.invalid/api/"
