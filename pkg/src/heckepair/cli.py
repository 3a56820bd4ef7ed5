"""Command-line interface: ``heckepair <command> [options]``.

Commands: identities, kernel, single, family, mc, trace, dims, fetch.

Options may also come from a flat ``key = value`` config file (``--config``);
flags override the file, which overrides the defaults. The merged configuration
is echoed in every report. Exit status is 1 if any reported check failed and 2
on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from . import __version__
from ._backend import BACKEND

SCHEMA = "heckepair.report/1"
COMMANDS = ("identities", "kernel", "single", "family", "mc", "trace", "dims", "fetch")
DEFAULT_SCHEDULE = "50:1000,100:10000,200:100000,400:1000000"

# option -> (type, default); shared by flags and the config file
OPTIONS: dict[str, tuple[Any, Any]] = {
    "format": (str, None),
    "output": (str, None),
    "threads": (int, 1),
    "seed": (int, 42),
    "timing": (bool, False),
    "trials": (int, 1000),
    "psi": (float, 0.25),
    "L": (int, 10),
    "x": (int, 1000),
    "s": (float, 1.0),
    "rho": (str, "fejer"),
    "g": (str, "fejer"),
    "n_cap": (int, None),
    "klm_method": (str, "auto"),
    "form": (str, "delta"),
    "schedule": (str, DEFAULT_SCHEDULE),
    "level": (int, 1),
    "weight": (int, 12),
    "n": (int, 1),
    "new": (bool, False),
    "mode": (str, "moments"),
    "x_cap": (int, 19),
    "p_cap": (int, 20),
    "d_cap": (int, 3),
    "normalizer": (str, "sqrtN"),
    "experiment": (str, "poisson"),
    "size": (int, 10000),
    "sizes": (str, "100,10000"),
    "forms": (int, 200),
    "model": (str, "sato_tate"),
    "index": (int, 1),
    "count": (int, 100),
}

COMMAND_OPTIONS = {
    "identities": ["trials", "seed"],
    "kernel": ["psi", "rho", "g", "schedule"],
    "single": ["form", "x", "psi", "L", "rho", "g", "s", "n_cap", "klm_method"],
    "family": ["level", "weight", "mode", "n", "psi", "L", "rho", "g", "s", "x_cap", "p_cap",
               "d_cap", "normalizer"],
    "mc": ["experiment", "size", "sizes", "trials", "forms", "model", "seed", "psi", "L", "rho",
           "g"],
    "trace": ["level", "weight", "n", "new"],
    "dims": ["level", "weight"],
    "fetch": ["level", "weight", "index", "count"],
}
COMMON = ["format", "output", "threads", "timing"]

HINTS = {
    "psi": "choose psi in (0, 1) other than 1/2, e.g. --psi 0.25",
    "cap": "lower --x-cap or raise --p-cap / --d-cap (cost grows quickly)",
    "gcd": "pick n coprime to the level",
    "network": "set HECKEPAIR_LMFDB_URL or pre-populate HECKEPAIR_CACHE_DIR",
}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration

def read_config_file(path: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys use underscores."""
    out: dict[str, Any] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, val = (t.strip() for t in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in OPTIONS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, val)
    return out


def _coerce(key: str, val: str):
    typ = OPTIONS[key][0]
    if typ is bool:
        if val.lower() in ("1", "true", "yes", "on"):
            return True
        if val.lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {val!r}")
    if val.lower() == "none":
        return None
    try:
        return typ(val)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {val!r} as {typ.__name__}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heckepair", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"heckepair {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd, help=_HELP[cmd])
        sp.add_argument("--config", default=argparse.SUPPRESS, help="flat key = value file")
        for key in COMMAND_OPTIONS[cmd] + COMMON:
            typ, _ = OPTIONS[key]
            flag = "--" + key.replace("_", "-")
            if typ is bool:
                sp.add_argument(flag, dest=key, action="store_true", default=argparse.SUPPRESS)
            elif key == "format":
                sp.add_argument(flag, dest=key, choices=("json", "csv", "text"),
                                default=argparse.SUPPRESS)
            else:
                sp.add_argument(flag, dest=key, type=typ, default=argparse.SUPPRESS)
    return p


_HELP = {
    "identities": "randomized checks of the Hecke and kernel identities",
    "kernel": "main term T(g,rho)/4L against its Poisson limit",
    "single": "per-form statistics for delta or an LMFDB form",
    "family": "family moments, averages and trace estimates",
    "mc": "Monte Carlo Poisson and variance experiments",
    "trace": "exact trace of a Hecke operator",
    "dims": "newspace dimension and its bound",
    "fetch": "download and cache LMFDB coefficients",
}


def merge_config(args: argparse.Namespace) -> dict[str, Any]:
    cmd = args.command
    cfg = {k: OPTIONS[k][1] for k in COMMAND_OPTIONS[cmd] + COMMON}
    cfg["format"] = "text" if cmd in ("trace", "dims") else "json"
    if getattr(args, "config", None):
        for k, v in read_config_file(args.config).items():
            if k in cfg:
                cfg[k] = v
    for k, v in vars(args).items():
        if k in cfg:
            cfg[k] = v
    if cfg["threads"] < 1:
        raise UsageError("--threads must be at least 1")
    return cfg


# ---------------------------------------------------------------------------
# reports

def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    return v


def new_report(command: str, config: dict) -> dict:
    return {"schema": SCHEMA, "tool_version": __version__, "backend": BACKEND,
            "command": command, "config": dict(config), "seed": config.get("seed"),
            "checks": [], "results": {}}


def add_check(report: dict, name: str, passed: bool, value=None, tol=None) -> None:
    report["checks"].append({"name": name, "passed": bool(passed), "value": value, "tol": tol})


def emit(report: dict, fmt: str = "json") -> bytes:
    """Serialize a report: canonical JSON or CSV (``# key=value`` preamble, then rows).

    CSV rows come from ``results["rows"]`` when present (columns in first-row order),
    else one ``key,value`` row per scalar result; checks follow in their own block.
    """
    rep = _plain(report)
    if fmt == "json":
        return (json.dumps(rep, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for key in ("schema", "tool_version", "backend", "command", "seed"):
            buf.write(f"# {key}={rep.get(key)}\n")
        buf.write(f"# config={json.dumps(rep.get('config', {}), sort_keys=True)}\n")
        res = rep.get("results", {}) or {}
        rows = res.get("rows")
        if rows:
            cols = list(rows[0].keys())
            w.writerow(cols)
            for r in rows:
                w.writerow([_csv_cell(r.get(c)) for c in cols])
        else:
            w.writerow(["key", "value"])
            for k in sorted(res):
                w.writerow([k, _csv_cell(res[k])])
        w.writerow([])
        w.writerow(["check", "passed", "value", "tol"])
        for c in rep.get("checks", []):
            w.writerow([c["name"], c["passed"], _csv_cell(c["value"]), _csv_cell(c["tol"])])
        return buf.getvalue().encode()
    if fmt == "text":
        return _text(rep).encode()
    raise UsageError(f"unknown format {fmt!r}")


def _csv_cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else v


def _text(rep: dict) -> str:
    res = rep.get("results", {})
    if "value" in res and len(res) == 1:
        return f"{res['value']}\n"
    lines = [f"{k}: {res[k]}" for k in sorted(res)]
    for c in rep.get("checks", []):
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def _pair_config(cfg):
    from .paircorr import PairCorrConfig
    return PairCorrConfig(psi=cfg["psi"], L=cfg["L"], rho=cfg["rho"], g=cfg["g"],
                          s=cfg.get("s", 1.0), n_cap=cfg.get("n_cap"))


def cmd_identities(cfg, rep):
    from .arith import check_cosine_identity, hecke_product_residuals
    from .kernels import FEJER, eval_kernel, lattice_sum_oracle, make_kernel, mean_mass_identity, u_table
    from .montecarlo import generator
    rng = generator(cfg["seed"], 0)
    worst_cos = worst_hecke = 0.0
    for _ in range(cfg["trials"]):
        th1, th2 = rng.random(2)
        i, j, l, n = (int(v) for v in rng.integers(0, 21, size=4))
        a, b = check_cosine_identity(float(th1), l)
        worst_cos = max(worst_cos, abs(a - b))
        res = hecke_product_residuals(float(th1), float(th2), i, j, l, n)
        worst_hecke = max(worst_hecke, max(res.values()))
    worst_kernel = worst_mass = 0.0
    for L in (2, 10, 50):
        k = make_kernel(FEJER, L)
        for th in rng.random(5):
            worst_kernel = max(worst_kernel, abs(eval_kernel(k, th) - lattice_sum_oracle(FEJER, L, th, 200000)))
        for psi in (0.1, 0.25, 0.3, 0.4):
            lhs, rhs = mean_mass_identity(u_table(FEJER, L, psi), k)
            worst_mass = max(worst_mass, abs(lhs - rhs))
    rep["results"] = {"trials": cfg["trials"], "max_cosine_residual": worst_cos,
                      "max_hecke_residual": worst_hecke, "max_kernel_error": worst_kernel,
                      "max_mean_mass_error": worst_mass}
    add_check(rep, "cosine_identity", worst_cos < 1e-9, worst_cos, 1e-9)
    add_check(rep, "hecke_products", worst_hecke < 1e-9, worst_hecke, 1e-9)
    add_check(rep, "kernel_vs_lattice", worst_kernel < 1e-6, worst_kernel, 1e-6)
    add_check(rep, "mean_mass_identity", worst_mass < 1e-8, worst_mass, 1e-8)


def _parse_schedule(text: str):
    try:
        pairs = [tuple(int(v) for v in item.split(":")) for item in text.split(",") if item]
        assert all(len(p) == 2 for p in pairs)
    except (ValueError, AssertionError):
        raise UsageError("--schedule must look like 50:1000,100:10000") from None
    return pairs


def cmd_kernel(cfg, rep):
    from .kernels import coefficient_table, get_test_function, main_term, poisson_limit
    rho, g = get_test_function(cfg["rho"]), get_test_function(cfg["g"])
    target = poisson_limit(cfg["psi"], g, rho)
    rows = []
    for L, M in _parse_schedule(cfg["schedule"]):
        mt = main_term(coefficient_table(rho, g, L, M, cfg["psi"]))
        rows.append({"L": L, "M": M, "main_term": mt, "poisson": target,
                     "abs_error": abs(mt - target)})
    rep["results"] = {"rows": rows}
    errs = [r["abs_error"] for r in rows]
    add_check(rep, "error_strictly_decreasing", all(b < a for a, b in zip(errs, errs[1:])))
    if target:
        add_check(rep, "final_within_5pct", errs[-1] / abs(target) < 0.05, errs[-1] / abs(target), 0.05)


def _load_form(cfg):
    from . import data
    form = cfg["form"]
    if form == "delta":
        return data.delta_series(max(cfg["x"], 2))
    if form.startswith("lmfdb:"):
        try:
            N, k, i = (int(v) for v in form[6:].split("."))
        except ValueError:
            raise UsageError("--form lmfdb:<N>.<k>.<i>, e.g. lmfdb:11.2.1") from None
        return data.lmfdb_fetch(data.RemoteFormRef(N, k, i, cfg["x"]))
    raise UsageError("--form must be 'delta' or 'lmfdb:<N>.<k>.<i>'")


def cmd_single(cfg, rep):
    from . import data, paircorr
    series = _load_form(cfg)
    a = data.angles_from_series(series, cfg["x"])
    c = _pair_config(cfg)
    r = paircorr.report(a, c, cfg["klm_method"])
    out = r.as_dict()
    out["n_rho_series"] = paircorr.n_rho_series(a, c)
    out["power_sums"] = [paircorr.power_sum_report(a, l) for l in (1, 2, 3)]
    rep["results"] = out
    add_check(rep, "r2_routes_agree", _rel(r.r2, r.r2_series) < 1e-9, _rel(r.r2, r.r2_series), 1e-9)
    if math.isfinite(r.k_part):
        tot = r.k_part + r.l_part + r.m_part
        add_check(rep, "klm_sum_equals_r2_squared", _rel(tot, r.r2_series ** 2) < 1e-9,
                  _rel(tot, r.r2_series ** 2), 1e-9)
    nd = abs(r.n_rho - out["n_rho_series"])
    add_check(rep, "n_rho_series_form", nd < 1e-9, nd, 1e-9)


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300) if b else abs(a)


def cmd_family(cfg, rep):
    from . import traceformula as tf
    N, k = cfg["level"], cfg["weight"]
    mode = cfg["mode"]
    if mode == "moments":
        m = tf.family_moments(N, k, _pair_config(cfg), cfg["x_cap"], cfg["p_cap"], cfg["d_cap"])
        rep["results"] = m.as_dict()
        add_check(rep, "variance_nonnegative", m.variance >= -1e-9, m.variance, -1e-9)
        add_check(rep, "klm_identity", m.klm_max_rel_err < 1e-9, m.klm_max_rel_err, 1e-9)
    elif mode == "avg":
        rep["results"] = {"N": N, "k": k, "n": cfg["n"], "average": tf.family_avg(N, k, cfg["n"])}
    elif mode == "estimate":
        rep["results"] = dict(tf.check_trace_estimate(N, k, cfg["n"], cfg["normalizer"]).__dict__)
    else:
        raise UsageError("--mode must be moments, avg or estimate")


def cmd_mc(cfg, rep):
    from . import montecarlo as mc
    c = _pair_config(cfg)
    if cfg["experiment"] == "poisson":
        s = mc.SampleConfig(cfg["size"], cfg["seed"], cfg["model"])
        t = mc.poisson_expectation_experiment(c, s, cfg["trials"], cfg["threads"])
        rep["results"] = t.as_dict()
        add_check(rep, "mean_within_3_stderr", abs(t.mean - t.target) <= 3 * t.stderr,
                  t.z_score, 3.0)
    elif cfg["experiment"] == "variance":
        try:
            sizes = [int(v) for v in cfg["sizes"].split(",")]
        except ValueError:
            raise UsageError("--sizes must be a comma list, e.g. 100,10000") from None
        rows = mc.variance_trend_experiment(c, sizes, cfg["forms"], cfg["seed"], cfg["model"],
                                            cfg["threads"])
        rep["results"] = {"rows": [{"size": n, "variance": v} for n, v in rows]}
        add_check(rep, "variance_decreases", rows[-1][1] < rows[0][1])
    else:
        raise UsageError("--experiment must be poisson or variance")


def cmd_trace(cfg, rep):
    from . import traceformula as tf
    f = tf.trace_tn_new if cfg["new"] else tf.trace_tn_full
    rep["results"] = {"value": f(cfg["level"], cfg["weight"], cfg["n"])}


def cmd_dims(cfg, rep):
    from . import traceformula as tf
    s = tf.b1_and_dims(cfg["level"], cfg["weight"])
    rep["results"] = {"N": s.N, "k": s.k, "dim": s.dim, "B1": s.B1, "main_term": s.main_term,
                      "bound": s.bound_rhs, "nu": s.nu}
    add_check(rep, "dimension_bound", s.within_bound)


def cmd_fetch(cfg, rep):
    from . import data
    ref = data.RemoteFormRef(cfg["level"], cfg["weight"], cfg["index"], cfg["count"])
    s = data.lmfdb_fetch(ref)
    rep["results"] = {"label": s.label, "count": s.n_max, "cache_path": ref.cache_path(),
                      "a": list(s.a[1:])}


HANDLERS = {"identities": cmd_identities, "kernel": cmd_kernel, "single": cmd_single,
            "family": cmd_family, "mc": cmd_mc, "trace": cmd_trace, "dims": cmd_dims,
            "fetch": cmd_fetch}


def _hint(msg: str) -> str:
    low = msg.lower()
    if "psi" in low:
        return HINTS["psi"]
    if "cap" in low or "dimension" in low:
        return HINTS["cap"]
    if "gcd" in low:
        return HINTS["gcd"]
    if "fetch" in low:
        return HINTS["network"]
    return "see heckepair <command> --help"


def run(argv: Optional[list[str]] = None) -> tuple[int, Optional[dict]]:
    """Parse ``argv``, execute, and return ``(exit status, report)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = merge_config(args)
        rep = new_report(args.command, cfg)
        t0 = time.perf_counter()
        HANDLERS[args.command](cfg, rep)
        if cfg["timing"]:
            rep["wall_clock_seconds"] = time.perf_counter() - t0
    except Exception as exc:
        from .data import FetchError
        if isinstance(exc, (UsageError, ValueError, FetchError)):
            msg = str(exc)
            print(f"heckepair {args.command}: error: {msg}\nhint: {_hint(msg)}", file=sys.stderr)
            return 2, None
        raise
    payload = emit(rep, cfg["format"])
    if cfg["output"]:
        with open(cfg["output"], "wb") as fh:
            fh.write(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    failed = any(not c["passed"] for c in rep["checks"])
    return (1 if failed else 0), rep


def main(argv: Optional[list[str]] = None) -> int:
    status, _ = run(argv)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
